"""Exact integer linear algebra on plain list-of-list matrices.

Everything here works over Z with arbitrary-precision ints; no floats.
Matrices are lists of rows.  These are the low-level kernels behind the
IntMatrix / FgModule layer in fgab.  Row and column eliminations use 2x2
unimodular extended-gcd transforms, which keeps entry growth tame.
"""

from __future__ import annotations

from math import gcd as _gcd


def eye(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def zeros(m, n):
    return [[0] * n for _ in range(m)]


def mat_mul(a, b):
    m, k = len(a), len(a[0]) if a else 0
    n = len(b[0]) if b else 0
    out = [[0] * n for _ in range(m)]
    for i in range(m):
        ai = a[i]
        oi = out[i]
        for t in range(k):
            c = ai[t]
            if c:
                bt = b[t]
                for j in range(n):
                    if bt[j]:
                        oi[j] += c * bt[j]
    return out


def mat_vec(a, x):
    return [sum(c * v for c, v in zip(row, x)) for row in a]


def transpose(a):
    if not a:
        return []
    return [list(col) for col in zip(*a)]


def _egcd(a, b):
    """(g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


class SmithForm:
    """u @ a @ v == d with u, v unimodular and d diagonal, d_i | d_{i+1} >= 0."""

    __slots__ = ("d", "u", "v", "uinv", "vinv", "rank", "diag", "shape")

    def __init__(self, d, u, v, uinv, vinv, shape):
        self.d = d
        self.u = u
        self.v = v
        self.uinv = uinv
        self.vinv = vinv
        self.shape = shape
        m, n = shape
        self.diag = [d[i][i] for i in range(min(m, n))]
        self.rank = sum(1 for x in self.diag if x != 0)


def smith(a, ncols=None):
    """Smith normal form with all four transforms tracked exactly."""
    m = len(a)
    n = len(a[0]) if m else (ncols or 0)
    d = [list(row) for row in a]
    u, uinv = eye(m), eye(m)
    v, vinv = eye(n), eye(n)

    def rows2(i, j, s, t, uu, vv):
        # rows i, j <- (s*row_i + t*row_j, uu*row_i + vv*row_j); det(s*vv - t*uu) = 1
        d[i], d[j] = (
            [s * x + t * y for x, y in zip(d[i], d[j])],
            [uu * x + vv * y for x, y in zip(d[i], d[j])],
        )
        u[i], u[j] = (
            [s * x + t * y for x, y in zip(u[i], u[j])],
            [uu * x + vv * y for x, y in zip(u[i], u[j])],
        )
        for r in range(m):
            xi, xj = uinv[r][i], uinv[r][j]
            uinv[r][i] = vv * xi - uu * xj
            uinv[r][j] = -t * xi + s * xj

    def cols2(i, j, s, t, uu, vv):
        # cols i, j <- (s*col_i + t*col_j, uu*col_i + vv*col_j); det(s*vv - t*uu) = 1
        for r in range(m):
            xi, xj = d[r][i], d[r][j]
            d[r][i] = s * xi + t * xj
            d[r][j] = uu * xi + vv * xj
        for r in range(n):
            xi, xj = v[r][i], v[r][j]
            v[r][i] = s * xi + t * xj
            v[r][j] = uu * xi + vv * xj
        vinv[i], vinv[j] = (
            [vv * x - uu * y for x, y in zip(vinv[i], vinv[j])],
            [-t * x + s * y for x, y in zip(vinv[i], vinv[j])],
        )

    def row_elim(i, j):
        # zero d[j][t0] against pivot row i (at column col), pivot becomes the gcd
        a0, b0 = d[i][col], d[j][col]
        if b0 == 0:
            return
        if a0 and b0 % a0 == 0:
            rows2(i, j, 1, 0, -(b0 // a0), 1)
            return
        g, s, t = _egcd(a0, b0)
        rows2(i, j, s, t, -(b0 // g), a0 // g)

    def col_elim(i, j):
        a0, b0 = d[row][i], d[row][j]
        if b0 == 0:
            return
        if a0 and b0 % a0 == 0:
            cols2(i, j, 1, 0, -(b0 // a0), 1)
            return
        g, s, t = _egcd(a0, b0)
        cols2(i, j, s, t, -(b0 // g), a0 // g)

    def swap_rows(i, j):
        rows2(i, j, 0, 1, -1, 0)

    def swap_cols(i, j):
        cols2(i, j, 0, 1, -1, 0)

    t0 = 0
    while t0 < min(m, n):
        # move a nonzero entry of minimal magnitude to the pivot seat
        piv = None
        best = None
        for i in range(t0, m):
            for j in range(t0, n):
                x = d[i][j]
                if x and (best is None or abs(x) < best):
                    best = abs(x)
                    piv = (i, j)
                    if best == 1:
                        break
            if best == 1:
                break
        if piv is None:
            break
        if piv[0] != t0:
            swap_rows(t0, piv[0])
        if piv[1] != t0:
            swap_cols(t0, piv[1])
        col = t0
        row = t0
        # each pass either finishes or strictly shrinks |pivot|: gcd steps mix
        # the pivot row/column, exact-division steps leave them untouched
        while True:
            for i in range(t0 + 1, m):
                row_elim(t0, i)
            if not any(d[t0][j] for j in range(t0 + 1, n)):
                break
            for j in range(t0 + 1, n):
                col_elim(t0, j)
            if not any(d[i][t0] for i in range(t0 + 1, m)):
                break
        if d[t0][t0] < 0:
            d[t0] = [-x for x in d[t0]]
            u[t0] = [-x for x in u[t0]]
            for r in range(m):
                uinv[r][t0] = -uinv[r][t0]
        # enforce divisibility of the trailing block by the pivot
        bad = None
        for i in range(t0 + 1, m):
            for j in range(t0 + 1, n):
                if d[i][j] % d[t0][t0]:
                    bad = i
                    break
            if bad is not None:
                break
        if bad is not None:
            rows2(t0, bad, 1, 1, 0, 1)
            continue
        t0 += 1
    return SmithForm(d, u, v, uinv, vinv, (m, n))


def solve(a, b, ncols=None):
    """One integer solution x of a @ x == b, or None."""
    m = len(a)
    n = len(a[0]) if m else (ncols or 0)
    if m == 0:
        return [0] * n
    s = smith(a, n)
    y = mat_vec(s.u, b)
    xprime = [0] * n
    for i in range(m):
        di = s.diag[i] if i < len(s.diag) else 0
        if di != 0:
            if y[i] % di:
                return None
            xprime[i] = y[i] // di
        elif y[i] != 0:
            return None
    return mat_vec(s.v, xprime)


def kernel_basis(a, ncols=None):
    """Basis (list of length-n vectors) of the integer kernel of a."""
    m = len(a)
    n = len(a[0]) if m else (ncols or 0)
    if m == 0:
        return [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    s = smith(a, n)
    cols = []
    for j in range(n):
        if j >= min(m, n) or s.diag[j] == 0:
            cols.append([s.v[i][j] for i in range(n)])
    return cols


def column_lattice_basis(a, ncols=None):
    """Basis of the lattice spanned by the columns of a (list of m-vectors)."""
    m = len(a)
    if m == 0:
        return []
    n = len(a[0]) if a else (ncols or 0)
    if n == 0:
        return []
    s = smith(a, n)
    basis = []
    for i in range(min(m, n)):
        if s.diag[i]:
            basis.append([s.uinv[r][i] * s.diag[i] for r in range(m)])
    return basis


def is_identity(a):
    return all(a[i][j] == (1 if i == j else 0) for i in range(len(a)) for j in range(len(a[0]) if a else 0))


def _vq(x, q):
    if x == 0:
        return None
    v = 0
    while x % q == 0:
        x //= q
        v += 1
    return v


def _solve_prime_power(rows, rhs, q, e):
    """One solution of rows @ x = rhs mod q^e, or None.  Entries stay reduced."""
    mod = q**e
    m = len(rows)
    n = len(rows[0]) if m else 0
    a = [[x % mod for x in row] + [b % mod] for row, b in zip(rows, rhs)]
    pivots = []
    used_rows = set()
    used_cols = set()
    while True:
        best = None
        for i in range(m):
            if i in used_rows:
                continue
            for j in range(n):
                if j in used_cols:
                    continue
                v = _vq(a[i][j], q)
                if v is not None and (best is None or v < best[0]):
                    best = (v, i, j)
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        v, i, j = best
        unit = a[i][j] // q**v
        inv = pow(unit % mod, -1, mod)
        a[i] = [(x * inv) % mod for x in a[i]]
        for i2 in range(m):
            if i2 == i or i2 in used_rows:
                continue
            b = a[i2][j]
            if b:
                factor = b // q**v  # exact: minimality of v gives q^v | b
                a[i2] = [(x - factor * y) % mod for x, y in zip(a[i2], a[i])]
        used_rows.add(i)
        used_cols.add(j)
        pivots.append((i, j, v))
    for i in range(m):
        if i in used_rows:
            continue
        if a[i][n] % mod:
            return None
    x = [0] * n
    for i, j, v in reversed(pivots):
        val = (a[i][n] - sum(a[i][c] * x[c] for c in range(n) if c != j)) % mod
        if val % q**v:
            return None
        x[j] = (val // q**v) % (q ** (e - v))
    return x


def solve_congruences(rows, rhs, moduli):
    """One integer solution of row . x = b (mod m) for each row, or None.

    Split per prime of the moduli; each prime-power system is solved by exact
    chain-ring elimination, and the answers recombine by CRT.
    """
    if not rows:
        return []
    n = len(rows[0])
    primes = {}
    for m in moduli:
        mm = m
        d = 2
        while d * d <= mm:
            while mm % d == 0:
                primes[d] = max(primes.get(d, 0), 0)
                mm //= d
            d += 1 if d == 2 else 2
        if mm > 1:
            primes[mm] = 0
    for qprime in list(primes):
        e = 0
        for m in moduli:
            v = 0
            mm = m
            while mm % qprime == 0:
                mm //= qprime
                v += 1
            e = max(e, v)
        primes[qprime] = e
    solution = [0] * n
    modulus_so_far = 1
    for qprime, e in sorted(primes.items()):
        if e == 0:
            continue
        scaled_rows = []
        scaled_rhs = []
        for row, b, m in zip(rows, rhs, moduli):
            v = 0
            mm = m
            while mm % qprime == 0:
                mm //= qprime
                v += 1
            if v == 0:
                continue
            scale = qprime ** (e - v)
            scaled_rows.append([x * scale for x in row])
            scaled_rhs.append(b * scale)
        if not scaled_rows:
            continue
        xq = _solve_prime_power(scaled_rows, scaled_rhs, qprime, e)
        if xq is None:
            return None
        qe = qprime**e
        if modulus_so_far == 1:
            solution = [x % qe for x in xq]
            modulus_so_far = qe
        else:
            inv = pow(modulus_so_far % qe, -1, qe)
            solution = [
                s + modulus_so_far * (((x - s) * inv) % qe) for s, x in zip(solution, xq)
            ]
            modulus_so_far *= qe
    return solution

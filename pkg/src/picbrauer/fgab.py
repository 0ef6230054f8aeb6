"""Finitely generated abelian groups at p-adic precision, with exact linear algebra.

An FgModule is Z_p^r + Z/d_1 + ... + Z/d_k in invariant-factor form
(d_i | d_{i+1}).  Free summands are genuine Z_p's: structure is reported
exactly, element arithmetic on free coordinates is carried mod p^N.
Torsion orders prime to p are exact integers, never p-adic approximations.

All computations route through Smith normal form over Z.  Results on the
p-primary-plus-free coordinate slice are then localized at p (torsion keeps
only its p-part), which is base change along Z -> Z_p for finitely generated
modules; the prime-to-p slice is computed exactly over Z with no completion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd, prod

from . import _intlinalg as la

DEFAULT_PRECISION = 16


class PrecisionOverflow(Exception):
    """A p-power torsion order exceeded p^precision."""


class InvalidClass(Exception):
    """An extension class lies outside the computed Ext group."""


class InvalidModuleMap(Exception):
    """An integer matrix does not define a map of the stated modules."""


def factorize(n):
    """Prime factorization {p: e} by trial division; orders here are small."""
    n = abs(n)
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def p_part(n, p):
    q = 1
    while n % p == 0:
        n //= p
        q *= p
    return q


def prime_to_p_part(n, p):
    return n // p_part(n, p)


def vp(n, p):
    """p-adic valuation of a nonzero integer."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class IntMatrix:
    """Immutable exact integer matrix."""

    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise ValueError("inconsistent matrix dimensions")

    @classmethod
    def from_rows(cls, rows, cols=None):
        rows = [tuple(int(x) for x in r) for r in rows]
        m = len(rows)
        n = len(rows[0]) if rows else (cols or 0)
        return cls(m, n, tuple(rows))

    @classmethod
    def identity(cls, n):
        return cls.from_rows(la.eye(n), n)

    @classmethod
    def zero(cls, m, n):
        return cls(m, n, tuple(tuple(0 for _ in range(n)) for _ in range(m)))

    def to_lists(self):
        return [list(r) for r in self.entries]

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        return IntMatrix.from_rows(la.mat_mul(self.to_lists(), other.to_lists()), other.cols)

    def __add__(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        return IntMatrix.from_rows(
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)], self.cols
        )

    def scaled(self, c):
        return IntMatrix.from_rows([[c * x for x in r] for r in self.entries], self.cols)

    def transpose(self):
        return IntMatrix.from_rows(la.transpose(self.to_lists()), self.rows)

    def column(self, j):
        return [r[j] for r in self.entries]

    def apply(self, vec):
        return la.mat_vec(self.to_lists(), list(vec))

    def is_zero(self):
        return all(x == 0 for r in self.entries for x in r)

    def power(self, k):
        out = IntMatrix.identity(self.rows)
        base = self
        while k:
            if k & 1:
                out = out @ base
            base = base @ base
            k >>= 1
        return out


def smith_normal_form(m: IntMatrix):
    """(d, u, v) with u @ m @ v = d, u and v unimodular, diagonal d_i | d_{i+1} >= 0."""
    s = la.smith(m.to_lists(), m.cols)
    return (
        IntMatrix.from_rows(s.d, m.cols),
        IntMatrix.from_rows(s.u, m.rows),
        IntMatrix.from_rows(s.v, m.cols),
    )


# ---------------------------------------------------------------------------
# Canonical form
# ---------------------------------------------------------------------------


def merge_summands(p, precision, orders, labels=None):
    """Canonicalize a list of cyclic summands (0 = free) into invariant-factor form.

    Returns (module, placement).  placement[i] lists the CRT components of
    source summand i as (canonical_coordinate, prime_power); free sources map
    to (coordinate, 0).  Two equal-order cyclic groups never merge; distinct
    primes of one source may land in different invariant factors.
    """
    if labels is None:
        labels = [f"e{i}" for i in range(len(orders))]
    free_sources = [i for i, d in enumerate(orders) if d == 0]
    by_prime = {}
    for i, d in enumerate(orders):
        if d in (0, 1):
            continue
        for q, e in factorize(d).items():
            by_prime.setdefault(q, []).append((e, i))
    k = max((len(v) for v in by_prime.values()), default=0)
    slots = [dict() for _ in range(k)]
    for q, comps in by_prime.items():
        comps.sort(key=lambda t: -t[0])
        for pos, (e, src) in enumerate(comps):
            slots[pos][q] = (e, src)
    chain = [prod(q**e for q, (e, _) in slot.items()) for slot in slots]
    order_ix = sorted(range(k), key=lambda i: chain[i])

    free = len(free_sources)
    placement = {i: [] for i in range(len(orders))}
    out_labels = []
    for c, src in enumerate(free_sources):
        placement[src].append((c, 0))
        out_labels.append(labels[src])
    final_chain = []
    for pos, i in enumerate(order_ix):
        coord = free + pos
        final_chain.append(chain[i])
        srcs = sorted({src for _, src in slots[i].values()})
        for q, (e, src) in slots[i].items():
            placement[src].append((coord, q**e))
        if len(srcs) == 1 and orders[srcs[0]] == chain[i]:
            out_labels.append(labels[srcs[0]])
        elif len(srcs) == 1:
            out_labels.append(f"{labels[srcs[0]]}'")
        else:
            out_labels.append("*".join(labels[s] for s in srcs))
    module = FgModule(p, precision, free, tuple(final_chain), tuple(out_labels))
    return module, placement


def combine_elements(module, placement, source_values):
    """CRT-combine per-summand element values into canonical coordinates."""
    coords = [0] * module.rank()
    congruences = [[] for _ in range(module.rank())]
    for src, comps in placement.items():
        for coord, qe in comps:
            if qe == 0:
                coords[coord] = source_values[src]
            else:
                congruences[coord].append((source_values[src] % qe, qe))
    for coord, congs in enumerate(congruences):
        if not congs:
            continue
        x, m = 0, 1
        for r, q in congs:
            t = ((r - x) * pow(m % q, -1, q)) % q
            x += m * t
            m *= q
        coords[coord] = x
    return module.reduce_vector(coords)


@dataclass(frozen=True)
class FgModule:
    """Z_p^free_rank + Z/d_1 + ... + Z/d_k with d_i | d_{i+1}, marked basis labels.

    Coordinates are ordered free summands first, then torsion in chain order.
    Equality is structural; labels are bookkeeping only.
    """

    p: int
    precision: int
    free_rank: int
    torsion: tuple
    labels: tuple = field(compare=False, default=None)

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("p must be >= 2")
        if self.precision < 1:
            raise ValueError("precision must be positive")
        if self.free_rank < 0:
            raise ValueError("free_rank must be non-negative")
        object.__setattr__(self, "torsion", tuple(int(d) for d in self.torsion))
        for d in self.torsion:
            if d <= 1:
                raise ValueError("torsion orders must exceed 1")
            if vp(d, self.p) > self.precision:
                raise PrecisionOverflow(f"order {d} needs more than {self.precision} {self.p}-adic digits")
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a:
                raise ValueError(f"torsion orders {self.torsion} violate the divisibility chain")
        if self.labels is None:
            object.__setattr__(self, "labels", tuple(f"e{i}" for i in range(self.rank())))
        else:
            object.__setattr__(self, "labels", tuple(self.labels))
            if len(self.labels) != self.rank():
                raise ValueError("label count does not match coordinate count")

    @classmethod
    def from_orders(cls, p, precision, orders, labels=None):
        """Canonicalize an arbitrary list of cyclic orders (0 = free summand)."""
        orders = [int(d) for d in orders]
        keep = [(d, (labels[i] if labels is not None else f"e{i}")) for i, d in enumerate(orders) if d != 1]
        module, _ = merge_summands(p, precision, [d for d, _ in keep], [l for _, l in keep])
        return module

    @classmethod
    def zero(cls, p, precision=DEFAULT_PRECISION):
        return cls(p, precision, 0, ())

    @classmethod
    def free(cls, p, rank, precision=DEFAULT_PRECISION, labels=None):
        return cls(p, precision, rank, (), labels)

    @classmethod
    def cyclic(cls, p, order, precision=DEFAULT_PRECISION, label=None):
        if order == 0:
            return cls.free(p, 1, precision, None if label is None else (label,))
        return cls(p, precision, 0, (order,), None if label is None else (label,))

    def rank(self):
        return self.free_rank + len(self.torsion)

    def orders(self):
        """Coordinate orders, 0 meaning a free Z_p summand."""
        return (0,) * self.free_rank + self.torsion

    def is_trivial(self):
        return self.free_rank == 0 and not self.torsion

    def order(self):
        """Group order for finite modules, None when free rank > 0."""
        return None if self.free_rank else (prod(self.torsion) if self.torsion else 1)

    def exponent(self):
        return self.torsion[-1] if self.torsion else 1

    def with_labels(self, labels):
        return FgModule(self.p, self.precision, self.free_rank, self.torsion, tuple(labels))

    def relabel(self, mapping):
        return self.with_labels(tuple(mapping.get(l, l) for l in self.labels))

    def direct_sum(self, other):
        if (self.p, self.precision) != (other.p, other.precision):
            raise ValueError("direct sum requires matching prime and precision")
        module, _ = merge_summands(
            self.p,
            self.precision,
            list(self.orders()) + list(other.orders()),
            list(self.labels) + list(other.labels),
        )
        return module

    def reduce_vector(self, vec):
        """Reduce coordinates mod torsion orders, mod p^precision on free coordinates."""
        pN = self.p**self.precision
        return [x % pN if d == 0 else x % d for x, d in zip(vec, self.orders())]

    def render(self):
        """Canonical text form: free part first, invariant factors ascending."""
        if self.is_trivial():
            return "0"
        parts = [f"Z_{self.p}"] * self.free_rank + [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts)

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"FgModule({self.render()!r}, p={self.p})"


# ---------------------------------------------------------------------------
# Local / tame coordinate slices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PartSpace:
    """Coordinate slice of a module: local (p-primary + free) or tame (prime to p)."""

    p: int
    precision: int
    local: bool
    orders: tuple
    labels: tuple
    coord_map: tuple  # part coordinate -> module coordinate

    def rank(self):
        return len(self.orders)

    @classmethod
    def plain(cls, p, precision, orders, labels=None, local=True):
        orders = tuple(int(d) for d in orders)
        if labels is None:
            labels = tuple(f"e{i}" for i in range(len(orders)))
        return cls(p, precision, local, orders, tuple(labels), tuple(range(len(orders))))

    def restrict_matrix(self, entries, src: "PartSpace"):
        """Restrict a module-coordinate matrix to these part coordinates."""
        return [[entries[i][j] for j in src.coord_map] for i in self.coord_map]

    def restrict_vector(self, vec):
        return [vec[c] % d if d else vec[c] for c, d in zip(self.coord_map, self.orders)]

    def module(self):
        return FgModule.from_orders(self.p, self.precision, self.orders, self.labels)


def split_module(m: FgModule):
    """(local, tame) PartSpaces of a module; every map is block diagonal for them."""
    loc_orders, loc_labels, loc_map = [], [], []
    tame_orders, tame_labels, tame_map = [], [], []
    for c, d in enumerate(m.orders()):
        if d == 0:
            loc_orders.append(0)
            loc_labels.append(m.labels[c])
            loc_map.append(c)
        else:
            q = p_part(d, m.p)
            t = d // q
            if q > 1:
                loc_orders.append(q)
                loc_labels.append(m.labels[c])
                loc_map.append(c)
            if t > 1:
                tame_orders.append(t)
                tame_labels.append(m.labels[c])
                tame_map.append(c)
    loc = PartSpace(m.p, m.precision, True, tuple(loc_orders), tuple(loc_labels), tuple(loc_map))
    tame = PartSpace(m.p, m.precision, False, tuple(tame_orders), tuple(tame_labels), tuple(tame_map))
    return loc, tame


def validate_module_map(src: FgModule, dst: FgModule, a: IntMatrix, what="map"):
    """Check that an integer matrix defines a continuous map src -> dst.

    Torsion compatibility plus the continuity constraints a raw integer
    matrix cannot express: free coordinates never hit prime-to-p torsion and
    torsion never hits free coordinates.
    """
    if a.rows != dst.rank() or a.cols != src.rank():
        raise InvalidModuleMap(f"{what}: shape {a.rows}x{a.cols}, expected {dst.rank()}x{src.rank()}")
    pN = src.p**src.precision
    for j, oj in enumerate(src.orders()):
        for i, oi in enumerate(dst.orders()):
            x = a.entries[i][j]
            if oj == 0:
                tame = prime_to_p_part(oi, src.p) if oi else 1
                if tame > 1 and x % tame:
                    raise InvalidModuleMap(f"{what}: entry ({i},{j}) maps a free coordinate to prime-to-p torsion")
            elif oi == 0:
                if (x * oj) % pN:
                    raise InvalidModuleMap(f"{what}: entry ({i},{j}) maps torsion to a free coordinate")
            elif (x * oj) % oi:
                raise InvalidModuleMap(f"{what}: entry ({i},{j}) breaks torsion orders {oj} -> {oi}")


def _det(rows):
    """Exact determinant by fraction-free (Bareiss) elimination."""
    a = [list(r) for r in rows]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def is_automorphism(m: FgModule, a: IntMatrix):
    """Whether a valid endomorphism matrix is invertible on the module."""
    try:
        validate_module_map(m, m, a, "endomorphism")
    except InvalidModuleMap:
        return False
    loc, tame = split_module(m)
    for part in (loc, tame):
        if part.rank() == 0:
            continue
        det = _det(part.restrict_matrix(a.to_lists(), part))
        if part.local:
            if det % m.p == 0:
                return False
        elif gcd(det, prod(part.orders)) != 1:
            return False
    return True


# ---------------------------------------------------------------------------
# Subquotients with tracked generators
# ---------------------------------------------------------------------------


class Subquotient:
    """(L + K)/(S + K) for lattices S <= L in a part's coordinate space.

    K is the relation lattice of the coordinate orders.  Keeps the data
    needed to project ambient vectors onto the result and to push commuting
    ambient endomorphisms down to the result (generator tracking).
    """

    def __init__(self, part: PartSpace, numerator=None, denominator=()):
        self.part = part
        n = part.rank()
        relations = [
            [part.orders[i] if j == i else 0 for j in range(n)] for i in range(n) if part.orders[i]
        ]
        num_vectors = ([list(v) for v in numerator] if numerator is not None else la.eye(n)) + relations
        if n == 0 or not num_vectors:
            basis = []
        else:
            basis = la.column_lattice_basis(la.transpose(num_vectors))
        r = len(basis)
        bmat = la.transpose(basis) if basis else [[] for _ in range(n)]
        rel_cols = []
        for v in list(denominator) + relations:
            if r == 0:
                continue
            x = la.solve(bmat, list(v))
            if x is None:
                raise ValueError("denominator does not lie in the numerator lattice")
            rel_cols.append(x)
        rel = la.transpose(rel_cols) if rel_cols else [[0] * 0 for _ in range(r)]
        if r:
            s = la.smith(rel)
            diag = s.diag + [0] * (r - len(s.diag))
            u, uinv = s.u, s.uinv
        else:
            diag, u, uinv = [], [], []
        pairs = []
        for i in range(r):
            d = diag[i]
            if d and part.local:
                d = p_part(d, part.p)
            if d == 1:
                continue
            if d and part.local and vp(d, part.p) > part.precision:
                raise PrecisionOverflow(f"subquotient torsion {d} exceeds precision {part.precision}")
            pairs.append((d, i))
        pairs.sort(key=lambda t: (t[0] != 0, t[0]))  # free coordinates first, then torsion ascending
        self.orders = tuple(d for d, _ in pairs)
        self._keep = [i for _, i in pairs]
        self._u = u
        self._bmat = bmat
        self._r = r
        self.lifts = [la.mat_vec(bmat, [uinv[row][i] for row in range(r)]) for i in self._keep]
        self.labels = tuple(self._label_for(lift, k) for k, lift in enumerate(self.lifts))

    def _label_for(self, lift, k):
        nonzero = []
        for c, x in enumerate(lift):
            d = self.part.orders[c]
            xr = x % d if d else x
            if xr:
                nonzero.append((c, xr, d))
        if len(nonzero) == 1:
            c, xr, d = nonzero[0]
            if xr == 1 or (d and xr == d - 1) or (not d and xr == -1):
                return self.part.labels[c]
        if not nonzero:
            return f"g{k}"
        return "[" + "+".join(f"{x}{self.part.labels[c]}" if x != 1 else self.part.labels[c] for c, x, _ in nonzero) + "]"

    def module(self):
        return FgModule(
            self.part.p,
            self.part.precision,
            sum(1 for d in self.orders if d == 0),
            tuple(d for d in self.orders if d),
            self.labels,
        )

    def project(self, vec):
        """Coordinates of an ambient element; it must lie in the numerator lattice."""
        if self._r == 0:
            return []
        x = la.solve(self._bmat, list(vec))
        if x is None:
            raise ValueError("vector does not lie in the numerator lattice")
        z = la.mat_vec(self._u, x)
        return [z[i] % d if d else z[i] for d, i in zip(self.orders, self._keep)]

    def induce(self, entries):
        """Matrix (list of rows) of a commuting ambient endomorphism on the result."""
        cols = [self.project(la.mat_vec(entries, lift)) for lift in self.lifts]
        n = len(self.lifts)
        return [[cols[j][i] for j in range(n)] for i in range(n)]

    def map_to(self, entries, target: "Subquotient"):
        """Matrix of an ambient map carrying this subquotient into another."""
        cols = [target.project(la.mat_vec(entries, lift)) for lift in self.lifts]
        m = len(target.lifts)
        return [[cols[j][i] for j in range(len(cols))] for i in range(m)]


def kernel_lattice(entries, src_orders, dst_orders):
    """Vectors spanning {x : A x = 0 in the target module} (with src relations)."""
    m, n = len(entries), len(src_orders)
    if m == 0:
        vecs = [[1 if j == i else 0 for j in range(n)] for i in range(n)]
    else:
        cols = [[entries[r][j] for r in range(m)] for j in range(n)]
        for i, d in enumerate(dst_orders):
            if d:
                cols.append([d if r == i else 0 for r in range(m)])
        full = [[col[r] for col in cols] for r in range(m)]
        vecs = [v[:n] for v in la.kernel_basis(full)]
    for i, d in enumerate(src_orders):
        if d:
            vecs.append([d if j == i else 0 for j in range(n)])
    return vecs


def image_vectors(entries, src_orders):
    """Generators of the image lattice of A (columns, plus nothing else)."""
    m = len(entries)
    n = len(src_orders)
    return [[entries[r][j] for r in range(m)] for j in range(n)]


def kernel_of_constraints(rows, dst_orders, src_orders, batch=None):
    """Like kernel_lattice for very tall constraint systems: dedupe and batch.

    Solves {x : row . x = 0 mod dst_order} constraint by constraint, keeping a
    lattice parameterization so each Smith form stays small.
    """
    n = len(src_orders)
    seen = set()
    constraints = []
    for row, d in zip(rows, dst_orders):
        key = (d, tuple(x % d if d else x for x in row))
        if key in seen or all(v == 0 for v in key[1]):
            continue
        seen.add(key)
        constraints.append((list(row), d))
    if batch is None:
        batch = max(8, 3 * n)
    basis = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for i, d in enumerate(src_orders):
        if d:
            basis.append([d if j == i else 0 for j in range(n)])
    # basis spans the current solution lattice as a list of vectors
    current = la.column_lattice_basis(la.transpose(basis))
    for start in range(0, len(constraints), batch):
        chunk = constraints[start : start + batch]
        if not current:
            break
        r = len(current)
        reduced = [[sum(c * v[j] for j, c in enumerate(row)) for v in current] for row, _ in chunk]
        dst = [d for _, d in chunk]
        inner = kernel_lattice(reduced, [0] * r, dst)
        current = [
            [sum(w[t] * current[t][j] for t in range(r)) for j in range(n)] for w in inner
        ]
        current = la.column_lattice_basis(la.transpose(current)) if current else []
    out = [list(v) for v in current]
    for i, d in enumerate(src_orders):
        if d:
            out.append([d if j == i else 0 for j in range(n)])
    return out


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def cokernel(generators, relations: IntMatrix, p, precision=DEFAULT_PRECISION):
    """Z^generators / (row span of relations), p-adically completed."""
    if relations.rows and relations.cols != generators:
        raise ValueError("relations must have one column per generator")
    part = PartSpace.plain(p, precision, (0,) * generators)
    return Subquotient(part, None, [list(r) for r in relations.entries]).module()


def hom_group(a: FgModule, b: FgModule):
    """Continuous Hom(a, b): Hom(Z/d, M) = M[d], Hom(Z_p, M) = p-primary + free part of M."""
    if a.p != b.p:
        raise ValueError("modules must share a prime")
    orders = []
    for d in a.orders():
        for e in b.orders():
            if d == 0:
                orders.append(e if e == 0 else p_part(e, b.p))
            elif e == 0:
                pass  # Hom(Z/d, Z_p) = 0
            else:
                orders.append(gcd(d, e))
    return FgModule.from_orders(b.p, b.precision, [o for o in orders if o != 1])


def ext_group(quot: FgModule, sub: FgModule):
    """Ext^1(quot, sub) over Z_p: Ext(Z/d, M) = M/dM, Ext(Z_p, -) = 0."""
    if quot.p != sub.p:
        raise ValueError("modules must share a prime")
    orders = []
    for d in quot.torsion:
        for e in sub.orders():
            orders.append(p_part(d, sub.p) if e == 0 else gcd(d, e))
    return FgModule.from_orders(sub.p, sub.precision, [o for o in orders if o != 1])


@dataclass(frozen=True)
class ExtensionClass:
    """Element of Ext(quot, sub) in canonical coordinates.

    class_value[i][j] is the sub-coordinate-i component of the class at the
    j-th torsion coordinate of quot, reduced in sub/(d_j sub).
    """

    sub: FgModule
    quot: FgModule
    class_value: IntMatrix

    def __post_init__(self):
        cv = self.class_value
        if cv.rows != self.sub.rank() or cv.cols != len(self.quot.torsion):
            raise InvalidClass("class matrix must be sub-rank x quot-torsion-count")
        for j, d in enumerate(self.quot.torsion):
            for i, e in enumerate(self.sub.orders()):
                bound = p_part(d, self.sub.p) if e == 0 else gcd(d, e)
                x = cv.entries[i][j]
                if x < 0 or x >= bound:
                    raise InvalidClass(f"class entry ({i},{j}) = {x} not reduced modulo {bound}")

    @classmethod
    def split(cls, sub, quot):
        return cls(sub, quot, IntMatrix.zero(sub.rank(), len(quot.torsion)))

    @classmethod
    def from_scalar(cls, sub, quot, value, sub_coord=0, quot_coord=0):
        """Single-component class: value on one (sub, quot-torsion) coordinate pair."""
        rows = [[0] * len(quot.torsion) for _ in range(sub.rank())]
        d = quot.torsion[quot_coord]
        e = sub.orders()[sub_coord]
        bound = p_part(d, sub.p) if e == 0 else gcd(d, e)
        rows[sub_coord][quot_coord] = value % bound
        return cls(sub, quot, IntMatrix.from_rows(rows, len(quot.torsion)))


def assemble_extension(e: ExtensionClass):
    """Middle group of the classified extension, via a presentation matrix.

    Generator labels of sub and quot are carried through the presentation
    quotient; torsion here is exact group torsion, never p-localized.
    """
    sub, quot = e.sub, e.quot
    p, precision = sub.p, sub.precision
    ns, nq = sub.rank(), quot.rank()
    sub_orders = sub.orders()
    rel_rows = [[d if j == i else 0 for j in range(ns + nq)] for i, d in enumerate(sub_orders) if d]
    tj = 0
    for j, d in enumerate(quot.orders()):
        if d == 0:
            continue
        row = [0] * (ns + nq)
        row[ns + j] = d
        q = p_part(d, p)
        tame = d // q
        for i in range(ns):
            c = e.class_value.entries[i][tj]
            if sub_orders[i] == 0 and tame > 1:
                # continuous Ext of the prime-to-p part by Z_p vanishes; keep only
                # the p-primary component of the class on free sub coordinates
                c = (c % q) * tame * pow(tame, -1, q) % d if q > 1 else 0
            row[i] = -c
        rel_rows.append(row)
        tj += 1
    part = PartSpace.plain(p, precision, (0,) * (ns + nq), tuple(sub.labels) + tuple(quot.labels), local=False)
    return Subquotient(part, None, rel_rows).module()

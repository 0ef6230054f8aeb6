"""Cyclic algebras at desk scale.

Galois extensions of small finite rings, the companion-matrix twist of the
matrix algebra, its fixed subalgebra with structure-constant checks, the
standard crossed-product 2-cocycle, symbol detection via Bockstein cup
products, and the subtraction-free conjugation coefficients over the Laurent
semiring N[u^{+-1}].
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from math import gcd

from . import _intlinalg as la
from .cohomology import (
    CocycleTable,
    bockstein,
    cocycles_cohomologous,
    cup_with_unit,
    tate_hat_zero_detailed,
    zero_cocycle,
)
from .fgab import FgModule, IntMatrix, PartSpace, Subquotient, kernel_lattice
from .finitering import GaloisField, UnramifiedExtension


class NotAUnit(Exception):
    """The requested twisting element is not a unit."""


class RankMismatch(Exception):
    """A fixed subalgebra has the wrong rank over the base."""


class CenterTooLarge(Exception):
    """The fixed algebra has a center bigger than the base ring (input not Galois)."""


# ---------------------------------------------------------------------------
# Galois extensions of finite rings
# ---------------------------------------------------------------------------


@dataclass
class FiniteGaloisExtension:
    """R -> A cyclic of degree k, with sigma generating and chi: <sigma> = Z/k."""

    base_size: int
    total: object  # QuotientPolyRing
    k: int
    sigma: object  # callable A -> A
    embed: object  # callable base element index -> A element
    base_elements: list  # images of R in A
    name: str = ""

    def verify(self):
        """Fixed ring equals the base; trace map onto the base is surjective."""
        fixed = [a for a in self.total.elements() if self.sigma(a) == a]
        if sorted(fixed) != sorted(self.base_elements):
            raise CenterTooLarge(f"{self.name}: fixed ring differs from the declared base")
        a = self.total
        traces = set()
        for x in a.elements():
            t = a.zero()
            y = x
            for _ in range(self.k):
                t = a.add(t, y)
                y = self.sigma(y)
            traces.add(t)
        if not set(self.base_elements) <= traces:
            raise CenterTooLarge(f"{self.name}: trace is not surjective onto the base")
        total_size = sum(1 for _ in a.elements())
        if total_size != self.base_size**self.k:
            raise CenterTooLarge(f"{self.name}: extension is not free of rank {self.k}")
        for x in (a.gen(), a.one()):
            y = x
            for _ in range(self.k):
                y = self.sigma(y)
            if y != x:
                raise CenterTooLarge(f"{self.name}: sigma^k is not the identity")
        return True


def galois_field_extension(p, m, k):
    """F_{p^m} inside F_{p^(mk)} with sigma = Frobenius^m."""
    total = GaloisField(p, m * k)

    def sigma(a, _t=total, _m=m):
        for _ in range(_m):
            a = _t.frobenius(a)
        return a

    if m == 1:
        base_elements = [total.from_int(c) for c in range(p)]
    else:
        small = GaloisField(p, m)
        root = _find_root(total, small.poly)
        base_elements = []
        for a in small.elements():
            base_elements.append(total.evaluate(list(a), root))
    return FiniteGaloisExtension(
        base_size=p**m,
        total=total,
        k=k,
        sigma=sigma,
        embed=lambda c: total.from_int(c),
        base_elements=base_elements,
        name=f"F{p**(m*k)}/F{p**m}",
    )


def unramified_galois_extension(p, precision, k):
    """Z/p^precision inside its unramified degree-k extension, sigma = Frobenius."""
    total = UnramifiedExtension(p, precision, k)
    base_elements = [total.from_int(c) for c in range(p**precision)]
    return FiniteGaloisExtension(
        base_size=p**precision,
        total=total,
        k=k,
        sigma=total.frobenius,
        embed=lambda c: total.from_int(c),
        base_elements=base_elements,
        name=f"W{k}(Z/{p**precision})",
    )


def _find_root(ring, poly):
    for a in ring.elements():
        if all(x == 0 for x in ring.evaluate(list(poly), a)):
            return a
    raise ValueError("defining polynomial has no root in the extension")


# ---------------------------------------------------------------------------
# Companion matrices and the twisted fixed algebra
# ---------------------------------------------------------------------------


def companion_matrix(u, k, ring):
    """The k x k matrix with u top-right and 1 on the subdiagonal; power check included."""
    if k < 1:
        raise ValueError("k must be positive")
    if not ring.is_unit(u):
        raise NotAUnit(f"{u} is not a unit")
    mat = [[ring.zero() for _ in range(k)] for _ in range(k)]
    for i in range(1, k):
        mat[i][i - 1] = ring.one()
    mat[0][k - 1] = u
    power = _mat_identity(ring, k)
    for _ in range(k):
        power = _mat_mul(ring, power, mat)
    for i in range(k):
        for j in range(k):
            expect = u if i == j else ring.zero()
            assert power[i][j] == expect, "companion matrix power identity failed"
    return mat


def _mat_identity(ring, k):
    return [[ring.one() if i == j else ring.zero() for j in range(k)] for i in range(k)]


def _mat_mul(ring, a, b):
    k = len(a)
    out = [[ring.zero() for _ in range(len(b[0]))] for _ in range(k)]
    for i in range(k):
        for j in range(len(b[0])):
            acc = ring.zero()
            for t in range(len(b)):
                acc = ring.add(acc, ring.mul(a[i][t], b[t][j]))
            out[i][j] = acc
    return out


def _mat_inverse(ring, a):
    """Inverse of a matrix over a finite commutative ring by solving columns."""
    k = len(a)
    n = ring.n
    m = ring.modulus
    # flatten: solve a @ X = I column by column over Z/m coordinates
    rows = []
    for i in range(k):
        for r in range(n):
            row = []
            for j in range(k):
                col_elt = a[i][j]
                # multiplication by col_elt as an n x n matrix over Z/m
                mult = _mult_matrix(ring, col_elt)
                row.extend(mult[r])
            rows.append(row)
    inv_cols = []
    for c in range(k):
        target = []
        for i in range(k):
            e = ring.one() if i == c else ring.zero()
            target.extend(e)
        full = [row + [m if t == idx else 0 for t in range(len(rows))] for idx, row in enumerate(rows)]
        sol = la.solve(full, target, len(rows[0]) + len(rows))
        if sol is None:
            raise NotAUnit("matrix is not invertible")
        col = []
        for j in range(k):
            col.append(tuple(x % m for x in sol[j * n : (j + 1) * n]))
        inv_cols.append(col)
    return [[inv_cols[j][i] for j in range(k)] for i in range(k)]


def _mult_matrix(ring, a):
    """Multiplication by a as an n x n integer matrix on ring coordinates."""
    n = ring.n
    cols = []
    for i in range(n):
        basis = tuple(1 if j == i else 0 for j in range(n))
        cols.append(ring.mul(a, basis))
    return [[cols[j][i] for j in range(n)] for i in range(n)]


@dataclass
class TwistedMatrixAlgebra:
    """Fixed R-subalgebra of M_k(A) under the companion-twisted Galois action."""

    extension: FiniteGaloisExtension
    u: object
    basis: list  # R-basis, each a k x k matrix over A
    structure: dict  # (i, j) -> coefficient vector over the base prime ring
    rank: int
    center_rank: int
    idempotent: object  # a rank-one idempotent when the algebra splits, else None
    idempotent_searched: int = 0

    def splits(self):
        return self.idempotent is not None


def twisted_fixed_algebra(ext: FiniteGaloisExtension, u, seed=0, exhaustive_cap=6561):
    """Fixed points of the companion-twisted action on M_k(A), with certificates.

    The action is m -> utilde sigma(m) utilde^{-1} entrywise; fixed points are
    computed as an exact kernel over the base coordinates, checked to be an
    associative unital algebra of rank k^2 with center exactly the base, and
    split via a rank-one idempotent search (seeded, exhaustive fallback).
    """
    ring = ext.total
    k = ext.k
    n = ring.n
    m = ring.modulus
    if not ring.is_unit(u):
        raise NotAUnit(f"twist {u} is not a unit")
    utilde = companion_matrix(u, k, ring)
    utilde_inv = _mat_inverse(ring, utilde)

    def tau(mat):
        applied = [[ext.sigma(x) for x in row] for row in mat]
        return _mat_mul(ring, _mat_mul(ring, utilde, applied), utilde_inv)

    dim = k * k * n  # coordinates over Z/m
    def flatten(mat):
        out = []
        for i in range(k):
            for j in range(k):
                out.extend(mat[i][j])
        return out

    def unflatten(vec):
        mat = [[None] * k for _ in range(k)]
        for i in range(k):
            for j in range(k):
                base = (i * k + j) * n
                mat[i][j] = tuple(x % m for x in vec[base : base + n])
        return mat

    rows = []
    for idx in range(dim):
        basis_vec = [0] * dim
        basis_vec[idx] = 1
        img = flatten(tau(unflatten(basis_vec)))
        rows.append([img[r] - basis_vec[r] for r in range(dim)])
    entries = [[rows[j][i] for j in range(dim)] for i in range(dim)]  # columns were images
    orders = [m] * dim
    part = PartSpace.plain(ring.p, 60, orders, local=False)
    sq = Subquotient(part, kernel_lattice(entries, orders, orders), [])
    fixed_mod = sq.module()
    # rank over R: |fixed| must be |R|^(k^2)
    size_fixed = 1
    for d in fixed_mod.torsion:
        size_fixed *= d
    expected = ext.base_size ** (k * k)
    if size_fixed != expected:
        raise RankMismatch(f"fixed algebra has size {size_fixed}, expected {expected}")
    basis = [unflatten([x % m for x in lift]) for lift in sq.lifts]

    # structure constants and associativity on the basis
    structure = {}
    for i, bi in enumerate(basis):
        for j, bj in enumerate(basis):
            prod_mat = _mat_mul(ring, bi, bj)
            coords = sq.project(flatten(prod_mat))
            structure[(i, j)] = tuple(coords)
    _check_associativity(ring, basis)
    ident_coords = tuple(sq.project(flatten(_mat_identity(ring, k))))

    # center: fixed elements commuting with every basis element
    cdim = len(basis)
    crows = []
    for t in range(cdim):
        vec = [0] * cdim
        vec[t] = 1
        elt = _combine(ring, basis, vec, k)
        comm_coords = []
        for bi in basis:
            comm = _mat_sub(ring, _mat_mul(ring, elt, bi), _mat_mul(ring, bi, elt))
            comm_coords.extend(flatten(comm))
        crows.append(comm_coords)
    centries = [[crows[j][i] for j in range(cdim)] for i in range(len(crows[0]))]
    cpart = PartSpace.plain(ring.p, 60, list(fixed_mod.orders()), local=False)
    csq = Subquotient(cpart, kernel_lattice(centries, list(fixed_mod.orders()), [m] * len(crows[0])), [])
    center_mod = csq.module()
    center_size = 1
    for d in center_mod.torsion:
        center_size *= d
    if center_size != ext.base_size:
        raise CenterTooLarge(f"center has size {center_size}, base has {ext.base_size}")

    idem, tried = _find_rank_one_idempotent(
        ring, basis, structure, ident_coords, fixed_mod, k, seed, exhaustive_cap, ext.base_size
    )
    return TwistedMatrixAlgebra(
        extension=ext,
        u=u,
        basis=basis,
        structure=structure,
        rank=k * k,
        center_rank=1,
        idempotent=idem,
        idempotent_searched=tried,
    )


def _mat_sub(ring, a, b):
    return [[ring.sub(x, y) for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def _combine(ring, basis, coeffs, k):
    out = [[ring.zero() for _ in range(k)] for _ in range(k)]
    for c, mat in zip(coeffs, basis):
        if c:
            for i in range(k):
                for j in range(k):
                    out[i][j] = ring.add(out[i][j], ring.scale(c, mat[i][j]))
    return out


def _check_associativity(ring, basis):
    for a in basis:
        for b in basis:
            ab = _mat_mul(ring, a, b)
            for c in basis:
                left = _mat_mul(ring, ab, c)
                right = _mat_mul(ring, a, _mat_mul(ring, b, c))
                assert left == right, "matrix algebra associativity failed"


def _find_rank_one_idempotent(ring, basis, structure, ident_coords, fixed_mod, k, seed, cap, base_size):
    """Rank-one idempotent certificate: e^2 = e, e not in {0, 1}, |e.Alg.e| = |R|.

    Seeded random search first, exhaustive fallback when the algebra is small
    enough; returns (coordinates or None, number of candidates inspected).
    """
    orders = list(fixed_mod.orders())
    cdim = len(orders)

    def mul_coords(x, y):
        out = [0] * cdim
        for i, xi in enumerate(x):
            if xi:
                for j, yj in enumerate(y):
                    if yj:
                        coeff = structure[(i, j)]
                        for t in range(cdim):
                            out[t] += xi * yj * coeff[t]
        return [v % o for v, o in zip(out, orders)]

    zero = [0] * cdim
    one = [c % o for c, o in zip(ident_coords, orders)]
    part = PartSpace.plain(fixed_mod.p, 60, orders, local=False)

    def corner_size(e):
        gens = []
        for i in range(cdim):
            x = [1 if t == i else 0 for t in range(cdim)]
            gens.append(mul_coords(mul_coords(e, x), e))
        sq = Subquotient(part, gens, [])
        size = 1
        for d in sq.module().torsion:
            size *= d
        return size

    def check(coords):
        e = [c % o for c, o in zip(coords, orders)]
        if e == zero or e == one:
            return None
        if mul_coords(e, e) != e:
            return None
        return e if corner_size(e) == base_size else None

    rng = random.Random(seed)
    tried = 0
    total = 1
    for o in orders:
        total *= o
    for _ in range(min(4000, total)):
        tried += 1
        got = check([rng.randrange(o) for o in orders])
        if got is not None:
            return got, tried
    if total <= cap:
        for idx in range(total):
            tried += 1
            coords = []
            rem = idx
            for o in orders:
                coords.append(rem % o)
                rem //= o
            got = check(coords)
            if got is not None:
                return got, tried
    return None, tried


# ---------------------------------------------------------------------------
# Standard cocycle and symbol detection
# ---------------------------------------------------------------------------


def standard_cocycle(k, u, module: FgModule, action=None):
    """The crossed-product 2-cocycle c(sigma^i, sigma^j) = u^floor((i+j)/k).

    u is a coordinate vector in the (additively written) unit module.
    """
    acts = action if action is not None else (IntMatrix.identity(module.rank()),)

    def val(g, h):
        carries = (g[0] + h[0]) // k
        return [carries * x for x in u]

    return CocycleTable.build((k,), 2, module, acts, val)


def symbol_detect(k, chi_of_generator, v, module: FgModule, action=None):
    """(beta(chi) cup v, nonzero?) for a fixed Tate representative v.

    Nonvanishing is decided by an exact coboundary solve and cross-checked
    against the image of v in Tate H^0 when chi is an isomorphism.
    """
    acts = tuple(action) if action is not None else (IntMatrix.identity(module.rank()),)
    beta = bockstein(k, chi_of_generator, k, module.p, module.precision)
    cocycle = cup_with_unit(beta, v, module, acts)
    is_coboundary, _ = cocycles_cohomologous(cocycle, zero_cocycle((k,), module, acts))
    nonzero = not is_coboundary
    if gcd(chi_of_generator, k) == 1:
        from .cohomology import FiniteCyclic, GAction, GroupSpec

        g = GroupSpec((FiniteCyclic(k, "s"),))
        act = GAction(g, module, acts)
        tate, class_of = tate_hat_zero_detailed(k, act)
        image = class_of(list(v))
        tate_nonzero = any(image)
        if tate_nonzero != nonzero:
            raise AssertionError("symbol nonvanishing disagrees with the Tate class of v")
    return cocycle, nonzero


def symbol_class_order(k, chi_of_generator, v, module: FgModule, action=None):
    """Order of the class of beta(chi) cup v in H^2, by testing multiples."""
    acts = tuple(action) if action is not None else (IntMatrix.identity(module.rank()),)
    beta = bockstein(k, chi_of_generator, k, module.p, module.precision)
    cocycle = cup_with_unit(beta, v, module, acts)
    zero = zero_cocycle((k,), module, acts)
    for j in range(1, k + 1):
        jv = [j * x for x in v]
        multiple = cup_with_unit(beta, module.reduce_vector(jv), module, acts)
        bounds, _ = cocycles_cohomologous(multiple, zero)
        if bounds:
            return j
    raise AssertionError("symbol class order exceeds the group order")


# ---------------------------------------------------------------------------
# Conjugation over the Laurent semiring N[u^{+-1}]
# ---------------------------------------------------------------------------


class LaurentSemiring:
    """Finite formal sums sum n_i u^{t_i} with n_i >= 0; no subtraction exists."""

    @staticmethod
    def zero():
        return {}

    @staticmethod
    def monomial(exp, coeff=1):
        return {exp: coeff} if coeff else {}

    @staticmethod
    def add(a, b):
        out = dict(a)
        for e, c in b.items():
            out[e] = out.get(e, 0) + c
        return out

    @staticmethod
    def mul(a, b):
        out = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return out

    @staticmethod
    def is_monomial_coeff_one(a):
        return len(a) == 1 and next(iter(a.values())) == 1


def _semiring_mat_mul(a, b):
    k = len(a)
    out = [[LaurentSemiring.zero() for _ in range(k)] for _ in range(k)]
    for i in range(k):
        for j in range(k):
            acc = LaurentSemiring.zero()
            for t in range(k):
                acc = LaurentSemiring.add(acc, LaurentSemiring.mul(a[i][t], b[t][j]))
            out[i][j] = acc
    return out


def _semiring_companion(k, inverse=False):
    """utilde (or its inverse) over N[u^{+-1}]: both are subtraction-free."""
    mat = [[LaurentSemiring.zero() for _ in range(k)] for _ in range(k)]
    if not inverse:
        for i in range(1, k):
            mat[i][i - 1] = LaurentSemiring.monomial(0)
        mat[0][k - 1] = LaurentSemiring.monomial(1)
    else:
        for i in range(1, k):
            mat[i - 1][i] = LaurentSemiring.monomial(0)
        mat[k - 1][0] = LaurentSemiring.monomial(-1)
    return mat


def conjugation_semiring_coefficients(k, j):
    """Coefficients of e_st -> utilde^j e_st utilde^{-j} over N[u^{+-1}].

    Computed without any subtraction; returns a table mapping
    (s, t, s', t') -> monomial dict, and every nonzero entry is checked to be
    a single monomial with coefficient 1.
    """
    if k < 1 or j < 0:
        raise ValueError("need k >= 1 and j >= 0")
    fwd = _semiring_companion(k)
    inv = _semiring_companion(k, inverse=True)
    pj = _semiring_power(fwd, j, k)
    pj_inv = _semiring_power(inv, j, k)
    table = {}
    for s in range(k):
        for t in range(k):
            for s2 in range(k):
                for t2 in range(k):
                    coeff = LaurentSemiring.mul(pj[s2][s], pj_inv[t][t2])
                    if coeff:
                        if not LaurentSemiring.is_monomial_coeff_one(coeff):
                            raise AssertionError(f"coefficient at {(s, t, s2, t2)} is not 0 or 1: {coeff}")
                        table[(s, t, s2, t2)] = coeff
    return table


def _semiring_power(mat, j, k):
    out = [[LaurentSemiring.monomial(0) if a == b else LaurentSemiring.zero() for b in range(k)] for a in range(k)]
    for _ in range(j):
        out = _semiring_mat_mul(out, mat)
    return out


# ---------------------------------------------------------------------------
# Brauer class descriptors from coinvariant classes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BrauerClassDescriptor:
    """(extension, suspension) naming of a coinvariant Brauer class, with order."""

    extension_name: str
    suspension: int
    order: int

    def label(self):
        power = "" if self.suspension == 1 else f"^{self.suspension}"
        if self.suspension == 0:
            return f"({self.extension_name}, {self.extension_name})"
        return f"({self.extension_name}, S{power}{self.extension_name})"


def h1_brauer_label(pic_module: FgModule, class_vector, suspension, extension_name):
    """Descriptor for the class of a Picard element in the coinvariant group.

    The element order is the lcm over coordinates of d / gcd(x, d).
    """
    from math import lcm

    vec = pic_module.reduce_vector(class_vector)
    order = 1
    for x, d in zip(vec, pic_module.orders()):
        if d == 0:
            if x:
                raise InvalidCoinvariantClass("free coordinates of a coinvariant class must vanish")
            continue
        order = lcm(order, d // gcd(x, d))
    if all(x == 0 for x in vec) and suspension != 0:
        raise InvalidCoinvariantClass("zero class with a nonzero suspension label")
    return BrauerClassDescriptor(extension_name, suspension, order)


class InvalidCoinvariantClass(Exception):
    """A labeled coinvariant class is not valid in its group."""

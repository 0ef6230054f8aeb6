"""Continuous cohomology of products of finite cyclic and procyclic groups.

Finite cyclic factors use the periodic resolution: H^0 = ker(sigma - 1),
H^odd = ker(Norm)/im(sigma - 1), H^even = ker(sigma - 1)/im(Norm).
Procyclic factors (Z_p or the full profinite completion Zhat) have
cohomological dimension one: H^0 = fixed points, H^1 = coinvariants.  For a
Z_p factor the two-term complex only sees the p-primary-plus-free slice of
the coefficients; prime-to-p torsion has no higher continuous cohomology.
Products are assembled by iterating the split short exact sequence

    0 -> H^1(F, H^{s-1}(rest, M)) -> H^s(G, M) -> H^0(F, H^s(rest, M)) -> 0

over the leftmost procyclic factor F, with full generator tracking so that
actions of the remaining factors descend to every subquotient.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd, prod

from . import _intlinalg as la
from .fgab import (
    DEFAULT_PRECISION,
    FgModule,
    IntMatrix,
    PartSpace,
    Subquotient,
    factorize,
    image_vectors,
    is_automorphism,
    kernel_lattice,
    kernel_of_constraints,
    merge_summands,
    p_part,
    split_module,
    validate_module_map,
)


class NonAutomorphism(Exception):
    """A declared generator matrix is not an automorphism of the right order."""


class NonCommutingActions(Exception):
    """Generator matrices of an abelian group spec fail to commute."""


class NotAHomomorphism(Exception):
    """A character table is not a homomorphism."""


class TooLarge(Exception):
    """A brute-force computation exceeds the enumeration guard."""


# ---------------------------------------------------------------------------
# Group specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteCyclic:
    order: int
    label: str = "c"

    def is_procyclic(self):
        return False

    def describe(self):
        return f"C{self.order}"


@dataclass(frozen=True)
class Procyclic:
    prime: int
    label: str = "l"

    def is_procyclic(self):
        return True

    def describe(self):
        return f"Z{self.prime}"


@dataclass(frozen=True)
class ProcyclicHat:
    label: str = "f"

    def is_procyclic(self):
        return True

    def describe(self):
        return "Zhat"


@dataclass(frozen=True)
class GroupSpec:
    factors: tuple

    def __post_init__(self):
        if not self.factors:
            raise ValueError("a group spec needs at least one factor")
        for f in self.factors:
            if isinstance(f, FiniteCyclic) and f.order < 1:
                raise ValueError("finite cyclic factors need order >= 1")

    def cd(self):
        """Cohomological dimension; None when a nontrivial finite factor makes it infinite."""
        if any(isinstance(f, FiniteCyclic) and f.order > 1 for f in self.factors):
            return None
        return sum(1 for f in self.factors if f.is_procyclic())

    def describe(self):
        return " x ".join(f.describe() for f in self.factors)


@dataclass(frozen=True)
class GAction:
    """Coefficient module plus one automorphism matrix per group factor generator."""

    group: GroupSpec
    module: FgModule
    matrices: tuple

    def __post_init__(self):
        if len(self.matrices) != len(self.group.factors):
            raise ValueError("one generator matrix per group factor required")
        for f, a in zip(self.group.factors, self.matrices):
            validate_module_map(self.module, self.module, a, f"generator {f.label}")
            if not is_automorphism(self.module, a):
                raise NonAutomorphism(f"generator {f.label} matrix is not invertible on {self.module}")
            if isinstance(f, FiniteCyclic):
                if not endo_equal(self.module, a.power(f.order), IntMatrix.identity(self.module.rank())):
                    raise NonAutomorphism(f"generator {f.label} does not have order dividing {f.order}")
        for i in range(len(self.matrices)):
            for j in range(i + 1, len(self.matrices)):
                ab = self.matrices[i] @ self.matrices[j]
                ba = self.matrices[j] @ self.matrices[i]
                if not endo_equal(self.module, ab, ba):
                    raise NonCommutingActions(
                        f"generators {self.group.factors[i].label} and {self.group.factors[j].label} do not commute"
                    )

    @classmethod
    def trivial(cls, group, module):
        ident = IntMatrix.identity(module.rank())
        return cls(group, module, tuple(ident for _ in group.factors))


def endo_equal(m: FgModule, a: IntMatrix, b: IntMatrix):
    """Equality of endomorphisms of m (mod torsion orders, mod p^N on free coordinates)."""
    pN = m.p**m.precision
    for i, d in enumerate(m.orders()):
        mod = d if d else pN
        for j in range(m.rank()):
            if (a.entries[i][j] - b.entries[i][j]) % mod:
                return False
    return True


# ---------------------------------------------------------------------------
# Standard generator conventions
# ---------------------------------------------------------------------------


def teichmueller_lift(p, x, precision):
    """Multiplicative lift of x mod p to Z/p^precision, by p-power iteration."""
    pN = p**precision
    t = x % pN
    while True:
        nxt = pow(t, p, pN)
        if nxt == t:
            return t
        t = nxt


def least_primitive_root(p):
    for g in range(2, p):
        seen = {pow(g, k, p) for k in range(1, p)}
        if len(seen) == p - 1:
            return g
    raise ValueError(f"{p} is not prime")


def topological_unit_generator(p):
    """Generator of the principal units: 1 + p for odd p, 5 for p = 2."""
    return 5 if p == 2 else 1 + p


def torsion_unit_generator(p, precision):
    """Generator of the torsion of Z_p^x: -1 at p = 2, a Teichmueller lift otherwise."""
    if p == 2:
        return -1
    return teichmueller_lift(p, least_primitive_root(p), precision)


def units_module(p, precision=DEFAULT_PRECISION):
    """Z_p^x as an FgModule: Z/2 + Z_2 at p = 2, mu_{p-1} + Z_p at odd p."""
    torsion = 2 if p == 2 else p - 1
    label = "-1" if p == 2 else "w"
    return FgModule(p, precision, 1, (torsion,), ("u", label))


# ---------------------------------------------------------------------------
# Tracked cohomology pieces
# ---------------------------------------------------------------------------


class CohPiece:
    """A subquotient chain; each level's ambient is the previous level's module."""

    def __init__(self, sq: Subquotient, parent=None):
        self.sq = sq
        self.parent = parent

    def module(self):
        return self.sq.module()

    def induce_root(self, root_entries):
        inner = self.parent.induce_root(root_entries) if self.parent else root_entries
        return self.sq.induce(inner)

    def project_root(self, vec):
        if self.parent is not None:
            vec = self.parent.project_root(vec)
        return self.sq.project(vec)


def _identity_subquotient(part: PartSpace):
    sq = object.__new__(Subquotient)
    sq.part = part
    n = part.rank()
    sq.orders = tuple(part.orders)
    sq._keep = list(range(n))
    sq._u = la.eye(n)
    sq._bmat = la.eye(n)
    sq._r = n
    sq.lifts = [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    sq.labels = tuple(part.labels)
    return sq


def _part_of_module(m: FgModule, local: bool):
    return PartSpace.plain(m.p, m.precision, m.orders(), m.labels, local=local)


@dataclass
class PartValue:
    """Direct sum of tagged pieces inside one part (local or tame)."""

    pieces: list  # list of (tag, CohPiece); tag = tuple of (factor_label, degree)

    def is_zero(self):
        return all(p.module().is_trivial() for _, p in self.pieces)


@dataclass
class CohValue:
    """One cohomology group H^s, split into local and tame parts."""

    p: int
    precision: int
    loc: PartValue
    tame: PartValue

    def merge(self):
        """Canonical FgModule together with tagged piece summary."""
        orders, labels, piece_info = [], [], []
        for side in (self.loc, self.tame):
            for tag, piece in side.pieces:
                m = piece.module()
                if m.is_trivial():
                    continue
                piece_info.append((tag, m))
                prefix = "".join(f"{lab}{deg}" for lab, deg in tag)
                for o, l in zip(m.orders(), m.labels):
                    orders.append(o)
                    labels.append(f"{prefix}({l})" if prefix else l)
        module, placement = merge_summands(self.p, self.precision, orders, labels)
        return module, tuple(piece_info), placement


def _zero_value(p, precision):
    return CohValue(p, precision, PartValue([]), PartValue([]))


# ---------------------------------------------------------------------------
# Single-factor computations on one part
# ---------------------------------------------------------------------------


def _sigma_minus_one(sigma_rows, size):
    return [[sigma_rows[i][j] - (1 if i == j else 0) for j in range(size)] for i in range(size)]


def _norm_matrix(sigma_rows, n, size):
    norm = [[0] * size for _ in range(size)]
    power = la.eye(size)
    for _ in range(n):
        for i in range(size):
            for j in range(size):
                norm[i][j] += power[i][j]
        power = la.mat_mul(sigma_rows, power)
    return norm


def _cyclic_part_pieces(part: PartSpace, sigma_rows, n, s_max, parent):
    """Pieces of H^s(C_n, part) for s = 0..s_max, with parent chaining."""
    size = part.rank()
    sig_minus_1 = _sigma_minus_one(sigma_rows, size)
    norm = _norm_matrix(sigma_rows, n, size)
    ker_fix = kernel_lattice(sig_minus_1, part.orders, part.orders)
    ker_norm = kernel_lattice(norm, part.orders, part.orders)
    im_fix = image_vectors(sig_minus_1, part.orders)
    im_norm = image_vectors(norm, part.orders)
    h0 = CohPiece(Subquotient(part, ker_fix, []), parent)
    hodd = CohPiece(Subquotient(part, ker_norm, im_fix), parent)
    heven = CohPiece(Subquotient(part, ker_fix, im_norm), parent)
    return [h0 if s == 0 else hodd if s % 2 else heven for s in range(s_max + 1)]


def _procyclic_part_pieces(part: PartSpace, sigma_rows, hat, s_max, parent):
    """Pieces of H^s(procyclic, part); tame slices of Z_p factors stop at H^0."""
    size = part.rank()
    sig_minus_1 = _sigma_minus_one(sigma_rows, size)
    two_term = hat or part.local
    h0 = CohPiece(Subquotient(part, kernel_lattice(sig_minus_1, part.orders, part.orders), []), parent)
    out = [h0]
    if s_max >= 1:
        if two_term:
            out.append(CohPiece(Subquotient(part, None, image_vectors(sig_minus_1, part.orders)), parent))
        else:
            out.append(None)
    out.extend(None for _ in range(max(0, s_max - 1)))
    return out


# ---------------------------------------------------------------------------
# Product recursion
# ---------------------------------------------------------------------------


def _restricted_matrices(act: GAction):
    loc, tame = split_module(act.module)
    loc_mats = [loc.restrict_matrix(a.to_lists(), loc) for a in act.matrices]
    tame_mats = [tame.restrict_matrix(a.to_lists(), tame) for a in act.matrices]
    return loc, tame, loc_mats, tame_mats


def _compute_product(factors, loc_space, tame_space, loc_mats, tame_mats, s_max, p, precision):
    """List of CohValue for H^0..H^{s_max}."""
    live = [
        (f, lm, tm)
        for f, lm, tm in zip(factors, loc_mats, tame_mats)
        if not (isinstance(f, FiniteCyclic) and f.order == 1)
    ]
    if not live:
        h0 = CohValue(
            p,
            precision,
            PartValue([((), CohPiece(_identity_subquotient(loc_space)))] if loc_space.rank() else []),
            PartValue([((), CohPiece(_identity_subquotient(tame_space)))] if tame_space.rank() else []),
        )
        return [h0] + [_zero_value(p, precision) for _ in range(s_max)]

    proc_ix = next((i for i, (f, _, _) in enumerate(live) if f.is_procyclic()), None)
    if proc_ix is None:
        if len(live) > 1:
            raise NotImplementedError("products of several finite cyclic factors are out of scope; use bar_oracle")
        f, lm, tm = live[0]
        loc_pieces = _cyclic_part_pieces(loc_space, lm, f.order, s_max, None) if loc_space.rank() else None
        tame_pieces = _cyclic_part_pieces(tame_space, tm, f.order, s_max, None) if tame_space.rank() else None
        out = []
        for s in range(s_max + 1):
            tag = ((f.label, s),)
            out.append(
                CohValue(
                    p,
                    precision,
                    PartValue([(tag, loc_pieces[s])] if loc_pieces else []),
                    PartValue([(tag, tame_pieces[s])] if tame_pieces else []),
                )
            )
        return out

    f, f_loc, f_tame = live[proc_ix]
    rest = [x for i, x in enumerate(live) if i != proc_ix]
    rest_values = _compute_product(
        [r[0] for r in rest], loc_space, tame_space, [r[1] for r in rest], [r[2] for r in rest], s_max, p, precision
    )
    hat = isinstance(f, ProcyclicHat)

    def factor_cohomology_of(value: CohValue):
        """H^0(F, -) and H^1(F, -) of a rest-cohomology value, chained through its pieces."""
        h = {0: ([], []), 1: ([], [])}  # degree -> (loc list, tame list)
        for side_ix, (side, f_mat, local) in enumerate(
            ((value.loc, f_loc, True), (value.tame, f_tame, False))
        ):
            for tag, piece in side.pieces:
                m = piece.module()
                if m.is_trivial():
                    continue
                space = _part_of_module(m, local)
                induced = piece.induce_root(f_mat)
                sub = _procyclic_part_pieces(space, induced, hat, 1, piece)
                h[0][side_ix].append((tag, sub[0]))
                if sub[1] is not None:
                    h[1][side_ix].append((tag, sub[1]))
        return h

    cache = [factor_cohomology_of(v) for v in rest_values]
    out = []
    for s in range(s_max + 1):
        loc_pieces, tame_pieces = [], []
        if s >= 1:
            for tag, piece in cache[s - 1][1][0]:
                loc_pieces.append((tag + ((f.label, 1),), piece))
            for tag, piece in cache[s - 1][1][1]:
                tame_pieces.append((tag + ((f.label, 1),), piece))
        for tag, piece in cache[s][0][0]:
            loc_pieces.append((tag + ((f.label, 0),), piece))
        for tag, piece in cache[s][0][1]:
            tame_pieces.append((tag + ((f.label, 0),), piece))
        out.append(CohValue(p, precision, PartValue(loc_pieces), PartValue(tame_pieces)))
    return out


def product_cohomology_detailed(g: GroupSpec, act: GAction, s_max):
    """CohValue list for H^0..H^{s_max}; the public API merges them to FgModules."""
    if act.group != g:
        raise ValueError("action was built for a different group spec")
    loc, tame, loc_mats, tame_mats = _restricted_matrices(act)
    return _compute_product(
        list(g.factors), loc, tame, loc_mats, tame_mats, s_max, act.module.p, act.module.precision
    )


def product_cohomology(g: GroupSpec, act: GAction, s_max):
    """H^s(G, M) for s = 0..s_max as canonical FgModules."""
    return [v.merge()[0] for v in product_cohomology_detailed(g, act, s_max)]


def cyclic_cohomology(n, act: GAction, s_max):
    """H^s(C_n, M) by the periodic resolution, s = 0..s_max."""
    if len(act.group.factors) != 1 or not isinstance(act.group.factors[0], FiniteCyclic):
        raise ValueError("cyclic_cohomology expects a single finite cyclic factor")
    if act.group.factors[0].order != n:
        raise ValueError("order mismatch with group spec")
    return product_cohomology(act.group, act, s_max)


def procyclic_cohomology(act: GAction, s_max):
    """H^s for a single procyclic factor; zero in degrees >= 2."""
    if len(act.group.factors) != 1 or not act.group.factors[0].is_procyclic():
        raise ValueError("procyclic_cohomology expects a single procyclic factor")
    return product_cohomology(act.group, act, s_max)


def tate_hat_zero(n, act: GAction):
    """Tate H^0 of a finite cyclic group: fixed points modulo the norm image."""
    module, _ = tate_hat_zero_detailed(n, act)
    return module


def tate_hat_zero_detailed(n, act: GAction):
    if len(act.group.factors) != 1 or not isinstance(act.group.factors[0], FiniteCyclic):
        raise ValueError("tate_hat_zero expects a single finite cyclic factor")
    if act.group.factors[0].order != n:
        raise ValueError("order mismatch with group spec")
    loc, tame, loc_mats, tame_mats = _restricted_matrices(act)
    pieces = []
    for part, rows in ((loc, loc_mats[0]), (tame, tame_mats[0])):
        if part.rank() == 0:
            pieces.append(None)
            continue
        size = part.rank()
        ident = la.eye(size)
        sig_minus_1 = [[rows[i][j] - ident[i][j] for j in range(size)] for i in range(size)]
        norm = [[0] * size for _ in range(size)]
        power = la.eye(size)
        for _ in range(n):
            for i in range(size):
                for j in range(size):
                    norm[i][j] += power[i][j]
            power = la.mat_mul(rows, power)
        pieces.append(Subquotient(part, kernel_lattice(sig_minus_1, part.orders, part.orders), image_vectors(norm, part.orders)))
    orders, labels = [], []
    for sq in pieces:
        if sq is None:
            continue
        m = sq.module()
        orders.extend(m.orders())
        labels.extend(m.labels)
    module, placement = merge_summands(act.module.p, act.module.precision, orders, labels)

    def class_of(element):
        """Image of a fixed module element in Tate H^0, in canonical coordinates."""
        values = []
        for part, sq in ((loc, pieces[0]), (tame, pieces[1])):
            if sq is None:
                continue
            values.extend(sq.project(part.restrict_vector(element)))
        return combine_values(module, placement, values)

    return module, class_of


def combine_values(module, placement, values):
    from .fgab import combine_elements

    return combine_elements(module, placement, values)


def h1_as_coinvariants(act: GAction, labeler=None):
    """H^1 of a procyclic factor as coinvariants, with the quotient map as witness.

    Returns (module, witness) where witness is an IntMatrix taking coefficient
    coordinates to coinvariant coordinates.  labeler, when given, renames the
    coinvariant generators (index -> label).
    """
    if len(act.group.factors) != 1 or not act.group.factors[0].is_procyclic():
        raise ValueError("h1_as_coinvariants expects a single procyclic factor")
    hat = isinstance(act.group.factors[0], ProcyclicHat)
    loc, tame, loc_mats, tame_mats = _restricted_matrices(act)
    sqs = []
    for part, rows in ((loc, loc_mats[0]), (tame, tame_mats[0])):
        if part.rank() == 0 or (not hat and not part.local):
            sqs.append(None)
            continue
        size = part.rank()
        ident = la.eye(size)
        sig_minus_1 = [[rows[i][j] - ident[i][j] for j in range(size)] for i in range(size)]
        sqs.append(Subquotient(part, None, image_vectors(sig_minus_1, part.orders)))
    orders, labels = [], []
    for sq in sqs:
        if sq is None:
            continue
        m = sq.module()
        orders.extend(m.orders())
        labels.extend(m.labels)
    module, placement = merge_summands(act.module.p, act.module.precision, orders, labels)
    if labeler:
        module = module.with_labels(tuple(labeler(i, l) for i, l in enumerate(module.labels)))
    cols = []
    for j in range(act.module.rank()):
        basis_vec = [1 if i == j else 0 for i in range(act.module.rank())]
        values = []
        for part, sq in ((loc, sqs[0]), (tame, sqs[1])):
            if sq is None:
                continue
            values.extend(sq.project(part.restrict_vector(basis_vec)))
        cols.append(combine_values(module, placement, values))
    witness = IntMatrix.from_rows(
        [[cols[j][i] for j in range(act.module.rank())] for i in range(module.rank())], act.module.rank()
    )
    return module, witness


# ---------------------------------------------------------------------------
# Cocycles on finite groups
# ---------------------------------------------------------------------------


def _group_elements(orders):
    elems = [()]
    for n in orders:
        elems = [e + (i,) for e in elems for i in range(n)]
    return elems


def _g_mul(a, b, orders):
    return tuple((x + y) % n for x, y, n in zip(a, b, orders))


def _is_identity_elt(g):
    return all(x == 0 for x in g)


def _action_matrix(matrices, g):
    out = IntMatrix.identity(matrices[0].rows) if matrices else IntMatrix.identity(0)
    for a, e in zip(matrices, g):
        out = out @ a.power(e)
    return out


@dataclass(frozen=True)
class CocycleTable:
    """Normalized cochain of fixed degree on a finite group with finite-module values.

    values maps non-identity argument tuples to coordinate tuples; anything
    involving the identity is zero by normalization.
    """

    group_orders: tuple
    degree: int
    module: FgModule
    action: tuple
    values: tuple  # sorted tuple of (args, coords)

    @classmethod
    def build(cls, group_orders, degree, module, action, value_fn):
        orders = tuple(group_orders)
        elems = [g for g in _group_elements(orders) if not _is_identity_elt(g)]
        vals = []
        for args in _tuples(elems, degree):
            v = tuple(module.reduce_vector(value_fn(*args)))
            if any(v):
                vals.append((args, v))
        return cls(orders, degree, module, tuple(action), tuple(sorted(vals)))

    def value(self, *args):
        if any(_is_identity_elt(g) for g in args):
            return [0] * self.module.rank()
        d = dict(self.values)
        return list(d.get(tuple(args), (0,) * self.module.rank()))

    def check_cocycle(self):
        """Pointwise 2-cocycle identity on all triples."""
        if self.degree != 2:
            raise ValueError("only degree-2 tables carry the cocycle check")
        orders = self.group_orders
        elems = _group_elements(orders)
        for g in elems:
            rho = _action_matrix(self.action, g)
            for h in elems:
                gh = _g_mul(g, h, orders)
                for k in elems:
                    hk = _g_mul(h, k, orders)
                    lhs = rho.apply(self.value(h, k))
                    total = [
                        a - b + c - d
                        for a, b, c, d in zip(
                            lhs, self.value(gh, k), self.value(g, hk), self.value(g, h)
                        )
                    ]
                    if any(x for x in self.module.reduce_vector(total)):
                        return False
        return True

    def minus(self, other):
        if (self.group_orders, self.degree) != (other.group_orders, other.degree) or self.module != other.module:
            raise ValueError("tables live on different complexes")
        return CocycleTable.build(
            self.group_orders,
            self.degree,
            self.module,
            self.action,
            lambda *args: [a - b for a, b in zip(self.value(*args), other.value(*args))],
        )


def _tuples(elems, k):
    out = [()]
    for _ in range(k):
        out = [t + (e,) for t in out for e in elems]
    return out


def zero_cocycle(group_orders, module, action, degree=2):
    return CocycleTable(tuple(group_orders), degree, module, tuple(action), ())


def bockstein(group_order, chi_of_generator, k, p, precision=DEFAULT_PRECISION, modulus=None):
    """Connecting 2-cocycle of 0 -> Z -> Z -> Z/k -> 0 for chi: C_m -> Z/k.

    Values land in Z approximated by Z/modulus (default k**3), carried as a
    trivial-action CocycleTable; beta(chi)(g, h) = (lift chi(g) + lift chi(h)
    - lift chi(gh)) / k with lifts in [0, k).
    """
    m = group_order
    c = chi_of_generator % k
    if (m * c) % k:
        raise NotAHomomorphism(f"chi(gen) = {c} has no order dividing {m} in Z/{k}")
    K = modulus if modulus is not None else k**3
    module = FgModule.cyclic(p, K, precision, label="b")
    ident = (IntMatrix.identity(1),)

    def val(g, h):
        a = (g[0] * c) % k
        b = (h[0] * c) % k
        ab = ((g[0] + h[0]) % m * c) % k
        return [(a + b - ab) // k]

    return CocycleTable.build((m,), 2, module, ident, val)


def bockstein_integer_values(table: CocycleTable):
    """The integer 0/1 values of a Bockstein table, keyed by argument pairs."""
    return {args: coords[0] for args, coords in table.values}


def cup_with_unit(beta: CocycleTable, v, module: FgModule, action):
    """2-cocycle (g, h) -> beta(g, h) . v with values in module (written additively).

    v must represent a fixed class: the cup of a degree-2 integral class with
    a Tate-H^0 representative.
    """
    for a in action:
        if module.reduce_vector([x - y for x, y in zip(a.apply(v), v)]) != [0] * module.rank():
            raise ValueError("cup representative must be fixed by the action")
    ints = bockstein_integer_values(beta)

    def val(g, h):
        b = ints.get((g, h), 0)
        return [b * x for x in v]

    return CocycleTable.build(beta.group_orders, 2, module, tuple(action), val)


def cocycles_cohomologous(c1: CocycleTable, c2: CocycleTable, precision_guard=True):
    """Whether c1 - c2 bounds, with a normalized 1-cochain witness when it does.

    Solved as an exact integer linear system over the module, free coordinates
    relaxed mod p^N; with precision_guard the verdict is recomputed at N + 2
    and must agree.
    """
    diff = c1.minus(c2)
    verdict, witness = _coboundary_solve(diff, diff.module.precision)
    if precision_guard:
        verdict2, _ = _coboundary_solve(diff, diff.module.precision + 2)
        if verdict != verdict2:
            raise PrecisionUnstable("coboundary verdict changed when precision increased")
    return verdict, witness


class PrecisionUnstable(Exception):
    """A reported result changed when the working precision was raised."""


def _coboundary_solve(diff: CocycleTable, precision):
    orders = diff.group_orders
    module = diff.module
    dim = module.rank()
    pN = module.p**precision
    moduli = [d if d else pN for d in module.orders()]
    elems = [g for g in _group_elements(orders) if not _is_identity_elt(g)]
    index = {g: i for i, g in enumerate(elems)}
    ncols = len(elems) * dim
    rows = []
    rhs = []
    relax_cols = []
    for g in elems:
        rho = _action_matrix(diff.action, g)
        for h in elems:
            gh = _g_mul(g, h, orders)
            base = len(rows)
            for r in range(dim):
                row = [0] * ncols
                # + phi(g)
                row[index[g] * dim + r] += 1
                # + rho(g) phi(h)
                for c in range(dim):
                    row[index[h] * dim + c] += rho.entries[r][c]
                # - phi(gh)
                if not _is_identity_elt(gh):
                    row[index[gh] * dim + r] -= 1
                rows.append(row)
                relax_cols.append(moduli[r])
            target = diff.value(g, h)
            rhs.extend(target)
    sol = la.solve_congruences(rows, rhs, relax_cols)
    if sol is None:
        return False, None
    witness = {}
    for g in elems:
        coords = sol[index[g] * dim : index[g] * dim + dim]
        witness[g] = tuple(module.reduce_vector(coords))
    return True, witness


# ---------------------------------------------------------------------------
# Bar-resolution oracle
# ---------------------------------------------------------------------------


def bar_oracle(group_orders, matrices, module: FgModule, s, guard=10**7):
    """H^s of a finite abelian group by the normalized bar resolution.

    Independent of the periodic/product machinery: builds the explicit
    normalized cochain complex, shrinks it by unit-pivot algebraic Morse
    reduction, and takes the exact subquotient of the small core.
    """
    if module.free_rank:
        raise ValueError("bar_oracle needs a finite module")
    if s < 0:
        raise ValueError("degree must be non-negative")
    size = prod(group_orders)
    if size**s * max(module.order(), 1) > guard:
        raise TooLarge(f"bar complex too large: {size}^{s} * {module.order()} > {guard}")
    for f_order, a in zip(group_orders, matrices):
        validate_module_map(module, module, a, "bar action")
        if not endo_equal(module, a.power(f_order), IntMatrix.identity(module.rank())):
            raise NonAutomorphism("bar action generator order mismatch")
    primes = sorted(factorize(module.order()).keys()) if module.order() > 1 else []
    summands = []
    for q in primes:
        part_orders = [p_part(d, q) for d in module.torsion]
        coords = [i for i, o in enumerate(part_orders) if o > 1]
        if not coords:
            continue
        qmod = [part_orders[i] for i in coords]
        mats = [[[a.entries[i][j] % qmod[ci] for cj, j in enumerate(coords)] for ci, i in enumerate(coords)] for a in matrices]
        h = _bar_primary(group_orders, mats, qmod, q, s)
        summands.extend(h)
    return FgModule.from_orders(module.p, module.precision, summands)


def _bar_tables(group_orders):
    """Element list (identity first), multiplication table, and inverse positions."""
    elems = _group_elements(group_orders)
    elems.sort(key=lambda g: (any(g), g))  # identity lands at index 0
    index = {g: i for i, g in enumerate(elems)}
    n = len(elems)
    mult = [[index[_g_mul(a, b, group_orders)] for b in elems] for a in elems]
    return elems, mult


def _tuple_codes(n_nonid, degree):
    return (n_nonid**degree) if degree >= 0 else 0


def _decode_tuple(code, n_nonid, degree):
    out = []
    for _ in range(degree):
        out.append(code % n_nonid + 1)  # element ids 1..n-1 (identity = 0)
        code //= n_nonid
    return out


def _encode_tuple(ids, n_nonid):
    code = 0
    for i in reversed(ids):
        code = code * n_nonid + (i - 1)
    return code


def _bar_row(gamma_ids, mult, rhos, dim, qmod, n_nonid):
    """Sparse rows of the bar differential emitted by one (s+1)-tuple.

    Returns a list over module coordinates r of {column_basis_id: coeff}.
    """
    s1 = len(gamma_ids)
    faces = []
    tail = gamma_ids[1:]
    if 0 not in tail:
        faces.append((rhos[gamma_ids[0]], _encode_tuple(tail, n_nonid), 1))
    for i in range(s1 - 1):
        merged = mult[gamma_ids[i]][gamma_ids[i + 1]]
        if merged != 0:
            tau = gamma_ids[:i] + [merged] + gamma_ids[i + 2 :]
            faces.append((None, _encode_tuple(tau, n_nonid), -1 if (i + 1) % 2 else 1))
    head = gamma_ids[:-1]
    faces.append((None, _encode_tuple(head, n_nonid), -1 if s1 % 2 else 1))
    rows = [dict() for _ in range(dim)]
    for rho, tau_code, sign in faces:
        base = tau_code * dim
        if rho is None:
            for r in range(dim):
                key = base + r
                v = (rows[r].get(key, 0) + sign) % qmod[r]
                if v:
                    rows[r][key] = v
                else:
                    rows[r].pop(key, None)
        else:
            for r in range(dim):
                row = rows[r]
                rr = rho[r]
                for c in range(dim):
                    if rr[c]:
                        key = base + c
                        v = (row.get(key, 0) + sign * rr[c]) % qmod[r]
                        if v:
                            row[key] = v
                        else:
                            row.pop(key, None)
    return rows


def _bar_differential(degree, mult, rhos, dim, qmod, n_nonid):
    """All rows of d : C^degree -> C^{degree+1} as {row_id: {col_id: coeff}}."""
    rows = {}
    total = n_nonid ** (degree + 1)
    for code in range(total):
        gamma = _decode_tuple(code, n_nonid, degree + 1)
        emitted = _bar_row(gamma, mult, rhos, dim, qmod, n_nonid)
        for r in range(dim):
            if emitted[r]:
                rows[code * dim + r] = emitted[r]
    return rows


def _bar_primary(group_orders, mats, qmod, q, s):
    """Invariant factors of H^s for one primary part, via Morse-reduced bar complex."""
    dim = len(qmod)
    elems, mult = _bar_tables(group_orders)
    n = len(elems)
    n_nonid = n - 1
    if n_nonid == 0:
        return list(qmod) if s == 0 else []
    rhos = []
    for g in elems:
        out = la.eye(dim)
        for a, e in zip(mats, g):
            for _ in range(e):
                out = la.mat_mul(a, out)
        rhos.append([[x % qmod[i] for x in row] for i, row in enumerate(out)])
    if s == 0:
        entries = []
        dst_orders = []
        for gi in range(1, n):
            rho = rhos[gi]
            for r in range(dim):
                entries.append([rho[r][c] - (1 if r == c else 0) for c in range(dim)])
                dst_orders.append(qmod[r])
        part = PartSpace.plain(q, 60, qmod, local=True)
        sq = Subquotient(part, kernel_lattice(entries, list(qmod), dst_orders), [])
        return list(sq.module().torsion)

    a_rows = _bar_differential(s, mult, rhos, dim, qmod, n_nonid)
    b_rows = _bar_differential(s - 1, mult, rhos, dim, qmod, n_nonid)
    middle_size = (n_nonid**s) * dim
    modulus = lambda bid: qmod[bid % dim]
    middle, a_core, b_core = _morse_reduce(a_rows, b_rows, modulus, middle_size)
    ids = sorted(middle)
    pos = {b: i for i, b in enumerate(ids)}
    amb_orders = [modulus(b) for b in ids]
    dense_rows = []
    dst_orders = []
    for r, row in sorted(a_core.items()):
        if not row:
            continue
        dense_rows.append([row.get(b, 0) for b in ids])
        dst_orders.append(modulus(r))
    num = kernel_of_constraints(dense_rows, dst_orders, amb_orders)
    den = []
    for col in b_core.values():
        vec = [0] * len(ids)
        for rid, coeff in col.items():
            vec[pos[rid]] = coeff
        den.append(vec)
    part = PartSpace.plain(q, 60, amb_orders, local=True)
    sq = Subquotient(part, num, den)
    return list(sq.module().torsion)


def _morse_reduce(a_rows, b_rows, modulus, middle_size):
    """Unit-pivot reduction of C^{s-1} -> C^s -> C^{s+1} preserving middle homology.

    a_rows: rows of A over middle columns; b_rows: rows of B, whose row ids live
    in the middle.  Gaussian-elimination lemma: an A-pivot Schur-updates A and
    deletes the middle element from B's rows; a B-pivot Schur-updates B and
    deletes the middle element's column from A.
    """
    import heapq

    middle = set(range(middle_size))
    a = {r: dict(row) for r, row in a_rows.items()}
    a_cols = {}
    for r, row in a.items():
        for c in row:
            a_cols.setdefault(c, set()).add(r)
    b_cols = {}
    b_rows_ix = {}
    for mid, row in b_rows.items():
        for c, coeff in row.items():
            b_cols.setdefault(c, {})[mid] = coeff
            b_rows_ix.setdefault(mid, set()).add(c)

    def unit(coeff, m):
        return gcd(coeff, m) == 1

    # ---- phase B: eliminate along B (its columns are thin) -----------------
    heap = []
    for g0, col in b_cols.items():
        for mid, coeff in col.items():
            if mid in middle and modulus(mid) == modulus(g0) and unit(coeff, modulus(g0)):
                cost = (len(col) - 1) * (len(b_rows_ix.get(mid, ())) - 1)
                heapq.heappush(heap, (cost, g0, mid))
    while heap:
        cost, g0, m0 = heapq.heappop(heap)
        if g0 not in b_cols or m0 not in middle or m0 not in b_cols[g0]:
            continue
        alpha = b_cols[g0][m0]
        md = modulus(g0)
        if modulus(m0) != md or not unit(alpha, md):
            continue
        true_cost = (len(b_cols[g0]) - 1) * (len(b_rows_ix.get(m0, ())) - 1)
        if true_cost > cost:
            heapq.heappush(heap, (true_cost, g0, m0))
            continue
        ainv = pow(alpha % md, -1, md)
        pivot_col = [(mid, v) for mid, v in b_cols[g0].items() if mid != m0]
        row_cols = [g for g in b_rows_ix.get(m0, ()) if g != g0 and m0 in b_cols.get(g, {})]
        for g1 in row_cols:
            beta = b_cols[g1][m0]
            factor = beta * ainv
            col1 = b_cols[g1]
            for mid, val in pivot_col:
                m1 = modulus(mid)
                nv = (col1.get(mid, 0) - factor * val) % m1
                if nv:
                    if mid not in col1:
                        b_rows_ix.setdefault(mid, set()).add(g1)
                        if mid in middle and unit(nv, m1) and modulus(g1) == m1:
                            heapq.heappush(heap, ((len(col1)) * (len(b_rows_ix[mid])), g1, mid))
                    col1[mid] = nv
                else:
                    if mid in col1:
                        del col1[mid]
                        b_rows_ix[mid].discard(g1)
        for mid, _ in pivot_col:
            b_rows_ix.get(mid, set()).discard(g0)
        del b_cols[g0]
        for g in list(b_rows_ix.get(m0, ())):
            c = b_cols.get(g)
            if c is not None:
                c.pop(m0, None)
                if not c:
                    del b_cols[g]
        b_rows_ix.pop(m0, None)
        for r in list(a_cols.get(m0, ())):
            a[r].pop(m0, None)
        a_cols.pop(m0, None)
        middle.discard(m0)

    # ---- phase A ------------------------------------------------------------
    heap = []
    for r0, row in a.items():
        mr = modulus(r0)
        for c0, coeff in row.items():
            if c0 in middle and modulus(c0) == mr and unit(coeff, mr):
                cost = (len(row) - 1) * (len(a_cols.get(c0, ())) - 1)
                heapq.heappush(heap, (cost, r0, c0))
    while heap:
        cost, r0, c0 = heapq.heappop(heap)
        if r0 not in a or c0 not in middle or c0 not in a.get(r0, {}):
            continue
        alpha = a[r0][c0]
        md = modulus(c0)
        if modulus(r0) != md or not unit(alpha, md):
            continue
        true_cost = (len(a[r0]) - 1) * (len(a_cols.get(c0, ())) - 1)
        if true_cost > cost:
            heapq.heappush(heap, (true_cost, r0, c0))
            continue
        ainv = pow(alpha % md, -1, md)
        other_cols = [(c, v) for c, v in a[r0].items() if c != c0]
        pivot_rows = [r for r in a_cols.get(c0, ()) if r != r0 and c0 in a.get(r, {})]
        for r1 in pivot_rows:
            beta = a[r1][c0]
            m1 = modulus(r1)
            factor = beta * ainv
            row1 = a[r1]
            for c1, val in other_cols:
                nv = (row1.get(c1, 0) - factor * val) % m1
                if nv:
                    if c1 not in row1:
                        a_cols.setdefault(c1, set()).add(r1)
                        if c1 in middle and unit(nv, m1) and modulus(c1) == m1:
                            heapq.heappush(heap, ((len(row1)) * (len(a_cols[c1])), r1, c1))
                    row1[c1] = nv
                else:
                    if c1 in row1:
                        del row1[c1]
                        a_cols[c1].discard(r1)
        for c, _ in other_cols:
            a_cols.get(c, set()).discard(r0)
        del a[r0]
        for r in list(a_cols.get(c0, ())):
            a.get(r, {}).pop(c0, None)
        a_cols.pop(c0, None)
        for g in list(b_rows_ix.get(c0, ())):
            col = b_cols.get(g)
            if col is not None:
                col.pop(c0, None)
                if not col:
                    del b_cols[g]
        b_rows_ix.pop(c0, None)
        middle.discard(c0)

    a_final = {r: {c: v for c, v in row.items() if c in middle} for r, row in a.items()}
    b_final = {g: {mid: v for mid, v in col.items() if mid in middle} for g, col in b_cols.items()}
    b_final = {g: col for g, col in b_final.items() if col}
    return middle, a_final, b_final


def bar_oracle(group_orders, matrices, module: FgModule, s, guard=10**7):
    """H^s of a finite abelian group by the normalized bar resolution.

    Independent of the periodic/product machinery: builds the explicit
    normalized cochain complex one primary part at a time, shrinks it by
    unit-pivot algebraic Morse reduction, and takes the exact subquotient of
    the small remaining core.
    """
    if module.free_rank:
        raise ValueError("bar_oracle needs a finite module")
    if s < 0:
        raise ValueError("degree must be non-negative")
    size = prod(group_orders)
    if size**s * max(module.order(), 1) > guard:
        raise TooLarge(f"bar complex too large: {size}^{s} * {module.order()} > {guard}")
    for f_order, a in zip(group_orders, matrices):
        validate_module_map(module, module, a, "bar action")
        if not endo_equal(module, a.power(f_order), IntMatrix.identity(module.rank())):
            raise NonAutomorphism("bar action generator order mismatch")
    primes = sorted(factorize(module.order()).keys()) if module.order() > 1 else []
    summands = []
    for q in primes:
        part_orders = [p_part(d, q) for d in module.torsion]
        coords = [i for i, o in enumerate(part_orders) if o > 1]
        if not coords:
            continue
        qmod = [part_orders[i] for i in coords]
        mats = [
            [[a.entries[i][j] % qmod[ci] for j in coords] for ci, i in enumerate(coords)]
            for a in matrices
        ]
        summands.extend(_bar_primary(tuple(group_orders), mats, qmod, q, s))
    return FgModule.from_orders(module.p, module.precision, summands)

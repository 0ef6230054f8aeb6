"""Bigraded spectral-sequence pages driven by declared differential scripts.

Pages live on finite windows; bidegrees outside the window are unknown, never
silently zero.  Two structural facts shrink the unknown region: coefficient
families here are connective (rows t < 0 vanish) and groups of finite
cohomological dimension kill filtrations above the bound.  All nonzero
differentials enter as script data with provenance tags; page turning takes
exact subquotients with generator tracking and never invents a differential.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import prod

from .cohomology import GAction, GroupSpec, product_cohomology_detailed
from .fgab import (
    ExtensionClass,
    FgModule,
    IntMatrix,
    Subquotient,
    assemble_extension,
    image_vectors,
    kernel_lattice,
    merge_summands,
    split_module,
    validate_module_map,
)

PROVENANCES = ("adams_comparison", "transported", "quadratic", "declared")


class BidegreeMismatch(Exception):
    """A script entry's bidegrees do not line up with the page."""


class DSquaredNonzero(Exception):
    """Two consecutive scripted differentials do not compose to zero."""


class WindowInsufficient(Exception):
    """A conclusion would depend on bidegrees outside the declared window."""


class IncompatibleComparison(Exception):
    """A transported differential fails to commute with its comparison maps."""


@dataclass(frozen=True)
class Window:
    s_max: int
    t_min: int
    t_max: int

    def contains(self, s, t):
        return 0 <= s <= self.s_max and self.t_min <= t <= self.t_max

    def render(self):
        return f"s<={self.s_max},t={self.t_min}..{self.t_max}"


@dataclass(frozen=True)
class Differential:
    """One scripted differential d_page from source, as a matrix in entry bases."""

    page: int
    source: tuple
    matrix: IntMatrix
    provenance: str
    note: str = ""

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def target(self):
        s, t = self.source
        return (s + self.page, t + self.page - 1)


@dataclass(frozen=True)
class DifferentialScript:
    entries: tuple

    def on_page(self, r):
        return [e for e in self.entries if e.page == r]

    def max_page(self):
        return max((e.page for e in self.entries), default=1)

    def without(self, entry):
        return DifferentialScript(tuple(e for e in self.entries if e != entry))


@dataclass(frozen=True)
class QuadraticRule:
    """Total differential d_r(x) = d_r^ASS(x) + x^2 on a class at bidegree (r, r)."""

    page: int
    adams_value: IntMatrix
    square_value: IntMatrix
    note: str = ""


@dataclass
class SseqPage:
    name: str
    r: int
    window: Window
    p: int
    precision: int
    entries: dict  # (s, t) -> FgModule, nonzero in-window entries only
    connective: bool = True
    s_vanishing: int = None  # None = unbounded (finite cyclic factors present)
    history: tuple = ()
    caveats: tuple = ()

    def entry(self, s, t):
        """Module at a bidegree: FgModule if known, None if outside all knowledge."""
        if self.known_zero(s, t):
            return FgModule.zero(self.p, self.precision)
        if not self.window.contains(s, t):
            return None
        return self.entries.get((s, t), FgModule.zero(self.p, self.precision))

    def known_zero(self, s, t):
        if s < 0:
            return True
        if self.connective and t < 0:
            return True
        if self.s_vanishing is not None and s > self.s_vanishing:
            return True
        if self.window.contains(s, t) and (s, t) not in self.entries:
            return True
        return False

    def is_known(self, s, t):
        return self.window.contains(s, t) or self.known_zero(s, t)

    def structurally_equal(self, other):
        if (self.r, self.window, self.p) != (other.r, other.window, other.p):
            return False
        keys = set(self.entries) | set(other.entries)
        return all(
            self.entries.get(k, FgModule.zero(self.p, self.precision))
            == other.entries.get(k, FgModule.zero(other.p, other.precision))
            for k in keys
        )


@dataclass(frozen=True)
class CoefficientRow:
    """One value of the coefficient family: either an action or declared cohomology."""

    action: GAction = None
    declared: tuple = None  # tuple of FgModule indexed by s
    provenance: str = ""

    @classmethod
    def from_action(cls, act, provenance=""):
        return cls(action=act, provenance=provenance)

    @classmethod
    def from_declared(cls, modules, provenance):
        return cls(declared=tuple(modules), provenance=provenance)


def build_e2(group: GroupSpec, rows, window: Window, name="sseq", p=None, precision=None, rename=None):
    """E_2 page: each row t gets H^s(G, coefficient) recomputed from the action data.

    rows maps t to a CoefficientRow; omitted rows are zero.  rename, when
    given, maps (s, t) to {default_label: new_label} for generator naming.
    """
    entries = {}
    caveats = []
    for t, row in sorted(rows.items()):
        if t < 0 or t > window.t_max or t < window.t_min:
            continue
        if row.action is not None:
            values = product_cohomology_detailed(group, row.action, window.s_max)
            modules = [v.merge()[0] for v in values]
            if p is None:
                p, precision = row.action.module.p, row.action.module.precision
        else:
            modules = list(row.declared)
            modules += [FgModule.zero(modules[0].p, modules[0].precision)] * (window.s_max + 1 - len(modules))
            caveats.append(f"row t={t} uses declared cohomology ({row.provenance})")
        for s, m in enumerate(modules[: window.s_max + 1]):
            if not m.is_trivial():
                entries[(s, t)] = m
    if p is None:
        raise ValueError("cannot infer the prime: give p and precision or one action row")
    if rename:
        for (s, t), mapping in rename.items():
            if (s, t) in entries:
                entries[(s, t)] = entries[(s, t)].relabel(mapping)
    return SseqPage(
        name=name,
        r=2,
        window=window,
        p=p,
        precision=precision,
        entries=entries,
        connective=True,
        s_vanishing=group.cd(),
        caveats=tuple(caveats),
    )


def _validate_script_entry(page: SseqPage, d: Differential):
    s, t = d.source
    if d.page != page.r:
        raise BidegreeMismatch(f"differential on page {d.page} applied to page {page.r}")
    src = page.entry(s, t)
    tgt = page.entry(*d.target())
    if src is None or tgt is None:
        raise WindowInsufficient(
            f"differential {d.source}->{d.target()} leaves the window {page.window.render()}"
        )
    validate_module_map(src, tgt, d.matrix, f"d_{d.page} at {d.source}")
    return src, tgt


def turn_page(page: SseqPage, script: DifferentialScript):
    """E_{r+1} from E_r: exact kernels modulo images of the scripted differentials."""
    current = script.on_page(page.r)
    if any(e.page != page.r for e in script.entries):
        raise BidegreeMismatch("script contains entries for other pages; filter first")
    by_source = {}
    for d in current:
        if d.source in by_source:
            raise BidegreeMismatch(f"two differentials declared at {d.source}")
        _validate_script_entry(page, d)
        by_source[d.source] = d
    for d in current:
        follow = by_source.get(d.target())
        if follow is not None:
            comp = follow.matrix @ d.matrix
            tgt2 = page.entry(*follow.target())
            for i, o in enumerate(tgt2.orders()):
                mod = o if o else page.p**page.precision
                for j in range(comp.cols):
                    if comp.entries[i][j] % mod:
                        raise DSquaredNonzero(f"d o d != 0 from {d.source} via {d.target()}")
    new_entries = {}
    for (s, t), module in page.entries.items():
        out_d = by_source.get((s, t))
        in_d = by_source.get((s - page.r, t - page.r + 1))
        if out_d is None and in_d is None:
            new_entries[(s, t)] = module  # permanent within this page turn, labels kept
            continue
        new_entries[(s, t)] = _page_subquotient(page, module, out_d, in_d)
    new_entries = {k: m for k, m in new_entries.items() if not m.is_trivial()}
    return replace(
        page,
        r=page.r + 1,
        entries=new_entries,
        history=page.history + tuple(current),
    )


def _page_subquotient(page, module, out_d, in_d):
    """ker(out)/im(in) of one page entry, computed per local/tame slice."""
    loc, tame = split_module(module)
    orders, labels = [], []
    for part in (loc, tame):
        if part.rank() == 0:
            continue
        if out_d is not None:
            tgt = page.entry(*out_d.target())
            tgt_part = split_module(tgt)[0 if part.local else 1]
            rows = tgt_part.restrict_matrix(out_d.matrix.to_lists(), part)
            num = kernel_lattice(rows, list(part.orders), list(tgt_part.orders))
        else:
            num = None
        den = []
        if in_d is not None:
            src = page.entry(*in_d.source)
            src_part = split_module(src)[0 if part.local else 1]
            rows = part.restrict_matrix(in_d.matrix.to_lists(), src_part)
            den = image_vectors(rows, list(src_part.orders))
        sq = Subquotient(part, num, den)
        m = sq.module()
        orders.extend(m.orders())
        labels.extend(m.labels)
    merged, _ = merge_summands(page.p, page.precision, orders, labels)
    return merged


def apply_quadratic_rule(rule: QuadraticRule, page: SseqPage):
    """Script entry for d_r(x) = d_r^ASS(x) + x^2 on the class at (r, r)."""
    r = rule.page
    if page.r != r:
        raise BidegreeMismatch(f"quadratic rule for page {r} applied on page {page.r}")
    src = page.entry(r, r)
    tgt = page.entry(2 * r, 2 * r - 1)
    if src is None or tgt is None:
        raise WindowInsufficient("quadratic rule needs (r, r) and (2r, 2r-1) inside the window")
    if src.is_trivial():
        raise BidegreeMismatch(f"no class at bidegree ({r}, {r})")
    total = rule.adams_value + rule.square_value
    reduced = IntMatrix.from_rows(
        [
            [x % (o if o else page.p**page.precision) for x in row]
            for row, o in zip(total.entries, tgt.orders())
        ],
        total.cols,
    )
    return Differential(r, (r, r), reduced, "quadratic", rule.note)


def transport_differential(source_page, target_page, comparison, entry: Differential, proposed: IntMatrix, note=""):
    """Validate a differential pushed along a comparison of spectral sequences.

    comparison maps bidegrees to restriction matrices target_page -> source_page.
    The proposed matrix is accepted when kappa_target @ proposed equals
    entry.matrix @ kappa_source on the nose in the source entry module.
    """
    src_bid = entry.source
    tgt_bid = entry.target()
    if src_bid not in comparison or tgt_bid not in comparison:
        raise IncompatibleComparison(f"comparison matrices missing at {src_bid} or {tgt_bid}")
    k_src = comparison[src_bid]
    k_tgt = comparison[tgt_bid]
    lhs = k_tgt @ proposed
    rhs = entry.matrix @ k_src
    source_target = source_page.entry(*tgt_bid)
    validate_module_map(target_page.entry(*src_bid), source_page.entry(*src_bid), k_src, "comparison (source)")
    validate_module_map(target_page.entry(*tgt_bid), source_page.entry(*tgt_bid), k_tgt, "comparison (target)")
    pN = source_page.p**source_page.precision
    for i, o in enumerate(source_target.orders()):
        mod = o if o else pN
        for j in range(lhs.cols):
            if (lhs.entries[i][j] - rhs.entries[i][j]) % mod:
                raise IncompatibleComparison(
                    f"transported differential at {src_bid} does not commute with the comparison"
                )
    return Differential(entry.page, src_bid, proposed, "transported", note)


@dataclass(frozen=True)
class StemReadout:
    stem: int
    pieces: tuple  # ((s, FgModule), ...) ascending filtration
    assumed_zero: tuple  # differentials treated as zero by declared data

    def graded_orders(self):
        return [m.order() for _, m in self.pieces]

    def total_order(self):
        out = 1
        for _, m in self.pieces:
            if m.order() is None:
                return None
            out *= m.order()
        return out


def read_stem(page: SseqPage, stem, max_r=None):
    """Stabilized stem contents, lowest filtration first.

    Raises WindowInsufficient when an in-range bidegree or one of its
    potential differential sources lies outside the window; unscripted
    differentials between known nonzero entries are recorded as assumed-zero
    (they are data, declared zero by the scenario's citation ledger).
    """
    pieces = []
    assumed = []
    applied = {(d.page, d.source) for d in page.history}
    limit = max_r if max_r is not None else page.window.s_max + 1
    for s in range(0, page.window.s_max + 1):
        t = s + stem
        entry = page.entry(s, t)
        if entry is None:
            raise WindowInsufficient(f"stem {stem} meets bidegree ({s},{t}) outside window {page.window.render()}")
        if entry.is_trivial():
            continue
        for r in range(2, min(s, limit) + 1):
            src = (s - r, t - r + 1)
            if page.known_zero(*src):
                continue
            src_entry = page.entry(*src)
            if src_entry is None:
                raise WindowInsufficient(
                    f"potential d_{r} source {src} for stem-{stem} class at ({s},{t}) is outside the window"
                )
            if not src_entry.is_trivial() and (r, src) not in applied:
                assumed.append(f"d_{r}: {src} -> ({s},{t}) assumed zero")
        for r in range(2, limit + 1):
            tgt = (s + r, t + r - 1)
            if page.known_zero(*tgt):
                continue
            tgt_entry = page.entry(*tgt)
            if tgt_entry is None:
                continue  # value is data; an unknown target group does not change the readout
            if not tgt_entry.is_trivial() and (r, (s, t)) not in applied:
                assumed.append(f"d_{r}: ({s},{t}) -> {tgt} assumed zero")
        pieces.append((s, entry))
    return StemReadout(stem, tuple(pieces), tuple(assumed))


@dataclass(frozen=True)
class AssemblyStep:
    """Extension data joining the next graded piece onto the partial assembly."""

    filtration: int
    class_matrix: IntMatrix  # sub-rank x quot-torsion-count, sub = assembly so far
    provenance: str


@dataclass(frozen=True)
class StemAssembly:
    stem: int
    pieces: tuple  # ((s, FgModule), ...) ascending filtration
    steps: tuple  # AssemblyStep per piece below the top, descending filtration
    p: int = 2
    precision: int = 16


def assemble_stem(a: StemAssembly):
    """Iterated extension assembly from the highest filtration downward."""
    ordered = sorted(a.pieces, key=lambda sm: -sm[0])
    if not ordered:
        return FgModule.zero(a.p, a.precision)
    current = ordered[0][1]
    rest = ordered[1:]
    if len(a.steps) != len(rest):
        raise ValueError("need one assembly step per piece below the top filtration")
    for (filt, quot), step in zip(rest, a.steps):
        if step.filtration != filt:
            raise ValueError(f"assembly step filtration {step.filtration} does not match piece at {filt}")
        ext = ExtensionClass(current, quot, step.class_matrix)
        current = assemble_extension(ext)
    return current


def split_assembly(stem, pieces, p=2, precision=16):
    """All-zero extension data for a readout: direct sum of the graded pieces."""
    ordered = sorted(pieces, key=lambda sm: -sm[0])
    steps = []
    if ordered:
        current = ordered[0][1]
        for filt, quot in ordered[1:]:
            steps.append(
                AssemblyStep(filt, IntMatrix.zero(current.rank(), len(quot.torsion)), "computed-split")
            )
            current = assemble_extension(ExtensionClass.split(current, quot))
    return StemAssembly(stem, tuple(sorted(pieces)), tuple(steps), p, precision)

import random

import pytest

from picbrauer.fgab import (
    DEFAULT_PRECISION,
    ExtensionClass,
    FgModule,
    IntMatrix,
    InvalidClass,
    PartSpace,
    PrecisionOverflow,
    Subquotient,
    assemble_extension,
    cokernel,
    ext_group,
    hom_group,
    merge_summands,
    smith_normal_form,
    split_module,
    validate_module_map,
)


def snf_reassemble(m):
    d, u, v = smith_normal_form(m)
    assert (u @ m @ v).entries == d.entries
    diag = [d.entries[i][i] for i in range(min(d.rows, d.cols))]
    for i in range(min(d.rows, d.cols)):
        for j in range(d.cols):
            if i != j:
                assert d.entries[i][j] == 0
    for a, b in zip(diag, diag[1:]):
        if a and b:
            assert b % a == 0
        if a == 0:
            assert b == 0
    assert all(x >= 0 for x in diag)
    return diag


def test_snf_identity():
    m = IntMatrix.identity(2)
    assert snf_reassemble(m) == [1, 1]


def test_snf_worked_example():
    # hand row/column reduction: entry gcd 2, det -8
    m = IntMatrix.from_rows([[2, 4], [6, 8]])
    assert snf_reassemble(m) == [2, 4]


def test_snf_single_row():
    m = IntMatrix.from_rows([[4, -8]])
    assert snf_reassemble(m) == [4]


def test_snf_empty():
    m = IntMatrix.from_rows([], cols=3)
    d, u, v = smith_normal_form(m)
    assert d.rows == 0 and v.rows == 3


def test_snf_random_suite():
    rng = random.Random(7)
    for _ in range(1000):
        rows = rng.randrange(1, 7)
        cols = rng.randrange(1, 7)
        m = IntMatrix.from_rows([[rng.randint(-20, 20) for _ in range(cols)] for _ in range(rows)])
        snf_reassemble(m)


def test_cokernel_free():
    m = cokernel(2, IntMatrix.from_rows([], cols=2), p=2)
    assert m == FgModule(2, DEFAULT_PRECISION, 2, ())


def test_cokernel_worked():
    # SNF gives the relation 4 f1 = 0 after f1 = e1 - 2 e2
    m = cokernel(2, IntMatrix.from_rows([[4, -8]]), p=2)
    assert m == FgModule(2, DEFAULT_PRECISION, 1, (4,))
    assert m.render() == "Z_2 + Z/4"


def test_cokernel_trivial():
    assert cokernel(1, IntMatrix.from_rows([[1]]), p=3).is_trivial()


def test_cokernel_localizes():
    # Z/6 over Z collapses to its 2-part over Z_2
    m = cokernel(1, IntMatrix.from_rows([[6]]), p=2)
    assert m == FgModule(2, DEFAULT_PRECISION, 0, (2,))


def test_cokernel_presentation_invariance():
    rng = random.Random(11)
    for _ in range(50):
        g = rng.randrange(1, 4)
        rows = [[rng.randint(-6, 6) for _ in range(g)] for _ in range(rng.randrange(0, 4))]
        base = cokernel(g, IntMatrix.from_rows(rows, cols=g), p=3)
        if rows:
            coeffs = [rng.randint(-3, 3) for _ in rows]
            extra = [sum(c * r[j] for c, r in zip(coeffs, rows)) for j in range(g)]
            redundant = cokernel(g, IntMatrix.from_rows(rows + [extra], cols=g), p=3)
            assert base == redundant


def test_cokernel_precision_overflow():
    with pytest.raises(PrecisionOverflow):
        cokernel(1, IntMatrix.from_rows([[2**20]]), p=2, precision=16)


def test_ext_worked_examples():
    z2 = FgModule.free(2, 1)
    z8 = FgModule.cyclic(2, 8)
    assert ext_group(z8, z2) == FgModule.cyclic(2, 8)
    assert ext_group(z2, z8).is_trivial()
    assert ext_group(FgModule.cyclic(2, 2), FgModule.cyclic(2, 4)) == FgModule.cyclic(2, 2)


def test_ext_additivity():
    rng = random.Random(3)
    for _ in range(40):
        p = rng.choice([2, 3, 5])
        mods = [
            FgModule.from_orders(p, DEFAULT_PRECISION, [rng.choice([0, 2, 3, 4, 8, 9]) for _ in range(rng.randrange(1, 3))])
            for _ in range(3)
        ]
        a, b, m = mods
        lhs = ext_group(a.direct_sum(b), m)
        rhs = ext_group(a, m).direct_sum(ext_group(b, m))
        assert lhs == rhs


def test_hom_worked_examples():
    units2 = FgModule(2, DEFAULT_PRECISION, 1, (2,))  # Z_2^x as Z/2 + Z_2
    assert hom_group(FgModule.cyclic(2, 2), units2) == FgModule.cyclic(2, 2)
    # continuous maps from pro-3 to order 2: none
    assert hom_group(FgModule.free(3, 1), FgModule.cyclic(3, 2)).is_trivial()
    assert hom_group(units2, FgModule.zero(2)).is_trivial()


def test_assemble_extension_worked():
    z2 = FgModule.free(2, 1)
    z8 = FgModule.cyclic(2, 8)
    e = ExtensionClass.from_scalar(z2, z8, 4)
    assert assemble_extension(e) == FgModule(2, DEFAULT_PRECISION, 1, (4,))
    # split case
    assert assemble_extension(ExtensionClass.split(z2, z8)) == FgModule(2, DEFAULT_PRECISION, 1, (8,))
    # the only non-split extension of Z/2 by Z/2
    c2 = FgModule.cyclic(2, 2)
    assert assemble_extension(ExtensionClass.from_scalar(c2, c2, 1)) == FgModule.cyclic(2, 4)


def test_assemble_extension_mixed_tame():
    # class on the free sub coordinate only sees the p-part of the quotient order
    z2 = FgModule.free(2, 1)
    z24 = FgModule.cyclic(2, 24)
    got = assemble_extension(ExtensionClass.from_scalar(z2, z24, 2))
    assert got == FgModule(2, DEFAULT_PRECISION, 1, (6,))


def test_assemble_extension_invalid():
    z2 = FgModule.free(2, 1)
    z8 = FgModule.cyclic(2, 8)
    with pytest.raises(InvalidClass):
        ExtensionClass(z2, z8, IntMatrix.from_rows([[9]]))


def test_assemble_order_multiplicativity():
    rng = random.Random(5)
    for _ in range(60):
        p = rng.choice([2, 3])
        sub = FgModule.from_orders(p, 16, [rng.choice([2, 3, 4, 8]) for _ in range(rng.randrange(1, 3))])
        quot = FgModule.from_orders(p, 16, [rng.choice([2, 4, 8]) for _ in range(rng.randrange(1, 3))])
        rows = []
        for i, e in enumerate(sub.orders()):
            row = []
            for d in quot.torsion:
                from math import gcd

                bound = gcd(d, e)
                row.append(rng.randrange(bound))
            rows.append(row)
        ext = ExtensionClass(sub, quot, IntMatrix.from_rows(rows, len(quot.torsion)))
        mid = assemble_extension(ext)
        assert mid.order() == sub.order() * quot.order()
        split = assemble_extension(ExtensionClass.split(sub, quot))
        assert split == sub.direct_sum(quot)


def test_canonical_form_merges_coprime():
    m = FgModule.from_orders(5, 16, [2, 3])
    assert m.torsion == (6,)
    m2 = FgModule.from_orders(5, 16, [0, 30, 4])
    assert m2.free_rank == 1 and m2.torsion == (2, 60)


def test_divisibility_validation():
    with pytest.raises(ValueError):
        FgModule(2, 16, 0, (4, 2))


def test_render_contract():
    m = FgModule(2, 16, 1, (2, 4), ("u", "a", "b"))
    assert m.render() == "Z_2 + Z/2 + Z/4"
    assert FgModule.zero(3).render() == "0"


def test_subquotient_tracking():
    # ker(x2)/im(x2) on Z/4: H^odd of C_2 acting trivially on Z/4-ish slice
    part = PartSpace.plain(2, 16, (4,), ("a",))
    two = [[2]]
    num = [[2]]  # kernel of multiplication by 2 on Z/4 is 2Z/4
    sq = Subquotient(part, num, [[v] for v in (0,)])
    assert sq.module().torsion == (2,)
    induced = sq.induce([[3]])  # multiplication by 3 acts as identity on the subquotient
    assert induced == [[1]]


def test_split_module_blocks():
    m = FgModule.from_orders(2, 16, [0, 6])
    loc, tame = split_module(m)
    assert loc.orders == (0, 2) and tame.orders == (3,)


def test_validate_module_map():
    src = FgModule.cyclic(2, 2)
    dst = FgModule.free(2, 1)
    with pytest.raises(Exception):
        validate_module_map(src, dst, IntMatrix.from_rows([[1]]))


def test_merge_placement_roundtrip():
    from picbrauer.fgab import combine_elements

    module, placement = merge_summands(5, 16, [2, 3], ["a", "b"])
    assert module.torsion == (6,)
    # element (1, 2) in Z/2 + Z/3 maps to the unique x mod 6 with x odd, x = 2 mod 3
    coords = combine_elements(module, placement, [1, 2])
    assert coords == [5]

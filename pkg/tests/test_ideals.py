"""Staircases, division bases, normal forms, and the mod-p oracle."""

import random

import pytest

from dcongr import Context, DiffOp, TateSeries
from dcongr.errors import RangeError, ZeroInput
from dcongr.ideals import (DivisionBasis, Exponent, Staircase, UnitIdeal,
                           division_basis, exponent, normal_form,
                           oracle_staircase)
from dcongr.scalar import Mag


@pytest.fixture
def ctx():
    return Context(p=5, prec=14, tdeg=16, opmax=20)


def S(ctx, *values):
    return TateSeries.from_list(ctx, values)


def op(ctx, level, *series):
    return DiffOp(ctx, level, [s if isinstance(s, TateSeries) else S(ctx, *s)
                               for s in series])


def mono(ctx, level, v, d, c=1):
    return DiffOp.monomial(ctx, level, TateSeries.t_power(ctx, v, c), d)


def rand_op(ctx, rng, level, max_order=3, max_tdeg=3):
    while True:
        coeffs = []
        for _ in range(rng.randint(1, max_order + 1)):
            deg = rng.randint(0, max_tdeg)
            coeffs.append(S(ctx, *[rng.randint(-9, 9) * 5 ** rng.randint(0, 1)
                                   for _ in range(deg + 1)]))
        h = DiffOp(ctx, level, coeffs)
        if not h.is_zero():
            return h.normalized()[0]


def test_exponent_examples(ctx):
    assert exponent(mono(ctx, 1, 3, 2)) == Exponent(3, 2)
    assert exponent(op(ctx, 1, (2, 5))) == Exponent(0, 0)


def test_exponent_additive(ctx):
    rng = random.Random(7)
    for level in (0, 1, 2):
        for _ in range(30):
            a = rand_op(ctx, rng, level)
            b = rand_op(ctx, rng, level)
            assert exponent(a * b) == exponent(a) + exponent(b)


def test_staircase_region_and_minimals():
    st = Staircase([(3, 1), (1, 3), (5, 0), (4, 4)])
    assert st.minimals == (Exponent(1, 3), Exponent(3, 1), Exponent(5, 0))
    assert st.contains(Exponent(6, 2))
    assert not st.contains(Exponent(0, 2))
    assert st.d_min() == 0 and st.v_min() == 1
    assert not st.is_unit()
    assert "o" in st.ascii()


def test_principal_basis(ctx):
    basis = division_basis([mono(ctx, 1, 2, 1)])
    assert isinstance(basis, DivisionBasis)
    assert basis.staircase.minimals == (Exponent(2, 1),)
    assert len(basis.ops) == 1


def test_unit_ideal_from_bracket_cascade(ctx):
    # t^2 and the level generator: cross combinations cascade down to 1
    gens = [op(ctx, 1, (0, 0, 1)), DiffOp.scaled_derivation(ctx, 1)]
    out = division_basis(gens)
    assert isinstance(out, UnitIdeal)


def test_gens_not_all_zero(ctx):
    with pytest.raises(ZeroInput):
        division_basis([DiffOp.zero(ctx, 1)])


def test_echelon_shape(ctx):
    gens = [mono(ctx, 1, 3, 1), mono(ctx, 1, 1, 3)]
    basis = division_basis(gens)
    assert isinstance(basis, DivisionBasis)
    orders = [p.nbar() for p in basis.ops]
    vals = [p.nk() for p in basis.ops]
    d0 = basis.staircase.d_min()
    assert orders == list(range(d0, d0 + len(orders)))
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert vals[-1] == basis.staircase.v_min()
    assert all(p.op_norm() == Mag.p_pow(0) for p in basis.ops)


def test_normal_form_membership(ctx):
    gens = [mono(ctx, 1, 3, 1), mono(ctx, 1, 1, 3)]
    basis = division_basis(gens)
    assert normal_form(basis.ops[0], basis).is_zero()
    one = DiffOp.one(ctx, 1)
    assert normal_form(one, basis) == one
    t_op = op(ctx, 1, (0, 1))
    combo = t_op * basis.ops[0] + DiffOp.scaled_derivation(ctx, 1) * basis.ops[-1]
    rem = normal_form(combo, basis)
    assert rem.is_zero() or rem.is_negligible()


def test_basis_idempotent(ctx):
    rng = random.Random(11)
    for _ in range(8):
        gens = [rand_op(ctx, rng, 1), rand_op(ctx, rng, 1)]
        basis = division_basis(gens)
        if isinstance(basis, UnitIdeal):
            continue
        again = division_basis(list(basis.ops))
        assert isinstance(again, DivisionBasis)
        assert again.staircase == basis.staircase


def test_oracle_hand_examples(ctx):
    st = oracle_staircase([mono(ctx, 1, 2, 1)])
    assert st.minimals == (Exponent(2, 1),)
    # generators t xi and t^3
    st = oracle_staircase([mono(ctx, 1, 1, 1), mono(ctx, 1, 3, 0)])
    assert st.minimals == (Exponent(1, 1), Exponent(3, 0))


def test_oracle_level_zero_rejected(ctx):
    with pytest.raises(RangeError):
        oracle_staircase([mono(ctx, 0, 1, 1)])


def test_oracle_vs_basis_random(ctx):
    """The two staircase computations agree on random two-generator ideals
    whose completion never divides by p (the torsion-free regime where the
    mod-p computation is authoritative)."""
    rng = random.Random(13)
    checked = 0
    while checked < 25:
        level = rng.choice((1, 2))
        gens = [rand_op(ctx, rng, level, max_order=2, max_tdeg=2),
                rand_op(ctx, rng, level, max_order=2, max_tdeg=2)]
        basis = division_basis(gens)
        if isinstance(basis, UnitIdeal) or basis.saturations:
            continue
        st = oracle_staircase(gens)
        assert st == basis.staircase, (gens, st, basis.staircase)
        checked += 1


def test_modp_reduction_of_basis_is_basis(ctx):
    """Norm-1 basis reductions generate the same mod-p staircase."""
    rng = random.Random(17)
    checked = 0
    while checked < 10:
        gens = [rand_op(ctx, rng, 1, max_order=2, max_tdeg=2),
                rand_op(ctx, rng, 1, max_order=2, max_tdeg=2)]
        basis = division_basis(gens)
        if isinstance(basis, UnitIdeal) or basis.saturations:
            continue
        st = oracle_staircase(list(basis.ops))
        assert st == basis.staircase
        checked += 1

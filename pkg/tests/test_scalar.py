"""Scalar arithmetic: valuations, capped precision, cancellation."""

import random
from fractions import Fraction

import pytest

from dcongr import Context, scalar_arith, valuation
from dcongr.errors import DivisionByZero, PrecisionExhausted
from dcongr.scalar import INF, Mag


@pytest.fixture
def ctx():
    return Context(p=5, prec=20, tdeg=16, opmax=16)


def test_valuation_basics(ctx):
    assert valuation(ctx.zero()) == INF
    assert valuation(ctx.scalar(3 * 5 ** 5)) == 5
    assert valuation(ctx.scalar(Fraction(1, 25))) == -2
    assert valuation(ctx.one()) == 0


def test_mul_adds_valuations(ctx):
    p, p2 = ctx.scalar(5), ctx.scalar(25)
    assert valuation(scalar_arith(p, p2, "mul")) == 3


def test_exact_cancellation_gives_exact_zero(ctx):
    z = scalar_arith(ctx.one(), ctx.scalar(-1), "add")
    assert z.is_zero()
    assert valuation(z) == INF


def test_inv_geometric_series(ctx):
    # 1/(1-p) agrees with the truncated geometric series mod p^prec
    x = ctx.scalar(1 - 5)
    inv = scalar_arith(x, None, "inv")
    geo = ctx.scalar(sum(5 ** n for n in range(ctx.prec)))
    assert (inv - geo).is_negligible()
    assert (inv * x - ctx.one()).is_zero()


def test_inv_zero_raises(ctx):
    with pytest.raises(DivisionByZero):
        ctx.zero().invert()


def test_capped_roundtrip_and_inverse(ctx):
    x = ctx.scalar(Fraction(7, 3)).project()
    assert x.valuation() == 0
    y = x.invert()
    assert (x * y - ctx.one()).is_negligible()


def test_capped_cancellation_hits_floor(ctx):
    a = ctx.scalar(7).project()
    b = ctx.scalar(-7).project()
    s = a + b
    assert s.is_floor()
    with pytest.raises(PrecisionExhausted):
        s.valuation()


def test_capped_partial_cancellation_certified(ctx):
    a = ctx.scalar(1 + 5 ** 3).project()
    b = ctx.scalar(-1).project()
    s = a + b
    assert s.valuation() == 3


def test_ultrametric_random():
    ctx = Context(p=3, prec=24)
    rng = random.Random(7)
    for _ in range(300):
        x = ctx.scalar(Fraction(rng.randint(-200, 200) or 1,
                                rng.randint(1, 50)))
        y = ctx.scalar(Fraction(rng.randint(-200, 200) or 1,
                                rng.randint(1, 50)))
        vx, vy = valuation(x), valuation(y)
        assert valuation(x * y) == vx + vy
        s = x + y
        if not s.is_zero():
            assert valuation(s) >= min(vx, vy)
        if vx != vy:
            assert valuation(s) == min(vx, vy)


def test_neg_and_sub(ctx):
    x = ctx.scalar(Fraction(9, 4))
    assert (x + (-x)).is_zero()
    assert (scalar_arith(x, x, "add") - x - x).is_zero()
    y = x.project()
    assert ((-y) + y).is_floor()


def test_projection_threshold_keeps_small_values_exact(ctx):
    x = ctx.scalar(5 ** 15)
    y = x * x  # still small in bits
    assert y.is_exact()
    assert y.valuation() == 30


def test_residue(ctx):
    assert ctx.scalar(12).residue() == 2
    assert ctx.scalar(Fraction(1, 2)).residue() == 3  # 2*3 = 6 = 1 mod 5
    assert ctx.scalar(5).residue() == 0


def test_mag_ordering():
    assert Mag.zero() < Mag.p_pow(-30)
    assert Mag.p_pow(-1) < Mag.p_pow(0) < Mag.p_pow(2)
    assert Mag.p_pow(1) * Mag.p_pow(2) == Mag.p_pow(3)
    assert Mag.p_pow(2) ** 3 == Mag.p_pow(6)
    assert Mag.zero() * Mag.p_pow(5) == Mag.zero()

"""Operator arithmetic: norms, products, brackets, inversion, frame changes."""

import random

import pytest

from dcongr import Context, DiffOp, TateSeries
from dcongr.dop import bracket_del, bracket_t, nbar, nk, op_invert, op_mul, op_norm
from dcongr.errors import LevelMismatch, NotInvertible
from dcongr.scalar import Mag


@pytest.fixture
def ctx():
    return Context(p=5, prec=18, tdeg=20, opmax=24)


def S(ctx, *values):
    return TateSeries.from_list(ctx, values)


def op(ctx, level, *series):
    return DiffOp(ctx, level, [s if isinstance(s, TateSeries) else S(ctx, *s)
                               for s in series])


def rand_op(ctx, rng, level, max_order=3, max_tdeg=3, scale=1):
    while True:
        coeffs = []
        for _ in range(rng.randint(1, max_order + 1)):
            deg = rng.randint(0, max_tdeg)
            coeffs.append(S(ctx, *[rng.randint(-12, 12) * 5 ** rng.randint(0, scale)
                                   for _ in range(deg + 1)]))
        h = DiffOp(ctx, level, coeffs)
        if not h.is_zero():
            return h


def test_norm_nbar_nk_examples(ctx):
    # 1 - p d at level 1: slot-1 coefficient is -1
    h = op(ctx, 1, (1,), (-1,))
    assert op_norm(h) == Mag.p_pow(0)
    assert nbar(h) == 1
    assert nk(h) == 0
    # the same operator at level 0 has slot-1 coefficient -p
    h0 = op(ctx, 0, (1,), (-5,))
    assert op_norm(h0) == Mag.p_pow(0)
    assert nbar(h0) == 0
    assert nk(h0) == 0
    # p t + t^2 (p d) at level 1
    h2 = op(ctx, 1, (0, 5), (0, 0, 1))
    assert op_norm(h2) == Mag.p_pow(0)
    assert nbar(h2) == 1
    assert nk(h2) == 2


def test_mul_identity_and_leibniz(ctx):
    k = 1
    x = DiffOp.scaled_derivation(ctx, k)
    f = op(ctx, k, (5, 1))  # t + p
    prod = op_mul(x, f)
    # (p^k d).(t+p) = (t+p)(p^k d) + p^k
    assert prod == op(ctx, k, (0 + 5 ** k,), (5, 1))
    one = DiffOp.one(ctx, k)
    h = rand_op(ctx, random.Random(1), k)
    assert op_mul(h, one) == h
    assert op_mul(one, h) == h


def test_mul_level_mismatch(ctx):
    a = DiffOp.one(ctx, 0)
    b = DiffOp.one(ctx, 1)
    with pytest.raises(LevelMismatch):
        op_mul(a, b)


def test_truncated_product_example(ctx):
    # (1 - p d)(1 - p^2 d) at level 1: norm 1, nbar 1, nk 0
    a = op(ctx, 1, (1,), (-1,))
    b = op(ctx, 1, (1,), (-5,))
    prod = op_mul(a, b)
    assert op_norm(prod) == Mag.p_pow(0)
    assert nbar(prod) == 1
    assert nk(prod) == 0


def test_mul_against_apply_oracle(ctx):
    """Composition of actions on functions checks the Leibniz double sum."""
    rng = random.Random(5)
    for level in (0, 1, 2):
        for _ in range(25):
            h = rand_op(ctx, rng, level, max_order=2, max_tdeg=2)
            q = rand_op(ctx, rng, level, max_order=2, max_tdeg=2)
            f = S(ctx, *[rng.randint(-9, 9) for _ in range(4)])
            lhs = op_mul(h, q).apply(f)
            rhs = h.apply(q.apply(f))
            assert lhs.eq_mod_prec(rhs)


def test_multiplicativity_random(ctx):
    rng = random.Random(9)
    for level in (0, 1, 2, 3):
        for _ in range(50):
            h = rand_op(ctx, rng, level)
            q = rand_op(ctx, rng, level)
            prod = op_mul(h, q)
            assert op_norm(prod) == op_norm(h) * op_norm(q)
            assert nbar(prod) == nbar(h) + nbar(q)
            assert nk(prod) == nk(h) + nk(q)


def test_integral_model_closure(ctx):
    rng = random.Random(13)
    for _ in range(40):
        h = rand_op(ctx, rng, 1)
        q = rand_op(ctx, rng, 1)
        hn = h.normalized()[0]
        qn = q.normalized()[0]
        assert op_mul(hn, qn).is_integral()


def test_rescale_examples(ctx):
    d0 = DiffOp.derivation(ctx, 0)
    d1 = d0.rescale_level(1)
    assert op_norm(d1) == Mag.p_pow(1)
    assert d1.coeff(1).coeff(0).valuation() == -1
    assert d0.rescale_level(0) == d0


def test_rescale_monotone_profile(ctx):
    # (1-p d)(1-p^2 d)(1-p^3 d): nbar profile 0,1,2,3,3 over levels 0..4
    factors = [(1, -5), (1, -25), (1, -125)]
    h = DiffOp.one(ctx, 0)
    for c0, c1 in factors:
        h = op_mul(h, op(ctx, 0, (c0,), (c1,)))
    profile = [nbar(h.rescale_level(k)) for k in range(5)]
    assert profile == [0, 1, 2, 3, 3]


def test_rescale_commutes_with_mul(ctx):
    rng = random.Random(17)
    for _ in range(20):
        h = rand_op(ctx, rng, 2)
        q = rand_op(ctx, rng, 2)
        lhs = op_mul(h, q).rescale_level(1)
        rhs = op_mul(h.rescale_level(1), q.rescale_level(1))
        assert lhs == rhs


def test_brackets_closed_forms(ctx):
    k = 2
    x2 = op_mul(DiffOp.scaled_derivation(ctx, k), DiffOp.scaled_derivation(ctx, k))
    assert bracket_t(x2) == op(ctx, k, (0,), (2 * 5 ** k,))
    fn = op(ctx, k, (3, 1, 4))
    assert bracket_t(fn).is_zero()
    t2 = op(ctx, k, (0, 0, 1))
    assert bracket_del(t2) == op(ctx, k, (0, -(2 * 5 ** k), 0)[0:2] + ((0, -2 * 5 ** k),)[1:]) \
        or bracket_del(t2) == DiffOp(ctx, k, [S(ctx, 0, -2 * 5 ** k)])


def test_brackets_vs_generic_mul(ctx):
    """Closed forms agree with H t - t H and H (p^k d) - (p^k d) H."""
    rng = random.Random(21)
    for level in (0, 1, 2):
        t_op = DiffOp.from_series(ctx, level, TateSeries.t_power(ctx, 1))
        x_op = DiffOp.scaled_derivation(ctx, level)
        for _ in range(20):
            h = rand_op(ctx, rng, level)
            assert bracket_t(h) == op_mul(h, t_op) - op_mul(t_op, h)
            assert bracket_del(h) == op_mul(h, x_op) - op_mul(x_op, h)


def test_bracket_t_iteration_kills_nbar(ctx):
    rng = random.Random(25)
    for _ in range(30):
        h = rand_op(ctx, rng, 1)
        w = h
        for _ in range(nbar(h)):
            w = bracket_t(w)
        assert nbar(w) == 0


def test_invert_examples(ctx):
    k = 1
    one = DiffOp.one(ctx, k)
    assert op_invert(one) == one
    # 1 - p (p^k d): geometric Neumann series
    h = op(ctx, k, (1,), (-5,))
    g = op_invert(h)
    assert op_mul(h, g).eq_mod_prec(one)
    assert op_mul(g, h).eq_mod_prec(one)
    assert op_norm(g) == Mag.p_pow(0)
    bad = op(ctx, k, (0, 1), (0, 1))  # t (p^k d) + t: nk = 1
    with pytest.raises(NotInvertible):
        op_invert(bad)


def test_invert_random_units():
    # generous caps: the two-sided residual of a truncated Neumann inverse
    # scales with the order and degree caps
    ctx = Context(p=5, prec=18, tdeg=40, opmax=60)
    rng = random.Random(29)
    one = DiffOp.one(ctx, 1)
    for _ in range(4):
        coeffs = [S(ctx, rng.choice([1, 2, 3, 4]), rng.randint(-4, 4) * 5)]
        for _ in range(rng.randint(1, 2)):
            deg = rng.randint(0, 2)
            coeffs.append(S(ctx, *[rng.randint(-10, 10) * 5
                                   for _ in range(deg + 1)]))
        h = DiffOp(ctx, 1, coeffs)
        g = op_invert(h)
        tol = Mag.p_pow(-(ctx.prec - 4))
        assert (op_mul(h, g) - one).norm_at_most(tol)
        assert (op_mul(g, h) - one).norm_at_most(tol)


def test_rebase_norm_invariants(ctx):
    rng = random.Random(33)
    u = S(ctx, 1, 5)  # 1 + p t, a norm-1 unit
    for level in (0, 1, 2):
        for _ in range(15):
            h = rand_op(ctx, rng, level)
            g = h.rebase_derivation(u)
            assert op_norm(g) == op_norm(h)
            assert nbar(g) == nbar(h)
            assert nk(g) == nk(h)


def test_rebase_round_trip(ctx):
    rng = random.Random(37)
    u = S(ctx, 2, 5, 25)
    for _ in range(10):
        h = rand_op(ctx, rng, 1)
        g = h.rebase_derivation(u)
        back = g.expand_derivation(u)
        assert back.eq_mod_prec(h)


def test_rebase_identity_unit(ctx):
    h = op(ctx, 1, (1, 2), (0, 1))
    one = TateSeries.one(ctx)
    assert h.rebase_derivation(one) == h

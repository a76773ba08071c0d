"""Division and factorization of level-k operators at the origin.

divide: H = Q P + R + S with R of order < nbar(P) and S carrying, in each
slot >= nbar(P), the polynomial part of t-degree < nk(P).  The algorithm is
a single top-down reduction sweep; splitting a working coefficient against
the dominant coefficient b = (low part) + t^nu * unit uses a series-level
Weierstrass division whose residual shrinks by at least 1/p per pass.

hensel_factor: H = Q P with Q invertible near the origin (nbar = nk = 0)
and P of finite order nbar(H) sharing the dominant coefficient of H.  A
fixed-point iteration feeds the division remainder back into P; each round
multiplies the residual by the sub-norm part of Q.

simplicity_witness: iterated brackets [.,t] then [.,p^k d] reach an
operator with nbar = nk = 0 lying in the two-sided ideal of the input.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dop import DiffOp
from .errors import (NonNormalizedLead, NotAUnit, PrecisionExhausted,
                     ZeroDivisor, ZeroOperator)
from .scalar import Mag
from .tate import TateSeries

FLAG_RESIDUAL = "residual_at_floor"


@dataclass(frozen=True)
class DivisionResult:
    """H = quotient * divisor + remainder + tail, modulo precision."""

    quotient: DiffOp
    remainder: DiffOp
    tail: DiffOp
    flags: frozenset


@dataclass(frozen=True)
class HenselResult:
    """input = unit * dominant; the unit has nbar = nk = 0 and norm 1."""

    unit: DiffOp
    dominant: DiffOp
    flags: frozenset


@dataclass(frozen=True)
class SimplicityWitness:
    """Bracket word landing on an invertible element of the two-sided ideal."""

    op: DiffOp
    t_brackets: int
    del_brackets: int


class _LeadSplit:
    """Dominant coefficient b split as b = low + t^nu * unit, unit invertible."""

    __slots__ = ("b", "nu", "low", "unit", "unit_inv")

    def __init__(self, b: TateSeries):
        try:
            self.nu = b.n_index()
        except Exception as exc:
            raise NonNormalizedLead(
                "dominant coefficient has no certified shape") from exc
        self.b = b
        self.low, unit = b.split_at(self.nu)
        try:
            self.unit_inv = unit.invert()
        except NotAUnit as exc:
            raise NonNormalizedLead(
                "dominant coefficient does not factor as t^nu * unit") from exc
        self.unit = unit

    def divide_series(self, w: TateSeries):
        """(c, r, flags): w = c*b + r with deg r < nu, up to the floor.

        One pass is exact when the low part vanishes; otherwise the residual
        picks up a factor ||low|| < 1 per pass.
        """
        ctx = w.ctx
        flags = frozenset()
        if self.nu == 0:
            # b is a unit: single exact pass, no remainder
            return w * self.unit_inv, TateSeries.zero(ctx), flags
        c_total = TateSeries.zero(ctx)
        r_total = TateSeries.zero(ctx)
        work = w
        for _ in range(ctx.prec + 2):
            if work.is_zero():
                return c_total, r_total, flags
            if work.is_negligible():
                return c_total, r_total, flags | {FLAG_RESIDUAL}
            r, h = work.split_at(self.nu)
            c = h * self.unit_inv
            c_total = c_total + c
            r_total = r_total + r
            if self.low.is_zero():
                return c_total, r_total, flags
            work = -(c * self.low)
        raise PrecisionExhausted("series division stalled above the floor")


def divide(h: DiffOp, p_op: DiffOp, _normalized=None) -> DivisionResult:
    """Unique division H = Q P + R + S at the origin.

    Iterated top-down sweeps: each pass reduces the t^(>=nu) content of
    every slot >= nbar(P) against the dominant coefficient.  What a pass
    leaks back into processed slots comes from the strictly sub-norm part
    of P, so the reducible content contracts by at least 1/p per pass and
    the loop stops at the precision floor.  When nk(P) = 0 the tail S
    vanishes (finite-remainder division by a unit-reducible lead).
    """
    if p_op.is_zero():
        raise ZeroDivisor("division by the zero operator")
    h._check(p_op)
    ctx = h.ctx
    level = h.level
    if _normalized is None:
        pn, e = p_op.normalized()
        d = pn.nbar()
        split = _LeadSplit(pn.coeffs[d])
    else:
        pn, e, d, split = _normalized
    flags = h.flags | p_op.flags
    zero = TateSeries.zero(ctx)
    floor = Mag.p_pow(-ctx.prec)
    work = list(h.coeffs)
    q_slots = {}

    def reducible_left():
        for i in range(d, len(work)):
            if not work[i].split_at(split.nu)[1].norm_at_most(floor):
                return True
        return False

    for _pass in range(ctx.prec + 4):
        if not reducible_left():
            break
        for i in range(len(work) - 1, d - 1, -1):
            w = work[i]
            if w.is_zero() or w.is_negligible():
                continue
            if w.split_at(split.nu)[1].norm_at_most(floor):
                continue
            c, _r, fl = split.divide_series(w)
            flags = flags | fl
            if c.is_zero():
                continue
            q_slots[i - d] = q_slots.get(i - d, zero) + c
            delta = DiffOp.monomial(ctx, level, c, i - d) * pn
            top = delta.order()
            if top >= len(work):
                work.extend([zero] * (top + 1 - len(work)))
            for m in range(top, -1, -1):
                dm = delta.coeff(m)
                if not dm.is_zero():
                    work[m] = work[m] - dm
    else:
        raise PrecisionExhausted("division sweeps stalled above the floor")

    s_slots = {}
    for i in range(d, len(work)):
        rem = work[i]
        if rem.is_zero():
            continue
        low, high = rem.split_at(split.nu)
        if not high.is_zero():
            flags = flags | {FLAG_RESIDUAL}
        if low.is_negligible():
            if not low.is_zero():
                flags = flags | {FLAG_RESIDUAL}
        else:
            s_slots[i] = low
    q_order = max(q_slots) if q_slots else -1
    quotient = DiffOp(ctx, level,
                      [q_slots.get(m, zero) for m in range(q_order + 1)],
                      flags).p_shift(e)
    remainder = DiffOp(ctx, level, work[:d], flags)
    s_order = max(s_slots) if s_slots else -1
    tail = DiffOp(ctx, level,
                  [s_slots.get(m, zero) for m in range(s_order + 1)], flags)
    return DivisionResult(quotient, remainder, tail, flags)


def hensel_factor(h: DiffOp) -> HenselResult:
    """Factor H = Q P with Q a unit near the origin and P dominant of order
    nbar(H) carrying the dominant coefficient of H.

    Fixed point: starting from the top truncation of H, feed the division
    remainder back into P after dividing out the constant slot of Q.  The
    residual norm contracts by the sub-norm gap of Q each round.
    """
    if h.is_zero():
        raise ZeroOperator("cannot factor the zero operator")
    ctx = h.ctx
    hn, e = h.normalized()
    d = hn.nbar()
    flags = h.flags
    if hn.order() == d:
        # already dominant: unit factor is the identity
        return HenselResult(DiffOp.one(ctx, h.level), h, flags)
    p_cur = hn.truncate_order(d)
    floor = Mag.p_pow(-ctx.prec)
    last_best = None
    result = None
    for _ in range(2 * ctx.prec + 8):
        split = _LeadSplit(p_cur.coeffs[d])
        res = divide(hn, p_cur, _normalized=(p_cur, 0, d, split))
        rho = res.remainder + res.tail
        flags = flags | res.flags
        if rho.is_zero() or rho.norm_at_most(floor):
            result = res
            break
        rho_norm = rho.op_norm()
        if last_best is not None and not rho_norm < last_best:
            raise PrecisionExhausted(
                "factorization residual stalled above the floor; the "
                "dominant coefficient is not unit-reducible at the origin")
        last_best = rho_norm
        q0 = res.quotient.coeff(0)
        try:
            correction = rho.series_lmul(q0.invert()).truncate_order(d)
        except NotAUnit as exc:
            raise PrecisionExhausted(
                "quotient lost its unit shape during iteration") from exc
        p_cur = p_cur + correction
    if result is None:
        raise PrecisionExhausted("factorization did not converge")
    if not (result.remainder.is_zero() and result.tail.is_zero()):
        flags = flags | {FLAG_RESIDUAL}
    return HenselResult(result.quotient, p_cur.p_shift(-e), flags)


def simplicity_witness(h: DiffOp) -> SimplicityWitness:
    """Iterated brackets produce an invertible element of the two-sided
    ideal generated by H: apply [.,t] nbar(H) times, then [.,p^k d] nk(H)
    times."""
    if h.is_zero():
        raise ZeroOperator("witness of the zero operator")
    nb = h.nbar()
    nv = h.nk()
    w = h
    for _ in range(nb):
        w = w.bracket_t()
    for _ in range(nv):
        w = w.bracket_del()
    if w.is_zero() or w.nbar() != 0 or w.nk() != 0:
        raise PrecisionExhausted("bracket word did not certify invertibility")
    return SimplicityWitness(w, nb, nv)

"""Left ideals of the level-k algebra: exponents, staircases, division bases.

The exponent of a nonzero operator is the pair (nk, nbar).  The exponent
set of an ideal is upward closed, so it is determined by a finite antichain
of minimal exponents, its staircase.  A division basis is an echeloned
family of norm-1 operators whose exponents realize the inner corners of the
staircase.

The completion loop is a standard-basis procedure: cross-multiplied
combinations cancel matched lead monomials, reduce against the current
basis, and nonzero remainders (renormalized to norm 1, dividing out any
p-power the cancellation produced) enlarge the staircase.  Termination is
certified by the strictly shrinking co-area of the staircase inside the
working box together with the precision floor.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

from .dop import DiffOp
from .errors import (BoxTooSmall, CapExceeded, PrecisionExhausted, RangeError,
                     ZeroInput)
from .modp import row_reduce_box
from .scalar import Mag
from .tate import TateSeries

FLAG_FLOOR = "reduction_floor"


class Exponent(NamedTuple):
    """(valuation component, order component) = (nk, nbar)."""

    v: int
    d: int

    def __add__(self, other):
        return Exponent(self.v + other.v, self.d + other.d)

    def divides(self, other: "Exponent") -> bool:
        return self.v <= other.v and self.d <= other.d

    def lcm(self, other: "Exponent") -> "Exponent":
        return Exponent(max(self.v, other.v), max(self.d, other.d))


def exponent(p_op: DiffOp) -> Exponent:
    """Exponent of a nonzero operator at the origin."""
    return Exponent(p_op.nk(), p_op.nbar())


class Staircase:
    """Upward-closed subset of N^2 given by its minimal exponents."""

    __slots__ = ("minimals",)

    def __init__(self, points):
        pts = sorted(set(Exponent(*p) for p in points))
        mins = [e for e in pts
                if not any(o != e and o.divides(e) for o in pts)]
        self.minimals = tuple(sorted(mins))

    def contains(self, e: Exponent) -> bool:
        return any(m.divides(e) for m in self.minimals)

    def is_unit(self) -> bool:
        return self.contains(Exponent(0, 0))

    def d_min(self) -> int:
        return min(m.d for m in self.minimals)

    def v_min(self) -> int:
        return min(m.v for m in self.minimals)

    def co_area(self, box_v: int, box_d: int) -> int:
        """Number of lattice points of [0,box_v) x [0,box_d) off the region."""
        return sum(1 for v in range(box_v) for d in range(box_d)
                   if not self.contains(Exponent(v, d)))

    def ascii(self) -> str:
        """Rows are degrees (top down), columns valuations; '#' region,
        'o' minimal exponents."""
        if not self.minimals:
            return "(empty)"
        vmax = max(m.v for m in self.minimals) + 2
        dmax = max(m.d for m in self.minimals) + 2
        lines = []
        for d in range(dmax, -1, -1):
            row = []
            for v in range(vmax + 1):
                e = Exponent(v, d)
                if e in self.minimals:
                    row.append("o")
                elif self.contains(e):
                    row.append("#")
                else:
                    row.append(".")
            lines.append(f"{d:3d} | " + " ".join(row))
        lines.append("    +-" + "--" * (vmax + 1))
        lines.append("      " + " ".join(f"{v % 10}" for v in range(vmax + 1)))
        return "\n".join(lines)

    def __eq__(self, other):
        return isinstance(other, Staircase) and self.minimals == other.minimals

    __hash__ = None

    def __repr__(self):
        return f"Staircase({list(self.minimals)})"


@dataclass(frozen=True)
class UnitIdeal:
    """The ideal is the whole algebra: an exponent-(0,0) element was found."""

    witness: DiffOp


@dataclass(frozen=True)
class DivisionBasis:
    """Echeloned norm-1 generators P_1..P_r realizing the staircase corners."""

    ops: tuple
    staircase: Staircase
    level: int
    saturations: int = 0
    flags: frozenset = field(default_factory=frozenset)
    reducers: tuple = ()

    def membership_remainder(self, h: DiffOp) -> DiffOp:
        return normal_form(h, self)


class _Elem:
    """Basis element bookkeeping: norm-1 operator with cached lead data."""

    __slots__ = ("op", "exp", "alpha", "alive")

    def __init__(self, op: DiffOp):
        self.op = op
        d = op.nbar()
        coeff = op.coeffs[d]
        v = coeff.n_index()
        self.exp = Exponent(v, d)
        self.alpha = coeff.coeff(v)
        self.alive = True


def _lead_data(op: DiffOp):
    d = op.nbar()
    coeff = op.coeffs[d]
    v = coeff.n_index()
    return Exponent(v, d), coeff.coeff(v)


def _mono_times(ctx, level, c, dv: int, dd: int, op: DiffOp) -> DiffOp:
    """(c t^dv X^dd) . op for a scalar c."""
    coeff = TateSeries.t_power(ctx, dv, c)
    return DiffOp.monomial(ctx, level, coeff, dd) * op


def _reduce_full(h: DiffOp, elems, budget: int):
    """Full reduction of h: returns (remainder supported off the current
    exponent region, flags).  Each step cancels the lead monomial exactly."""
    ctx = h.ctx
    level = h.level
    rem = DiffOp.zero(ctx, level)
    flags = h.flags
    work = h
    steps = 0
    while not work.is_zero():
        if work.is_negligible():
            flags = flags | {FLAG_FLOOR}
            break
        steps += 1
        if steps > budget:
            raise CapExceeded("reduction exceeded the step budget")
        exp, alpha = _lead_data(work)
        red = None
        for el in elems:
            if el.alive and el.exp.divides(exp):
                red = el
                break
        if red is not None:
            c = alpha * red.alpha.invert()
            work = work - _mono_times(ctx, level, c, exp.v - red.exp.v,
                                      exp.d - red.exp.d, red.op)
        else:
            mono = DiffOp.monomial(ctx, level,
                                   TateSeries.t_power(ctx, exp.v, alpha), exp.d)
            rem = rem + mono
            work = work - mono
    return rem, flags


def _reduction_budget(ctx) -> int:
    return (ctx.prec + 4) * (ctx.opmax + 4) * 8 + (ctx.tdeg + 4) * (ctx.opmax + 4)


def normal_form(h: DiffOp, basis) -> DiffOp:
    """Remainder of h modulo a division basis; zero iff h lies in the ideal
    at the working precision."""
    if isinstance(basis, DivisionBasis):
        elems = [_Elem(op) for op in (basis.reducers or basis.ops)]
    else:
        elems = [_Elem(op) for op in basis]
    if h.is_zero():
        return h
    rem, flags = _reduce_full(h, elems, _reduction_budget(h.ctx))
    return DiffOp(h.ctx, h.level, rem.coeffs, rem.flags | flags)


def division_basis(gens, pair_budget: int = 600):
    """Standard-basis completion of a left ideal given by generators.

    Returns a DivisionBasis, or UnitIdeal when an exponent-(0,0) element
    turns up (the ideal is everything).
    """
    gens = [g for g in gens if not g.is_zero()]
    if not gens:
        raise ZeroInput("division basis needs a nonzero generator")
    ctx = gens[0].ctx
    level = gens[0].level
    for g in gens[1:]:
        gens[0]._check(g)
    flags = frozenset()
    saturations = 0
    budget = _reduction_budget(ctx)
    basis = []
    queue = deque()
    pairs = deque()

    for g in gens:
        if g.is_negligible():
            flags = flags | {FLAG_FLOOR}
            continue
        queue.append(g.normalized()[0])
    if not queue:
        raise PrecisionExhausted("all generators are below the floor")

    def insert(op_norm1: DiffOp):
        nonlocal flags, saturations
        el = _Elem(op_norm1)
        if el.exp == Exponent(0, 0):
            return el
        for other in basis:
            if other.alive:
                pairs.append((el, other))
        # interreduce: strictly larger exponents are now redundant
        for other in basis:
            if other.alive and el.exp.divides(other.exp):
                other.alive = False
                queue.append(other.op)
        basis.append(el)
        return None

    processed_pairs = 0
    unit_witness = None
    while queue or pairs:
        if queue:
            cand = queue.popleft()
            rem, fl = _reduce_full(cand, basis, budget)
            flags = flags | fl
            if rem.is_zero() or rem.is_negligible():
                continue
            norm = rem.op_norm()
            if norm != Mag.p_pow(0):
                saturations += 1
            unit_hit = insert(rem.p_shift(norm.log))
            if unit_hit is not None:
                unit_witness = unit_hit.op
                break
            continue
        a, b = pairs.popleft()
        if not (a.alive and b.alive):
            continue
        processed_pairs += 1
        if processed_pairs > pair_budget:
            raise CapExceeded("pair budget exhausted during completion")
        if a.exp.divides(b.exp) or b.exp.divides(a.exp):
            continue
        e = a.exp.lcm(b.exp)
        lhs = _mono_times(ctx, level, a.alpha.invert(), e.v - a.exp.v,
                          e.d - a.exp.d, a.op)
        rhs = _mono_times(ctx, level, b.alpha.invert(), e.v - b.exp.v,
                          e.d - b.exp.d, b.op)
        queue.append(lhs - rhs)

    if unit_witness is not None:
        return UnitIdeal(unit_witness)

    alive = [el for el in basis if el.alive]
    alive.sort(key=lambda el: (el.exp.d, el.exp.v))
    stair = Staircase([el.exp for el in alive])
    ops = _echelon_family(ctx, level, alive, stair)
    return DivisionBasis(ops=tuple(ops), staircase=stair, level=level,
                         saturations=saturations, flags=flags,
                         reducers=tuple(el.op for el in alive))


def _echelon_family(ctx, level, alive, stair: Staircase):
    """Orders d(I), d(I)+1, ... with weakly decreasing valuations down to
    v(I); multiplying a corner element by the derivation pads the order
    without changing the valuation."""
    d0 = stair.d_min()
    v_target = stair.v_min()
    ops = []
    delta = d0
    while True:
        best = None
        for el in alive:
            if el.exp.d <= delta and (best is None or el.exp.v < best.exp.v):
                best = el
        op = best.op
        if delta > best.exp.d:
            op = _mono_times(ctx, level, ctx.one(), 0, delta - best.exp.d, op)
        ops.append(op)
        if best.exp.v == v_target:
            break
        delta += 1
    return ops


def oracle_staircase(gens, box=(12, 12)) -> Staircase:
    """Independent mod-p staircase for levels k >= 1.

    Reduces the normalized generators modulo p into the commutative algebra
    F_p[[t]][xi], spans their monomial multiples inside the a < A, b < B
    box, and reads the achievable lead monomials off a GF(p) row reduction.
    """
    gens = [g for g in gens if not g.is_zero()]
    if not gens:
        raise ZeroInput("oracle needs a nonzero generator")
    ctx = gens[0].ctx
    level = gens[0].level
    if level < 1:
        raise RangeError("the mod-p oracle requires level >= 1 "
                         "(level 0 reduces to a noncommutative algebra)")
    a_box, b_box = box
    p = ctx.p
    rows = []
    for g in gens:
        gn, _ = g.normalized()
        poly = {}
        for b, series in enumerate(gn.coeffs):
            for a, r in enumerate(series.reduce_mod_p()):
                if r:
                    poly[(a, b)] = r
        if not poly:
            raise PrecisionExhausted("normalized generator vanished mod p")
        tdeg = max(a for a, _ in poly)
        xdeg = max(b for _, b in poly)
        if tdeg >= a_box or xdeg >= b_box:
            raise BoxTooSmall("generator does not fit inside the box")
        for da in range(a_box - tdeg):
            for db in range(b_box - xdeg):
                rows.append({(a + da, b + db): c for (a, b), c in poly.items()})
    columns = sorted(((v, d) for v in range(a_box) for d in range(b_box)),
                     key=lambda vd: (-vd[1], vd[0]))
    pivots = row_reduce_box(rows, columns, p)
    stair = Staircase(pivots)
    for m in stair.minimals:
        if m.v >= a_box - 1 or m.d >= b_box - 1:
            raise BoxTooSmall(
                f"minimal exponent {tuple(m)} touches the box boundary")
    return stair

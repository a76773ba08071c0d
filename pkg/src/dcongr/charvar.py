"""Characteristic cycles, holonomy, length bounds and connection rank for
cyclic quotients of the level-k algebra.

The cycle of D/I lives in the cotangent space of the special fiber.  Its
components are the zero section (horizontal, multiplicity d(I)), vertical
lines t = c (multiplicity = the valuation data of the ideal recentered at
c), or the full cotangent space when the ideal is zero.  A nonzero ideal
never produces a zero-dimensional cycle; the horizontal and vertical
multiplicities come from the staircase and from the factorization of the
reduced dominant coefficient of the minimal-order basis element.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dop import DiffOp
from .errors import BasisUnavailable, DcongrError
from .ideals import DivisionBasis, UnitIdeal, division_basis
from .modp import factor_poly, poly_str
from .weierstrass import hensel_factor

FULL = "FullCotangent"
PROPER = "ProperCycle"
EMPTY = "Empty"

FLAG_EXTENSION_POINT = "extension_point_convention"


class _NotAConnectionType:
    """Sentinel value: the module has a vertical component."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NotAConnection"

    def __bool__(self):
        return False


NOT_A_CONNECTION = _NotAConnectionType()


@dataclass(frozen=True, order=True)
class VerticalComponent:
    """Vertical line over a closed point of the special fiber."""

    degree: int
    point: str
    mult: int


@dataclass(frozen=True)
class CharCycle:
    kind: str
    horizontal: int = 0
    vertical: tuple = ()
    flags: frozenset = field(default_factory=frozenset)

    def total_multiplicity(self) -> int:
        return self.horizontal + sum(c.mult for c in self.vertical)

    def __add__(self, other: "CharCycle") -> "CharCycle":
        if FULL in (self.kind, other.kind):
            return CharCycle(FULL, flags=self.flags | other.flags)
        if self.kind == EMPTY:
            return CharCycle(other.kind, other.horizontal, other.vertical,
                             self.flags | other.flags)
        if other.kind == EMPTY:
            return CharCycle(self.kind, self.horizontal, self.vertical,
                             self.flags | other.flags)
        merged = {}
        for c in self.vertical + other.vertical:
            key = (c.degree, c.point)
            merged[key] = merged.get(key, 0) + c.mult
        vert = tuple(sorted(VerticalComponent(deg, pt, m)
                            for (deg, pt), m in merged.items()))
        return CharCycle(PROPER, self.horizontal + other.horizontal, vert,
                         self.flags | other.flags)

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "horizontal": self.horizontal,
            "vertical": [
                {"point": c.point, "degree": c.degree, "mult": c.mult}
                for c in self.vertical
            ],
        }


class CyclicQuotient:
    """D/I for the left ideal generated by gens at the given level."""

    __slots__ = ("gens", "level", "_basis")

    def __init__(self, gens, level=None):
        gens = tuple(gens)
        if level is None:
            if not gens:
                raise ValueError("need generators or an explicit level")
            level = gens[0].level
        self.gens = gens
        self.level = level
        self._basis = None

    def is_zero_ideal(self) -> bool:
        return all(g.is_zero() for g in self.gens)

    def basis(self):
        """Cached division basis (None for the zero ideal)."""
        if self.is_zero_ideal():
            return None
        if self._basis is None:
            try:
                self._basis = division_basis([g for g in self.gens
                                              if not g.is_zero()])
            except DcongrError as exc:
                raise BasisUnavailable(f"basis computation failed: {exc}") from exc
        return self._basis

    def summands(self):
        return (self,)


class DirectSum:
    """Finite direct sum of cyclic quotients (cycles take unions, with
    multiplicities adding)."""

    __slots__ = ("parts",)

    def __init__(self, parts):
        self.parts = tuple(parts)
        if not self.parts:
            raise ValueError("direct sum needs at least one summand")

    def summands(self):
        return self.parts


def _vertical_components(quot: CyclicQuotient, basis: DivisionBasis):
    """Vertical cycle data for a nonzero, non-unit ideal."""
    ctx = quot.gens[0].ctx
    p = ctx.p
    flags = set()
    components = []
    v0 = basis.staircase.v_min()
    if v0 > 0:
        components.append(VerticalComponent(1, "0", v0))
    lead = basis.ops[0].dominant_coeff()  # norm 1: basis ops are normalized
    _, factors = factor_poly(lead.reduce_mod_p(), p)
    multi_gen = len(basis.reducers) > 1
    for poly, mult in factors:
        if len(poly) == 2 and poly[0] == 0:
            continue  # the t-factor: origin already counted from the staircase
        if len(poly) == 2:
            c = (-poly[0]) % p
            recentered = [g.translate(ctx.scalar(c)) for g in quot.gens
                          if not g.is_zero()]
            sub = division_basis(recentered)
            if isinstance(sub, UnitIdeal):
                continue
            vc = sub.staircase.v_min()
            if vc > 0:
                components.append(VerticalComponent(1, str(c), vc))
        else:
            # closed point of degree > 1: counted through the factorization
            # of the reduced lead (flagged convention, exact for principal)
            flags.add(FLAG_EXTENSION_POINT)
            if multi_gen:
                flags.add("multi_generator_extension_point")
            components.append(
                VerticalComponent(len(poly) - 1, poly_str(poly), mult))
    return tuple(sorted(components)), frozenset(flags)


def _cycle_of_quotient(quot: CyclicQuotient) -> CharCycle:
    if quot.is_zero_ideal():
        return CharCycle(FULL)
    basis = quot.basis()
    if isinstance(basis, UnitIdeal):
        return CharCycle(EMPTY)
    d = basis.staircase.d_min()
    vertical, flags = _vertical_components(quot, basis)
    cycle = CharCycle(PROPER, d, vertical, flags)
    if cycle.total_multiplicity() == 0:
        raise BasisUnavailable(
            "zero-dimensional cycle from a nonzero proper ideal; "
            "this contradicts the dimension bound")
    return cycle


def char_cycle(module) -> CharCycle:
    """Characteristic cycle of a cyclic quotient or a direct sum."""
    total = None
    for part in module.summands():
        c = _cycle_of_quotient(part)
        total = c if total is None else total + c
    return total


def is_holonomic(module) -> bool:
    """No summand has the full cotangent space as its cycle."""
    return all(not part.is_zero_ideal() for part in module.summands())


def length_bound(module) -> int:
    """Finite-length bound: the sum of all multiplicities."""
    cycle = char_cycle(module)
    if cycle.kind == FULL:
        raise ValueError("module is not holonomic: no finite length bound")
    return cycle.total_multiplicity()


def connection_rank(module):
    """Rank of a holonomic module that is finite free over functions.

    Returns the rank (= horizontal multiplicity) when the cycle has no
    vertical component, certifying a monic finite presentation of that
    order through Hensel factorization; NOT_A_CONNECTION otherwise.
    """
    cycle = char_cycle(module)
    if cycle.kind == FULL:
        return NOT_A_CONNECTION
    if cycle.vertical:
        return NOT_A_CONNECTION
    if cycle.kind == EMPTY:
        return 0
    rank = 0
    for part in module.summands():
        basis = part.basis()
        if isinstance(basis, UnitIdeal):
            continue
        monic = connection_presentation(part)
        rank += monic.order()
    assert rank == cycle.horizontal
    return rank


def connection_presentation(quot: CyclicQuotient) -> DiffOp:
    """Monic finite operator presenting a connection summand."""
    basis = quot.basis()
    if not isinstance(basis, DivisionBasis) or len(basis.reducers) != 1:
        raise BasisUnavailable("connection certification needs a principal basis")
    p1 = basis.reducers[0]
    fact = hensel_factor(p1)
    dom = fact.dominant
    lead = dom.coeffs[dom.order()]
    monic = dom.series_lmul(lead.invert())
    return monic

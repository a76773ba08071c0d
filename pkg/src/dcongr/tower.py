"""Per-level analysis across the projective limit of the level-k algebras.

A tower element is either a finite operator (stored at level 0 and
re-expressed at each level) or a truncated product family of factors
(1 - p^e_n d).  The profile k -> nbar_k is non-decreasing; it stabilizes
exactly at the order for finite operators, so a plateau at the horizon
classifies the element.  The multiplicity m of the tower is the stationary
value of the per-level total multiplicities; it is evaluated at a finite
horizon and never extrapolated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .charvar import CyclicQuotient, char_cycle
from .dop import DiffOp
from .errors import HorizonInconclusive, RangeError, TruncationInsufficient
from .ideals import UnitIdeal, division_basis
from .scalar import Context
from .tate import TateSeries

DEFAULT_GUARD = 3


class FiniteOp:
    """A finite-order element of every level's algebra, stored at level 0."""

    __slots__ = ("op", "guard")

    def __init__(self, op: DiffOp, guard: int = DEFAULT_GUARD):
        if op.level != 0:
            op = op.rescale_level(0)
        self.op = op
        self.guard = guard

    @property
    def ctx(self) -> Context:
        return self.op.ctx

    def realize(self, level: int) -> DiffOp:
        return self.op.rescale_level(level)

    def max_level(self) -> int:
        return 10 ** 9  # a finite operator realizes at every level


class ProductFamily:
    """Truncated product of factors (1 - p^e_n d), n = 1..depth.

    Level-k data computed from the truncation at depth >= k + guard is
    exact: the omitted factors are norm-1 units at level k whose deviation
    from 1 sits below the working scale.
    """

    __slots__ = ("ctx", "exponents", "guard", "_cache")

    def __init__(self, ctx: Context, exponents, guard: int = DEFAULT_GUARD):
        self.ctx = ctx
        self.exponents = tuple(exponents)
        self.guard = guard
        self._cache = {}

    @classmethod
    def geometric(cls, ctx: Context, depth: int, guard: int = DEFAULT_GUARD):
        """The standard family with e_n = n."""
        return cls(ctx, range(1, depth + 1), guard=guard)

    def depth(self) -> int:
        return len(self.exponents)

    def max_level(self) -> int:
        return self.depth() - self.guard

    def prefix(self, level: int, count: int) -> DiffOp:
        """Product of the first `count` factors, built at the given level."""
        if count > self.depth():
            raise TruncationInsufficient(
                f"family truncated at depth {self.depth()}, need {count}")
        key = (level, count)
        got = self._cache.get(key)
        if got is not None:
            return got
        ctx = self.ctx
        out = DiffOp.one(ctx, level)
        for e in self.exponents[:count]:
            coeff = TateSeries.constant(ctx, ctx.scalar(1).p_shift(e - level))
            out = out * (DiffOp.one(ctx, level) - DiffOp.monomial(ctx, level, coeff, 1))
        self._cache[key] = out
        return out

    def realize(self, level: int) -> DiffOp:
        if self.depth() < level + self.guard:
            raise TruncationInsufficient(
                f"depth {self.depth()} < level {level} + guard {self.guard}")
        return self.prefix(level, self.depth())


@dataclass(frozen=True)
class NbarProfile:
    values: tuple
    classification: str  # "finite-order" | "growing-at-horizon" | "inconclusive"
    order: int | None
    k_max: int


@dataclass(frozen=True)
class TowerReport:
    rows: tuple  # (k, nbar_k, log_p norm, m_k)
    k_holonomic: int | None
    multiplicity: int | None
    member: bool
    horizon: int
    reason: str = ""
    flags: frozenset = field(default_factory=frozenset)

    def to_json_dict(self) -> dict:
        return {
            "rows": [{"k": k, "nbar": nb, "log_p_norm": ln, "m_k": mk}
                     for (k, nb, ln, mk) in self.rows],
            "k_M": self.k_holonomic,
            "m": self.multiplicity,
            "member": self.member,
            "horizon": self.horizon,
            "reason": self.reason,
        }


def nbar_profile(element, k_max: int) -> NbarProfile:
    """(nbar_k)_{k <= k_max} plus the stationarity classification."""
    guard = element.guard
    if k_max > element.max_level():
        raise TruncationInsufficient(
            f"profile horizon {k_max} beyond realizable level "
            f"{element.max_level()}")
    values = []
    for k in range(k_max + 1):
        values.append(element.realize(k).nbar())
    for a, b in zip(values, values[1:]):
        assert a <= b, "nbar profile must be non-decreasing"
    plateau = 1
    for i in range(len(values) - 1, 0, -1):
        if values[i] == values[i - 1]:
            plateau += 1
        else:
            break
    if plateau >= min(guard, len(values)):
        cls_, order = "finite-order", values[-1]
    elif values[-1] > values[-2] if len(values) >= 2 else False:
        cls_, order = "growing-at-horizon", None
    else:
        cls_, order = "inconclusive", None
    return NbarProfile(tuple(values), cls_, order, k_max)


def _level_multiplicity(h: DiffOp) -> int:
    """Total multiplicity of D/(h) at level h.level; 0 for a unit."""
    basis = division_basis([h])
    if isinstance(basis, UnitIdeal):
        return 0
    return char_cycle(CyclicQuotient((h,), h.level)).total_multiplicity()


def tower_report(element, k_max: int) -> TowerReport:
    """Per-level invariants, the stationary multiplicity and membership in
    the finite-length class, evaluated at the given horizon."""
    profile = nbar_profile(element, k_max)
    guard = element.guard
    rows = []
    mults = []
    for k in range(k_max + 1):
        h = element.realize(k)
        m_k = _level_multiplicity(h)
        rows.append((k, profile.values[k], h.op_norm().log, m_k))
        mults.append(m_k)
    k_holo = 0  # nonzero principal quotients are holonomic at every level
    window = mults[-min(guard, len(mults)):]
    finite_order = profile.classification == "finite-order"
    flags = frozenset()
    if all(m == window[0] for m in window):
        mult = window[-1]
        member = finite_order
        reason = "" if member else "order still growing at horizon"
        return TowerReport(tuple(rows), k_holo, mult, member, k_max, reason, flags)
    if all(a < b for a, b in zip(window, window[1:])):
        return TowerReport(tuple(rows), k_holo, None, False, k_max,
                           "multiplicity unbounded at horizon", flags)
    raise HorizonInconclusive(
        f"multiplicities {mults} not stationary within the last "
        f"{len(window)} levels at horizon {k_max}")


@dataclass(frozen=True)
class NormSuite:
    prime: int
    norm_rows: tuple  # (k, log_p of ||P_k||_k)
    diff_rows: tuple  # (m, k, log_p of ||P - P_k||_m)

    def to_json_dict(self) -> dict:
        return {
            "prime": self.prime,
            "norm_rows": [{"k": k, "log_p": e} for (k, e) in self.norm_rows],
            "diff_rows": [{"m": m, "k": k, "log_p": e}
                          for (m, k, e) in self.diff_rows],
        }


def level_norm_suite(family: ProductFamily, k_range, m_range) -> NormSuite:
    """Exact norm table for a product family.

    The level-k partial product P_k is the product of the factors below
    index k (so P_0 = P_1 = 1); its norm is measured at level k, and the
    difference P - P_k at each level m < k.
    """
    k_range = list(k_range)
    m_range = list(m_range)
    if not k_range:
        raise RangeError("empty level range")
    need = max(k_range) + family.guard
    if family.depth() < need:
        raise TruncationInsufficient(
            f"family depth {family.depth()} < {need} required by the range")
    norm_rows = []
    for k in k_range:
        pk = family.prefix(k, max(k - 1, 0))
        norm_rows.append((k, pk.op_norm().log))
    diff_rows = []
    for m in m_range:
        for k in k_range:
            if k < m + 1:
                continue
            full = family.prefix(m, family.depth())
            pk = family.prefix(m, max(k - 1, 0))
            diff = full - pk
            diff_rows.append((m, k, diff.op_norm().log))
    if not diff_rows and m_range:
        raise RangeError(
            "difference panel needs some k >= m + 1 in the requested ranges")
    return NormSuite(family.ctx.p, tuple(norm_rows), tuple(diff_rows))


def units_check(element, k_max: int) -> bool:
    """Necessary-condition check against the units of the projective limit:
    the profile must vanish identically up to the horizon and the constant
    coefficient must be a unit function.  Horizon-bounded."""
    profile = nbar_profile(element, k_max)
    if any(v != 0 for v in profile.values):
        return False
    h0 = element.realize(0)
    if h0.is_zero():
        return False
    a0 = h0.coeff(0)
    return (not a0.is_zero()) and a0.n_index() == 0

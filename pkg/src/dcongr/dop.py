"""Level-k differential operators on the unit disk.

An operator is stored as coefficients a_0..a_d of powers of the scaled
derivation p^k*d/dt, with d <= opmax.  The norm takes the max of the
coefficient Gauss norms; nbar is the largest slot attaining it and nk the
dominant index of that slot's coefficient.  Multiplication follows the
Leibniz expansion

    (p^k d)^i . b = sum_l C(i,l) p^(k l) b^(l) (p^k d)^(i-l),

which makes the norm multiplicative and nbar/nk additive.
"""

from __future__ import annotations

from .errors import (LevelMismatch, NormOverflow, NotAUnit, NotInvertible,
                     PrecisionExhausted, ZeroOperator)
from .scalar import Context, Mag, PadicScalar
from .tate import TateSeries

FLAG_ORDER_CAP = "order_cap"

_NO_FLAGS = frozenset()


class DiffOp:
    """Sum a_n (p^k d/dt)^n with TateSeries coefficients, order <= opmax."""

    __slots__ = ("ctx", "level", "coeffs", "flags")

    def __init__(self, ctx: Context, level: int, coeffs, flags=_NO_FLAGS):
        if level < 0:
            raise ValueError("congruence level must be >= 0")
        self.ctx = ctx
        self.level = level
        flags = frozenset(flags)
        cs = [c if isinstance(c, TateSeries) else TateSeries.constant(ctx, c)
              for c in coeffs]
        if len(cs) > ctx.opmax + 1:
            if any(not c.is_negligible() for c in cs[ctx.opmax + 1:]):
                flags = flags | {FLAG_ORDER_CAP}
            cs = cs[: ctx.opmax + 1]
        for c in cs:
            flags = flags | c.flags
        while cs and cs[-1].is_zero():
            cs.pop()
        self.coeffs = tuple(cs)
        self.flags = flags

    # -- factories ----------------------------------------------------------

    @classmethod
    def zero(cls, ctx: Context, level: int) -> "DiffOp":
        return cls(ctx, level, ())

    @classmethod
    def one(cls, ctx: Context, level: int) -> "DiffOp":
        return cls(ctx, level, (TateSeries.one(ctx),))

    @classmethod
    def from_series(cls, ctx: Context, level: int, f: TateSeries) -> "DiffOp":
        return cls(ctx, level, (f,))

    @classmethod
    def monomial(cls, ctx: Context, level: int, coeff: TateSeries, slot: int) -> "DiffOp":
        zero = TateSeries.zero(ctx)
        return cls(ctx, level, (zero,) * slot + (coeff,))

    @classmethod
    def derivation(cls, ctx: Context, level: int) -> "DiffOp":
        """The plain derivation d/dt expressed in the level-k basis: p^-k (p^k d)."""
        one = TateSeries.constant(ctx, ctx.scalar(1).p_shift(-level))
        return cls.monomial(ctx, level, one, 1)

    @classmethod
    def scaled_derivation(cls, ctx: Context, level: int) -> "DiffOp":
        """The level generator p^k d itself."""
        return cls.monomial(ctx, level, TateSeries.one(ctx), 1)

    # -- basic queries --------------------------------------------------------

    def order(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, n: int) -> TateSeries:
        if 0 <= n < len(self.coeffs):
            return self.coeffs[n]
        return TateSeries.zero(self.ctx)

    def op_norm(self) -> Mag:
        """max_n gauss_norm(a_n); Mag.zero() iff the operator is 0."""
        best = Mag.zero()
        for c in self.coeffs:
            m = c.gauss_norm()
            if m > best:
                best = m
        return best

    def nbar(self) -> int:
        """Largest slot whose coefficient attains the operator norm."""
        if self.is_zero():
            raise ZeroOperator("nbar of the zero operator")
        norm = self.op_norm()
        for n in range(len(self.coeffs) - 1, -1, -1):
            if self.coeffs[n].gauss_norm() == norm:
                return n
        raise PrecisionExhausted("no slot certifies the operator norm")

    def nk(self) -> int:
        """Dominant index of the nbar coefficient."""
        return self.coeffs[self.nbar()].n_index()

    def dominant_coeff(self) -> TateSeries:
        return self.coeffs[self.nbar()]

    def is_integral(self) -> bool:
        """Lies in the integral model: norm <= 1."""
        return self.is_zero() or self.op_norm() <= Mag.p_pow(0)

    def norm_at_most(self, bound: Mag) -> bool:
        """Certified op_norm <= bound (coefficients lost below the floor count
        toward their bound)."""
        return all(c.norm_at_most(bound) for c in self.coeffs)

    def is_negligible(self) -> bool:
        return self.norm_at_most(Mag.p_pow(-self.ctx.prec))

    # -- ring structure ----------------------------------------------------------

    def _check(self, other: "DiffOp"):
        if self.ctx is not other.ctx and not self.ctx.same(other.ctx):
            raise ValueError("operators from different contexts")
        if self.level != other.level:
            raise LevelMismatch(
                f"levels differ: {self.level} vs {other.level}; rescale first")

    def __add__(self, other: "DiffOp") -> "DiffOp":
        self._check(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return DiffOp(self.ctx, self.level, out, self.flags | other.flags)

    def __neg__(self) -> "DiffOp":
        return DiffOp(self.ctx, self.level, [-c for c in self.coeffs], self.flags)

    def __sub__(self, other: "DiffOp") -> "DiffOp":
        return self + (-other)

    def __mul__(self, other: "DiffOp") -> "DiffOp":
        """Product via the Leibniz double sum.

        Slot u of the product is
            sum_{l >= 0, 0 <= j <= u} C(u+l-j, l) a_{u+l-j} p^(k l) b_j^(l).
        """
        self._check(other)
        ctx = self.ctx
        k = self.level
        if self.is_zero() or other.is_zero():
            return DiffOp.zero(ctx, self.level)
        da, db = self.order(), other.order()
        flags = self.flags | other.flags
        nout = da + db + 1
        out = [TateSeries.zero(ctx) for _ in range(min(nout, ctx.opmax + 1))]
        if nout > ctx.opmax + 1:
            flags = flags | {FLAG_ORDER_CAP}
        for j, bj in enumerate(other.coeffs):
            if bj.is_zero():
                continue
            # successive scaled derivatives p^(k l) b_j^(l)
            dl = bj
            for ell in range(0, da + 1):
                if ell > 0:
                    dl = dl.derivative().p_shift(k)
                    if dl.is_zero():
                        break
                for i in range(ell, da + 1):
                    ai = self.coeffs[i]
                    if ai.is_zero():
                        continue
                    u = i + j - ell
                    if u >= len(out):
                        continue
                    term = ai * dl
                    if ell > 0:
                        term = term.scalar_mul(ctx.scalar(_binom(i, ell)))
                    out[u] = out[u] + term
        return DiffOp(ctx, self.level, out, flags)

    def scalar_mul(self, c) -> "DiffOp":
        c = self.ctx.scalar(c)
        return DiffOp(self.ctx, self.level, [f.scalar_mul(c) for f in self.coeffs],
                      self.flags)

    def series_lmul(self, f: TateSeries) -> "DiffOp":
        """Left multiplication by a function (coefficientwise)."""
        return DiffOp(self.ctx, self.level, [f * c for c in self.coeffs],
                      self.flags | f.flags)

    def p_shift(self, e: int) -> "DiffOp":
        return DiffOp(self.ctx, self.level, [c.p_shift(e) for c in self.coeffs],
                      self.flags)

    def apply(self, f: TateSeries) -> TateSeries:
        """Action on a function: sum a_n p^(k n) f^(n)."""
        ctx = self.ctx
        out = TateSeries.zero(ctx)
        df = f
        for n, an in enumerate(self.coeffs):
            if n > 0:
                df = df.derivative().p_shift(self.level)
            if not an.is_zero():
                out = out + an * df
        return out

    # -- level changes and frame changes -------------------------------------------

    def rescale_level(self, k_target: int) -> "DiffOp":
        """Re-express in the (p^k_target d)-basis: a_n -> a_n p^(n(k - k_target))."""
        if k_target < 0:
            raise ValueError("congruence level must be >= 0")
        if k_target == self.level:
            return self
        shift = self.level - k_target
        out = [c.p_shift(n * shift) for n, c in enumerate(self.coeffs)]
        op = DiffOp(self.ctx, k_target, out, self.flags)
        if not op.is_zero():
            for c in op.coeffs:
                for x in c.coeffs:
                    if not x.is_zero() and not x.is_floor() \
                            and x.valuation() < -self.ctx.prec:
                        raise NormOverflow(
                            f"rescaled norm exceeds p^{self.ctx.prec}")
        return op

    def bracket_t(self) -> "DiffOp":
        """[H, t] = p^k sum_i i a_i (p^k d)^(i-1) in closed form."""
        ctx = self.ctx
        out = []
        for i in range(1, len(self.coeffs)):
            out.append(self.coeffs[i].scalar_mul(ctx.scalar(i)).p_shift(self.level))
        return DiffOp(ctx, self.level, out, self.flags)

    def bracket_del(self) -> "DiffOp":
        """[H, p^k d] = -p^k sum_i a_i' (p^k d)^i in closed form."""
        out = [(-c.derivative()).p_shift(self.level) for c in self.coeffs]
        return DiffOp(self.ctx, self.level, out, self.flags)

    def invert(self) -> "DiffOp":
        """Neumann-series inverse, valid iff nbar = nk = 0.

        H = a_0 (1 + M) with ||M|| < 1, so H^-1 = sum_i (-M)^i a_0^-1,
        truncated at order opmax and below the precision floor.
        """
        if self.is_zero():
            raise NotInvertible("zero operator")
        if self.nbar() != 0 or self.nk() != 0:
            raise NotInvertible(
                "invertible near the origin iff nbar = nk = 0")
        ctx = self.ctx
        a0 = self.coeffs[0]
        try:
            inv0 = a0.invert()
        except NotAUnit as exc:
            raise NotInvertible("constant coefficient is not a unit") from exc
        if self.order() == 0:
            return DiffOp(ctx, self.level, (inv0,), self.flags)
        m_coeffs = [TateSeries.zero(ctx)]
        for j in range(1, len(self.coeffs)):
            m_coeffs.append(inv0 * self.coeffs[j])
        m_op = DiffOp(ctx, self.level, m_coeffs, self.flags)
        if m_op.is_zero():
            return DiffOp(ctx, self.level, (inv0,), self.flags)
        mnorm = m_op.op_norm()
        if not mnorm < Mag.p_pow(0):
            raise PrecisionExhausted("Neumann remainder is not a contraction")
        step = -mnorm.log  # >= 1
        terms = ctx.prec // step + 2
        unit = DiffOp(ctx, self.level, (inv0,), self.flags)
        g = unit
        for _ in range(terms):
            g = unit - m_op * g
            g = g.prune()
        return g

    def prune(self) -> "DiffOp":
        """Drop slots that are certified negligible (keeps flags)."""
        out = [TateSeries.zero(self.ctx) if c.is_negligible() else c
               for c in self.coeffs]
        return DiffOp(self.ctx, self.level, out, self.flags)

    def rebase_derivation(self, u: TateSeries) -> "DiffOp":
        """Re-express in powers of p^k(u d) for a norm-1 unit u.

        Returns the coefficient family g with sum g_n (p^k u d)^n = H; the
        norm, nbar and nk are unchanged.  Inverse direction:
        expand_derivation.
        """
        uinv = _rebase_unit_check(u)
        ctx = self.ctx
        d = self.order()
        if d < 0:
            return self
        exp = _frame_powers(ctx, self.level, u, d)
        work = list(self.coeffs)
        g = [TateSeries.zero(ctx)] * (d + 1)
        upow_inv = [TateSeries.one(ctx)]
        for _ in range(d):
            upow_inv.append(upow_inv[-1] * uinv)
        for n in range(d, -1, -1):
            gn = work[n] * upow_inv[n]
            g[n] = gn
            if not gn.is_zero():
                for m in range(n + 1):
                    work[m] = work[m] - gn * exp[n][m]
        return DiffOp(ctx, self.level, g, self.flags | u.flags)

    def expand_derivation(self, u: TateSeries) -> "DiffOp":
        """Inverse of rebase_derivation: evaluate sum a_n (p^k u d)^n."""
        _rebase_unit_check(u)
        ctx = self.ctx
        d = self.order()
        if d < 0:
            return self
        exp = _frame_powers(ctx, self.level, u, d)
        out = [TateSeries.zero(ctx) for _ in range(d + 1)]
        for n, an in enumerate(self.coeffs):
            if an.is_zero():
                continue
            for m in range(n + 1):
                out[m] = out[m] + an * exp[n][m]
        return DiffOp(ctx, self.level, out, self.flags | u.flags)

    def translate(self, c) -> "DiffOp":
        """Recenter t -> t + c for c in Z_p (the derivation is unchanged)."""
        c = self.ctx.scalar(c)
        return DiffOp(self.ctx, self.level,
                      [f.translate(c) for f in self.coeffs], self.flags)

    # -- normalization ---------------------------------------------------------------

    def normalized(self):
        """(N, e) with N = p^e * self of norm 1, i.e. self = p^-e * N.

        |p^e| = p^-e, so e is the base-p log of the original norm.
        """
        if self.is_zero():
            raise ZeroOperator("cannot normalize the zero operator")
        e = self.op_norm().log
        return self.p_shift(e), e

    def truncate_order(self, d: int) -> "DiffOp":
        return DiffOp(self.ctx, self.level, self.coeffs[: d + 1], self.flags)

    # -- comparisons --------------------------------------------------------------------

    def eq_mod_prec(self, other: "DiffOp") -> bool:
        return (self - other).is_negligible()

    def __eq__(self, other):
        if not isinstance(other, DiffOp):
            return NotImplemented
        return (self.level == other.level
                and len(self.coeffs) == len(other.coeffs)
                and all(a == b for a, b in zip(self.coeffs, other.coeffs)))

    __hash__ = None

    def __repr__(self):
        if self.is_zero():
            return "0"
        gen = f"(p^{self.level}*D)" if self.level else "D"
        parts = []
        for n, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            if n == 0:
                parts.append(f"[{c!r}]")
            elif n == 1:
                parts.append(f"[{c!r}]*{gen}")
            else:
                parts.append(f"[{c!r}]*{gen}^{n}")
        return " + ".join(parts)


def _binom(n: int, k: int) -> int:
    if k < 0 or k > n:
        return 0
    out = 1
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out


def _rebase_unit_check(u: TateSeries) -> TateSeries:
    if u.is_zero() or u.gauss_norm() != Mag.p_pow(0) or u.n_index() != 0:
        raise NotAUnit("frame change requires a norm-1 unit")
    return u.invert()


def _frame_powers(ctx: Context, level: int, u: TateSeries, d: int):
    """exp[n][m]: coefficient of (p^k d)^m in (p^k u d)^n, for n <= d.

    Recurrence: (u X).(c X^m) = u c X^(m+1) + p^k u c' X^m with X = p^k d.
    """
    exp = [[TateSeries.one(ctx)]]
    for n in range(1, d + 1):
        prev = exp[-1]
        cur = [TateSeries.zero(ctx) for _ in range(n + 1)]
        for m, c in enumerate(prev):
            if c.is_zero():
                continue
            cur[m + 1] = cur[m + 1] + u * c
            cur[m] = cur[m] + (u * c.derivative()).p_shift(level)
        exp.append(cur)
    return exp


# -- spec-named entry points -----------------------------------------------------------

def op_norm(h: DiffOp) -> Mag:
    return h.op_norm()


def nbar(h: DiffOp) -> int:
    return h.nbar()


def nk(h: DiffOp) -> int:
    return h.nk()


def op_mul(h: DiffOp, q: DiffOp) -> DiffOp:
    return h * q


def rescale_level(h: DiffOp, k_target: int) -> DiffOp:
    return h.rescale_level(k_target)


def bracket_t(h: DiffOp) -> DiffOp:
    return h.bracket_t()


def bracket_del(h: DiffOp) -> DiffOp:
    return h.bracket_del()


def op_invert(h: DiffOp) -> DiffOp:
    return h.invert()


def rebase_derivation(h: DiffOp, u: TateSeries) -> DiffOp:
    return h.rebase_derivation(u)

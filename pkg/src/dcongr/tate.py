"""Truncated Tate series over Q_p: Gauss norm, dominant index, units.

A series is a polynomial in t of degree <= tdeg; all arithmetic is read
modulo (t^(tdeg+1), the p^-prec magnitude floor).  The same representation
doubles as the local model at the origin: the dominant index n_index is the
t-adic valuation of the mod-p reduction when the Gauss norm is 1.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import NotAUnit, PrecisionExhausted, ZeroInput
from .scalar import Context, Mag, PadicScalar

FLAG_FLOOR_DROP = "floor_drop"
FLAG_TDEG_CAP = "tdeg_cap"

_NO_FLAGS = frozenset()


class TateSeries:
    """Element of K<t> stored as coefficients c_0..c_d, d <= tdeg."""

    __slots__ = ("ctx", "coeffs", "flags")

    def __init__(self, ctx: Context, coeffs, flags=_NO_FLAGS):
        self.ctx = ctx
        flags = frozenset(flags)
        cs = [c if isinstance(c, PadicScalar) else ctx.scalar(c) for c in coeffs]
        if len(cs) > ctx.tdeg + 1:
            if any(not c.is_negligible() for c in cs[ctx.tdeg + 1:]):
                flags = flags | {FLAG_TDEG_CAP}
            cs = cs[: ctx.tdeg + 1]
        zero = None
        out = []
        for c in cs:
            if c.is_zero():
                out.append(c)
            elif c.is_negligible():
                if zero is None:
                    zero = ctx.zero()
                out.append(zero)
                flags = flags | {FLAG_FLOOR_DROP}
            else:
                out.append(c)
        while out and out[-1].is_zero():
            out.pop()
        self.coeffs = tuple(out)
        self.flags = flags

    # -- factories -------------------------------------------------------------

    @classmethod
    def zero(cls, ctx: Context) -> "TateSeries":
        return cls(ctx, ())

    @classmethod
    def one(cls, ctx: Context) -> "TateSeries":
        return cls(ctx, (ctx.one(),))

    @classmethod
    def constant(cls, ctx: Context, c) -> "TateSeries":
        return cls(ctx, (ctx.scalar(c),))

    @classmethod
    def t_power(cls, ctx: Context, i: int, c=1) -> "TateSeries":
        return cls(ctx, (ctx.zero(),) * i + (ctx.scalar(c),))

    @classmethod
    def from_list(cls, ctx: Context, values) -> "TateSeries":
        return cls(ctx, [ctx.scalar(v) for v in values])

    # -- basic queries -----------------------------------------------------------

    def degree(self) -> int:
        """Degree of the stored polynomial; -1 for the zero series."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, i: int) -> PadicScalar:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return self.ctx.zero()

    def gauss_norm(self) -> Mag:
        """max_i |c_i| over stored coefficients; Mag.zero() iff the series is 0.

        Raises PrecisionExhausted when a coefficient lost below the floor
        could formally exceed every certified magnitude.
        """
        best = Mag.zero()
        floor_bound = Mag.zero()
        for c in self.coeffs:
            if c.is_zero():
                continue
            if c.is_floor():
                b = c.magnitude_bound()
                if b > floor_bound:
                    floor_bound = b
                continue
            m = c.magnitude()
            if m > best:
                best = m
        if floor_bound > best:
            raise PrecisionExhausted(
                "Gauss norm not certified: an uncertified coefficient dominates")
        return best

    def n_index(self) -> int:
        """Least index attaining the Gauss norm.

        For a norm-1 series this is the t-adic valuation of the mod-p
        reduction.
        """
        if self.is_zero():
            raise ZeroInput("n_index of the zero series")
        norm = self.gauss_norm()
        for i, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            if c.is_floor():
                if c.magnitude_bound() >= norm:
                    raise PrecisionExhausted(
                        "n_index not certified: an uncertified coefficient "
                        "may attain the norm first")
                continue
            if c.magnitude() == norm:
                return i
        raise PrecisionExhausted("no coefficient certifies the Gauss norm")

    def is_unit(self) -> bool:
        """Unit of the disk algebra: nonzero with n_index 0."""
        return bool(self.coeffs) and not self.coeffs[0].is_zero() \
            and self.n_index() == 0

    def norm_at_most(self, bound: Mag) -> bool:
        """Certified gauss_norm <= bound (floor drops count toward the bound)."""
        floor = Mag.p_pow(-self.ctx.prec)
        if FLAG_FLOOR_DROP in self.flags and floor > bound:
            return False
        for c in self.coeffs:
            if c.magnitude_bound() > bound:
                return False
        return True

    def is_negligible(self) -> bool:
        return self.norm_at_most(Mag.p_pow(-self.ctx.prec))

    def reduce_mod_p(self) -> list:
        """Residue coefficients in F_p.  Requires all valuations >= 0."""
        return [c.residue() for c in self.coeffs]

    # -- arithmetic -----------------------------------------------------------------

    def _check(self, other: "TateSeries"):
        if self.ctx is not other.ctx and not self.ctx.same(other.ctx):
            raise ValueError("series from different contexts")

    def __add__(self, other: "TateSeries") -> "TateSeries":
        self._check(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return TateSeries(self.ctx, out, self.flags | other.flags)

    def __neg__(self) -> "TateSeries":
        return TateSeries(self.ctx, [-c for c in self.coeffs], self.flags)

    def __sub__(self, other: "TateSeries") -> "TateSeries":
        return self + (-other)

    def __mul__(self, other: "TateSeries") -> "TateSeries":
        self._check(other)
        ctx = self.ctx
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return TateSeries.zero(ctx)
        n = min(len(a) + len(b) - 1, ctx.tdeg + 1)
        flags = self.flags | other.flags
        if len(a) + len(b) - 1 > ctx.tdeg + 1:
            flags = flags | {FLAG_TDEG_CAP}
        out = [None] * n
        for i, ca in enumerate(a):
            if ca.is_zero():
                continue
            jmax = min(len(b), n - i)
            for j in range(jmax):
                cb = b[j]
                if cb.is_zero():
                    continue
                term = ca * cb
                k = i + j
                out[k] = term if out[k] is None else out[k] + term
        zero = ctx.zero()
        return TateSeries(ctx, [zero if c is None else c for c in out], flags)

    def scalar_mul(self, c: PadicScalar) -> "TateSeries":
        c = self.ctx.scalar(c)
        return TateSeries(self.ctx, [c * x for x in self.coeffs], self.flags)

    def p_shift(self, e: int) -> "TateSeries":
        """Multiply every coefficient by p^e (exact rescaling)."""
        return TateSeries(self.ctx, [x.p_shift(e) for x in self.coeffs], self.flags)

    def t_shift(self, m: int) -> "TateSeries":
        """Multiply by t^m."""
        if self.is_zero() or m == 0:
            return self
        zero = self.ctx.zero()
        return TateSeries(self.ctx, (zero,) * m + self.coeffs, self.flags)

    def split_at(self, nu: int):
        """(r, h) with self = r + t^nu * h, deg r < nu.  Exact."""
        r = TateSeries(self.ctx, self.coeffs[:nu], self.flags)
        h = TateSeries(self.ctx, self.coeffs[nu:], self.flags)
        return r, h

    def derivative(self) -> "TateSeries":
        """Termwise d/dt; contracts the Gauss norm."""
        cs = [self.coeffs[i] * self.ctx.scalar(i) for i in range(1, len(self.coeffs))]
        return TateSeries(self.ctx, cs, self.flags)

    def invert(self) -> "TateSeries":
        """Inverse of a unit of the disk algebra, modulo (t^(tdeg+1), p^prec).

        Newton iteration g <- g(2 - f g); t-adic convergence doubles the
        correct degree window each round.
        """
        if self.is_zero() or self.coeffs[0].is_zero() or self.n_index() != 0:
            raise NotAUnit("series is not a unit of the disk algebra")
        ctx = self.ctx
        g = TateSeries(ctx, (self.coeffs[0].invert(),))
        two = TateSeries.constant(ctx, 2)
        window = 1
        while window <= ctx.tdeg:
            g = g * (two - self * g)
            window *= 2
        return g

    def translate(self, c: PadicScalar) -> "TateSeries":
        """Taylor shift t -> t + c for |c| <= 1 (recenters a rational point)."""
        ctx = self.ctx
        c = ctx.scalar(c)
        if not c.is_zero() and c.magnitude_bound() > Mag.p_pow(0):
            raise ValueError("translation point must lie in Z_p")
        n = len(self.coeffs)
        if n == 0:
            return self
        out = [ctx.zero() for _ in range(n)]
        cpows = [ctx.one()]
        for i in range(1, n):
            cpows.append(cpows[-1] * c)
        for i, ci in enumerate(self.coeffs):
            if ci.is_zero():
                continue
            # (t + c)^i = sum_j C(i,j) c^(i-j) t^j
            row = 1
            for j in range(i + 1):
                out[j] = out[j] + ci * ctx.scalar(row) * cpows[i - j]
                row = row * (i - j) // (j + 1)
        return TateSeries(ctx, out, self.flags)

    # -- comparisons -----------------------------------------------------------------

    def eq_mod_prec(self, other: "TateSeries") -> bool:
        return (self - other).is_negligible()

    def __eq__(self, other):
        if not isinstance(other, TateSeries):
            return NotImplemented
        if len(self.coeffs) != len(other.coeffs):
            return False
        return all(a == b for a, b in zip(self.coeffs, other.coeffs))

    __hash__ = None

    def __repr__(self):
        if self.is_zero():
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            if i == 0:
                parts.append(f"{c!r}")
            elif i == 1:
                parts.append(f"({c!r})*t")
            else:
                parts.append(f"({c!r})*t^{i}")
        return " + ".join(parts)


# -- spec-named entry points ------------------------------------------------------

def gauss_norm(f: TateSeries) -> Mag:
    return f.gauss_norm()


def n_index(f: TateSeries) -> int:
    return f.n_index()


def series_invert(f: TateSeries) -> TateSeries:
    return f.invert()


def series_derivative(f: TateSeries) -> TateSeries:
    return f.derivative()

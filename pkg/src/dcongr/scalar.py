"""Exact p-adic scalars with capped-precision arithmetic.

A scalar is an element of Q_p known either exactly (as a rational number,
kept as an unreduced numerator/denominator pair) or modulo p^a for an
absolute precision a.  Values born from integer or rational literals stay
exact through ring operations until their bit size passes a threshold, at
which point they are projected onto the capped representation.  Capped
arithmetic tracks absolute precision so that every reported valuation is
certified; a cancellation that eats all stored digits produces a "floor"
value whose valuation deliberately cannot be read.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import DivisionByZero, PrecisionExhausted

INF = float("inf")

_LAZY = -(1 << 62)  # valuation not yet computed (exact scalars memoize it)


def _vp_int(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


class Mag:
    """A scalar magnitude: a power of p (stored as its base-p logarithm) or 0."""

    __slots__ = ("log",)

    def __init__(self, log):
        self.log = log  # int, or None for the zero magnitude

    @classmethod
    def p_pow(cls, e: int) -> "Mag":
        return cls(e)

    @classmethod
    def zero(cls) -> "Mag":
        return cls(None)

    def is_zero(self) -> bool:
        return self.log is None

    def __mul__(self, other: "Mag") -> "Mag":
        if self.log is None or other.log is None:
            return Mag(None)
        return Mag(self.log + other.log)

    def inv(self) -> "Mag":
        if self.log is None:
            raise DivisionByZero("inverse of zero magnitude")
        return Mag(-self.log)

    def __pow__(self, n: int) -> "Mag":
        if self.log is None:
            return Mag(None) if n > 0 else Mag(0)
        return Mag(self.log * n)

    def _key(self):
        # zero sorts below every power of p
        return self.log if self.log is not None else -(10 ** 18)

    def __eq__(self, other):
        return isinstance(other, Mag) and self.log == other.log

    def __lt__(self, other):
        return self._key() < other._key()

    def __le__(self, other):
        return self._key() <= other._key()

    def __gt__(self, other):
        return self._key() > other._key()

    def __ge__(self, other):
        return self._key() >= other._key()

    def __hash__(self):
        return hash(("Mag", self.log))

    def __repr__(self):
        if self.log is None:
            return "0"
        if self.log == 0:
            return "1"
        return f"p^{self.log}"


class Context:
    """Global arithmetic context: the prime and the truncation caps.

    Every value in a session points back to exactly one Context.  Results
    are valid modulo p^prec; series are stored up to degree tdeg; operators
    built from completed-algebra iterations are truncated at order opmax.
    """

    __slots__ = ("p", "prec", "tdeg", "opmax", "_project_bits", "_pow_cache")

    def __init__(self, p: int = 5, prec: int = 40, tdeg: int = 64, opmax: int = 64):
        if p < 2 or not _is_prime(p):
            raise ValueError(f"p must be prime, got {p}")
        if prec < 1 or tdeg < 1 or opmax < 1:
            raise ValueError("prec, tdeg and opmax must all be >= 1")
        self.p = p
        self.prec = prec
        self.tdeg = tdeg
        self.opmax = opmax
        self._project_bits = max(256, 6 * (prec + 1) * p.bit_length())
        self._pow_cache = {}

    def ppow(self, e: int) -> int:
        c = self._pow_cache.get(e)
        if c is None:
            c = self.p ** e
            self._pow_cache[e] = c
        return c

    # -- scalar factories ---------------------------------------------------

    def scalar(self, x) -> "PadicScalar":
        """Exact scalar from an int, Fraction or string 'a/b'."""
        if isinstance(x, PadicScalar):
            return x
        if isinstance(x, int):
            return PadicScalar._exact(self, x, 1)
        if isinstance(x, str):
            x = Fraction(x)
        if isinstance(x, Fraction):
            return PadicScalar._exact(self, x.numerator, x.denominator)
        raise TypeError(f"cannot build a scalar from {type(x).__name__}")

    def zero(self) -> "PadicScalar":
        return PadicScalar._exact(self, 0, 1)

    def one(self) -> "PadicScalar":
        return PadicScalar._exact(self, 1, 1)

    def p_power(self, e: int) -> "PadicScalar":
        if e >= 0:
            return PadicScalar._exact(self, self.ppow(e), 1)
        return PadicScalar._exact(self, 1, self.ppow(-e))

    def same(self, other: "Context") -> bool:
        return self is other or (
            self.p == other.p and self.prec == other.prec
            and self.tdeg == other.tdeg and self.opmax == other.opmax
        )

    def __repr__(self):
        return f"Context(p={self.p}, prec={self.prec}, tdeg={self.tdeg}, opmax={self.opmax})"


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class PadicScalar:
    """An element of Q_p, exact or known modulo p^aprec.

    States (mutually exclusive):
      exact  -- num/den hold the value as an unreduced rational (num == 0
                is the zero); valuations are memoized on demand;
      capped -- value is p^val * unit with unit coprime to p, stored modulo
                p^(aprec - val); the valuation is certified;
      floor  -- only |value| <= p^-aprec is known; the valuation cannot be
                certified and reading it raises PrecisionExhausted.
    """

    __slots__ = ("ctx", "num", "den", "val", "unit", "aprec")

    def __init__(self):
        raise TypeError("use Context.scalar() or the internal constructors")

    # -- constructors ---------------------------------------------------------

    @classmethod
    def _exact(cls, ctx: Context, num: int, den: int) -> "PadicScalar":
        self = object.__new__(cls)
        self.ctx = ctx
        if den < 0:
            num, den = -num, -den
        self.num = num
        self.den = den
        self.val = None if num == 0 else _LAZY
        self.unit = None
        self.aprec = None
        return self

    @classmethod
    def _capped(cls, ctx: Context, val: int, unit: int, aprec: int) -> "PadicScalar":
        if val >= aprec:
            return cls._floor(ctx, aprec)
        m = ctx.ppow(aprec - val)
        unit %= m
        if unit == 0 or unit % ctx.p == 0:
            # the alleged unit carries no invertible digit: uncertifiable
            return cls._floor(ctx, aprec)
        self = object.__new__(cls)
        self.ctx = ctx
        self.num = None
        self.den = None
        self.val = val
        self.unit = unit
        self.aprec = aprec
        return self

    @classmethod
    def _floor(cls, ctx: Context, aprec: int) -> "PadicScalar":
        self = object.__new__(cls)
        self.ctx = ctx
        self.num = None
        self.den = None
        self.val = None
        self.unit = None
        self.aprec = aprec
        return self

    def _v(self) -> int:
        """Valuation of a nonzero exact scalar, memoized."""
        v = self.val
        if v == _LAZY:
            p = self.ctx.p
            v = _vp_int(self.num, p)
            if self.den % p == 0:
                v -= _vp_int(self.den, p)
            self.val = v
        return v

    # -- state predicates -----------------------------------------------------

    def is_exact(self) -> bool:
        return self.num is not None

    def is_zero(self) -> bool:
        return self.num == 0

    def is_floor(self) -> bool:
        return self.num is None and self.val is None

    def is_negligible(self) -> bool:
        """Certified |x| <= p^-prec (at or below the working floor)."""
        if self.num is not None:
            if not self.num:
                return True
            if self.num % self.ctx.p:
                return False  # valuation <= 0
            return self._v() >= self.ctx.prec
        if self.val is None:
            return self.aprec >= self.ctx.prec
        return self.val >= self.ctx.prec

    @property
    def frac(self) -> Fraction:
        """Exact value as a Fraction (exact scalars only)."""
        if self.num is None:
            raise ValueError("not an exact scalar")
        return Fraction(self.num, self.den)

    # -- queries ----------------------------------------------------------------

    def valuation(self):
        """The p-adic valuation; +inf for zero; raises on a floor value."""
        if self.num is not None:
            return INF if self.num == 0 else self._v()
        if self.val is None:
            raise PrecisionExhausted(
                f"valuation not certified below the p^-{self.aprec} floor")
        return self.val

    def magnitude(self) -> Mag:
        """|x| as a power of p (Mag.zero for the exact zero)."""
        return Mag.zero() if self.is_zero() else Mag.p_pow(-self.valuation())

    def magnitude_bound(self) -> Mag:
        """Certified upper bound on |x| (usable for floor values)."""
        if self.is_zero():
            return Mag.zero()
        if self.is_floor():
            return Mag.p_pow(-self.aprec)
        return Mag.p_pow(-self.valuation())

    def residue(self) -> int:
        """Reduction modulo p, for scalars with valuation >= 0."""
        p = self.ctx.p
        if self.is_zero():
            return 0
        if self.is_floor():
            if self.aprec >= 1:
                return 0
            raise PrecisionExhausted("residue not certified")
        v = self._v() if self.num is not None else self.val
        if v > 0:
            return 0
        if v < 0:
            raise ValueError("residue undefined for negative valuation")
        if self.num is not None:
            num, den = self.num, self.den
            if num % p == 0 or den % p == 0:
                # strip the matching p-powers (valuation is 0)
                w = _vp_int(num, p) if num % p == 0 else 0
                num //= self.ctx.ppow(w)
                den //= self.ctx.ppow(w)
            return (num * pow(den, -1, p)) % p
        return self.unit % p

    # -- representation changes ---------------------------------------------

    def project(self) -> "PadicScalar":
        """Project onto the capped representation at absolute precision prec."""
        if self.num is None:
            return self
        ctx = self.ctx
        if self.num == 0:
            # exact zero projects to the floor marker: nothing survives
            return PadicScalar._floor(ctx, ctx.prec)
        v = self._v()
        aprec = ctx.prec
        if v >= aprec:
            return PadicScalar._floor(ctx, aprec)
        m = ctx.ppow(aprec - v)
        num, den = self.num, self.den
        p = ctx.p
        if num % p == 0:
            num //= ctx.ppow(_vp_int(num, p))
        if den % p == 0:
            den //= ctx.ppow(_vp_int(den, p))
        unit = (num * pow(den, -1, m)) % m
        return PadicScalar._capped(ctx, v, unit, aprec)

    def _maybe_shrink(self) -> "PadicScalar":
        """Auto-project an exact value whose representation grew too large."""
        if self.num:
            bits = self.num.bit_length() + self.den.bit_length()
            if bits > self.ctx._project_bits:
                return self.project()
        return self

    def _inexact_view(self) -> "PadicScalar":
        """View suitable for capped arithmetic: exact values too small for
        the capped window become floor markers carrying their exact bound."""
        if self.num is None:
            return self
        v = self._v()
        if v >= self.ctx.prec:
            return PadicScalar._floor(self.ctx, v)
        return self.project()

    # -- arithmetic ---------------------------------------------------------------

    def _check(self, other: "PadicScalar"):
        if self.ctx is not other.ctx and not self.ctx.same(other.ctx):
            raise ValueError("scalars from different contexts")

    def __add__(self, other: "PadicScalar") -> "PadicScalar":
        self._check(other)
        ctx = self.ctx
        if self.num is not None and other.num is not None:
            if self.den == other.den:
                return PadicScalar._exact(
                    ctx, self.num + other.num, self.den)._maybe_shrink()
            return PadicScalar._exact(
                ctx, self.num * other.den + other.num * self.den,
                self.den * other.den)._maybe_shrink()
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        x = self._inexact_view()
        y = other._inexact_view()
        if x.val is None or y.val is None:
            small, big = (x, y) if x.val is None else (y, x)
            if big.val is None:
                return PadicScalar._floor(ctx, min(x.aprec, y.aprec))
            # |small| <= p^-F: the sum keeps big's digits above that bound
            f = small.aprec
            if big.val >= f:
                return PadicScalar._floor(ctx, f)
            return PadicScalar._capped(ctx, big.val, big.unit,
                                       min(big.aprec, f))
        va, ua, aa = x.val, x.unit, x.aprec
        vb, ub, ab = y.val, y.unit, y.aprec
        a = min(aa, ab)
        m = min(va, vb)
        if m >= a:
            return PadicScalar._floor(ctx, a)
        big = ctx.ppow(a - m)
        n = (ua * ctx.ppow(va - m) + ub * ctx.ppow(vb - m)) % big
        if n == 0:
            return PadicScalar._floor(ctx, a)
        w = _vp_int(n, ctx.p)
        v = m + w
        if v >= a:
            return PadicScalar._floor(ctx, a)
        return PadicScalar._capped(ctx, v, n // ctx.ppow(w), a)

    def __neg__(self) -> "PadicScalar":
        ctx = self.ctx
        if self.num is not None:
            return PadicScalar._exact(ctx, -self.num, self.den)
        if self.val is None:
            return self
        return PadicScalar._capped(
            ctx, self.val, ctx.ppow(self.aprec - self.val) - self.unit,
            self.aprec)

    def __sub__(self, other: "PadicScalar") -> "PadicScalar":
        return self + (-other)

    def __mul__(self, other: "PadicScalar") -> "PadicScalar":
        self._check(other)
        ctx = self.ctx
        if self.num is not None and other.num is not None:
            return PadicScalar._exact(
                ctx, self.num * other.num, self.den * other.den)._maybe_shrink()
        if self.is_zero() or other.is_zero():
            return ctx.zero()
        x = self._inexact_view()
        y = other._inexact_view()
        if x.val is None or y.val is None:
            # magnitude bounds multiply: exponents add
            bx = x.aprec if x.val is None else x.val
            by = y.aprec if y.val is None else y.val
            return PadicScalar._floor(ctx, bx + by)
        v = x.val + y.val
        a = min(x.aprec + y.val, y.aprec + x.val)
        if v >= a:
            return PadicScalar._floor(ctx, a)
        m = ctx.ppow(a - v)
        return PadicScalar._capped(ctx, v, (x.unit * y.unit) % m, a)

    def invert(self) -> "PadicScalar":
        ctx = self.ctx
        if self.is_zero():
            raise DivisionByZero("inverse of zero")
        if self.num is not None:
            return PadicScalar._exact(ctx, self.den, self.num)
        if self.val is None:
            raise PrecisionExhausted("cannot invert a value lost below the floor")
        v, u, a = self.val, self.unit, self.aprec
        r = a - v  # relative precision carries over
        m = ctx.ppow(r)
        return PadicScalar._capped(ctx, -v, pow(u, -1, m), r - v)

    def p_shift(self, e: int) -> "PadicScalar":
        """Multiply by p^e (exact for every representation)."""
        ctx = self.ctx
        if e == 0:
            return self
        if self.num is not None:
            if self.num == 0:
                return self
            if e > 0:
                return PadicScalar._exact(ctx, self.num * ctx.ppow(e), self.den)
            return PadicScalar._exact(ctx, self.num, self.den * ctx.ppow(-e))
        if self.val is None:
            return PadicScalar._floor(ctx, self.aprec + e)
        return PadicScalar._capped(ctx, self.val + e, self.unit, self.aprec + e)

    # -- comparisons -----------------------------------------------------------

    def eq_mod_prec(self, other: "PadicScalar") -> bool:
        """Indistinguishable at the working precision."""
        return (self - other).is_negligible()

    def __eq__(self, other):
        if not isinstance(other, PadicScalar):
            return NotImplemented
        if self.num is not None and other.num is not None:
            return self.num * other.den == other.num * self.den
        if self.is_floor() or other.is_floor():
            return self.is_floor() and other.is_floor() \
                and self.aprec == other.aprec
        a = self if self.num is None else self.project()
        b = other if other.num is None else other.project()
        if a.val is None or b.val is None:
            return a.val is None and b.val is None
        if a.val != b.val:
            return False
        r = min(a.aprec, b.aprec) - a.val
        m = self.ctx.ppow(r)
        return a.unit % m == b.unit % m

    __hash__ = None

    def __repr__(self):
        if self.num is not None:
            return f"{Fraction(self.num, self.den)}"
        if self.val is None:
            return f"O(p^{self.aprec})"
        return f"p^{self.val}*{self.unit} + O(p^{self.aprec})"


def scalar_arith(x: PadicScalar, y, op: str) -> PadicScalar:
    """Named entry point for field arithmetic: add, mul, inv, neg.

    inv and neg ignore y.
    """
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    if op == "neg":
        return -x
    if op == "inv":
        return x.invert()
    raise ValueError(f"unknown op {op!r}")


def valuation(x: PadicScalar):
    return x.valuation()

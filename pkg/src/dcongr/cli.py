"""Command-line front end.

Expression grammar (LL, precedence ^ > * > unary - > + -):

    expr    := term (('+' | '-') term)*
    term    := ['-'] factor ('*' factor)*
    factor  := atom ('^' nat)*
    atom    := nat | nat '/' nat | 'p' | 't' | 'D' | loopvar
             | '(' expr ')' | 'prod' '(' var '=' nat '..' nat ',' expr ')'

Multiplication of non-commuting factors preserves written order.  Exit
codes: 0 ok, 2 parse, 3 precondition, 4 precision, 5 horizon.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

from .charvar import NOT_A_CONNECTION, CyclicQuotient, char_cycle, connection_rank
from .charvar import is_holonomic, length_bound
from .dop import DiffOp
from .errors import DcongrError, ParseError
from .ideals import UnitIdeal, division_basis, normal_form
from .scalar import Context, PadicScalar
from .tate import TateSeries
from .tower import FiniteOp, ProductFamily, level_norm_suite, tower_report, units_check
from .weierstrass import divide, hensel_factor, simplicity_witness


# -- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Add:
    terms: tuple  # (sign, node) pairs with sign in {+1, -1}


@dataclass(frozen=True)
class Mul:
    factors: tuple


@dataclass(frozen=True)
class Pow:
    base: object
    exp: object  # non-negative literal or loop-variable expression


@dataclass(frozen=True)
class Prod:
    var: str
    lo: int
    hi: int
    body: object


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str):
        raise ParseError(message, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def eat(self, lit: str):
        self.skip_ws()
        if not self.text.startswith(lit, self.pos):
            self.error(f"expected {lit!r}")
        self.pos += len(lit)

    def try_eat(self, lit: str) -> bool:
        self.skip_ws()
        if self.text.startswith(lit, self.pos):
            self.pos += len(lit)
            return True
        return False

    def nat(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            self.error("expected a number")
        return int(self.text[start:self.pos])

    def ident(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum()
                                             or self.text[self.pos] == "_"):
            self.pos += 1
        if self.pos == start:
            self.error("expected a name")
        return self.text[start:self.pos]

    def parse(self):
        node = self.expr()
        self.skip_ws()
        if self.pos != len(self.text):
            self.error("trailing input")
        return node

    def expr(self):
        terms = [(1, self.term())]
        while True:
            if self.try_eat("+"):
                terms.append((1, self.term()))
            elif self.try_eat("-"):
                terms.append((-1, self.term()))
            else:
                break
        if len(terms) == 1 and terms[0][0] == 1:
            return terms[0][1]
        return Add(tuple(terms))

    def term(self):
        neg = self.try_eat("-")
        factors = [self.factor()]
        while self.try_eat("*"):
            factors.append(self.factor())
        node = factors[0] if len(factors) == 1 else Mul(tuple(factors))
        return Neg(node) if neg else node

    def factor(self):
        node = self.atom()
        while self.try_eat("^"):
            self.skip_ws()
            if self.peek().isdigit():
                node = Pow(node, self.nat())
            else:
                node = Pow(node, Sym(self.ident()))
        return node

    def atom(self):
        c = self.peek()
        if c == "(":
            self.eat("(")
            node = self.expr()
            self.eat(")")
            return node
        if c.isdigit():
            n = self.nat()
            save = self.pos
            if self.try_eat("/"):
                if self.peek().isdigit():
                    den = self.nat()
                    if den == 0:
                        self.error("zero denominator")
                    return Num(Fraction(n, den))
                self.pos = save
            return Num(Fraction(n))
        if c.isalpha():
            name = self.ident()
            if name == "prod":
                self.eat("(")
                var = self.ident()
                self.eat("=")
                lo = self.nat()
                self.eat("..")
                hi = self.nat()
                self.eat(",")
                body = self.expr()
                self.eat(")")
                return Prod(var, lo, hi, body)
            if name in ("p", "t", "D") or len(name) == 1:
                return Sym(name)
            self.error(f"unknown name {name!r}")
        self.error("expected an atom")


def parse(text: str):
    """Parse expression text into an AST; raises ParseError with offset."""
    return _Parser(text).parse()


def to_text(node) -> str:
    """Normalized rendering; parse(to_text(parse(s))) == parse(s)."""
    if isinstance(node, Num):
        return str(node.value)
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, Neg):
        return "-" + _wrap(node.arg, mul_ctx=True)
    if isinstance(node, Add):
        out = []
        for i, (sign, term) in enumerate(node.terms):
            if i == 0 and sign == 1:
                out.append(_wrap(term, mul_ctx=False))
            else:
                out.append(("+ " if sign == 1 else "- ") + _wrap(term, mul_ctx=False))
        return " ".join(out)
    if isinstance(node, Mul):
        return "*".join(_wrap(f, mul_ctx=True) for f in node.factors)
    if isinstance(node, Pow):
        e = node.exp.name if isinstance(node.exp, Sym) else str(node.exp)
        return _wrap(node.base, mul_ctx=True, pow_ctx=True) + "^" + e
    if isinstance(node, Prod):
        return f"prod({node.var}={node.lo}..{node.hi}, {to_text(node.body)})"
    raise TypeError(f"not an AST node: {node!r}")


def _wrap(node, mul_ctx=False, pow_ctx=False) -> str:
    s = to_text(node)
    if isinstance(node, (Add, Neg)) and mul_ctx:
        return f"({s})"
    if isinstance(node, Mul) and pow_ctx:
        return f"({s})"
    if isinstance(node, Num) and "/" in s and (mul_ctx or pow_ctx):
        return f"({s})"
    return s


# -- evaluation ------------------------------------------------------------------

def _promote(a, b, ctx, level):
    rank = {PadicScalar: 0, TateSeries: 1, DiffOp: 2}
    ra, rb = rank[type(a)], rank[type(b)]
    hi = max(ra, rb)

    def up(x, r):
        if r == hi:
            return x
        if isinstance(x, PadicScalar):
            x = TateSeries.constant(ctx, x)
        if hi == 2 and isinstance(x, TateSeries):
            x = DiffOp.from_series(ctx, level, x)
        return x

    return up(a, ra), up(b, rb)


def _vadd(a, b, ctx, level):
    a, b = _promote(a, b, ctx, level)
    return a + b


def _vmul(a, b, ctx, level):
    if isinstance(a, PadicScalar) and isinstance(b, DiffOp):
        return b.scalar_mul(a)
    if isinstance(a, TateSeries) and isinstance(b, DiffOp):
        return b.series_lmul(a)
    a, b = _promote(a, b, ctx, level)
    return a * b


def evaluate(node, ctx: Context, level: int, env=None):
    """Evaluate an AST to a PadicScalar, TateSeries or DiffOp."""
    env = env or {}
    if isinstance(node, Num):
        return ctx.scalar(node.value)
    if isinstance(node, Sym):
        if node.name == "p":
            return ctx.scalar(ctx.p)
        if node.name == "t":
            return TateSeries.t_power(ctx, 1)
        if node.name == "D":
            return DiffOp.derivation(ctx, level)
        if node.name in env:
            return ctx.scalar(env[node.name])
        raise ParseError(f"unbound name {node.name!r}", 0)
    if isinstance(node, Neg):
        v = evaluate(node.arg, ctx, level, env)
        return -v if not isinstance(v, PadicScalar) else v.__neg__()
    if isinstance(node, Add):
        total = None
        for sign, term in node.terms:
            v = evaluate(term, ctx, level, env)
            if sign < 0:
                v = -v
            total = v if total is None else _vadd(total, v, ctx, level)
        return total
    if isinstance(node, Mul):
        out = None
        for f in node.factors:
            v = evaluate(f, ctx, level, env)
            out = v if out is None else _vmul(out, v, ctx, level)
        return out
    if isinstance(node, Pow):
        e = node.exp
        if isinstance(e, Sym):
            if e.name not in env:
                raise ParseError(f"unbound exponent {e.name!r}", 0)
            e = env[e.name]
        if e < 0:
            raise ParseError("negative exponent", 0)
        base = evaluate(node.base, ctx, level, env)
        if isinstance(base, PadicScalar):
            out = ctx.one()
        elif isinstance(base, TateSeries):
            out = TateSeries.one(ctx)
        else:
            out = DiffOp.one(ctx, level)
        for _ in range(e):
            out = _vmul(out, base, ctx, level)
        return out
    if isinstance(node, Prod):
        out = None
        for n in range(node.lo, node.hi + 1):
            sub = dict(env)
            sub[node.var] = n
            v = evaluate(node.body, ctx, level, sub)
            out = v if out is None else _vmul(out, v, ctx, level)
        if out is None:
            return ctx.one()
        return out
    raise TypeError(f"not an AST node: {node!r}")


def eval_operator(text: str, ctx: Context, level: int) -> DiffOp:
    v = evaluate(parse(text), ctx, level)
    if isinstance(v, PadicScalar):
        v = TateSeries.constant(ctx, v)
    if isinstance(v, TateSeries):
        v = DiffOp.from_series(ctx, level, v)
    return v


# -- output helpers -----------------------------------------------------------------

def _emit(payload, as_json: bool, text_fn):
    if as_json:
        print(json.dumps(payload, sort_keys=True, separators=(", ", ": ")))
    else:
        print(text_fn())


def _mag_text(e: int | None, p: int) -> str:
    if e is None:
        return "0 (zero)"
    if abs(e) <= 8:
        val = Fraction(p) ** e
        return f"{val} (log_p = {e})"
    return f"p^{e} (log_p = {e})"


def _series_str(f: TateSeries) -> str:
    if f.is_zero():
        return "0"
    parts = []
    for i, c in enumerate(f.coeffs):
        if c.is_zero():
            continue
        cs = repr(c)
        if i == 0:
            parts.append(cs)
        else:
            ts = "t" if i == 1 else f"t^{i}"
            parts.append(f"({cs})*{ts}" if (len(cs) > 1 or i == 0) else f"{cs}*{ts}")
    return " + ".join(parts)


def _op_json(h: DiffOp) -> dict:
    return {
        "level": h.level,
        "order": h.order(),
        "coefficients": [{"slot": n, "series": _series_str(c)}
                         for n, c in enumerate(h.coeffs) if not c.is_zero()],
        "flags": sorted(h.flags),
    }


def _op_text(h: DiffOp) -> str:
    if h.is_zero():
        return "0"
    gen = f"(p^{h.level}*D)" if h.level else "D"
    parts = []
    for n, c in enumerate(h.coeffs):
        if c.is_zero():
            continue
        base = _series_str(c)
        if n == 0:
            parts.append(f"[{base}]")
        elif n == 1:
            parts.append(f"[{base}]*{gen}")
        else:
            parts.append(f"[{base}]*{gen}^{n}")
    return " + ".join(parts)


# -- command implementations ------------------------------------------------------------

def _cmd_norm(args, ctx):
    h = eval_operator(args.expr, ctx, args.level)
    e = None if h.is_zero() else h.op_norm().log
    _emit({"log_p_norm": e}, args.json, lambda: _mag_text(e, ctx.p))
    return 0


def _cmd_nbar(args, ctx):
    h = eval_operator(args.expr, ctx, args.level)
    _emit({"nbar": h.nbar()}, args.json, lambda: str(h.nbar()))
    return 0


def _cmd_nk(args, ctx):
    h = eval_operator(args.expr, ctx, args.level)
    _emit({"nk": h.nk()}, args.json, lambda: str(h.nk()))
    return 0


def _cmd_mul(args, ctx):
    h = eval_operator(args.lhs, ctx, args.level)
    q = eval_operator(args.rhs, ctx, args.level)
    out = h * q
    _emit(_op_json(out), args.json, lambda: _op_text(out))
    return 0


def _cmd_div(args, ctx):
    h = eval_operator(args.lhs, ctx, args.level)
    p_op = eval_operator(args.rhs, ctx, args.level)
    res = divide(h, p_op)
    payload = {
        "quotient": _op_json(res.quotient),
        "remainder": _op_json(res.remainder),
        "tail": _op_json(res.tail),
        "flags": sorted(res.flags),
    }
    _emit(payload, args.json, lambda: "\n".join([
        f"Q = {_op_text(res.quotient)}",
        f"R = {_op_text(res.remainder)}",
        f"S = {_op_text(res.tail)}",
    ]))
    return 0


def _cmd_invert(args, ctx):
    h = eval_operator(args.expr, ctx, args.level)
    g = h.invert()
    _emit(_op_json(g), args.json, lambda: _op_text(g))
    return 0


def _cmd_bracket(args, ctx):
    h = eval_operator(args.expr, ctx, args.level)
    out = h.bracket_t() if args.by == "t" else h.bracket_del()
    _emit(_op_json(out), args.json, lambda: _op_text(out))
    return 0


def _cmd_hensel(args, ctx):
    h = eval_operator(args.expr, ctx, args.level)
    res = hensel_factor(h)
    payload = {
        "unit": _op_json(res.unit),
        "dominant": _op_json(res.dominant),
        "dominant_order": res.dominant.order(),
        "flags": sorted(res.flags),
    }
    _emit(payload, args.json, lambda: "\n".join([
        f"Q = {_op_text(res.unit)}",
        f"P = {_op_text(res.dominant)}",
        f"order(P) = {res.dominant.order()}",
    ]))
    return 0


def _cmd_witness(args, ctx):
    h = eval_operator(args.expr, ctx, args.level)
    w = simplicity_witness(h)
    payload = {
        "witness": _op_json(w.op),
        "word": {"t": w.t_brackets, "d": w.del_brackets},
    }
    _emit(payload, args.json, lambda: "\n".join([
        f"word: [.,t]^{w.t_brackets} then [.,p^k D]^{w.del_brackets}",
        f"W = {_op_text(w.op)}",
    ]))
    return 0


def _gens(args, ctx):
    return [eval_operator(g, ctx, args.level) for g in args.gens]


def _cmd_basis(args, ctx):
    basis = division_basis(_gens(args, ctx))
    if isinstance(basis, UnitIdeal):
        _emit({"unit_ideal": True}, args.json, lambda: "unit ideal")
        return 0
    payload = {
        "unit_ideal": False,
        "staircase": {"minimals": [[e.v, e.d] for e in basis.staircase.minimals]},
        "ops": [_op_text(op) for op in basis.ops],
        "flags": sorted(basis.flags),
    }

    def text():
        lines = [f"staircase minimals: {[list(e) for e in basis.staircase.minimals]}"]
        if args.ascii:
            lines.append(basis.staircase.ascii())
        for i, op in enumerate(basis.ops, 1):
            lines.append(f"P_{i} = {_op_text(op)}")
        return "\n".join(lines)

    _emit(payload, args.json, text)
    return 0


def _cmd_nf(args, ctx):
    h = eval_operator(args.expr, ctx, args.level)
    basis = division_basis([eval_operator(g, ctx, args.level) for g in args.gens])
    if isinstance(basis, UnitIdeal):
        out = DiffOp.zero(ctx, args.level)
    else:
        out = normal_form(h, basis)
    _emit(_op_json(out), args.json, lambda: _op_text(out))
    return 0


def _cmd_charcycle(args, ctx):
    cycle = char_cycle(CyclicQuotient(_gens(args, ctx), args.level))
    _emit(cycle.to_json_dict(), args.json, lambda: "\n".join(
        [f"kind: {cycle.kind}", f"horizontal: {cycle.horizontal}"] +
        [f"vertical at {c.point} (deg {c.degree}): {c.mult}" for c in cycle.vertical]))
    return 0


def _cmd_holonomic(args, ctx):
    m = CyclicQuotient(_gens(args, ctx), args.level)
    holo = is_holonomic(m)
    payload = {"holonomic": holo}
    if holo:
        payload["length_bound"] = length_bound(m)
    _emit(payload, args.json, lambda: str(payload))
    return 0


def _cmd_rank(args, ctx):
    rank = connection_rank(CyclicQuotient(_gens(args, ctx), args.level))
    if rank is NOT_A_CONNECTION:
        _emit({"rank": None, "reason": "not a connection"}, args.json,
              lambda: "not a connection")
    else:
        _emit({"rank": rank}, args.json, lambda: str(rank))
    return 0


def _tower_element(args, ctx):
    node = parse(args.expr)
    if isinstance(node, Prod):
        body = node.body
        # recognize the canonical family 1 - p^e(n) * D
        fam = _family_from_prod(node, ctx)
        if fam is not None:
            return fam
    op = eval_operator(args.expr, ctx, 0)
    return FiniteOp(op)


def _family_from_prod(node: Prod, ctx):
    exps = []
    for n in range(node.lo, node.hi + 1):
        factor = evaluate(node.body, ctx, 0, {node.var: n})
        if not isinstance(factor, DiffOp) or factor.order() != 1:
            return None
        a0, a1 = factor.coeff(0), factor.coeff(1)
        if a0.degree() != 0 or a1.degree() != 0:
            return None
        if not (a0.coeff(0) - ctx.one()).is_zero():
            return None
        c = -a1.coeff(0)
        if c.is_zero():
            return None
        v = c.valuation()
        exps.append(v)
    return ProductFamily(ctx, exps)


def _cmd_tower(args, ctx):
    element = _tower_element(args, ctx)
    report = tower_report(element, args.kmax)
    payload = report.to_json_dict()
    payload["units_check"] = units_check(element, args.kmax)

    def text():
        lines = ["  k  nbar  log|.|  m_k"]
        for (k, nb, ln, mk) in report.rows:
            lines.append(f"{k:3d} {nb:5d} {ln:7d} {mk:4d}")
        lines.append(f"member of the finite-length class: {report.member}"
                     + (f" ({report.reason})" if report.reason else ""))
        lines.append(f"m = {report.multiplicity}, horizon k <= {report.horizon}")
        return "\n".join(lines)

    _emit(payload, args.json, text)
    return 0


def _cmd_normsuite(args, ctx):
    fam = ProductFamily.geometric(ctx, args.kmax + args.guard)
    suite = level_norm_suite(fam, range(0, args.kmax + 1),
                             range(1, args.mmax + 1))
    _emit(suite.to_json_dict(), args.json, lambda: "\n".join(
        [f"||P_{k}||_{k} = p^{e}" for (k, e) in suite.norm_rows] +
        [f"||P - P_{k}||_{m} = p^{e}" for (m, k, e) in suite.diff_rows]))
    return 0


def _cmd_translate(args, ctx):
    h = eval_operator(args.expr, ctx, args.level)
    c = ctx.scalar(Fraction(args.by))
    out = h.translate(c)
    _emit(_op_json(out), args.json, lambda: _op_text(out))
    return 0


# -- entry point --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dcongr",
        description="p-adic differential operators with congruence level")
    ap.add_argument("--prime", type=int,
                    default=int(os.environ.get("DCONGR_PRIME", "5")))
    ap.add_argument("--prec", type=int,
                    default=int(os.environ.get("DCONGR_PREC", "40")))
    ap.add_argument("--tdeg", type=int, default=64)
    ap.add_argument("--opmax", type=int, default=64)
    ap.add_argument("--level", type=int, default=0)
    ap.add_argument("--json", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def one_expr(name, fn, **kw):
        sp = sub.add_parser(name, **kw)
        sp.add_argument("expr")
        sp.set_defaults(fn=fn)
        return sp

    one_expr("norm", _cmd_norm, help="operator norm at the level")
    one_expr("nbar", _cmd_nbar, help="largest norm-attaining slot")
    one_expr("nk", _cmd_nk, help="dominant index of the top slot")
    mul = sub.add_parser("mul", help="operator product")
    mul.add_argument("lhs")
    mul.add_argument("rhs")
    mul.set_defaults(fn=_cmd_mul)
    div = sub.add_parser("div", help="division H = Q P + R + S")
    div.add_argument("lhs")
    div.add_argument("rhs")
    div.set_defaults(fn=_cmd_div)
    one_expr("invert", _cmd_invert, help="Neumann inverse of a unit operator")
    br = one_expr("bracket", _cmd_bracket, help="commutator with t or the derivation")
    br.add_argument("--by", choices=("t", "D"), default="t")
    one_expr("hensel", _cmd_hensel, help="unit x dominant factorization")
    one_expr("witness", _cmd_witness, help="iterated-bracket invertible witness")
    basis = sub.add_parser("basis", help="division basis of a left ideal")
    basis.add_argument("gens", nargs="+")
    basis.add_argument("--ascii", action="store_true")
    basis.set_defaults(fn=_cmd_basis)
    nf = sub.add_parser("nf", help="normal form modulo an ideal")
    nf.add_argument("expr")
    nf.add_argument("gens", nargs="+")
    nf.set_defaults(fn=_cmd_nf)
    cc = sub.add_parser("charcycle", help="characteristic cycle of D/I")
    cc.add_argument("gens", nargs="+")
    cc.set_defaults(fn=_cmd_charcycle)
    holo = sub.add_parser("holonomic", help="holonomy and length bound")
    holo.add_argument("gens", nargs="+")
    holo.set_defaults(fn=_cmd_holonomic)
    rank = sub.add_parser("rank", help="connection rank or NotAConnection")
    rank.add_argument("gens", nargs="+")
    rank.set_defaults(fn=_cmd_rank)
    tower = one_expr("tower", _cmd_tower, help="per-level tower report")
    tower.add_argument("--kmax", type=int, default=6)
    ns = sub.add_parser("normsuite", help="norm table of the product family")
    ns.add_argument("--kmax", type=int, default=6)
    ns.add_argument("--mmax", type=int, default=3)
    ns.add_argument("--guard", type=int, default=3)
    ns.set_defaults(fn=_cmd_normsuite)
    tr = sub.add_parser("translate", help="recenter t -> t + c")
    tr.add_argument("by")
    tr.add_argument("expr")
    tr.set_defaults(fn=_cmd_translate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        ctx = Context(p=args.prime, prec=args.prec, tdeg=args.tdeg,
                      opmax=args.opmax)
        return args.fn(args, ctx)
    except DcongrError as exc:
        err = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        if isinstance(exc, ParseError):
            err["error"]["offset"] = exc.offset
        print(json.dumps(err, sort_keys=True))
        return exc.exit_code
    except ValueError as exc:
        print(json.dumps({"error": {"type": "ValueError", "message": str(exc)}},
                         sort_keys=True))
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""Scalar expression language: parse, print, evaluate, differentiate.

Expressions are immutable trees over variables ``x1..xn``.  Evaluation is
plain IEEE double arithmetic; derivatives come from forward-mode jets
(value, first and second Taylor coefficients), so the same tree yields
gradients and second-order ray expansions.

Grammar (whitespace-insensitive)::

    expr   := "if" comp "then" expr "else" expr | sum
    comp   := sum ("=="|"!="|"<="|"<"|">="|">") sum
    sum    := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := atom ("^" exponent)?
    exponent := number | "(" integer "/" integer ")" | atom
    atom   := number | varname | func "(" expr ")" | "(" expr ")" | "-" atom

A parenthesised integer ratio with odd denominator in exponent position is a
real odd root: ``v^(p/q) = sign(v)^p |v|^(p/q)``.  Any other exponent is an
ordinary power, defined for positive bases only (integer constants excepted).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

FUNCS = ("sin", "cos", "tan", "exp", "log", "abs", "sqrt", "sign")
COMPARISONS = ("==", "!=", "<=", "<", ">=", ">")


class ExprError(Exception):
    """Base class for expression errors."""


class ParseError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class DomainError(ExprError):
    """Evaluation left the real domain of a node."""

    def __init__(self, message: str, node: "Node"):
        super().__init__(f"{message} in `{print_expr(node)}`")
        self.node = node


class KinkError(DomainError):
    """Derivative requested at a point where the node is not differentiable."""


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


class Node:
    __slots__ = ()

    def variables(self) -> set[int]:
        out: set[int] = set()
        _collect_vars(self, out)
        return out

    def __str__(self) -> str:
        return print_expr(self)


@dataclass(frozen=True)
class Const(Node):
    value: float


@dataclass(frozen=True)
class Var(Node):
    index: int  # 1-based
    prefix: str = "x"


@dataclass(frozen=True)
class Unary(Node):
    op: str  # neg or one of FUNCS
    child: Node


@dataclass(frozen=True)
class Binary(Node):
    op: str  # add sub mul div pow
    left: Node
    right: Node


@dataclass(frozen=True)
class RationalPow(Node):
    child: Node
    num: int
    den: int  # positive, odd


@dataclass(frozen=True)
class Conditional(Node):
    cmp: str
    lhs: Node
    rhs: Node
    then: Node
    other: Node


def _collect_vars(node: Node, out: set[int]) -> None:
    if isinstance(node, Var):
        out.add(node.index)
    elif isinstance(node, Unary):
        _collect_vars(node.child, out)
    elif isinstance(node, RationalPow):
        _collect_vars(node.child, out)
    elif isinstance(node, Binary):
        _collect_vars(node.left, out)
        _collect_vars(node.right, out)
    elif isinstance(node, Conditional):
        for sub in (node.lhs, node.rhs, node.then, node.other):
            _collect_vars(sub, out)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<id>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>==|!=|<=|>=|[-+*/^()<>])"
    r")"
)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, n: int, prefix: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.n = n
        self.prefix = prefix

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.tok
        if t.text != text or t.kind == "num":
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.pos)
        return self.take()

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected token {self.tok.text!r}", self.tok.pos)
        return node

    def expr(self) -> Node:
        if self.tok.kind == "id" and self.tok.text == "if":
            self.take()
            lhs = self.sum()
            t = self.tok
            if t.text not in COMPARISONS:
                raise ParseError("expected comparison operator", t.pos)
            self.take()
            rhs = self.sum()
            self.expect("then")
            then = self.expr()
            self.expect("else")
            other = self.expr()
            return Conditional(t.text, lhs, rhs, then, other)
        return self.sum()

    def sum(self) -> Node:
        node = self.term()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = "add" if self.take().text == "+" else "sub"
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            op = "mul" if self.take().text == "*" else "div"
            node = Binary(op, node, self.factor())
        return node

    def factor(self) -> Node:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.take()
            ratio = self._try_ratio()
            if ratio is not None:
                num, den = ratio
                return RationalPow(base, num, den)
            if self.tok.kind == "num":
                return Binary("pow", base, Const(float(self.take().text)))
            return Binary("pow", base, self.atom())
        return base

    def _try_ratio(self) -> tuple[int, int] | None:
        # "(" ["-"] integer "/" integer ")"
        t = self.toks
        i = self.i
        if t[i].text != "(" or t[i].kind != "op":
            return None
        j = i + 1
        neg = False
        if t[j].kind == "op" and t[j].text == "-":
            neg = True
            j += 1
        if not (t[j].kind == "num" and t[j].text.isdigit()):
            return None
        if not (t[j + 1].kind == "op" and t[j + 1].text == "/"):
            return None
        if not (t[j + 2].kind == "num" and t[j + 2].text.isdigit()):
            return None
        if not (t[j + 3].kind == "op" and t[j + 3].text == ")"):
            return None
        num = int(t[j].text) * (-1 if neg else 1)
        den = int(t[j + 2].text)
        if den == 0:
            raise ParseError("zero denominator in rational exponent", t[j + 2].pos)
        if den % 2 == 0:
            # no odd-root meaning: ordinary pow, positive base only
            return None
        self.i = j + 4
        return num, den

    def atom(self) -> Node:
        t = self.tok
        if t.kind == "num":
            self.take()
            return Const(float(t.text))
        if t.kind == "op" and t.text == "-":
            self.take()
            if self.tok.kind == "num":
                return Const(-float(self.take().text))
            return Unary("neg", self.atom())
        if t.kind == "op" and t.text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        if t.kind == "id":
            self.take()
            if t.text in FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(t.text, arg)
            m = re.fullmatch(re.escape(self.prefix) + r"([0-9]+)", t.text)
            if m is None:
                raise ParseError(f"unknown identifier {t.text!r}", t.pos)
            idx = int(m.group(1))
            if idx < 1 or idx > self.n:
                raise ParseError(f"variable {t.text} outside {self.prefix}1..{self.prefix}{self.n}", t.pos)
            return Var(idx, self.prefix)
        raise ParseError(f"unexpected token {t.text or 'end of input'!r}", t.pos)


def parse_expr(text: str, n: int, prefix: str = "x") -> Node:
    """Parse ``text`` into an expression over ``prefix1..prefix{n}``."""
    return _Parser(text, n, prefix).parse()


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

_BIN_SYM = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}
_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2}


def _fmt_num(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v)) if v != 0 or math.copysign(1, v) > 0 else "0"
    return repr(v)


def print_expr(node: Node) -> str:
    """Render ``node`` as re-parseable text."""
    return _pr(node, 0)


def _paren(s: str) -> str:
    return f"({s})"


def _pr(node: Node, ctx: int) -> str:
    # ctx: 0 top level, 1 sum operand, 2 right term operand, 3 atom required
    if isinstance(node, Const):
        return _fmt_num(node.value)
    if isinstance(node, Var):
        return f"{node.prefix}{node.index}"
    if isinstance(node, Unary):
        if node.op == "neg":
            return "-" + _pr(node.child, 3)
        return f"{node.op}({_pr(node.child, 0)})"
    if isinstance(node, RationalPow):
        s = f"{_pr(node.child, 3)}^({node.num}/{node.den})"
        return _paren(s) if ctx == 3 else s
    if isinstance(node, Binary):
        if node.op == "pow":
            ex = node.right
            if isinstance(ex, Const) and ex.value >= 0:
                exs = _fmt_num(ex.value)
            elif isinstance(ex, (Const, Var, Unary)):
                exs = _pr(ex, 3)
            else:
                # doubled parens keep "(p/q)" from reading back as RationalPow
                exs = _paren(_paren(_pr(ex, 0)))
            s = f"{_pr(node.left, 3)}^{exs}"
            return _paren(s) if ctx == 3 else s
        prec = _PREC[node.op]
        s = f"{_pr(node.left, prec)} {_BIN_SYM[node.op]} {_pr(node.right, prec + 1)}"
        return _paren(s) if ctx > prec else s
    if isinstance(node, Conditional):
        s = (
            f"if {_pr(node.lhs, 1)} {node.cmp} {_pr(node.rhs, 1)} "
            f"then {_pr(node.then, 1)} else {_pr(node.other, 0)}"
        )
        return _paren(s) if ctx > 0 else s
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _compare(op: str, a: float, b: float) -> bool:
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "<=":
        return a <= b
    if op == "<":
        return a < b
    if op == ">=":
        return a >= b
    return a > b


def _rpow(v: float, num: int, den: int, node: Node) -> float:
    if v == 0.0:
        if num < 0:
            raise DomainError("division by zero", node)
        return 1.0 if num == 0 else 0.0
    mag = abs(v) ** (num / den)
    if v < 0 and num % 2:
        return -mag
    return mag


def _is_constant(node: Node) -> bool:
    return not node.variables()


def _pow(a: float, b: float, node: Binary) -> float:
    if b == int(b) and _is_constant(node.right):
        if a == 0.0 and b < 0:
            raise DomainError("division by zero", node)
        try:
            return float(a ** int(b))
        except OverflowError:
            raise DomainError("overflow", node) from None
    if a < 0 or (a == 0 and b <= 0):
        raise DomainError("power of non-positive base", node)
    try:
        return a**b
    except OverflowError:
        raise DomainError("overflow", node) from None


def _ev(node: Node, x: Sequence[float]) -> float:
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return float(x[node.index - 1])
    if isinstance(node, Binary):
        a = _ev(node.left, x)
        b = _ev(node.right, x)
        op = node.op
        if op == "add":
            return a + b
        if op == "sub":
            return a - b
        if op == "mul":
            return a * b
        if op == "div":
            if b == 0.0:
                raise DomainError("division by zero", node)
            return a / b
        return _pow(a, b, node)
    if isinstance(node, Unary):
        v = _ev(node.child, x)
        return _unary_value(node, v)
    if isinstance(node, RationalPow):
        return _rpow(_ev(node.child, x), node.num, node.den, node)
    if isinstance(node, Conditional):
        if _compare(node.cmp, _ev(node.lhs, x), _ev(node.rhs, x)):
            return _ev(node.then, x)
        return _ev(node.other, x)
    raise TypeError(f"not an expression node: {node!r}")


def _unary_value(node: Unary, v: float) -> float:
    op = node.op
    try:
        if op == "neg":
            return -v
        if op == "sin":
            return math.sin(v)
        if op == "cos":
            return math.cos(v)
        if op == "tan":
            return math.tan(v)
        if op == "exp":
            return math.exp(v)
        if op == "log":
            if v <= 0:
                raise DomainError("log of non-positive value", node)
            return math.log(v)
        if op == "abs":
            return abs(v)
        if op == "sqrt":
            if v < 0:
                raise DomainError("sqrt of negative value", node)
            return math.sqrt(v)
        if op == "sign":
            return float((v > 0) - (v < 0))
    except (OverflowError, ValueError):
        raise DomainError(f"{op} out of range", node) from None
    raise TypeError(f"unknown unary op {op!r}")


def _closure(node: Node):
    """Closure with the same semantics as ``_ev``, built once per node."""
    if isinstance(node, Const):
        v = node.value
        return lambda x: v
    if isinstance(node, Var):
        i = node.index - 1
        return lambda x: float(x[i])
    if isinstance(node, Binary):
        fa, fb = _closure(node.left), _closure(node.right)
        op = node.op
        if op == "add":
            return lambda x: fa(x) + fb(x)
        if op == "sub":
            return lambda x: fa(x) - fb(x)
        if op == "mul":
            return lambda x: fa(x) * fb(x)
        if op == "div":

            def div(x):
                b = fb(x)
                if b == 0.0:
                    raise DomainError("division by zero", node)
                return fa(x) / b

            return div
        return lambda x: _pow(fa(x), fb(x), node)
    if isinstance(node, Unary):
        fc = _closure(node.child)
        return lambda x: _unary_value(node, fc(x))
    if isinstance(node, RationalPow):
        fc = _closure(node.child)
        p, q = node.num, node.den
        return lambda x: _rpow(fc(x), p, q, node)
    if isinstance(node, Conditional):
        fl, fr = _closure(node.lhs), _closure(node.rhs)
        ft, fo = _closure(node.then), _closure(node.other)
        cmp = node.cmp
        return lambda x: ft(x) if _compare(cmp, fl(x), fr(x)) else fo(x)
    raise TypeError(f"not an expression node: {node!r}")


_CLOSURES: dict[int, tuple[Node, object]] = {}


def evaluate(node: Node, x: Sequence[float]) -> float:
    """Evaluate ``node`` at point ``x``; never returns NaN or inf."""
    entry = _CLOSURES.get(id(node))
    if entry is None or entry[0] is not node:
        entry = (node, _closure(node))
        _CLOSURES[id(node)] = entry  # holds node, so the id stays unique
    val = entry[1](x)
    if not math.isfinite(val):
        raise DomainError("non-finite result", node)
    return val


# ---------------------------------------------------------------------------
# Jets: truncated Taylor arithmetic, componentwise over k parallel seeds
# ---------------------------------------------------------------------------


@dataclass
class Jet:
    """Value plus first (``d1``) and second (``d2``) Taylor coefficients.

    Each component of ``d1``/``d2`` is an independent univariate series, so
    seeding ``d1 = e_i`` yields the gradient and seeding a single direction
    yields the ray expansion ``phi(x + t d) = val + d1 t + d2 t^2 + o(t^2)``.
    ``d2`` is ``None`` in first-order mode.
    """

    val: float
    d1: np.ndarray
    d2: np.ndarray | None


class _JetCtx:
    def __init__(self, order: int):
        self.order = order
        self.events: list[tuple] = []


def _compose(a: Jet, f0: float, f1: float, f2: float | None) -> Jet:
    d1 = f1 * a.d1
    d2 = None
    if a.d2 is not None:
        d2 = f1 * a.d2 + 0.5 * f2 * a.d1 * a.d1
    return Jet(f0, d1, d2)


def _const_jet(v: float, k: int, order: int) -> Jet:
    return Jet(v, np.zeros(k), np.zeros(k) if order == 2 else None)


def _jet(node: Node, xs: list[Jet], ctx: _JetCtx) -> Jet:
    k = len(xs[0].d1) if xs else 1
    if isinstance(node, Const):
        return _const_jet(node.value, k, ctx.order)
    if isinstance(node, Var):
        return xs[node.index - 1]
    if isinstance(node, Binary):
        a = _jet(node.left, xs, ctx)
        b = _jet(node.right, xs, ctx)
        op = node.op
        second = ctx.order == 2
        if op == "add":
            return Jet(a.val + b.val, a.d1 + b.d1, a.d2 + b.d2 if second else None)
        if op == "sub":
            return Jet(a.val - b.val, a.d1 - b.d1, a.d2 - b.d2 if second else None)
        if op == "mul":
            d2 = a.val * b.d2 + a.d1 * b.d1 + a.d2 * b.val if second else None
            return Jet(a.val * b.val, a.val * b.d1 + a.d1 * b.val, d2)
        if op == "div":
            if b.val == 0.0:
                raise DomainError("division by zero", node)
            c0 = a.val / b.val
            c1 = (a.d1 - c0 * b.d1) / b.val
            c2 = (a.d2 - c0 * b.d2 - c1 * b.d1) / b.val if second else None
            return Jet(c0, c1, c2)
        return _jet_pow(node, a, b, ctx)
    if isinstance(node, Unary):
        a = _jet(node.child, xs, ctx)
        return _jet_unary(node, a, ctx)
    if isinstance(node, RationalPow):
        a = _jet(node.child, xs, ctx)
        return _jet_rpow(node, a, ctx)
    if isinstance(node, Conditional):
        lhs = _ev(node.lhs, [j.val for j in xs])
        rhs = _ev(node.rhs, [j.val for j in xs])
        taken = _compare(node.cmp, lhs, rhs)
        ctx.events.append(("branch", id(node), taken))
        return _jet(node.then if taken else node.other, xs, ctx)
    raise TypeError(f"not an expression node: {node!r}")


def _moving(a: Jet) -> bool:
    return bool(np.any(a.d1 != 0)) or (a.d2 is not None and bool(np.any(a.d2 != 0)))


def _sgn(v: float) -> int:
    return (v > 0) - (v < 0)


def _jet_unary(node: Unary, a: Jet, ctx: _JetCtx) -> Jet:
    op = node.op
    v = a.val
    f0 = _unary_value(node, v)
    if op == "neg":
        return Jet(-v, -a.d1, -a.d2 if a.d2 is not None else None)
    if op == "sin":
        return _compose(a, f0, math.cos(v), -math.sin(v))
    if op == "cos":
        return _compose(a, f0, -math.sin(v), -math.cos(v))
    if op == "tan":
        sec2 = 1.0 + f0 * f0
        return _compose(a, f0, sec2, 2.0 * f0 * sec2)
    if op == "exp":
        return _compose(a, f0, f0, f0)
    if op == "log":
        return _compose(a, f0, 1.0 / v, -1.0 / (v * v))
    if op in ("abs", "sign"):
        ctx.events.append(("kink", id(node), _sgn(v)))
        if v == 0.0 and _moving(a):
            raise KinkError(f"{op} is not differentiable at 0", node)
        if op == "abs":
            return _compose(a, f0, float(_sgn(v)), 0.0)
        return _compose(a, f0, 0.0, 0.0)
    if op == "sqrt":
        ctx.events.append(("kink", id(node), _sgn(v)))
        if v == 0.0:
            if _moving(a):
                raise KinkError("sqrt is not differentiable at 0", node)
            return _compose(a, 0.0, 0.0, 0.0)
        return _compose(a, f0, 0.5 / f0, -0.25 / (f0 * v))
    raise TypeError(f"unknown unary op {op!r}")


def _jet_rpow(node: RationalPow, a: Jet, ctx: _JetCtx) -> Jet:
    p, q = node.num, node.den
    r = p / q
    v = a.val
    f0 = _rpow(v, p, q, node)
    if v == 0.0:
        ctx.events.append(("kink", id(node), 0))
        if not _moving(a):
            return _compose(a, f0, 0.0, 0.0)
        if r < 1 and p != 0:
            raise KinkError(f"^({p}/{q}) is not differentiable at 0", node)
        f1 = 1.0 if p == q else 0.0
        if ctx.order == 2:
            if p == 0 or p == q or r >= 2:
                f2 = 2.0 if p == 2 * q else 0.0
            else:
                raise KinkError(f"^({p}/{q}) has no second derivative at 0", node)
        else:
            f2 = 0.0
        return _compose(a, f0, f1, f2)
    ctx.events.append(("kink", id(node), _sgn(v)))
    s = -1.0 if v < 0 else 1.0
    m = abs(v)
    f1 = r * (s ** (p + 1)) * m ** (r - 1)
    f2 = r * (r - 1) * (s**p) * m ** (r - 2) if ctx.order == 2 else 0.0
    return _compose(a, f0, f1, f2)


def _jet_pow(node: Binary, a: Jet, b: Jet, ctx: _JetCtx) -> Jet:
    val = _pow(a.val, b.val, node)
    if _is_constant(node.right) and b.val == int(b.val):
        m = int(b.val)
        if m == 0:
            return _const_jet(1.0, len(a.d1), ctx.order)
        f1 = m * float(a.val ** (m - 1))
        f2 = 0.0
        if ctx.order == 2 and m != 1:
            f2 = m * (m - 1) * float(a.val ** (m - 2))
        return _compose(a, val, f1, f2)
    if _is_constant(node.right):
        e = b.val
        if a.val == 0.0:
            ctx.events.append(("kink", id(node), 0))
            if not _moving(a):
                return _compose(a, val, 0.0, 0.0)
            if e < 1 or (ctx.order == 2 and e < 2):
                raise KinkError("fractional power not differentiable at 0", node)
            return _compose(a, val, 0.0, 0.0)
        return _compose(a, val, e * a.val ** (e - 1), e * (e - 1) * a.val ** (e - 2))
    # a^b = exp(b log a), a > 0 guaranteed by _pow
    la = math.log(a.val)
    lg = _compose(a, la, 1.0 / a.val, -1.0 / (a.val * a.val))
    d2 = None
    if ctx.order == 2:
        d2 = b.val * lg.d2 + b.d1 * lg.d1 + b.d2 * la
    prod = Jet(b.val * la, b.val * lg.d1 + b.d1 * la, d2)
    return _compose(prod, val, val, val)


def jet_eval(node: Node, xs: list[Jet], order: int = 1) -> tuple[Jet, list[tuple]]:
    """Propagate jets through ``node``; returns the result and branch/kink events."""
    ctx = _JetCtx(order)
    out = _jet(node, xs, ctx)
    if not math.isfinite(out.val) or not np.all(np.isfinite(out.d1)):
        raise DomainError("non-finite derivative", node)
    if out.d2 is not None and not np.all(np.isfinite(out.d2)):
        raise KinkError("non-finite second-order coefficient", node)
    return out, ctx.events


def grad(node: Node, x: Sequence[float]) -> np.ndarray:
    """Exact gradient of the branch selected at ``x`` (forward mode)."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    eye = np.eye(n)
    xs = [Jet(float(x[i]), eye[i].copy(), None) for i in range(n)]
    out, _ = jet_eval(node, xs, order=1)
    return out.d1


def fd_gradient(node: Node, x: Sequence[float], h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient; independent of the jet machinery."""
    if h <= 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=float)
    g = np.empty(len(x))
    for i in range(len(x)):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (evaluate(node, xp) - evaluate(node, xm)) / (2 * h)
    return g


def substitute_constants(text: str, values: Sequence[float], name: str = "xbar") -> str:
    """Replace ``xbar1..`` tokens by literal values before parsing."""

    def rep(m: re.Match) -> str:
        i = int(m.group(1))
        if i < 1 or i > len(values):
            raise ParseError(f"{name}{i} out of range", m.start())
        return f"({float(values[i - 1])!r})"

    return re.sub(rf"\b{name}([0-9]+)\b", rep, text)

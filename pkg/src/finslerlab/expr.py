"""Expression language for metric definitions.

Metrics enter the toolkit as text in a small algebraic language over the
chart variables: `x` and `y` are vectors that may only appear inside
`dot(.,.)` or `norm2(.)`, everything else is scalar arithmetic with `sqrt`
and rational powers.  The same AST evaluates two ways: over jets (feeding
the curvature engine) and over plain numpy arrays (feeding the
finite-difference oracle and cheap point queries), which keeps the two
pipelines independent above the expression level.

Grammar::

    expr    := term (('+'|'-') term)*
    term    := factor (('*'|'/') factor)*
    factor  := atom ('^' rational)? | '-' factor
    atom    := number | ident | call | '(' expr ')'
    call    := 'dot' '(' vexpr ',' vexpr ')' | 'norm2' '(' vexpr ')'
               | 'sqrt' '(' expr ')'
    vexpr   := 'x' | 'y' | ident
    rational:= integer | '(' integer '/' integer ')'
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .jets import Jet, JetDomainError, JetSpec, lift_point


class MetricExprError(ValueError):
    """Malformed expression, bad typing, or unbound parameter."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)


class MetricDomainError(ValueError):
    """Evaluation left the expression's domain (sqrt of negative, zero division)."""


# -- AST ---------------------------------------------------------------------

Pos = tuple[int, int]
_NOPOS: Pos = (0, 0)


@dataclass(frozen=True)
class Num:
    value: float
    pos: Pos = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Param:
    name: str
    pos: Pos = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Vec:
    """Vector reference: 'x', 'y', or a vector parameter name."""

    name: str
    pos: Pos = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Dot:
    a: Vec
    b: Vec
    pos: Pos = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Norm2:
    v: Vec
    pos: Pos = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Sqrt:
    arg: "Node"
    pos: Pos = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    arg: "Node"
    pos: Pos = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Node"
    right: "Node"
    pos: Pos = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Pow:
    base: "Node"
    num: int
    den: int
    pos: Pos = field(default=_NOPOS, compare=False, repr=False)


Node = Num | Param | Dot | Norm2 | Sqrt | Neg | BinOp | Pow


# -- tokenizer / parser ------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|([A-Za-z_][A-Za-z0-9_]*)|([()+\-*/^,]))")


@dataclass
class _Tok:
    kind: str  # num | ident | sym | end
    text: str
    pos: Pos


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    line, line_start = 1, 0
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            line_start = i + 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            continue
        m = _TOKEN_RE.match(text, i)
        if not m or m.start() != i:
            raise MetricExprError(f"unexpected character {ch!r}", line, i - line_start + 1)
        pos = (line, i - line_start + 1)
        if m.group(1):
            toks.append(_Tok("num", m.group(1), pos))
        elif m.group(2):
            toks.append(_Tok("ident", m.group(2), pos))
        else:
            toks.append(_Tok("sym", m.group(3), pos))
        i = m.end()
    toks.append(_Tok("end", "", (line, len(text) - line_start + 1)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.next()
        if t.kind == "end" or t.text != text:
            got = "end of input" if t.kind == "end" else repr(t.text)
            raise MetricExprError(f"expected {text!r}, found {got}", *t.pos)
        return t

    def parse(self) -> Node:
        node = self.expr()
        t = self.peek()
        if t.kind != "end":
            raise MetricExprError(f"unexpected trailing input {t.text!r}", *t.pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek().text in ("+", "-"):
            op = self.next()
            node = BinOp(op.text, node, self.term(), pos=op.pos)
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek().text in ("*", "/"):
            op = self.next()
            node = BinOp(op.text, node, self.factor(), pos=op.pos)
        return node

    def factor(self) -> Node:
        t = self.peek()
        if t.text == "-":
            self.next()
            return Neg(self.factor(), pos=t.pos)
        node = self.atom()
        if self.peek().text == "^":
            caret = self.next()
            num, den = self.rational()
            if (num, den) == (1, 2):
                return Sqrt(node, pos=caret.pos)  # canonical form
            node = Pow(node, num, den, pos=caret.pos)
        return node

    def rational(self) -> tuple[int, int]:
        t = self.peek()
        if t.kind == "num":
            self.next()
            if "." in t.text:
                raise MetricExprError("exponent must be an integer or (p/q)", *t.pos)
            return int(t.text), 1
        if t.text == "(":
            self.next()
            p = self.next()
            if p.kind != "num" or "." in p.text:
                raise MetricExprError("exponent numerator must be an integer", *p.pos)
            self.expect("/")
            q = self.next()
            if q.kind != "num" or "." in q.text:
                raise MetricExprError("exponent denominator must be an integer", *q.pos)
            self.expect(")")
            if int(q.text) == 0:
                raise MetricExprError("exponent denominator must be nonzero", *q.pos)
            return int(p.text), int(q.text)
        raise MetricExprError(f"expected rational exponent, found {t.text!r}", *t.pos)

    def atom(self) -> Node:
        t = self.next()
        if t.kind == "num":
            return Num(float(t.text), pos=t.pos)
        if t.kind == "ident":
            if t.text in ("dot", "norm2", "sqrt"):
                return self.call(t)
            if t.text in ("x", "y"):
                raise MetricExprError(
                    f"vector {t.text!r} may only appear inside dot(...) or norm2(...)",
                    *t.pos)
            return Param(t.text, pos=t.pos)
        if t.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        got = "end of input" if t.kind == "end" else repr(t.text)
        raise MetricExprError(f"expected a value, found {got}", *t.pos)

    def call(self, name: _Tok) -> Node:
        self.expect("(")
        if name.text == "sqrt":
            arg = self.expr()
            self.expect(")")
            return Sqrt(arg, pos=name.pos)
        if name.text == "norm2":
            v = self.vexpr()
            self.expect(")")
            return Norm2(v, pos=name.pos)
        a = self.vexpr()
        self.expect(",")
        b = self.vexpr()
        self.expect(")")
        return Dot(a, b, pos=name.pos)

    def vexpr(self) -> Vec:
        t = self.next()
        if t.kind != "ident":
            got = "end of input" if t.kind == "end" else repr(t.text)
            raise MetricExprError(f"expected a vector (x, y or a parameter), found {got}",
                                  *t.pos)
        return Vec(t.text, pos=t.pos)


def parse(text: str) -> Node:
    """Parse expression text into an AST; raises MetricExprError with the
    offending line/column on malformed input."""
    return _Parser(text).parse()


# -- printing ----------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    if isinstance(node, Pow):
        return 4
    return 5


def print_expr(node: Node) -> str:
    """Render an AST back to source text; parse(print_expr(ast)) == ast."""
    if isinstance(node, Num):
        return repr(node.value) if node.value >= 0 else f"({node.value!r})"
    if isinstance(node, Param):
        return node.name
    if isinstance(node, Vec):
        return node.name
    if isinstance(node, Dot):
        return f"dot({node.a.name}, {node.b.name})"
    if isinstance(node, Norm2):
        return f"norm2({node.v.name})"
    if isinstance(node, Sqrt):
        return f"sqrt({print_expr(node.arg)})"
    if isinstance(node, Neg):
        inner = print_expr(node.arg)
        if _prec(node.arg) < 3:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Pow):
        base = print_expr(node.base)
        if _prec(node.base) < 5:
            base = f"({base})"
        exp = str(node.num) if node.den == 1 else f"({node.num}/{node.den})"
        return f"{base}^{exp}"
    if isinstance(node, BinOp):
        left = print_expr(node.left)
        if _prec(node.left) < _PREC[node.op]:
            left = f"({left})"
        right = print_expr(node.right)
        if _prec(node.right) <= _PREC[node.op]:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an AST node: {node!r}")


# -- the bound expression ----------------------------------------------------

FORM_F = "F"
FORM_F2 = "F_squared"

ParamValue = float | tuple[float, ...]


@dataclass
class MetricExpr:
    """A parsed metric expression with its parameter bindings.

    `declared_form` says whether the text denotes F itself or F^2; evaluation
    always produces F^2 (squaring once when needed), which is what every
    downstream tensor consumes.
    """

    ast: Node
    declared_form: str
    params: dict[str, ParamValue]
    source: str | None = None

    def __post_init__(self) -> None:
        if self.declared_form not in (FORM_F, FORM_F2):
            raise MetricExprError(
                f"declared_form must be {FORM_F!r} or {FORM_F2!r}, "
                f"got {self.declared_form!r}")
        norm: dict[str, ParamValue] = {}
        for k, v in self.params.items():
            if isinstance(v, (int, float, np.floating, np.integer)):
                norm[k] = float(v)
            else:
                norm[k] = tuple(float(c) for c in v)
        self.params = norm
        _validate(self.ast, self.params)

    @classmethod
    def from_text(cls, text: str, declared_form: str = FORM_F2,
                  params: dict[str, ParamValue] | None = None) -> "MetricExpr":
        return cls(parse(text), declared_form, dict(params or {}), source=text)

    @property
    def text(self) -> str:
        return self.source if self.source is not None else print_expr(self.ast)


def _validate(node: Node, params: dict[str, ParamValue]) -> None:
    if isinstance(node, Param):
        if node.name not in params:
            raise MetricExprError(f"unbound parameter {node.name!r}", *node.pos)
        if not isinstance(params[node.name], float):
            raise MetricExprError(
                f"parameter {node.name!r} is a vector but is used as a scalar",
                *node.pos)
    elif isinstance(node, Vec):
        if node.name in ("x", "y"):
            return
        if node.name not in params:
            raise MetricExprError(f"unbound vector parameter {node.name!r}", *node.pos)
        if isinstance(params[node.name], float):
            raise MetricExprError(
                f"parameter {node.name!r} is a scalar but is used as a vector",
                *node.pos)
    elif isinstance(node, (Dot,)):
        _validate(node.a, params)
        _validate(node.b, params)
    elif isinstance(node, Norm2):
        _validate(node.v, params)
    elif isinstance(node, (Sqrt, Neg)):
        _validate(node.arg, params)
    elif isinstance(node, Pow):
        _validate(node.base, params)
    elif isinstance(node, BinOp):
        _validate(node.left, params)
        _validate(node.right, params)


# -- evaluation over jets ----------------------------------------------------

def eval_ast_jet(node: Node, params: dict[str, ParamValue],
                 spec: JetSpec, x, y) -> Jet:
    """Evaluate an AST to the jet of the denoted scalar (no squaring)."""
    xs, ys = lift_point(spec, x, y)
    const = lambda v: Jet.constant(spec, xs[0].x0, xs[0].y0, v)

    def vec(node: Vec) -> list[Jet]:
        if node.name == "x":
            return xs
        if node.name == "y":
            return ys
        val = params[node.name]
        return [const(c) for c in val]  # type: ignore[union-attr]

    def go(node: Node) -> Jet:
        if isinstance(node, Num):
            return const(node.value)
        if isinstance(node, Param):
            return const(params[node.name])  # type: ignore[arg-type]
        if isinstance(node, Dot):
            a, b = vec(node.a), vec(node.b)
            if len(a) != len(b):
                raise MetricExprError("dot of vectors with different lengths", *node.pos)
            acc = a[0] * b[0]
            for ai, bi in zip(a[1:], b[1:]):
                acc = acc + ai * bi
            return acc
        if isinstance(node, Norm2):
            v = vec(node.v)
            acc = v[0] * v[0]
            for vi in v[1:]:
                acc = acc + vi * vi
            return acc
        if isinstance(node, Sqrt):
            arg = go(node.arg)
            try:
                return arg.sqrt()
            except JetDomainError:
                raise MetricDomainError(
                    f"sqrt argument is {arg.value:g} <= 0 at line {node.pos[0]}, "
                    f"column {node.pos[1]} in {print_expr(node)!r}") from None
        if isinstance(node, Neg):
            return -go(node.arg)
        if isinstance(node, Pow):
            base = go(node.base)
            try:
                return base.pow(node.num, node.den)
            except JetDomainError:
                raise MetricDomainError(
                    f"power base is {base.value:g} <= 0 at line {node.pos[0]}, "
                    f"column {node.pos[1]} in {print_expr(node)!r}") from None
        if isinstance(node, BinOp):
            left, right = go(node.left), go(node.right)
            if node.op == "+":
                return left + right
            if node.op == "-":
                return left - right
            if node.op == "*":
                return left * right
            if right.value == 0.0:
                raise MetricDomainError(
                    f"division by zero at line {node.pos[0]}, column {node.pos[1]} "
                    f"in {print_expr(node)!r}")
            return left / right
        raise TypeError(f"not an AST node: {node!r}")

    return go(node)


def eval_f2_jet(expr: MetricExpr, spec: JetSpec, x, y) -> Jet:
    """Jet of F^2 at the base point, honoring declared_form."""
    j = eval_ast_jet(expr.ast, expr.params, spec, x, y)
    if expr.declared_form == FORM_F:
        return j * j
    return j


# -- evaluation over plain arrays ---------------------------------------------

def eval_ast_value(node: Node, params: dict[str, ParamValue],
                   x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Evaluate an AST on plain points; x and y have shape (..., dim).

    The input dtype is preserved (float64 by default), so callers may pass
    extended-precision arrays to push down their own round-off floor.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if not np.issubdtype(x.dtype, np.floating):
        x = x.astype(float)
    if not np.issubdtype(y.dtype, np.floating):
        y = y.astype(float)

    def vec(node: Vec) -> np.ndarray:
        if node.name == "x":
            return x
        if node.name == "y":
            return y
        return np.asarray(params[node.name], dtype=float)

    def go(node: Node) -> np.ndarray:
        if isinstance(node, Num):
            return np.asarray(node.value)
        if isinstance(node, Param):
            return np.asarray(params[node.name])
        if isinstance(node, Dot):
            a, b = vec(node.a), vec(node.b)
            return (a * b).sum(axis=-1)
        if isinstance(node, Norm2):
            v = vec(node.v)
            return (v * v).sum(axis=-1)
        if isinstance(node, Sqrt):
            arg = go(node.arg)
            if np.any(arg < 0):
                raise MetricDomainError(
                    f"sqrt of negative argument at line {node.pos[0]}, "
                    f"column {node.pos[1]} in {print_expr(node)!r}")
            return np.sqrt(arg)
        if isinstance(node, Neg):
            return -go(node.arg)
        if isinstance(node, Pow):
            base = go(node.base)
            if node.den == 1:
                return base ** node.num
            if np.any(base <= 0):
                raise MetricDomainError(
                    f"fractional power of non-positive base at line {node.pos[0]}, "
                    f"column {node.pos[1]} in {print_expr(node)!r}")
            return base ** (node.num / node.den)
        if isinstance(node, BinOp):
            left, right = go(node.left), go(node.right)
            if node.op == "+":
                return left + right
            if node.op == "-":
                return left - right
            if node.op == "*":
                return left * right
            if np.any(right == 0):
                raise MetricDomainError(
                    f"division by zero at line {node.pos[0]}, column {node.pos[1]} "
                    f"in {print_expr(node)!r}")
            return left / right
        raise TypeError(f"not an AST node: {node!r}")

    return go(node)


def eval_f2_value(expr: MetricExpr, x, y) -> np.ndarray:
    v = eval_ast_value(expr.ast, expr.params, x, y)
    if expr.declared_form == FORM_F:
        return v * v
    return v


def eval_f_value(expr: MetricExpr, x, y) -> np.ndarray:
    v = eval_ast_value(expr.ast, expr.params, x, y)
    if expr.declared_form == FORM_F:
        return v
    if np.any(v < 0):
        raise MetricDomainError("F^2 is negative; cannot take F")
    return np.sqrt(v)


# -- numerical homogeneity check ----------------------------------------------

@dataclass
class HomogeneityReport:
    max_residual: float
    tol: float
    passed: bool
    worst_sample: int
    worst_lambda: float


def check_homogeneity(expr: MetricExpr, samples, tol: float = 1e-9,
                      lambdas=(0.5, 2.0, 3.0)) -> HomogeneityReport:
    """Test F(x, lam*y) = lam*F(x, y) at the sample points.

    residual = |F(x, lam y) - lam F(x, y)| / (lam F(x, y)), maximized over
    samples and scaling factors.
    """
    worst = (0.0, -1, 0.0)
    for idx, (x, y) in enumerate(samples):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        f0 = float(eval_f_value(expr, x, y))
        for lam in lambdas:
            f1 = float(eval_f_value(expr, x, lam * y))
            res = abs(f1 - lam * f0) / abs(lam * f0)
            if res > worst[0]:
                worst = (res, idx, lam)
    return HomogeneityReport(worst[0], tol, worst[0] < tol, worst[1], worst[2])

"""Real-valued phase functions h on the plane.

Three variants are supported:

* :class:`Constant` -- ``h(z) = value``;
* :class:`Expression` -- a parsed arithmetic expression in ``x, y, r, theta``;
* :class:`PointPerturbed` -- a base function overridden on finitely many
  points (exact coordinate match), e.g. ``h = 0`` except ``h(0) = eps/2``.

Every variant is callable on a complex scalar (returns ``float``) or on a
complex numpy array (returns an array of the same shape).

Expression grammar::

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := '-'? primary ('^' factor)?
    primary := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'

``-a^b`` parses as ``-(a^b)`` and ``^`` is right-associative.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Union

import numpy as np

from .errors import EvalError, InvalidInput, ParseError
from .geometry import Point, PointLike, as_complex

VARIABLES = ("x", "y", "r", "theta")
CONSTANTS = {"pi": math.pi, "e": math.e}
UNARY_FUNCS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "atan": np.arctan,
    "exp": np.exp, "log": np.log, "abs": np.abs, "sqrt": np.sqrt,
}
BINARY_FUNCS = {"atan2": np.arctan2, "min": np.minimum, "max": np.maximum}


# --------------------------------------------------------------------------
# Expression tree
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "ExprNode"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "ExprNode"
    right: "ExprNode"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple


ExprNode = Union[Num, Var, Const, Neg, BinOp, Call]


def to_source(node: ExprNode) -> str:
    """Fully parenthesised source text; re-parsing yields an identical tree."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    return f"{node.func}({', '.join(to_source(a) for a in node.args)})"


def uses_variables(node: ExprNode) -> bool:
    if isinstance(node, Var):
        return True
    if isinstance(node, Neg):
        return uses_variables(node.operand)
    if isinstance(node, BinOp):
        return uses_variables(node.left) or uses_variables(node.right)
    if isinstance(node, Call):
        return any(uses_variables(a) for a in node.args)
    return False


# --------------------------------------------------------------------------
# Tokenizer / parser
# --------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
""", re.VERBOSE)

_END = "end of input"


@dataclass
class _Token:
    kind: str
    text: str
    offset: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    byte = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", byte,
                             {"number", "identifier", "operator"})
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), byte))
        byte += len(m.group().encode("utf-8"))
        pos = m.end()
    tokens.append(_Token("end", "", byte))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def _is(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def _expect(self, text: str, also=()) -> None:
        if not self._is(text):
            self._fail(f"expected {text!r}", {repr(text), *also})
        self.i += 1

    def _fail(self, message, expected):
        got = self.tok.text or _END
        raise ParseError(f"{message}, got {got!r}", self.tok.offset, expected)

    def parse(self) -> ExprNode:
        if self.tok.kind == "end":
            self._fail("empty expression", {"number", "identifier", "'('", "'-'"})
        node = self.expr()
        if self.tok.kind != "end":
            self._fail("trailing input", {"'+'", "'-'", "'*'", "'/'", "'^'", _END})
        return node

    def expr(self) -> ExprNode:
        node = self.term()
        while self._is("+") or self._is("-"):
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> ExprNode:
        node = self.factor()
        while self._is("*") or self._is("/"):
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> ExprNode:
        negate = False
        if self._is("-"):
            negate = True
            self.i += 1
        node = self.primary()
        if self._is("^"):
            self.i += 1
            node = BinOp("^", node, self.factor())
        return Neg(node) if negate else node

    def primary(self) -> ExprNode:
        tok = self.tok
        if tok.kind == "number":
            self.i += 1
            value = float(tok.text)
            if not math.isfinite(value):
                raise ParseError(f"numeric literal {tok.text!r} overflows", tok.offset, {"finite number"})
            return Num(value)
        if tok.kind == "ident":
            self.i += 1
            name = tok.text
            if name in VARIABLES:
                return Var(name)
            if name in CONSTANTS:
                return Const(name)
            if name in UNARY_FUNCS or name in BINARY_FUNCS:
                return self._call(name, tok)
            self.i -= 1
            raise ParseError(f"unknown identifier {name!r}", tok.offset,
                             set(VARIABLES) | set(CONSTANTS) | set(UNARY_FUNCS) | set(BINARY_FUNCS))
        if self._is("("):
            self.i += 1
            node = self.expr()
            self._expect(")", {"'+'", "'-'", "'*'", "'/'", "'^'"})
            return node
        self._fail("expected an operand", {"number", "identifier", "'('"})

    def _call(self, name: str, tok: _Token) -> Call:
        self._expect("(")
        args = [self.expr()]
        while self._is(","):
            self.i += 1
            args.append(self.expr())
        self._expect(")", {"','"})
        arity = 1 if name in UNARY_FUNCS else 2
        if len(args) != arity:
            raise ParseError(f"{name} takes {arity} argument(s), got {len(args)}", tok.offset,
                             {f"{arity} argument(s)"})
        return Call(name, tuple(args))


def parse_expr(source: str) -> ExprNode:
    """Parse ``source`` into an expression tree (no constant folding)."""
    return _Parser(source).parse()


# --------------------------------------------------------------------------
# Evaluation
# --------------------------------------------------------------------------

def _check(values, node, what="non-finite result"):
    if not np.all(np.isfinite(values)):
        raise EvalError(f"{what} in {to_source(node)}", node)
    return values


def evaluate_node(node: ExprNode, env: dict):
    """Evaluate ``node`` with variable bindings ``env`` (floats or arrays)."""
    with np.errstate(all="ignore"):
        return _eval(node, env)


def _eval(node, env):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, BinOp):
        a = _eval(node.left, env)
        b = _eval(node.right, env)
        if node.op == "+":
            out = np.add(a, b)
        elif node.op == "-":
            out = np.subtract(a, b)
        elif node.op == "*":
            out = np.multiply(a, b)
        elif node.op == "/":
            if np.any(np.asarray(b) == 0):
                raise EvalError(f"division by zero in {to_source(node)}", node)
            out = np.divide(a, b)
        else:
            out = np.power(np.asarray(a, dtype=float), b)
        return _check(out, node)
    args = [_eval(a, env) for a in node.args]
    if node.func == "log" and np.any(np.asarray(args[0]) <= 0):
        raise EvalError(f"log of non-positive value in {to_source(node)}", node)
    if node.func == "sqrt" and np.any(np.asarray(args[0]) < 0):
        raise EvalError(f"sqrt of negative value in {to_source(node)}", node)
    fn = UNARY_FUNCS.get(node.func) or BINARY_FUNCS[node.func]
    return _check(fn(*args), node)


def _polar_env(z) -> dict:
    z = np.asarray(z, dtype=complex)
    theta = np.angle(z)
    theta = np.where(theta == -np.pi, np.pi, theta)  # principal branch (-pi, pi]; angle(0) == 0
    return {"x": z.real, "y": z.imag, "r": np.abs(z), "theta": theta}


# --------------------------------------------------------------------------
# HFunction variants
# --------------------------------------------------------------------------

class HFunction:
    """Callable h: C -> R.  Subclasses implement :meth:`values`."""

    def values(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, z):
        if np.ndim(z) == 0:
            return float(self.values(np.asarray([z], dtype=complex))[0])
        return self.values(np.asarray(z, dtype=complex))

    def evaluate(self, p: PointLike) -> float:
        return self(as_complex(p))

    @property
    def is_constant(self) -> bool:
        return False


@dataclass(frozen=True)
class Constant(HFunction):
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise InvalidInput("constant h must be finite")

    def values(self, z):
        return np.full(np.shape(z), float(self.value))

    @property
    def is_constant(self) -> bool:
        return True

    def __str__(self):
        return repr(float(self.value))


@dataclass(frozen=True)
class Expression(HFunction):
    ast: ExprNode

    def values(self, z):
        out = evaluate_node(self.ast, _polar_env(z))
        return np.broadcast_to(np.asarray(out, dtype=float), np.shape(z)).copy()

    def __str__(self):
        return to_source(self.ast)


@dataclass(frozen=True)
class PointPerturbed(HFunction):
    base: HFunction
    overrides: tuple  # ((Point, value), ...)

    def values(self, z):
        z = np.asarray(z, dtype=complex)
        hit = np.zeros(z.shape, dtype=bool)
        out = np.empty(z.shape, dtype=float)
        for pt, v in self.overrides:
            mask = (z.real == pt.x) & (z.imag == pt.y)
            out[mask] = v
            hit |= mask
        if not hit.all():
            out[~hit] = self.base.values(z[~hit])
        return out

    def __str__(self):
        pts = "; ".join(f"({p.x!r},{p.y!r})->{v!r}" for p, v in self.overrides)
        return f"{self.base} with {{{pts}}}"


def parse_h_expression(source: str) -> HFunction:
    """Parse an h-expression.  Variable-free expressions fold to :class:`Constant`."""
    ast = parse_expr(source)
    if not uses_variables(ast):
        return Constant(float(evaluate_node(ast, {})))
    return Expression(ast)


def evaluate_h(h: HFunction, p: PointLike) -> float:
    return h.evaluate(p)


def make_point_perturbed(base: HFunction, overrides) -> HFunction:
    """Override ``base`` at finitely many points.  ``overrides`` is a list of (point, value)."""
    items = []
    seen = set()
    for p, v in overrides:
        pt = p if isinstance(p, Point) else Point.from_complex(as_complex(p))
        key = (pt.x + 0.0, pt.y + 0.0)  # +0.0 folds -0.0 into 0.0
        if key in seen:
            raise InvalidInput(f"duplicate override point {key}")
        if not math.isfinite(v):
            raise InvalidInput("override value must be finite")
        seen.add(key)
        items.append((pt, float(v)))
    return PointPerturbed(base, tuple(items))


# --------------------------------------------------------------------------
# Registry
# --------------------------------------------------------------------------

def _number(value) -> float:
    if isinstance(value, str):
        h = parse_h_expression(value)
        if not isinstance(h, Constant):
            raise InvalidInput(f"expected a constant, got {value!r}")
        return h.value
    return float(value)


def h_from_entry(entry) -> HFunction:
    """Build an HFunction from a registry entry (dict, expression string or number)."""
    if isinstance(entry, (int, float)):
        return Constant(float(entry))
    if isinstance(entry, str):
        return parse_h_expression(entry)
    kind = entry.get("kind")
    if kind == "const":
        return Constant(_number(entry["value"]))
    if kind == "expr":
        return parse_h_expression(entry["expr"])
    if kind == "perturbed":
        overrides = []
        for ov in entry.get("overrides", []):
            if isinstance(ov, dict):
                overrides.append((tuple(ov["point"]), _number(ov["value"])))
            else:
                overrides.append((tuple(ov[0]), _number(ov[1])))
        return make_point_perturbed(h_from_entry(entry["base"]), overrides)
    raise InvalidInput(f"unknown registry kind {kind!r}")


def load_registry(path: str | Path | None = None) -> dict[str, HFunction]:
    """Load an h registry (JSON list of entries); the shipped default when ``path`` is None."""
    if path is None:
        text = resources.files("curvlab").joinpath("data/h_registry.json").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return {e["name"]: h_from_entry(e) for e in json.loads(text)}


def _parse_overrides(text: str):
    out = []
    for item in filter(None, (s.strip() for s in text.split(";"))):
        where, sep, value = item.partition("=")
        coords = where.split(",")
        if not sep or len(coords) != 2:
            raise InvalidInput(f"malformed override {item!r}; expected 'x,y=value'")
        try:
            pt = (float(coords[0]), float(coords[1]))
        except ValueError as exc:
            raise InvalidInput(f"malformed override point {where!r}") from exc
        out.append((pt, _number(value.strip())))
    return out


def resolve_h(source: str, registry: dict[str, HFunction] | None = None) -> HFunction:
    """Registry name if known, otherwise an inline expression.

    ``"base | x,y=value; x,y=value"`` overrides the base (a name or an
    expression) at the listed points, e.g. ``"0 | 0,0=pi/4"``.
    """
    registry = load_registry() if registry is None else registry
    base, sep, overrides = source.partition("|")
    if sep:
        return make_point_perturbed(resolve_h(base.strip(), registry), _parse_overrides(overrides))
    source = source.strip()
    if source in registry:
        return registry[source]
    return parse_h_expression(source)

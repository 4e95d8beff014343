"""A small arithmetic expression language for problem definitions.

Grammar (precedence climbing, highest first):

    ^  (right associative)  >  unary -  >  * /  >  + -  >  comparisons

Atoms are real literals, variable names, parenthesised expressions and
function calls: ``sin cos exp abs sqrt gamma`` (one argument),
``mittag_leffler(alpha; z)`` (two arguments, separated by ';' or ','),
and ``piecewise(cond1 : expr1, cond2 : expr2, ...)`` evaluated first-match.
Comparisons (< <= > >= == !=) are only legal as piecewise guards.

Evaluation is NumPy-aware: variables may be scalars or arrays, piecewise
branches are evaluated only where their guard holds (so guarded expressions
may be partial outside their region).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .errors import EvaluationError, ExpressionError
from .special import mittag_leffler

__all__ = ["Expression", "parse_expression", "evaluate", "VARIABLES", "FUNCTIONS"]

VARIABLES = ("tau", "x", "v", "sigma")
FUNCTIONS = {"sin": 1, "cos": 1, "exp": 1, "abs": 1, "sqrt": 1, "gamma": 1, "mittag_leffler": 2}
_CMP_OPS = ("<=", ">=", "==", "!=", "<", ">")

_TOKEN_RE = re.compile(
    r"""
    (?P<number>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<op><=|>=|==|!=|[-+*/^()<>,;:])
    | (?P<ws>[ \t\r\n]+)
    | (?P<bad>.)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(source: str):
    tokens = []
    line, col = 1, 1
    for m in _TOKEN_RE.finditer(source):
        kind = m.lastgroup
        text = m.group()
        if kind == "ws":
            nl = text.count("\n")
            if nl:
                line += nl
                col = len(text) - text.rfind("\n")
            else:
                col += len(text)
            continue
        if kind == "bad":
            raise ExpressionError(f"unexpected character {text!r}", line, col)
        tokens.append(Token(kind, text, line, col))
        col += len(text)
    tokens.append(Token("end", "", line, col))
    return tokens


# --- AST ----------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class Bin:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Compare:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


@dataclass(frozen=True)
class Piecewise:
    branches: tuple  # of (guard, value)


@dataclass(frozen=True)
class Expression:
    """Parsed expression plus its allowed variable set."""

    root: object
    source: str
    variables: tuple

    def __call__(self, **env):
        return evaluate(self.root, env)

    def as_function(self, arg_names):
        """Callable taking positional arguments bound to ``arg_names``."""

        def fn(*args):
            return evaluate(self.root, dict(zip(arg_names, args)))

        return fn


class _Parser:
    def __init__(self, tokens, variables):
        self.tokens = tokens
        self.pos = 0
        self.variables = variables

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.cur
        self.pos += 1
        return tok

    def expect(self, text):
        if self.cur.text != text:
            raise ExpressionError(
                f"expected {text!r}, found {self.cur.text or 'end of input'!r}",
                self.cur.line,
                self.cur.column,
            )
        return self.advance()

    def fail(self, msg):
        raise ExpressionError(msg, self.cur.line, self.cur.column)

    # comparison > sum > product > unary > power > atom
    def comparison(self):
        left = self.sum()
        if self.cur.kind == "op" and self.cur.text in _CMP_OPS:
            op = self.advance().text
            right = self.sum()
            return Compare(op, left, right)
        return left

    def sum(self):
        node = self.product()
        while self.cur.kind == "op" and self.cur.text in ("+", "-"):
            op = self.advance().text
            node = Bin(op, node, self.product())
        return node

    def product(self):
        node = self.unary()
        while self.cur.kind == "op" and self.cur.text in ("*", "/"):
            op = self.advance().text
            node = Bin(op, node, self.unary())
        return node

    def unary(self):
        if self.cur.kind == "op" and self.cur.text == "-":
            self.advance()
            return Neg(self.unary())
        if self.cur.kind == "op" and self.cur.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.cur.kind == "op" and self.cur.text == "^":
            self.advance()
            return Bin("^", base, self.unary())  # right associative, exponent may be signed
        return base

    def atom(self):
        tok = self.cur
        if tok.kind == "number":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "ident":
            self.advance()
            if self.cur.text == "(":
                return self.call(tok)
            if tok.text not in self.variables:
                raise ExpressionError(f"unknown identifier {tok.text!r}", tok.line, tok.column)
            return Var(tok.text)
        if tok.text == "(":
            self.advance()
            node = self.comparison()
            self.expect(")")
            return node
        self.fail(f"unexpected token {tok.text or 'end of input'!r}")

    def call(self, name_tok):
        name = name_tok.text
        self.expect("(")
        if name == "piecewise":
            branches = []
            while True:
                guard = self.comparison()
                if not isinstance(guard, Compare):
                    raise ExpressionError(
                        "piecewise guard must be a comparison", name_tok.line, name_tok.column
                    )
                self.expect(":")
                value = self.comparison()
                branches.append((guard, value))
                if self.cur.text == ",":
                    self.advance()
                    continue
                break
            self.expect(")")
            return Piecewise(tuple(branches))
        if name not in FUNCTIONS:
            raise ExpressionError(f"unknown function {name!r}", name_tok.line, name_tok.column)
        args = [self.comparison()]
        while self.cur.text in (",", ";"):
            self.advance()
            args.append(self.comparison())
        self.expect(")")
        if len(args) != FUNCTIONS[name]:
            raise ExpressionError(
                f"{name} takes {FUNCTIONS[name]} argument(s), got {len(args)}",
                name_tok.line,
                name_tok.column,
            )
        return Call(name, tuple(args))


def _check_types(node, in_guard=False):
    """Comparisons may only appear as piecewise guards."""
    if isinstance(node, Compare):
        if not in_guard:
            raise ExpressionError("comparison used outside a piecewise guard")
        _check_types(node.left)
        _check_types(node.right)
    elif isinstance(node, Neg):
        _check_types(node.operand)
    elif isinstance(node, Bin):
        _check_types(node.left)
        _check_types(node.right)
    elif isinstance(node, Call):
        for a in node.args:
            _check_types(a)
    elif isinstance(node, Piecewise):
        for guard, value in node.branches:
            _check_types(guard, in_guard=True)
            _check_types(value)


def parse_expression(source: str, variables=VARIABLES) -> Expression:
    """Parse a scalar expression; errors carry line/column positions."""
    parser = _Parser(_tokenize(source), tuple(variables))
    root = parser.comparison()
    if parser.cur.kind != "end":
        parser.fail(f"trailing input {parser.cur.text!r}")
    _check_types(root)
    return Expression(root, source, tuple(variables))


# --- evaluation ----------------------------------------------------------


def _as_array(value):
    return np.asarray(value, dtype=np.float64)


def _apply_gamma(arg):
    a = _as_array(arg)
    if np.any(a <= 0.0):
        raise EvaluationError("gamma of a non-positive argument")
    return _sp.gamma(a)


def _apply_sqrt(arg):
    a = _as_array(arg)
    if np.any(a < 0.0):
        raise EvaluationError("sqrt of a negative argument")
    return np.sqrt(a)


def _apply_ml(alpha, z):
    from .errors import DomainError, RangeError

    a = _as_array(alpha)
    if a.ndim != 0:
        raise EvaluationError("mittag_leffler order must be a scalar")
    zs = _as_array(z)
    try:
        flat = np.array(
            [mittag_leffler(float(a), float(val)) for val in np.atleast_1d(zs).ravel()]
        )
    except (DomainError, RangeError) as exc:
        raise EvaluationError(f"mittag_leffler: {exc}") from exc
    return flat.reshape(zs.shape) if zs.ndim else float(flat[0])


_SIMPLE_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "abs": np.abs,
}


def _power(base, exponent):
    b, e = _as_array(base), _as_array(exponent)
    with np.errstate(all="ignore"):
        out = np.power(b, e)
    bad = ~np.isfinite(out) & np.isfinite(b) & np.isfinite(e)
    if np.any(bad):
        raise EvaluationError("power produced a non-finite value (negative base or 0^negative?)")
    return out


def _divide(num, den):
    d = _as_array(den)
    if np.any(d == 0.0):
        raise EvaluationError("division by zero")
    return _as_array(num) / d


def evaluate(node, env):
    """Evaluate an AST node under ``env`` (scalars and/or same-shape arrays)."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        if node.name not in env:
            raise EvaluationError(f"unbound variable {node.name!r}")
        return env[node.name]
    if isinstance(node, Neg):
        return np.negative(evaluate(node.operand, env))
    if isinstance(node, Bin):
        left = evaluate(node.left, env)
        right = evaluate(node.right, env)
        if node.op == "+":
            return np.add(left, right)
        if node.op == "-":
            return np.subtract(left, right)
        if node.op == "*":
            return np.multiply(left, right)
        if node.op == "/":
            return _divide(left, right)
        if node.op == "^":
            return _power(left, right)
        raise EvaluationError(f"unknown operator {node.op!r}")
    if isinstance(node, Compare):
        left = _as_array(evaluate(node.left, env))
        right = _as_array(evaluate(node.right, env))
        return {
            "<": np.less,
            "<=": np.less_equal,
            ">": np.greater,
            ">=": np.greater_equal,
            "==": np.equal,
            "!=": np.not_equal,
        }[node.op](left, right)
    if isinstance(node, Call):
        args = [evaluate(a, env) for a in node.args]
        if node.name in _SIMPLE_FUNCS:
            return _SIMPLE_FUNCS[node.name](_as_array(args[0]))
        if node.name == "sqrt":
            return _apply_sqrt(args[0])
        if node.name == "gamma":
            return _apply_gamma(args[0])
        if node.name == "mittag_leffler":
            return _apply_ml(args[0], args[1])
        raise EvaluationError(f"unknown function {node.name!r}")
    if isinstance(node, Piecewise):
        return _evaluate_piecewise(node, env)
    raise EvaluationError(f"cannot evaluate node {node!r}")


def _evaluate_piecewise(node, env):
    # Broadcast the environment so branches can be evaluated only where
    # their guard holds (guarded expressions may be partial elsewhere).
    arrays = {k: _as_array(v) for k, v in env.items()}
    shape = np.broadcast_shapes(*(a.shape for a in arrays.values())) if arrays else ()
    if shape == ():
        for guard, value in node.branches:
            if bool(evaluate(guard, env)):
                return evaluate(value, env)
        raise EvaluationError("piecewise: no guard matched")
    env_b = {k: np.broadcast_to(a, shape) for k, a in arrays.items()}
    result = np.empty(shape, dtype=np.float64)
    remaining = np.ones(shape, dtype=bool)
    for guard, value in node.branches:
        gmask = np.asarray(evaluate(guard, env_b), dtype=bool) & remaining
        if not np.any(gmask):
            continue
        sub_env = {k: a[gmask] for k, a in env_b.items()}
        result[gmask] = _as_array(evaluate(value, sub_env))
        remaining &= ~gmask
        if not np.any(remaining):
            return result
    raise EvaluationError("piecewise: no guard matched")

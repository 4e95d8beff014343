"""Helpers for differential-testing the expression evaluator.

The reference interpreter translates the AST to Python source evaluated with
the math module: an independent execution path exercising the same language
semantics (gamma restricted to positive arguments, first-match piecewise,
errors on division by zero / negative even roots / complex powers).
"""

import math

from fracimp import expressions as ex


class RefError(Exception):
    pass


def _ref_gamma(x):
    if x <= 0:
        raise RefError("gamma domain")
    return math.gamma(x)


def _ref_sqrt(x):
    if x < 0:
        raise RefError("sqrt domain")
    return math.sqrt(x)


def _ref_ml(alpha, z):
    if not (0 < alpha <= 2):
        raise RefError("ml order")
    total = 1.0
    for k in range(1, 500):
        if z == 0.0:
            break
        log_term = k * math.log(abs(z)) - math.lgamma(alpha * k + 1.0)
        if log_term > 700.0:
            raise RefError("ml overflow")
        term = math.exp(log_term)
        if z < 0.0 and k % 2 == 1:
            term = -term
        total += term
        if log_term < -45.0 and k > 3:
            break
    return total


def _ref_no_match():
    raise RefError("piecewise: no guard matched")


def _ref_pow(base, exponent):
    result = base**exponent
    if isinstance(result, complex):
        raise RefError("complex power")
    return result


REF_GLOBALS = {
    "__builtins__": {},
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "abs": abs,
    "sqrt": _ref_sqrt,
    "gamma": _ref_gamma,
    "mittag_leffler": _ref_ml,
    "_no_match": _ref_no_match,
    "_pow": _ref_pow,
}


def to_python_source(node) -> str:
    if isinstance(node, ex.Num):
        return repr(node.value)
    if isinstance(node, ex.Var):
        return node.name
    if isinstance(node, ex.Neg):
        return f"(-({to_python_source(node.operand)}))"
    if isinstance(node, ex.Bin):
        if node.op == "^":
            return f"_pow(({to_python_source(node.left)}), ({to_python_source(node.right)}))"
        return f"(({to_python_source(node.left)}) {node.op} ({to_python_source(node.right)}))"
    if isinstance(node, ex.Compare):
        return f"(({to_python_source(node.left)}) {node.op} ({to_python_source(node.right)}))"
    if isinstance(node, ex.Call):
        args = ", ".join(to_python_source(a) for a in node.args)
        return f"{node.name}({args})"
    if isinstance(node, ex.Piecewise):
        out = "_no_match()"
        for guard, value in reversed(node.branches):
            out = f"(({to_python_source(value)}) if ({to_python_source(guard)}) else ({out}))"
        return out
    raise TypeError(f"unknown node {node!r}")


def reference_eval(expr: ex.Expression, env: dict) -> float:
    src = to_python_source(expr.root)
    value = eval(src, REF_GLOBALS, dict(env))  # noqa: S307 - sandboxed globals
    if isinstance(value, complex):
        raise RefError("complex result")
    value = float(value)
    if not math.isfinite(value):
        raise RefError("non-finite result")
    return value


def random_expression(rng, depth=3, variables=("tau", "x", "v")) -> str:
    """Random well-typed source text over the language grammar."""

    def leaf():
        if rng.random() < 0.5:
            return rng.choice(list(variables))
        v = rng.choice([0.0, 1.0, 2.0, 0.5, 3.0, 0.25, 1.5])
        return repr(float(v))

    def node(d):
        if d <= 0:
            return leaf()
        kind = rng.choice(
            ["bin", "bin", "bin", "neg", "call", "pow", "piecewise", "leaf", "paren"]
        )
        if kind == "leaf":
            return leaf()
        if kind == "neg":
            return f"-({node(d - 1)})"
        if kind == "paren":
            return f"({node(d - 1)})"
        if kind == "bin":
            op = rng.choice(["+", "-", "*", "/"])
            return f"{node(d - 1)} {op} {node(d - 1)}"
        if kind == "pow":
            # keep exponents small constants so both sides stay in range
            exp = rng.choice(["2", "3", "0.5", "(1/3)", "-1"])
            return f"({node(d - 1)})^{exp}"
        if kind == "call":
            fn = rng.choice(["sin", "cos", "exp", "abs", "sqrt", "gamma", "mittag_leffler"])
            if fn == "mittag_leffler":
                alpha = rng.choice(["0.5", "1", "1.5", "2"])
                return f"mittag_leffler({alpha}; {node(d - 1)})"
            return f"{fn}({node(d - 1)})"
        # piecewise with a catch-all final guard
        guard_op = rng.choice(["<", "<=", ">", ">="])
        return (
            f"piecewise({node(d - 1)} {guard_op} {node(d - 1)} : {node(d - 1)}, "
            f"0 <= abs({rng.choice(list(variables))}) : {node(d - 1)})"
        )

    return node(depth)

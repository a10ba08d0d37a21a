"""A small arithmetic expression language for functions on level coordinates.

Grammar: numbers, + - * / ** and parentheses, the nonlinearities named in
FUNCTIONS, local coordinates x0, x1, ..., and cross-level references
"level:<index>:<coord>" resolved against a member antichain.  Expressions
compile through sympy, so gradients are analytic.
"""
from __future__ import annotations

import re
from typing import Callable, Optional, Sequence

import numpy as np
import sympy
from sympy.core.function import AppliedUndef

from .cylinder import CylindricalFunction
from .family import ProfiniteFamily
from .maps import DifferentiableMap
from .poset import Section


class ExpressionError(ValueError):
    """Malformed or disallowed expression text."""


FUNCTIONS = {
    "sin": sympy.sin, "cos": sympy.cos, "tan": sympy.tan,
    "exp": sympy.exp, "log": sympy.log, "sqrt": sympy.sqrt,
    "tanh": sympy.tanh, "abs": sympy.Abs,
    "sqr": lambda u: u ** 2,
    "pi": sympy.pi,
}

_REF = re.compile(r"level:([^:\s()+\-*/,]+):([0-9]+)")
_ALLOWED = re.compile(r"^[A-Za-z0-9_+\-*/().,:\s]*$")


def parse_index_token(token: str):
    """Index tokens in references: integers when they look like one."""
    try:
        return int(token)
    except ValueError:
        return token


def _guard(text: str) -> None:
    if not _ALLOWED.match(text):
        raise ExpressionError(f"disallowed characters in {text!r}")
    if "__" in text:
        raise ExpressionError("double underscores are not allowed")


def _sympify(text: str, symbols: dict) -> sympy.Expr:
    local = dict(FUNCTIONS)
    local.update(symbols)
    try:
        expr = sympy.sympify(text, locals=local, convert_xor=False)
    except (sympy.SympifyError, SyntaxError, TypeError) as err:
        raise ExpressionError(f"cannot parse {text!r}: {err}") from err
    free = {str(s) for s in expr.free_symbols}
    unknown = free - set(symbols)
    if unknown:
        raise ExpressionError(f"unknown names in {text!r}: {sorted(unknown)}")
    undef = {type(f).__name__ for f in expr.atoms(AppliedUndef)}
    if undef:
        raise ExpressionError(f"unknown functions in {text!r}: {sorted(undef)}")
    return expr


def compile_scalar(dim: int, text: str) -> tuple:
    """(fn, grad) for an expression in local coordinates x0..x{dim-1}."""
    _guard(text)
    if _REF.search(text):
        raise ExpressionError("level references need a member antichain; "
                              "use cylindrical_from_expression")
    # real symbols keep derivatives of abs/sqrt printable for lambdify
    syms = sympy.symbols(f"x0:{dim}", real=True)
    table = {f"x{i}": syms[i] for i in range(dim)}
    expr = _sympify(text, table)
    grads = [sympy.diff(expr, s) for s in syms]
    f = sympy.lambdify(syms, expr, modules="numpy")
    g = sympy.lambdify(syms, grads, modules="numpy")

    def fn(x: np.ndarray) -> float:
        return float(f(*x))

    def grad(x: np.ndarray) -> np.ndarray:
        return np.asarray(g(*x), dtype=float)

    return fn, grad


def cylindrical_from_expression(family: ProfiniteFamily, members: Sequence,
                                text: str, name: str = "") -> CylindricalFunction:
    """Compile an expression over a member antichain into a cylindrical
    function with an analytic differential.

    Local names x0, x1, ... address the gathered member coordinates in
    order; "level:J:c" addresses coordinate c of member level J.
    """
    _guard(text)
    section = Section.of(family.poset, members)
    offsets, total = {}, 0
    for m in section:
        offsets[m] = total
        total += family.dim(m)

    def replace(match: re.Match) -> str:
        idx = parse_index_token(match.group(1))
        coord = int(match.group(2))
        for m in section:
            if m == idx:
                if coord >= family.dim(m):
                    raise ExpressionError(
                        f"coordinate {coord} out of range at level {m!r}")
                return f"x{offsets[m] + coord}"
        raise ExpressionError(f"level {idx!r} is not a member of the antichain")

    resolved = _REF.sub(replace, text)
    fn, grad = compile_scalar(total, resolved)
    base = DifferentiableMap(
        total, 1,
        fn=lambda x: np.array([fn(x)]),
        jac=lambda x: grad(x).reshape(1, total),
        name=name or text)
    return CylindricalFunction(family, section, base, name=name or text)

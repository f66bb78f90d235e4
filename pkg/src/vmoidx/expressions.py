"""Arithmetic expression strings for charts and fields.

The grammar is deliberately small: numbers, ``pi``, the declared variables,
``+ - * / **`` and the functions ``sin cos exp sqrt pow``.  Expressions are
parsed with sympy so that charts get exact derivatives, then compiled to
numpy callables.
"""
from __future__ import annotations

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import parse_expr, standard_transformations

from .errors import ConfigError

ALLOWED_FUNCTIONS = {
    "sin": sp.sin,
    "cos": sp.cos,
    "exp": sp.exp,
    "sqrt": sp.sqrt,
    "pow": sp.Pow,
}


def parse(text, variables):
    """Parse ``text`` into a sympy expression (or Tuple) over ``variables``."""
    symbols = {name: sp.Symbol(name, real=True) for name in variables}
    local = dict(ALLOWED_FUNCTIONS)
    local.update(symbols)
    local["pi"] = sp.pi
    try:
        expr = parse_expr(
            str(text), local_dict=local, global_dict={"Integer": sp.Integer,
                                                      "Float": sp.Float,
                                                      "Rational": sp.Rational,
                                                      "Symbol": sp.Symbol,
                                                      "Tuple": sp.Tuple},
            transformations=standard_transformations, evaluate=True,
        )
    except Exception as exc:  # sympy raises a zoo of types here
        raise ConfigError(f"cannot parse expression {text!r}: {exc}") from exc
    parts = expr if isinstance(expr, (tuple, sp.Tuple)) else (expr,)
    allowed_funcs = {sp.sin, sp.cos, sp.exp, sp.Pow}
    for part in parts:
        if not isinstance(part, sp.Basic):
            raise ConfigError(f"unsupported expression {text!r}")
        extra = part.free_symbols - set(symbols.values())
        if extra:
            raise ConfigError(f"unknown names {sorted(map(str, extra))} in {text!r}")
        for fn in part.atoms(sp.Function):
            if fn.func not in allowed_funcs:
                raise ConfigError(f"function {fn.func} not allowed in {text!r}")
    return sp.Tuple(*expr) if isinstance(expr, tuple) else expr


def symbols(variables):
    return tuple(sp.Symbol(name, real=True) for name in variables)


def compile_scalar(expr, variables):
    """Return a numpy function of ``len(variables)`` arrays that broadcasts."""
    syms = symbols(variables)
    fn = sp.lambdify(syms, expr, modules="numpy")

    def evaluate(*args):
        args = [np.asarray(a, dtype=float) for a in args]
        shape = np.broadcast_shapes(*(a.shape for a in args))
        out = np.asarray(fn(*args), dtype=float)
        return np.broadcast_to(out, shape).copy()

    return evaluate


def compile_vector(exprs, variables):
    """Compile a sequence of expressions into ``f(*args) -> (..., len(exprs))``."""
    parts = [compile_scalar(e, variables) for e in exprs]

    def evaluate(*args):
        return np.stack([p(*args) for p in parts], axis=-1)

    return evaluate


def vector_field(text, variables=("x", "y", "z"), dim=3):
    """Parse a comma separated vector expression, padding planar input with 0."""
    expr = parse(text if str(text).strip().startswith("(") else f"({text},)", variables)
    comps = list(expr) if isinstance(expr, sp.Tuple) else [expr]
    if len(comps) == 2 and dim == 3:
        comps.append(sp.Integer(0))
    if len(comps) != dim:
        raise ConfigError(f"expected {dim} components in {text!r}, got {len(comps)}")
    return compile_vector(comps, variables)

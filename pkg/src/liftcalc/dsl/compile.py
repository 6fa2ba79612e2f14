"""Turn expression trees into differentiable :class:`ScalarField` callables."""

from __future__ import annotations

import numpy as np

from .. import jet
from ..smooth import ScalarField
from .errors import DomainError
from .nodes import Call, Expr, Neg, Num, Var, to_string
from .parser import VarSpec, parse

_UNARY = {"sin": jet.sin, "cos": jet.cos, "exp": jet.exp, "ln": jet.log, "sqrt": jet.sqrt}


def _offending_point(p, mask) -> list[float]:
    coords = [np.asarray(jet.primal(c), dtype=float) for c in p]
    mask = np.asarray(mask)
    if mask.ndim == 0:
        return [float(np.ravel(c)[0]) for c in coords]
    shape = np.broadcast_shapes(mask.shape, *(c.shape for c in coords))
    idx = np.unravel_index(int(np.argmax(np.broadcast_to(mask, shape))), shape)
    return [float(np.broadcast_to(c, shape)[idx]) for c in coords]


def _guard(p, bad, what: str) -> None:
    if np.any(bad):
        raise DomainError(what, _offending_point(p, bad))


def _build(e: Expr, spec: VarSpec):
    if isinstance(e, Num):
        v = e.value
        return lambda p: v
    if isinstance(e, Var):
        i = spec.position(e)
        return lambda p: p[i]
    if isinstance(e, Neg):
        f = _build(e.operand, spec)
        return lambda p: -f(p)
    if isinstance(e, Call):
        f, g, name = _build(e.arg, spec), _UNARY[e.fn], e.fn

        if name == "ln":
            def call(p):
                a = f(p)
                _guard(p, jet.primal(a) <= 0, "ln of a non-positive number")
                return g(a)
        elif name == "sqrt":
            def call(p):
                a = f(p)
                _guard(p, jet.primal(a) < 0, "sqrt of a negative number")
                return g(a)
        else:
            def call(p):
                return g(f(p))
        return call

    fa, fb = _build(e.left, spec), _build(e.right, spec)
    if e.op == "+":
        return lambda p: fa(p) + fb(p)
    if e.op == "-":
        return lambda p: fa(p) - fb(p)
    if e.op == "*":
        return lambda p: fa(p) * fb(p)
    if e.op == "/":
        def div(p):
            b = fb(p)
            _guard(p, jet.primal(b) == 0, "division by zero")
            return fa(p) / b
        return div

    def power(p):
        a, b = fa(p), fb(p)
        if isinstance(b, jet.Jet):
            _guard(p, jet.primal(a) <= 0, "non-positive base with variable exponent")
            return a**b
        b = np.asarray(b, dtype=float)
        if np.all(b == np.round(b)):
            _guard(p, (jet.primal(a) == 0) & (b < 0), "zero raised to a negative power")
        else:
            _guard(p, jet.primal(a) < 0, "negative base with non-integer exponent")
        if isinstance(a, jet.Jet):
            return a ** (float(b) if b.ndim == 0 else b)
        return np.power(np.asarray(a, dtype=float), b)

    return power


def compile_expr(e: Expr, allowed_vars=None, label: str | None = None) -> ScalarField:
    spec = VarSpec.coerce({"x": 0} if allowed_vars is None else allowed_vars)
    fn = _build(e, spec)
    return ScalarField(spec.dim, fn, label=label or to_string(e))


def field(src: str, allowed_vars=None) -> ScalarField:
    """``compile_expr(parse(src))`` in one step."""
    return compile_expr(parse(src, allowed_vars), allowed_vars, label=src)

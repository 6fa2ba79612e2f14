"""Seeded sample points and random polynomial data.

All randomness flows through ``numpy.random.Generator(PCG64(seed))`` so that a
seed fixes every report bit for bit.
"""

from __future__ import annotations

import itertools

import numpy as np

from .dsl.compile import compile_expr
from .dsl.nodes import BinOp, Expr, Neg, Num, Var
from .dsl.parser import VarSpec


def rng(seed: int | None) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def points(gen: np.random.Generator, dim: int, count: int, box: float = 1.0) -> list[np.ndarray]:
    """``count`` uniform samples of ``[-box, box]^dim``, returned coordinate-wise."""
    return list(gen.uniform(-box, box, size=(dim, count)))


def _monomials(spec: VarSpec, degree: int):
    names = [Var(p, i) for p, c in spec.blocks for i in range(c)]
    for d in range(degree + 1):
        yield from itertools.combinations_with_replacement(names, d)


def _coeff(c: float) -> Expr:
    return Neg(Num(-c)) if c < 0 else Num(c)


def polynomial(gen: np.random.Generator, allowed_vars, degree: int = 2, density: float = 0.6, scale: float = 1.0) -> Expr:
    """Random polynomial with coefficients rounded to 3 decimals (so printed forms are short)."""
    spec = VarSpec.coerce(allowed_vars)
    terms: list[Expr] = []
    for mono in _monomials(spec, degree):
        if gen.random() > density:
            continue
        c = round(float(gen.uniform(-scale, scale)), 3)
        if c == 0.0:
            continue
        term = _coeff(c)
        for v in mono:
            term = BinOp("*", term, v)
        terms.append(term)
    if not terms:
        return Num(0.0)
    out = terms[0]
    for t in terms[1:]:
        out = BinOp("+", out, t)
    return out


def polynomial_field(gen, allowed_vars, degree: int = 2, density: float = 0.6, scale: float = 1.0):
    return compile_expr(polynomial(gen, allowed_vars, degree, density, scale), allowed_vars)


def polynomial_fields(gen, allowed_vars, count: int, degree: int = 2, density: float = 0.6, scale: float = 1.0):
    return [polynomial_field(gen, allowed_vars, degree, density, scale) for _ in range(count)]

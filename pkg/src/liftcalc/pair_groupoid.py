"""Vector fields on the pair groupoid ``M x M``.

An arrow is ``g = (y, x)`` with source ``alpha(g) = x`` and target ``beta(g) = y``;
``(z, y)(y, x) = (z, x)`` and ``1_m = (m, m)``.  A vector field on ``M x M`` is a
:class:`ChartVectorField` on ``2n`` coordinates ordered ``(y, x)``, whose two
component blocks are written ``xi1`` and ``xi2``.  The algebroid is ``TM``,
realized at ``1_m`` as the vectors ``(v, 0)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .lifts import LinearVectorField
from .report import max_abs
from .smooth import ChartVectorField, ConfigurationError, ScalarField, directional, lie_bracket, unit


class GroupoidCheckError(ValueError):
    """A structural precondition (star, affine, projectable, multiplicative) failed at the samples."""

    def __init__(self, what: str, residual: float):
        self.what = what
        self.residual = residual
        super().__init__(f"{what} check failed (residual {residual:.3g})")


@dataclass(frozen=True)
class PairGroupoid:
    n: int

    def alpha(self, g):
        return list(g[self.n :])

    def beta(self, g):
        return list(g[: self.n])

    def unit(self, m):
        return list(m) + list(m)

    def inverse(self, g):
        return self.alpha(g) + self.beta(g)

    def compose(self, h, g, atol: float = 1e-12):
        if max_abs([a - b for a, b in zip(self.alpha(h), self.beta(g))]) > atol:
            raise ConfigurationError("arrows are not composable")
        return self.beta(h) + self.alpha(g)

    def axioms_residual(self, z, y, x, w) -> float:
        """Unit, inverse and associativity laws on sampled arrows (exact for these formulas)."""
        g, h, k = list(y) + list(x), list(z) + list(y), list(w) + list(z)
        res = [
            np.subtract(self.compose(self.unit(y), g), g),
            np.subtract(self.compose(g, self.unit(x)), g),
            np.subtract(self.compose(self.inverse(g), g), self.unit(x)),
            np.subtract(self.compose(g, self.inverse(g)), self.unit(y)),
            np.subtract(self.compose(self.compose(k, h), g), self.compose(k, self.compose(h, g))),
        ]
        return max_abs(res)


def sample_triples(gen: np.random.Generator, n: int, count: int, box: float = 1.0):
    """Objects ``(z, y, x)`` of a composable pair ``(z, y), (y, x)``, each a list of ``n`` arrays."""
    return tuple([gen.uniform(-box, box, count) for _ in range(n)] for _ in range(3))


def _blocks(xi: ChartVectorField, n: int, y, x):
    v = xi.fn(list(y) + list(x))
    return v[:n], v[n:]


def _dim(xi: ChartVectorField) -> int:
    if xi.dim % 2 or xi.size != xi.dim:
        raise ConfigurationError(f"not a field on a pair groupoid: dimension {xi.dim}")
    return xi.dim // 2


# --- builders ----------------------------------------------------------------


def right_invariant(X: ChartVectorField) -> ChartVectorField:
    """``X->(y, x) = (X(y), 0)``."""
    n = X.dim
    return ChartVectorField(2 * n, lambda g: list(X.fn(g[:n])) + [0.0] * n)


def left_invariant(X: ChartVectorField) -> ChartVectorField:
    """``X<-(y, x) = (0, X(x))``."""
    n = X.dim
    return ChartVectorField(2 * n, lambda g: [0.0] * n + list(X.fn(g[n:])))


def product_field(x: ChartVectorField) -> ChartVectorField:
    """``x × x``, the multiplicative field over ``x``."""
    n = x.dim
    return ChartVectorField(2 * n, lambda g: list(x.fn(g[:n])) + list(x.fn(g[n:])))


def star_field(x: ChartVectorField, eta: Callable | None = None) -> ChartVectorField:
    """``(x(x) + eta(y, x) - eta(x, x), x(x))``: a star field over ``x`` for any smooth ``eta``.

    ``eta`` maps the ``2n`` coordinates to ``n`` values; the correction vanishes on
    identities, so the star clauses hold by construction.
    """
    n = x.dim

    def value(g):
        y, xx = g[:n], g[n:]
        base = x.fn(xx)
        first = list(base)
        if eta is not None:
            e, e0 = eta(list(y) + list(xx)), eta(list(xx) + list(xx))
            first = [b + p - q for b, p, q in zip(base, e, e0)]
        return first + list(base)

    return ChartVectorField(2 * n, value)


def base_field(xi: ChartVectorField) -> ChartVectorField:
    """``m -> xi2(m, m)``, the base field of a star field."""
    n = _dim(xi)
    return ChartVectorField(n, lambda m: xi.fn(list(m) + list(m))[n:])


# --- structural checks -------------------------------------------------------


def multiplicative_residual(xi: ChartVectorField, triples) -> float:
    n = _dim(xi)
    z, y, x = triples
    zx1, zx2 = _blocks(xi, n, z, x)
    zy1, zy2 = _blocks(xi, n, z, y)
    yx1, yx2 = _blocks(xi, n, y, x)
    xx1, xx2 = _blocks(xi, n, x, x)
    return max_abs([
        [a - b for a, b in zip(zx1, zy1)],  # first block of the product comes from h
        [a - b for a, b in zip(zx2, yx2)],  # second block from g
        [a - b for a, b in zip(zy2, yx1)],  # xi(h), xi(g) composable in TG
        [a - b for a, b in zip(xx1, xx2)],  # identities go to identities
    ])


def is_multiplicative(xi: ChartVectorField, triples, tol: float = 1e-9) -> tuple[bool, float]:
    res = multiplicative_residual(xi, triples)
    return res < tol, res


def star_residual(xi: ChartVectorField, x: ChartVectorField, y, xx) -> float:
    n = _dim(xi)
    if x.dim != n:
        raise ConfigurationError(f"base field has dimension {x.dim}, expected {n}")
    _, yx2 = _blocks(xi, n, y, xx)
    mm1, mm2 = _blocks(xi, n, xx, xx)
    xv = x.fn(list(xx))
    return max_abs([[a - b for a, b in zip(yx2, xv)], [a - b for a, b in zip(mm1, xv)], [a - b for a, b in zip(mm2, xv)]])


def is_star(xi: ChartVectorField, x: ChartVectorField, y, xx, tol: float = 1e-9) -> tuple[bool, float]:
    res = star_residual(xi, x, y, xx)
    return res < tol, res


def _require_star(xi, pts, tol):
    if pts is None:
        return
    y, xx = pts
    res = star_residual(xi, base_field(xi), y, xx)
    if not res < tol:
        raise GroupoidCheckError("star", res)


# --- D_xi and the Lie-functor lift -------------------------------------------


def diagonal_bracket(xi: ChartVectorField, X: ChartVectorField) -> Callable:
    """``m -> [xi, Xbar](m, m)`` for an extension ``Xbar`` (a field on ``2n``); both blocks."""
    br = lie_bracket(xi, X)
    return lambda m: br.fn(list(m) + list(m))


def d_xi(xi: ChartVectorField, X: ChartVectorField, pts=None, tol: float = 1e-9) -> ChartVectorField:
    """``D_xi(X)``: the algebroid block of ``[xi, X->]`` on identities.

    ``pts = (y, x)`` enables the star precondition check.
    """
    n = _dim(xi)
    _require_star(xi, pts, tol)
    at = diagonal_bracket(xi, right_invariant(X))
    return ChartVectorField(n, lambda m: at(m)[:n])


def lie_functor_lift(xi: ChartVectorField, pts=None, tol: float = 1e-9) -> LinearVectorField:
    """``(m, v) -> (xi2(m, m), d_y xi1(m, m) v)`` on ``TM``."""
    n = _dim(xi)
    _require_star(xi, pts, tol)

    def first(g):
        return xi.fn(g)[:n]

    def gt(m):
        g = list(m) + list(m)
        cols = [directional(first, g, unit(2 * n, b)) for b in range(n)]
        return [[cols[b][a] for b in range(n)] for a in range(n)]

    return LinearVectorField(base_field(xi), gt, n)


# --- affine fields -----------------------------------------------------------


def _affine_residual(xi, triples, jacobians: Sequence = ()) -> float:
    """Affine law along bisections through the composable pair, one per transport matrix.

    The identity matrix (translation bisections) is always included.
    """
    n = _dim(xi)
    z, y, x = triples
    zx1, zx2 = _blocks(xi, n, z, x)
    zy1, zy2 = _blocks(xi, n, z, y)
    yx1, yx2 = _blocks(xi, n, y, x)
    yy1, yy2 = _blocks(xi, n, y, y)
    mats = [np.eye(n)] + [np.asarray(J, dtype=float) for J in jacobians]
    res = []
    for J in mats:
        d1 = [a - b for a, b in zip(yx1, yy1)]
        d2 = [a - b for a, b in zip(zy2, yy2)]
        for i in range(n):
            res.append(zx1[i] - zy1[i] - sum(J[i][j] * d1[j] for j in range(n)))
            res.append(zx2[i] - yx2[i] - sum(J[i][j] * d2[j] for j in range(n)))
    return max_abs(res)


def projectability_residuals(xi: ChartVectorField, triples) -> tuple[float, float]:
    """``(alpha, beta)``: variation of ``xi2`` in ``y`` and of ``xi1`` in ``x``."""
    n = _dim(xi)
    z, y, x = triples
    _, zx2 = _blocks(xi, n, z, x)
    _, yx2 = _blocks(xi, n, y, x)
    zx1, _ = _blocks(xi, n, z, x)
    zy1, _ = _blocks(xi, n, z, y)
    return (max_abs([a - b for a, b in zip(zx2, yx2)]), max_abs([a - b for a, b in zip(zx1, zy1)]))


@dataclass
class AffineDecomposition:
    multiplicative: ChartVectorField
    invariant: ChartVectorField
    X: ChartVectorField
    residuals: dict


def affine_decompose(xi: ChartVectorField, triples, tol: float = 1e-9, jacobians: Sequence = ()) -> AffineDecomposition:
    """Split an affine, projectable field as ``eta + X->`` with ``eta`` multiplicative."""
    n = _dim(xi)
    aff = _affine_residual(xi, triples, jacobians)
    if not aff < tol:
        raise GroupoidCheckError("affine", aff)
    ra, rb = projectability_residuals(xi, triples)
    if not ra < tol:
        raise GroupoidCheckError("alpha-projectable", ra)
    if not rb < tol:
        raise GroupoidCheckError("beta-projectable", rb)

    def X_fn(m):
        v = xi.fn(list(m) + list(m))
        return [a - b for a, b in zip(v[:n], v[n:])]

    X = ChartVectorField(n, X_fn)
    Xr = right_invariant(X)
    eta = xi - Xr
    mres = multiplicative_residual(eta, triples)
    if not mres < tol:
        raise GroupoidCheckError("multiplicative part", mres)
    return AffineDecomposition(eta, Xr, X, {"affine": aff, "alpha": ra, "beta": rb, "multiplicative": mres})


# --- multiplicative functions ------------------------------------------------


def function_multiplicativity(F: ScalarField, triples) -> float:
    z, y, x = triples
    return max_abs(F.fn(list(z) + list(x)) - F.fn(list(z) + list(y)) - F.fn(list(y) + list(x)))


def multiplicative_function_check(F: ScalarField, xi: ChartVectorField, triples, tol: float = 1e-9) -> tuple[bool, float]:
    """``xi(F)`` is multiplicative whenever ``F`` and ``xi`` are."""
    pre = function_multiplicativity(F, triples)
    if not pre < tol:
        raise GroupoidCheckError("multiplicative function", pre)
    res = function_multiplicativity(xi.apply(F), triples)
    return res < tol, res


def pair_difference(f: ScalarField) -> ScalarField:
    """``f o beta - f o alpha``, the basic multiplicative function."""
    n = f.dim
    return ScalarField(2 * n, lambda g: f.fn(g[:n]) - f.fn(g[n:]))

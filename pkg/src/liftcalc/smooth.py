"""Scalar, vector, covector and bivector fields on a single global chart.

Fields are plain callables on a point, where a point is a sequence of
coordinate values.  A value may be a float, a numpy array (a batch of sample
points evaluated at once) or a :class:`~liftcalc.jet.Jet`, so every field can be
differentiated by evaluating it on jets, and derivatives of derivatives are
obtained by nesting.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .jet import Jet, fresh_tag, primal, split


class ConfigurationError(ValueError):
    """Objects of incompatible dimensions were combined."""


class DivergenceError(ArithmeticError):
    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"flow produced non-finite values at step {step}")


def _check_dim(expected: int, got: int, what: str) -> None:
    if expected != got:
        raise ConfigurationError(f"{what}: expected dimension {expected}, got {got}")


def as_point(coords) -> list:
    return [np.asarray(c, dtype=float) if not isinstance(c, Jet) else c for c in coords]


# --- differentiation helpers -------------------------------------------------


def jvp(fn: Callable, p: Sequence, v: Sequence):
    """Value and directional derivative of ``fn`` at ``p`` along ``v``.

    ``fn`` may return a single value or (nested) lists of values; the derivative has the
    same structure.
    """
    tag = fresh_tag()
    eps = Jet.variable(tag)
    shifted = [pi if (isinstance(vi, (int, float)) and vi == 0) else pi + vi * eps for pi, vi in zip(p, v)]
    return _split_nested(fn(shifted), tag)


def _split_nested(out, tag):
    if isinstance(out, (list, tuple)):
        pairs = [_split_nested(o, tag) for o in out]
        return [a for a, _ in pairs], [b for _, b in pairs]
    return split(out, tag)


def directional(fn: Callable, p: Sequence, v: Sequence):
    return jvp(fn, p, v)[1]


def unit(dim: int, j: int) -> list:
    return [1.0 if i == j else 0 for i in range(dim)]


def partials(fn: Callable, p: Sequence) -> list:
    """``[d fn / d x_j for j]`` at ``p``."""
    return [directional(fn, p, unit(len(p), j)) for j in range(len(p))]


# --- field types -------------------------------------------------------------


class ScalarField:
    """A smooth function on an open subset of ``R^dim``."""

    def __init__(self, dim: int, fn: Callable, label: str | None = None):
        self.dim = dim
        self.fn = fn
        self.label = label

    def __call__(self, p):
        return self.fn(p)

    def __repr__(self) -> str:
        return f"ScalarField(dim={self.dim}, {self.label or self.fn!r})"

    @classmethod
    def constant(cls, dim: int, value: float) -> ScalarField:
        return cls(dim, lambda p: value, label=repr(value))

    @classmethod
    def coordinate(cls, dim: int, i: int) -> ScalarField:
        return cls(dim, lambda p: p[i], label=f"x{i}")

    def eval(self, point):
        return primal(self.fn(as_point(point)))

    def jet(self, point, direction):
        """``(f, f', f'')`` of ``t -> f(point + t*direction)`` at ``t = 0``."""
        t1, t2 = fresh_tag(), fresh_tag()
        eps = Jet.variable(t1) + Jet.variable(t2)
        p = [pi + di * eps for pi, di in zip(as_point(point), direction)]
        value, first = split(self.fn(p), t1)
        value, _ = split(value, t2)
        first, second = split(first, t2)
        return value, first, second

    def partial(self, j: int) -> ScalarField:
        return ScalarField(self.dim, lambda p: directional(self.fn, p, unit(self.dim, j)))

    def _lift(self, other) -> ScalarField:
        if isinstance(other, ScalarField):
            _check_dim(self.dim, other.dim, "scalar field arithmetic")
            return other
        return ScalarField.constant(self.dim, other)

    def __add__(self, other):
        o = self._lift(other)
        return ScalarField(self.dim, lambda p: self.fn(p) + o.fn(p))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        return ScalarField(self.dim, lambda p: self.fn(p) - o.fn(p))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        return ScalarField(self.dim, lambda p: self.fn(p) * o.fn(p))

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField(self.dim, lambda p: -self.fn(p))


class _TupleField:
    """A field whose value at a point is a list of ``size`` numbers."""

    def __init__(self, dim: int, fn: Callable, size: int | None = None):
        self.dim = dim
        self.fn = fn
        self.size = dim if size is None else size

    def __call__(self, p) -> list:
        return self.fn(p)

    @classmethod
    def from_components(cls, comps: Sequence[ScalarField], dim: int | None = None):
        dim = comps[0].dim if dim is None else dim
        for c in comps:
            _check_dim(dim, c.dim, f"{cls.__name__} component")
        fns = [c.fn for c in comps]
        return cls(dim, lambda p: [f(p) for f in fns], size=len(comps))

    @classmethod
    def zero(cls, dim: int, size: int | None = None):
        size = dim if size is None else size
        return cls(dim, lambda p: [0.0] * size, size=size)

    @property
    def components(self) -> list[ScalarField]:
        return [ScalarField(self.dim, lambda p, i=i: self.fn(p)[i]) for i in range(self.size)]

    def eval(self, point) -> list:
        return [primal(v) for v in self.fn(as_point(point))]

    def _like(self, fn: Callable):
        return type(self)(self.dim, fn, self.size)

    def _combine(self, other, op):
        _check_dim(self.dim, other.dim, f"{type(self).__name__} arithmetic")
        _check_dim(self.size, other.size, f"{type(self).__name__} arithmetic")
        return self._like(lambda p: [op(a, b) for a, b in zip(self.fn(p), other.fn(p))])

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __neg__(self):
        return self._like(lambda p: [-a for a in self.fn(p)])

    def scaled(self, f) -> _TupleField:
        """Multiply by a number or a :class:`ScalarField`."""
        if isinstance(f, ScalarField):
            return self._like(lambda p: [f.fn(p) * a for a in self.fn(p)])
        return self._like(lambda p: [f * a for a in self.fn(p)])


class ChartVectorField(_TupleField):
    """Vector field ``x = x^i d/dx^i``."""

    def apply(self, f: ScalarField) -> ScalarField:
        """The derivative ``x(f)``."""
        _check_dim(self.dim, f.dim, "vector field applied to function")
        return ScalarField(self.dim, lambda p: directional(f.fn, p, self.fn(p)))


class ChartOneForm(_TupleField):
    """Covector field ``w = w_i dx^i``."""

    def pair(self, x: ChartVectorField) -> ScalarField:
        _check_dim(self.dim, x.dim, "pairing")
        return ScalarField(self.dim, lambda p: dot(self.fn(p), x.fn(p)))


class TwoForm:
    """Antisymmetric covariant 2-tensor; ``fn(p)`` returns the full matrix ``w_ij``."""

    def __init__(self, dim: int, fn: Callable):
        self.dim = dim
        self.fn = fn

    def __call__(self, p):
        return self.fn(p)

    def pair(self, u: ChartVectorField, v: ChartVectorField) -> ScalarField:
        def value(p):
            m, a, b = self.fn(p), u.fn(p), v.fn(p)
            return sum(a[i] * m[i][j] * b[j] for i in range(self.dim) for j in range(self.dim))

        return ScalarField(self.dim, value)


def upper_index(dim: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(dim) for j in range(i + 1, dim)]


class Bivector:
    """Antisymmetric contravariant 2-tensor ``pi^{ij}``.

    Only the entries with ``i < j`` are stored (row-major), so antisymmetry holds
    by construction.
    """

    def __init__(self, dim: int, upper_fn: Callable):
        self.dim = dim
        self.upper_fn = upper_fn
        self._pairs = upper_index(dim)

    @classmethod
    def from_components(cls, dim: int, upper: Sequence[ScalarField]) -> Bivector:
        if len(upper) != dim * (dim - 1) // 2:
            raise ConfigurationError(f"bivector on {dim}-space needs {dim * (dim - 1) // 2} entries, got {len(upper)}")
        fns = [u.fn for u in upper]
        return cls(dim, lambda p: [f(p) for f in fns])

    @classmethod
    def from_matrix_fn(cls, dim: int, matrix_fn: Callable) -> Bivector:
        pairs = upper_index(dim)
        return cls(dim, lambda p: (lambda m: [m[i][j] for i, j in pairs])(matrix_fn(p)))

    @classmethod
    def zero(cls, dim: int) -> Bivector:
        return cls(dim, lambda p: [0.0] * (dim * (dim - 1) // 2))

    def matrix(self, p) -> list[list]:
        m = [[0.0] * self.dim for _ in range(self.dim)]
        for (i, j), v in zip(self._pairs, self.upper_fn(p)):
            m[i][j] = v
            m[j][i] = -v
        return m

    def __neg__(self) -> Bivector:
        return Bivector(self.dim, lambda p: [-v for v in self.upper_fn(p)])

    def pair(self, w: ChartOneForm, t: ChartOneForm) -> ScalarField:
        """``pi(w, t) = w_i pi^{ij} t_j``."""

        def value(p):
            m, a, b = self.matrix(p), w.fn(p), t.fn(p)
            return sum(a[i] * m[i][j] * b[j] for i in range(self.dim) for j in range(self.dim))

        return ScalarField(self.dim, value)

    def schouten_residual(self, points) -> float:
        """Max over points of the Jacobi defect ``pi^{li} d_l pi^{jk} + cyclic``."""
        p = as_point(points)
        m = self.matrix(p)
        d = partials(self.matrix, p)  # d[l][j][k]
        worst = 0.0
        n = self.dim
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    r = sum(
                        m[l][i] * d[l][j][k] + m[l][j] * d[l][k][i] + m[l][k] * d[l][i][j] for l in range(n)
                    )
                    worst = max(worst, float(np.max(np.abs(primal(r)))))
        return worst


def dot(a: Sequence, b: Sequence):
    total = 0.0
    for x, y in zip(a, b):
        total = total + x * y
    return total


# --- operations --------------------------------------------------------------


def lie_bracket(x: ChartVectorField, y: ChartVectorField) -> ChartVectorField:
    """``[x, y]^i = x^j d_j y^i - y^j d_j x^i``."""
    _check_dim(x.dim, y.dim, "lie_bracket")
    _check_dim(x.size, y.size, "lie_bracket")

    def value(p):
        xp = x.fn(p)
        yp, dy = jvp(y.fn, p, xp)
        _, dx = jvp(x.fn, p, yp)
        return [a - b for a, b in zip(dy, dx)]

    return ChartVectorField(x.dim, value)


def interior(x: ChartVectorField, w: ChartOneForm) -> ScalarField:
    return w.pair(x)


def exterior_derivative(obj):
    """``df`` for a :class:`ScalarField`, ``dw`` (a :class:`TwoForm`) for a :class:`ChartOneForm`."""
    if isinstance(obj, ScalarField):
        return ChartOneForm(obj.dim, lambda p: partials(obj.fn, p))
    if isinstance(obj, ChartOneForm):
        n = obj.dim

        def value(p):
            d = partials(obj.fn, p)  # d[i][j] = d_i w_j
            return [[d[i][j] - d[j][i] for j in range(n)] for i in range(n)]

        return TwoForm(n, value)
    raise TypeError(f"exterior_derivative of {type(obj).__name__}")


def lie_derivative_form(x: ChartVectorField, w: ChartOneForm) -> ChartOneForm:
    """``L_x w``; equals ``d(i_x w) + i_x dw`` and is computed as ``x^j d_j w_k + w_j d_k x^j``."""
    _check_dim(x.dim, w.dim, "lie_derivative_form")

    def value(p):
        xp = x.fn(p)
        wp, dw = jvp(w.fn, p, xp)
        dx = partials(x.fn, p)  # dx[k][j] = d_k x^j
        return [dw[k] + dot(wp, dx[k]) for k in range(x.dim)]

    return ChartOneForm(x.dim, value)


def bivector_sharp(pi: Bivector, w: ChartOneForm) -> ChartVectorField:
    """``pi#(w) = pi(w, .)``, i.e. ``(pi# w)^i = w_j pi^{ji}``."""
    _check_dim(pi.dim, w.dim, "bivector_sharp")
    n = pi.dim

    def value(p):
        m, a = pi.matrix(p), w.fn(p)
        return [sum(a[j] * m[j][i] for j in range(n)) for i in range(n)]

    return ChartVectorField(n, value)


def lie_derivative_bivector(x: ChartVectorField, pi: Bivector) -> Bivector:
    """``(L_x pi)^{ij} = x(pi^{ij}) - pi^{kj} d_k x^i - pi^{ik} d_k x^j``."""
    _check_dim(x.dim, pi.dim, "lie_derivative_bivector")
    n = pi.dim
    pairs = upper_index(n)

    def value(p):
        xp = x.fn(p)
        m, dm = jvp(pi.matrix, p, xp)
        dx = partials(x.fn, p)  # dx[k][i] = d_k x^i
        return [
            dm[i][j] - sum(m[k][j] * dx[k][i] + m[i][k] * dx[k][j] for k in range(n)) for i, j in pairs
        ]

    return Bivector(n, value)


def flow_rk4(x: ChartVectorField, p, t: float, steps: int) -> list:
    """Time-``t`` flow of ``x`` from ``p`` by classical fixed-step Runge-Kutta."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    y = as_point(p)
    _check_dim(x.dim, len(y), "flow_rk4")
    h = t / steps

    def axpy(a, u, v):
        return [ui + a * vi for ui, vi in zip(u, v)]

    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, steps + 1):
            k1 = x.fn(y)
            k2 = x.fn(axpy(h / 2, y, k1))
            k3 = x.fn(axpy(h / 2, y, k2))
            k4 = x.fn(axpy(h, y, k3))
            y = [yi + h / 6 * (a + 2 * b + 2 * c + d) for yi, a, b, c, d in zip(y, k1, k2, k3, k4)]
            if not all(np.all(np.isfinite(primal(v))) for v in y):
                raise DivergenceError(step)
    return y

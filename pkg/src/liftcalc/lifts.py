"""Vector fields and 1-forms on the total space of a vector bundle ``A -> M``.

Total-space coordinates are ``(x^0..x^{n-1}, v^0..v^{k-1})``.  A linear vector
field is stored as its base field ``x`` and fiber matrix ``Gt`` (``Gt(m)[a][b]``),
so that ``xi(m, v) = (x(m), Gt(m) v)``.  The covariant differential operator it
induces on sections is ``D(X) = x(X) - Gt X``; the one on dual sections is
``D*(phi) = x(phi) + Gt^T phi``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .algebroid import CovDiffOp, DualSection, LieAlgebroid, SectionA
from .jet import Jet, primal
from .report import max_abs
from .smooth import (
    ChartOneForm,
    ChartVectorField,
    ConfigurationError,
    ScalarField,
    as_point,
    directional,
    dot,
    flow_rk4,
    jvp,
    lie_bracket,
    unit,
)


def _zero_matrix(k: int) -> list:
    return [[0.0] * k for _ in range(k)]


def _matvec(M, v) -> list:
    return [dot(row, v) for row in M]


def _transpose(M) -> list:
    return [list(col) for col in zip(*M)]


# --- total-space objects -----------------------------------------------------


@dataclass(frozen=True)
class TotalPoint:
    base: tuple
    fiber: tuple

    @property
    def coords(self) -> list:
        return list(self.base) + list(self.fiber)


class TotalSpaceField(ChartVectorField):
    """Vector field on the ``n + k``-dimensional total space."""

    def __init__(self, n: int, k: int, fn: Callable, size: int | None = None):
        super().__init__(n + k, fn)
        self.n, self.k = n, k

    @classmethod
    def wrap(cls, field: ChartVectorField, n: int, k: int) -> TotalSpaceField:
        if field.dim != n + k:
            raise ConfigurationError(f"field on {field.dim}-space is not on the total space of rank {k} over {n}-space")
        return cls(n, k, field.fn)

    def _like(self, fn: Callable):
        return TotalSpaceField(self.n, self.k, fn)


class TotalSpaceForm(ChartOneForm):
    """1-form on the total space with components ``(base_part, fiber_part)``."""

    def __init__(self, n: int, k: int, fn: Callable, size: int | None = None):
        super().__init__(n + k, fn)
        self.n, self.k = n, k

    def _like(self, fn: Callable):
        return TotalSpaceForm(self.n, self.k, fn)


def total_bracket(xi: ChartVectorField, eta: ChartVectorField) -> TotalSpaceField:
    n = getattr(xi, "n", None) or getattr(eta, "n")
    k = getattr(xi, "k", None) or getattr(eta, "k")
    return TotalSpaceField(n, k, lie_bracket(xi, eta).fn)


def pullback_function(f: ScalarField, k: int) -> ScalarField:
    """``f o q`` on the total space."""
    n = f.dim
    return ScalarField(n + k, lambda P: f.fn(P[:n]))


def fiberwise_linear(phi: DualSection) -> ScalarField:
    """``l_phi(m, v) = phi_a(m) v^a``."""
    n = phi.dim
    return ScalarField(n + phi.size, lambda P: dot(phi.fn(P[:n]), P[n:]))


def pullback_form(w: ChartOneForm, k: int) -> TotalSpaceForm:
    n = w.dim
    return TotalSpaceForm(n, k, lambda P: list(w.fn(P[:n])) + [0.0] * k)


# --- linear fields and CDOs --------------------------------------------------


class LinearVectorField:
    """``xi(m, v) = (x(m), Gt(m) v)``."""

    def __init__(self, base: ChartVectorField, fiber_matrix: Callable, k: int):
        self.base = base
        self.fiber_matrix = fiber_matrix
        self.n, self.k = base.dim, k

    def field_fn(self, P) -> list:
        n = self.n
        m, v = P[:n], P[n:]
        return list(self.base.fn(m)) + _matvec(self.fiber_matrix(m), v)

    def as_field(self) -> TotalSpaceField:
        return TotalSpaceField(self.n, self.k, self.field_fn)

    def __call__(self, P) -> list:
        return self.field_fn(P)

    def __add__(self, other: LinearVectorField) -> LinearVectorField:
        def gt(m):
            A, B = self.fiber_matrix(m), other.fiber_matrix(m)
            return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]

        return LinearVectorField(self.base + other.base, gt, self.k)

    def cdo(self) -> CovDiffOp:
        return cdo_from_linear(self)

    def apply_dual_fn(self, phi: Callable) -> Callable:
        """``D*(phi)``, characterized by ``xi(l_phi) = l_{D*(phi)}``."""

        def value(m):
            ph, dph = jvp(phi, m, self.base.fn(m))
            Gt = self.fiber_matrix(m)
            return [dph[b] + sum(ph[a] * Gt[a][b] for a in range(self.k)) for b in range(self.k)]

        return value


def linear_from_cdo(D: CovDiffOp) -> LinearVectorField:
    def gt(m):
        return [[-g for g in row] for row in D.gamma(m)]

    return LinearVectorField(D.base, gt, D.k)


def cdo_from_linear(xi: LinearVectorField) -> CovDiffOp:
    def gamma(m):
        return [[-g for g in row] for row in xi.fiber_matrix(m)]

    return CovDiffOp(xi.base, gamma, xi.k)


def linear_part(xi: ChartVectorField, n: int, k: int) -> LinearVectorField:
    """Read off ``(x, Gt)`` from a field assumed linear: base part on the zero section, fiber Jacobian there."""

    def base(m):
        return xi.fn(list(m) + [0.0] * k)[:n]

    def gt(m):
        P = list(m) + [0.0] * k
        cols = [directional(lambda Q: xi.fn(Q)[n:], P, unit(n + k, n + b)) for b in range(k)]
        return _transpose(cols)

    return LinearVectorField(ChartVectorField(n, base), gt, k)


def vertical_lift(X: SectionA) -> TotalSpaceField:
    """Core field ``X^(m, v) = (0, X(m))``."""
    n, k = X.dim, X.size
    return TotalSpaceField(n, k, lambda P: [0.0] * n + list(X.fn(P[:n])))


def translation_tau(at: TotalPoint, Y: TotalPoint, atol: float = 1e-12) -> list:
    """Tangent vector at ``at`` that is vertical and parallel to ``Y`` (same base point required)."""
    if len(at.base) != len(Y.base) or any(not np.allclose(a, b, atol=atol) for a, b in zip(at.base, Y.base)):
        raise ConfigurationError("translation_tau: points lie over different base points")
    return [0.0] * len(at.base) + list(Y.fiber)


def complete_lift(A: LieAlgebroid, X: SectionA) -> LinearVectorField:
    """Linear field over ``a(X)`` whose CDO is ``[X, .]``.

    ``[X, Y]^c = a(X)(Y^c) + Gamma^c_b Y^b`` with ``Gamma^c_b = C^c_ab X^a - a(e_b)(X^c)``.
    """
    k = A.k

    def gamma(m):
        Xm = X.fn(m)
        G = _zero_matrix(k)
        if not A.zero_anchor:
            anchor = A.anchor(m)
            for b in range(k):
                dX = directional(X.fn, m, anchor[b])
                for c in range(k):
                    G[c][b] = G[c][b] - dX[c]
        for a, b, c, v in A.structure(m):
            G[c][b] = G[c][b] + v * Xm[a]
            G[c][a] = G[c][a] - v * Xm[b]
        return G

    D = CovDiffOp(A.anchor_apply(X), gamma, k)
    return linear_from_cdo(D)


def intrinsic_derivative(xi: LinearVectorField, X: SectionA, m) -> list:
    """``D_xi(X)(m)``."""
    return cdo_from_linear(xi).apply_fn(X.fn)(as_point(m))


def intrinsic_derivative_residual(xi: LinearVectorField, X: SectionA, m, zero_tol: float = 1e-12) -> float:
    """Compare ``tau(X(m), D(X)(m))`` with ``T(X)(x(m)) - xi(X(m))`` at points where ``X(m) = 0``."""
    m = as_point(m)
    Xm, dX = jvp(X.fn, m, xi.base.fn(m))
    if max_abs(Xm) > zero_tol:
        raise ConfigurationError("intrinsic_derivative_residual: X does not vanish at the sample points")
    lhs = [0.0] * xi.n + intrinsic_derivative(xi, X, m)
    tx = list(xi.base.fn(m)) + list(dX)
    rhs = [a - b for a, b in zip(tx, xi.field_fn(list(m) + list(Xm)))]
    return max_abs([a - b for a, b in zip(lhs, rhs)])


def intrinsic_derivative_flow(xi: LinearVectorField, X: SectionA, m, h: float = 1e-3, steps: int = 8) -> list:
    """``d/dt (X(f_t(m)) - phi_t(X(m)))`` at 0, by central differences of RK4 flows."""
    m = as_point(m)
    n = xi.n
    start = list(m) + list(X.fn(m))
    field = xi.as_field()

    def fiber_gap(t):
        P = flow_rk4(field, start, t, steps)
        return [a - b for a, b in zip(X.fn(P[:n]), P[n:])]

    plus, minus = fiber_gap(h), fiber_gap(-h)
    return [(a - b) / (2 * h) for a, b in zip(plus, minus)]


def is_linear(xi: ChartVectorField, n: int, k: int, pts, gen, tol: float = 1e-9) -> tuple[bool, float]:
    """Sampled additivity and homogeneity of ``xi`` in the fiber variables."""
    m = list(pts[:n])
    count = np.shape(primal(m[0]))
    v = [gen.uniform(-1, 1, size=count) for _ in range(k)]
    w = [gen.uniform(-1, 1, size=count) for _ in range(k)]
    t = gen.uniform(-2, 2, size=count)

    def at(fib):
        out = xi.fn(m + fib)
        return out[:n], out[n:]

    bv, cv = at(v)
    bw, cw = at(w)
    bs, cs = at([a + b for a, b in zip(v, w)])
    bt, ct = at([t * a for a in v])
    b0, c0 = at([np.zeros(count) for _ in range(k)])
    res = max(
        max_abs([a - b for a, b in zip(bv, bw)]),
        max_abs([a - b for a, b in zip(bs, bv)]),
        max_abs([a - b for a, b in zip(bt, b0)]),
        max_abs([s - a - b for s, a, b in zip(cs, cv, cw)]),
        max_abs([s - t * a for s, a in zip(ct, cv)]),
    )
    return res < tol, res


# --- tangent pairing and duals -----------------------------------------------


@dataclass
class TangentVector:
    """Tangent vector to a total space at ``at`` with components ``(base, fiber)``."""

    at: TotalPoint
    base: Sequence
    fiber: Sequence

    def apply(self, F: ScalarField):
        return directional(F.fn, self.at.coords, list(self.base) + list(self.fiber))


def tangent_pairing(frak: TangentVector, xi: TangentVector, X: SectionA | None = None, phi: DualSection | None = None, atol: float = 1e-12):
    """``<<frak, xi>> = frak(l_X) + xi(l_phi) - x<phi, X>`` for sections ``X``, ``phi`` through the two feet.

    ``frak`` is tangent to ``A*`` at ``phi_m``, ``xi`` tangent to ``A`` at ``X_m``; missing sections default to
    the constant extensions.
    """
    n = len(xi.at.base)
    if any(not np.allclose(a, b, atol=atol) for a, b in zip(frak.base, xi.base)) or any(
        not np.allclose(a, b, atol=atol) for a, b in zip(frak.at.base, xi.at.base)
    ):
        raise ConfigurationError("tangent_pairing: vectors do not project to the same base tangent vector")
    Xm, phim = list(xi.at.fiber), list(frak.at.fiber)
    if X is None:
        X = SectionA(n, lambda p: list(Xm), len(Xm))
    if phi is None:
        phi = DualSection(n, lambda p: list(phim), len(phim))
    m = list(xi.at.base)
    lx = fiberwise_linear(DualSection(n, X.fn, X.size))  # l_X on A*
    lphi = fiberwise_linear(phi)
    return frak.apply(lx) + xi.apply(lphi) - directional(lambda p: dot(phi.fn(p), X.fn(p)), m, list(xi.base))


def tangent_pairing_curve(frak: TangentVector, xi: TangentVector):
    """Pairing from the curve definition: derivative of ``<phi_t, X_t>`` = ``<dphi, X> + <phi, dX>``."""
    return dot(frak.fiber, xi.at.fiber) + dot(frak.at.fiber, xi.fiber)


def dual_linear_field(xi: LinearVectorField) -> LinearVectorField:
    """The linear field on ``A*`` with base ``x`` and CDO ``D*``: fiber matrix ``-Gt^T``."""

    def gt(m):
        return [[-g for g in row] for row in _transpose(xi.fiber_matrix(m))]

    return LinearVectorField(xi.base, gt, xi.k)


def decompose(Xi: ChartVectorField, at, star_basis: Sequence[LinearVectorField], n: int, k: int):
    """Split ``Xi(at) = sum_j c_j xi_j(at) + Y^(at)``.

    ``at`` is a list of ``n + k`` coordinate arrays (a batch of points).  Returns
    ``(coefficients, remainder, condition)`` where ``remainder`` is the fiber
    vector ``Y`` and ``condition`` the worst condition number of the base solve.
    """
    P = as_point(at)
    target = Xi.fn(P)
    basis_vals = [xi.field_fn(P) for xi in star_basis]
    flat = np.broadcast_arrays(*[np.asarray(primal(c), float) for vals in [target, *basis_vals] for c in vals[:n]])
    rhs = np.stack(flat[:n], axis=-1)
    B = np.stack([np.stack(flat[n * (j + 1) : n * (j + 2)], axis=-1) for j in range(len(star_basis))], axis=-1)
    cond = float(np.max(np.linalg.cond(B))) if B.size else 0.0
    if not np.isfinite(cond) or cond > 1e12:
        raise np.linalg.LinAlgError(f"decompose: star basis does not span the base tangent space (condition {cond:.3g})")
    if B.shape[-1] == B.shape[-2]:
        coeffs = np.linalg.solve(B, rhs[..., None])[..., 0]
    else:
        coeffs = np.stack([np.linalg.lstsq(b, r, rcond=None)[0] for b, r in zip(B.reshape(-1, *B.shape[-2:]), rhs.reshape(-1, n))]).reshape(rhs.shape[:-1] + (B.shape[-1],))
    c = [coeffs[..., j] for j in range(len(star_basis))]
    remainder = [target[n + a] - sum(c[j] * basis_vals[j][n + a] for j in range(len(star_basis))) for a in range(k)]
    return c, remainder, cond


def recompose(coefficients, remainder, star_basis: Sequence[LinearVectorField], at, n: int) -> list:
    P = as_point(at)
    vals = [xi.field_fn(P) for xi in star_basis]
    out = [sum(c * v[i] for c, v in zip(coefficients, vals)) for i in range(len(P))]
    for a, r in enumerate(remainder):
        out[n + a] = out[n + a] + r
    return out


# --- morphic fields ----------------------------------------------------------


def derivation_defect(A: LieAlgebroid, D: CovDiffOp, X: SectionA, Y: SectionA) -> Callable:
    """``D[X,Y] - [DX,Y] - [X,DY]`` as a pointwise callable."""
    DX, DY = D.apply_fn(X.fn), D.apply_fn(Y.fn)
    lhs = D.apply_fn(A.bracket_fn(X.fn, Y.fn))
    r1, r2 = A.bracket_fn(DX, Y.fn), A.bracket_fn(X.fn, DY)

    def value(p):
        return [a - b - c for a, b, c in zip(lhs(p), r1(p), r2(p))]

    return value


def anchor_defect(A: LieAlgebroid, D: CovDiffOp, X: SectionA) -> Callable:
    """``a(D X) - [x, a(X)]``."""
    aX = A.anchor_apply(X)
    br = lie_bracket(D.base, aX)
    DX = D.apply_fn(X.fn)

    def value(p):
        return [u - w for u, w in zip(A.anchor_values(p, DX(p)), br.fn(p))]

    return value


def is_morphic(A: LieAlgebroid, xi: LinearVectorField, pts, tol: float = 1e-7, sections: Sequence[SectionA] = ()) -> tuple[bool, dict]:
    """Derivation test for ``D_xi`` plus anchor compatibility, on basis and given sections."""
    D = cdo_from_linear(xi)
    battery = [A.basis(a) for a in range(A.k)] + list(sections)
    deriv = 0.0
    for i in range(len(battery)):
        for j in range(i + 1, len(battery)):
            deriv = max(deriv, max_abs(derivation_defect(A, D, battery[i], battery[j])(pts)))
    anchor = max(max_abs(anchor_defect(A, D, X)(pts)) for X in battery)
    residuals = {"derivation": deriv, "anchor": anchor}
    return max(residuals.values()) < tol, residuals


# --- linear 1-forms ----------------------------------------------------------


def linear_oneform_pairings(
    phi: DualSection,
    family: Sequence[LinearVectorField],
    values: Sequence[Callable],
    n: int,
    k: int,
) -> TotalSpaceForm:
    """The 1-form ``U`` on ``A`` with ``<U, X^> = <phi, X> o q`` and ``<U, xi_j> = values[j]``.

    The base parts of ``family`` must span the base tangent space at every point.
    """

    def form(P):
        ph = phi.fn(P[:n])
        rows, rhs = [], []
        for xi, F in zip(family, values):
            vals = xi.field_fn(P)
            rows.append(vals[:n])
            rhs.append(F(P) - dot(ph, vals[n:]))
        base = _solve(rows, rhs, n)
        return base + list(ph)

    return TotalSpaceForm(n, k, form)


def _solve(rows: list, rhs: list, n: int) -> list:
    """Solve ``sum_i rows[j][i] b_i = rhs[j]`` for ``b`` pointwise; entries may be jets."""
    if any(isinstance(x, Jet) for r in rows for x in r) or any(isinstance(x, Jet) for x in rhs):
        return _solve_symbolic(rows, rhs, n)
    M = np.stack(np.broadcast_arrays(*[np.asarray(x, float) for r in rows for x in r]), axis=-1)
    M = M.reshape(M.shape[:-1] + (len(rows), n))
    b = np.stack(np.broadcast_arrays(*[np.asarray(x, float) for x in rhs]), axis=-1)
    if len(rows) == n:
        sol = np.linalg.solve(M, b[..., None])[..., 0]
    else:
        sol = np.einsum("...ij,...j->...i", np.linalg.pinv(M), b)
    return [sol[..., i] for i in range(n)]


def _solve_symbolic(rows: list, rhs: list, n: int) -> list:
    """Gauss-Jordan elimination on square systems of jets, pivoting on primal magnitude."""
    if len(rows) != n:
        raise ConfigurationError("jet-valued solves need a square system")
    M = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: float(np.min(np.abs(primal(M[r][col])))))
        M[col], M[piv] = M[piv], M[col]
        for r in range(n):
            if r != col:
                f = M[r][col] / M[col][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [M[i][n] / M[i][i] for i in range(n)]


# --- flows -------------------------------------------------------------------


def flow_linearity_defect(field: ChartVectorField, n: int, k: int, m, v, w, t: float, steps: int) -> dict:
    """How far the time-``t`` flow is from a vector bundle morphism, sampled at fibers ``v``, ``w``.

    ``defect`` measures failure of fiber-affinity (including base dependence on the
    fiber point); ``offset`` is the image of the zero vector, nonzero for affine flows.
    """
    m = list(as_point(m))

    def F(fib):
        return flow_rk4(field, m + list(fib), t, steps)

    zero = [0.0 * np.asarray(primal(c)) for c in v]
    F0, Fv, Fw = F(zero), F(v), F(w)
    Fs = F([a + b for a, b in zip(v, w)])
    F2 = F([2.0 * a for a in v])
    base = max_abs([[a - b for a, b in zip(X[:n], F0[:n])] for X in (Fv, Fw, Fs, F2)])
    add = max_abs([s - a - b + z for s, a, b, z in zip(Fs[n:], Fv[n:], Fw[n:], F0[n:])])
    hom = max_abs([d - 2.0 * a + z for d, a, z in zip(F2[n:], Fv[n:], F0[n:])])
    return {"defect": max(base, add, hom), "offset": max_abs(F0[n:]), "endpoint": Fv}


def dual_flow_pairing_defect(xi: LinearVectorField, m, v, phi, t: float, steps: int) -> float:
    """``<phi_t, v_t> - <phi, v>`` for the flows of ``xi`` and of its dual field from the same base point."""
    m = list(as_point(m))
    P = flow_rk4(xi.as_field(), m + list(v), t, steps)
    Q = flow_rk4(dual_linear_field(xi).as_field(), m + list(phi), t, steps)
    n = xi.n
    return max_abs([dot(Q[n:], P[n:]) - dot(phi, v), *[a - b for a, b in zip(P[:n], Q[:n])]])

"""The fiberwise-linear Poisson structure on the dual ``A*`` of a Lie algebroid.

Coordinates on ``A*`` are ``(x^i, xi_a)``; the structure is generated by

    {xi_a, xi_b} = C^c_ab xi_c,   {xi_a, x^i} = a^i_a,   {x^i, x^j} = 0,

which makes ``{l_X, l_Y} = l_[X,Y]`` and ``{l_X, f o q} = a(X)(f) o q`` with
``l_X = X^a xi_a``.  Sharp maps follow ``P#(w)^J = w_I P^{IJ}``, so the
Hamiltonian field of ``F`` is ``(dF)# = {F, .}``.
"""

from __future__ import annotations

import itertools
from typing import Callable

from .algebroid import DualSection, LieAlgebroid, SectionA, cotangent_algebroid
from .lifts import TotalSpaceField, TotalSpaceForm
from .report import max_abs
from .smooth import (
    Bivector,
    ChartOneForm,
    ChartVectorField,
    ConfigurationError,
    ScalarField,
    dot,
    jvp,
    lie_derivative_bivector,
    partials,
)


class LinearPoisson:
    """Poisson structure on ``A*``, derived from the algebroid on every evaluation."""

    def __init__(self, A: LieAlgebroid):
        self.A = A
        self.n, self.k = A.n, A.k
        self.dim = A.n + A.k

    def matrix(self, P) -> list:
        n, k = self.n, self.k
        m, xi = P[:n], P[n:]
        M = [[0.0] * self.dim for _ in range(self.dim)]
        if not self.A.zero_anchor:
            anchor = self.A.anchor(m)
            for a in range(k):
                for i in range(n):
                    M[n + a][i] = anchor[a][i]
                    M[i][n + a] = -anchor[a][i]
        for a, b, c, v in self.A.structure(m):
            M[n + a][n + b] = M[n + a][n + b] + v * xi[c]
            M[n + b][n + a] = M[n + b][n + a] - v * xi[c]
        return M

    def bivector(self) -> Bivector:
        return Bivector.from_matrix_fn(self.dim, self.matrix)

    def _check(self, F: ScalarField) -> None:
        if F.dim != self.dim:
            raise ConfigurationError(f"function on {F.dim}-space, expected the {self.dim}-dimensional dual total space")

    def sharp_fn(self, w: Callable) -> Callable:
        def value(P):
            wp, M = w(P), self.matrix(P)
            return [sum(wp[I] * M[I][J] for I in range(self.dim)) for J in range(self.dim)]

        return value

    def sharp(self, w: ChartOneForm) -> TotalSpaceField:
        return TotalSpaceField(self.n, self.k, self.sharp_fn(w.fn))

    def hamiltonian_field(self, F: ScalarField) -> TotalSpaceField:
        """``H_F = {F, .}``, i.e. ``H_F^J = P^{IJ} d_I F``."""
        self._check(F)
        return TotalSpaceField(self.n, self.k, self.sharp_fn(lambda P: partials(F.fn, P)))

    def bracket(self, F: ScalarField, G: ScalarField) -> ScalarField:
        self._check(F)
        self._check(G)
        H = self.hamiltonian_field(F)
        return ScalarField(self.dim, lambda P: jvp(G.fn, P, H.fn(P))[1])

    def koszul(self, w: ChartOneForm, t: ChartOneForm) -> ChartOneForm:
        from .poisson_pair import koszul_bracket

        return koszul_bracket(self.bivector(), w, t)

    def jacobi_residual(self, P) -> float:
        return self.bivector().schouten_residual(P)


def linear_function(X: SectionA) -> ScalarField:
    """``l_X(m, xi) = X^a(m) xi_a`` on ``A*``."""
    n = X.dim
    return ScalarField(n + X.size, lambda P: dot(X.fn(P[:n]), P[n:]))


def pullback_function(f: ScalarField, k: int) -> ScalarField:
    n = f.dim
    return ScalarField(n + k, lambda P: f.fn(P[:n]))


def poisson_bracket(A: LieAlgebroid, F: ScalarField, G: ScalarField) -> ScalarField:
    return LinearPoisson(A).bracket(F, G)


def hamiltonian_field(A: LieAlgebroid, F: ScalarField) -> TotalSpaceField:
    return LinearPoisson(A).hamiltonian_field(F)


def pullback_form_dual(w: ChartOneForm, k: int) -> TotalSpaceForm:
    n = w.dim
    return TotalSpaceForm(n, k, lambda P: list(w.fn(P[:n])) + [0.0] * k)


def vertical_lift_dual(phi: DualSection) -> TotalSpaceField:
    n, k = phi.dim, phi.size
    return TotalSpaceField(n, k, lambda P: [0.0] * n + list(phi.fn(P[:n])))


def anchor_transpose(A: LieAlgebroid, w: ChartOneForm) -> DualSection:
    """``a*(w)_a = w_i a^i_a``."""
    return DualSection(A.n, lambda m: [dot(w.fn(m), col) for col in A.anchor(m)], A.k)


def poisson_defect(PS: LinearPoisson, V: ChartVectorField) -> Callable:
    """``V{z^I,z^J} - {V z^I, z^J} - {z^I, V z^J}`` for all coordinate pairs ``I < J``."""
    d = PS.dim

    def value(P):
        Vp = V.fn(P)
        M, dM = jvp(PS.matrix, P, Vp)
        dV = partials(V.fn, P)  # dV[K][I] = d_K V^I
        out = []
        for I, J in itertools.combinations(range(d), 2):
            first = sum(dV[K][I] * M[K][J] for K in range(d))  # {V^I, z^J}
            second = sum(dV[K][J] * M[I][K] for K in range(d))  # {z^I, V^J}
            out.append(dM[I][J] - first - second)
        return out

    return value


def is_poisson_field(A: LieAlgebroid, V: ChartVectorField, pts, tol: float = 1e-7) -> tuple[bool, float]:
    """Derivation test on the generating family ``{l_(e_a), q* x^i}`` at ``pts`` (points of ``A*``)."""
    res = max_abs(poisson_defect(LinearPoisson(A), V)(pts))
    return res < tol, res


def coisotropy_residual(A: LieAlgebroid, phi: DualSection, base_pts) -> float:
    """Max of ``{l_X - q* <phi,X>, l_Y - q* <phi,Y>}`` over basis pairs on the graph of ``phi``."""
    PS = LinearPoisson(A)
    n, k = A.n, A.k
    gens = []
    for a in range(k):
        gens.append(ScalarField(n + k, lambda P, a=a: P[n + a] - phi.fn(P[:n])[a]))
    graph = list(base_pts) + list(phi.fn(list(base_pts)))
    worst = 0.0
    for a, b in itertools.combinations(range(k), 2):
        worst = max(worst, max_abs(PS.bracket(gens[a], gens[b]).fn(graph)))
    return worst


def is_coisotropic_graph(A: LieAlgebroid, phi: DualSection, base_pts, tol: float = 1e-9) -> dict:
    """Coisotropy of ``im(phi)`` by the vanishing-ideal test, alongside the independent ``d phi`` test."""
    bracket_res = coisotropy_residual(A, phi, base_pts)
    dphi_res = 0.0
    for a, b in itertools.combinations(range(A.k), 2):
        dphi_res = max(dphi_res, max_abs(A.d_phi(phi, A.basis(a), A.basis(b)).fn(list(base_pts))))
    coiso, closed = bracket_res < tol, dphi_res < tol
    return {
        "coisotropic": coiso,
        "closed": closed,
        "bracket_residual": bracket_res,
        "dphi_residual": dphi_res,
        "agree": coiso == closed,
    }


def tangent_poisson(pi: Bivector) -> LinearPoisson:
    """Poisson structure on ``TP`` dual to the cotangent algebroid of ``pi``."""
    return LinearPoisson(cotangent_algebroid(pi))


def poisson_field_via_tangent_coisotropy(pi: Bivector, X: ChartVectorField, base_pts, tol: float = 1e-9, jacobi_tol: float = 1e-9) -> dict:
    """Coisotropy of ``im(X)`` in ``TP`` versus ``L_X pi = 0``."""
    jac = pi.schouten_residual(list(base_pts))
    if jac >= jacobi_tol:
        raise ConfigurationError(f"bivector fails the Jacobi identity (residual {jac:.3g})")
    A = cotangent_algebroid(pi)
    section = DualSection(pi.dim, X.fn, pi.dim)
    coiso = coisotropy_residual(A, section, base_pts)
    lie = max_abs(lie_derivative_bivector(X, pi).upper_fn(list(base_pts)))
    return {
        "coisotropic": coiso < tol,
        "poisson": lie < tol,
        "bracket_residual": coiso,
        "lie_derivative_residual": lie,
        "agree": (coiso < tol) == (lie < tol),
    }

"""Lie algebroids trivialized over a chart.

A :class:`LieAlgebroid` of rank ``k`` over ``n``-space is given by its anchor
matrix ``a^i_a(m)`` and structure functions ``C^c_ab(m)`` in the global frame
``e_a``.  The bracket of sections is then

    [X, Y]^c = C^c_ab X^a Y^b + a(X)(Y^c) - a(Y)(X^c).
"""

from __future__ import annotations

import itertools
from typing import Callable, Sequence

import numpy as np

from . import sampling
from .report import CheckResult, check, max_abs
from .smooth import (
    Bivector,
    ChartVectorField,
    ConfigurationError,
    ScalarField,
    _TupleField,
    dot,
    jvp,
    lie_bracket,
    partials,
    upper_index,
)


class SectionA(_TupleField):
    """Section ``X = X^a e_a``; ``dim`` is the base dimension, ``size`` the rank."""


class DualSection(_TupleField):
    """Section ``phi = phi_a eps^a`` of the dual bundle."""

    def pair(self, X: SectionA) -> ScalarField:
        return ScalarField(self.dim, lambda p: dot(self.fn(p), X.fn(p)))


def constant_section(n: int, values: Sequence[float], cls=SectionA):
    vals = list(values)
    return cls(n, lambda p: list(vals), size=len(vals))


def basis_section(n: int, k: int, a: int, cls=SectionA):
    return constant_section(n, [1.0 if b == a else 0.0 for b in range(k)], cls)


StructureEntries = list  # [(a, b, c, value)] with a < b


class LieAlgebroid:
    def __init__(
        self,
        n: int,
        k: int,
        anchor: Callable,
        structure: Callable,
        name: str = "",
        zero_anchor: bool = False,
        constant_structure: bool = False,
    ):
        """``anchor(p)[a][i] = a^i_a``; ``structure(p)`` lists ``(a, b, c, C^c_ab)`` with ``a < b``."""
        self.n, self.k = n, k
        self.anchor = anchor
        self.structure = structure
        self.name = name
        self.zero_anchor = zero_anchor
        self.constant_structure = constant_structure

    def __repr__(self) -> str:
        return f"LieAlgebroid({self.name or '?'}, n={self.n}, k={self.k})"

    # --- data access ---------------------------------------------------------

    def structure_tensor(self, p) -> list:
        """Dense ``C[a][b][c]`` (antisymmetric in ``a, b``)."""
        C = [[[0.0] * self.k for _ in range(self.k)] for _ in range(self.k)]
        for a, b, c, v in self.structure(p):
            C[a][b][c] = C[a][b][c] + v
            C[b][a][c] = C[b][a][c] - v
        return C

    def anchor_column(self, a: int) -> ChartVectorField:
        return ChartVectorField(self.n, lambda p: self.anchor(p)[a])

    def basis(self, a: int) -> SectionA:
        return basis_section(self.n, self.k, a)

    def dual_basis(self, a: int) -> DualSection:
        return basis_section(self.n, self.k, a, DualSection)

    def section(self, comps: Sequence[ScalarField]) -> SectionA:
        if len(comps) != self.k:
            raise ConfigurationError(f"section needs {self.k} components, got {len(comps)}")
        return SectionA.from_components(comps, self.n)

    def dual_section(self, comps: Sequence[ScalarField]) -> DualSection:
        if len(comps) != self.k:
            raise ConfigurationError(f"dual section needs {self.k} components, got {len(comps)}")
        return DualSection.from_components(comps, self.n)

    def _check(self, s, what: str) -> None:
        if s.dim != self.n or s.size != self.k:
            raise ConfigurationError(f"{what}: expected a section over {self.n}-space of rank {self.k}, got ({s.dim}, {s.size})")

    # --- pointwise kernels (operate on raw values, reused by other modules) ---

    def anchor_values(self, p, Xp) -> list:
        if self.zero_anchor:
            return [0.0] * self.n
        A = self.anchor(p)
        return [sum(A[a][i] * Xp[a] for a in range(self.k)) for i in range(self.n)]

    def structure_values(self, p, Xp, Yp) -> list:
        """``C^c_ab X^a Y^b`` at ``p``."""
        out = [0.0] * self.k
        for a, b, c, v in self.structure(p):
            out[c] = out[c] + v * (Xp[a] * Yp[b] - Xp[b] * Yp[a])
        return out

    def bracket_fn(self, X: Callable, Y: Callable) -> Callable:
        def value(p):
            Xp, Yp = X(p), Y(p)
            out = self.structure_values(p, Xp, Yp)
            if not self.zero_anchor:
                _, dY = jvp(Y, p, self.anchor_values(p, Xp))
                _, dX = jvp(X, p, self.anchor_values(p, Yp))
                out = [o + u - w for o, u, w in zip(out, dY, dX)]
            return out

        return value

    # --- operations ------------------------------------------------------------

    def bracket(self, X: SectionA, Y: SectionA) -> SectionA:
        self._check(X, "bracket")
        self._check(Y, "bracket")
        return SectionA(self.n, self.bracket_fn(X.fn, Y.fn), self.k)

    def anchor_apply(self, X: SectionA) -> ChartVectorField:
        self._check(X, "anchor_apply")
        return ChartVectorField(self.n, lambda p: self.anchor_values(p, X.fn(p)))

    def lie_derivative_dual(self, X: SectionA, phi: DualSection) -> DualSection:
        """``(L_X phi)_b = a(X)(phi_b) - phi_c (C^c_ab X^a - a(e_b)(X^c))``."""
        self._check(X, "lie_derivative_dual")
        self._check(phi, "lie_derivative_dual")
        k = self.k

        def value(p):
            Xp = X.fn(p)
            if self.zero_anchor:
                ph, dph = phi.fn(p), [0.0] * k
                dX = [[0.0] * k for _ in range(k)]
            else:
                ph, dph = jvp(phi.fn, p, self.anchor_values(p, Xp))
                A = self.anchor(p)
                dX = [jvp(X.fn, p, A[b])[1] for b in range(k)]  # dX[b][c] = a(e_b)(X^c)
            out = [dph[b] + dot(ph, dX[b]) for b in range(k)]
            for a, b, c, v in self.structure(p):
                # [X, e_b]^c picks up C^c_ab X^a, and [X, e_a]^c picks up C^c_ba X^b
                out[b] = out[b] - ph[c] * v * Xp[a]
                out[a] = out[a] + ph[c] * v * Xp[b]
            return out

        return DualSection(self.n, value, k)

    def d_phi(self, phi: DualSection, X: SectionA, Y: SectionA) -> ScalarField:
        """``d phi(X, Y) = a(X)<phi,Y> - a(Y)<phi,X> - <phi,[X,Y]>``."""
        for s in (phi, X, Y):
            self._check(s, "d_phi")
        pY, pX = phi.pair(Y), phi.pair(X)
        br = self.bracket_fn(X.fn, Y.fn)

        def value(p):
            out = -dot(phi.fn(p), br(p))
            if not self.zero_anchor:
                out = out + jvp(pY.fn, p, self.anchor_values(p, X.fn(p)))[1]
                out = out - jvp(pX.fn, p, self.anchor_values(p, Y.fn(p)))[1]
            return out

        return ScalarField(self.n, value)

    def validate(self, pts, tol: float = 1e-9, seed: int = 0, random_sections: int = 3) -> list[CheckResult]:
        return validate(self, pts, tol, seed, random_sections)


class CovDiffOp:
    """``D(X)^a = x(X^a) + Gamma^a_b X^b`` over the base field ``x``; ``gamma(p)[a][b]``."""

    def __init__(self, base: ChartVectorField, gamma: Callable, k: int):
        self.base = base
        self.gamma = gamma
        self.k = k
        self.n = base.dim

    def apply_fn(self, X: Callable) -> Callable:
        def value(p):
            Xp, dX = jvp(X, p, self.base.fn(p))
            G = self.gamma(p)
            return [dX[a] + dot(G[a], Xp) for a in range(self.k)]

        return value

    def apply(self, X: SectionA) -> SectionA:
        return SectionA(self.n, self.apply_fn(X.fn), self.k)

    def apply_dual(self, phi: DualSection) -> DualSection:
        """``<D* phi, X> = x<phi, X> - <phi, D X>``, i.e. ``(D* phi)_b = x(phi_b) - phi_a Gamma^a_b``."""

        def value(p):
            ph, dph = jvp(phi.fn, p, self.base.fn(p))
            G = self.gamma(p)
            return [dph[b] - sum(ph[a] * G[a][b] for a in range(self.k)) for b in range(self.k)]

        return DualSection(self.n, value, self.k)

    def __call__(self, X: SectionA) -> SectionA:
        return self.apply(X)


# --- builders ----------------------------------------------------------------


def tangent_algebroid(n: int) -> LieAlgebroid:
    eye = [[1.0 if i == a else 0.0 for i in range(n)] for a in range(n)]
    return LieAlgebroid(n, n, lambda p: eye, lambda p: [], name=f"tangent{n}", constant_structure=True)


def lie_algebra(constants, name: str = "") -> LieAlgebroid:
    """Algebroid over a 1-dimensional dummy base with zero anchor; ``constants[a][b][c] = C^c_ab``."""
    C = np.asarray(constants, dtype=float)
    k = C.shape[0]
    entries = [(a, b, c, float(C[a, b, c])) for a in range(k) for b in range(a + 1, k) for c in range(k) if C[a, b, c] != 0]
    zeros = [[0.0] for _ in range(k)]
    return LieAlgebroid(1, k, lambda p: zeros, lambda p: entries, name=name, zero_anchor=True, constant_structure=True)


def cotangent_algebroid(pi: Bivector, name: str = "") -> LieAlgebroid:
    """``T*P`` with anchor ``pi#`` and ``[dx^a, dx^b] = d pi^{ab}``, i.e. ``C^c_ab = d_c pi^{ab}``."""
    n = pi.dim
    pairs = upper_index(n)

    def structure(p):
        d = partials(pi.upper_fn, p)  # d[c][idx]
        return [(a, b, c, d[c][idx]) for idx, (a, b) in enumerate(pairs) for c in range(n)]

    return LieAlgebroid(n, n, pi.matrix, structure, name=name or "cotangent")


# --- validation --------------------------------------------------------------


def _sections(A: LieAlgebroid, gen, count: int) -> list[SectionA]:
    out = []
    for _ in range(count):
        comps = sampling.polynomial_fields(gen, {"x": A.n}, A.k, degree=2)
        out.append(A.section(comps))
    return out


def validate(A: LieAlgebroid, pts, tol: float = 1e-9, seed: int = 0, random_sections: int = 3) -> list[CheckResult]:
    """Anchor-morphism and Jacobi residuals on basis and random polynomial sections."""
    npts = len(np.atleast_1d(pts[0])) if len(pts) else 0
    basis = [A.basis(a) for a in range(A.k)]
    gen = sampling.rng(seed)
    extra = _sections(A, gen, random_sections)

    def anchor_morphism():
        worst, where = 0.0, ""
        for a, b in itertools.combinations(range(A.k), 2):
            lhs = A.anchor_apply(A.bracket(basis[a], basis[b])).fn(pts)
            rhs = lie_bracket(A.anchor_apply(basis[a]), A.anchor_apply(basis[b])).fn(pts)
            r = max_abs([u - v for u, v in zip(lhs, rhs)])
            if r > worst:
                worst, where = r, f"basis pair ({a},{b})"
        return worst, where

    def jacobi(sections, label):
        def run():
            worst, where = 0.0, ""
            for i, j, l in itertools.combinations(range(len(sections)), 3):
                X, Y, Z = sections[i], sections[j], sections[l]
                terms = [
                    A.bracket(A.bracket(X, Y), Z).fn(pts),
                    A.bracket(A.bracket(Y, Z), X).fn(pts),
                    A.bracket(A.bracket(Z, X), Y).fn(pts),
                ]
                r = max_abs([u + v + w for u, v, w in zip(*terms)])
                if r > worst:
                    worst, where = r, f"{label} triple ({i},{j},{l})"
            return worst, where

        return run

    return [
        check("anchor preserves brackets", "algebroid.anchor-morphism", tol, npts, anchor_morphism),
        check("Jacobi on basis sections", "algebroid.jacobi", tol, npts, jacobi(basis, "basis")),
        check("Jacobi on polynomial sections", "algebroid.jacobi", tol, npts, jacobi(basis[:1] + extra, "polynomial")),
    ]

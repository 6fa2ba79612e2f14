"""1-forms on the coarse Poisson groupoid over a Poisson chart ``(P, pi)``.

The groupoid is the pair groupoid of ``P`` (arrows ``(y, x)``, source ``x``,
target ``y``) with the product structure ``pi(y) ⊕ (-pi)(x)``.  With this choice the
target map is a Poisson map, the algebroid dual is ``T*P`` with anchor ``pi#``
and Koszul bracket, and the tangent Poisson structure on ``TP`` is the one dual
to the cotangent algebroid of ``pi``.

A 1-form on the groupoid is a :class:`ChartOneForm` on ``2n`` coordinates ordered
``(y, x)``.  Star 1-forms over ``phi`` look like ``(eta(y, x), -phi(x))`` with
``eta(m, m) = phi(m)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebroid import DualSection
from .dual_poisson import LinearPoisson, tangent_poisson
from .lifts import TotalSpaceForm, linear_oneform_pairings
from .pair_groupoid import GroupoidCheckError, d_xi, lie_functor_lift, star_field
from .report import max_abs
from .smooth import (
    Bivector,
    ChartOneForm,
    ChartVectorField,
    ConfigurationError,
    ScalarField,
    bivector_sharp,
    directional,
    dot,
    exterior_derivative,
    jvp,
    lie_derivative_form,
    unit,
)


def koszul_bracket(pi: Bivector, w: ChartOneForm, t: ChartOneForm) -> ChartOneForm:
    """``[w, t] = L_{pi# w} t - L_{pi# t} w - d(pi(w, t))``."""
    if not (pi.dim == w.dim == t.dim):
        raise ConfigurationError(f"koszul_bracket: dimensions {pi.dim}, {w.dim}, {t.dim}")
    a = lie_derivative_form(bivector_sharp(pi, w), t)
    b = lie_derivative_form(bivector_sharp(pi, t), w)
    c = exterior_derivative(pi.pair(w, t))
    return ChartOneForm(pi.dim, lambda p: [x - y - z for x, y, z in zip(a.fn(p), b.fn(p), c.fn(p))])


def _sub(u, v):
    return [a - b for a, b in zip(u, v)]


@dataclass
class StarOneForm:
    """A 1-form on the groupoid together with the 1-form on ``P`` it lies over."""

    form: ChartOneForm
    phi: ChartOneForm
    label: str = ""


class CoarsePoissonGroupoid:
    def __init__(self, pi: Bivector, pts=None, jacobi_tol: float = 1e-9):
        if pts is not None:
            res = pi.schouten_residual(list(pts))
            if not res < jacobi_tol:
                raise ConfigurationError(f"bivector fails the Jacobi identity (residual {res:.3g})")
        self.pi = pi
        self.n = n = pi.dim
        neg = -pi

        def upper(g):
            top, bottom = pi.matrix(g[:n]), neg.matrix(g[n:])
            M = [[0.0] * (2 * n) for _ in range(2 * n)]
            for i in range(n):
                for j in range(n):
                    M[i][j] = top[i][j]
                    M[n + i][n + j] = bottom[i][j]
            return M

        self.bivector = Bivector.from_matrix_fn(2 * n, upper)
        self._tangent: LinearPoisson | None = None

    # -- structure maps ------------------------------------------------------

    @property
    def tangent_poisson(self) -> LinearPoisson:
        if self._tangent is None:
            self._tangent = tangent_poisson(self.pi)
        return self._tangent

    def a_star(self, phi: ChartOneForm) -> ChartVectorField:
        """Anchor of the dual algebroid, ``pi#``."""
        return bivector_sharp(self.pi, phi)

    def a_star_dual(self, w: ChartOneForm) -> ChartVectorField:
        """``a_*^*``: transpose of the anchor, equal to ``-pi#``."""
        s = bivector_sharp(self.pi, w)
        return ChartVectorField(self.n, lambda p: [-c for c in s.fn(p)])

    def dual_bracket(self, phi: ChartOneForm, psi: ChartOneForm) -> ChartOneForm:
        return koszul_bracket(self.pi, phi, psi)

    def beta_pullback(self, w: ChartOneForm) -> ChartOneForm:
        n = self.n
        return ChartOneForm(2 * n, lambda g: list(w.fn(g[:n])) + [0.0] * n)

    def alpha_pullback(self, w: ChartOneForm) -> ChartOneForm:
        n = self.n
        return ChartOneForm(2 * n, lambda g: [0.0] * n + list(w.fn(g[n:])))

    def cotangent_projections(self, covector: Sequence) -> tuple[list, list]:
        """``(alpha~, beta~)`` of a covector ``(c1, c2)`` at an arrow: ``(-c2, c1)``."""
        n = self.n
        return [-c for c in covector[n:]], list(covector[:n])

    def identity_covector(self, phi_m: Sequence) -> list:
        """``1~_phi = (phi, -phi)`` at ``1_m``."""
        return list(phi_m) + [-c for c in phi_m]

    def sharp(self, Phi: ChartOneForm) -> ChartVectorField:
        return bivector_sharp(self.bivector, Phi)

    # -- forms ---------------------------------------------------------------

    def multiplicative_pair_form(self, w: ChartOneForm) -> StarOneForm:
        """``(w(y), -w(x))``."""
        n = self.n
        form = ChartOneForm(2 * n, lambda g: list(w.fn(g[:n])) + [-c for c in w.fn(g[n:])])
        return StarOneForm(form, w, "pair")

    def star_oneform(self, phi: ChartOneForm, eta: Callable | None = None) -> StarOneForm:
        """``(phi(x) + eta(y, x) - eta(x, x), -phi(x))``, a star 1-form over ``phi`` for any ``eta``."""
        n = self.n

        def value(g):
            y, x = list(g[:n]), list(g[n:])
            ph = phi.fn(x)
            first = list(ph)
            if eta is not None:
                e, e0 = eta(y + x), eta(x + x)
                first = [a + b - c for a, b, c in zip(ph, e, e0)]
            return first + [-c for c in ph]

        return StarOneForm(ChartOneForm(2 * n, value), phi, "star")

    def phi_of(self, Phi: ChartOneForm) -> ChartOneForm:
        """``m -> -Phi2(m, m)``: the base form of a star 1-form, read off at identities."""
        n = self.n
        return ChartOneForm(n, lambda m: [-c for c in Phi.fn(list(m) + list(m))[n:]])

    def star_residual(self, Phi: ChartOneForm, phi: ChartOneForm, y, x) -> float:
        cov = Phi.fn(list(y) + list(x))
        alpha_t, _ = self.cotangent_projections(cov)
        ph = phi.fn(list(x))
        at_unit = Phi.fn(list(x) + list(x))
        return max_abs([_sub(alpha_t, ph), _sub(at_unit, self.identity_covector(ph))])

    def is_star_oneform(self, Phi: ChartOneForm, phi: ChartOneForm, y, x, tol: float = 1e-9) -> tuple[bool, float]:
        res = self.star_residual(Phi, phi, y, x)
        return res < tol, res

    def multiplicative_residual(self, Phi: ChartOneForm, triples) -> float:
        """Morphism law into the cotangent groupoid on composable pairs ``(z, y), (y, x)``.

        The product of ``theta`` at ``(z, y)`` and ``w`` at ``(y, x)`` is ``(theta1, w2)``,
        defined when ``alpha~(theta) = beta~(w)``.
        """
        n = self.n
        z, y, x = (list(t) for t in triples)
        zx, zy, yx = Phi.fn(z + x), Phi.fn(z + y), Phi.fn(y + x)
        composable = _sub(self.cotangent_projections(zy)[0], self.cotangent_projections(yx)[1])
        return max_abs([_sub(zx[:n], zy[:n]), _sub(zx[n:], yx[n:]), composable])

    # -- D_Phi ---------------------------------------------------------------

    def _check_star(self, Phi: ChartOneForm, pts, tol: float) -> None:
        if pts is None:
            return
        y, x = pts
        res = self.star_residual(Phi, self.phi_of(Phi), y, x)
        if not res < tol:
            raise GroupoidCheckError("star 1-form", res)

    def bracket_with_pullback(self, Phi: ChartOneForm, w: ChartOneForm) -> ChartOneForm:
        return koszul_bracket(self.bivector, Phi, self.beta_pullback(w))

    def d_phi(self, Phi: ChartOneForm, w: ChartOneForm, pts=None, tol: float = 1e-9) -> ChartOneForm:
        """``D_Phi(w)``, read from ``[Phi, beta* w]`` on identities against target-lifted vectors.

        With ``pts = (y, x)`` the star clauses and the annihilation of target-vertical
        vectors are checked first.
        """
        n = self.n
        self._check_star(Phi, pts, tol)
        K = self.bracket_with_pullback(Phi, w)
        if pts is not None:
            res = max_abs(K.fn(list(pts[1]) + list(pts[1]))[n:])
            if not res < tol:
                raise GroupoidCheckError("beta-vertical annihilation", res)
        return ChartOneForm(n, lambda m: K.fn(list(m) + list(m))[:n])

    def lba_bracket(self, phi: ChartOneForm, psi: ChartOneForm, Phi: ChartOneForm, Psi: ChartOneForm, Z: ChartVectorField) -> ScalarField:
        """``<[phi, psi], Z>`` assembled from anchors, the operators ``D_{Phi#}``, ``D_{Psi#}`` and
        the derivative of ``<Psi, Phi#>`` along ``Z``."""
        n = self.n
        xi, eta = self.sharp(Phi), self.sharp(Psi)
        a_phi, a_psi = self.a_star(phi), self.a_star(psi)
        D_eta_Z, D_xi_Z = d_xi(eta, Z), d_xi(xi, Z)

        def pairing(g):
            return dot(Psi.fn(g), xi.fn(g))

        def value(m):
            t1 = directional(lambda p: dot(psi.fn(p), Z.fn(p)), m, a_phi.fn(m))
            t2 = directional(lambda p: dot(phi.fn(p), Z.fn(p)), m, a_psi.fn(m))
            t3 = dot(phi.fn(m), D_eta_Z.fn(m))
            t4 = dot(psi.fn(m), D_xi_Z.fn(m))
            t5 = directional(pairing, list(m) + list(m), list(Z.fn(m)) + [0.0] * n)
            return t1 - t2 + t3 - t4 - t5

        return ScalarField(n, value)

    # -- tilde ---------------------------------------------------------------

    def star_family(self, gen: np.random.Generator | None = None, scale: float = 0.5) -> list[ChartVectorField]:
        """Star vector fields over the coordinate fields ``d_j``, perturbed off the identities."""
        n = self.n
        fams = []
        for j in range(n):
            base = ChartVectorField(n, lambda p, j=j: unit(n, j))
            if gen is None:
                fams.append(star_field(base))
                continue
            c = gen.uniform(-scale, scale, (n, 2 * n))
            q = gen.uniform(-scale, scale, n)

            def eta(g, c=c, q=q):
                return [dot([float(a) for a in c[i]], g) + float(q[i]) * g[0] * g[n] for i in range(n)]

            fams.append(star_field(base, eta))
        return fams

    def tilde_function(self, F: ScalarField) -> Callable:
        """``F~(m, v)``: derivative of ``F`` at ``1_m`` along the source fiber in direction ``v``."""
        n = self.n

        def value(P):
            m, v = list(P[:n]), list(P[n:])
            return directional(F.fn, m + m, v + [0.0] * n)

        return value

    def tilde_oneform(self, Phi: ChartOneForm, family: Sequence[ChartVectorField] | None = None) -> TotalSpaceForm:
        """``Phi~`` on ``TP``, by solving the pairings with core fields and with lifted star fields."""
        n = self.n
        family = list(family) if family is not None else self.star_family()
        lifts = [lie_functor_lift(z) for z in family]
        values = [self.tilde_function(ScalarField(2 * n, lambda g, z=z: dot(Phi.fn(g), z.fn(g)))) for z in family]
        phi = self.phi_of(Phi)
        return linear_oneform_pairings(DualSection(n, phi.fn, n), lifts, values, n, n)

    def identity_pairing_residual(self, Phi: ChartOneForm, family: Sequence[ChartVectorField], m) -> float:
        """``<Phi, zeta>`` on identities; must vanish for the tilde to be defined."""
        g = list(m) + list(m)
        return max(max_abs(dot(Phi.fn(g), z.fn(g))) for z in family)

    def family_condition(self, family: Sequence[ChartVectorField], m) -> float:
        """Worst condition number of the base parts of the family at the sample points."""
        n = self.n
        rows = [z.fn(list(m) + list(m))[n:] for z in family]
        M = np.stack(np.broadcast_arrays(*[np.asarray(x, float) for r in rows for x in r]), axis=-1)
        M = M.reshape(M.shape[:-1] + (len(rows), n))
        return float(np.max(np.linalg.cond(M)))

    def complete_lift_form(self, w: ChartOneForm) -> TotalSpaceForm:
        """Classical complete lift of ``w`` to ``TP``: ``(v^j d_j w_i, w_i)``."""
        n = self.n

        def value(P):
            m, v = list(P[:n]), list(P[n:])
            wm, dw = jvp(w.fn, m, v)
            return list(dw) + list(wm)

        return TotalSpaceForm(n, n, value)

    def q_pullback(self, w: ChartOneForm) -> TotalSpaceForm:
        n = self.n
        return TotalSpaceForm(n, n, lambda P: list(w.fn(P[:n])) + [0.0] * n)

    def tangent_koszul(self, w: ChartOneForm, t: ChartOneForm) -> ChartOneForm:
        return koszul_bracket(self.tangent_poisson.bivector(), w, t)


# --- identity suites ---------------------------------------------------------


def closing_identity_residual(G: CoarsePoissonGroupoid, S: StarOneForm, zeta: ChartVectorField, w: ChartOneForm, m) -> float:
    """``<D_Phi w, z> - <phi, D_zeta(a_*^* w)> - a_*^*(w)<Phi, zeta> - dw(a_* phi, z)`` at ``m``."""
    n = G.n
    z = ChartVectorField(n, lambda p: zeta.fn(list(p) + list(p))[n:])
    X = G.a_star_dual(w)
    lhs = dot(G.d_phi(S.form, w).fn(m), z.fn(m)) - dot(S.phi.fn(m), d_xi(zeta, X).fn(m))
    deriv = directional(lambda g: dot(S.form.fn(g), zeta.fn(g)), list(m) + list(m), list(X.fn(m)) + [0.0] * n)
    dw = exterior_derivative(w).fn(m)
    u, v = G.a_star(S.phi).fn(m), z.fn(m)
    two = sum(u[i] * dw[i][j] * v[j] for i in range(n) for j in range(n))
    return max_abs(lhs - deriv - two)


@dataclass
class IdentityReport:
    residuals: dict = field(default_factory=dict)

    def worst(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0


def d_phi_identity_suite(G: CoarsePoissonGroupoid, S: StarOneForm, w: ChartOneForm, t: ChartOneForm, triples, tol: float = 1e-9) -> IdentityReport:
    """Identities for a multiplicative ``Phi`` over ``phi``, keyed by name.

    ``anchor``: ``D_Phi(w) = [phi, w]`` (the anchor of the groupoid algebroid is the identity of ``TP``).
    ``pullback``: ``[Phi, beta* w] = beta* D_Phi(w)`` on arbitrary arrows.
    ``derivation``: ``D_Phi`` is a derivation of the Koszul bracket.
    """
    pre = G.multiplicative_residual(S.form, triples)
    if not pre < tol:
        raise GroupoidCheckError("multiplicative 1-form", pre)
    z, y, x = (list(v) for v in triples)
    D = lambda form: G.d_phi(S.form, form)  # noqa: E731
    i_res = max_abs(_sub(D(w).fn(x), G.dual_bracket(S.phi, w).fn(x)))
    lhs = G.bracket_with_pullback(S.form, w).fn(y + x)
    rhs = G.beta_pullback(D(w)).fn(y + x)
    ii_res = max_abs(_sub(lhs, rhs))
    K = koszul_bracket(G.pi, w, t)
    left = D(K).fn(x)
    right = [a + b for a, b in zip(koszul_bracket(G.pi, D(w), t).fn(x), koszul_bracket(G.pi, w, D(t)).fn(x))]
    iii_res = max_abs(_sub(left, right))
    return IdentityReport({"anchor": i_res, "pullback": ii_res, "derivation": iii_res})


def tilde_identity_suite(
    G: CoarsePoissonGroupoid,
    S: StarOneForm,
    T: StarOneForm,
    w: ChartOneForm,
    t: ChartOneForm,
    pts,
    family: Sequence[ChartVectorField] | None = None,
) -> IdentityReport:
    """Bracket identities for tilde forms on ``TP``, plus the closing identity with ``zeta = Phi#``.

    ``pts`` is a batch of points ``(m, v)`` of ``TP``.
    """
    n = G.n
    m = list(pts[:n])
    PhiT, PsiT = G.tilde_oneform(S.form, family), G.tilde_oneform(T.form, family)
    K = koszul_bracket(G.bivector, S.form, T.form)
    first = max_abs(_sub(G.tangent_koszul(PhiT, PsiT).fn(pts), G.tilde_oneform(K, family).fn(pts)))
    second = max_abs(_sub(G.tangent_koszul(PhiT, G.q_pullback(w)).fn(pts), G.q_pullback(G.d_phi(S.form, w)).fn(pts)))
    third = max_abs(G.tangent_koszul(G.q_pullback(t), G.q_pullback(w)).fn(pts))
    closing = closing_identity_residual(G, S, G.sharp(S.form), w, m)
    return IdentityReport({"tilde-bracket": first, "tilde-pullback": second, "pullbacks-commute": third, "closing": closing})


def sharp_star_residual(G: CoarsePoissonGroupoid, S: StarOneForm, y, x) -> float:
    from .pair_groupoid import star_residual

    return star_residual(G.sharp(S.form), G.a_star(S.phi), y, x)


def naturality_residual(G: CoarsePoissonGroupoid, S: StarOneForm, w: ChartOneForm, m) -> float:
    """``a_*^*(D_Phi w) - D_{Phi#}(a_*^* w)``."""
    lhs = G.a_star_dual(G.d_phi(S.form, w)).fn(m)
    rhs = d_xi(G.sharp(S.form), G.a_star_dual(w)).fn(m)
    return max_abs(_sub(lhs, rhs))


def tilde_sharp_residual(G: CoarsePoissonGroupoid, S: StarOneForm, pts, family=None) -> float:
    """``(Phi~)# - (Phi#)~`` on ``TP``."""
    PhiT = G.tilde_oneform(S.form, family)
    lhs = G.tangent_poisson.sharp(PhiT).fn(pts)
    rhs = lie_functor_lift(G.sharp(S.form)).field_fn(pts)
    return max_abs(_sub(lhs, rhs))

"""Identity batteries run by the command line, one per module, over seeded samples.

Each check carries an anchor string naming the identity it exercises; the full
list is :data:`ANCHORS`.  Checks whose residual is a count of verdict
disagreements use tolerance 0.5 (so they pass only with zero disagreements) and
are not affected by a tolerance override.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import sampling
from .algebroid import CovDiffOp, DualSection, LieAlgebroid, SectionA, validate as validate_algebroid
from .dsl.model import Model, load_model
from .dual_poisson import (
    LinearPoisson,
    anchor_transpose,
    is_coisotropic_graph,
    is_poisson_field,
    linear_function,
    poisson_field_via_tangent_coisotropy,
    pullback_form_dual,
    pullback_function,
    vertical_lift_dual,
)
from .jet import sin
from .lifts import (
    LinearVectorField,
    TangentVector,
    TotalPoint,
    complete_lift,
    cdo_from_linear,
    decompose,
    dual_flow_pairing_defect,
    dual_linear_field,
    flow_linearity_defect,
    intrinsic_derivative_flow,
    intrinsic_derivative_residual,
    is_linear,
    is_morphic,
    linear_from_cdo,
    linear_part,
    recompose,
    tangent_pairing,
    tangent_pairing_curve,
    total_bracket,
    vertical_lift,
)
from .pair_groupoid import (
    GroupoidCheckError,
    PairGroupoid,
    affine_decompose,
    base_field,
    d_xi,
    diagonal_bracket,
    is_multiplicative,
    left_invariant,
    lie_functor_lift,
    multiplicative_function_check,
    multiplicative_residual,
    pair_difference,
    product_field,
    right_invariant,
    sample_triples,
    star_field,
    star_residual,
)
from .poisson_pair import (
    CoarsePoissonGroupoid,
    StarOneForm,
    closing_identity_residual,
    d_phi_identity_suite,
    koszul_bracket,
    naturality_residual,
    sharp_star_residual,
    tilde_sharp_residual,
)
from .report import CheckResult, SuiteReport, check, max_abs
from .smooth import (
    Bivector,
    ChartOneForm,
    ChartVectorField,
    ScalarField,
    bivector_sharp,
    dot,
    exterior_derivative,
    jvp,
    lie_bracket,
)

SUITES = ("lifts", "dual", "pair", "poisson-pair", "all")
COUNT_TOL = 0.5

ANCHORS = {
    "algebroid.anchor-morphism": "anchor maps brackets to brackets",
    "algebroid.jacobi": "Jacobi identity of the algebroid bracket",
    "poisson.bivector-jacobi": "declared bivectors are Poisson",
    "lifts.cdo-correspondence": "linear fields and covariant differential operators, brackets to commutators",
    "lifts.linearity": "complete lifts and brackets of linear fields are linear",
    "lifts.complete-bracket": "complete lift is a bracket morphism",
    "lifts.complete-core-bracket": "complete lift against core lift",
    "lifts.core-core-bracket": "core lifts commute",
    "lifts.linear-core-bracket": "linear field against core lift gives the lifted operator",
    "lifts.morphic-complete": "complete lifts are morphic",
    "lifts.intrinsic-derivative": "intrinsic derivative at zeros of a section",
    "lifts.flow-linearity": "flows of linear fields are bundle morphisms",
    "lifts.dual-flow": "dual flow is the inverse transpose",
    "lifts.tangent-pairing": "tangent pairing of the prolonged bundles",
    "lifts.generation": "linear fields over a base frame and core fields span",
    "dual.poisson-jacobi": "Jacobi identity of the linear Poisson structure",
    "dual.bracket-generators": "brackets of fiberwise-linear and basic functions",
    "dual.hamiltonian": "Hamiltonian fields of linear functions",
    "dual.hamiltonian-lift": "Hamiltonian of a linear function is the dual complete lift",
    "dual.core-sharp": "sharp of a basic 1-form is minus a core field",
    "dual.morphic-poisson": "morphic linear field iff Poisson dual field",
    "dual.coisotropic-graph": "graph coisotropic iff closed",
    "dual.tangent-coisotropy": "image of a vector field coisotropic iff Poisson vector field",
    "pair.groupoid-axioms": "pair groupoid axioms",
    "pair.multiplicative": "multiplicative vector fields",
    "pair.star": "star vector fields",
    "pair.d-xi-multiplicative": "operator of a product field is the Lie derivative",
    "pair.d-xi-lift": "operator of the lifted field equals the groupoid operator",
    "pair.lift-complete": "lift of a product field is the complete lift",
    "pair.right-invariance": "bracket of multiplicative and right-invariant fields",
    "pair.bracket-stability": "brackets preserve star and multiplicative fields",
    "pair.d-commutator": "operator of a bracket is the commutator",
    "pair.extension-independence": "operator independent of the extension",
    "pair.tilde-equations": "lifted field on basic and linear functions",
    "pair.generation": "lifted star fields and core fields span",
    "pair.affine": "affine fields split into multiplicative plus invariant",
    "pair.multiplicative-function": "multiplicative fields preserve multiplicative functions",
    "poisson-pair.koszul": "Koszul bracket of exact and frame forms",
    "poisson-pair.projections": "cotangent groupoid projections",
    "poisson-pair.star-oneform": "star 1-forms",
    "poisson-pair.d-phi-pair-form": "operator of a pair form is the Koszul bracket",
    "poisson-pair.d-phi-vertical": "bracket with a target pullback kills target-vertical vectors",
    "poisson-pair.d-phi-identities": "anchor, pullback and derivation identities of the operator",
    "poisson-pair.lba-bracket": "explicit bialgebroid bracket equals Koszul",
    "poisson-pair.sharp-star": "sharp of a star 1-form is a star field",
    "poisson-pair.naturality": "anchor transpose intertwines the operators",
    "poisson-pair.tilde-complete": "tilde of a pair form is the complete lift",
    "poisson-pair.tilde-core": "tilde paired with core fields",
    "poisson-pair.tilde-sharp": "tilde commutes with sharp",
    "poisson-pair.tilde-bracket": "tilde is a bracket morphism",
    "poisson-pair.tilde-pullback": "tilde against basic forms",
    "poisson-pair.pullbacks-commute": "basic forms commute",
    "poisson-pair.closing-identity": "operator against star fields",
}


def _sub(u, v):
    return [a - b for a, b in zip(u, v)]


@dataclass
class Battery:
    model: Model
    seed: int
    npts: int
    tol_override: float | None = None
    checks: list[CheckResult] = field(default_factory=list)

    def __post_init__(self):
        self.gen = sampling.rng(self.seed)

    @property
    def n(self):
        return self.model.n

    @property
    def k(self):
        return self.model.k

    @property
    def A(self) -> LieAlgebroid:
        return self.model.algebroid

    def add(self, label: str, anchor: str, tol: float, compute: Callable, points: int | None = None, count: bool = False):
        if anchor not in ANCHORS:
            raise KeyError(anchor)
        if self.tol_override is not None and not count:
            tol = self.tol_override
        self.checks.append(check(f"{self.model.name}: {label}", anchor, tol, self.npts if points is None else points, compute))

    # -- random data ---------------------------------------------------------

    def base_points(self, count: int | None = None):
        return sampling.points(self.gen, self.n, count or self.npts)

    def total_points(self, count: int | None = None):
        c = count or self.npts
        return sampling.points(self.gen, self.n, c) + sampling.points(self.gen, self.k, c)

    def functions(self, count: int, degree: int = 2, scale: float = 1.0):
        return sampling.polynomial_fields(self.gen, {"x": self.n}, count, degree=degree, scale=scale)

    def section(self, scale: float = 1.0) -> SectionA:
        return self.A.section(self.functions(self.k, scale=scale))

    def dual_section(self, scale: float = 1.0) -> DualSection:
        return self.A.dual_section(self.functions(self.k, scale=scale))

    def vector_field(self, scale: float = 1.0) -> ChartVectorField:
        return ChartVectorField.from_components(self.functions(self.n, scale=scale), self.n)

    def one_form(self, scale: float = 1.0) -> ChartOneForm:
        return ChartOneForm.from_components(self.functions(self.n, scale=scale), self.n)

    def matrix_fn(self, scale: float = 1.0, degree: int = 2):
        fns = [[f.fn for f in self.functions(self.k, degree=degree, scale=scale)] for _ in range(self.k)]
        return lambda m: [[f(m) for f in row] for row in fns]

    def cdo(self, scale: float = 1.0) -> CovDiffOp:
        return CovDiffOp(self.vector_field(scale), self.matrix_fn(scale), self.k)

    def linear_field(self, scale: float = 1.0) -> LinearVectorField:
        return linear_from_cdo(self.cdo(scale))

    def report(self, suite: str) -> SuiteReport:
        return SuiteReport(suite, self.seed, self.checks)


# --- validation --------------------------------------------------------------


def run_validate(b: Battery) -> None:
    pts = b.base_points()
    for c in validate_algebroid(b.A, pts, seed=b.seed):
        if b.tol_override is not None:
            c = check(c.label, c.anchor, b.tol_override, c.points, lambda c=c: (c.residual, c.detail))
        c.label = f"{b.model.name}: {c.label}"
        b.checks.append(c)
    for name, pi in b.model.bivectors.items():
        b.add(f"bivector {name} satisfies Jacobi", "poisson.bivector-jacobi", 1e-9, lambda pi=pi: pi.schouten_residual(pts))


# --- lifts -------------------------------------------------------------------


def run_lifts(b: Battery) -> None:
    A, n, k = b.A, b.n, b.k
    P = b.total_points()
    m = list(P[:n])
    X, Y, Z = b.section(), b.section(), b.section()
    xi1, xi2 = b.linear_field(0.7), b.linear_field(0.7)
    Xt, Yt = complete_lift(A, X), complete_lift(A, Y)

    def correspondence():
        D1, D2 = b.cdo(), b.cdo()
        back = cdo_from_linear(linear_from_cdo(D1))
        r0 = max_abs(_sub(back.apply_fn(Z.fn)(m), D1.apply_fn(Z.fn)(m)))
        L1, L2 = linear_from_cdo(D1), linear_from_cdo(D2)
        br = linear_part(total_bracket(L1.as_field(), L2.as_field()), n, k)
        comm = [a - c for a, c in zip(D1.apply_fn(D2.apply_fn(Z.fn))(m), D2.apply_fn(D1.apply_fn(Z.fn))(m))]
        r1 = max_abs(_sub(cdo_from_linear(br).apply_fn(Z.fn)(m), comm))
        r2 = max_abs(_sub(br.base.fn(m), lie_bracket(D1.base, D2.base).fn(m)))
        return max(r0, r1, r2)

    b.add("operator of a bracket is the commutator", "lifts.cdo-correspondence", 1e-8, correspondence)

    def linearity():
        fields = [Xt.as_field(), xi1.as_field(), total_bracket(xi1.as_field(), xi2.as_field())]
        return max(is_linear(f, n, k, P, b.gen)[1] for f in fields)

    b.add("complete lifts and brackets of linear fields are fiber-linear", "lifts.linearity", 1e-8, linearity)

    def complete_bracket():
        lhs = total_bracket(Xt.as_field(), Yt.as_field()).fn(P)
        rhs = complete_lift(A, A.bracket(X, Y)).field_fn(P)
        return max_abs(_sub(lhs, rhs))

    b.add("[X~, Y~] = [X, Y]~", "lifts.complete-bracket", 1e-8, complete_bracket)

    def complete_core():
        lhs = total_bracket(Xt.as_field(), vertical_lift(Y)).fn(P)
        return max_abs(_sub(lhs, vertical_lift(A.bracket(X, Y)).fn(P)))

    b.add("[X~, Y^] = [X, Y]^", "lifts.complete-core-bracket", 1e-8, complete_core)
    b.add("[X^, Y^] = 0", "lifts.core-core-bracket", 1e-12, lambda: max_abs(total_bracket(vertical_lift(X), vertical_lift(Y)).fn(P)))

    def linear_core():
        lhs = total_bracket(xi1.as_field(), vertical_lift(X)).fn(P)
        D = cdo_from_linear(xi1).apply(X)
        return max_abs(_sub(lhs, vertical_lift(D).fn(P)))

    b.add("[xi, X^] = D_xi(X)^", "lifts.linear-core-bracket", 1e-8, linear_core)

    def morphic():
        _, res = is_morphic(A, Xt, m, sections=[Y])
        return max(res.values())

    b.add("complete lift is morphic", "lifts.morphic-complete", 1e-8, morphic)

    def intrinsic():
        # a section vanishing at each sample point: X - X(m0), evaluated at m0
        m0 = [np.asarray(c) for c in m]
        X0 = X.fn(m0)
        vanish = SectionA(n, lambda p: [a - b for a, b in zip(X.fn(p), X0)], k)
        return intrinsic_derivative_residual(xi1, vanish, m0)

    b.add("intrinsic derivative equals the lifted operator", "lifts.intrinsic-derivative", 1e-10, intrinsic)

    def intrinsic_flow():
        mm = [c[:5] for c in m]
        X0 = X.fn(mm)
        vanish = SectionA(n, lambda p: [a - b for a, b in zip(X.fn(p), X0)], k)
        fd = intrinsic_derivative_flow(xi1, vanish, mm, h=1e-3, steps=4)
        exact = cdo_from_linear(xi1).apply_fn(vanish.fn)(mm)
        return max_abs(_sub(fd, exact))

    b.add("intrinsic derivative by flows (finite differences)", "lifts.intrinsic-derivative", 1e-5, intrinsic_flow, points=5)

    few = min(b.npts, 10)
    mf = [c[:few] for c in m]

    def flow_lin():
        worst = 0.0
        for lin in (Xt, xi1):
            for t in (0.1, 0.5):
                v = [b.gen.uniform(-1, 1, few) for _ in range(k)]
                w = [b.gen.uniform(-1, 1, few) for _ in range(k)]
                worst = max(worst, flow_linearity_defect(lin.as_field(), n, k, mf, v, w, t, 64)["defect"])
        return worst

    b.add("flows of linear fields are fiber-linear", "lifts.flow-linearity", 1e-6, flow_lin, points=few)

    def dual_flow():
        v = [b.gen.uniform(-1, 1, few) for _ in range(k)]
        ph = [b.gen.uniform(-1, 1, few) for _ in range(k)]
        return max(dual_flow_pairing_defect(lin, mf, v, ph, 0.5, 64) for lin in (Xt, xi1))

    b.add("flow of the dual field preserves the pairing", "lifts.dual-flow", 1e-5, dual_flow, points=few)

    def pairing():
        phi = b.dual_section()
        u = [b.gen.uniform(-1, 1, b.npts) for _ in range(n)]
        Xm, dX = jvp(X.fn, m, u)
        pm, dp = jvp(phi.fn, m, u)
        frak = TangentVector(TotalPoint(m, pm), u, dp)
        xit = TangentVector(TotalPoint(m, Xm), u, dX)
        return max_abs(tangent_pairing(frak, xit, X, phi) - tangent_pairing_curve(frak, xit))

    b.add("tangent pairing from sections equals the curve formula", "lifts.tangent-pairing", 1e-10, pairing)

    def generation():
        frame = [
            LinearVectorField(ChartVectorField(n, lambda p, j=j: [1.0 if i == j else 0.0 for i in range(n)]), b.matrix_fn(), k)
            for j in range(n)
        ]
        target = xi1.as_field() + vertical_lift(Z)
        coeffs, rem, cond = decompose(target, P, frame, n, k)
        return max_abs(_sub(recompose(coeffs, rem, frame, P, n), target.fn(P)))

    b.add("decomposition over linear frame fields recomposes", "lifts.generation", 1e-10, generation)


# --- dual --------------------------------------------------------------------


def _morphic_battery(b: Battery, count: int = 20):
    """``(label, designed, LinearVectorField)``: half designed morphic, half not."""
    A = b.A
    out = []
    for i in range(count // 2):
        X = b.section()
        xi = complete_lift(A, X)
        if i % 3 == 2:
            xi = xi + complete_lift(A, b.section())
        out.append((f"complete lift {i}", True, xi))
    for i in range(count - count // 2):
        # entries bounded away from zero so the perturbation never vanishes
        E = b.gen.uniform(0.5, 1.0, (b.k, b.k)) * b.gen.choice([-1.0, 1.0], (b.k, b.k))
        base = b.linear_field() if i % 2 else complete_lift(A, b.section())
        label = f"random operator {i}" if i % 2 else f"perturbed complete lift {i}"
        out.append((label, False, LinearVectorField(base.base, lambda m, base=base, E=E: [
            [g + e for g, e in zip(rg, re)] for rg, re in zip(base.fiber_matrix(m), E)
        ], b.k)))
    return out


def morphic_agreement(b: Battery, base_pts, dual_pts, count: int = 20, tol: float = 1e-7) -> dict:
    rows = []
    for label, designed, xi in _morphic_battery(b, count):
        morph, _ = is_morphic(b.A, xi, base_pts, tol=tol)
        pois, _ = is_poisson_field(b.A, dual_linear_field(xi).as_field(), dual_pts, tol=tol)
        rows.append((label, designed, morph, pois))
    return {
        "rows": rows,
        "disagree": sum(r[2] != r[3] for r in rows),
        "designed_mismatch": sum(r[1] != r[2] for r in rows),
        "designed_true": sum(r[1] for r in rows),
        "designed_false": sum(not r[1] for r in rows),
    }


def coisotropy_cases(b: Battery) -> list:
    """``(label, DualSection)`` cases: basic-exact, random, constant and zero."""
    A, n, k = b.A, b.n, b.k
    cases = []
    for i in range(3):
        f = b.functions(1)[0]
        cases.append((f"differential {i}", A.dual_section([ScalarField(n, lambda p, a=a, f=f: jvp(f.fn, p, A.anchor(p)[a])[1] if not A.zero_anchor else 0.0 * p[0]) for a in range(k)])))
    for i in range(4):
        cases.append((f"random {i}", b.dual_section()))
    cases.append(("constant", A.dual_section([ScalarField(n, lambda p, c=c: c + 0.0 * p[0]) for c in b.gen.uniform(-1, 1, k)])))
    cases.append(("zero", A.dual_section([ScalarField(n, lambda p: 0.0 * p[0]) for _ in range(k)])))
    for name, phi in b.model.dual_sections.items():
        cases.append((name, phi))
    return cases


def tangent_cases(b: Battery, pi: Bivector) -> list:
    n = pi.dim
    cases = []
    for i in range(2):
        f = b.functions(1)[0]
        cases.append((f"hamiltonian {i}", bivector_sharp(pi, exterior_derivative(f))))
    for i in range(2):
        cases.append((f"random {i}", b.vector_field()))
    cases.append(("zero", ChartVectorField(n, lambda p: [0.0 * p[0]] * n)))
    for name, X in b.model.base_fields().items():
        cases.append((name, X))
    return cases


def model_bivector(model: Model) -> Bivector | None:
    name = model.poisson_bivector or model.cotangent_of
    return model.bivectors.get(name) if name else None


def run_dual(b: Battery) -> None:
    A, n, k = b.A, b.n, b.k
    PS = LinearPoisson(A)
    Q = b.total_points()
    m = list(Q[:n])
    X, Y = b.section(), b.section()
    f, g = b.functions(2)
    lX, lY = linear_function(X), linear_function(Y)
    qf, qg = pullback_function(f, k), pullback_function(g, k)

    b.add("linear Poisson structure satisfies Jacobi", "dual.poisson-jacobi", 1e-9, lambda: PS.jacobi_residual(Q))

    def generators():
        r1 = max_abs(PS.bracket(lX, lY).fn(Q) - linear_function(A.bracket(X, Y)).fn(Q))
        aXf = A.anchor_apply(X).apply(f)
        r2 = max_abs(PS.bracket(lX, qf).fn(Q) - aXf.fn(m))
        r3 = max_abs(PS.bracket(qf, qg).fn(Q))
        return max(r1, r2, r3)

    b.add("{l_X, l_Y} = l_[X,Y], {l_X, q*f} = q*a(X)f, {q*f, q*g} = 0", "dual.bracket-generators", 1e-10, generators)

    def hamiltonian():
        H = PS.hamiltonian_field(lX)
        r1 = max_abs(H.apply(lY).fn(Q) - linear_function(A.bracket(X, Y)).fn(Q))
        r2 = max_abs(H.apply(qf).fn(Q) - A.anchor_apply(X).apply(f).fn(m))
        return max(r1, r2)

    b.add("H_X(l_Y) = l_[X,Y] and H_X(q*f) = q*a(X)f", "dual.hamiltonian", 1e-10, hamiltonian)

    def ham_lift():
        H = PS.hamiltonian_field(lX).fn(Q)
        return max_abs(_sub(H, dual_linear_field(complete_lift(A, X)).field_fn(Q)))

    b.add("H_X equals the dual of the complete lift", "dual.hamiltonian-lift", 1e-10, ham_lift)

    def core_sharp():
        w = b.one_form()
        lhs = PS.sharp(pullback_form_dual(w, k)).fn(Q)
        rhs = vertical_lift_dual(anchor_transpose(A, w)).fn(Q)
        return max_abs([a + c for a, c in zip(lhs, rhs)])

    b.add("(q*w)# = -(a*w)^", "dual.core-sharp", 1e-10, core_sharp)

    bp = [c[:10] for c in m]
    dq = [c[:10] for c in Q]

    def morphic():
        res = morphic_agreement(b, bp, dq, count=20)
        return res["disagree"], (
            f"{res['designed_true']} designed morphic, {res['designed_false']} designed not, "
            f"{res['designed_mismatch']} verdicts differ from design"
        )

    b.add("morphic iff dual field Poisson (20 operators)", "dual.morphic-poisson", COUNT_TOL, morphic, points=10, count=True)

    def graphs():
        bad = 0
        for _, phi in coisotropy_cases(b):
            bad += not is_coisotropic_graph(A, phi, bp)["agree"]
        return bad

    b.add("graph coisotropy agrees with closedness", "dual.coisotropic-graph", COUNT_TOL, graphs, points=10, count=True)

    pi = model_bivector(b.model)
    if pi is not None:

        def tangent():
            bad = 0
            for _, V in tangent_cases(b, pi):
                bad += not poisson_field_via_tangent_coisotropy(pi, V, bp)["agree"]
            return bad

        b.add("coisotropic image agrees with Poisson vector field", "dual.tangent-coisotropy", COUNT_TOL, tangent, points=10, count=True)


# --- pair --------------------------------------------------------------------


def random_star_field(b: Battery, n: int, multiplicative: bool = False, scale: float = 0.7) -> ChartVectorField:
    x = ChartVectorField.from_components(sampling.polynomial_fields(b.gen, {"x": n}, n, scale=scale), n)
    if multiplicative:
        return product_field(x)
    eta = sampling.polynomial_fields(b.gen, {"y": n, "x": n}, n, scale=scale)
    return star_field(x, lambda g, eta=eta: [e.fn(g) for e in eta])


def run_pair(b: Battery) -> None:
    n = b.n
    G = PairGroupoid(n)
    T = sample_triples(b.gen, n, b.npts)
    z, y, x = T
    x_field = ChartVectorField.from_components(b.functions(n, scale=0.7), n)
    X = ChartVectorField.from_components(b.functions(n, scale=0.7), n)
    prod = product_field(x_field)

    b.add("unit, inverse and associativity", "pair.groupoid-axioms", 1e-15, lambda: G.axioms_residual(z, y, x, [c[::-1] for c in z]))

    def mult():
        verdicts = [
            (is_multiplicative(prod, T)[0], True),
            (is_multiplicative(right_invariant(X) + left_invariant(X), T)[0], True),
            (is_multiplicative(right_invariant(X), T)[0], False),
            (is_multiplicative(random_star_field(b, n), T)[0], False),
        ]
        return sum(a != e for a, e in verdicts)

    b.add("multiplicative verdicts on designed fields", "pair.multiplicative", COUNT_TOL, mult, count=True)

    stars = [random_star_field(b, n) for _ in range(3)] + [prod] + list(b.model.groupoid_fields.values())

    def star():
        res = [star_residual(s, base_field(s), y, x) for s in stars[:4]]
        declared = [star_residual(s, base_field(s), y, x) for s in stars[4:]]
        return max(res + [r for r in declared if r < 1e-6] or [0.0])

    b.add("constructed star fields satisfy both clauses", "pair.star", 1e-12, star)
    usable = [s for s in stars if star_residual(s, base_field(s), y, x) < 1e-9]

    def dmult():
        got = d_xi(prod, X).fn(x)
        return max_abs(_sub(got, lie_bracket(x_field, X).fn(x)))

    b.add("D_(x×x)(X) = [x, X]", "pair.d-xi-multiplicative", 1e-10, dmult)

    def lifted_operator():
        worst = 0.0
        for s in usable:
            lhs = cdo_from_linear(lie_functor_lift(s)).apply_fn(X.fn)(x)
            worst = max(worst, max_abs(_sub(lhs, d_xi(s, X, (y, x)).fn(x))))
        return worst

    b.add("operator of the lift equals D_xi", "pair.d-xi-lift", 1e-7, lifted_operator)

    def lift_complete():
        from .algebroid import tangent_algebroid

        TM = tangent_algebroid(n)
        L = lie_functor_lift(prod)
        C = complete_lift(TM, TM.section([ScalarField(n, lambda p, i=i: x_field.fn(p)[i]) for i in range(n)]))
        P = list(x) + list(y)
        return max_abs(_sub(L.field_fn(P), C.field_fn(P)))

    b.add("lift of x×x is the complete lift of x", "pair.lift-complete", 1e-10, lift_complete)

    def right_inv():
        br = lie_bracket(prod, right_invariant(X))
        a, c = br.fn(list(z) + list(x)), br.fn(list(z) + list(y))
        return max(max_abs(_sub(a[:n], c[:n])), max_abs(a[n:]))

    b.add("[x×x, X->] is right-invariant", "pair.right-invariance", 1e-10, right_inv)

    s1, s2 = usable[0], usable[1]
    p2 = product_field(ChartVectorField.from_components(b.functions(n, scale=0.7), n))

    def stability():
        br = lie_bracket(s1, s2)
        base = lie_bracket(base_field(s1), base_field(s2))
        r1 = star_residual(br, base, y, x)
        r2 = multiplicative_residual(lie_bracket(prod, p2), T)
        return max(r1, r2)

    b.add("brackets of star (multiplicative) fields are star (multiplicative)", "pair.bracket-stability", 1e-9, stability)

    def commutator():
        br = lie_bracket(prod, p2)
        lhs = d_xi(br, X).fn(x)
        a = d_xi(prod, d_xi(p2, X)).fn(x)
        c = d_xi(p2, d_xi(prod, X)).fn(x)
        return max_abs([u - v + w for u, v, w in zip(lhs, a, c)])

    b.add("D_[xi,eta] = [D_xi, D_eta]", "pair.d-commutator", 1e-8, commutator)

    def extension():
        R = [sampling.polynomial_fields(b.gen, {"y": n, "x": n}, n, scale=0.7) for _ in range(2)]
        outs = []
        for comps in R:
            def ext(g, comps=comps):
                Xy = X.fn(g[:n])
                d = [g[i] - g[n + i] for i in range(n)]
                return [Xy[i] + d[0] * comps[i].fn(g) for i in range(n)] + [d[0] * comps[i].fn(g) for i in range(n)]
            outs.append(diagonal_bracket(s1, ChartVectorField(2 * n, ext))(x)[:n])
        base = d_xi(s1, X).fn(x)
        return max(max_abs(_sub(outs[0], outs[1])), max_abs(_sub(outs[0], base)))

    b.add("D_xi(X) does not depend on the extension of X", "pair.extension-independence", 1e-9, extension)

    def tilde_eq():
        L = lie_functor_lift(s1)
        P = list(x) + list(y)
        f = b.functions(1)[0]
        r1 = max_abs(L.as_field().apply(pullback_function(f, n)).fn(P) - base_field(s1).apply(f).fn(x))
        phi = ChartOneForm.from_components(b.functions(n), n)
        lphi = ScalarField(2 * n, lambda Q: dot(phi.fn(Q[:n]), Q[n:]))
        Dphi = L.apply_dual_fn(phi.fn)
        r2 = max_abs(L.as_field().apply(lphi).fn(P) - dot(Dphi(x), y))
        return max(r1, r2)

    b.add("lift acts on basic and linear functions", "pair.tilde-equations", 1e-10, tilde_eq)

    def generation():
        family = []
        for j in range(n):
            base = ChartVectorField(n, lambda p, j=j: [1.0 if i == j else 0.0 * p[0] for i in range(n)])
            eta = sampling.polynomial_fields(b.gen, {"y": n, "x": n}, n, scale=0.7)
            family.append(lie_functor_lift(star_field(base, lambda g, eta=eta: [e.fn(g) for e in eta])))
        target = b.linear_field(0.7)
        P = list(x) + list(y)
        Xi = target.as_field()
        coeffs, rem, _ = decompose(Xi, P, family, n, n)
        return max_abs(_sub(recompose(coeffs, rem, family, P, n), Xi.fn(P)))

    b.add("lifted star fields and core fields span", "pair.generation", 1e-10, generation)

    def affine():
        dec = affine_decompose(prod + right_invariant(X), T)
        r = max(max_abs(_sub(dec.X.fn(x), X.fn(x))), max_abs(_sub(dec.multiplicative.fn(list(y) + list(x)), prod.fn(list(y) + list(x)))))
        bent = ChartVectorField(2 * n, lambda g: [sin(g[n])] + [0.0 * g[0]] * (2 * n - 1))
        try:
            affine_decompose(bent, T)
            rejected = False
        except GroupoidCheckError:
            rejected = True
        return r if rejected else float("inf"), "" if rejected else "non-projectable affine field accepted"

    b.add("x×x + X-> splits back; non-projectable affine field rejected", "pair.affine", 1e-10, affine)

    def mfun():
        f = b.functions(1)[0]
        ok, res = multiplicative_function_check(pair_difference(f), prod, T)
        return res

    b.add("x×x maps multiplicative functions to multiplicative functions", "pair.multiplicative-function", 1e-10, mfun)


# --- poisson pair ------------------------------------------------------------


def random_star_form(b: Battery, G: CoarsePoissonGroupoid, multiplicative: bool = False, scale: float = 0.7) -> StarOneForm:
    n = G.n
    phi = ChartOneForm.from_components(sampling.polynomial_fields(b.gen, {"x": n}, n, scale=scale), n)
    if multiplicative:
        return G.multiplicative_pair_form(phi)
    eta = sampling.polynomial_fields(b.gen, {"y": n, "x": n}, n, scale=scale)
    return G.star_oneform(phi, lambda g, eta=eta: [e.fn(g) for e in eta])


def run_poisson_pair(b: Battery) -> None:
    pi = model_bivector(b.model)
    if pi is None:
        return
    n = b.n
    G = CoarsePoissonGroupoid(pi)
    T = sample_triples(b.gen, n, b.npts)
    z, y, x = T
    P = list(x) + sampling.points(b.gen, n, b.npts)
    w, t = b.one_form(0.7), b.one_form(0.7)
    mult = random_star_form(b, G, multiplicative=True)
    star = random_star_form(b, G)
    star2 = random_star_form(b, G)
    declared = []
    for name, data in b.model.star_forms.items():
        declared.append(StarOneForm(data.form, b.model.one_forms[data.over], name))

    def koszul():
        f, g = b.functions(2)
        lhs = koszul_bracket(pi, exterior_derivative(f), exterior_derivative(g)).fn(x)
        bracket = pi.pair(exterior_derivative(f), exterior_derivative(g))
        r = max_abs(_sub(lhs, exterior_derivative(bracket).fn(x)))
        r0 = max_abs(koszul_bracket(Bivector.zero(n), w, t).fn(x))
        return max(r, r0)

    b.add("[df, dg] = d{f, g}", "poisson-pair.koszul", 1e-10, koszul)

    def projections():
        phi_m = w.fn(x)
        a_, b_ = G.cotangent_projections(G.identity_covector(phi_m))
        c1 = list(w.fn(y)) + [0.0 * c for c in w.fn(x)]
        a2, b2 = G.cotangent_projections(c1)
        return max(max_abs(_sub(a_, phi_m)), max_abs(_sub(b_, phi_m)), max_abs(a2), max_abs(_sub(b2, w.fn(y))))

    b.add("projections of identity and target-pulled covectors", "poisson-pair.projections", 1e-15, projections)

    def stars():
        res = [G.star_residual(S.form, S.phi, y, x) for S in (mult, star, star2, *declared)]
        wrong = G.is_star_oneform(G.beta_pullback(w), ChartOneForm(n, lambda p: [0.0 * p[0]] * n), y, x)[0]
        return (max(res), "") if not wrong else (float("inf"), "target pullback accepted as star")

    b.add("constructed and declared star 1-forms satisfy both clauses", "poisson-pair.star-oneform", 1e-12, stars)

    def pair_form():
        return max_abs(_sub(G.d_phi(mult.form, w, (y, x)).fn(x), koszul_bracket(pi, mult.phi, w).fn(x)))

    b.add("D_Phi(w) = [w', w] for pair forms", "poisson-pair.d-phi-pair-form", 1e-7, pair_form)

    def vertical():
        n_ = n
        return max(max_abs(G.bracket_with_pullback(S.form, w).fn(list(x) + list(x))[n_:]) for S in (mult, star, *declared))

    b.add("[Phi, beta* w] kills target-vertical vectors on identities", "poisson-pair.d-phi-vertical", 1e-9, vertical)

    rep = {}

    def identity(key):
        def run():
            if not rep:
                rep.update(d_phi_identity_suite(G, mult, w, t, T).residuals)
            return rep[key]

        return run

    b.add("anchor: D_Phi(w) = [phi, w]", "poisson-pair.d-phi-identities", 1e-7, identity("anchor"))
    b.add("pullback: [Phi, beta* w] = beta* D_Phi(w)", "poisson-pair.d-phi-identities", 1e-7, identity("pullback"))
    b.add("derivation: D_Phi is a derivation of the Koszul bracket", "poisson-pair.d-phi-identities", 1e-7, identity("derivation"))

    def lba():
        Z = b.vector_field(0.7)
        got = G.lba_bracket(star.phi, star2.phi, star.form, star2.form, Z).fn(x)
        return max_abs(got - dot(koszul_bracket(pi, star.phi, star2.phi).fn(x), Z.fn(x)))

    b.add("explicit bracket of star data equals Koszul", "poisson-pair.lba-bracket", 1e-6, lba)
    b.add("sharp of a star 1-form is a star field over pi#(phi)", "poisson-pair.sharp-star", 1e-9, lambda: max(sharp_star_residual(G, S, y, x) for S in (mult, star)))
    b.add("a_*^* D_Phi(w) = D_(Phi#)(a_*^* w)", "poisson-pair.naturality", 1e-6, lambda: max(naturality_residual(G, S, w, x) for S in (mult, star)))

    def tilde_complete():
        return max_abs(_sub(G.tilde_oneform(mult.form).fn(P), G.complete_lift_form(mult.phi).fn(P)))

    b.add("tilde of a pair form is the complete lift", "poisson-pair.tilde-complete", 1e-7, tilde_complete)

    def tilde_core():
        Phit = G.tilde_oneform(star.form)
        Xs = b.vector_field()
        up = Phit.fn(P)[n:]
        return max_abs(dot(up, Xs.fn(x)) - dot(star.phi.fn(x), Xs.fn(x)))

    b.add("<Phi~, X^> = <phi, X> o q", "poisson-pair.tilde-core", 1e-10, tilde_core)
    b.add("(Phi~)# = (Phi#)~", "poisson-pair.tilde-sharp", 1e-6, lambda: max(tilde_sharp_residual(G, S, P) for S in (mult, star)))

    def tilde_bracket():
        K = koszul_bracket(G.bivector, star.form, star2.form)
        lhs = G.tangent_koszul(G.tilde_oneform(star.form), G.tilde_oneform(star2.form)).fn(P)
        return max_abs(_sub(lhs, G.tilde_oneform(K).fn(P)))

    b.add("[Phi~, Psi~] = [Phi, Psi]~", "poisson-pair.tilde-bracket", 1e-6, tilde_bracket)

    def tilde_pullback():
        lhs = G.tangent_koszul(G.tilde_oneform(star.form), G.q_pullback(w)).fn(P)
        return max_abs(_sub(lhs, G.q_pullback(G.d_phi(star.form, w)).fn(P)))

    b.add("[Phi~, q*w] = q* D_Phi(w)", "poisson-pair.tilde-pullback", 1e-6, tilde_pullback)
    b.add("[q*t, q*w] = 0", "poisson-pair.pullbacks-commute", 1e-12, lambda: max_abs(G.tangent_koszul(G.q_pullback(t), G.q_pullback(w)).fn(P)))

    def closing():
        zeta = random_star_field(b, n)
        return max(closing_identity_residual(G, star, zeta, w, x), closing_identity_residual(G, star, G.sharp(star.form), w, x))

    b.add("closing identity for star fields and Phi#", "poisson-pair.closing-identity", 1e-6, closing)


# --- entry points ------------------------------------------------------------

RUNNERS = {"lifts": run_lifts, "dual": run_dual, "pair": run_pair, "poisson-pair": run_poisson_pair}


def model_paths(path) -> list[Path]:
    p = Path(path)
    if p.is_dir():
        return sorted(p.glob("*.model"))
    return [p]


def run_suite(name: str, path, points: int = 30, seed: int = 0, tol: float | None = None) -> SuiteReport:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    if points < 1:
        raise ValueError("--points must be positive")
    report = SuiteReport(name, seed, [])
    for i, path_ in enumerate(model_paths(path)):
        model = load_model(path_)
        names = list(RUNNERS) if name == "all" else [name]
        if name == "all":
            b = Battery(model, seed + 1000 * i, points, tol)
            run_validate(b)
            report.extend(b.report(name))
        for s in names:
            b = Battery(model, seed + 1000 * i + 17 * (list(RUNNERS).index(s) + 1), points, tol)
            RUNNERS[s](b)
            report.extend(b.report(name))
    return report


def run_validation(path, points: int = 100, seed: int = 0, tol: float | None = None) -> SuiteReport:
    report = SuiteReport("validate", seed, [])
    for i, path_ in enumerate(model_paths(path)):
        b = Battery(load_model(path_), seed + 1000 * i, points, tol)
        run_validate(b)
        dual = LinearPoisson(b.A)
        Q = b.total_points()
        b.add("linear Poisson structure satisfies Jacobi", "dual.poisson-jacobi", 1e-9, lambda dual=dual, Q=Q: dual.jacobi_residual(Q))
        report.extend(b.report("validate"))
    return report

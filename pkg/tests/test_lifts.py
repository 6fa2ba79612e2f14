import numpy as np
import pytest
from conftest import F, V, close

from liftcalc import sampling
from liftcalc.algebroid import CovDiffOp, DualSection, SectionA, lie_algebra, tangent_algebroid
from liftcalc.dsl import load_model
from liftcalc.lifts import (
    LinearVectorField,
    TangentVector,
    TotalPoint,
    TotalSpaceField,
    cdo_from_linear,
    complete_lift,
    decompose,
    dual_flow_pairing_defect,
    dual_linear_field,
    fiberwise_linear,
    flow_linearity_defect,
    intrinsic_derivative,
    intrinsic_derivative_flow,
    intrinsic_derivative_residual,
    is_linear,
    is_morphic,
    linear_from_cdo,
    linear_oneform_pairings,
    linear_part,
    pullback_form,
    pullback_function,
    recompose,
    tangent_pairing,
    tangent_pairing_curve,
    total_bracket,
    translation_tau,
    vertical_lift,
)
from liftcalc.smooth import ChartOneForm, ChartVectorField, ConfigurationError

GEN = sampling.rng(11)
PTS22 = sampling.points(GEN, 4, 30)  # total space of rank 2 over 2-space
PTS11 = sampling.points(GEN, 2, 30)


def so3():
    C = np.zeros((3, 3, 3))
    for a, b, c in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        C[a, b, c], C[b, a, c] = 1.0, -1.0
    return lie_algebra(C, "so3")


def sec(A, *srcs):
    return A.section([F(s, A.n) for s in srcs])


def dsec(A, *srcs):
    return A.dual_section([F(s, A.n) for s in srcs])


def random_linear(gen, n, k, degree=2):
    base = ChartVectorField.from_components(sampling.polynomial_fields(gen, n, n, degree=degree), n)
    entries = [sampling.polynomial_field(gen, n, degree=degree) for _ in range(k * k)]
    return LinearVectorField(base, lambda m: [[entries[a * k + b].fn(m) for b in range(k)] for a in range(k)], k)


def lift_diff(a, b, pts):
    return [x - y for x, y in zip(a.fn(pts), b.fn(pts))]


# --- core lifts ----------------------------------------------------------------


def test_vertical_lift_kills_basic_functions():
    A = tangent_algebroid(2)
    up = vertical_lift(sec(A, "x0*x1", "sin(x1)"))
    assert close(up.apply(pullback_function(F("x0^2 + x1", 2), 2)).eval(PTS22), 0.0)


def test_vertical_lift_of_constant_on_linear_function():
    A = tangent_algebroid(2)
    up = vertical_lift(A.basis(0))
    assert close(up.apply(fiberwise_linear(A.dual_basis(0))).eval(PTS22), 1.0)


def test_vertical_lift_is_function_linear():
    A = tangent_algebroid(2)
    f, X = F("x0 - x1^2", 2), sec(A, "1", "x0")
    fX = SectionA(2, lambda p: [f.fn(p) * c for c in X.fn(p)], 2)
    rhs = vertical_lift(X).scaled(pullback_function(f, 2))
    assert close(vertical_lift(fX).eval(PTS22), rhs.eval(PTS22))


def test_translation_tau():
    at = TotalPoint((0.3, -0.2), (1.0, 2.0))
    assert translation_tau(at, TotalPoint((0.3, -0.2), (0.0, 0.0))) == [0.0, 0.0, 0.0, 0.0]
    Y, Z = TotalPoint((0.3, -0.2), (0.5, -1.0)), TotalPoint((0.3, -0.2), (2.0, 0.25))
    vec = translation_tau(at, Y)
    phi = DualSection(2, lambda p: [3.0, -1.0], 2)
    ell = fiberwise_linear(phi)
    assert close(TangentVector(at, vec[:2], vec[2:]).apply(ell), 3.0 * 0.5 + 1.0)
    YZ = TotalPoint((0.3, -0.2), (2.5, -0.75))
    assert close(translation_tau(at, YZ), [a + b for a, b in zip(vec, translation_tau(at, Z))])
    with pytest.raises(ConfigurationError):
        translation_tau(at, TotalPoint((0.0, 0.0), (1.0, 1.0)))


# --- linear fields and CDOs ----------------------------------------------------


def test_zero_gamma_gives_horizontal_field():
    x = V("x1", "-x0")
    xi = linear_from_cdo(CovDiffOp(x, lambda m: [[0.0, 0.0], [0.0, 0.0]], 2))
    vals = xi.as_field().eval(PTS22)
    assert close(vals[:2], x.eval(PTS22[:2])) and close(vals[2:], 0.0)


def test_lie_derivative_cdo_on_tangent_line():
    A = tangent_algebroid(1)
    xi = complete_lift(A, sec(A, "x0"))
    pts = [np.array([0.5, -1.0]), np.array([2.0, 3.0])]
    assert close(xi.as_field().eval(pts), pts)


def test_cdo_round_trip():
    D = CovDiffOp(V("x0*x1", "1"), lambda m: [[m[0], 1.0], [m[1] ** 2, -2.0]], 2)
    X = SectionA(2, lambda p: [p[0] * p[1], p[1] - p[0] ** 3], 2)
    assert close(cdo_from_linear(linear_from_cdo(D)).apply(X).eval(PTS11), D.apply(X).eval(PTS11))


def test_is_linear_verdicts():
    gen = sampling.rng(4)
    xi = random_linear(gen, 2, 2)
    assert is_linear(TotalSpaceField.wrap(xi.as_field(), 2, 2), 2, 2, PTS22, gen)[0]
    A = tangent_algebroid(2)
    assert not is_linear(vertical_lift(sec(A, "1", "x0")), 2, 2, PTS22, gen)[0]
    quad = ChartVectorField.from_components([F("x1", 4), F("0", 4), F("v0^2", {"x": 2, "v": 2}), F("0", 4)], 4)
    assert not is_linear(quad, 2, 2, PTS22, gen)[0]


def test_complete_lift_on_abelian_is_zero():
    A = lie_algebra(np.zeros((2, 2, 2)))
    xi = complete_lift(A, sec(A, "x0", "x0^2"))
    assert close(xi.as_field().eval(sampling.points(GEN, 3, 5)), 0.0)


def test_complete_lift_so3_is_adjoint():
    A = so3()
    D = cdo_from_linear(complete_lift(A, A.basis(0)))
    for b in range(3):
        got = D.apply(A.basis(b)).eval([np.array([0.1])])
        assert close(got, A.bracket(A.basis(0), A.basis(b)).eval([np.array([0.1])]))


# --- intrinsic derivative ------------------------------------------------------


def test_intrinsic_derivative_of_zero_section():
    A = tangent_algebroid(2)
    xi = complete_lift(A, sec(A, "x1", "x0^2"))
    assert close(intrinsic_derivative(xi, sec(A, "0", "0"), [0.2, 0.4]), 0.0)


def test_intrinsic_derivative_tangent_example():
    c = 0.7
    A = tangent_algebroid(1)
    xi = complete_lift(A, sec(A, "x0"))
    X = sec(A, f"x0 - {c}")
    assert close(intrinsic_derivative(xi, X, [c]), [c], 1e-12)
    assert intrinsic_derivative_residual(xi, X, [np.array([c])]) < 1e-12
    assert close(intrinsic_derivative_flow(xi, X, [c], h=1e-4), [c], 1e-7)


def test_intrinsic_derivative_random_data():
    gen = sampling.rng(21)
    xi = random_linear(gen, 2, 2)
    m0 = [0.3, -0.4]
    comps = sampling.polynomial_fields(gen, 2, 2)
    X = SectionA(2, lambda p: [f.fn(p) - f.fn(m0) for f in comps], 2)
    m = [np.array([m0[0]]), np.array([m0[1]])]
    assert intrinsic_derivative_residual(xi, X, m) < 1e-7
    assert close(intrinsic_derivative_flow(xi, X, m), intrinsic_derivative(xi, X, m), 1e-6)


# --- tangent pairing and duality -----------------------------------------------


def test_tangent_pairing_vertical_vectors():
    at_A, at_D = TotalPoint((0.1,), (2.0,)), TotalPoint((0.1,), (3.0,))
    xi = TangentVector(at_A, (0.0,), (0.5,))
    frak = TangentVector(at_D, (0.0,), (0.0,))
    assert close(tangent_pairing(frak, xi), 3.0 * 0.5)
    frak2 = TangentVector(at_D, (0.0,), (-1.5,))
    assert close(tangent_pairing(frak2, xi), tangent_pairing_curve(frak2, xi))
    zero = tangent_pairing(TangentVector(at_D, (0.0,), (0.0,)), TangentVector(at_A, (0.0,), (0.0,)))
    assert close(zero, 0.0)


def test_tangent_pairing_independent_of_extension():
    at_A, at_D = TotalPoint((0.2, -0.3), (1.0, 2.0)), TotalPoint((0.2, -0.3), (-0.5, 0.7))
    xi = TangentVector(at_A, (0.4, 1.1), (0.3, -0.2))
    frak = TangentVector(at_D, (0.4, 1.1), (0.9, 0.1))
    X1 = SectionA(2, lambda p: [1.0 + (p[0] - 0.2) * 3, 2.0 + (p[1] + 0.3) ** 2], 2)
    phi1 = DualSection(2, lambda p: [-0.5 + (p[1] + 0.3), 0.7 - 2 * (p[0] - 0.2)], 2)
    a = tangent_pairing(frak, xi)
    b = tangent_pairing(frak, xi, X1, phi1)
    assert abs(float(a) - float(b)) < 1e-9


def test_dual_linear_field_properties():
    gen = sampling.rng(5)
    xi = random_linear(gen, 2, 2)
    back = dual_linear_field(dual_linear_field(xi))
    assert close(back.as_field().eval(PTS22), xi.as_field().eval(PTS22))
    flat = LinearVectorField(V("x1", "1"), lambda m: [[0.0, 0.0], [0.0, 0.0]], 2)
    assert close(dual_linear_field(flat).as_field().eval(PTS22)[2:], 0.0)


def test_dual_of_complete_lift_preserves_pairing():
    A = tangent_algebroid(2)
    xi = complete_lift(A, sec(A, "x1^2", "sin(x0)"))
    xs = dual_linear_field(xi)
    pts = sampling.points(sampling.rng(6), 6, 20)
    m, v, phi = pts[:2], pts[2:4], pts[4:]
    P, Q = xi.field_fn(m + v), xs.field_fn(m + phi)
    # d/dt <phi, v> along the two flows vanishes
    rate = sum(Q[2 + a] * v[a] + phi[a] * P[2 + a] for a in range(2))
    assert close(rate, 0.0, 1e-9)


# --- decomposition -------------------------------------------------------------


def star_basis():
    A = tangent_algebroid(2)
    return [complete_lift(A, A.basis(0)), complete_lift(A, sec(A, "x0", "1"))]


def test_decompose_linear_member():
    basis = star_basis()
    c, rem, _ = decompose(basis[1].as_field(), PTS22, basis, 2, 2)
    assert close(rem, 0.0, 1e-12) and close(c, [0.0, 1.0], 1e-12)


def test_decompose_core_field():
    A = tangent_algebroid(2)
    c, rem, _ = decompose(vertical_lift(sec(A, "x1", "2")), PTS22, star_basis(), 2, 2)
    assert close(c, 0.0) and close(rem, [PTS22[1], 2.0])


def test_decompose_reconstructs_random_field():
    gen = sampling.rng(9)
    Xi = ChartVectorField.from_components(sampling.polynomial_fields(gen, {"x": 2, "v": 2}, 4), 4)
    basis = star_basis()
    c, rem, cond = decompose(Xi, PTS22, basis, 2, 2)
    assert close(recompose(c, rem, basis, PTS22, 2), Xi.eval(PTS22), 1e-10)
    assert cond < 1e6


# --- morphic fields ------------------------------------------------------------


def test_complete_lift_is_morphic():
    m = load_model(pytest.importorskip("conftest").GALLERY / "cotangent_x0.model")
    A = m.algebroid
    ok, res = is_morphic(A, complete_lift(A, sec(A, "x1^2", "x0*x1")), PTS11)
    assert ok, res


def test_lie_derivative_cdo_is_morphic():
    A = tangent_algebroid(2)
    assert is_morphic(A, complete_lift(A, sec(A, "x0*x1", "1")), PTS11)[0]


def test_non_derivation_on_so3():
    A = so3()
    diag = LinearVectorField(V("0"), lambda m: [[-1.0, 0, 0], [0, -1.0, 0], [0, 0, 0]], 3)
    ok, res = is_morphic(A, diag, [np.array([0.0, 0.5])])
    assert not ok and res["derivation"] > 0.5


# --- linear 1-forms ------------------------------------------------------------


def test_pullback_pairings():
    A = tangent_algebroid(2)
    w = ChartOneForm(2, lambda p: [p[1], 1.0 + p[0] ** 2])
    qw = pullback_form(w, 2)
    up = vertical_lift(sec(A, "x0", "1"))
    assert close(qw.pair(up).eval(PTS22), 0.0)
    xi = complete_lift(A, sec(A, "x1", "x0*x1"))
    rhs = w.pair(xi.base).fn(PTS22[:2])
    assert close(qw.pair(xi.as_field()).eval(PTS22), rhs)


def test_linear_oneform_from_pairings():
    basis = star_basis()
    zero = DualSection(2, lambda p: [0.0, 0.0], 2)
    U = linear_oneform_pairings(zero, basis, [lambda P: 0.0, lambda P: 0.0], 2, 2)
    assert close(U.eval(PTS22), 0.0)
    # q*w is characterized by <q*w, X^> = 0 and <q*w, xi> = <w, x> o q
    w = ChartOneForm(2, lambda p: [p[1], 1.0])
    vals = [lambda P, xi=xi: w.pair(xi.base).fn(P[:2]) for xi in basis]
    U = linear_oneform_pairings(zero, basis, vals, 2, 2)
    assert close(U.eval(PTS22), pullback_form(w, 2).eval(PTS22), 1e-12)


# --- invariants ----------------------------------------------------------------


def test_commutator_of_linear_fields_is_linear():
    gen = sampling.rng(31)
    xi, eta = random_linear(gen, 2, 2), random_linear(gen, 2, 2)
    br = total_bracket(xi.as_field(), eta.as_field())
    ok, res = is_linear(br, 2, 2, PTS22, gen)
    assert ok and res < 1e-9


def test_cdo_correspondence_preserves_brackets():
    gen = sampling.rng(32)
    xi, eta = random_linear(gen, 2, 2), random_linear(gen, 2, 2)
    br = linear_part(total_bracket(xi.as_field(), eta.as_field()), 2, 2)
    Dx, De, Db = cdo_from_linear(xi), cdo_from_linear(eta), cdo_from_linear(br)
    X = SectionA(2, lambda p: [p[0] * p[1], 1.0 - p[1] ** 2], 2)
    lhs = Db.apply(X).eval(PTS11)
    rhs = [a - b for a, b in zip(Dx.apply(De.apply(X)).eval(PTS11), De.apply(Dx.apply(X)).eval(PTS11))]
    assert close(lhs, rhs, 1e-8)


@pytest.mark.parametrize("name", ["tangent2", "so3", "heisenberg", "cotangent_x0", "lie_poisson_so3"])
def test_lift_homomorphism_on_gallery(name):
    from conftest import GALLERY

    A = load_model(GALLERY / f"{name}.model").algebroid
    gen = sampling.rng(40)
    pts = sampling.points(gen, A.n + A.k, 20)
    X = A.section(sampling.polynomial_fields(gen, A.n, A.k))
    Y = A.section(sampling.polynomial_fields(gen, A.n, A.k))
    Xt, Yt = complete_lift(A, X).as_field(), complete_lift(A, Y).as_field()
    XY = A.bracket(X, Y)
    assert close(lift_diff(total_bracket(Xt, Yt), complete_lift(A, XY).as_field(), pts), 0.0, 1e-8)
    assert close(lift_diff(total_bracket(Xt, vertical_lift(Y)), vertical_lift(XY), pts), 0.0, 1e-8)
    assert close(total_bracket(vertical_lift(X), vertical_lift(Y)).eval(pts), 0.0, 1e-12)


def test_linear_field_against_core_lift():
    gen = sampling.rng(41)
    xi = random_linear(gen, 2, 2)
    A = tangent_algebroid(2)
    X = sec(A, "x0^2", "x1 - x0")
    DX = cdo_from_linear(xi).apply(X)
    lhs = total_bracket(xi.as_field(), vertical_lift(X))
    assert close(lift_diff(lhs, vertical_lift(DX), PTS22), 0.0, 1e-10)


@pytest.mark.parametrize("t", [0.1, 0.5, 1.0])
def test_flows_of_linear_fields_are_fiber_linear(t):
    gen = sampling.rng(50)
    for _ in range(5):
        xi = random_linear(gen, 2, 2, degree=1)
        m, v, w = sampling.points(gen, 2, 6), sampling.points(gen, 2, 6), sampling.points(gen, 2, 6)
        res = flow_linearity_defect(xi.as_field(), 2, 2, m, v, w, t, 64)
        assert res["defect"] < 1e-6 and res["offset"] < 1e-12


def test_vertical_flow_is_affine_translation():
    A = tangent_algebroid(2)
    up = vertical_lift(sec(A, "1", "x0"))
    m, v, w = sampling.points(GEN, 2, 4), sampling.points(GEN, 2, 4), sampling.points(GEN, 2, 4)
    res = flow_linearity_defect(up, 2, 2, m, v, w, 1.0, 16)
    assert res["defect"] < 1e-12 and res["offset"] > 0.1


def test_dual_flow_is_inverse_transpose():
    gen = sampling.rng(51)
    xi = random_linear(gen, 2, 2, degree=1)
    m, v, phi = sampling.points(gen, 2, 8), sampling.points(gen, 2, 8), sampling.points(gen, 2, 8)
    assert dual_flow_pairing_defect(xi, m, v, phi, 1.0, 64) < 1e-5

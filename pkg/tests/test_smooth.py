import math

import numpy as np
import pytest
from conftest import F, V, W, close
from hypothesis import given, settings
from hypothesis import strategies as st

from liftcalc import sampling
from liftcalc.smooth import (
    Bivector,
    ChartVectorField,
    ChartOneForm,
    DivergenceError,
    ScalarField,
    bivector_sharp,
    exterior_derivative,
    flow_rk4,
    lie_bracket,
    lie_derivative_bivector,
    lie_derivative_form,
)

P1 = [np.array([0.4, -0.9, 1.3])]
P2 = [np.array([0.4, -0.9, 0.2]), np.array([0.1, 0.5, -0.7])]


def symplectic():
    return Bivector.from_components(2, [F("1", 2)])


# --- lie_bracket ---------------------------------------------------------------


def test_bracket_x_d0_with_d0():
    br = lie_bracket(V("x0"), V("1"))
    assert close(br.eval(P1)[0], -1.0)


def test_bracket_antisymmetric_self():
    x = V("x0*x1", "sin(x0)")
    assert close(lie_bracket(x, x).eval(P2), 0.0)


def test_bracket_constant_fields_commute():
    assert close(lie_bracket(V("1", "0"), V("0", "1")).eval(P2), 0.0)


def test_bracket_jacobi_on_polynomials():
    gen = sampling.rng(5)
    fields = [
        ChartVectorField.from_components(sampling.polynomial_fields(gen, 3, 3, degree=2), 3) for _ in range(3)
    ]
    x, y, z = fields
    pts = sampling.points(gen, 3, 50)
    total = lie_bracket(lie_bracket(x, y), z) + lie_bracket(lie_bracket(y, z), x) + lie_bracket(lie_bracket(z, x), y)
    assert np.max(np.abs(total.eval(pts))) < 1e-10


# --- forms ---------------------------------------------------------------------


def test_lie_derivative_form_examples():
    assert close(lie_derivative_form(V("0", "1"), W("0", "x0")).eval(P2), 0.0)
    assert close(lie_derivative_form(V("-x0"), W("1")).eval(P1)[0], -1.0)
    assert close(lie_derivative_form(V("0", "0"), W("x1", "x0^2")).eval(P2), 0.0)


def test_lie_derivative_form_cartan_formula():
    x, w = V("x1^2", "sin(x0)"), W("x0*x1", "exp(x1)")
    lhs = lie_derivative_form(x, w)
    dw = exterior_derivative(w)
    first = exterior_derivative(w.pair(x))

    def ix_dw(p):
        m, xv = dw.fn(p), x.fn(p)
        return [sum(xv[i] * m[i][j] for i in range(2)) for j in range(2)]

    rhs = [a + b for a, b in zip(first.eval(P2), ChartOneForm(2, ix_dw).eval(P2))]
    assert close(lhs.eval(P2), rhs, 1e-12)


def test_exterior_derivative_examples():
    assert close(exterior_derivative(F("x0^2")).eval(P1)[0], 2 * P1[0])
    dw = exterior_derivative(W("x1", "0"))
    assert close(dw.pair(V("1", "0"), V("0", "1")).eval(P2), -1.0)
    ddf = exterior_derivative(exterior_derivative(F("sin(x0)*x1^3", 2)))
    assert close(np.asarray(ddf.fn(P2), dtype=float), 0.0, 1e-12)


# --- bivectors -----------------------------------------------------------------


def test_sharp_convention():
    assert close(bivector_sharp(symplectic(), W("1", "0")).eval(P2), [1.0 * 0, 1.0])
    assert close(bivector_sharp(symplectic(), W("0", "0")).eval(P2), 0.0)
    assert close(bivector_sharp(Bivector.zero(2), W("x0", "1")).eval(P2), 0.0)


def test_sharp_matches_pairing():
    pi = Bivector.from_components(2, [F("x0*x1 + 1", 2)])
    w, t = W("x1", "x0^2"), W("1", "sin(x0)")
    lhs = t.pair(bivector_sharp(pi, w)).eval(P2)
    assert close(lhs, pi.pair(w, t).eval(P2))


def test_lie_derivative_bivector_examples():
    pi = symplectic()
    assert close(lie_derivative_bivector(V("1", "0"), pi).upper_fn(P2), 0.0)
    assert close(lie_derivative_bivector(V("x0", "0"), pi).upper_fn(P2)[0], -1.0)


def test_schouten_detects_non_poisson():
    lie_poisson = Bivector.from_components(3, [F("x2", 3), F("-x1", 3), F("x0", 3)])
    assert lie_poisson.schouten_residual(sampling.points(sampling.rng(0), 3, 20)) < 1e-12
    # dual vector field (-x1, x0, 1) has v . curl v = 2
    broken = Bivector.from_components(3, [F("1", 3), F("-x0", 3), F("-x1", 3)])
    assert broken.schouten_residual(sampling.points(sampling.rng(0), 3, 20)) > 1e-3


# --- flows ---------------------------------------------------------------------


def test_flow_constant_field_exact():
    end = flow_rk4(V("1", "0"), [0.0, 0.0], 1.0, 4)
    assert close(end, [1.0, 0.0], 1e-15)


def test_flow_exponential_growth():
    end = flow_rk4(V("x0"), [1.0], math.log(2), 64)
    assert abs(float(end[0]) - 2.0) < 1e-8


def test_flow_zero_time_is_identity():
    p = [0.3, -0.4]
    assert close(flow_rk4(V("x1^2", "x0"), p, 0.0, 5), p, 0.0 + 1e-300)


def test_flow_divergence_reports_step():
    with pytest.raises(DivergenceError) as info:
        flow_rk4(V("x0^2"), [1.0], 5.0, 50)
    assert 1 <= info.value.step <= 50


def test_flow_rejects_zero_steps():
    with pytest.raises(ValueError):
        flow_rk4(V("x0"), [1.0], 1.0, 0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 0.5), st.floats(0.0, 0.5), st.floats(-1, 1), st.floats(-1, 1))
def test_flow_composition(t1, t2, a, b):
    x = V("-x1 + 0.1*x0^2", "x0")
    p = [a, b]
    two = flow_rk4(x, flow_rk4(x, p, t2, 64), t1, 64)
    one = flow_rk4(x, p, t1 + t2, 128)
    assert close(two, one, 1e-7)


def test_scalar_field_jet_second_derivative():
    f = ScalarField(1, lambda p: p[0] ** 3)
    value, first, second = f.jet([2.0], [1.0])
    assert (float(value), float(first), float(second)) == (8.0, 12.0, 12.0)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liftcalc import jet
from liftcalc.jet import Jet, fresh_tag, primal, split

BACKENDS = jet.available_backends()


@pytest.fixture(params=BACKENDS)
def backend(request):
    before = jet.backend_name()
    jet.set_backend(request.param)
    yield request.param
    jet.set_backend(before)


def seed(x, tag):
    return x + Jet.variable(tag)


def test_numpy_fallback_always_available():
    assert "numpy" in BACKENDS


def test_unknown_backend_rejected():
    with pytest.raises(ValueError, match="unknown jet backend"):
        jet.set_backend("fortran")


def test_first_derivatives(backend):
    t = fresh_tag()
    x = seed(np.array([0.3, -1.2, 2.0]), t)
    for fn, d in [
        (lambda z: z * z * z, lambda a: 3 * a**2),
        (jet.sin, np.cos),
        (jet.cos, lambda a: -np.sin(a)),
        (jet.exp, np.exp),
        (lambda z: 1 / (z + 5), lambda a: -1 / (a + 5) ** 2),
    ]:
        value, deriv = split(fn(x), t)
        assert np.allclose(deriv, d(np.array([0.3, -1.2, 2.0])), rtol=1e-13, atol=1e-14)


def test_nested_tags_give_second_derivative(backend):
    t1, t2 = fresh_tag(), fresh_tag()
    a = np.array([0.7])
    x = a + Jet.variable(t1) + Jet.variable(t2)
    _, d1 = split(jet.sin(x) * x, t1)
    _, d2 = split(d1, t2)
    expected = 2 * np.cos(a) - a * np.sin(a)
    assert np.allclose(primal(d2), expected, rtol=1e-13)


def test_log_sqrt(backend):
    t = fresh_tag()
    x = seed(np.array([4.0]), t)
    _, dl = split(jet.log(x), t)
    _, ds = split(jet.sqrt(x), t)
    assert math.isclose(float(primal(dl)[0]), 0.25)
    assert math.isclose(float(primal(ds)[0]), 0.25)


@settings(max_examples=40, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2))
def test_product_rule_property(a, b):
    t = fresh_tag()
    x = seed(np.array([a]), t)
    f = jet.exp(x) * jet.sin(x * b)
    _, d = split(f, t)
    expected = math.exp(a) * (math.sin(a * b) + b * math.cos(a * b))
    assert abs(float(primal(d)[0]) - expected) < 1e-10 * max(1.0, abs(expected))


def test_backends_agree_bitwise_enough():
    if len(BACKENDS) < 2:
        pytest.skip("compiled kernel not built")
    vals = []
    for name in ("numpy", "compiled"):
        jet.set_backend(name)
        t1, t2 = fresh_tag(), fresh_tag()
        x = np.linspace(-1, 1, 17) + Jet.variable(t1) + Jet.variable(t2)
        y = jet.sin(x * x) / (x + 3) + jet.exp(-x)
        _, d1 = split(y, t1)
        _, d2 = split(d1, t2)
        vals.append(np.asarray(primal(d2)))
    jet.set_backend("compiled")
    assert np.allclose(vals[0], vals[1], rtol=1e-14, atol=1e-14)

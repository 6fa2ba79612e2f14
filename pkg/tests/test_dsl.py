import math
import textwrap

import numpy as np
import pytest

from liftcalc import sampling
from liftcalc.dsl import (
    BinOp,
    Call,
    DimensionMismatch,
    DomainError,
    LexError,
    Neg,
    Num,
    ParseError,
    SchemaError,
    UnknownVariable,
    Var,
    compile_expr,
    field,
    loads,
    parse,
    to_string,
)
from liftcalc.smooth import partials

CORPUS_SIZE = 200


def random_expr(gen, n, depth):
    """Random expression whose derivative is defined on ``[-1, 1]^n``."""
    if depth == 0 or gen.random() < 0.25:
        if gen.random() < 0.5:
            return Num(float(np.round(gen.uniform(0, 3), 3)))
        return Var("x", int(gen.integers(n)))
    kind = gen.integers(7)
    a = random_expr(gen, n, depth - 1)
    if kind == 0:
        return Neg(a)
    if kind == 1:
        return Call(str(gen.choice(["sin", "cos"])), a)
    if kind == 2:  # keep exp bounded
        return Call("exp", Call("sin", a))
    if kind == 3:  # positive argument for ln and sqrt
        return Call(str(gen.choice(["ln", "sqrt"])), BinOp("+", Num(1.5), BinOp("^", a, Num(2))))
    if kind == 4:
        return BinOp("/", a, BinOp("+", Num(2), Call("cos", random_expr(gen, n, depth - 1))))
    if kind == 5:
        return BinOp("^", a, Num(float(gen.integers(0, 4))))
    return BinOp(str(gen.choice(["+", "-", "*"])), a, random_expr(gen, n, depth - 1))


@pytest.fixture(scope="module")
def corpus():
    gen = sampling.rng(2024)
    return [to_string(random_expr(gen, 3, int(gen.integers(1, 6)))) for _ in range(CORPUS_SIZE)]


# --- parse ---------------------------------------------------------------------


def test_parse_product_of_call():
    e = parse("x0*sin(x1)", 2)
    assert e == BinOp("*", Var("x", 0), Call("sin", Var("x", 1)))


def test_power_is_right_associative():
    assert float(field("2^3^2", 1).eval([0.0])) == 512.0


def test_unary_minus_binds_looser_than_power():
    assert float(field("-2^2", 1).eval([0.0])) == -4.0


def test_unknown_variable_out_of_range():
    with pytest.raises(UnknownVariable) as info:
        parse("v0 + x9", {"x": 2, "v": 1})
    assert info.value.name == "x9" and info.value.pos == 5


def test_corpus_print_parse_fixpoint(corpus):
    assert len(corpus) == CORPUS_SIZE
    for src in corpus:
        tree = parse(src, 3)
        assert parse(to_string(tree), 3) == tree, src


def test_printer_parenthesizes_minimally():
    assert to_string(parse("(x0 + x1)*x2", 3)) == "(x0 + x1)*x2"
    assert to_string(parse("x0 - (x1 - x2)", 3)) == "x0 - (x1 - x2)"
    assert to_string(parse("(x0^x1)^x2", 3)) == "(x0^x1)^x2"
    assert to_string(parse("x0^x1^x2", 3)) == "x0^x1^x2"


# --- compile -------------------------------------------------------------------


def test_square_value_and_derivative():
    f = field("x0^2", 1)
    assert float(f.eval([3.0])) == 9.0
    assert float(f.partial(0).eval([3.0])) == 6.0


def test_exp_derivative_at_zero():
    assert float(field("exp(x0)", 1).partial(0).eval([0.0])) == 1.0


def test_corpus_ad_matches_finite_differences(corpus):
    gen = sampling.rng(99)
    pts = np.asarray(sampling.points(gen, 3, 20))
    h = 1e-5
    worst = 0.0
    for src in corpus:
        f = field(src, 3)
        ad = np.asarray([np.broadcast_to(np.asarray(d, dtype=float), (20,)) for d in partials(f.fn, list(pts))])
        for j in range(3):
            up, dn = pts.copy(), pts.copy()
            up[j] += h
            dn[j] -= h
            fd = (np.broadcast_to(f.fn(list(up)), (20,)) - np.broadcast_to(f.fn(list(dn)), (20,))) / (2 * h)
            worst = max(worst, float(np.max(np.abs(ad[j] - fd) / np.maximum(1.0, np.abs(ad[j])))))
    assert worst < 1e-6


def test_division_by_zero_names_point():
    f = field("x0/x1", 2)
    with pytest.raises(DomainError) as info:
        f.eval([1.0, 0.0])
    assert info.value.point == [1.0, 0.0]
    assert "division by zero" in str(info.value)


@pytest.mark.parametrize(
    "src, fragment",
    [("sqrt(x0 - 2)", "sqrt of a negative"), ("ln(x0 - 1)", "ln of a non-positive"), ("(x0 - 1)^0.5", "non-integer exponent")],
)
def test_domain_errors(src, fragment):
    with pytest.raises(DomainError, match=fragment):
        field(src, 1).eval([0.5])


# --- diagnostics ---------------------------------------------------------------


@pytest.mark.parametrize(
    "src, exc, pos",
    [
        ("x0 $ 1", LexError, 3),
        ("x0 +", ParseError, 4),
        ("(x0 + 1", ParseError, 7),
        ("x0 x1", ParseError, 3),
        ("foo(x0)", ParseError, 0),
        ("", ParseError, 0),
        ("1 + y0", UnknownVariable, 4),
        ("sin()", ParseError, 4),
    ],
)
def test_errors_carry_positions(src, exc, pos):
    with pytest.raises(exc) as info:
        parse(src, 2)
    assert info.value.pos == pos
    assert f"position {pos}" in str(info.value)


# --- model documents -----------------------------------------------------------

SO3 = """
name: so3
base_dim: 1
fiber_dim: 3
anchor: [["0"], ["0"], ["0"]]
structure:
  - {a: 0, b: 1, c: 2, expr: "1"}
  - {a: 1, b: 2, c: 0, expr: "1"}
  - {a: 0, b: 2, c: 1, expr: "-1"}
"""


def test_so3_model_matches_matrix_commutators():
    model = loads(SO3)
    A = model.algebroid
    assert model.k == 3 and len([A.basis(a) for a in range(model.k)]) == 3
    # so(3) as antisymmetric 3x3 matrices; L_a generates rotation about axis a
    L = [np.array([[0, 0, 0], [0, 0, -1], [0, 1, 0]]), np.array([[0, 0, 1], [0, 0, 0], [-1, 0, 0]]),
         np.array([[0, -1, 0], [1, 0, 0], [0, 0, 0]])]
    for a in range(3):
        for b in range(3):
            comm = L[a] @ L[b] - L[b] @ L[a]
            coeffs = [np.sum(comm * L[c]) / 2 for c in range(3)]
            got = A.bracket(A.basis(a), A.basis(b)).eval([np.array([0.2])])
            assert np.allclose(np.ravel(got), coeffs)


def test_tangent_model_valid():
    model = loads(
        textwrap.dedent(
            """
            base_dim: 2
            fiber_dim: 2
            anchor: [["1", "0"], ["0", "1"]]
            """
        )
    )
    pts = sampling.points(sampling.rng(0), 2, 20)
    assert all(c.passed for c in model.algebroid.validate(pts))


def test_structure_entry_with_equal_indices_rejected():
    doc = SO3 + '  - {a: 1, b: 1, c: 0, expr: "1"}\n'
    with pytest.raises(SchemaError, match="structure"):
        loads(doc)


def test_model_expression_error_keeps_position():
    doc = SO3 + 'sections:\n  bad: ["x0", "1 +* 2", "0"]\n'
    with pytest.raises(SchemaError) as info:
        loads(doc)
    assert "sections.bad[1]" in str(info.value) and info.value.pos == 3


def test_model_wrong_length_section():
    with pytest.raises(DimensionMismatch):
        loads(SO3 + 'sections:\n  short: ["1", "0"]\n')


def test_malformed_yaml_has_line_and_column():
    with pytest.raises(SchemaError, match=r"line \d+, column \d+"):
        loads("base_dim: [1,\n")


def test_unknown_top_level_key():
    with pytest.raises(SchemaError, match="unknown key"):
        loads(SO3 + "extras: 1\n")


def test_compile_defaults_to_constant_field():
    f = compile_expr(parse("1.5*2"))
    assert math.isclose(float(f.eval([])), 3.0)

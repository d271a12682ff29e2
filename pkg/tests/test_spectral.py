import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shbif import spectral as sp
from shbif.errors import DomainError, PreconditionError, ScalarKindError, TruncationError
from shbif.spectral import FLOAT, RATIONAL, TrigPoly, cos, sin

from oracles import conv, real_coefficients


def exp_form(u: TrigPoly):
    from oracles import cos_exp, fadd, sin_exp

    out = {}
    for (wave, k), c in u.terms.items():
        if wave == "sin":
            out = fadd(out, sin_exp(2 * k, c))
        elif wave == "cos":
            out = fadd(out, cos_exp(2 * k, c))
        else:
            out = fadd(out, {0: (Fraction(c), Fraction(0))})
    return out


def as_real_dict(u: TrigPoly):
    return {(w, 0 if w == "const" else 2 * k): c for (w, k), c in u.terms.items()}


# eigenvalue


@pytest.mark.parametrize("k, lam, expected", [(1, 9, 0), (2, 9, 216), (3, 0, 1225)])
def test_eigenvalue_examples(k, lam, expected):
    assert sp.eigenvalue(k, lam) == expected


def test_eigenvalue_exact_for_decimal_lambda():
    assert sp.eigenvalue(1, sp.as_rational(9.3)) == Fraction(-3, 10)
    assert sp.eigenvalue(1, 9.3) == pytest.approx(-0.3)
    assert sp.eigenvalue(1, Fraction(93, 10)) == Fraction(-3, 10)


@pytest.mark.parametrize("k", [0, -1])
def test_eigenvalue_rejects_constant_and_negative_modes(k):
    with pytest.raises(DomainError):
        sp.eigenvalue(k, 9)


# TrigPoly basics


def test_canonical_form_drops_zeros():
    u = TrigPoly({("sin", 1): 0, ("cos", 2): Fraction(1, 3)})
    assert list(u.terms) == [("cos", 2)]


def test_kind_mixing_is_an_error():
    with pytest.raises(ScalarKindError):
        sin(1) + sin(1, kind=FLOAT)
    with pytest.raises(ScalarKindError):
        TrigPoly({("sin", 1): 0.5}, RATIONAL)


def test_mode_beyond_truncation_rejected():
    with pytest.raises(TruncationError):
        TrigPoly({("sin", 9): 1}, RATIONAL, 8)


def test_json_round_trip_exact():
    u = sin(1, Fraction(-3, 4864)) + cos(3, Fraction(10**30 + 1, 7)) + sp.const(Fraction(1, 3))
    text = u.to_json()
    assert TrigPoly.from_json(text) == u
    data = json.loads(text)
    assert data["kind"] == "rational"
    assert {"wave": "sin", "k": 1, "num": "-3", "den": "4864"} in data["terms"]


def test_json_round_trip_float():
    u = sin(1, 0.1, kind=FLOAT) + cos(2, -1 / 3, kind=FLOAT)
    assert TrigPoly.from_json(u.to_json()) == u


# multiply_trig


def test_product_sin2_cos4():
    assert sin(1) * cos(2) == sin(3, Fraction(1, 2)) + sin(1, Fraction(-1, 2))


def test_product_sin2_squared():
    assert sin(1) * sin(1) == sp.const(Fraction(1, 2)) + cos(2, Fraction(-1, 2))


def test_product_sin2_cubed():
    assert sin(1) * sin(1) * sin(1) == sin(1, Fraction(3, 4)) + sin(3, Fraction(-1, 4))


def test_product_overflow_is_explicit():
    with pytest.raises(TruncationError):
        sp.multiply_trig(sin(5), cos(4))
    assert sp.multiply_trig(sin(5), cos(4), K=9).max_mode == 9


rational_coeff = st.fractions(min_value=-5, max_value=5, max_denominator=20)


@st.composite
def trig_polys(draw, kind=RATIONAL, max_k=4):
    n = draw(st.integers(0, 5))
    terms = {}
    for _ in range(n):
        wave = draw(st.sampled_from(["sin", "cos"]))
        k = draw(st.integers(1, max_k))
        if kind == RATIONAL:
            terms[(wave, k)] = draw(rational_coeff)
        else:
            terms[(wave, k)] = draw(st.floats(-1, 1, allow_nan=False))
    return TrigPoly(terms, kind, 8)


@given(trig_polys(), trig_polys())
@settings(max_examples=150, deadline=None)
def test_product_matches_exponential_convolution(a, b):
    product = sp.multiply_trig(a, b)
    assert as_real_dict(product) == real_coefficients(conv(exp_form(a), exp_form(b)))


@given(trig_polys(FLOAT), trig_polys(FLOAT))
@settings(max_examples=150, deadline=None)
def test_product_pointwise_float(a, b):
    x = np.linspace(0, np.pi, 64, endpoint=False)
    got = sp.multiply_trig(a, b).evaluate(x)
    assert np.max(np.abs(got - a.evaluate(x) * b.evaluate(x)), initial=0.0) < 1e-12


@given(trig_polys(), trig_polys())
@settings(max_examples=100, deadline=None)
def test_even_wavenumber_closure(a, b):
    # every stored mode index is an integer k, i.e. wavenumber 2k
    product = sp.multiply_trig(a, b)
    assert all(isinstance(k, int) for _, k in product.terms)


# projections


def test_projection_examples():
    assert sp.project_center(sin(1) + sin(3)) == sin(1)
    assert sp.project_center(sin(1) * sin(1) * sin(1)) == sin(1, Fraction(3, 4))
    assert not sp.project_center(cos(2))


@given(trig_polys())
@settings(max_examples=100, deadline=None)
def test_projection_idempotent_and_complementary(u):
    P = sp.project_center
    assert P(P(u)) == P(u)
    assert P(u) + sp.project_stable(u) == u
    assert not P(sp.project_stable(u))


def test_constant_slot_dropped_with_counter():
    sp.const_drops.reset()
    u = sin(1) + sp.const(2)
    assert sp.project_stable(u) == TrigPoly.zero()
    assert sp.project_center(u) == sin(1)
    assert sp.const_drops.count == 2


# linear operator


def test_apply_L_examples():
    assert not sp.apply_L(9, sin(1))
    u = sin(1) * cos(2) + cos(1) * sin(2)
    # sin2x cos4x + cos2x sin4x = sin6x, eigenvalue 1216
    assert sp.apply_L(9, u) == u.scale(1216)
    assert sp.apply_L(9, sin(1) * cos(2)) == (sin(1) * cos(2) + cos(1) * sin(2)).scale(608)
    assert sp.apply_L(0, cos(2)) == cos(2, 225)


@pytest.mark.parametrize("k", range(1, 9))
@pytest.mark.parametrize("wave", ["sin", "cos"])
def test_apply_L_diagonal(k, wave):
    lam = Fraction(47, 5)
    e = TrigPoly.mode(wave, k)
    assert sp.apply_L(lam, e) == e.scale(sp.eigenvalue(k, lam))


# spectral decomposition


def test_decomposition_at_critical_value():
    dec = sp.spectral_decomposition(9)
    assert dec.center_indices == {1}
    assert dec.eigenvalues[1] == 0
    assert min(dec.eigenvalues[k] for k in dec.stable_indices) == 216
    assert dec.gap_ok


def test_decomposition_gap_violation():
    with pytest.raises(PreconditionError):
        sp.spectral_decomposition(9, beta=150)


# transition isomorphism


def rotation_projections(theta):
    v = np.array([math.cos(theta), math.sin(theta)])
    w = np.array([-math.sin(theta), math.cos(theta)])
    return np.outer(v, v), np.outer(w, w)


def test_transition_identity_for_equal_projections():
    P = sp.center_projection_matrix(4)
    Q = sp.LinearMapMatrix(sp.identity_like(P.matrix) - P.matrix, 4)
    T = sp.transition_isomorphism((P, Q), (P, Q))
    assert T.exact
    assert all(T.matrix[i, j] == (1 if i == j else 0) for i in range(8) for j in range(8))


def test_transition_rotation_toy():
    ref = (np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
    lam = rotation_projections(0.1)
    T = sp.transition_isomorphism(ref, lam).matrix
    line = np.array([math.cos(0.1), math.sin(0.1)])
    normal = np.array([-math.sin(0.1), math.cos(0.1)])
    for t in (-2.0, 0.5, 3.0):
        assert abs((T @ (t * line))[1]) < 1e-10
        assert abs((T @ (t * normal))[0]) < 1e-10
    # 2x2 hand computation: T = diag(1,0) vv^T + diag(0,1) ww^T
    c, s = math.cos(0.1), math.sin(0.1)
    expected = np.array([[c * c, c * s], [-s * c, c * c]])
    assert np.allclose(T, expected, atol=1e-14)
    assert np.isfinite(np.linalg.cond(T))


def test_transition_rejects_orthogonal_rotation():
    ref = (np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
    with pytest.raises(PreconditionError, match="1"):
        sp.transition_isomorphism(ref, rotation_projections(math.pi / 2))


def test_transition_rejects_non_idempotent():
    ref = (np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
    bad = (np.array([[1.0, 0.3], [0.0, 0.5]]), np.array([[0.0, -0.3], [0.0, 0.5]]))
    with pytest.raises(ValueError, match="idempotent"):
        sp.transition_isomorphism(ref, bad)


def test_transition_exact_oblique():
    # rational oblique projection onto span(1, 1/5) along the y-axis
    F = Fraction
    P1 = np.array([[F(1), F(0)], [F(1, 5), F(0)]], dtype=object)
    P2 = np.array([[F(0), F(0)], [F(-1, 5), F(1)]], dtype=object)
    R1 = np.array([[F(1), F(0)], [F(0), F(0)]], dtype=object)
    R2 = np.array([[F(0), F(0)], [F(0), F(1)]], dtype=object)
    T = sp.transition_isomorphism((R1, R2), (P1, P2)).matrix
    image = T @ np.array([F(5), F(1)], dtype=object)
    assert image[1] == 0 and image[0] != 0

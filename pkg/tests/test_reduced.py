from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shbif import reduced as rd
from shbif.errors import DomainError, PreconditionError
from shbif.manifold import ReducedVectorField, parameterized_reduction

from oracles import cubic_radial_time

F = Fraction


@pytest.fixture(scope="module")
def vf9():
    return parameterized_reduction(9, 5)


@pytest.fixture(scope="module")
def vf92():
    return parameterized_reduction(F(46, 5), 5)


def cubic_field():
    return ReducedVectorField({(3, 0): F(-3, 4), (1, 2): F(-3, 4)}, {(2, 1): F(-3, 4), (0, 3): F(-3, 4)}, 3)


# integration


def test_origin_is_fixed(vf9):
    traj = rd.integrate_reduced(vf9, [0.0, 0.0], 10, 0.1)
    assert np.all(traj.states == 0)
    assert len(traj.states) == 101


def test_cubic_decay_matches_closed_form():
    traj = rd.integrate_reduced(cubic_field(), [0.5, 0.0], 10, 0.01)
    r2 = float(np.sum(traj.final**2))
    assert abs(r2 - 1 / 19) / (1 / 19) < 0.02
    assert abs(np.sqrt(r2) - cubic_radial_time(0.5, 10)) < 1e-8


def test_supercritical_growth_reaches_circle(vf92):
    r_star = rd.invariant_circle(vf92).radius
    traj = rd.integrate_reduced(vf92, [0.01, 0.0], 200, 0.05)
    assert abs(np.linalg.norm(traj.final) - r_star) < 1e-3


def test_escape_is_flagged():
    vf = ReducedVectorField({(3, 0): 1, (1, 2): 1}, {(2, 1): 1, (0, 3): 1}, 3)
    traj = rd.integrate_reduced(vf, [2.0, 0.0], 10, 0.01)
    assert traj.escaped
    assert len(traj.states) < 1001


def test_integration_input_validation(vf9):
    with pytest.raises(DomainError):
        rd.integrate_reduced(vf9, [0.1, 0.0], 1, 0)
    with pytest.raises(DomainError):
        rd.integrate_reduced(vf9, [0.1, 0.0, 0.0], 1, 0.1)


def test_rk4_fourth_order():
    r0, T = 0.8, 2.0
    exact = cubic_radial_time(r0, T)
    errors = []
    for dt in (0.05, 0.025):
        final = rd.integrate_reduced(cubic_field(), [r0, 0.0], T, dt).final
        errors.append(abs(np.linalg.norm(final) - exact))
    assert 8 <= errors[0] / errors[1] <= 32


# radial structure


@pytest.mark.parametrize("theta", [0.0, np.pi / 4, np.pi / 3])
def test_radial_profile_critical(vf9, theta):
    rho = rd.radial_polynomial(vf9)
    assert rho.coeffs == {1: F(-3, 4), 2: F(3, 19456)}
    r = 0.37
    s = r * np.array([np.cos(theta), np.sin(theta)])
    assert np.allclose(vf9(s), rho(r) * s / r, atol=1e-15)


def test_radial_profile_cubic():
    assert rd.radial_polynomial(cubic_field()).coeffs == {1: F(-3, 4)}


def test_radial_profile_off_critical():
    rho = rd.radial_polynomial(parameterized_reduction(F(93, 10), 5))
    assert rho.coeffs[0] == F(3, 10)


def test_non_radial_field_rejected():
    rotation = ReducedVectorField({(0, 1): -1}, {(1, 0): 1}, 3)
    with pytest.raises(PreconditionError):
        rd.radial_polynomial(rotation)


# isolation


def test_isolation_certificate_critical(vf9):
    cert = rd.isolation_certificate(vf9, 1)
    assert cert.holds
    assert cert.lowest_degree == 4
    assert cert.leading == F(-3, 4)
    assert cert.bound == F(-1821, 2432)


def test_isolation_certificate_fails_for_large_radius(vf9):
    assert not rd.isolation_certificate(vf9, 100).holds


def test_flux_exact_sign_on_rational_radii(vf9):
    rho = rd.radial_polynomial(vf9)
    for r in (F(1, 1000), F(1, 3), F(1)):
        assert rho.exact(r) < 0


# block classification


@pytest.mark.parametrize(
    "lam, verdict",
    [(F(89, 10), rd.ATTRACTOR_LIKE), (9, rd.ATTRACTOR_LIKE), (F(91, 10), rd.REPELLER_LIKE), (F(19, 2), rd.REPELLER_LIKE)],
)
def test_block_dichotomy(lam, verdict):
    block = rd.classify_block(parameterized_reduction(lam, 5), 0.01)
    assert block.verdict == verdict
    assert block.exit_set_empty == (verdict == rd.ATTRACTOR_LIKE)


def test_block_outside_circle_is_attractor_like(vf92):
    # beyond r* the cubic wins and the flow points inward again
    assert rd.classify_block(vf92, 1.0).verdict == rd.ATTRACTOR_LIKE


def test_zero_field_is_mixed():
    vf = ReducedVectorField({}, {}, 3)
    assert rd.classify_block(vf, 0.01).verdict == rd.MIXED


def test_block_needs_enough_samples(vf9):
    with pytest.raises(DomainError):
        rd.classify_block(vf9, 0.01, samples=32)
    with pytest.raises(DomainError):
        rd.classify_block(vf9, 0)


def test_verdict_from_labels():
    I, E, T = rd.INGRESS, rd.EGRESS, rd.TANGENT
    assert rd.verdict_from_labels((I,) * 4) == rd.ATTRACTOR_LIKE
    assert rd.verdict_from_labels((E,) * 4) == rd.REPELLER_LIKE
    assert rd.verdict_from_labels((I, E, I, I)) == rd.MIXED
    assert rd.verdict_from_labels((I, I, I, T)) == rd.MIXED
    assert rd.verdict_from_labels((I, I, I, T), tangent_fraction=0.5) == rd.ATTRACTOR_LIKE


@given(st.integers(1, 200))
@settings(max_examples=30, deadline=None)
def test_block_flip_property(n):
    # any lambda slightly below 9 gives attractor-like, slightly above repeller-like
    eps = F(n, 1000)
    assert rd.classify_block(parameterized_reduction(9 - eps, 3), 0.01).verdict == rd.ATTRACTOR_LIKE
    assert rd.classify_block(parameterized_reduction(9 + eps, 3), 0.01).verdict == rd.REPELLER_LIKE


# invariant circle


def test_invariant_circle_supercritical(vf92):
    circle = rd.invariant_circle(vf92)
    assert circle.radius == pytest.approx(0.5164, abs=1e-4)
    assert abs(circle.residual) < 1e-12
    assert circle.root_count == 1


@pytest.mark.parametrize("lam", [9, F(44, 5)])
def test_no_circle_at_or_below_critical(lam):
    assert rd.invariant_circle(parameterized_reduction(lam, 5)) is None


def test_circle_scaling():
    radii = [rd.invariant_circle(parameterized_reduction(9 + F(1, 2**j), 5)).radius for j in range(2, 6)]
    for a, b in zip(radii, radii[1:]):
        assert abs(a / b - np.sqrt(2)) / np.sqrt(2) < 0.05


def test_classification_row(vf92):
    row = rd.classification_row(vf92, 0.01)
    assert row["verdict"] == rd.REPELLER_LIKE
    assert row["lambda"] == pytest.approx(9.2)
    assert row["r_star"] == pytest.approx(0.5164, abs=1e-4)


# attractor-repeller pair


def test_attractor_repeller_pair(vf92):
    report = rd.check_attractor_repeller(vf92, rd.invariant_circle(vf92), probes=8)
    assert report.passed, report.failures
    assert len(report.probes) == 8


def test_probe_at_origin_rejected(vf92):
    with pytest.raises(PreconditionError):
        rd.check_attractor_repeller(vf92, rd.invariant_circle(vf92), states=[[0.0, 0.0]])


def test_missing_circle_rejected(vf9):
    with pytest.raises(PreconditionError):
        rd.check_attractor_repeller(vf9, None)


def test_outside_probe_converges_forward(vf92):
    circle = rd.invariant_circle(vf92)
    final = rd.integrate_reduced(vf92, [0.0, 1.5 * circle.radius], 500, 0.1).final
    assert abs(np.linalg.norm(final) - circle.radius) < 1e-4

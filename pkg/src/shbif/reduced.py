"""Dynamics of the reduced planar field: flow, blocks, invariant circle."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .errors import DomainError, PreconditionError
from .manifold import ReducedVectorField

ESCAPE_NORM = 1e6

INGRESS = "ingress"
EGRESS = "egress"
TANGENT = "tangent"

ATTRACTOR_LIKE = "attractor-like"
REPELLER_LIKE = "repeller-like"
MIXED = "mixed"


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (n_steps + 1, ..., 2)
    escaped: bool = False

    @property
    def final(self):
        return self.states[-1]


def rk4_step(f, s, dt):
    k1 = f(s)
    k2 = f(s + 0.5 * dt * k1)
    k3 = f(s + 0.5 * dt * k2)
    k4 = f(s + dt * k3)
    return s + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_reduced(vf: ReducedVectorField, s0, T, dt, backward=False) -> Trajectory:
    """Classical RK4 flow of ``vf`` from ``s0`` (shape ``(2,)`` or ``(n, 2)``).

    Returns ``floor(T/dt) + 1`` states, or fewer if the norm passes 1e6, in
    which case the trajectory is flagged as escaped.
    """
    if dt <= 0:
        raise DomainError("dt must be positive")
    if T < dt:
        raise DomainError("T must be at least dt")
    s = np.array(s0, dtype=float)
    if s.shape[-1] != 2 or not np.all(np.isfinite(s)):
        raise DomainError("initial state must be finite with trailing dimension 2")
    n = int(math.floor(T / dt + 1e-9))
    sign = -1.0 if backward else 1.0

    def f(x):
        return sign * vf(x)

    states = np.empty((n + 1,) + s.shape)
    states[0] = s
    for i in range(n):
        s = rk4_step(f, s, dt)
        if not np.all(np.isfinite(s)) or np.max(np.abs(s)) > ESCAPE_NORM:
            return Trajectory(np.arange(i + 1) * dt, states[: i + 1].copy(), escaped=True)
        states[i + 1] = s
    return Trajectory(np.arange(n + 1) * dt, states)


def _poly_equal(p, q):
    keys = set(p) | set(q)
    return all(p.get(k, 0) == q.get(k, 0) for k in keys)


def _radial_form(radial_coeffs, component):
    # s_component * sum_j q_j (s1^2 + s2^2)^j as a coefficient dict
    out = {}
    for j, qj in radial_coeffs.items():
        for i in range(j + 1):
            m = [2 * i, 2 * (j - i)]
            m[component] += 1
            out[tuple(m)] = out.get(tuple(m), Fraction(0)) + qj * comb(j, i)
    return out


@dataclass(frozen=True)
class RadialPolynomial:
    """``rho(r) = sum_j q_j r^(2j+1)`` with exact coefficients ``q_j``."""

    coeffs: dict  # j -> q_j

    @property
    def powers(self):
        return {2 * j + 1: q for j, q in self.coeffs.items()}

    def exact(self, r):
        r = Fraction(r)
        return sum((q * r ** (2 * j + 1) for j, q in self.coeffs.items()), Fraction(0))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return sum((float(q) * r ** (2 * j + 1) for j, q in self.coeffs.items()), np.zeros_like(r))

    def reduced(self, r):
        """``rho(r) / r``, finite at ``r = 0``."""
        r = np.asarray(r, dtype=float)
        return sum((float(q) * r ** (2 * j) for j, q in self.coeffs.items()), np.zeros_like(r))


def radial_polynomial(vf: ReducedVectorField) -> RadialPolynomial:
    """Radial profile of an O(2)-equivariant field ``G(s) = q(|s|^2) s``.

    Raises ``PreconditionError`` if the field is not exactly of that form.
    """
    radial = {}
    for (a, b), c in vf.G1.items():
        if b == 0:
            if a % 2 == 0:
                raise PreconditionError(f"G1 has even monomial s1^{a}; field is not radial")
            radial[(a - 1) // 2] = c
    if not (_poly_equal(dict(vf.G1), _radial_form(radial, 0)) and _poly_equal(dict(vf.G2), _radial_form(radial, 1))):
        raise PreconditionError("field has a tangential or non-radial part")
    return RadialPolynomial(dict(sorted(radial.items())))


def outward_flux(vf: ReducedVectorField):
    """Polynomial ``<G(s), s>`` as an exact coefficient dict."""
    out = {}
    for G, shift in ((vf.G1, (1, 0)), (vf.G2, (0, 1))):
        for (a, b), c in G.items():
            m = (a + shift[0], b + shift[1])
            out[m] = out.get(m, Fraction(0)) + c
    return {m: c for m, c in out.items() if c}


@dataclass(frozen=True)
class IsolationCertificate:
    """Exact certificate that ``<G(s), s> < 0`` on ``0 < |s| <= R``.

    The lowest homogeneous part of the flux equals ``leading * |s|^n``; the
    higher parts are bounded by ``sum |coeff| * |s|^deg``.  ``bound`` is
    ``leading + sum_deg (sum |coeff|) R^(deg - n)``; negative means inward
    flux on every circle of radius in ``(0, R]``.
    """

    R: Fraction
    lowest_degree: int
    leading: Fraction
    bound: Fraction

    @property
    def holds(self) -> bool:
        return self.leading < 0 and self.bound < 0


def isolation_certificate(vf: ReducedVectorField, R=1) -> IsolationCertificate:
    R = Fraction(R)
    if R <= 0:
        raise DomainError("R must be positive")
    flux = outward_flux(vf)
    if not flux:
        raise PreconditionError("field is identically zero")
    by_degree = {}
    for m, c in flux.items():
        by_degree.setdefault(m[0] + m[1], {})[m] = c
    n = min(by_degree)
    if n % 2:
        raise PreconditionError(f"lowest flux degree {n} is odd; no sign certificate")
    lowest = by_degree[n]
    leading = lowest.get((n, 0), Fraction(0))
    expected = {(2 * i, n - 2 * i): leading * comb(n // 2, i) for i in range(n // 2 + 1)}
    if not _poly_equal(lowest, expected):
        raise PreconditionError("lowest flux part is not a multiple of |s|^n")
    bound = leading
    for d, part in by_degree.items():
        if d > n:
            bound += sum(abs(c) for c in part.values()) * R ** (d - n)
    return IsolationCertificate(R, n, leading, bound)


@dataclass(frozen=True)
class BlockClassification:
    radius: float
    samples: int
    labels: tuple
    verdict: str
    tol: float
    normal_min: float
    normal_max: float

    @property
    def exit_set_empty(self) -> bool:
        return EGRESS not in self.labels and TANGENT not in self.labels

    def counts(self):
        return {lab: self.labels.count(lab) for lab in (INGRESS, EGRESS, TANGENT)}


def verdict_from_labels(labels, tangent_fraction=0.0) -> str:
    """Verdict from boundary labels; tangencies above the allowed fraction force "mixed"."""
    tangent = labels.count(TANGENT)
    if tangent and tangent >= tangent_fraction * len(labels):
        return MIXED
    rest = [lab for lab in labels if lab != TANGENT]
    if rest and all(lab == INGRESS for lab in rest):
        return ATTRACTOR_LIKE
    if rest and all(lab == EGRESS for lab in rest):
        return REPELLER_LIKE
    return MIXED


def classify_block(vf: ReducedVectorField, radius, samples=64, tol=None, tangent_fraction=0.0):
    """Label the boundary of the disk ``|s| <= radius`` by the sign of ``<G, n>``.

    Empty exit set gives ``"attractor-like"``, all-egress gives
    ``"repeller-like"``, anything else (including tangencies) ``"mixed"``.
    """
    if radius <= 0:
        raise DomainError("radius must be positive")
    if samples < 64:
        raise DomainError("at least 64 boundary samples are required")
    if tol is None:
        tol = 1e-12 * vf.max_abs_coefficient * radius**3
    theta = 2 * np.pi * np.arange(samples) / samples
    pts = radius * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    normal = np.sum(vf(pts) * pts, axis=-1) / radius
    labels = tuple(TANGENT if abs(v) <= tol else (EGRESS if v > 0 else INGRESS) for v in normal)
    return BlockClassification(
        float(radius), samples, labels, verdict_from_labels(labels, tangent_fraction), float(tol),
        float(normal.min()), float(normal.max()),
    )


@dataclass(frozen=True)
class InvariantCircle:
    radius: float
    lam: float
    residual: float
    root_count: int = 1


def invariant_circle(vf: ReducedVectorField, r_max=10.0, grid=20000, xtol=1e-12):
    """Smallest positive root of the radial polynomial in ``(0, r_max]``, or None."""
    rho = radial_polynomial(vf)
    r = np.linspace(0.0, r_max, grid + 1)
    # rho(r)/r removes the trivial zero at the origin; its value at 0 is the linear rate
    q = rho.reduced(r)
    changes = [i for i in range(grid) if q[i] * q[i + 1] < 0 or (q[i + 1] == 0 and q[i] != 0)]
    if not changes:
        return None
    i = changes[0]
    lo, hi, flo = r[i], r[i + 1], q[i]
    if q[i + 1] != 0:
        while hi - lo > xtol:
            mid = 0.5 * (lo + hi)
            fm = float(rho.reduced(mid))
            if fm == 0:
                lo = hi = mid
            elif (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
    root = 0.5 * (lo + hi) if q[i + 1] != 0 else hi
    return InvariantCircle(float(root), float(vf.lam), float(rho(root)), len(changes))


@dataclass(frozen=True)
class ProbeResult:
    start: tuple
    forward_distance: float
    backward_norm: float
    passed: bool


@dataclass(frozen=True)
class AttractorRepellerReport:
    lam: float
    circle_radius: float
    probes: tuple

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.probes)

    @property
    def failures(self):
        return [p for p in self.probes if not p.passed]


def check_attractor_repeller(vf, circle: InvariantCircle, probes=8, radius_fraction=0.5,
                             T=500.0, dt=0.1, forward_tol=1e-4, backward_tol=1e-6, states=None):
    """Check that probes in the punctured disk flow forward to the circle and backward to 0.

    ``states`` overrides the default probes (``probes`` equispaced angles on
    ``|s| = radius_fraction * r*``); every state needs ``0 < |s| < r*``.
    """
    if circle is None:
        raise PreconditionError("no invariant circle; the attractor-repeller check needs lam > 9")
    r_star = circle.radius
    if states is None:
        theta = 2 * np.pi * np.arange(probes) / probes
        states = radius_fraction * r_star * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    states = np.atleast_2d(np.asarray(states, dtype=float))
    norms = np.linalg.norm(states, axis=-1)
    if np.any(norms <= 0) or np.any(norms >= r_star):
        raise PreconditionError("probes must satisfy 0 < |s| < r*")
    fwd = integrate_reduced(vf, states, T, dt).final
    bwd_traj = integrate_reduced(vf, states, T, dt, backward=True)
    fwd_dist = np.abs(np.linalg.norm(fwd, axis=-1) - r_star)
    bwd_norm = np.linalg.norm(bwd_traj.final, axis=-1)
    results = tuple(
        ProbeResult(tuple(map(float, s)), float(fd), float(bn),
                    bool(fd < forward_tol and bn < backward_tol and not bwd_traj.escaped))
        for s, fd, bn in zip(states, fwd_dist, bwd_norm)
    )
    return AttractorRepellerReport(float(vf.lam), r_star, results)


def classification_row(vf: ReducedVectorField, radius, samples=64) -> dict:
    """JSON row ``{"lambda", "r", "verdict", "r_star"}``."""
    block = classify_block(vf, radius, samples)
    circle = invariant_circle(vf)
    return {
        "lambda": float(vf.lam),
        "r": float(radius),
        "verdict": block.verdict,
        "r_star": None if circle is None else circle.radius,
    }

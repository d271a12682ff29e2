"""Galerkin simulation of ``u_t = -(1 + d^2/dx^2)^2 u + lam u - u^3`` on (0, pi).

States are real coefficient vectors ``[a1, b1, a2, b2, ..., aK, bK]`` for
``u = sum a_k sin(2kx) + b_k cos(2kx)`` (the same ordering as
``spectral.to_vector``).  Norms are the Euclidean norm of this vector, i.e.
``sqrt(2/pi)`` times the L2(0, pi) norm, so a single mode ``a sin2x`` has
norm ``|a|``.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import spectral as sp
from .errors import ConvergenceError, DomainError, PreconditionError
from .spectral import FLOAT, TrigPoly

log = logging.getLogger(__name__)

ESCAPE_NORM = 1e6
SWEEP_HEADER = (
    "lambda", "dist_H", "r_star_reduced", "amplitude_newton", "block_verdict",
    "converged_count", "escaped_count",
)


@dataclass(frozen=True)
class SimConfig:
    lam: float
    K: int = sp.DEFAULT_K_SIMULATION
    dt: float = 1e-3
    T: float = 200.0
    ic_seed: int = 0
    ic_count: int = 16
    ic_radius: float = 1.0
    tol: float = 1e-8
    scheme: str = "etdrk4"

    def __post_init__(self):
        if self.dt <= 0:
            raise DomainError("dt must be positive")
        if self.K < 4:
            raise DomainError("K must be at least 4")
        if self.tol <= 0:
            raise DomainError("tol must be positive")
        if self.T < self.dt:
            raise DomainError("T must be at least dt")
        if self.scheme not in ("etd1", "etdrk4"):
            raise DomainError(f"unknown scheme {self.scheme!r}")


def eigenvalues(lam, K) -> np.ndarray:
    k = np.arange(1, K + 1)
    return (1.0 - 4.0 * k**2) ** 2 - float(lam)


def _grid_size(K):
    # strictly above 4K: the cube of a degree-K polynomial does not alias back
    return 4 * (K + 1)


def to_complex(v):
    """``[a1, b1, ...] -> c_k`` with ``u = 2 Re sum c_k exp(2ikx)``."""
    v = np.asarray(v, dtype=float)
    return 0.5 * (v[..., 1::2] - 1j * v[..., 0::2])


def from_complex(c):
    out = np.empty(c.shape[:-1] + (2 * c.shape[-1],))
    out[..., 0::2] = -2.0 * c.imag
    out[..., 1::2] = 2.0 * c.real
    return out


def cubic_term(c, K):
    """Mean-zero projection of ``-u^3`` in complex coefficients, dealiased."""
    n = _grid_size(K)
    X = np.zeros(c.shape[:-1] + (n // 2 + 1,), dtype=complex)
    X[..., 1 : K + 1] = n * c
    u = np.fft.irfft(X, n=n)
    Y = np.fft.rfft(-(u**3)) / n
    return Y[..., 1 : K + 1]


def rhs(v, lam):
    """Right-hand side ``-L_lam u - u^3`` (mean-zero part) in real coefficients."""
    v = np.asarray(v, dtype=float)
    K = v.shape[-1] // 2
    c = to_complex(v)
    return from_complex(-eigenvalues(lam, K) * c + cubic_term(c, K))


def state_norm(v):
    return np.linalg.norm(np.asarray(v, dtype=float), axis=-1)


def coefficients_from_trigpoly(u: TrigPoly, K) -> np.ndarray:
    if not u.is_mean_zero:
        raise PreconditionError("initial state must have zero mean")
    if u.max_mode > K:
        raise PreconditionError(f"initial state uses mode {u.max_mode} beyond K={K}")
    return np.asarray(sp.to_vector(u.astype(FLOAT), K), dtype=float)


def trigpoly_from_coefficients(v) -> TrigPoly:
    return sp.from_vector([float(x) for x in v], FLOAT)


class _Stepper:
    """Exponential integrator on the diagonal linear part, in complex modes."""

    def __init__(self, lam, K, dt, scheme="etdrk4", contour_points=32):
        self.K = K
        self.scheme = scheme
        L = -eigenvalues(lam, K)
        z = dt * L
        self.E = np.exp(z)
        self.E2 = np.exp(z / 2)
        roots = np.exp(1j * np.pi * (np.arange(1, contour_points + 1) - 0.5) / contour_points)
        lr = z[:, None] + roots[None, :]
        if scheme == "etd1":
            self.phi1 = dt * np.real(np.mean((np.exp(lr) - 1) / lr, axis=1))
            return
        self.Q = dt * np.real(np.mean((np.exp(lr / 2) - 1) / lr, axis=1))
        self.f1 = dt * np.real(np.mean((-4 - lr + np.exp(lr) * (4 - 3 * lr + lr**2)) / lr**3, axis=1))
        self.f2 = dt * np.real(np.mean((2 + lr + np.exp(lr) * (lr - 2)) / lr**3, axis=1))
        self.f3 = dt * np.real(np.mean((-4 - 3 * lr - lr**2 + np.exp(lr) * (4 - lr)) / lr**3, axis=1))

    def __call__(self, c):
        K = self.K
        Nc = cubic_term(c, K)
        if self.scheme == "etd1":
            return self.E * c + self.phi1 * Nc
        a = self.E2 * c + self.Q * Nc
        Na = cubic_term(a, K)
        b = self.E2 * c + self.Q * Na
        Nb = cubic_term(b, K)
        d = self.E2 * a + self.Q * (2 * Nb - Nc)
        Nd = cubic_term(d, K)
        return self.E * c + self.f1 * Nc + 2 * self.f2 * (Na + Nb) + self.f3 * Nd


@dataclass(frozen=True)
class PDETrajectory:
    times: np.ndarray
    states: np.ndarray  # (n_samples, ..., 2K)
    lam: float
    escaped: bool = False

    @property
    def final(self):
        return self.states[-1]

    def norms(self):
        return state_norm(self.states)


def integrate_pde(cfg: SimConfig, u0, sample_every=1) -> PDETrajectory:
    """Integrate from ``u0`` (TrigPoly or coefficient array, batch allowed) to ``cfg.T``.

    Every ``sample_every``-th step is stored; the final state is always
    stored.  Stops early and flags ``escaped`` if the norm exceeds 1e6.
    """
    v0 = coefficients_from_trigpoly(u0, cfg.K) if isinstance(u0, TrigPoly) else np.asarray(u0, dtype=float)
    if v0.shape[-1] != 2 * cfg.K:
        raise PreconditionError(f"state has {v0.shape[-1]} coefficients, expected {2 * cfg.K}")
    step = _Stepper(cfg.lam, cfg.K, cfg.dt, cfg.scheme)
    n = int(math.floor(cfg.T / cfg.dt + 1e-9))
    c = to_complex(v0)
    times, states = [0.0], [v0.copy()]
    escaped = False
    # overflow past the escape threshold is detected below, not warned about
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, n + 1):
            c = step(c)
            if i % sample_every == 0 or i == n:
                v = from_complex(c)
                times.append(i * cfg.dt)
                states.append(v)
                if not np.all(np.isfinite(v)) or np.max(state_norm(v)) > ESCAPE_NORM:
                    escaped = True
                    break
    return PDETrajectory(np.array(times), np.array(states), float(cfg.lam), escaped)


def lyapunov_value(u, lam):
    """``V(u) = 1/2 int |(1 + d^2/dx^2) u|^2 - int (lam/2 u^2 - u^4/4)`` over (0, pi).

    Quadratic part by Parseval, quartic part by convolving coefficients.
    Accepts a float TrigPoly or a coefficient vector (or a stack of them).
    """
    if isinstance(u, TrigPoly):
        if u.kind != FLOAT:
            raise sp.ScalarKindError("lyapunov_value expects a float TrigPoly")
        v = coefficients_from_trigpoly(u, max(u.max_mode, 1))
    else:
        v = np.asarray(u, dtype=float)
    if v.ndim > 1:
        return np.array([lyapunov_value(x, lam) for x in v.reshape(-1, v.shape[-1])]).reshape(v.shape[:-1])
    K = v.shape[-1] // 2
    energy = v[0::2] ** 2 + v[1::2] ** 2
    quadratic = (math.pi / 4) * float(np.sum(eigenvalues(lam, K) * energy))
    c = to_complex(v)
    full = np.concatenate([np.conj(c[::-1]), [0.0], c])
    sq = np.convolve(full, full)
    quartic = (math.pi / 4) * float(np.sum(np.abs(sq) ** 2))
    return quadratic + quartic


@dataclass(frozen=True)
class StationaryState:
    lam: float
    K: int
    amplitude: float
    coefficients: np.ndarray  # sine coefficients a_1..a_K
    residual: float
    iterations: int

    @property
    def sup_norm(self) -> float:
        y = np.linspace(0, 2 * np.pi, 2049)
        k = np.arange(1, self.K + 1)
        return float(np.max(np.abs(np.sin(np.outer(y, k)) @ self.coefficients)))

    def as_vector(self):
        v = np.zeros(2 * self.K)
        v[0::2] = self.coefficients
        return v


def stationary_amplitude(lam, K=sp.DEFAULT_K_REDUCTION, tol=1e-12, max_iter=50) -> StationaryState:
    """Newton solve of the steady Galerkin system on ``u = sum a_k sin(2kx)``.

    Starts from ``a1 = 2 sqrt((lam - 9)/3)``; returns the zero state for
    ``lam <= 9``.
    """
    lam = float(lam)
    if lam <= 9:
        return StationaryState(lam, K, 0.0, np.zeros(K), 0.0, 0)
    n = _grid_size(K)
    y = 2 * np.pi * np.arange(n) / n
    S = np.sin(np.outer(y, np.arange(1, K + 1)))
    lk = eigenvalues(lam, K)
    a = np.zeros(K)
    a[0] = 2 * math.sqrt((lam - 9) / 3)

    def residual(a):
        u = S @ a
        return -lk * a - (2.0 / n) * (S.T @ u**3), u

    F, u = residual(a)
    res = float(np.max(np.abs(F)))
    for it in range(1, max_iter + 1):
        J = -np.diag(lk) - (6.0 / n) * (S.T * u**2) @ S
        a = a - np.linalg.solve(J, F)
        F, u = residual(a)
        res = float(np.max(np.abs(F)))
        if res < tol:
            return StationaryState(lam, K, abs(float(a[0])), a, res, it)
    raise ConvergenceError(f"Newton did not converge in {max_iter} iterations at lam={lam}", res)


@dataclass(frozen=True)
class AttractorSample:
    lam: float
    states: np.ndarray  # (n, 2K) converged, deduplicated
    residuals: np.ndarray
    converged_count: int
    escaped_count: int
    unconverged_count: int
    pending: np.ndarray = None  # end points of runs still moving at T

    @property
    def norms(self):
        return state_norm(self.states)

    @property
    def dist_H(self) -> float:
        """Hausdorff semi-distance from the sampled end points to the origin.

        Runs still moving at ``T`` are included: at criticality the decay is
        algebraic and none of them meets the convergence test.
        """
        pts = self.states if self.pending is None else np.concatenate([self.states, self.pending])
        return float(np.max(state_norm(pts))) if len(pts) else float("nan")

    def as_trigpolys(self):
        return [trigpoly_from_coefficients(v) for v in self.states]


def random_initial_states(cfg: SimConfig) -> np.ndarray:
    """Seeded initial coefficient vectors with norm ``<= ic_radius``."""
    rng = np.random.default_rng(cfg.ic_seed)
    z = rng.standard_normal((cfg.ic_count, 2 * cfg.K))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    radii = cfg.ic_radius * rng.uniform(0.1, 1.0, size=(cfg.ic_count, 1))
    return z * radii


def _dedupe(states, radius):
    kept = []
    for i, v in enumerate(states):
        if all(np.linalg.norm(v - states[j]) > radius for j in kept):
            kept.append(i)
    return kept


def sample_attractor(cfg: SimConfig, initial_states=None) -> AttractorSample:
    """Run seeded initial data to steady state and collect the end points.

    A run counts as converged once ``||u(t+1) - u(t)|| < tol`` and the
    right-hand side norm is below ``tol``; runs still moving at ``T`` are
    excluded and counted.
    """
    if cfg.ic_count < 8 and initial_states is None:
        raise DomainError("ic_count must be at least 8")
    v = random_initial_states(cfg) if initial_states is None else np.atleast_2d(np.asarray(initial_states, dtype=float))
    step = _Stepper(cfg.lam, cfg.K, cfg.dt, cfg.scheme)
    per_unit = max(1, int(round(1.0 / cfg.dt)))
    n_total = int(math.floor(cfg.T / cfg.dt + 1e-9))
    c = to_complex(v)
    active = np.arange(len(v))
    done_states, done_res = {}, {}
    escaped = set()
    prev = from_complex(c)
    i = 0
    while i < n_total and len(active):
        for _ in range(min(per_unit, n_total - i)):
            c = step(c)
        i += per_unit
        cur = from_complex(c)
        norms = state_norm(cur)
        bad = ~np.isfinite(norms) | (norms > ESCAPE_NORM)
        moved = state_norm(cur - prev)
        res = state_norm(rhs(cur, cfg.lam))
        done = (moved < cfg.tol) & (res < cfg.tol) & ~bad
        for j in np.flatnonzero(bad):
            escaped.add(int(active[j]))
        for j in np.flatnonzero(done):
            done_states[int(active[j])] = cur[j]
            done_res[int(active[j])] = res[j]
        keep = ~(bad | done)
        active, c, prev = active[keep], c[keep], cur[keep]
    order = sorted(done_states)
    states = np.array([done_states[j] for j in order]).reshape(-1, 2 * cfg.K)
    residuals = np.array([done_res[j] for j in order])
    kept = _dedupe(states, 10 * cfg.tol)
    if len(active):
        log.info("lam=%g: %d runs not converged by T=%g", cfg.lam, len(active), cfg.T)
    pending = prev.reshape(-1, 2 * cfg.K)
    return AttractorSample(float(cfg.lam), states[kept], residuals[kept], len(order), len(escaped), len(active), pending)


@dataclass
class SweepRow:
    lam: float
    dist_H: float = float("nan")
    r_star_reduced: float | None = None
    amplitude_newton: float = float("nan")
    block_verdict: str = ""
    converged_count: int = 0
    escaped_count: int = 0
    errors: list = field(default_factory=list)

    def csv_fields(self):
        def fmt(x):
            if x is None:
                return "none"
            if isinstance(x, float):
                return format(x, ".17g")
            return str(x)

        return [fmt(self.lam), fmt(self.dist_H), fmt(self.r_star_reduced), fmt(self.amplitude_newton),
                self.block_verdict, str(self.converged_count), str(self.escaped_count)]


def sweep_row(lam, cfg_template: SimConfig, block_radius=0.01, order=5, newton_K=None) -> SweepRow:
    """One independent row of the bifurcation table; failures are recorded, not raised."""
    from .manifold import parameterized_reduction
    from .reduced import classify_block, invariant_circle

    row = SweepRow(float(lam))
    try:
        sample = sample_attractor(replace(cfg_template, lam=float(lam)))
        row.dist_H = sample.dist_H
        row.converged_count = sample.converged_count
        row.escaped_count = sample.escaped_count
    except Exception as exc:  # noqa: BLE001 - recorded in the row
        row.errors.append(f"sample_attractor: {exc}")
    try:
        vf = parameterized_reduction(lam, order)
        circle = invariant_circle(vf)
        row.r_star_reduced = None if circle is None else circle.radius
        row.block_verdict = classify_block(vf, block_radius).verdict
    except Exception as exc:  # noqa: BLE001
        row.errors.append(f"reduction: {exc}")
    try:
        row.amplitude_newton = stationary_amplitude(lam, newton_K or cfg_template.K).amplitude
    except Exception as exc:  # noqa: BLE001
        row.errors.append(f"stationary_amplitude: {exc}")
    return row


def bifurcation_sweep(lambdas, cfg_template: SimConfig, block_radius=0.01, order=5, workers=1):
    """Rows ``(lam, dist_H, r*, Newton amplitude, block verdict, counts)`` in input order."""
    lambdas = list(lambdas)
    if not lambdas:
        raise DomainError("empty parameter list")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(sweep_row, lam, cfg_template, block_radius, order) for lam in lambdas]
            return [f.result() for f in futures]
    return [sweep_row(lam, cfg_template, block_radius, order) for lam in lambdas]


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())
    return buf.getvalue()


def config_echo(cfg: SimConfig) -> dict:
    return asdict(cfg)

"""Center-manifold reduction of the cubic Swift-Hohenberg flow.

The center coordinates are ``(s1, s2)`` with ``u1 = s1 sin2x + s2 cos2x``.
Series in the center coordinates are dicts ``{(a, b): TrigPoly}`` standing
for ``sum s1^a s2^b * coefficient``.  All arithmetic is exact.

The manifold map is solved degree by degree in the eigenbasis of the linear
operator, where the homological equation is a scalar division per mode.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Mapping

import numpy as np

from . import spectral as sp
from .errors import DomainError, PreconditionError, ResonanceError
from .spectral import COS, RATIONAL, SIN, TrigPoly, as_rational

CRITICAL_LAMBDA = Fraction(9)

EIGEN = "eigen"
PRODUCT = "product"

SIN2_COS4 = "sin2x*cos4x"
COS2_COS4 = "cos2x*cos4x"


def monomial_key(m):
    """Graded lexicographic order: by degree, then by falling s1 power."""
    a, b = m
    return (a + b, -a)


def center_rate(lam) -> Fraction:
    """Linear growth rate ``lam - 9`` of the center modes."""
    return -sp.eigenvalue(1, as_rational(lam))


# series helpers; a series is {(a, b): TrigPoly} with rational coefficients


def _degree(m):
    return m[0] + m[1]


def _add_into(acc, m, poly):
    if m in acc:
        poly = acc[m] + poly
    if poly:
        acc[m] = poly
    else:
        acc.pop(m, None)


def series_add(*series):
    out = {}
    for s in series:
        for m, p in s.items():
            _add_into(out, m, p)
    return out


def series_mul(A, B, max_degree, K):
    out = {}
    for ma, pa in A.items():
        for mb, pb in B.items():
            m = (ma[0] + mb[0], ma[1] + mb[1])
            if _degree(m) > max_degree:
                continue
            _add_into(out, m, sp.multiply_trig(pa, pb, K))
    return out


def series_map(f, A):
    out = {}
    for m, p in A.items():
        _add_into(out, m, f(p))
    return out


def series_truncate(A, max_degree):
    return {m: p for m, p in A.items() if _degree(m) <= max_degree}


def u1_series(K=sp.DEFAULT_K_REDUCTION):
    return {(1, 0): sp.sin(1, K=K), (0, 1): sp.cos(1, K=K)}


def nonlinearity(W, max_degree, K, gamma=Fraction(1)):
    """Series of ``g(W) = -gamma * W^3`` through ``max_degree``."""
    if gamma == 0:
        return {}
    W2 = series_mul(W, W, max_degree - 1, K)
    W3 = series_mul(W2, W, max_degree, K)
    return series_map(lambda p: p.scale(-gamma), W3)


def _tangent_action(psi, v1, v2, max_degree, K):
    """Directional derivative ``psi'(u1) v`` for center velocity ``v = v1 sin2x + v2 cos2x``.

    ``v1`` and ``v2`` are scalar polynomials ``{(a, b): Fraction}``.
    """
    out = {}
    for (a, b), p in psi.items():
        for comp, power, dm in ((v1, a, (a - 1, b)), (v2, b, (a, b - 1))):
            if power == 0:
                continue
            for (c, d), coef in comp.items():
                m = (dm[0] + c, dm[1] + d)
                if _degree(m) > max_degree:
                    continue
                _add_into(out, m, p.scale(power * coef))
    return out


def _center_components(series):
    v1, v2 = {}, {}
    for m, p in series.items():
        c1, c2 = p.coeff(SIN, 1), p.coeff(COS, 1)
        if c1:
            v1[m] = c1
        if c2:
            v2[m] = c2
    return v1, v2


@dataclass(frozen=True)
class CenterManifoldMap:
    """Polynomial map from center coordinates into the stable subspace.

    ``coefficients[(a, b)]`` multiplies ``s1^a s2^b``.  ``order`` is the
    degree through which the map is claimed valid.  Maps in the ``"product"``
    basis are comparison objects that may carry center-subspace parts.
    """

    coefficients: Mapping[tuple, TrigPoly]
    lam: Fraction = CRITICAL_LAMBDA
    order: int = 3
    K: int = sp.DEFAULT_K_REDUCTION
    basis: str = EIGEN
    gamma: Fraction = Fraction(1)

    def __post_init__(self):
        coeffs = {}
        for m, p in self.coefficients.items():
            a, b = m
            if a < 0 or b < 0:
                raise ValueError(f"negative exponent in monomial {m}")
            if not isinstance(p, TrigPoly) or p.kind != RATIONAL:
                raise TypeError("manifold coefficients must be rational TrigPoly values")
            if p:
                coeffs[(int(a), int(b))] = p
        for m, p in coeffs.items():
            if _degree(m) < 3:
                raise ValueError(f"manifold map has a term of degree {_degree(m)} at {m}")
            if self.basis == EIGEN and sp.project_center(p):
                raise ValueError(f"coefficient of {m} has a center component")
        ordered = dict(sorted(coeffs.items(), key=lambda kv: monomial_key(kv[0])))
        object.__setattr__(self, "coefficients", MappingProxyType(ordered))
        object.__setattr__(self, "lam", as_rational(self.lam))
        object.__setattr__(self, "gamma", as_rational(self.gamma))

    @classmethod
    def zero(cls, lam=CRITICAL_LAMBDA, order=3, K=sp.DEFAULT_K_REDUCTION):
        return cls({}, lam, order, K)

    def __getitem__(self, m):
        return self.coefficients.get(tuple(m), TrigPoly.zero(RATIONAL, self.K))

    def items(self):
        return self.coefficients.items()

    def __call__(self, s1, s2) -> TrigPoly:
        """The stable-space function ``psi(s1 sin2x + s2 cos2x)``."""
        exact = not (isinstance(s1, float) or isinstance(s2, float))
        out = TrigPoly.zero(RATIONAL if exact else sp.FLOAT, self.K)
        for (a, b), p in self.coefficients.items():
            w = as_rational(s1) ** a * as_rational(s2) ** b if exact else float(s1) ** a * float(s2) ** b
            out = out + (p if exact else p.astype(sp.FLOAT)).scale(w)
        return out

    def with_coefficient(self, m, poly) -> "CenterManifoldMap":
        coeffs = dict(self.coefficients)
        coeffs[tuple(m)] = poly
        return CenterManifoldMap(coeffs, self.lam, self.order, self.K, self.basis, self.gamma)

    def to_dict(self) -> dict:
        return {
            "lambda": str(self.lam),
            "order": self.order,
            "K": self.K,
            "basis": self.basis,
            "gamma": str(self.gamma),
            "terms": [
                {"a": a, "b": b, "value": p.to_dict()} for (a, b), p in self.coefficients.items()
            ],
        }

    @classmethod
    def from_dict(cls, data) -> "CenterManifoldMap":
        K = int(data["K"])
        coeffs = {}
        for row in data["terms"]:
            coeffs[(int(row["a"]), int(row["b"]))] = TrigPoly.from_dict(row["value"], K)
        return cls(coeffs, Fraction(data["lambda"]), int(data["order"]), K, data["basis"], Fraction(data["gamma"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_json(cls, text) -> "CenterManifoldMap":
        return cls.from_dict(json.loads(text))


def homological_residual(psi: CenterManifoldMap, lambda0=None, order=3):
    """Residual of the invariance equation for ``psi`` through ``order``.

    Computes ``psi'(u1) [-P L u1 + P g(u1 + psi)] + (I - P) L psi
    - (I - P) g(u1 + psi)`` as a series in the center coordinates.  At
    ``lambda0 = 9`` the first bracket reduces to ``P g``.
    """
    if order < 3 or order % 2 == 0:
        raise DomainError(f"order must be odd and >= 3, got {order}")
    if psi.order < order:
        raise PreconditionError(f"psi is valid through degree {psi.order}, residual needs {order}")
    lam = psi.lam if lambda0 is None else as_rational(lambda0)
    return _residual(dict(psi.coefficients), lam, order, psi.K, psi.gamma)


def _residual(psi, lam, order, K, gamma):
    mu = center_rate(lam)
    u1 = u1_series(K)
    W = series_add(u1, series_truncate(psi, order))
    g = nonlinearity(W, order, K, gamma)
    Pg = series_map(sp.project_center, g)
    velocity = series_add(series_map(lambda p: p.scale(mu), u1), Pg)
    v1, v2 = _center_components(velocity)
    tangent = _tangent_action(psi, v1, v2, order, K)
    linear = series_map(lambda p: sp.project_stable(sp.apply_L(lam, p)), series_truncate(psi, order))
    forcing = series_map(lambda p: -sp.project_stable(p), g)
    return series_truncate(series_add(tangent, linear, forcing), order)


def _check_resonance(lam, K):
    for k in range(2, K + 1):
        if sp.eigenvalue(k, lam) == 0:
            raise ResonanceError(f"stable mode k={k} (wavenumber {2 * k}) has zero eigenvalue at lam={lam}")


def solve_center_manifold(lambda0=CRITICAL_LAMBDA, order=3, K=sp.DEFAULT_K_REDUCTION, gamma=1):
    """Solve the homological equation degree by degree through ``order``.

    For degree ``d`` and stable mode ``k`` the coefficient is
    ``-F / (lam_k + d (lam - 9))`` where ``F`` is the degree-``d`` residual of
    the lower-degree map; at ``lam = 9`` the divisor is the stable
    eigenvalue itself.
    """
    lam = as_rational(lambda0)
    gamma = as_rational(gamma)
    if order < 3 or order % 2 == 0:
        raise DomainError(f"order must be odd and >= 3, got {order}")
    _check_resonance(lam, K)
    mu = center_rate(lam)
    psi = {}
    for d in range(3, order + 1, 2):
        forcing = _residual(psi, lam, d, K, gamma)
        for m, p in forcing.items():
            if _degree(m) != d:
                continue
            terms = {}
            for (wave, k), c in p.terms.items():
                if k == 1:
                    raise ArithmeticError(f"center-space forcing at {m}; reduction is inconsistent")
                divisor = sp.eigenvalue(k, lam) + d * mu
                if divisor == 0:
                    raise ResonanceError(
                        f"mode ({wave}, k={k}) is resonant at degree {d}, lam={lam}"
                    )
                terms[(wave, k)] = -c / divisor
            psi[m] = TrigPoly(terms, RATIONAL, K)
    return CenterManifoldMap(psi, lam, order, K, EIGEN, gamma)


def mixed_basis_coefficients(psi: CenterManifoldMap):
    """Degree-3 coefficients in the products ``sin2x cos4x`` and ``cos2x cos4x``.

    Uses ``sin6x = 2 sin2x cos4x + sin2x`` and ``cos6x = 2 cos2x cos4x -
    cos2x``; the leftover center parts are reported separately.
    """
    out = {}
    for m, p in psi.items():
        if _degree(m) != 3:
            continue
        extra = set(p.terms) - {(SIN, 3), (COS, 3)}
        if extra:
            raise ValueError(f"degree-3 coefficient at {m} has modes outside k=3: {sorted(extra)}")
        out[m] = {SIN2_COS4: 2 * p.coeff(SIN, 3), COS2_COS4: 2 * p.coeff(COS, 3)}
    return out


def alpha_coefficients(psi: CenterManifoldMap):
    """``(alpha1, alpha2, alpha3, alpha4)`` of the mixed-basis cubic ansatz.

    alpha1: s1^3 sin2x cos4x, alpha2: s2^3 cos2x cos4x,
    alpha3: s1^2 s2 cos2x cos4x, alpha4: s1 s2^2 sin2x cos4x.
    """
    mixed = mixed_basis_coefficients(psi)

    def get(m, name):
        return mixed.get(m, {}).get(name, Fraction(0))

    return (get((3, 0), SIN2_COS4), get((0, 3), COS2_COS4), get((2, 1), COS2_COS4), get((1, 2), SIN2_COS4))


def product_ansatz_map(psi: CenterManifoldMap) -> CenterManifoldMap:
    """Rebuild the degree-3 part as products ``alpha * sin2x cos4x`` etc.

    The products carry ``sin2x``/``cos2x`` parts, so the result is not
    ranged in the stable subspace; it exists to reproduce the mixed-basis
    ansatz and its consequences.
    """
    K = psi.K
    prods = {
        SIN2_COS4: sp.multiply_trig(sp.sin(1, K=K), sp.cos(2, K=K)),
        COS2_COS4: sp.multiply_trig(sp.cos(1, K=K), sp.cos(2, K=K)),
    }
    coeffs = {m: p for m, p in psi.items() if _degree(m) != 3}
    for m, parts in mixed_basis_coefficients(psi).items():
        total = TrigPoly.zero(RATIONAL, K)
        for name, c in parts.items():
            total = total + prods[name].scale(c)
        coeffs[m] = total
    return CenterManifoldMap(coeffs, psi.lam, psi.order, K, PRODUCT, psi.gamma)


@dataclass(frozen=True)
class ReducedVectorField:
    """Planar polynomial field ``(G1, G2)`` with exact rational coefficients."""

    G1: Mapping[tuple, Fraction]
    G2: Mapping[tuple, Fraction]
    order: int
    lam: Fraction = CRITICAL_LAMBDA
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        for name in ("G1", "G2"):
            raw = getattr(self, name)
            clean = {}
            for m, c in raw.items():
                c = as_rational(c)
                if c != 0:
                    clean[(int(m[0]), int(m[1]))] = c
            if (0, 0) in clean:
                raise ValueError(f"{name} has a constant term; the origin must be an equilibrium")
            ordered = dict(sorted(clean.items(), key=lambda kv: monomial_key(kv[0])))
            object.__setattr__(self, name, MappingProxyType(ordered))
        object.__setattr__(self, "lam", as_rational(self.lam))

    def coefficient(self, component, a, b) -> Fraction:
        G = self.G1 if component == 1 else self.G2
        return G.get((a, b), Fraction(0))

    def evaluate_exact(self, s1, s2):
        s1, s2 = as_rational(s1), as_rational(s2)
        return tuple(sum((c * s1**a * s2**b for (a, b), c in G.items()), Fraction(0)) for G in (self.G1, self.G2))

    def _float_terms(self):
        if "terms" not in self._cache:
            self._cache["terms"] = tuple(
                (np.array([m[0] for m in G], dtype=int), np.array([m[1] for m in G], dtype=int), np.array([float(c) for c in G.values()]))
                for G in (self.G1, self.G2)
            )
        return self._cache["terms"]

    def __call__(self, s):
        """Float evaluation; ``s`` has shape ``(..., 2)``."""
        s = np.asarray(s, dtype=float)
        x, y = s[..., 0], s[..., 1]
        out = []
        for a, b, c in self._float_terms():
            if len(c) == 0:
                out.append(np.zeros_like(x))
                continue
            out.append(np.sum(c * x[..., None] ** a * y[..., None] ** b, axis=-1))
        return np.stack(out, axis=-1)

    @property
    def max_abs_coefficient(self) -> float:
        vals = [abs(float(c)) for G in (self.G1, self.G2) for c in G.values()]
        return max(vals, default=0.0)

    def to_dict(self) -> dict:
        def rows(G):
            return [{"a": a, "b": b, "num": str(c.numerator), "den": str(c.denominator)} for (a, b), c in G.items()]

        return {"lambda": str(self.lam), "order": self.order, "G1": rows(self.G1), "G2": rows(self.G2)}

    @classmethod
    def from_dict(cls, data) -> "ReducedVectorField":
        def parse(rows):
            return {(r["a"], r["b"]): Fraction(int(r["num"]), int(r["den"])) for r in rows}

        return cls(parse(data["G1"]), parse(data["G2"]), int(data["order"]), Fraction(data["lambda"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_json(cls, text) -> "ReducedVectorField":
        return cls.from_dict(json.loads(text))


def reduced_vector_field(psi: CenterManifoldMap, order=5) -> ReducedVectorField:
    """Center dynamics ``(lam - 9) u1 + P g(u1 + psi(u1))`` through ``order``."""
    if order < 3 or order % 2 == 0:
        raise DomainError(f"order must be odd and >= 3, got {order}")
    if psi.order < order - 2:
        raise PreconditionError(
            f"order-{order} field needs psi valid through degree {order - 2}, got {psi.order}"
        )
    K = psi.K
    mu = center_rate(psi.lam)
    W = series_add(u1_series(K), series_truncate(dict(psi.coefficients), order - 2))
    Pg = series_map(sp.project_center, nonlinearity(W, order, K, psi.gamma))
    G1, G2 = _center_components(Pg)
    if mu:
        G1[(1, 0)] = G1.get((1, 0), Fraction(0)) + mu
        G2[(0, 1)] = G2.get((0, 1), Fraction(0)) + mu
    return ReducedVectorField(G1, G2, order, psi.lam)


def parameterized_reduction(lam, order=5, K=sp.DEFAULT_K_REDUCTION) -> ReducedVectorField:
    """Reduced field at parameter ``lam`` (solved afresh, not expanded about 9)."""
    lam = as_rational(lam)
    if order < 3 or order % 2 == 0:
        raise DomainError(f"order must be odd and >= 3, got {order}")
    psi = solve_center_manifold(lam, max(order - 2, 3), K)
    return reduced_vector_field(psi, order)

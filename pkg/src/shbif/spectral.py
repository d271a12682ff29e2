"""Trigonometric algebra on the mean-zero, pi-periodic space.

Functions on (0, pi) are expanded in ``sin(2kx)``, ``cos(2kx)`` for
``k >= 1`` plus a bookkeeping constant slot.  Throughout, ``k`` is the mode
index; the wavenumber is ``2k``.  Two scalar kinds exist: ``"rational"``
(``fractions.Fraction``, exact) and ``"float"``.  They never mix.

The linear operator is ``L_lam = (I + d^2/dx^2)^2 - lam``, diagonal in this
basis with eigenvalue ``(1 - 4k^2)^2 - lam`` on mode ``k``.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import DomainError, PreconditionError, ScalarKindError, TruncationError

RATIONAL = "rational"
FLOAT = "float"
KINDS = (RATIONAL, FLOAT)

SIN = "sin"
COS = "cos"
CONST = "const"
_WAVE_ORDER = {CONST: 0, SIN: 1, COS: 2}

DEFAULT_K_REDUCTION = 8
DEFAULT_K_SIMULATION = 32
DEFAULT_BETA = 100

Key = tuple  # (wave, k); the constant slot is (CONST, 0)


def as_rational(value) -> Fraction:
    """Exact rational from an int, Fraction, decimal string or float.

    Floats go through their shortest repr, so ``9.3`` becomes ``93/10``
    rather than the nearest binary fraction.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational scalar")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise DomainError(f"non-finite value {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


def _coerce(value, kind):
    if kind == RATIONAL:
        if isinstance(value, float):
            raise ScalarKindError("float coefficient in a rational TrigPoly")
        return as_rational(value)
    if isinstance(value, Fraction):
        raise ScalarKindError("Fraction coefficient in a float TrigPoly")
    return float(value)


class _ConstDropCounter:
    """Counts how often a nonzero constant mode was projected out of H."""

    def __init__(self):
        self._lock = threading.Lock()
        self._count = 0

    def bump(self):
        with self._lock:
            self._count += 1

    @property
    def count(self) -> int:
        return self._count

    def reset(self):
        with self._lock:
            self._count = 0


const_drops = _ConstDropCounter()


@dataclass(frozen=True)
class TrigPoly:
    """Finite trigonometric polynomial in canonical sparse form.

    ``terms`` maps ``(wave, k)`` to a nonzero coefficient; ``wave`` is one
    of ``"sin"``, ``"cos"`` (``k >= 1``) or ``"const"`` (``k == 0``).
    """

    terms: Mapping[Key, object]
    kind: str = RATIONAL
    K: int = DEFAULT_K_REDUCTION

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scalar kind {self.kind!r}")
        if self.K < 1:
            raise ValueError("truncation K must be >= 1")
        clean = {}
        for (wave, k), c in dict(self.terms).items():
            if wave not in _WAVE_ORDER:
                raise ValueError(f"unknown waveform {wave!r}")
            if wave == CONST:
                if k != 0:
                    raise ValueError("the constant slot has index 0")
            elif k < 1:
                raise ValueError(f"{wave} mode index must be >= 1, got {k}")
            if k > self.K:
                raise TruncationError(f"mode k={k} exceeds truncation K={self.K}")
            c = _coerce(c, self.kind)
            if c != 0:
                clean[(wave, int(k))] = c
        ordered = dict(sorted(clean.items(), key=lambda kv: (kv[0][1], _WAVE_ORDER[kv[0][0]])))
        object.__setattr__(self, "terms", MappingProxyType(ordered))

    # construction helpers

    @classmethod
    def zero(cls, kind=RATIONAL, K=DEFAULT_K_REDUCTION) -> "TrigPoly":
        return cls({}, kind, K)

    @classmethod
    def mode(cls, wave, k, coeff=1, kind=RATIONAL, K=DEFAULT_K_REDUCTION) -> "TrigPoly":
        if kind == FLOAT and isinstance(coeff, int):
            coeff = float(coeff)
        return cls({(wave, k): coeff}, kind, max(K, k))

    # queries

    def coeff(self, wave, k=0):
        zero = Fraction(0) if self.kind == RATIONAL else 0.0
        return self.terms.get((wave, k), zero)

    @property
    def is_mean_zero(self) -> bool:
        return (CONST, 0) not in self.terms

    @property
    def max_mode(self) -> int:
        return max((k for _, k in self.terms), default=0)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, TrigPoly):
            return NotImplemented
        return self.kind == other.kind and dict(self.terms) == dict(other.terms)

    def __hash__(self):
        return hash((self.kind, tuple(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return f"TrigPoly(0, {self.kind})"
        parts = []
        for (wave, k), c in self.terms.items():
            basis = "1" if wave == CONST else f"{wave}{2 * k}x"
            parts.append(f"({c})*{basis}")
        return f"TrigPoly({' + '.join(parts)}, {self.kind})"

    # arithmetic

    def _check(self, other):
        if not isinstance(other, TrigPoly):
            raise TypeError(f"expected TrigPoly, got {type(other).__name__}")
        if other.kind != self.kind:
            raise ScalarKindError(f"cannot combine {self.kind} and {other.kind} values")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, 0) + c
        return TrigPoly(out, self.kind, max(self.K, other.K))

    def __neg__(self):
        return TrigPoly({key: -c for key, c in self.terms.items()}, self.kind, self.K)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor) -> "TrigPoly":
        factor = _coerce(factor, self.kind)
        return TrigPoly({key: c * factor for key, c in self.terms.items()}, self.kind, self.K)

    def __mul__(self, other):
        if isinstance(other, TrigPoly):
            return multiply_trig(self, other)
        return self.scale(other)

    __rmul__ = scale

    def with_truncation(self, K) -> "TrigPoly":
        return TrigPoly(self.terms, self.kind, K)

    def astype(self, kind) -> "TrigPoly":
        if kind == self.kind:
            return self
        if kind == FLOAT:
            return TrigPoly({key: float(c) for key, c in self.terms.items()}, FLOAT, self.K)
        return TrigPoly({key: as_rational(c) for key, c in self.terms.items()}, RATIONAL, self.K)

    def evaluate(self, x):
        """Pointwise values at ``x`` (float arithmetic regardless of kind)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for (wave, k), c in self.terms.items():
            c = float(c)
            if wave == SIN:
                out += c * np.sin(2 * k * x)
            elif wave == COS:
                out += c * np.cos(2 * k * x)
            else:
                out += c
        return out

    # serialization

    def to_dict(self) -> dict:
        terms = []
        for (wave, k), c in self.terms.items():
            if self.kind == RATIONAL:
                num, den = str(c.numerator), str(c.denominator)
            else:
                num, den = repr(float(c)), "1"
            terms.append({"wave": wave, "k": k, "num": num, "den": den})
        return {"kind": self.kind, "terms": terms}

    @classmethod
    def from_dict(cls, data: Mapping, K=None) -> "TrigPoly":
        kind = data["kind"]
        terms = {}
        for t in data["terms"]:
            if kind == RATIONAL:
                c = Fraction(int(t["num"]), int(t["den"]))
            else:
                c = float(t["num"]) / float(t["den"])
            terms[(t["wave"], int(t["k"]))] = c
        if K is None:
            K = max([DEFAULT_K_REDUCTION] + [k for _, k in terms])
        return cls(terms, kind, K)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str, K=None) -> "TrigPoly":
        return cls.from_dict(json.loads(text), K)


def sin(k, coeff=1, kind=RATIONAL, K=DEFAULT_K_REDUCTION) -> TrigPoly:
    """``coeff * sin(2kx)``."""
    return TrigPoly.mode(SIN, k, coeff, kind, K)


def cos(k, coeff=1, kind=RATIONAL, K=DEFAULT_K_REDUCTION) -> TrigPoly:
    """``coeff * cos(2kx)``."""
    return TrigPoly.mode(COS, k, coeff, kind, K)


def const(coeff=1, kind=RATIONAL, K=DEFAULT_K_REDUCTION) -> TrigPoly:
    return TrigPoly.mode(CONST, 0, coeff, kind, K)


def eigenvalue(k, lam):
    """Eigenvalue ``(1 - 4k^2)^2 - lam`` of the linear operator on mode ``k``.

    Exact for rational ``lam``; a float ``lam`` gives a float.
    """
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 1:
        raise DomainError(f"mode index must be a positive integer, got {k!r}")
    base = (1 - 4 * int(k) ** 2) ** 2
    if isinstance(lam, float):
        return base - lam
    return base - as_rational(lam)


def _signed_mode(wave, m):
    # (wave, |m|, sign) for a mode with possibly negative or zero index m
    if m == 0:
        return (CONST, 0, 1) if wave == COS else None
    if m < 0:
        return (wave, -m, -1 if wave == SIN else 1)
    return (wave, m, 1)


def _product_terms(wa, ka, wb, kb):
    """Product-to-sum expansion of two basis modes as (wave, k, factor) terms."""
    if wa == CONST:
        return [(wb, kb, 1)]
    if wb == CONST:
        return [(wa, ka, 1)]
    half = Fraction(1, 2)
    if wa == SIN and wb == SIN:
        raw = [(COS, ka - kb, half), (COS, ka + kb, -half)]
    elif wa == COS and wb == COS:
        raw = [(COS, ka - kb, half), (COS, ka + kb, half)]
    elif wa == SIN:
        raw = [(SIN, ka + kb, half), (SIN, ka - kb, half)]
    else:
        raw = [(SIN, ka + kb, half), (SIN, kb - ka, half)]
    out = []
    for wave, m, f in raw:
        sm = _signed_mode(wave, m)
        if sm is not None:
            out.append((sm[0], sm[1], f * sm[2]))
    return out


def multiply_trig(a: TrigPoly, b: TrigPoly, K=None) -> TrigPoly:
    """Exact product of two trigonometric polynomials.

    The result keeps the constant slot.  Raises ``TruncationError`` if a
    product mode exceeds ``K`` (default: the larger input truncation).
    """
    a._check(b)
    if K is None:
        K = max(a.K, b.K)
    if a.max_mode + b.max_mode > K:
        raise TruncationError(
            f"product needs mode {a.max_mode + b.max_mode} but truncation is K={K}"
        )
    out = {}
    for (wa, ka), ca in a.terms.items():
        for (wb, kb), cb in b.terms.items():
            cc = ca * cb
            for wave, k, f in _product_terms(wa, ka, wb, kb):
                val = cc * f if a.kind == RATIONAL else cc * float(f)
                out[(wave, k)] = out.get((wave, k), 0) + val
    return TrigPoly(out, a.kind, K)


def drop_const(u: TrigPoly) -> TrigPoly:
    """Project onto the mean-zero space, counting nonzero constants removed."""
    if u.is_mean_zero:
        return u
    const_drops.bump()
    return TrigPoly({key: c for key, c in u.terms.items() if key[0] != CONST}, u.kind, u.K)


def project_center(u: TrigPoly) -> TrigPoly:
    """Component of ``u`` in span{sin 2x, cos 2x}."""
    u = drop_const(u)
    return TrigPoly({key: c for key, c in u.terms.items() if key[1] == 1}, u.kind, u.K)


def project_stable(u: TrigPoly) -> TrigPoly:
    """``u - P u`` with the constant slot removed."""
    u = drop_const(u)
    return TrigPoly({key: c for key, c in u.terms.items() if key[1] != 1}, u.kind, u.K)


def apply_L(lam, u: TrigPoly) -> TrigPoly:
    """Diagonal action of ``(I + d^2/dx^2)^2 - lam`` on a mean-zero ``u``."""
    u = drop_const(u)
    if u.kind == RATIONAL:
        lam = as_rational(lam)
    else:
        lam = float(lam)
    return TrigPoly({(w, k): c * eigenvalue(k, lam) for (w, k), c in u.terms.items()}, u.kind, u.K)


@dataclass(frozen=True)
class SpectralDecomposition:
    lam: object
    K: int
    beta: object
    eigenvalues: Mapping[int, object]
    center_indices: frozenset
    stable_indices: frozenset

    @property
    def gap_ok(self) -> bool:
        """Whether the center/stable split satisfies the 2-beta gap."""
        center_ok = all(abs(self.eigenvalues[k]) <= self.beta for k in self.center_indices)
        stable_ok = all(self.eigenvalues[k] >= 2 * self.beta for k in self.stable_indices)
        return center_ok and stable_ok


def spectral_decomposition(lam, K=DEFAULT_K_REDUCTION, beta=DEFAULT_BETA) -> SpectralDecomposition:
    """Split modes ``1..K`` into center (``|lam_k| <= beta``) and stable sets.

    Raises ``PreconditionError`` if the stable eigenvalues are not all
    ``>= 2 * beta``.
    """
    if beta <= 0:
        raise DomainError("beta must be positive")
    eig = {k: eigenvalue(k, lam) for k in range(1, K + 1)}
    center = frozenset(k for k, v in eig.items() if abs(v) <= beta)
    stable = frozenset(eig) - center
    dec = SpectralDecomposition(lam, K, beta, MappingProxyType(eig), center, stable)
    if not dec.gap_ok:
        bad = sorted(k for k in stable if eig[k] < 2 * beta)
        raise PreconditionError(f"spectral gap fails at lam={lam}: modes {bad} below 2*beta")
    return dec


# Matrices over the truncated basis [sin2x, cos2x, sin4x, cos4x, ...]


@dataclass(frozen=True)
class LinearMapMatrix:
    """Dense matrix over the 2K-dimensional truncated basis.

    ``matrix`` is a float array or an object array of Fractions.
    """

    matrix: np.ndarray = field(repr=False)
    K: int = 0

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        if self.K and m.shape[0] != 2 * self.K:
            raise ValueError(f"matrix size {m.shape[0]} inconsistent with K={self.K}")
        object.__setattr__(self, "matrix", m)

    @property
    def exact(self) -> bool:
        return self.matrix.dtype == object

    def __matmul__(self, other):
        if isinstance(other, LinearMapMatrix):
            return LinearMapMatrix(self.matrix @ other.matrix, self.K)
        return self.matrix @ other


def basis_index(wave, k) -> int:
    if wave not in (SIN, COS) or k < 1:
        raise DomainError(f"no matrix basis slot for ({wave}, {k})")
    return 2 * (k - 1) + (0 if wave == SIN else 1)


def to_vector(u: TrigPoly, K=None) -> np.ndarray:
    K = u.K if K is None else K
    u = drop_const(u)
    if u.max_mode > K:
        raise TruncationError(f"mode {u.max_mode} exceeds K={K}")
    if u.kind == RATIONAL:
        v = np.array([Fraction(0)] * (2 * K), dtype=object)
    else:
        v = np.zeros(2 * K)
    for (wave, k), c in u.terms.items():
        v[basis_index(wave, k)] = c
    return v


def from_vector(v, kind=FLOAT) -> TrigPoly:
    K = len(v) // 2
    terms = {}
    for i, c in enumerate(v):
        terms[(SIN if i % 2 == 0 else COS, i // 2 + 1)] = c
    return TrigPoly(terms, kind, K)


def center_projection_matrix(K=DEFAULT_K_REDUCTION, exact=True) -> LinearMapMatrix:
    """Matrix of the orthogonal projection onto span{sin2x, cos2x}."""
    one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
    m = np.array([[zero] * (2 * K) for _ in range(2 * K)], dtype=object if exact else float)
    m[0, 0] = one
    m[1, 1] = one
    return LinearMapMatrix(m, K)


def identity_like(m):
    n = m.shape[0]
    if m.dtype == object:
        out = np.array([[Fraction(0)] * n for _ in range(n)], dtype=object)
        for i in range(n):
            out[i, i] = Fraction(1)
        return out
    return np.eye(n)


def _is_zero(m, atol):
    if m.dtype == object:
        return all(x == 0 for x in m.flat)
    return bool(np.max(np.abs(m), initial=0.0) <= atol)


def _as_array(p):
    return p.matrix if isinstance(p, LinearMapMatrix) else np.asarray(p)


def transition_isomorphism(P_ref, P_lam, c=None, atol=1e-10) -> LinearMapMatrix:
    """Isomorphism carrying the ranges of ``P_lam`` onto those of ``P_ref``.

    Each argument is a pair ``(P1, P2)`` of complementary idempotents.
    Returns ``T = P1_ref @ P1_lam + P2_ref @ P2_lam``.  Requires
    ``||P_lam^i - P_ref^i||_2 <= c < 1`` (``c`` defaults to "strictly less
    than one").
    """
    refs = [_as_array(p) for p in P_ref]
    lams = [_as_array(p) for p in P_lam]
    if len(refs) != 2 or len(lams) != 2:
        raise ValueError("expected pairs of projection matrices")
    n = refs[0].shape[0]
    ident = identity_like(refs[0])
    for name, (p1, p2) in (("P_ref", refs), ("P_lam", lams)):
        for i, p in enumerate((p1, p2), start=1):
            if p.shape != (n, n):
                raise ValueError(f"{name}[{i}] has shape {p.shape}, expected {(n, n)}")
            if not _is_zero(p @ p - p, atol):
                raise ValueError(f"{name}[{i}] is not idempotent")
        if not _is_zero(p1 + p2 - ident, atol):
            raise ValueError(f"{name} projections are not complementary")
    limit = 1.0 if c is None else float(c)
    if c is not None and not 0 <= limit < 1:
        raise ValueError("c must lie in [0, 1)")
    for i in range(2):
        diff = np.asarray(lams[i] - refs[i], dtype=float)
        norm = float(np.linalg.norm(diff, 2))
        if norm >= 1.0 or (c is not None and norm > limit):
            raise PreconditionError(
                f"||P_lam^{i + 1} - P_ref^{i + 1}||_2 = {norm:.6g} violates the bound "
                f"{'< 1' if c is None else f'<= {limit}'}"
            )
    T = refs[0] @ lams[0] + refs[1] @ lams[1]
    return LinearMapMatrix(T, n // 2 if n % 2 == 0 else 0)



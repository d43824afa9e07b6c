"""Trigonometric prepotential, its kernel f''' = coth, and third derivatives.

The prepotential is evaluated in the rank-dimensional chart coordinates of a
root system, with one extra coordinate a_{n+1}:

    F(a, a_{n+1}) = sum_{alpha > 0} k_alpha f((alpha, a))
                    + gamma (a_{n+1}^3 / 6 + a_{n+1} (a, a) / 2)

Summing over positive roots only keeps the trilogarithm series convergent;
the third derivatives agree with the half-sum over all roots because coth is
odd.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, permutations
from typing import Any, Sequence

import mpmath
import numpy as np

from wdvvroots.errors import (
    ChamberViolation,
    DomainError,
    NearSingular,
    SamplingExhausted,
    StepTooLarge,
)
from wdvvroots.rootsystems import RootSystem, orbit_multiplicities

logger = logging.getLogger(__name__)

SERIES_TOLERANCE = 1e-16
SERIES_Z_MAX = 0.9
COTH_EPS = 1e-8
DEFAULT_MARGIN = 0.2
COWEIGHT_SPAN = 1.5
MAX_REJECTIONS = 10_000


# ---- special functions ----

def polylog_series(z: Any, order: int) -> np.ndarray:
    """sum_{k>=1} z^k / k^order for 0 <= z < 1, elementwise.

    Terms are added until the geometric tail bound term * z / (1 - z) drops
    below SERIES_TOLERANCE. Arguments above SERIES_Z_MAX, where the series
    needs thousands of terms, go to ``mpmath.polylog`` instead.
    """
    z = np.asarray(z, dtype=np.float64)
    if np.any(z < 0) or np.any(z >= 1):
        raise DomainError(f"polylog series needs 0 <= z < 1, got {z}")
    return _polylog(z, order)


def _polylog(z: np.ndarray, order: int) -> np.ndarray:
    flat = np.atleast_1d(z).ravel()
    near_one = flat > SERIES_Z_MAX
    total = np.zeros_like(flat)
    total[near_one] = [float(mpmath.polylog(order, v)) for v in flat[near_one]]
    series = np.where(near_one, 0.0, flat)
    power = np.ones_like(series)
    threshold = SERIES_TOLERANCE * (1.0 - series)
    k = 0
    while True:
        k += 1
        power = power * series
        term = power / k**order
        total = total + term
        if np.all(term <= threshold):
            return total.reshape(np.shape(z))


def trilog(z: float) -> float:
    """Li_3(z) on [0, 1)."""
    if not 0 <= z < 1:
        raise DomainError(f"trilog needs 0 <= z < 1, got {z}")
    return float(polylog_series(z, 3))


def f_scalar(x: float) -> float:
    """f(x) = x^3/6 - Li_3(exp(-2x))/4 for x > 0.

    Small x is evaluated with mpmath, where exp(-2x) may round to 1 in double
    precision and Li_3 tends to zeta(3).
    """
    if x <= 0:
        raise DomainError(f"f needs x > 0 for the trilogarithm series to converge, got {x}")
    z = math.exp(-2 * x)
    if z > SERIES_Z_MAX:
        li3 = float(mpmath.polylog(3, mpmath.exp(-2 * mpmath.mpf(x))))
    else:
        li3 = trilog(z)
    return x**3 / 6 - li3 / 4


def dilog_part(x: Any) -> np.ndarray:
    """Li_2(exp(-2x))/2, the non-polynomial part of f'(x), elementwise for x > 0."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0):
        raise DomainError(f"f' needs x > 0, got {x}")
    return _polylog(np.exp(-2 * x), 2) / 2


def f_prime(x: Any) -> np.ndarray:
    """f'(x) = x^2/2 + Li_2(exp(-2x))/2, elementwise for x > 0."""
    x = np.asarray(x, dtype=np.float64)
    return x**2 / 2 + dilog_part(x)


def coth_third(x: float, eps: float = COTH_EPS) -> float:
    """coth(x) = 1 + 2/expm1(2|x|) with the sign of x restored."""
    if abs(x) < eps:
        raise NearSingular(f"coth is singular at 0; |x| = {abs(x)} < {eps}")
    value = 1.0 + 2.0 / math.expm1(2.0 * abs(x))
    return value if x > 0 else -value


def coth_vector(values: np.ndarray) -> np.ndarray:
    mags = np.abs(values)
    return np.sign(values) * (1.0 + 2.0 / np.expm1(2.0 * mags))


# ---- parameters and points ----

@dataclass(frozen=True, eq=False)
class PrepotentialParams:
    """Root system (with its chart), per-orbit multiplicities and gamma."""

    rootsystem: RootSystem
    gamma: complex
    multiplicities: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        resolved = orbit_multiplicities(self.rootsystem, self.multiplicities)
        object.__setattr__(self, "multiplicities", {k: float(v) for k, v in resolved.items()})

    @property
    def n(self) -> int:
        return self.rootsystem.rank

    def root_weights(self, roots: Sequence[Any] | None = None) -> np.ndarray:
        if roots is None:
            roots = self.rootsystem.positive_roots
        orbit_of = self.rootsystem.orbit_of
        return np.array([self.multiplicities[orbit_of[r]] for r in roots])


@dataclass(frozen=True, eq=False)
class EvaluationPoint:
    """Chamber coordinates a (length n), the extra coordinate, and the chamber margin."""

    a: np.ndarray
    a_last: float
    margin: float

    @classmethod
    def at(cls, rootsystem: RootSystem, a: Sequence[float], a_last: float = 0.0) -> EvaluationPoint:
        a = np.asarray(a, dtype=np.float64)
        if a.shape != (rootsystem.rank,):
            raise ValueError(f"Expected {rootsystem.rank} chamber coordinates, got shape {a.shape}")
        margin = float(np.min(rootsystem.charted() @ a))
        return cls(a=a, a_last=float(a_last), margin=margin)

    @property
    def full(self) -> np.ndarray:
        return np.append(self.a, self.a_last)

    def ambient(self, rootsystem: RootSystem) -> np.ndarray:
        return rootsystem.chart @ self.a


@dataclass(frozen=True, eq=False)
class ThirdDerivativeTensor:
    entries: np.ndarray
    gamma: complex

    @property
    def size(self) -> int:
        return self.entries.shape[0]


def _require_chamber(params: PrepotentialParams, point: EvaluationPoint, min_margin: float = 0.0) -> None:
    if point.margin <= min_margin:
        raise ChamberViolation(
            f"Point is not inside the positive chamber of {params.rootsystem.label}: "
            f"margin {point.margin:.3g} <= {min_margin}"
        )


# ---- prepotential and derivatives ----

def prepotential_scalar(params: PrepotentialParams, point: EvaluationPoint) -> complex:
    """Positive-root form of F at a chamber point."""
    _require_chamber(params, point)
    pairings = params.rootsystem.charted() @ point.a
    root_part = sum(k * f_scalar(float(x)) for k, x in zip(params.root_weights(), pairings))
    t = point.a_last
    return complex(root_part + params.gamma * (t**3 / 6 + t * float(point.a @ point.a) / 2))


def prepotential_gradient(params: PrepotentialParams, a: np.ndarray, a_last: float) -> np.ndarray:
    """Analytic gradient of F in (a_1, ..., a_n, a_{n+1}), complex."""
    return _gradient(params, a, a_last, with_root_cubic=True)


def _gradient(params: PrepotentialParams, a: np.ndarray, a_last: float, with_root_cubic: bool) -> np.ndarray:
    roots = params.rootsystem.charted()
    pairings = roots @ a
    kernel = f_prime(pairings) if with_root_cubic else dilog_part(pairings)
    grad = np.zeros(params.n + 1, dtype=complex)
    grad[: params.n] = (params.root_weights() * kernel) @ roots
    grad[: params.n] += params.gamma * a_last * a
    grad[params.n] = params.gamma * (a_last**2 / 2 + float(a @ a) / 2)
    return grad


def root_cubic_tensor(params: PrepotentialParams) -> np.ndarray:
    """Third derivatives of sum_{alpha > 0} k_alpha (alpha, a)^3 / 6, constant in a."""
    roots = params.rootsystem.charted()
    return np.einsum("r,ri,rj,rk->ijk", params.root_weights(), roots, roots, roots)


def third_derivative_tensor(
    params: PrepotentialParams,
    point: EvaluationPoint,
    min_margin: float = 0.0,
    over: str = "positive",
) -> ThirdDerivativeTensor:
    """All third partials of F at ``point``, indices 0..n (the last is a_{n+1}).

    ``over="all"`` evaluates the root part as the half-sum over the whole root
    set instead of the positive-root sum; both agree because coth is odd.
    """
    _require_chamber(params, point, min_margin)
    rs = params.rootsystem
    if over == "positive":
        roots = rs.charted()
        weights = params.root_weights()
    elif over == "all":
        roots = rs.charted(rs.roots)
        weights = params.root_weights(rs.roots) / 2
    else:
        raise ValueError(f"over must be 'positive' or 'all', got {over!r}")

    n = params.n
    coeffs = weights * coth_vector(roots @ point.a)
    entries = np.zeros((n + 1, n + 1, n + 1), dtype=complex)
    # one evaluation per sorted index triple keeps the tensor exactly symmetric
    for triple in combinations_with_replacement(range(n), 3):
        i, j, k = triple
        value = float(coeffs @ (roots[:, i] * roots[:, j] * roots[:, k]))
        for perm in set(permutations(triple)):
            entries[perm] = value
    for i in range(n):
        entries[i, i, n] = entries[i, n, i] = entries[n, i, i] = params.gamma
    entries[n, n, n] = params.gamma
    return ThirdDerivativeTensor(entries=entries, gamma=params.gamma)


def fd_validate(params: PrepotentialParams, point: EvaluationPoint, h: float = 1e-4) -> float:
    """Max deviation of central second differences of the gradient from the analytic tensor.

    Only the dilogarithm and gamma parts of the gradient are differenced; the
    root cubic sum_{alpha > 0} k_alpha (alpha, a)^3 / 6 has constant third
    derivatives and is added back exactly. Its gradient grows like |a|^2 and
    would otherwise dominate the rounding error of the stencil on large
    systems. The deviation is relative to the largest entry of the analytic
    tensor.
    """
    reach = 2 * h * params.rootsystem.max_root_norm
    if point.margin <= reach:
        raise StepTooLarge(
            f"Stencil of step {h} reaches {reach:.3g} but the chamber margin is {point.margin:.3g}"
        )
    analytic = third_derivative_tensor(params, point).entries
    x = point.full
    size = len(x)
    n = params.n

    def grad(v: np.ndarray) -> np.ndarray:
        return _gradient(params, v[:-1], float(v[-1]), with_root_cubic=False)

    numeric = np.empty((size, size, size), dtype=complex)
    centre2 = 2 * grad(x)
    hsq = h**2
    offsets = np.eye(size) * h
    for i in range(size):
        right = grad(x + offsets[i])
        left = grad(x - offsets[i])
        numeric[:, i, i] = (right + left - centre2) / hsq
        for j in range(i + 1, size):
            both_up = grad(x + offsets[i] + offsets[j])
            both_down = grad(x - offsets[i] - offsets[j])
            j_up = grad(x + offsets[j])
            j_down = grad(x - offsets[j])
            numeric[:, i, j] = (both_up + both_down - right - left - j_up - j_down + centre2) / (2 * hsq)
            numeric[:, j, i] = numeric[:, i, j]
    numeric[:n, :n, :n] += root_cubic_tensor(params)

    scale = np.max(np.abs(analytic))
    return float(np.max(np.abs(numeric - analytic)) / scale)


def sample_chamber_point(
    rootsystem: RootSystem,
    seed: int,
    margin_min: float = DEFAULT_MARGIN,
    count: int = 1,
) -> list[EvaluationPoint]:
    """Deterministic chamber points a = sum c_i w_i over fundamental coweights.

    Each c_i is uniform in [margin_min, 1.5], so every positive root pairs to
    at least margin_min; a_{n+1} is uniform in [-1, 1].
    """
    if margin_min <= 0:
        raise ValueError(f"margin_min must be positive, got {margin_min}")
    if margin_min >= COWEIGHT_SPAN:
        raise SamplingExhausted(
            f"margin_min {margin_min} leaves no room below the coweight span {COWEIGHT_SPAN}"
        )
    rng = np.random.default_rng(seed)
    simple = rootsystem.charted(rootsystem.simple_roots)
    points: list[EvaluationPoint] = []
    rejections = 0
    while len(points) < count:
        coeffs = rng.uniform(margin_min, COWEIGHT_SPAN, size=rootsystem.rank)
        a_last = rng.uniform(-1.0, 1.0)
        point = EvaluationPoint.at(rootsystem, np.linalg.solve(simple, coeffs), a_last)
        if point.margin >= margin_min:
            points.append(point)
            continue
        rejections += 1
        if rejections >= MAX_REJECTIONS:
            raise SamplingExhausted(
                f"Gave up after {MAX_REJECTIONS} rejected samples for margin {margin_min}"
            )
    logger.debug("sampled %d chamber points for %s (seed %d)", count, rootsystem.label, seed)
    return points

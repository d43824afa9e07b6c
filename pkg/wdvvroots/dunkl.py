"""Fiberwise check of the Dunkl identity behind the WDVV reduction.

Ordered pairs of positive roots are grouped by the Weyl element s_a s_b.
Within a fiber, the coth-weighted bivector sum

    sum coth((a, x)) coth((b, x)) (a, b) (a^b) (x) (a^b)

should equal the same sum with the coth factors dropped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Any, Mapping, Sequence

import numpy as np
import sympy as sp

from wdvvroots.errors import ChamberViolation, ZeroRoot
from wdvvroots.exactform import coupling_tensor
from wdvvroots.prepotential import EvaluationPoint, PrepotentialParams, coth_vector, third_derivative_tensor
from wdvvroots.rootsystems import RootSystem, Vector, as_vector, dot, orbit_multiplicities
from wdvvroots.wdvv import commutator_tensor

logger = logging.getLogger(__name__)

FIBERWISE = "fiberwise"
AGGREGATE_ONLY = "aggregate_only"
FAILS = "fails"

FIBER_TOLERANCE = 1e-9
ABSOLUTE_FLOOR = 1e-12


def reflection_matrix(alpha: Sequence[Any], dim: int | None = None) -> np.ndarray:
    """I - 2 a a^T / (a, a) with Fraction entries."""
    alpha = as_vector(alpha)
    if dim is None:
        dim = len(alpha)
    if len(alpha) != dim:
        raise ValueError(f"Root has {len(alpha)} coordinates, expected {dim}")
    norm = dot(alpha, alpha)
    if norm == 0:
        raise ZeroRoot("Cannot reflect through the zero vector")
    matrix = np.empty((dim, dim), dtype=object)
    for i in range(dim):
        for j in range(dim):
            matrix[i, j] = Fraction(int(i == j)) - 2 * alpha[i] * alpha[j] / norm
    return matrix


@dataclass(frozen=True)
class WeylElement:
    """Exact matrix numerators / denominator, reduced so the key is canonical."""

    numerators: tuple[int, ...]
    denominator: int
    dim: int

    @classmethod
    def from_integer_matrix(cls, numerators: np.ndarray, denominator: int) -> WeylElement:
        flat = [int(x) for x in numerators.flat]
        common = gcd(denominator, *flat)
        return cls(tuple(x // common for x in flat), denominator // common, numerators.shape[0])

    def matrix(self) -> np.ndarray:
        entries = [Fraction(x, self.denominator) for x in self.numerators]
        return np.array(entries, dtype=object).reshape(self.dim, self.dim)

    @property
    def is_identity(self) -> bool:
        return self.denominator == 1 and self.numerators == tuple(
            int(i == j) for i in range(self.dim) for j in range(self.dim)
        )

    def is_orthogonal(self) -> bool:
        m = self.matrix()
        return bool(np.all(m @ m.T == np.eye(self.dim, dtype=int).astype(object)))

    def determinant(self) -> Fraction:
        det = sp.Matrix(self.dim, self.dim, [sp.Rational(x, self.denominator) for x in self.numerators]).det()
        return Fraction(int(det.p), int(det.q))

    def rotation_angle(self, rootsystem: RootSystem) -> float:
        """Rotation angle in degrees, read off the trace in the span of the roots."""
        m = np.array([float(x) / self.denominator for x in self.numerators]).reshape(self.dim, self.dim)
        # fixed directions outside the rotation plane contribute 1 each
        cos = (np.trace(rootsystem.chart.T @ m @ rootsystem.chart) - (rootsystem.rank - 2)) / 2
        return float(np.degrees(np.arccos(np.clip(cos, -1.0, 1.0))))


@dataclass(frozen=True, eq=False)
class FiberPartition:
    rootsystem: RootSystem
    # Weyl element -> (i, j) index pairs into rootsystem.positive_roots
    indices: dict[WeylElement, list[tuple[int, int]]]

    @property
    def fibers(self) -> dict[WeylElement, list[tuple[Vector, Vector]]]:
        roots = self.rootsystem.positive_roots
        return {w: [(roots[i], roots[j]) for i, j in pairs] for w, pairs in self.indices.items()}

    def sizes(self) -> list[int]:
        return [len(pairs) for pairs in self.indices.values()]

    @property
    def total_pairs(self) -> int:
        return sum(self.sizes())

    def identity_fiber(self) -> list[tuple[Vector, Vector]]:
        for element, pairs in self.fibers.items():
            if element.is_identity:
                return pairs
        return []


@lru_cache(maxsize=32)
def fiber_partition(rootsystem: RootSystem) -> FiberPartition:
    """Group every ordered positive pair (a, b) by the exact product s_a s_b."""
    ints, _ = rootsystem.integer_roots()
    m = rootsystem.ambient_dim
    norms = np.einsum("pi,pi->p", ints, ints)
    # s_a = N_a / d_a with N_a = d_a I - 2 u u^T integral
    reflections = norms[:, None, None] * np.eye(m, dtype=np.int64) - 2 * np.einsum("pi,pj->pij", ints, ints)
    products = np.einsum("aij,bjk->abik", reflections, reflections)

    indices: dict[WeylElement, list[tuple[int, int]]] = {}
    count = len(ints)
    for i in range(count):
        for j in range(count):
            element = WeylElement.from_integer_matrix(products[i, j], int(norms[i] * norms[j]))
            indices.setdefault(element, []).append((i, j))
    logger.debug("%s: %d fibers over %d pairs", rootsystem.label, len(indices), count * count)
    return FiberPartition(rootsystem=rootsystem, indices=indices)


def _bivector_sum(left: np.ndarray, right: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """sum_p w_p (l_p, r_p) (l_p^r_p) (x) (l_p^r_p) over zipped rows."""
    gram = np.einsum("pi,pi->p", left, right)
    outer = np.einsum("pi,pj->pij", left, right)
    wedge = outer - outer.transpose(0, 2, 1)
    return np.einsum("p,pij,plm->ijlm", weights * gram, wedge, wedge)


@dataclass
class DunklReport:
    system: Any
    point: EvaluationPoint
    tolerance: float
    fiber_sizes: list[int]
    fiber_residuals: list[float]
    aggregate_residual: float
    aggregate_exact: bool
    commutator_deviation: float
    weighted_total: np.ndarray = field(repr=False)

    @property
    def max_fiber_residual(self) -> float:
        return max(self.fiber_residuals, default=0.0)

    @property
    def outcome(self) -> str:
        if self.max_fiber_residual < self.tolerance:
            return FIBERWISE
        if self.aggregate_residual < self.tolerance:
            return AGGREGATE_ONLY
        return FAILS

    @property
    def passed(self) -> bool:
        return self.outcome == FIBERWISE and self.aggregate_exact and self.commutator_deviation < self.tolerance


def _relative(weighted: np.ndarray, unweighted: np.ndarray) -> float:
    scale = float(np.max(np.abs(unweighted)))
    deviation = float(np.max(np.abs(weighted - unweighted)))
    return deviation / scale if scale >= ABSOLUTE_FLOOR else deviation


def fiber_identity_check(
    rootsystem: RootSystem,
    point: EvaluationPoint,
    multiplicities: Mapping[str, Any] | None = None,
    tolerance: float = FIBER_TOLERANCE,
) -> DunklReport:
    """Compare coth-weighted and plain fiber sums at ``point``."""
    if point.margin <= 0:
        raise ChamberViolation(f"Point is outside the chamber of {rootsystem.label}: margin {point.margin:.3g}")
    partition = fiber_partition(rootsystem)
    weights = orbit_multiplicities(rootsystem, multiplicities)
    k = np.array([float(weights[rootsystem.orbit_of[r]]) for r in rootsystem.positive_roots])
    roots = rootsystem.charted()
    coth = coth_vector(roots @ point.a)
    ints, scale = rootsystem.integer_roots()

    n = rootsystem.rank
    weighted_total = np.zeros((n, n, n, n))
    unweighted_total = np.zeros((n, n, n, n))
    exact_total = np.zeros((rootsystem.ambient_dim,) * 4, dtype=np.int64)
    residuals = []
    for pairs in partition.indices.values():
        left, right = np.array(pairs).T
        pair_weights = k[left] * k[right]
        plain = _bivector_sum(roots[left], roots[right], pair_weights)
        dressed = _bivector_sum(roots[left], roots[right], pair_weights * coth[left] * coth[right])
        residuals.append(_relative(dressed, plain))
        weighted_total += dressed
        unweighted_total += plain
        exact_total += _bivector_sum(ints[left], ints[right], np.ones(len(pairs), dtype=np.int64))

    expected = coupling_tensor(rootsystem).entries * scale**6
    aggregate_exact = bool(np.all(expected == exact_total.astype(object)))

    # the chamber block of [F_i, F_j] at gamma = 0 is half the weighted total
    params = PrepotentialParams(rootsystem, 0j, dict(weights))
    commutator = commutator_tensor(third_derivative_tensor(params, point)).real
    report = DunklReport(
        system=rootsystem.spec,
        point=point,
        tolerance=tolerance,
        fiber_sizes=partition.sizes(),
        fiber_residuals=residuals,
        aggregate_residual=_relative(weighted_total, unweighted_total),
        aggregate_exact=aggregate_exact,
        commutator_deviation=_relative(2 * commutator, weighted_total),
        weighted_total=weighted_total,
    )
    logger.info(
        "%s: %d fibers, max fiber residual %.3g (%s)",
        rootsystem.label,
        len(residuals),
        report.max_fiber_residual,
        report.outcome,
    )
    return report

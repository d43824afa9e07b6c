"""WDVV residuals for the trigonometric prepotential and the gamma-factor scan."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

import numpy as np

from wdvvroots.errors import DegenerateRank, NonPositiveC, SingularPivot
from wdvvroots.exactform import coupling_tensor, extract_canonical_constant, multiplicity_polynomial
from wdvvroots.prepotential import (
    DEFAULT_MARGIN,
    EvaluationPoint,
    PrepotentialParams,
    ThirdDerivativeTensor,
    sample_chamber_point,
    third_derivative_tensor,
)
from wdvvroots.rootsystems import RootSystem, RootSystemSpec

logger = logging.getLogger(__name__)

HALF = "half"
FULL = "full"
HYPOTHESES = (HALF, FULL)
# gamma^2 = -ratio * c
HYPOTHESIS_RATIO = {HALF: 0.5, FULL: 1.0}

PASS_TOLERANCE = 1e-9
FAIL_THRESHOLD = 1e-3
PIVOT_CONDITION_LIMIT = 1e12
NORM_FLOOR = 1e-300


def gamma_from_c(c: Any, hypothesis: str) -> complex:
    """gamma = i sqrt(c/2) for ``half``, i sqrt(c) for ``full``."""
    if hypothesis not in HYPOTHESIS_RATIO:
        raise ValueError(f"Unknown gamma hypothesis {hypothesis!r}; expected one of {HYPOTHESES}")
    if c is None or c <= 0:
        raise NonPositiveC(f"gamma needs c > 0, got {c}")
    return 1j * math.sqrt(float(c) * HYPOTHESIS_RATIO[hypothesis])


def assemble_slices(tensor: ThirdDerivativeTensor) -> list[np.ndarray]:
    """F_i[k][l] = T[i][k][l]; the last slice is gamma * I."""
    return [tensor.entries[i] for i in range(tensor.size)]


def _inf_norm(matrix: np.ndarray) -> float:
    return float(np.max(np.sum(np.abs(matrix), axis=1)))


def pairwise_commutator_residuals(slices: Sequence[np.ndarray]) -> dict[tuple[int, int], float]:
    """Relative ||F_i F_j - F_j F_i|| for every pair i < j."""
    norms = [_inf_norm(s) for s in slices]
    residuals = {}
    for i in range(len(slices)):
        for j in range(i + 1, len(slices)):
            comm = slices[i] @ slices[j] - slices[j] @ slices[i]
            residuals[(i, j)] = _inf_norm(comm) / (norms[i] * norms[j] + NORM_FLOOR)
    return residuals


def commutator_residual(slices: Sequence[np.ndarray]) -> float:
    """Max relative commutator over all slice pairs."""
    return max(pairwise_commutator_residuals(slices).values(), default=0.0)


def eq1_residual(slices: Sequence[np.ndarray], pivot: int | None = None) -> float:
    """Max relative ||F_i F_p^{-1} F_j - F_j F_p^{-1} F_i||, pivot p defaulting to the last slice."""
    if pivot is None:
        pivot = len(slices) - 1
    pivot_matrix = slices[pivot]
    cond = np.linalg.cond(pivot_matrix)
    if not np.isfinite(cond) or cond > PIVOT_CONDITION_LIMIT:
        raise SingularPivot(f"Pivot slice {pivot} has condition number {cond:.3g} > {PIVOT_CONDITION_LIMIT:g}")
    inverse = np.linalg.inv(pivot_matrix)
    norms = [_inf_norm(s) for s in slices]
    worst = 0.0
    for i in range(len(slices)):
        left = slices[i] @ inverse
        for j in range(i + 1, len(slices)):
            diff = left @ slices[j] - slices[j] @ inverse @ slices[i]
            worst = max(worst, _inf_norm(diff) / (norms[i] * norms[j] + NORM_FLOOR))
    return worst


def commutator_tensor(tensor: ThirdDerivativeTensor) -> np.ndarray:
    """C[i][j][l][m] = ([F_i, F_j])_{lm} restricted to chamber indices."""
    n = tensor.size - 1
    t = tensor.entries
    full = np.einsum("ilk,kjm->ijlm", t, t)
    return (full - full.transpose(1, 0, 2, 3))[:n, :n, :n, :n]


# ---- verification ----

@dataclass
class WdvvReport:
    system: RootSystemSpec
    gamma_hypothesis: str
    c: Fraction | None
    gamma: complex
    points: list[EvaluationPoint]
    tolerance: float
    commutator_residuals: list[float] = field(default_factory=list)
    eq1_residuals: list[float] = field(default_factory=list)
    # per point, {(i, j): residual}
    pair_residuals: list[dict[tuple[int, int], float]] = field(default_factory=list)
    note: str = ""

    @property
    def max_commutator_residual(self) -> float:
        return max(self.commutator_residuals, default=0.0)

    @property
    def max_eq1_residual(self) -> float:
        return max(self.eq1_residuals, default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_commutator_residual <= self.tolerance and self.max_eq1_residual <= self.tolerance


def _resolve_c(rootsystem: RootSystem, multiplicities: Mapping[Any, Any] | None) -> Fraction:
    tensor = coupling_tensor(rootsystem, multiplicities)
    return extract_canonical_constant(tensor, rootsystem.projector).c


def verify_wdvv(
    rootsystem: RootSystem,
    hypothesis: str = HALF,
    multiplicities: Mapping[str, Any] | None = None,
    seed: int = 42,
    samples: int = 10,
    margin: float = DEFAULT_MARGIN,
    tolerance: float = PASS_TOLERANCE,
    points: Sequence[EvaluationPoint] | None = None,
    c: Fraction | None = None,
) -> WdvvReport:
    """Sample chamber points and measure the WDVV residuals under one gamma hypothesis."""
    if points is None:
        points = sample_chamber_point(rootsystem, seed, margin, samples)
    if rootsystem.rank < 2:
        # slices are 2x2 with a scalar last slice, so they always commute
        gamma = 1j
        note = "rank 1: WDVV vacuous"
    else:
        if c is None:
            c = _resolve_c(rootsystem, multiplicities)
        gamma = gamma_from_c(c, hypothesis)
        note = ""

    params = PrepotentialParams(rootsystem, gamma, dict(multiplicities or {}))
    report = WdvvReport(
        system=rootsystem.spec,
        gamma_hypothesis=hypothesis,
        c=c,
        gamma=gamma,
        points=list(points),
        tolerance=tolerance,
        note=note,
    )
    for point in points:
        slices = assemble_slices(third_derivative_tensor(params, point))
        pairs = pairwise_commutator_residuals(slices)
        report.pair_residuals.append(pairs)
        report.commutator_residuals.append(max(pairs.values(), default=0.0))
        report.eq1_residuals.append(eq1_residual(slices))
    logger.info(
        "%s [%s]: commutator %.3g, eq1 %.3g over %d points",
        rootsystem.label,
        hypothesis,
        report.max_commutator_residual,
        report.max_eq1_residual,
        len(report.points),
    )
    return report


@dataclass
class GammaScanReport:
    system: RootSystemSpec
    c: Fraction
    tolerance: float
    residuals: dict[str, float]

    @property
    def passing(self) -> list[str]:
        return [h for h in HYPOTHESES if self.residuals[h] < self.tolerance]

    @property
    def rejected(self) -> list[str]:
        return [h for h in HYPOTHESES if self.residuals[h] > FAIL_THRESHOLD]

    @property
    def verdict(self) -> str:
        if len(self.passing) == 1:
            return self.passing[0]
        return "none" if not self.passing else "ambiguous"


def gamma_scan(
    rootsystem: RootSystem,
    multiplicities: Mapping[str, Any] | None = None,
    seed: int = 42,
    samples: int = 5,
    margin: float = DEFAULT_MARGIN,
    tolerance: float = PASS_TOLERANCE,
) -> GammaScanReport:
    """Max commutator residual under each gamma hypothesis on shared sample points."""
    if rootsystem.rank < 2:
        raise DegenerateRank(f"gamma scan needs rank >= 2, {rootsystem.label} has rank {rootsystem.rank}")
    c = _resolve_c(rootsystem, multiplicities)
    points = sample_chamber_point(rootsystem, seed, margin, samples)
    residuals = {
        h: verify_wdvv(rootsystem, h, multiplicities, points=points, c=c).max_commutator_residual
        for h in HYPOTHESES
    }
    report = GammaScanReport(system=rootsystem.spec, c=c, tolerance=tolerance, residuals=residuals)
    logger.info("%s gamma scan: %s", rootsystem.label, report.verdict)
    return report


def gamma_profile(
    params: PrepotentialParams,
    points: Sequence[EvaluationPoint],
    ratios: Sequence[float],
    c: Any,
) -> np.ndarray:
    """Max commutator residual with gamma^2 = -r c for each ratio r."""
    profile = []
    for ratio in ratios:
        gamma = 1j * math.sqrt(float(c) * ratio)
        scaled = PrepotentialParams(params.rootsystem, gamma, params.multiplicities)
        profile.append(
            max(commutator_residual(assemble_slices(third_derivative_tensor(scaled, p))) for p in points)
        )
    return np.array(profile)


def multiplicity_c(rootsystem: RootSystem, multiplicities: Mapping[str, Any]) -> Fraction:
    """c for per-orbit weights, read from the orbit-block polynomial."""
    return multiplicity_polynomial(rootsystem).evaluate(multiplicities)

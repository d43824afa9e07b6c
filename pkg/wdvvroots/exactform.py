"""Exact coupling 4-tensor, its canonical constant c, and the published c-table audit.

The coupling tensor is the ordered sum over positive-root pairs

    S[i][j][l][m] = sum k_a k_b (a, b) (a_i b_j - a_j b_i) (a_l b_m - a_m b_l)

Roots are scaled to integers first, so the pair sum runs in int64 numpy
arithmetic and is turned back into Fractions once at the end.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from wdvvroots.errors import DegenerateRank
from wdvvroots.rootsystems import (
    RootSystem,
    RootSystemSpec,
    Vector,
    dot,
    orbit_multiplicities,
)

logger = logging.getLogger(__name__)

MATCH = "match"
MISMATCH = "mismatch"
NO_TABLE_ENTRY = "no_table_entry"

# published values of c, as printed
TABLE_FORMULAS: dict[str, Callable[[int], int]] = {
    "A": lambda n: 2 * (n + 2),
    "B": lambda n: 4 * (2 * n - 3),
    "C": lambda n: 8 * (n + 2),
    "D": lambda n: 8 * (n - 2),
}
TABLE_EXCEPTIONAL: dict[tuple[str, int], int] = {
    ("E", 6): 6,
    ("E", 7): 96,
    ("E", 8): 320,
    ("F", 4): 30,
}


def table_value(spec: RootSystemSpec) -> Fraction | None:
    """The printed table value for ``spec``, or None when the table has no column."""
    if spec.family in TABLE_FORMULAS:
        return Fraction(TABLE_FORMULAS[spec.family](spec.rank))
    value = TABLE_EXCEPTIONAL.get((spec.family, spec.rank))
    return None if value is None else Fraction(value)


@dataclass(frozen=True, eq=False)
class CouplingTensor:
    """Exact 4-index coupling form over the ambient coordinates."""

    system: RootSystemSpec
    multiplicities: dict[str, Fraction]
    entries: np.ndarray
    # (orbit, orbit) when the pair sum was restricted to one orbit-pair block
    block: tuple[str, str] | None = None

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def trace(self) -> Fraction:
        """Contraction sum_{i,j} S[i][j][i][j]."""
        m = self.dim
        return sum((self.entries[i, j, i, j] for i in range(m) for j in range(m)), Fraction(0))

    def equals(self, other: CouplingTensor | np.ndarray) -> bool:
        entries = other.entries if isinstance(other, CouplingTensor) else other
        return entries.shape == self.entries.shape and bool(np.all(self.entries == entries))

    @property
    def is_unweighted(self) -> bool:
        return self.block is None and all(k == 1 for k in self.multiplicities.values())


@dataclass(frozen=True)
class CanonicalFormResult:
    system: RootSystemSpec
    c: Fraction
    proportionality_residual: Fraction
    table_value: Fraction | None
    verdict: str


@dataclass(frozen=True)
class TableVerdict:
    system: RootSystemSpec
    c_oracle: Fraction | None
    c_table: Fraction | None
    verdict: str

    @property
    def finding(self) -> bool:
        return self.verdict == MISMATCH


@dataclass(frozen=True)
class MultiplicityPolynomial:
    """c(k) = sum over unordered orbit pairs of coefficient * k_o * k_o'."""

    system: RootSystemSpec
    coefficients: dict[tuple[str, str], Fraction]
    residuals: dict[tuple[str, str], Fraction] = field(default_factory=dict)

    def evaluate(self, multiplicities: Mapping[str, Any] | None = None) -> Fraction:
        k = multiplicities or {}
        return sum(
            (coef * Fraction(k.get(o, 1)) * Fraction(k.get(p, 1)) for (o, p), coef in self.coefficients.items()),
            Fraction(0),
        )


# ---- integer pair sums ----

def _pair_sum(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """sum_{a in left, b in right} (a,b) (a^b) (x) (a^b) over integer rows, as int64."""
    m = left.shape[1]
    if len(left) == 0 or len(right) == 0:
        return np.zeros((m, m, m, m), dtype=np.int64)
    gram = left @ right.T
    outer = np.einsum("ai,bj->abij", left, right)
    wedge = (outer - outer.transpose(0, 1, 3, 2)).reshape(-1, m * m)
    weighted = wedge * gram.reshape(-1, 1)
    return (weighted.T @ wedge).reshape(m, m, m, m)


def _to_rational(terms: list[tuple[Fraction, np.ndarray]], denominator: int) -> np.ndarray:
    """Exact sum of weight * integer block, divided by ``denominator``."""
    common = lcm(*(w.denominator for w, _ in terms))
    shape = terms[0][1].shape
    total = np.zeros(shape, dtype=object)
    for weight, block in terms:
        total = total + block.astype(object) * (weight.numerator * (common // weight.denominator))
    scale = common * denominator
    return np.vectorize(lambda v: Fraction(v, scale), otypes=[object])(total)


def _orbit_blocks(
    rootsystem: RootSystem,
    positive_roots: Sequence[Vector] | None = None,
) -> tuple[dict[tuple[str, str], np.ndarray], int]:
    if positive_roots is None:
        positive_roots = rootsystem.positive_roots
    scaled = {}
    scale = 1
    for label in rootsystem.orbits:
        members = [r for r in positive_roots if rootsystem.orbit_of[r] == label]
        scaled[label], scale = rootsystem.integer_roots(members)
    blocks = {(o, p): _pair_sum(scaled[o], scaled[p]) for o in rootsystem.orbits for p in rootsystem.orbits}
    return blocks, scale


def _check_positive_system(rootsystem: RootSystem, positive_roots: Sequence[Vector]) -> None:
    chosen = set(positive_roots)
    negated = {tuple(-x for x in r) for r in chosen}
    if len(chosen) != len(rootsystem.positive_roots) or chosen & negated or chosen | negated != set(rootsystem.roots):
        raise ValueError(
            f"Expected one of each pair +-alpha of {rootsystem.label}, got {len(chosen)} roots"
        )


def coupling_tensor(
    rootsystem: RootSystem,
    multiplicities: Mapping[Any, Any] | None = None,
    positive_roots: Sequence[Vector] | None = None,
) -> CouplingTensor:
    """Positive-pair coupling tensor, weighted by per-orbit multiplicities (default 1).

    ``positive_roots`` replaces the base positive system, e.g. by its image
    under a Weyl element.
    """
    weights = {
        label: Fraction(value)
        for label, value in orbit_multiplicities(rootsystem, multiplicities).items()
    }
    if positive_roots is not None:
        _check_positive_system(rootsystem, positive_roots)
    blocks, scale = _orbit_blocks(rootsystem, positive_roots)
    terms = [(weights[o] * weights[p], block) for (o, p), block in blocks.items()]
    entries = _to_rational(terms, scale**6)
    logger.debug("coupling tensor for %s over %d positive pairs", rootsystem.label, len(rootsystem.positive_roots) ** 2)
    return CouplingTensor(system=rootsystem.spec, multiplicities=weights, entries=entries)


def canonical_form(projector: np.ndarray) -> np.ndarray:
    """P_il P_jm - P_im P_jl, the invariant antisymmetric form on span(R)."""
    p = projector
    return p[:, None, :, None] * p[None, :, None, :] - p[:, None, None, :] * p[None, :, :, None]


def extract_canonical_constant(tensor: CouplingTensor, projector: np.ndarray) -> CanonicalFormResult:
    """Read off c from the trace contraction and measure exact proportionality."""
    m = projector.shape[0]
    n = int(sum((projector[i, i] for i in range(m)), Fraction(0)))
    if n < 2:
        raise DegenerateRank(f"c is undefined for {tensor.system.label}: rank {n} < 2")

    c = Fraction(tensor.trace()) / (n * n - n)
    difference = tensor.entries - c * canonical_form(projector)
    residual = max((abs(Fraction(v)) for v in difference.flat), default=Fraction(0))

    if tensor.is_unweighted:
        comparison = table_compare(tensor.system, c)
        table, verdict = comparison.c_table, comparison.verdict
    else:
        table, verdict = None, NO_TABLE_ENTRY
    return CanonicalFormResult(
        system=tensor.system,
        c=c,
        proportionality_residual=residual,
        table_value=table,
        verdict=verdict,
    )


def table_compare(spec: RootSystemSpec, c: Fraction | None) -> TableVerdict:
    """Compare an oracle c with the printed table entry."""
    table = table_value(spec)
    if c is None or table is None:
        verdict = NO_TABLE_ENTRY
    elif Fraction(c) == table:
        verdict = MATCH
    else:
        verdict = MISMATCH
    return TableVerdict(system=spec, c_oracle=c, c_table=table, verdict=verdict)


def table_audit(rootsystem: RootSystem) -> tuple[TableVerdict, CanonicalFormResult | None]:
    """Oracle c versus the printed table for one system; rank-1 systems report c as undefined."""
    try:
        result = extract_canonical_constant(coupling_tensor(rootsystem), rootsystem.projector)
    except DegenerateRank:
        return table_compare(rootsystem.spec, None), None
    return table_compare(rootsystem.spec, result.c), result


def parity_erratum_check(rootsystem: RootSystem) -> np.ndarray:
    """Evaluate 1/4 sum over ALL of R x R literally.

    The summand is odd under b -> -b, so the result is the zero tensor for
    every system; the operative object is the positive-pair sum.
    """
    scaled, scale = rootsystem.integer_roots(rootsystem.roots)
    return _to_rational([(Fraction(1, 4), _pair_sum(scaled, scaled))], scale**6)


def multiplicity_polynomial(rootsystem: RootSystem) -> MultiplicityPolynomial:
    """Coefficients of c as a quadratic form in the orbit multiplicities."""
    blocks, scale = _orbit_blocks(rootsystem)
    orbits = rootsystem.orbits
    coefficients: dict[tuple[str, str], Fraction] = {}
    residuals: dict[tuple[str, str], Fraction] = {}
    for i, o in enumerate(orbits):
        for p in orbits[i:]:
            block = blocks[(o, p)] if o == p else blocks[(o, p)] + blocks[(p, o)]
            tensor = CouplingTensor(
                system=rootsystem.spec,
                multiplicities={label: Fraction(1) for label in orbits},
                entries=_to_rational([(Fraction(1), block)], scale**6),
                block=(o, p),
            )
            result = extract_canonical_constant(tensor, rootsystem.projector)
            coefficients[(o, p)] = result.c
            residuals[(o, p)] = result.proportionality_residual
    return MultiplicityPolynomial(system=rootsystem.spec, coefficients=coefficients, residuals=residuals)


def transform_tensor(entries: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    """Apply ``matrix`` to all four slots: S'_ijlm = M_ia M_jb M_lc M_md S_abcd."""
    out = entries
    for _ in range(4):
        out = np.tensordot(out, matrix, axes=([0], [1]))
    return out


def weyl_vector(rootsystem: RootSystem) -> Vector:
    """rho, the half-sum of the positive roots."""
    total = [Fraction(0)] * rootsystem.ambient_dim
    for root in rootsystem.positive_roots:
        for i, x in enumerate(root):
            total[i] += x
    return tuple(x / 2 for x in total)


def simply_laced_constant(rootsystem: RootSystem) -> Fraction:
    """Closed form of c for single-orbit systems from (rho, rho) and |R+|.

    With every root of squared length L, inner products of distinct
    non-opposite roots are +-L/2, which gives
    c n(n-1) = (3 L^2 / 2) (4 (rho, rho) - L |R+|).
    """
    if rootsystem.orbits != ("single",):
        raise ValueError(f"{rootsystem.label} is not simply laced")
    n = rootsystem.rank
    if n < 2:
        raise DegenerateRank(f"c is undefined for {rootsystem.label}: rank {n} < 2")
    length = dot(rootsystem.simple_roots[0], rootsystem.simple_roots[0])
    rho = weyl_vector(rootsystem)
    count = len(rootsystem.positive_roots)
    return Fraction(3, 2) * length**2 * (4 * dot(rho, rho) - length * count) / (n * (n - 1))

"""Exact realizations of the irreducible crystallographic root systems.

Coordinates follow the standard Bourbaki realizations. Every coordinate is an
integer or a half-integer, so all arithmetic in this module is exact
(``fractions.Fraction`` scalars, ``sympy`` for matrix inverses).
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
import sympy as sp

from wdvvroots.errors import (
    InadmissibleRank,
    MultiplicityOrbitMismatch,
    NoConvergence,
    NonCrystallographic,
    NotABase,
    UnknownFamily,
    ZeroRoot,
)

logger = logging.getLogger(__name__)

Vector = tuple[Fraction, ...]

FAMILIES = "ABCDEFG"
CLOSURE_CAP = 10_000
ORBIT_ORDER = ("short", "long", "single")

# (lowest rank, highest rank or None)
_RANK_BOUNDS: dict[str, tuple[int, int | None]] = {
    "A": (1, None),
    "B": (2, None),
    "C": (2, None),
    "D": (3, None),
    "E": (6, 8),
    "F": (4, 4),
    "G": (2, 2),
}

_LABEL_RE = re.compile(r"^\s*([A-Ga-g])_?(\d+)\s*$")


@dataclass(frozen=True)
class RootSystemSpec:
    """Cartan type of an irreducible root system, e.g. ``RootSystemSpec("B", 2)``."""

    family: str
    rank: int

    def __post_init__(self) -> None:
        if self.family not in _RANK_BOUNDS:
            raise UnknownFamily(
                f"Unknown root system family {self.family!r}; expected one of {FAMILIES}"
            )
        low, high = _RANK_BOUNDS[self.family]
        if isinstance(self.rank, bool) or not isinstance(self.rank, int):
            raise InadmissibleRank(f"Rank must be an integer, got {self.rank!r}")
        if self.rank < low or (high is not None and self.rank > high):
            if high is None:
                allowed = f"rank >= {low}"
            elif low == high:
                allowed = f"rank == {low}"
            else:
                allowed = f"rank in {list(range(low, high + 1))}"
            raise InadmissibleRank(
                f"{self.family}_{self.rank} is not an irreducible root system: "
                f"family {self.family} requires {allowed}"
            )

    @property
    def label(self) -> str:
        return f"{self.family}{self.rank}"

    @classmethod
    def parse(cls, text: str) -> RootSystemSpec:
        """Parse labels such as ``"B2"``, ``"e8"`` or ``"D_4"``."""
        match = _LABEL_RE.match(text)
        if match is None:
            raise UnknownFamily(f"Cannot parse root system label {text!r}")
        return cls(match.group(1).upper(), int(match.group(2)))

    def __str__(self) -> str:
        return self.label


def table_systems(max_classical_rank: int = 6) -> list[RootSystemSpec]:
    """Every family with a published c at representative ranks, plus G2."""
    specs = [RootSystemSpec("A", n) for n in range(1, max_classical_rank + 1)]
    specs += [RootSystemSpec("B", n) for n in range(2, max_classical_rank + 1)]
    specs += [RootSystemSpec("C", n) for n in range(2, max_classical_rank + 1)]
    specs += [RootSystemSpec("D", n) for n in range(3, max_classical_rank + 1)]
    specs += [RootSystemSpec("E", n) for n in (6, 7, 8)]
    specs += [RootSystemSpec("F", 4), RootSystemSpec("G", 2)]
    return specs


# ---- exact vector helpers ----

def as_vector(values: Iterable[Any]) -> Vector:
    """Coerce ints, strings or Fractions into an exact vector."""
    return tuple(Fraction(v) for v in values)


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    """Exact Euclidean inner product."""
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def _basis(dim: int, i: int, scale: Fraction | int = 1) -> list[Fraction]:
    v = [Fraction(0)] * dim
    v[i] = Fraction(scale)
    return v


def _diff(dim: int, i: int, j: int) -> Vector:
    """e_i - e_j (0-based)."""
    v = _basis(dim, i)
    v[j] -= 1
    return tuple(v)


def _to_fraction(value: sp.Rational) -> Fraction:
    return Fraction(int(value.p), int(value.q))


def _to_sympy(rows: Sequence[Sequence[Fraction]]) -> sp.Matrix:
    return sp.Matrix([[sp.Rational(x.numerator, x.denominator) for x in row] for row in rows])


def reflect_vector(alpha: Sequence[Any], v: Sequence[Any]) -> Vector:
    """Reflect ``v`` through the hyperplane orthogonal to ``alpha``: v - 2(v,a)/(a,a) a."""
    alpha = as_vector(alpha)
    v = as_vector(v)
    if len(alpha) != len(v):
        raise ValueError(f"Dimension mismatch: root has {len(alpha)} entries, vector {len(v)}")
    norm = dot(alpha, alpha)
    if norm == 0:
        raise ZeroRoot("Cannot reflect through the zero vector")
    k = 2 * dot(v, alpha) / norm
    return tuple(x - k * a for x, a in zip(v, alpha))


def cartan_matrix(simple_roots: Sequence[Sequence[Any]]) -> list[list[int]]:
    """Cartan integers 2(a_i, a_j)/(a_j, a_j); raises if any is not an integer."""
    simple = [as_vector(r) for r in simple_roots]
    matrix = []
    for a in simple:
        row = []
        for b in simple:
            norm = dot(b, b)
            if norm == 0:
                raise ZeroRoot("Simple roots must be nonzero")
            value = 2 * dot(a, b) / norm
            if value.denominator != 1:
                raise NonCrystallographic(
                    f"Cartan integer 2(a,b)/(b,b) = {value} is not an integer for a={a}, b={b}"
                )
            row.append(int(value))
        matrix.append(row)
    return matrix


def root_closure(simple_roots: Sequence[Sequence[Any]]) -> list[Vector]:
    """Smallest reflection-closed, negation-closed set containing the simple roots.

    The Weyl group is generated by the simple reflections, so the orbit of the
    simple roots under those reflections is the whole root set.
    """
    simple = [as_vector(r) for r in simple_roots]
    cartan_matrix(simple)

    seen: set[Vector] = set(simple)
    frontier = list(simple)
    while frontier:
        discovered = []
        for v in frontier:
            for s in simple:
                w = reflect_vector(s, v)
                if w not in seen:
                    seen.add(w)
                    discovered.append(w)
                    if len(seen) > CLOSURE_CAP:
                        raise NoConvergence(
                            f"Reflection closure exceeded {CLOSURE_CAP} vectors; "
                            "the simple roots do not generate a finite root system"
                        )
        frontier = discovered
    return sorted(seen)


def _exact_inverse(rows: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    try:
        inverse = _to_sympy(rows).inv()
    except ValueError as exc:
        raise NotABase("Simple roots are linearly dependent") from exc
    n = len(rows)
    return [[_to_fraction(inverse[i, j]) for j in range(n)] for i in range(n)]


def simple_coefficients(
    root: Sequence[Fraction],
    simple_roots: Sequence[Vector],
    gram_inverse: Sequence[Sequence[Fraction]] | None = None,
) -> list[Fraction]:
    """Exact expansion of ``root`` over ``simple_roots``."""
    if gram_inverse is None:
        gram_inverse = _exact_inverse([[dot(a, b) for b in simple_roots] for a in simple_roots])
    rhs = [dot(s, root) for s in simple_roots]
    coeffs = [sum((g * r for g, r in zip(row, rhs)), Fraction(0)) for row in gram_inverse]
    rebuilt = [Fraction(0)] * len(root)
    for c, s in zip(coeffs, simple_roots):
        for i, x in enumerate(s):
            rebuilt[i] += c * x
    if tuple(rebuilt) != tuple(root):
        raise NotABase(f"Root {tuple(root)} is not in the span of the simple roots")
    return coeffs


def positive_partition(
    roots: Sequence[Sequence[Any]],
    simple_roots: Sequence[Sequence[Any]],
) -> tuple[list[Vector], list[Vector]]:
    """Split roots by the sign of their simple-root coefficients."""
    simple = [as_vector(s) for s in simple_roots]
    gram_inverse = _exact_inverse([[dot(a, b) for b in simple] for a in simple])
    positive: list[Vector] = []
    negative: list[Vector] = []
    for root in roots:
        root = as_vector(root)
        coeffs = simple_coefficients(root, simple, gram_inverse)
        if all(c >= 0 for c in coeffs):
            positive.append(root)
        elif all(c <= 0 for c in coeffs):
            negative.append(root)
        else:
            raise NotABase(
                f"Root {root} has mixed-sign coefficients {[str(c) for c in coeffs]}"
            )
    return positive, negative


def span_projector(roots: Sequence[Sequence[Any]]) -> np.ndarray:
    """Exact orthogonal projector onto span(roots), as an object array of Fractions."""
    vectors = [as_vector(r) for r in roots]
    if not vectors:
        raise ValueError("span_projector needs at least one root")
    m = len(vectors[0])
    columns = _to_sympy(vectors).T
    _, pivots = columns.rref()
    basis = columns.extract(list(range(m)), list(pivots))
    projector = basis * (basis.T * basis).inv() * basis.T
    out = np.empty((m, m), dtype=object)
    for i in range(m):
        for j in range(m):
            out[i, j] = _to_fraction(projector[i, j])
    return out


def _chart_from_simple_roots(
    simple_roots: Sequence[Vector],
    ambient_dim: int,
    seed: int | None = None,
) -> np.ndarray:
    rank = len(simple_roots)
    if ambient_dim == rank and seed is None:
        return np.eye(rank)
    basis = np.array([[float(x) for x in r] for r in simple_roots]).T
    q, r = np.linalg.qr(basis)
    # fix the QR sign ambiguity so charts are reproducible
    q = q * np.sign(np.diag(r))
    if seed is not None:
        rng = np.random.default_rng(seed)
        rot, tri = np.linalg.qr(rng.normal(size=(rank, rank)))
        q = q @ (rot * np.sign(np.diag(tri)))
    return q


def _orbit_labels(roots: Sequence[Vector]) -> dict[Vector, str]:
    lengths = sorted({dot(r, r) for r in roots})
    if len(lengths) == 1:
        names = {lengths[0]: "single"}
    elif len(lengths) == 2:
        names = {lengths[0]: "short", lengths[1]: "long"}
    else:
        raise NonCrystallographic(f"Expected at most two root lengths, found {len(lengths)}")
    return {r: names[dot(r, r)] for r in roots}


def _is_connected(cartan: list[list[int]]) -> bool:
    n = len(cartan)
    reached = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for j in range(n):
            if cartan[i][j] != 0 and j not in reached:
                reached.add(j)
                stack.append(j)
    return len(reached) == n


@dataclass(frozen=True, eq=False)
class RootSystem:
    """An exact realization of an irreducible crystallographic root system."""

    spec: RootSystemSpec
    ambient_dim: int
    rank: int
    roots: tuple[Vector, ...]
    positive_roots: tuple[Vector, ...]
    simple_roots: tuple[Vector, ...]
    orbit_of: Mapping[Vector, str]
    projector: np.ndarray
    chart: np.ndarray

    @property
    def label(self) -> str:
        return self.spec.label

    @property
    def orbits(self) -> tuple[str, ...]:
        present = set(self.orbit_of.values())
        return tuple(label for label in ORBIT_ORDER if label in present)

    def positive_in_orbit(self, label: str) -> tuple[Vector, ...]:
        return tuple(r for r in self.positive_roots if self.orbit_of[r] == label)

    def charted(self, roots: Sequence[Vector] | None = None) -> np.ndarray:
        """Rank-dimensional float coordinates Q^T a of the given (default: positive) roots."""
        if roots is None:
            roots = self.positive_roots
        ambient = np.array([[float(x) for x in r] for r in roots]).reshape(len(roots), self.ambient_dim)
        return ambient @ self.chart

    def integer_roots(self, roots: Sequence[Vector] | None = None) -> tuple[np.ndarray, int]:
        """Roots scaled by the lcm of their coordinate denominators, as int64."""
        if roots is None:
            roots = self.positive_roots
        scale = 1
        for r in self.roots:
            for x in r:
                scale = lcm(scale, x.denominator)
        scaled = np.array([[int(x * scale) for x in r] for r in roots], dtype=np.int64)
        return scaled.reshape(len(roots), self.ambient_dim), int(scale)

    @property
    def max_root_norm(self) -> float:
        return max(float(dot(r, r)) for r in self.positive_roots) ** 0.5

    def with_chart(self, chart: np.ndarray) -> RootSystem:
        return replace(self, chart=chart)


def simple_roots_for(spec: RootSystemSpec) -> list[Vector]:
    """Bourbaki simple roots for ``spec`` (0-based coordinates)."""
    n = spec.rank
    family = spec.family
    half = Fraction(1, 2)
    if family == "A":
        return [_diff(n + 1, i, i + 1) for i in range(n)]
    if family in "BCD":
        roots = [_diff(n, i, i + 1) for i in range(n - 1)]
        if family == "B":
            roots.append(tuple(_basis(n, n - 1)))
        elif family == "C":
            roots.append(tuple(_basis(n, n - 1, 2)))
        else:
            last = _basis(n, n - 1)
            last[n - 2] = Fraction(1)
            roots.append(tuple(last))
        return roots
    if family == "E":
        first = (half, -half, -half, -half, -half, -half, -half, half)
        second = _basis(8, 0)
        second[1] = Fraction(1)
        return [first, tuple(second)] + [_diff(8, i + 1, i) for i in range(n - 2)]
    if family == "F":
        return [
            _diff(4, 1, 2),
            _diff(4, 2, 3),
            tuple(_basis(4, 3)),
            (half, -half, -half, -half),
        ]
    # G2 in the sum-zero hyperplane of R^3
    return [as_vector((1, -1, 0)), as_vector((-2, 1, 1))]


@lru_cache(maxsize=None)
def build_root_system(spec: RootSystemSpec) -> RootSystem:
    """Construct the exact root system for an admissible spec."""
    simple = simple_roots_for(spec)
    cartan = cartan_matrix(simple)
    if not _is_connected(cartan):
        raise InadmissibleRank(f"{spec.label} has a disconnected Dynkin diagram")

    roots = root_closure(simple)
    positive, _ = positive_partition(roots, simple)
    ambient_dim = len(simple[0])
    projector = span_projector(simple)
    chart = _chart_from_simple_roots(simple, ambient_dim)
    projector.setflags(write=False)
    chart.setflags(write=False)

    logger.debug("built %s: %d roots in dimension %d", spec.label, len(roots), ambient_dim)
    return RootSystem(
        spec=spec,
        ambient_dim=ambient_dim,
        rank=spec.rank,
        roots=tuple(roots),
        positive_roots=tuple(sorted(positive)),
        simple_roots=tuple(simple),
        orbit_of=_orbit_labels(roots),
        projector=projector,
        chart=chart,
    )


def orthonormal_chart(rootsystem: RootSystem, seed: int | None = None) -> np.ndarray:
    """Orthonormal m x n basis Q of span(R): Q^T Q = I_n and Q Q^T = P.

    With ``seed`` the basis is additionally rotated by a random orthogonal
    matrix, giving a different but equally valid chart.
    """
    return _chart_from_simple_roots(rootsystem.simple_roots, rootsystem.ambient_dim, seed)


def orbit_multiplicities(
    rootsystem: RootSystem,
    multiplicities: Mapping[Any, Any] | None = None,
    default: Any = 1,
) -> dict[str, Any]:
    """Resolve weights keyed by orbit label or by root into one weight per orbit."""
    weights: dict[str, Any] = {}
    for key, value in (multiplicities or {}).items():
        if isinstance(key, str):
            if key not in rootsystem.orbits:
                raise MultiplicityOrbitMismatch(
                    f"{rootsystem.label} has no orbit {key!r}; orbits are {list(rootsystem.orbits)}"
                )
            label = key
        else:
            root = as_vector(key)
            if root not in rootsystem.orbit_of:
                raise MultiplicityOrbitMismatch(f"{root} is not a root of {rootsystem.label}")
            label = rootsystem.orbit_of[root]
        if label in weights and weights[label] != value:
            raise MultiplicityOrbitMismatch(
                f"Weights differ within the {label} orbit: {weights[label]} vs {value}"
            )
        weights[label] = value
    return {label: weights.get(label, default) for label in rootsystem.orbits}

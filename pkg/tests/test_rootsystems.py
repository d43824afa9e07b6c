"""Tests for rootsystems.py."""

from fractions import Fraction

import numpy as np
import pytest

from wdvvroots.errors import (
    InadmissibleRank,
    MultiplicityOrbitMismatch,
    NonCrystallographic,
    NotABase,
    UnknownFamily,
    ZeroRoot,
)
from wdvvroots.rootsystems import (
    RootSystemSpec,
    as_vector,
    dot,
    build_root_system,
    cartan_matrix,
    orbit_multiplicities,
    orthonormal_chart,
    positive_partition,
    reflect_vector,
    root_closure,
    simple_coefficients,
    span_projector,
    table_systems,
)


def rs(label):
    return build_root_system(RootSystemSpec.parse(label))


@pytest.mark.parametrize(
    "label, count",
    [
        ("A1", 2), ("A2", 6), ("A3", 12), ("B2", 8), ("B3", 18), ("C3", 18),
        ("D3", 12), ("D4", 24), ("G2", 12), ("F4", 48), ("E6", 72), ("E7", 126), ("E8", 240),
    ],
)
def test_root_counts(label, count):
    system = rs(label)
    assert len(system.roots) == count
    assert len(system.positive_roots) == count // 2


@pytest.mark.parametrize("label", ["B2", "G2", "F4", "E8"])
def test_closure_is_negation_and_reflection_closed(label):
    system = rs(label)
    roots = set(system.roots)
    for r in system.roots:
        assert tuple(-x for x in r) in roots
    for s in system.simple_roots:
        for r in system.roots:
            assert reflect_vector(s, r) in roots


@pytest.mark.parametrize("label", [spec.label for spec in table_systems()])
def test_reflections_preserve_orbits(label):
    system = rs(label)
    for alpha in system.roots:
        for beta in system.roots:
            assert system.orbit_of[reflect_vector(alpha, beta)] == system.orbit_of[beta]


@pytest.mark.parametrize("label", [spec.label for spec in table_systems()])
def test_cartan_integers_for_all_pairs(label):
    system = rs(label)
    for alpha in system.roots:
        for beta in system.roots:
            assert (2 * dot(alpha, beta) / dot(beta, beta)).denominator == 1


def test_spec_validation():
    with pytest.raises(UnknownFamily):
        RootSystemSpec("H", 3)
    with pytest.raises(InadmissibleRank):
        RootSystemSpec("E", 9)
    with pytest.raises(InadmissibleRank):
        RootSystemSpec("D", 2)
    with pytest.raises(InadmissibleRank):
        RootSystemSpec("B", 1)
    with pytest.raises(InadmissibleRank):
        RootSystemSpec("G", 3)


def test_spec_parse():
    assert RootSystemSpec.parse("b_2") == RootSystemSpec("B", 2)
    assert RootSystemSpec.parse(" E8 ").label == "E8"
    with pytest.raises(UnknownFamily):
        RootSystemSpec.parse("E")
    with pytest.raises(UnknownFamily):
        RootSystemSpec.parse("X4")


def test_table_systems_selector():
    labels = [s.label for s in table_systems()]
    assert len(labels) == 25
    assert labels.count("G2") == 1
    assert "A6" in labels and "A7" not in labels
    assert {"E6", "E7", "E8", "F4", "D3", "C2"} <= set(labels)


def test_reflect_vector():
    assert reflect_vector((1, 0), (1, 0)) == as_vector((-1, 0))
    assert reflect_vector((1, -1), (1, 0)) == as_vector((0, 1))
    with pytest.raises(ZeroRoot):
        reflect_vector((0, 0), (1, 0))
    with pytest.raises(ValueError):
        reflect_vector((1, 0, 0), (1, 0))


def test_cartan_matrix_b2():
    assert cartan_matrix([(1, -1), (0, 1)]) == [[2, -2], [-1, 2]]


def test_cartan_matrix_g2():
    system = rs("G2")
    matrix = cartan_matrix(system.simple_roots)
    assert sorted(matrix[0][1:] + matrix[1][:1]) == [-3, -1]


def test_non_crystallographic():
    with pytest.raises(NonCrystallographic):
        cartan_matrix([(1, 0), (-1, 3)])
    with pytest.raises(NonCrystallographic):
        root_closure([(1, 0), (-1, 3)])


def test_root_closure_b2():
    roots = root_closure([(1, -1), (0, 1)])
    assert len(roots) == 8
    assert as_vector((1, 1)) in roots
    assert as_vector((-1, 0)) in roots


def test_simple_coefficients():
    simple = [as_vector((1, -1)), as_vector((0, 1))]
    assert simple_coefficients(as_vector((1, 1)), simple) == [1, 2]
    with pytest.raises(NotABase):
        simple_coefficients(as_vector((1, 1, 1)), [as_vector((1, -1, 0)), as_vector((0, 1, -1))])


def test_positive_partition_b2():
    system = rs("B2")
    positive, negative = positive_partition(system.roots, system.simple_roots)
    assert len(positive) == len(negative) == 4
    assert set(positive) == {as_vector(v) for v in [(1, 0), (0, 1), (1, -1), (1, 1)]}


def test_span_projector_a2():
    p = span_projector(rs("A2").simple_roots)
    expected = np.array([[Fraction(2, 3), Fraction(-1, 3), Fraction(-1, 3)],
                         [Fraction(-1, 3), Fraction(2, 3), Fraction(-1, 3)],
                         [Fraction(-1, 3), Fraction(-1, 3), Fraction(2, 3)]], dtype=object)
    assert np.all(p == expected)
    assert np.all(p.dot(p) == p)


def test_orbits():
    assert rs("B2").orbits == ("short", "long")
    assert rs("A2").orbits == ("single",)
    b2 = rs("B2")
    assert b2.orbit_of[as_vector((1, 0))] == "short"
    assert b2.orbit_of[as_vector((1, 1))] == "long"
    assert len(b2.positive_in_orbit("short")) == 2


@pytest.mark.parametrize("label", ["A3", "E6", "G2", "B3"])
def test_chart_is_orthonormal(label):
    system = rs(label)
    q = system.chart
    projector = system.projector.astype(float)
    np.testing.assert_allclose(q.T @ q, np.eye(system.rank), atol=1e-12)
    np.testing.assert_allclose(q @ q.T, projector, atol=1e-12)


def test_seeded_chart_differs_but_stays_orthonormal():
    system = rs("A3")
    q = orthonormal_chart(system, seed=7)
    assert not np.allclose(q, system.chart)
    np.testing.assert_allclose(q.T @ q, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(q @ q.T, system.projector.astype(float), atol=1e-12)


def test_a1_chart_length():
    system = rs("A1")
    np.testing.assert_allclose(system.charted(), [[np.sqrt(2)]])


def test_integer_roots_scale():
    ints, scale = rs("E8").integer_roots()
    assert scale == 2
    assert ints.dtype == np.int64
    assert ints.shape == (120, 8)
    assert rs("B3").integer_roots()[1] == 1


def test_build_is_cached_and_immutable():
    assert rs("F4") is rs("F4")
    with pytest.raises(ValueError):
        rs("F4").chart[0, 0] = 2.0


def test_orbit_multiplicities():
    b2 = rs("B2")
    assert orbit_multiplicities(b2, {"short": 2, "long": 3}) == {"short": 2, "long": 3}
    assert orbit_multiplicities(b2, {(1, 0): 5}) == {"short": 5, "long": 1}
    assert orbit_multiplicities(b2) == {"short": 1, "long": 1}
    with pytest.raises(MultiplicityOrbitMismatch):
        orbit_multiplicities(b2, {"single": 2})
    with pytest.raises(MultiplicityOrbitMismatch):
        orbit_multiplicities(b2, {(1, 0): 2, (0, 1): 3})
    with pytest.raises(MultiplicityOrbitMismatch):
        orbit_multiplicities(b2, {(2, 0): 1})

"""Tests for exactform.py."""

from fractions import Fraction

import numpy as np
import pytest

from wdvvroots.dunkl import reflection_matrix
from wdvvroots.errors import DegenerateRank
from wdvvroots.exactform import (
    MATCH,
    MISMATCH,
    NO_TABLE_ENTRY,
    canonical_form,
    coupling_tensor,
    extract_canonical_constant,
    multiplicity_polynomial,
    parity_erratum_check,
    simply_laced_constant,
    table_audit,
    table_compare,
    transform_tensor,
    weyl_vector,
)
from wdvvroots.rootsystems import (
    RootSystemSpec,
    as_vector,
    build_root_system,
    positive_partition,
    reflect_vector,
    table_systems,
)


def rs(label):
    return build_root_system(RootSystemSpec.parse(label))


def oracle(label):
    system = rs(label)
    return extract_canonical_constant(coupling_tensor(system), system.projector)


@pytest.mark.parametrize(
    "label, c",
    [
        ("A2", 6), ("A3", 8), ("A4", 10),
        ("B2", 4), ("B3", 12), ("B4", 20),
        ("C2", 32), ("C3", 40),
        ("D3", 8), ("D4", 16), ("D5", 24),
        ("G2", 240), ("F4", 30),
        ("E6", 48), ("E7", 96),
    ],
)
def test_canonical_constant(label, c):
    result = oracle(label)
    assert result.c == c
    assert result.proportionality_residual == 0


def test_e8_constant():
    result = oracle("E8")
    assert result.c == 240
    assert result.proportionality_residual == 0
    assert result.verdict == MISMATCH
    assert result.table_value == 320


def test_coupling_trace():
    assert coupling_tensor(rs("B2")).trace() == 8
    assert coupling_tensor(rs("A2")).trace() == 12
    assert coupling_tensor(rs("C2")).trace() == 8 * coupling_tensor(rs("B2")).trace()


def test_canonical_form_entries():
    form = canonical_form(np.eye(2, dtype=int).astype(object))
    assert form[0, 1, 0, 1] == 1
    assert form[0, 1, 1, 0] == -1
    assert form[0, 0, 1, 1] == 0


def test_rank_one_is_degenerate():
    system = rs("A1")
    with pytest.raises(DegenerateRank):
        extract_canonical_constant(coupling_tensor(system), system.projector)
    verdict, result = table_audit(system)
    assert result is None
    assert verdict.c_oracle is None
    assert verdict.verdict == NO_TABLE_ENTRY


@pytest.mark.parametrize(
    "label, table, verdict",
    [
        ("B4", 20, MATCH),
        ("C5", 56, MATCH),
        ("D6", 32, MATCH),
        ("E7", 96, MATCH),
        ("F4", 30, MATCH),
        ("A2", 8, MISMATCH),
        ("E6", 6, MISMATCH),
        ("G2", None, NO_TABLE_ENTRY),
    ],
)
def test_table_audit(label, table, verdict):
    audit, _ = table_audit(rs(label))
    assert audit.c_table == table
    assert audit.verdict == verdict
    assert audit.finding == (verdict == MISMATCH)


def test_d3_a3_cross_constraint():
    d3, _ = table_audit(rs("D3"))
    a3, _ = table_audit(rs("A3"))
    assert d3.c_oracle == a3.c_oracle == 8
    assert d3.verdict == MATCH
    assert a3.verdict == MISMATCH
    assert a3.c_table == 10


def test_table_compare_without_c():
    verdict = table_compare(RootSystemSpec("B", 3), None)
    assert verdict.c_table == 12
    assert verdict.verdict == NO_TABLE_ENTRY


def test_weighted_tensor_skips_table():
    system = rs("B2")
    result = extract_canonical_constant(coupling_tensor(system, {"short": 2, "long": 3}), system.projector)
    assert result.c == 24
    assert result.proportionality_residual == 0
    assert result.verdict == NO_TABLE_ENTRY


@pytest.mark.parametrize("label", [spec.label for spec in table_systems()])
def test_full_sum_vanishes(label):
    assert np.all(parity_erratum_check(rs(label)) == 0)


def test_multiplicity_polynomial_b2():
    poly = multiplicity_polynomial(rs("B2"))
    assert poly.coefficients == {
        ("short", "short"): 0,
        ("short", "long"): 4,
        ("long", "long"): 0,
    }
    assert all(r == 0 for r in poly.residuals.values())
    assert poly.evaluate({"short": 2, "long": 3}) == 24
    assert poly.evaluate() == 4


def test_multiplicity_polynomial_g2():
    poly = multiplicity_polynomial(rs("G2"))
    assert poly.coefficients == {
        ("short", "short"): 6,
        ("short", "long"): 72,
        ("long", "long"): 162,
    }
    assert poly.evaluate() == 240


def test_multiplicity_polynomial_simply_laced():
    poly = multiplicity_polynomial(rs("D4"))
    assert poly.coefficients == {("single", "single"): 16}
    assert poly.evaluate({"single": Fraction(1, 2)}) == 4


def test_weyl_vector_a2():
    assert weyl_vector(rs("A2")) == as_vector((1, 0, -1))


@pytest.mark.parametrize(
    "label, c",
    [(f"A{n}", 2 * (n + 1)) for n in range(2, 7)]
    + [(f"D{n}", 8 * (n - 2)) for n in range(3, 7)]
    + [("E6", 48), ("E7", 96), ("E8", 240)],
)
def test_simply_laced_closed_form(label, c):
    assert simply_laced_constant(rs(label)) == c


def test_simply_laced_closed_form_rejects_two_lengths():
    with pytest.raises(ValueError):
        simply_laced_constant(rs("B2"))


@pytest.mark.parametrize("label", ["B2", "G2", "A3", "C3", "F4"])
def test_coupling_tensor_weyl_invariant(label):
    system = rs(label)
    tensor = coupling_tensor(system)
    reflections = system.positive_roots[:4]
    assert len(reflections) >= 3
    for alpha in reflections:
        moved = transform_tensor(tensor.entries, reflection_matrix(alpha))
        assert tensor.equals(moved)


def weyl_image(system, word):
    """Simple roots of the positive system w(R+) for w = s_{word[0]} ... s_{word[-1]}."""
    simple = list(system.simple_roots)
    for index in reversed(word):
        alpha = system.simple_roots[index]
        simple = [reflect_vector(alpha, s) for s in simple]
    return simple


@pytest.mark.parametrize("label", ["B2", "G2", "A3", "C3", "F4"])
def test_positive_system_independence(label):
    system = rs(label)
    base = coupling_tensor(system)
    rng = np.random.default_rng(11)
    for _ in range(2):
        word = rng.integers(0, system.rank, size=6).tolist()
        positive, negative = positive_partition(system.roots, weyl_image(system, word))
        assert len(positive) == len(negative)
        moved = coupling_tensor(system, positive_roots=positive)
        assert base.equals(moved.entries)


def test_coupling_tensor_rejects_non_positive_system():
    system = rs("B2")
    with pytest.raises(ValueError):
        coupling_tensor(system, positive_roots=system.roots)
    with pytest.raises(ValueError):
        coupling_tensor(system, positive_roots=system.positive_roots[:-1])


def test_transform_tensor_detects_non_symmetry():
    tensor = coupling_tensor(rs("B2"))
    scale = np.array([[Fraction(2), Fraction(0)], [Fraction(0), Fraction(1)]], dtype=object)
    assert not tensor.equals(transform_tensor(tensor.entries, scale))

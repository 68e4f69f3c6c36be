import numpy as np
import pytest

from classmix.characters import (
    CharacterTable,
    ZetaTrendRow,
    dixon_character_table,
    structure_constants,
    verify_orthogonality,
    witten_zeta,
    zeta_trend,
)
from classmix.groups import GroupSpec, conj_classes, group_build


def _rebuild(label, group_cache):
    return group_cache(label)


def test_s3_transposition_squared_count(group_cache):
    table, classes, constants, _ = group_cache("S:3")
    # the transposition class has size 3; squaring it hits the identity 3 ways
    tc = classes.sizes.index(3)
    assert constants.tensor[tc, tc, 0] == 3


def test_identity_row_is_kronecker(group_cache):
    for label in ["S:3", "A:5", "PSL2:7"]:
        _, classes, constants, _ = group_cache(label)
        k = classes.k
        assert np.array_equal(constants.tensor[0], np.eye(k, dtype=np.int64))


def test_structure_constant_row_sums(group_cache):
    table, classes, constants, _ = group_cache("A:5")
    sizes = np.asarray(classes.sizes)
    for i in range(classes.k):
        for j in range(classes.k):
            assert int(constants.tensor[i, j] @ sizes) == classes.sizes[i] * classes.sizes[j]


def test_structure_constants_nonnegative(group_cache):
    for label in ["S:4", "PSL2:7"]:
        _, _, constants, _ = group_cache(label)
        assert constants.tensor.min() >= 0


def test_dixon_degree_multisets(group_cache):
    _, _, _, t5 = group_cache("A:5")
    assert sorted(t5.degrees) == [1, 3, 3, 4, 5]
    _, _, _, t7 = group_cache("PSL2:7")
    assert sorted(t7.degrees) == [1, 3, 3, 6, 7, 8]


def test_degree_squares_sum_to_order(group_cache):
    for label in ["S:3", "S:4", "A:5", "A:6", "A:7", "PSL2:7", "PSL2:11", "PSL2:13", "SL2:5"]:
        table, _, _, chartable = group_cache(label)
        assert sum(d * d for d in chartable.degrees) == table.order


def test_trivial_character_row_first(group_cache):
    for label in ["S:4", "A:6", "PSL2:11"]:
        _, _, _, chartable = group_cache(label)
        assert np.allclose(chartable.values[0], 1.0, atol=0)


def test_identity_column_equals_degrees(group_cache):
    for label in ["A:5", "PSL2:7", "SL2:5"]:
        _, _, _, chartable = group_cache(label)
        col = chartable.values[:, 0]
        assert np.abs(col.imag).max() < 1e-10
        assert np.array_equal(col.real.astype(int), np.array(chartable.degrees))


def test_degrees_divide_order(group_cache):
    for label in ["S:4", "A:5", "A:6", "A:7", "PSL2:7", "PSL2:11", "SL2:5"]:
        table, _, _, chartable = group_cache(label)
        for d in chartable.degrees:
            assert table.order % d == 0


def test_orthogonality_residuals(group_cache):
    for label in ["S:3", "S:4", "A:5", "A:6", "A:7", "PSL2:7", "PSL2:11", "PSL2:13"]:
        table, classes, _, chartable = group_cache(label)
        report = verify_orthogonality(chartable, classes)
        assert report.passed
        assert report.max_row_residual < 1e-8 * table.order
        assert report.max_col_residual < 1e-8 * table.order


def test_perturbed_table_fails_orthogonality(group_cache):
    _, classes, _, chartable = group_cache("A:5")
    values = chartable.values.copy()
    values[1, 1] += 1e-3
    broken = CharacterTable(
        values=values,
        degrees=chartable.degrees,
        class_sizes=chartable.class_sizes,
        order=chartable.order,
        modulus_prime=chartable.modulus_prime,
        row_residual=0.0,
        col_residual=0.0,
    )
    assert not verify_orthogonality(broken, classes).passed


def test_trivial_group_residual_zero():
    table = group_build(GroupSpec.from_perm_generators([tuple(range(3))]))
    classes = conj_classes(table)
    chartable = dixon_character_table(classes, structure_constants(table, classes))
    assert chartable.degrees == (1,)
    assert chartable.row_residual == 0.0
    assert chartable.col_residual == 0.0


def test_second_orthogonality_identity_column(group_cache):
    for label in ["A:5", "PSL2:7"]:
        table, _, _, chartable = group_cache(label)
        col = chartable.values[:, 0]
        total = float(np.abs(col) @ np.abs(col))
        assert abs(total - table.order) < 1e-8


def test_dixon_bit_identical_across_runs():
    spec = GroupSpec.alt(5)
    tables = []
    for _ in range(2):
        table = group_build(spec)
        classes = conj_classes(table)
        tables.append(dixon_character_table(classes, structure_constants(table, classes)))
    a, b = tables
    assert a.degrees == b.degrees
    assert np.array_equal(a.values, b.values)  # exact float equality
    assert a.to_json("A:5") == b.to_json("A:5")


# -- zeta ---------------------------------------------------------------------


def test_zeta_special_values(group_cache):
    for label in ["S:3", "S:4", "A:5", "A:6", "PSL2:7", "SL2:5"]:
        table, classes, _, chartable = group_cache(label)
        assert witten_zeta(chartable, 0) == classes.k
        assert abs(witten_zeta(chartable, -2) - table.order) < 1e-6 * table.order


def test_zeta_a5_at_2(group_cache):
    _, _, _, chartable = group_cache("A:5")
    assert abs(witten_zeta(chartable, 2) - 4769 / 3600) < 1e-12


def test_zeta_strictly_decreasing(group_cache):
    for label in ["A:5", "PSL2:7", "S:4"]:
        _, _, _, chartable = group_cache(label)
        values = [witten_zeta(chartable, s) for s in (-1.0, 0.0, 0.5, 1.0, 2.0, 3.0)]
        assert all(a > b for a, b in zip(values, values[1:]))


def test_zeta_trend_single_row(group_cache):
    _, _, _, chartable = group_cache("A:5")
    rows = zeta_trend([("A:5", chartable, 5)], s=1.0)
    assert len(rows) == 1
    assert isinstance(rows[0], ZetaTrendRow)
    assert rows[0].normalized_excess == pytest.approx((witten_zeta(chartable, 1) - 1) * 5.0)


def test_zeta_trend_alternating_bounded(group_cache):
    rows = []
    for n in (5, 6, 7, 8, 9):
        _, _, _, chartable = group_cache(f"A:{n}")
        rows.extend(zeta_trend([(f"A:{n}", chartable, n)], s=1.0))
    excesses = [r.normalized_excess for r in rows]
    assert max(excesses) / min(excesses) < 8.0


def test_zeta_trend_psl2_bounded(group_cache):
    # golden envelope from the first exact run: excesses stay within [8, 15]
    rows = []
    for q in (5, 7, 9, 11, 13):
        _, _, _, chartable = group_cache(f"PSL2:{q}")
        rows.extend(zeta_trend([(f"PSL2:{q}", chartable, q)], s=2.0))
    excesses = [r.normalized_excess for r in rows]
    assert max(excesses) < 16.0
    assert min(excesses) > 0.0
    assert max(excesses) / min(excesses) < 2.0


def test_character_table_json_roundtrip(group_cache):
    import json

    _, _, _, chartable = group_cache("A:5")
    payload = json.loads(chartable.to_json("A:5"))
    assert payload["order"] == 60
    assert payload["degrees"] == [1, 3, 3, 4, 5]
    assert payload["schema"] == 1
    values = np.array([[complex(re, im) for re, im in row] for row in payload["values"]])
    assert np.array_equal(values, chartable.values)

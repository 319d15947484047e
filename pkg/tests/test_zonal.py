import math
from fractions import Fraction

import numpy as np
import pytest

from matargs.backend.tools.linalg import SymMatrix
from matargs.backend.tools.misc import DomainError
from matargs.backend.tools.partitions import EMPTY, Partition, dominates, enumerate_partitions, kappa_star
from matargs.backend.tools.randmat import RngStream, random_spd
from matargs.backend.tools.symfun import first_power_sum_power
from matargs.backend.tools.zonal import (
    at_identity,
    build_table,
    build_table_recursive,
    cached_table,
    compare_tables,
    d_kappa,
    dual_identity_residual,
    eigen_operator_residual,
    eval_eigs,
    eval_eigs_batch,
    eval_eigs_exact,
    eval_matrix,
    s_kappa_kappastar,
    table_to_csv,
    table_to_json,
)


def P(*parts):
    return Partition(parts)


@pytest.fixture(scope="module")
def table():
    return cached_table(6)


def test_degree_two_table(table):
    assert table.poly(P(1)).coeffs == {P(1): 1}
    assert table.poly(P(2)).coeffs == {P(2): 1, P(1, 1): Fraction(2, 3)}
    assert table.poly(P(1, 1)).coeffs == {P(1, 1): Fraction(4, 3)}
    assert table.poly(EMPTY).coeffs == {EMPTY: 1}


def test_normalization_and_triangularity(table):
    for k in range(1, 7):
        total = None
        for kappa in enumerate_partitions(k):
            poly = table.poly(kappa)
            total = poly if total is None else total + poly
            assert d_kappa(table, kappa) > 0
            for lam in poly.coeffs:
                assert dominates(kappa, lam), (kappa, lam)
        assert total == first_power_sum_power(k)


def test_leading_coefficients(table):
    assert d_kappa(table, P(1)) == 1
    assert d_kappa(table, P(2)) == 1
    assert d_kappa(table, P(1, 1)) == Fraction(4, 3)
    assert d_kappa(table, P(3)) == 1


def test_missing_partition_raises(table):
    with pytest.raises(DomainError):
        table.poly(P(7))
    with pytest.raises(DomainError):
        build_table(0)


def test_recursion_matches_gram_schmidt():
    assert compare_tables(build_table(5), build_table_recursive(5)) == []
    assert compare_tables(build_table(4), build_table(4, method="recursive")) == []


def test_eval_examples(table):
    assert eval_eigs(table, P(1), [1.0, 2.5, 4.0]) == pytest.approx(7.5)
    assert eval_eigs(table, P(2), [1, 1]) == pytest.approx(8 / 3, rel=1e-15)
    assert eval_eigs(table, P(1, 1), [1, 1]) == pytest.approx(4 / 3, rel=1e-15)
    assert eval_eigs_exact(table, P(1, 1, 1), [Fraction(3), Fraction(-2)]) == 0
    assert at_identity(table, P(2), 2) + at_identity(table, P(1, 1), 2) == 4


def test_normalization_at_random_points(table):
    rng = np.random.default_rng(7)
    for _ in range(20):
        x = rng.normal(size=int(rng.integers(1, 6))).tolist()
        for k in range(1, 7):
            total = math.fsum(eval_eigs(table, kappa, x) for kappa in enumerate_partitions(k))
            assert abs(total - sum(x) ** k) <= 1e-10 * sum(abs(v) for v in x) ** k


def test_vanishing_with_too_few_variables(table):
    for kappa in enumerate_partitions(4):
        if kappa.length > 2:
            assert eval_eigs_exact(table, kappa, [Fraction(2), Fraction(7)]) == 0


def test_batch_matches_scalar(table):
    eigs = np.array([[0.5, 2.0, 3.0], [1.0, -0.5, 0.25]])
    for kappa in enumerate_partitions(3):
        batch = eval_eigs_batch(table, kappa, eigs)
        for row, value in zip(eigs, batch):
            assert value == pytest.approx(eval_eigs(table, kappa, row), rel=1e-12, abs=1e-14)


def test_eval_matrix(table):
    a = SymMatrix([[2.0, 0.5], [0.5, 1.0]])
    assert eval_matrix(table, P(1), a) == pytest.approx(3.0, rel=1e-14)
    assert eval_matrix(table, P(2), SymMatrix.identity(2)) == pytest.approx(8 / 3, rel=1e-14)
    rng = RngStream(11)
    for _ in range(5):
        a = random_spd(rng, 3)
        for kappa in enumerate_partitions(3, 3) + enumerate_partitions(2, 3):
            sign = (-1) ** kappa.weight
            assert eval_matrix(table, kappa, -a) == pytest.approx(sign * eval_matrix(table, kappa, a), rel=1e-12)


def test_s_kappa_kappastar(table):
    assert s_kappa_kappastar(table, P(1), 1, 1) == 1
    assert s_kappa_kappastar(table, P(1), 1, 2) == 1
    expected = float(at_identity(table, P(2, 1), 2) / at_identity(table, P(1), 2))
    assert s_kappa_kappastar(table, P(2, 1), 2, 2) == pytest.approx(expected)


def test_dual_identity_examples(table):
    assert dual_identity_residual(table, P(1), 1, SymMatrix([[3.0]])) == pytest.approx(0, abs=1e-14)
    assert dual_identity_residual(table, P(1), 1, SymMatrix.diag([2.0, 3.0])) == pytest.approx(0, abs=1e-13)


@pytest.mark.parametrize("m", [2, 3])
def test_dual_identity_random(table, m):
    rng = RngStream(5, m)
    for _ in range(50):
        a = random_spd(rng, m)
        for k in range(1, 4):
            for kappa in enumerate_partitions(k, m):
                n = kappa[0]
                star = kappa_star(kappa, n, m)
                rhs = eval_matrix(table, star, a) / float(at_identity(table, star, m))
                residual = dual_identity_residual(table, kappa, n, a)
                assert abs(residual) <= 1e-8 * max(abs(rhs), 1.0)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_eigen_operator(table, k):
    for kappa in enumerate_partitions(k):
        assert eigen_operator_residual(table, kappa) == 0
        assert eigen_operator_residual(table, kappa, max(kappa.length, 2) + 1) == 0


def test_eigen_operator_detects_wrong_polynomial(table):
    # m_(2) alone is not an eigenfunction
    broken = build_table(2)
    broken.polys[P(2)] = broken.polys[P(2)] - broken.polys[P(1, 1)].scale(Fraction(1, 2))
    assert eigen_operator_residual(broken, P(2)) != 0


def test_exports(table):
    small = cached_table(2)
    payload = table_to_json(small)
    assert list(payload) == ["1", "2"]
    assert payload["2"][0] == {
        "kappa": "2",
        "coeffs": [
            {"lambda": "2", "num": "1", "den": "1"},
            {"lambda": "1,1", "num": "2", "den": "3"},
        ],
    }
    lines = table_to_csv(small).splitlines()
    assert lines[0] == "kappa,lambda,numerator,denominator"
    assert '2,"1,1",2,3' in lines
    assert '"1,1","1,1",4,3' in lines

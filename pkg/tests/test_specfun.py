import math

import numpy as np
import pytest
from scipy.special import gamma

from matargs.backend.tools.misc import DomainError
from matargs.backend.tools.partitions import EMPTY, Partition, enumerate_partitions
from matargs.backend.tools.specfun import (
    ASCENDING,
    CORRECTED,
    DESCENDING,
    MUIRHEAD_INCORRECT,
    check_convergence,
    gen_pochhammer,
    multivariate_gamma,
    neg_pochhammer_identity_residual,
    pochhammer_falling,
    pochhammer_rising,
    reindex_product_residuals,
    theorem1_constant,
    theorem1_factor,
    theorem1_log_constant,
    variants_coincide,
)


def P(*parts):
    return Partition(parts)


def test_pochhammer_examples():
    assert pochhammer_rising(3, 4) == 360
    assert pochhammer_rising(2.7, 0) == 1
    assert pochhammer_rising(1, 6) == math.factorial(6)
    assert pochhammer_falling(5, 2) == 20
    assert pochhammer_falling(-1.3, 0) == 1
    assert pochhammer_falling(6, 6) == math.factorial(6)
    with pytest.raises(DomainError):
        pochhammer_rising(1.0, -1)


def test_pochhammer_gamma_ratio():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        x = float(rng.uniform(0.05, 20.0))
        q = int(rng.integers(0, 11))
        assert pochhammer_rising(x, q) == pytest.approx(gamma(x + q) / gamma(x), rel=1e-12)


def test_negative_argument_identity():
    assert neg_pochhammer_identity_residual(3, 2) == 0
    assert neg_pochhammer_identity_residual(1.7, 0) == 0
    assert abs(neg_pochhammer_identity_residual(2.5, 3)) <= 1e-12 * abs(pochhammer_rising(-2.5, 3))
    rng = np.random.default_rng(2)
    for _ in range(1000):
        x = float(rng.uniform(-10.0, 10.0))
        q = int(rng.integers(0, 11))
        # rounding error scales with the factor magnitudes, not with the product
        scale = math.prod(abs(x) + i for i in range(q))
        assert abs(neg_pochhammer_identity_residual(x, q)) <= 1e-12 * max(scale, 1.0)


def test_reindexing():
    assert reindex_product_residuals(lambda v: v, 1.25, 3, [0, 1, 2]) == (0, 0)
    assert reindex_product_residuals(math.exp, 0.7, 1, [3]) == (0, 0)
    first, second = reindex_product_residuals(math.exp, 0.3, 4, [2, 1, 1, 0])
    scale = math.exp(0.3 * 4 + 6)
    assert abs(first) <= 1e-12 * scale
    assert abs(second) <= 1e-12 * scale
    rng = np.random.default_rng(3)
    for _ in range(1000):
        x = float(rng.uniform(-3.0, 3.0))
        q = int(rng.integers(1, 8))
        shifts = [int(s) for s in rng.integers(0, 5, size=q)]
        for sign in (1, -1):
            first, second = reindex_product_residuals(math.cos, x, q, shifts, sign)
            assert abs(first) <= 1e-12
            assert abs(second) <= 1e-12


def test_reindexing_rejects_bad_shifts():
    with pytest.raises(DomainError):
        reindex_product_residuals(math.exp, 0.0, 2, [1])
    with pytest.raises(DomainError):
        reindex_product_residuals(math.exp, 0.0, 2, [1, -1])


def test_multivariate_gamma_examples():
    assert multivariate_gamma(2.3, 1) == pytest.approx(gamma(2.3), rel=1e-14)
    assert multivariate_gamma(3, 2) == pytest.approx(1.5 * math.pi, rel=1e-14)
    assert multivariate_gamma(2.7, 3, DESCENDING) == pytest.approx(multivariate_gamma(2.7, 3, ASCENDING), rel=1e-13)
    assert multivariate_gamma(3, 2, log=True) == pytest.approx(math.log(1.5 * math.pi), rel=1e-14)


@pytest.mark.parametrize("m", range(1, 7))
def test_multivariate_gamma_forms_agree(m):
    for a in np.linspace((m - 1) / 2 + 0.05, (m - 1) / 2 + 12.0, 20):
        asc = multivariate_gamma(a, m, ASCENDING)
        desc = multivariate_gamma(a, m, DESCENDING)
        assert desc == pytest.approx(asc, rel=1e-13)


def test_multivariate_gamma_domain():
    with pytest.raises(DomainError):
        multivariate_gamma(0.5, 2)
    with pytest.raises(DomainError):
        multivariate_gamma(2.0, 0)
    with pytest.raises(DomainError):
        multivariate_gamma(2.0, 2, form="sideways")


def test_gen_pochhammer():
    assert gen_pochhammer(1.7, EMPTY, 3) == 1
    assert gen_pochhammer(3, P(2, 1), 2) == 30
    assert gen_pochhammer(-3 + 1.5, P(1), 2) == -1.5
    for q in range(6):
        assert gen_pochhammer(2.25, P(q), 1) == pochhammer_rising(2.25, q)


def test_theorem1_constant_examples():
    assert theorem1_constant(3, 2, P(1)) == pytest.approx(math.pi, rel=1e-14)
    corrected = theorem1_factor(4, 2, P(2), CORRECTED)
    incorrect = theorem1_factor(4, 2, P(2), MUIRHEAD_INCORRECT)
    assert corrected == pytest.approx(1 / 3.75, rel=1e-15)
    assert incorrect == pytest.approx(1 / 6, rel=1e-15)
    assert corrected / incorrect == pytest.approx(1.6, rel=1e-14)


def test_variants_coincide_on_m2():
    for k in range(1, 5):
        for kappa in enumerate_partitions(k, 2):
            a = kappa[0] + 0.5 + 1.5
            same = theorem1_factor(a, 2, kappa, CORRECTED) == pytest.approx(
                theorem1_factor(a, 2, kappa, MUIRHEAD_INCORRECT), rel=1e-14
            )
            assert variants_coincide(2, kappa) == (kappa[0] == kappa[1])
            assert same == (kappa[0] == kappa[1])


def test_variants_coincide_for_scalars():
    for q in range(5):
        assert variants_coincide(1, P(q))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_gamma_form_matches_pochhammer_form(m):
    for k in range(0, 4):
        for kappa in enumerate_partitions(k, m):
            for a in (kappa[0] + (m - 1) / 2 + 0.3, kappa[0] + (m - 1) / 2 + 1.5, 9.25):
                for variant in (CORRECTED, MUIRHEAD_INCORRECT):
                    pochhammer = theorem1_constant(a, m, kappa, variant)
                    gamma_form = theorem1_constant(a, m, kappa, variant, form="gamma")
                    assert gamma_form == pytest.approx(pochhammer, rel=1e-12)


def test_log_constant_matches():
    sign, log_abs = theorem1_log_constant(4, 2, P(2))
    assert sign * math.exp(log_abs) == pytest.approx(theorem1_constant(4, 2, P(2)), rel=1e-13)
    sign, log_abs = theorem1_log_constant(3, 2, P(1))
    assert sign == 1
    assert log_abs == pytest.approx(math.log(math.pi), rel=1e-13)


def test_large_constants_stay_finite():
    value = theorem1_constant(60.0, 2, P(2, 1))
    sign, log_abs = theorem1_log_constant(60.0, 2, P(2, 1))
    assert 300 < log_abs < 709
    assert value == pytest.approx(sign * math.exp(log_abs), rel=1e-12)


def test_convergence_precondition():
    with pytest.raises(DomainError, match=r"requires a > k_1 \+ \(m-1\)/2"):
        check_convergence(2.5, 2, P(2))
    with pytest.raises(DomainError):
        theorem1_constant(2.0, 2, P(2))
    with pytest.raises(DomainError):
        theorem1_constant(5.0, 1, P(1, 1))
    with pytest.raises(DomainError):
        theorem1_constant(5.0, 2, P(1), variant="other")

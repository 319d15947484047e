import json
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field
from scipy import stats
from scipy.special import roots_genlaguerre, roots_hermite

from .logic import DEFAULT_CHUNK_SIZE, ChunkMoments, handle_batch_parallel, mc_accumulate
from .tools.linalg import (
    SPDMatrix,
    SymMatrix,
    cholesky,
    elementary_symmetric,
    inverse,
    leading_principal_minor,
    product_eigs,
)
from .tools.misc import DomainError
from .tools.partitions import Partition, conjugate, dominates, enumerate_partitions, kappa_star, partition_count
from .tools.randmat import (
    DEFAULT_SEED,
    RngStream,
    WishartSpec,
    bartlett_factors,
    gamma_variates,
    random_spd,
    wishart_batch,
)
from .tools.specfun import (
    ASCENDING,
    CORRECTED,
    DESCENDING,
    MUIRHEAD_INCORRECT,
    GammaParams,
    check_convergence,
    gen_pochhammer,
    multivariate_gamma,
    neg_pochhammer_identity_residual,
    pochhammer_rising,
    reindex_product_residuals,
    theorem1_factor,
    variants_coincide,
)
from .tools.symfun import (
    SymPoly,
    first_power_sum_power,
    from_power_sum_basis,
    inner_product_alpha2,
    to_power_sum_basis,
    transition_matrices,
)
from .tools.zonal import (
    ZonalTable,
    at_identity,
    build_table_recursive,
    cached_table,
    compare_tables,
    d_kappa,
    dual_identity_residual,
    eigen_operator_residual,
    eval_eigs,
    eval_eigs_batch,
    eval_matrix,
)

logger = logging.getLogger(__name__)

Z_PASS = 4.0
Z_REJECT = 10.0
LEMMA2_TOL = 1e-8
GAMMA_QUAD_TOL = 1e-6
DEFAULT_QUAD_POINTS = 64

Verdict = Literal["pass", "fail", "inconclusive"]


class MCReport(BaseModel):
    claim: Literal["theorem1", "corollary1"]
    m: int
    a: float
    kappa: str
    estimate: float
    stderr: float = Field(ge=0)
    expected_correct: float
    expected_incorrect: float | None = None
    z_correct: float | None = None
    z_incorrect: float | None = None
    n_samples: int
    seed: int
    verdict: Verdict
    chunk_size: int
    z_pass: float
    z_reject: float
    variance_finite: bool
    matrices: dict[str, str]


class CoeffReport(BaseModel):
    claim: Literal["lemma2"] = "lemma2"
    m: int
    kappa: str
    grid_size: int
    exponents: list[int]
    extracted: float
    predicted: float
    relative_error: float
    control_exponents: list[int]
    control_coefficient: float
    control_relative_gap: float | None = None
    control_status: Literal["mismatch", "match", "degenerate"]
    verdict: Literal["pass", "fail"]


class GammaQuadReport(BaseModel):
    claim: Literal["gamma_integral"] = "gamma_integral"
    m: int
    a: float
    quad_points: int
    quadrature: float
    ascending: float
    descending: float
    relative_error_ascending: float
    relative_error_descending: float
    verdict: Literal["pass", "fail"]

    def as_pair(self) -> tuple[float, float]:
        return self.quadrature, self.ascending


class SelftestCheck(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class SelftestReport(BaseModel):
    claim: Literal["selftest"] = "selftest"
    checks: list[SelftestCheck]
    verdict: Literal["pass", "fail"]


def describe_matrix(a: SymMatrix) -> str:
    return json.dumps(a.data.tolist())


def relative_error(value: float, reference: float) -> float:
    return abs(value - reference) / max(abs(reference), 1e-300)


def variance_finite(a: float, m: int, kappa: Partition) -> bool:
    """C_kappa(X^-1)^2 is integrable iff the integral for 2 kappa converges."""
    return a > 2 * kappa[0] + (m - 1) / 2


def decide(z_correct: float | None, z_incorrect: float | None, z_pass: float, z_reject: float) -> Verdict:
    """
    pass: |z_correct| <= z_pass and, when the variants differ, |z_incorrect| >= z_reject.
    fail: |z_correct| > z_pass. Everything else, including zero variance, is inconclusive.
    """

    if z_correct is None:
        return "inconclusive"
    if abs(z_correct) > z_pass:
        return "fail"
    if z_incorrect is not None and abs(z_incorrect) < z_reject:
        return "inconclusive"
    return "pass"


@dataclass(frozen=True, eq=False)
class LaplaceTask:
    """Everything a worker process needs to sample C_kappa(T X^-1)."""

    m: int
    a: float
    kappa: Partition
    max_degree: int
    sigma: np.ndarray
    sigma_factor: np.ndarray
    t: np.ndarray


def laplace_chunk(task: LaplaceTask, seed: int, stream: int, size: int) -> ChunkMoments:
    rng = RngStream(seed, stream)
    spec = WishartSpec(task.m, 2 * task.a, SPDMatrix(task.sigma, task.sigma_factor))
    # X = F F' with F the Bartlett factor, so T X^-1 is similar to F^-1 T F^-T
    lower_inv = np.linalg.inv(bartlett_factors(rng, spec, size))
    sandwich = lower_inv @ task.t @ np.swapaxes(lower_inv, -1, -2)
    eigs = np.linalg.eigvalsh(0.5 * (sandwich + np.swapaxes(sandwich, -1, -2)))
    values = eval_eigs_batch(cached_table(task.max_degree), task.kappa, eigs)
    return ChunkMoments.from_values(values)


def laplace_expectations(
    m: int, a: float, kappa: Partition, v: SymMatrix, t: SymMatrix
) -> tuple[float, float | None]:
    """
    E[C_kappa(T X^-1)] for X ~ Wishart(2a, (2V)^-1) under the corrected constant
    and under the incorrect one; the second is None when both constants coincide.

    :param m: Dimension.
    :type m: int
    :param a: Argument with a > k_1 + (m-1)/2.
    :type a: float
    :param kappa: The partition.
    :type kappa: Partition
    :param v: Positive definite V.
    :type v: SymMatrix
    :param t: Symmetric T.
    :type t: SymMatrix
    :return: (expected_correct, expected_incorrect or None).
    :rtype: tuple
    """

    check_convergence(a, m, kappa)
    v = cholesky(v)
    if v.m != m or t.m != m:
        raise DomainError(f"matrices must be {m}x{m}, got V {v.m}x{v.m} and T {t.m}x{t.m}")
    c_vt = eval_eigs(cached_table(max(kappa.weight, 1)), kappa, product_eigs(v, t))
    expected_correct = theorem1_factor(a, m, kappa, CORRECTED) * c_vt
    if variants_coincide(m, kappa):
        return expected_correct, None
    return expected_correct, theorem1_factor(a, m, kappa, MUIRHEAD_INCORRECT) * c_vt


def _laplace_report(
    claim: str,
    m: int,
    a: float,
    kappa: Partition,
    v: SymMatrix,
    t: SymMatrix,
    n_samples: int,
    seed: int,
    chunk_size: int,
    z_pass: float,
    z_reject: float,
    matrices: dict[str, str],
    progress=None,
    workers: int | None = None,
) -> MCReport:
    expected_correct, expected_incorrect = laplace_expectations(m, a, kappa, v, t)
    if n_samples < 2:
        raise DomainError(f"requires n_samples >= 2, got {n_samples}")
    finite = variance_finite(a, m, kappa)
    if not finite:
        logger.warning(
            "a=%s <= 2 k_1 + (m-1)/2: the estimator has infinite variance, z-scores are unreliable", a
        )

    sigma = cholesky(inverse(cholesky(SymMatrix(2.0 * v.data))))
    task = LaplaceTask(
        m=m,
        a=a,
        kappa=kappa,
        max_degree=max(kappa.weight, 1),
        sigma=np.array(sigma.data),
        sigma_factor=np.array(sigma.factor),
        t=np.array(t.data),
    )
    chunks = handle_batch_parallel(
        laplace_chunk, task, n_samples, seed, chunk_size, progress=progress, workers=workers
    )
    estimate, stderr = mc_accumulate(chunks)

    z_correct = (estimate - expected_correct) / stderr if stderr > 0 else None
    z_incorrect = None
    if expected_incorrect is not None and stderr > 0:
        z_incorrect = (estimate - expected_incorrect) / stderr

    return MCReport(
        claim=claim,
        m=m,
        a=a,
        kappa=str(kappa),
        estimate=estimate,
        stderr=stderr,
        expected_correct=expected_correct,
        expected_incorrect=expected_incorrect,
        z_correct=z_correct,
        z_incorrect=z_incorrect,
        n_samples=n_samples,
        seed=seed,
        verdict=decide(z_correct, z_incorrect, z_pass, z_reject),
        chunk_size=chunk_size,
        z_pass=z_pass,
        z_reject=z_reject,
        variance_finite=finite,
        matrices=matrices,
    )


def verify_theorem1(
    m: int,
    a: float,
    kappa: Partition,
    z: SymMatrix,
    n_samples: int,
    seed: int = DEFAULT_SEED,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    z_pass: float = Z_PASS,
    z_reject: float = Z_REJECT,
    progress=None,
    workers: int | None = None,
    label: str | None = None,
) -> MCReport:
    """
    Monte Carlo check of E[C_kappa(X^-1)] = (-1)^k C_kappa(Z) / (-a + (m+1)/2)_kappa
    under X ~ Wishart(2a, (2Z)^-1), which is the matrix Laplace integral of
    det(X)^(a-(m+1)/2) C_kappa(X^-1) divided by Gamma_m[a] det(Z)^-a.

    :param m: Dimension.
    :type m: int
    :param a: Argument with a > k_1 + (m-1)/2.
    :type a: float
    :param kappa: The partition.
    :type kappa: Partition
    :param z: Positive definite Z.
    :type z: SymMatrix
    :param n_samples: Number of Wishart draws.
    :type n_samples: int
    :param seed: The run seed.
    :type seed: int
    :param chunk_size: Draws per chunk; chunk i uses RNG stream i.
    :type chunk_size: int
    :param z_pass: Largest |z_correct| that passes.
    :type z_pass: float
    :param z_reject: Smallest |z_incorrect| that counts as a rejection.
    :type z_reject: float
    :param progress: Optional object with update(processed, total).
    :param workers: Process count, defaults to worker_count().
    :type workers: int
    :param label: Descriptor echoed in the report instead of the matrix entries.
    :type label: str
    :return: The report.
    :rtype: MCReport
    """

    return _laplace_report(
        "theorem1",
        m,
        a,
        kappa,
        z,
        SymMatrix.identity(m),
        n_samples,
        seed,
        chunk_size,
        z_pass,
        z_reject,
        {"Z": label or describe_matrix(z)},
        progress=progress,
        workers=workers,
    )


def verify_corollary1(
    m: int,
    a: float,
    kappa: Partition,
    v: SymMatrix,
    t: SymMatrix,
    n_samples: int,
    seed: int = DEFAULT_SEED,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    z_pass: float = Z_PASS,
    z_reject: float = Z_REJECT,
    progress=None,
    workers: int | None = None,
    labels: dict[str, str] | None = None,
) -> MCReport:
    """
    Monte Carlo check of E[C_kappa(T X^-1)] = (-1)^k C_kappa(VT) / (-a + (m+1)/2)_kappa
    under X ~ Wishart(2a, (2V)^-1), for any symmetric T. With T = I this is
    verify_theorem1 with Z = V, draw for draw.
    """

    labels = labels or {}
    return _laplace_report(
        "corollary1",
        m,
        a,
        kappa,
        v,
        t,
        n_samples,
        seed,
        chunk_size,
        z_pass,
        z_reject,
        {"V": labels.get("V") or describe_matrix(v), "T": labels.get("T") or describe_matrix(t)},
        progress=progress,
        workers=workers,
    )


def newton_to_monomial(values: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    """
    Coefficients c_0..c_{g-1} of the interpolating polynomial through
    (nodes, values), from Newton divided differences.

    :param values: g samples.
    :type values: np.ndarray
    :param nodes: g distinct nodes.
    :type nodes: np.ndarray
    :return: Monomial coefficients, lowest degree first.
    :rtype: np.ndarray
    """

    g = len(nodes)
    diffs = np.array(values, dtype=np.float64)
    for j in range(1, g):
        diffs[j:] = (diffs[j:] - diffs[j - 1 : -1]) / (nodes[j:] - nodes[: g - j])
    poly = np.polynomial.Polynomial([diffs[-1]])
    for j in range(g - 2, -1, -1):
        poly = poly * np.polynomial.Polynomial([-nodes[j], 1.0]) + diffs[j]
    coef = np.zeros(g)
    coef[: len(poly.coef)] = poly.coef
    return coef


def interpolate_coefficients(table: ZonalTable, kappa: Partition, y_inv: SPDMatrix, grid_size: int) -> np.ndarray:
    """
    Monomial coefficients of F(z) = C_kappa(Y^-1 diag(z)), recovered on the tensor
    grid {0, ..., grid_size - 1}^m one axis at a time. Entry [e_1, ..., e_m] is
    the coefficient of z_1^e_1 ... z_m^e_m.
    """

    m = y_inv.m
    nodes = np.arange(grid_size, dtype=np.float64)
    values = np.empty((grid_size,) * m)
    for index in product(range(grid_size), repeat=m):
        values[index] = eval_eigs(table, kappa, product_eigs(y_inv, SymMatrix.diag(index)))
    for axis in range(m):
        values = np.apply_along_axis(newton_to_monomial, axis, values, nodes)
    return values


def minor_product(y: SPDMatrix, kappa: Partition) -> float:
    """
    prod_j minor_j(Y)^(-e_j) over the exponent chain e_1 = k_m - k_{m-1},
    e_2 = k_{m-1} - k_{m-2}, ..., e_{m-1} = k_2 - k_1, e_m = k_1.
    """

    m = y.m
    parts = kappa.padded(m)
    out = 1.0
    for j in range(1, m + 1):
        upper = parts[m - j]
        lower = parts[m - j - 1] if m - j - 1 >= 0 else 0
        exponent = upper - lower
        if exponent:
            out *= leading_principal_minor(y, j) ** (-exponent)
    return out


def verify_lemma2(
    m: int,
    kappa: Partition,
    y: SymMatrix,
    grid_size: int | None = None,
    table: ZonalTable | None = None,
) -> CoeffReport:
    """
    Extracts the coefficient of z_1^{k_m} ... z_m^{k_1} in C_kappa(Y^-1 Z),
    Z = diag(z), and compares it with d_kappa times the leading-minor product.
    The coefficient of z_1^{k_1} ... z_m^{k_m} is reported next to it as a
    negative control.

    :param m: Dimension.
    :type m: int
    :param kappa: The partition, at most m parts.
    :type kappa: Partition
    :param y: Positive definite Y.
    :type y: SymMatrix
    :param grid_size: Nodes per axis, at least |kappa| + 1 (the default).
    :type grid_size: int
    :param table: Zonal table holding degree |kappa|.
    :type table: ZonalTable
    :return: The report.
    :rtype: CoeffReport
    """

    if kappa.length > m:
        raise DomainError(f"kappa={kappa} has more than m={m} parts")
    y = cholesky(y)
    if y.m != m:
        raise DomainError(f"Y is {y.m}x{y.m}, expected m={m}")
    k = kappa.weight
    table = table or cached_table(max(k, 1))
    if k > table.max_degree:
        raise DomainError(f"requires |kappa| <= K={table.max_degree}, got {k}")
    grid_size = grid_size if grid_size is not None else k + 1
    if grid_size < k + 1:
        raise DomainError(f"requires grid_size >= k + 1 = {k + 1}, got {grid_size}")

    coeffs = interpolate_coefficients(table, kappa, cholesky(inverse(y)), grid_size)
    target = tuple(reversed(kappa.padded(m)))
    control = kappa.padded(m)
    predicted = float(d_kappa(table, kappa)) * minor_product(y, kappa)
    extracted = float(coeffs[target])
    error = relative_error(extracted, predicted)

    control_coefficient = float(coeffs[control])
    if target == control:
        status, gap = "degenerate", None
    else:
        gap = relative_error(control_coefficient, predicted)
        status = "match" if gap <= LEMMA2_TOL else "mismatch"

    return CoeffReport(
        m=m,
        kappa=str(kappa),
        grid_size=grid_size,
        exponents=list(target),
        extracted=extracted,
        predicted=predicted,
        relative_error=error,
        control_exponents=list(control),
        control_coefficient=control_coefficient,
        control_relative_gap=gap,
        control_status=status,
        verdict="pass" if error <= LEMMA2_TOL else "fail",
    )


def verify_gamma_integral(m: int, a: float, quad_points: int = DEFAULT_QUAD_POINTS) -> GammaQuadReport:
    """
    Gamma_m[a] from its defining integral after the Cholesky substitution
    A = T'T: Gauss-Hermite for each off-diagonal t_ij, and for each diagonal entry
    a generalized Gauss-Laguerre rule in s = t_ii^2 whose weight carries the
    fractional part of the power of s.

    :param m: Dimension.
    :type m: int
    :param a: Argument, a > (m-1)/2.
    :type a: float
    :param quad_points: Nodes per one-dimensional rule.
    :type quad_points: int
    :return: The report, with both product forms for comparison.
    :rtype: GammaQuadReport
    """

    GammaParams(a, m).check()
    if quad_points < 1:
        raise DomainError(f"requires quad_points >= 1, got {quad_points}")

    _, hermite_weights = roots_hermite(quad_points)
    off_diagonal = math.fsum(hermite_weights)

    det_power = a - (m + 1) / 2
    diagonal = []
    for i in range(1, m + 1):
        power = det_power + (i - 1) / 2
        alpha = power - math.floor(power) if power >= 0 else power
        integer_power = round(power - alpha)
        nodes, weights = roots_genlaguerre(quad_points, alpha)
        diagonal.append(math.fsum(weights * nodes**integer_power))

    quadrature = off_diagonal ** (m * (m - 1) // 2) * math.prod(diagonal)
    ascending = multivariate_gamma(a, m, ASCENDING)
    descending = multivariate_gamma(a, m, DESCENDING)
    err_asc = relative_error(quadrature, ascending)
    err_desc = relative_error(quadrature, descending)
    return GammaQuadReport(
        m=m,
        a=a,
        quad_points=quad_points,
        quadrature=quadrature,
        ascending=ascending,
        descending=descending,
        relative_error_ascending=err_asc,
        relative_error_descending=err_desc,
        verdict="pass" if max(err_asc, err_desc) <= GAMMA_QUAD_TOL else "fail",
    )


def _check(checks: list[SelftestCheck], name: str, passed: bool, detail: str = "") -> None:
    checks.append(SelftestCheck(name=name, passed=bool(passed), detail=detail))
    logger.info("selftest %s: %s %s", name, "ok" if passed else "FAILED", detail)


def _partition_checks(checks: list[SelftestCheck]) -> None:
    counts = [len(enumerate_partitions(k)) for k in range(21)]
    _check(checks, "partition_counts", counts == [partition_count(k) for k in range(21)], "k <= 20")

    violations = 0
    for k in range(1, 9):
        parts = enumerate_partitions(k)
        for mu in parts:
            violations += not dominates(mu, mu)
            violations += conjugate(conjugate(mu)) != mu
            for lam in parts:
                above = dominates(mu, lam)
                violations += above and mu != lam and dominates(lam, mu)
                violations += above != dominates(conjugate(lam), conjugate(mu))
                if above:
                    violations += sum(dominates(lam, nu) and not dominates(mu, nu) for nu in parts)
    _check(checks, "dominance_order", violations == 0, f"k <= 8, {violations} violations")

    bad = [
        (kappa, m)
        for k in range(7)
        for m in range(1, 5)
        for kappa in enumerate_partitions(k, m)
        if kappa_star(kappa_star(kappa, kappa[0], m), kappa[0], m) != kappa
    ]
    _check(checks, "kappa_star_involution", not bad, f"k <= 6, m <= 4, {len(bad)} failing")


def _random_sympoly(rng: RngStream, k: int) -> SymPoly:
    return SymPoly(
        k,
        {
            lam: Fraction(int(rng.generator.integers(-5, 6)), int(rng.generator.integers(1, 5)))
            for lam in enumerate_partitions(k)
        },
    )


def _symfun_checks(checks: list[SelftestCheck], rng: RngStream) -> None:
    violations = 0
    for k in range(1, 7):
        basis, forward, backward = transition_matrices(k)
        size = len(basis)
        for i in range(size):
            for j in range(size):
                value = sum((forward[i][t] * backward[t][j] for t in range(size)), Fraction(0))
                violations += value != (1 if i == j else 0)
        for lam in basis:
            monomial = SymPoly.monomial(lam)
            violations += from_power_sum_basis(k, to_power_sum_basis(monomial)) != monomial
    _check(checks, "transition_round_trip", violations == 0, f"k <= 6, {violations} violations")

    violations = 0
    for k in range(1, 6):
        for _ in range(5):
            f, g, h = (_random_sympoly(rng, k) for _ in range(3))
            a = Fraction(int(rng.generator.integers(-7, 8)), 3)
            violations += inner_product_alpha2(f, g) != inner_product_alpha2(g, f)
            violations += inner_product_alpha2(f.scale(a) + g, h) != (
                a * inner_product_alpha2(f, h) + inner_product_alpha2(g, h)
            )
    _check(checks, "inner_product_bilinear", violations == 0, f"k <= 5, {violations} violations")


def _linalg_checks(checks: list[SelftestCheck], rng: RngStream) -> None:
    round_trip = minors = eigs = 0.0
    for m in (1, 2, 3, 4):
        for _ in range(5):
            a = random_spd(rng, m)
            t = a.factor
            round_trip = max(round_trip, float(np.max(np.abs(t.T @ t - a.data)) / np.max(np.abs(a.data))))
            for j in range(1, m + 1):
                principal = math.fsum(
                    float(np.linalg.det(a.data[np.ix_(idx, idx)])) for idx in combinations(range(m), j)
                )
                minors = max(minors, abs(elementary_symmetric(a, j) - principal) / max(1.0, abs(principal)))
            g = rng.generator.standard_normal((m, m))
            t_sym = SymMatrix.symmetrized(g + g.T)
            roots = np.sort(np.roots(np.poly(a.data @ t_sym.data)).real)[::-1]
            scale = max(1.0, float(np.max(np.abs(roots))))
            eigs = max(eigs, float(np.max(np.abs(np.array(product_eigs(a, t_sym)) - roots))) / scale)
    _check(checks, "cholesky_round_trip", round_trip <= 1e-12, f"max relative residual {round_trip:.2e}")
    _check(checks, "principal_minors", minors <= 1e-10, f"max relative gap {minors:.2e}")
    _check(checks, "product_eigs", eigs <= 1e-7, f"max gap to characteristic roots {eigs:.2e}")


def _randmat_checks(checks: list[SelftestCheck], seed: int) -> None:
    rng = RngStream(seed, 2**63 + 1)
    sigma = cholesky(SymMatrix([[1.0, 0.3], [0.3, 0.5]]))
    draws = wishart_batch(rng, WishartSpec(2, 5.0, sigma), 50_000)
    stderr = draws.std(axis=0, ddof=1) / math.sqrt(draws.shape[0])
    worst = float(np.max(np.abs(draws.mean(axis=0) - 5.0 * sigma.data) / stderr))
    _check(checks, "wishart_mean", worst <= 6.0, f"max |z| {worst:.2f}")

    pvalues = [
        stats.kstest(gamma_variates(rng, shape, 10_000), stats.gamma(shape).cdf).pvalue
        for shape in (0.5, 1.0, 2.5, 7.0)
    ]
    _check(checks, "gamma_ks", min(pvalues) > 1e-4, f"min p-value {min(pvalues):.2e}")


def run_selftest(seed: int = DEFAULT_SEED, n_samples: int = 20_000, workers: int | None = None) -> SelftestReport:
    """
    The deterministic property checks plus a short Monte Carlo smoke run.

    :param seed: Seed for random matrices and the smoke run.
    :type seed: int
    :param n_samples: Draws for the smoke run.
    :type n_samples: int
    :param workers: Process count for the smoke run.
    :type workers: int
    :return: One entry per check.
    :rtype: SelftestReport
    """

    checks: list[SelftestCheck] = []
    rng = RngStream(seed, 2**63)
    table = cached_table(6)

    _partition_checks(checks)
    _symfun_checks(checks, rng)
    _linalg_checks(checks, rng)

    worst = []
    for k in range(1, 7):
        total = None
        for kappa in table.degree(k):
            poly = table.poly(kappa)
            total = poly if total is None else total + poly
            worst.extend(lam for lam in poly.coeffs if not dominates(kappa, lam))
        if total != first_power_sum_power(k):
            worst.append(Partition((k,)))
    _check(checks, "zonal_table", not worst, f"K=6, {len(worst)} bad cells")

    mismatches = compare_tables(cached_table(4), build_table_recursive(4))
    _check(checks, "zonal_recursion", not mismatches, f"K=4, {len(mismatches)} mismatches")

    residuals = [
        eigen_operator_residual(table, kappa, m)
        for k in range(1, 4)
        for kappa in table.degree(k)
        for m in (max(kappa.length, 2), 3)
    ]
    _check(checks, "eigen_operator", all(r == 0 for r in residuals), f"{len(residuals)} cases")

    largest = 0.0
    for m in (2, 3):
        for _ in range(5):
            a = random_spd(rng, m)
            for k in range(1, 4):
                for kappa in enumerate_partitions(k, m):
                    n = kappa[0]
                    star = kappa_star(kappa, n, m)
                    scale = max(1.0, abs(eval_matrix(table, star, a) / float(at_identity(table, star, m))))
                    largest = max(largest, abs(dual_identity_residual(table, kappa, n, a)) / scale)
    _check(checks, "dual_identity", largest <= 1e-8, f"max relative residual {largest:.2e}")

    largest = 0.0
    for m in range(1, 7):
        for a in np.linspace((m - 1) / 2 + 0.05, (m - 1) / 2 + 10.0, 20):
            largest = max(
                largest,
                relative_error(multivariate_gamma(a, m, DESCENDING), multivariate_gamma(a, m, ASCENDING)),
            )
    _check(checks, "gamma_forms", largest <= 1e-13, f"max relative gap {largest:.2e}")

    largest = 0.0
    for _ in range(200):
        x = float(rng.generator.uniform(-6.0, 6.0))
        q = int(rng.generator.integers(1, 6))
        shifts = [int(s) for s in rng.generator.integers(0, 4, size=q)]
        scale = max(1.0, math.prod(abs(x) + i for i in range(q)))
        largest = max(largest, abs(neg_pochhammer_identity_residual(x, q)) / scale)
        for sign in (1, -1):
            first, second = reindex_product_residuals(math.cos, x, q, shifts, sign)
            largest = max(largest, abs(first), abs(second))
    _check(checks, "pochhammer", largest <= 1e-12, f"max residual {largest:.2e}")

    kappa = Partition((2, 1))
    identity = gen_pochhammer(1.5, kappa, 2) - pochhammer_rising(1.5, 2) * pochhammer_rising(1.0, 1)
    _check(checks, "gen_pochhammer", abs(identity) <= 1e-12, f"(1.5)_(2,1) residual {identity:.2e}")

    reports = []
    for m in (2, 3):
        y = random_spd(rng, m)
        for k in range(1, 4):
            for kappa in enumerate_partitions(k, m):
                reports.append(verify_lemma2(m, kappa, y, table=table))
    bad = [
        r
        for r in reports
        if r.verdict != "pass" or (len(set(r.exponents)) > 1 and r.control_status != "mismatch")
    ]
    _check(checks, "lemma2", not bad, f"{len(reports)} cases, {len(bad)} failing")

    quads = [verify_gamma_integral(m, a) for m in (1, 2) for a in (1.6, 2.0, 3.0, 3.5)]
    _check(checks, "gamma_quadrature", all(r.verdict == "pass" for r in quads), f"{len(quads)} cases")

    oracle_2, _ = laplace_expectations(2, 3.0, Partition((1,)), SymMatrix.identity(2), SymMatrix.identity(2))
    oracle_1, _ = laplace_expectations(1, 2.0, Partition((1,)), SymMatrix([[1.7]]), SymMatrix.identity(1))
    _check(
        checks,
        "hand_oracles",
        abs(oracle_2 - 4 / 3) <= 1e-12 and abs(oracle_1 - 1.7) <= 1e-12,
        f"{oracle_2!r}, {oracle_1!r}",
    )

    _randmat_checks(checks, seed)

    smoke = verify_theorem1(
        2, 3.0, Partition((1,)), SymMatrix.identity(2), n_samples, seed=seed, workers=workers
    )
    _check(
        checks,
        "theorem1_smoke",
        smoke.z_correct is not None and abs(smoke.z_correct) <= Z_PASS,
        f"z_correct={smoke.z_correct}",
    )

    return SelftestReport(checks=checks, verdict="pass" if all(c.passed for c in checks) else "fail")

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from scipy.special import gamma as scalar_gamma
from scipy.special import gammaln

from .misc import DomainError
from .partitions import Partition

CORRECTED = "corrected"
MUIRHEAD_INCORRECT = "muirhead_incorrect"
VARIANTS = (CORRECTED, MUIRHEAD_INCORRECT)

ASCENDING = "ascending"
DESCENDING = "descending"

# above this |log|, constants are assembled in log space
LOG_SPACE_THRESHOLD = 300.0


@dataclass(frozen=True)
class GammaParams:
    a: float
    m: int

    def check(self) -> None:
        if self.m < 1:
            raise DomainError(f"requires m >= 1, got m={self.m}")
        if not self.a > (self.m - 1) / 2:
            raise DomainError(f"requires a > (m-1)/2, got a={self.a}, m={self.m}")


def pochhammer_rising(x: float, q: int) -> float:
    """
    (x)_q = x (x + 1) ... (x + q - 1), as an explicit finite product so negative x
    never meets a gamma pole.

    :param x: The base.
    :type x: float
    :param q: Number of factors, q >= 0.
    :type q: int
    :return: The rising factorial; 1 for q = 0.
    :rtype: float
    """

    if q < 0:
        raise DomainError(f"requires q >= 0, got {q}")
    return math.prod(x + i - 1 for i in range(1, q + 1))


def pochhammer_falling(x: float, q: int) -> float:
    if q < 0:
        raise DomainError(f"requires q >= 0, got {q}")
    return math.prod(x - i + 1 for i in range(1, q + 1))


def neg_pochhammer_identity_residual(x: float, q: int) -> float:
    """(-x)_q - (-1)^q (x - q + 1)_q."""
    return pochhammer_rising(-x, q) - (-1) ** q * pochhammer_rising(x - q + 1, q)


def reindex_product_residuals(
    g: Callable[[float], float], x: float, q: int, shifts: Sequence[int], sign: int = 1
) -> tuple[float, float]:
    """
    Residuals of the two product reindexings used throughout:

        prod g(x + i - 1) = prod g(x + q - i)
        prod g(x +- k_{q+1-i} - i + 1) = prod g(x +- k_i - q + i)

    :param g: Any real function.
    :type g: Callable
    :param x: Base point.
    :type x: float
    :param q: Number of factors, q >= 1.
    :type q: int
    :param shifts: The q non-negative integers k_1..k_q.
    :type shifts: Sequence
    :param sign: +1 or -1, the sign in front of the shifts.
    :type sign: int
    :return: (first residual, second residual).
    :rtype: tuple
    """

    if q < 1:
        raise DomainError(f"requires q >= 1, got {q}")
    if len(shifts) != q or any(k < 0 for k in shifts):
        raise DomainError(f"requires {q} non-negative shifts, got {list(shifts)}")
    if sign not in (1, -1):
        raise DomainError(f"sign must be +1 or -1, got {sign}")

    idx = range(1, q + 1)
    first = math.prod(g(x + i - 1) for i in idx) - math.prod(g(x + q - i) for i in idx)
    second = math.prod(g(x + sign * shifts[q - i] - i + 1) for i in idx) - math.prod(
        g(x + sign * shifts[i - 1] - q + i) for i in idx
    )
    return first, second


def _gamma_arguments(a: float, m: int, form: str) -> list[float]:
    if form == ASCENDING:
        return [a - (i - 1) / 2 for i in range(1, m + 1)]
    if form == DESCENDING:
        return [a - (m - i) / 2 for i in range(1, m + 1)]
    raise DomainError(f"form must be {ASCENDING!r} or {DESCENDING!r}, got {form!r}")


def multivariate_gamma(a: float, m: int, form: str = ASCENDING, log: bool = False) -> float:
    """
    Gamma_m[a] = pi^(m(m-1)/4) prod Gamma[a - (i-1)/2] (ascending form) or
    pi^(m(m-1)/4) prod Gamma[a - (m-i)/2] (descending form).

    :param a: Argument, a > (m-1)/2.
    :type a: float
    :param m: Dimension, m >= 1.
    :type m: int
    :param form: "ascending" or "descending".
    :type form: str
    :param log: Return log Gamma_m[a] instead.
    :type log: bool
    :return: The multivariate gamma function or its logarithm.
    :rtype: float
    """

    GammaParams(a, m).check()
    args = _gamma_arguments(a, m, form)
    log_value = m * (m - 1) / 4 * math.log(math.pi) + math.fsum(float(gammaln(x)) for x in args)
    if log:
        return log_value
    if log_value > LOG_SPACE_THRESHOLD:
        return math.exp(log_value) if log_value < 709.0 else math.inf
    return math.pi ** (m * (m - 1) / 4) * math.prod(float(scalar_gamma(x)) for x in args)


def gen_pochhammer(b: float, kappa: Partition, m: int) -> float:
    """(b)_kappa = prod_{i=1}^m (b - (i-1)/2)_{k_i}."""
    return math.prod(
        pochhammer_rising(b - (i - 1) / 2, k) for i, k in enumerate(kappa.padded(m), start=1)
    )


def _denominator_factors(a: float, m: int, kappa: Partition, variant: str) -> list[tuple[float, int]]:
    padded = kappa.padded(m)
    if variant == CORRECTED:
        b = -a + (m + 1) / 2
        return [(b - (i - 1) / 2, k) for i, k in enumerate(padded, start=1)]
    if variant == MUIRHEAD_INCORRECT:
        return [(-a + (i + 1) / 2, k) for i, k in enumerate(padded, start=1)]
    raise DomainError(f"variant must be one of {VARIANTS}, got {variant!r}")


def check_convergence(a: float, m: int, kappa: Partition) -> None:
    if m < 1:
        raise DomainError(f"requires m >= 1, got m={m}")
    kappa.padded(m)
    if not a > kappa[0] + (m - 1) / 2:
        raise DomainError(
            f"requires a > k_1 + (m-1)/2, got a={a}, k_1={kappa[0]}, m={m}"
        )


def theorem1_factor(a: float, m: int, kappa: Partition, variant: str = CORRECTED) -> float:
    """
    The Laplace-integral constant divided by Gamma_m[a]:
    (-1)^k / (-a + (m+1)/2)_kappa for the corrected variant, and
    (-1)^k / prod (-a + (i+1)/2)_{k_i} for the incorrect one.

    :param a: Argument with a > k_1 + (m-1)/2.
    :type a: float
    :param m: Dimension.
    :type m: int
    :param kappa: The partition.
    :type kappa: Partition
    :param variant: "corrected" or "muirhead_incorrect".
    :type variant: str
    :return: The factor.
    :rtype: float
    """

    check_convergence(a, m, kappa)
    denominator = 1.0
    for base, q in _denominator_factors(a, m, kappa, variant):
        factor = pochhammer_rising(base, q)
        if factor == 0:
            raise DomainError(f"denominator factor ({base})_{q} vanishes ({variant})")
        denominator *= factor
    return (-1) ** kappa.weight / denominator


def theorem1_log_constant(
    a: float, m: int, kappa: Partition, variant: str = CORRECTED
) -> tuple[int, float]:
    """
    (sign, log|constant|) of (-1)^k Gamma_m[a] / denominator.
    """

    check_convergence(a, m, kappa)
    sign = (-1) ** kappa.weight
    log_abs = multivariate_gamma(a, m, log=True)
    for base, q in _denominator_factors(a, m, kappa, variant):
        factor = pochhammer_rising(base, q)
        if factor == 0:
            raise DomainError(f"denominator factor ({base})_{q} vanishes ({variant})")
        sign *= 1 if factor > 0 else -1
        log_abs -= math.log(abs(factor))
    return sign, log_abs


def theorem1_constant(
    a: float, m: int, kappa: Partition, variant: str = CORRECTED, form: str = "pochhammer"
) -> float:
    """
    The constant multiplying det(Z)^-a C_kappa(Z) in the matrix Laplace integral
    of det(X)^(a-(m+1)/2) C_kappa(X^-1).

    form="pochhammer" divides Gamma_m[a] by the generalized Pochhammer symbol;
    form="gamma" uses the equivalent gamma products
    pi^(m(m-1)/4) prod Gamma[a - k_i - (m-i)/2] (corrected) and
    pi^(m(m-1)/4) prod Gamma[a - k_i - (i-1)/2] (incorrect).

    :param a: Argument with a > k_1 + (m-1)/2.
    :type a: float
    :param m: Dimension.
    :type m: int
    :param kappa: The partition.
    :type kappa: Partition
    :param variant: "corrected" or "muirhead_incorrect".
    :type variant: str
    :param form: "pochhammer" or "gamma".
    :type form: str
    :return: The constant.
    :rtype: float
    """

    if form == "gamma":
        return _gamma_form_constant(a, m, kappa, variant)
    if form != "pochhammer":
        raise DomainError(f"form must be 'pochhammer' or 'gamma', got {form!r}")

    sign, log_abs = theorem1_log_constant(a, m, kappa, variant)
    if abs(log_abs) > LOG_SPACE_THRESHOLD:
        return sign * math.exp(log_abs) if log_abs < 709.0 else sign * math.inf
    return multivariate_gamma(a, m) * theorem1_factor(a, m, kappa, variant)


def _gamma_form_constant(a: float, m: int, kappa: Partition, variant: str) -> float:
    check_convergence(a, m, kappa)
    padded = kappa.padded(m)
    if variant == CORRECTED:
        args = [a - k - (m - i) / 2 for i, k in enumerate(padded, start=1)]
    elif variant == MUIRHEAD_INCORRECT:
        args = [a - k - (i - 1) / 2 for i, k in enumerate(padded, start=1)]
    else:
        raise DomainError(f"variant must be one of {VARIANTS}, got {variant!r}")
    return math.pi ** (m * (m - 1) / 4) * math.prod(float(scalar_gamma(x)) for x in args)


def variants_coincide(m: int, kappa: Partition) -> bool:
    """
    Whether the corrected and incorrect denominators are the same product for
    every a. Both are products of (-a + offset)_{k_i}; only the offsets differ,
    (m - i + 2)/2 against (i + 1)/2, so the comparison is exact on 2 * offset.
    """

    padded = kappa.padded(m)
    corrected = sorted((m - i + 2, k) for i, k in enumerate(padded, start=1) if k)
    incorrect = sorted((i + 1, k) for i, k in enumerate(padded, start=1) if k)
    return corrected == incorrect

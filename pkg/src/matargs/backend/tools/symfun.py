"""
Exact symmetric functions of a fixed degree k, stored in the monomial basis
{m_lambda} over k variables, with the power-sum basis and the alpha = 2 inner
product used to build zonal polynomials.
"""

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from sympy import Matrix
from sympy.utilities.iterables import multiset_permutations

from .misc import DomainError
from .partitions import Partition, enumerate_partitions

ExactRational = Fraction


@dataclass(frozen=True)
class SymPoly:
    """
    A homogeneous symmetric polynomial of degree ``degree`` in the monomial basis.
    Zero coefficients are never stored.
    """

    degree: int
    coeffs: dict[Partition, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for lam, c in self.coeffs.items():
            if lam.weight != self.degree:
                raise DomainError(f"m_{lam} has weight {lam.weight}, expected {self.degree}")
            c = Fraction(c)
            if c != 0:
                clean[lam] = c
        object.__setattr__(self, "coeffs", clean)

    def coefficient(self, lam: Partition) -> Fraction:
        return self.coeffs.get(lam, Fraction(0))

    def __add__(self, other: "SymPoly") -> "SymPoly":
        _check_degrees(self, other)
        out = dict(self.coeffs)
        for lam, c in other.coeffs.items():
            out[lam] = out.get(lam, Fraction(0)) + c
        return SymPoly(self.degree, out)

    def __sub__(self, other: "SymPoly") -> "SymPoly":
        return self + other.scale(-1)

    def scale(self, c) -> "SymPoly":
        c = Fraction(c)
        return SymPoly(self.degree, {lam: c * v for lam, v in self.coeffs.items()})

    @classmethod
    def monomial(cls, lam: Partition) -> "SymPoly":
        return cls(lam.weight, {lam: Fraction(1)})


def _check_degrees(f: SymPoly, g: SymPoly) -> None:
    if f.degree != g.degree:
        raise DomainError(f"degree mismatch: {f.degree} and {g.degree}")


@lru_cache(maxsize=None)
def exponent_patterns(lam: Partition, n: int) -> tuple[tuple[int, ...], ...]:
    """
    The distinct rearrangements of lam padded to n entries; m_lam is the sum of
    x^e over these exponent vectors e.

    :param lam: The partition.
    :type lam: Partition
    :param n: Number of variables.
    :type n: int
    :return: The exponent vectors, empty when lam has more than n parts.
    :rtype: tuple
    """

    if lam.length > n:
        return ()
    if lam.length == 0:
        return ((0,) * n,)
    return tuple(tuple(p) for p in multiset_permutations(list(lam.padded(n))))


def monomial_eval(lam: Partition, x: Sequence) -> float | Fraction:
    """
    Evaluates m_lam at the point x. Integer and Fraction inputs are summed exactly;
    floats use compensated summation.

    :param lam: The partition indexing the monomial symmetric function.
    :type lam: Partition
    :param x: The variable values.
    :type x: Sequence
    :return: The value, 0 when lam has more parts than there are variables.
    """

    patterns = exponent_patterns(lam, len(x))
    terms = [math.prod(xi**e for xi, e in zip(x, pattern) if e) for pattern in patterns]
    if all(isinstance(v, (int, Fraction)) for v in x):
        return sum(terms, Fraction(0))
    return math.fsum(terms)


def monomial_eval_batch(lam: Partition, x: np.ndarray) -> np.ndarray:
    """
    Row-wise m_lam for an (N, n) array of variable values.
    """

    patterns = exponent_patterns(lam, x.shape[-1])
    if not patterns:
        return np.zeros(x.shape[:-1])
    exponents = np.asarray(patterns)
    return np.prod(x[..., None, :] ** exponents, axis=-1).sum(axis=-1)


@lru_cache(maxsize=None)
def _assignments(parts: tuple[int, ...], bins: tuple[int, ...]) -> int:
    # labelled ways of dropping the parts into bins so every bin is filled exactly
    if not parts:
        return int(not any(bins))
    first, rest = parts[0], parts[1:]
    total = 0
    for j, cap in enumerate(bins):
        if cap >= first:
            total += _assignments(rest, bins[:j] + (cap - first,) + bins[j + 1 :])
    return total


def power_sum_in_monomial_basis(lam: Partition) -> SymPoly:
    """
    Expands p_lam = prod_i p_{lam_i} in the monomial basis.

    :param lam: The partition indexing the power sum.
    :type lam: Partition
    :return: The expansion, with integer coefficients.
    :rtype: SymPoly
    """

    k = lam.weight
    return SymPoly(
        k,
        {mu: Fraction(_assignments(lam.parts, mu.parts)) for mu in enumerate_partitions(k)},
    )


def z_lambda(lam: Partition) -> int:
    return math.prod(j**mult * math.factorial(mult) for j, mult in Counter(lam.parts).items())


def power_sum_norm(lam: Partition) -> int:
    """<p_lam, p_lam> under the alpha = 2 inner product."""
    return 2**lam.length * z_lambda(lam)


@lru_cache(maxsize=None)
def transition_matrices(k: int) -> tuple[tuple[Partition, ...], tuple, tuple]:
    """
    The p -> m transition matrix P (row lam holds p_lam in the m-basis) for degree k
    and its exact inverse.

    :param k: The degree.
    :type k: int
    :return: (partitions in descending lexicographic order, P, P^-1), matrices as
        tuples of tuples of Fractions.
    :rtype: tuple
    """

    basis = tuple(enumerate_partitions(k))
    rows = [
        [power_sum_in_monomial_basis(lam).coefficient(mu) for mu in basis] for lam in basis
    ]
    inverse = Matrix([[int(c) for c in row] for row in rows]).inv()
    size = len(basis)
    inv_rows = tuple(
        tuple(Fraction(int(inverse[i, j].p), int(inverse[i, j].q)) for j in range(size))
        for i in range(size)
    )
    return basis, tuple(tuple(row) for row in rows), inv_rows


def to_power_sum_basis(f: SymPoly) -> dict[Partition, Fraction]:
    """
    Coordinates of f in the power-sum basis, f = sum_lam c_lam p_lam.

    :param f: A symmetric polynomial in the monomial basis.
    :type f: SymPoly
    :return: Non-zero power-sum coordinates.
    :rtype: dict
    """

    basis, _, inverse = transition_matrices(f.degree)
    index = {mu: i for i, mu in enumerate(basis)}
    out = {}
    for j, lam in enumerate(basis):
        c = sum((inverse[index[mu]][j] * v for mu, v in f.coeffs.items()), Fraction(0))
        if c != 0:
            out[lam] = c
    return out


def from_power_sum_basis(k: int, coords: dict[Partition, Fraction]) -> SymPoly:
    basis, forward, _ = transition_matrices(k)
    index = {lam: i for i, lam in enumerate(basis)}
    return SymPoly(
        k,
        {
            mu: sum((c * forward[index[lam]][j] for lam, c in coords.items()), Fraction(0))
            for j, mu in enumerate(basis)
        },
    )


def power_sum_inner(f_hat: dict[Partition, Fraction], g_hat: dict[Partition, Fraction]) -> Fraction:
    return sum(
        (c * g_hat[lam] * power_sum_norm(lam) for lam, c in f_hat.items() if lam in g_hat),
        Fraction(0),
    )


def inner_product_alpha2(f: SymPoly, g: SymPoly) -> Fraction:
    """
    The alpha = 2 inner product, <p_lam, p_mu> = delta * 2^len(lam) * z_lam.

    :param f: First argument.
    :type f: SymPoly
    :param g: Second argument, same degree as f.
    :type g: SymPoly
    :return: The exact inner product.
    :rtype: Fraction
    """

    _check_degrees(f, g)
    return power_sum_inner(to_power_sum_basis(f), to_power_sum_basis(g))


def first_power_sum_power(k: int) -> SymPoly:
    """(p_1)^k = (m_1)^k in the monomial basis: multinomial coefficients."""
    return power_sum_in_monomial_basis(Partition((1,) * k))


def eval_exact(f: SymPoly, x: Iterable) -> Fraction:
    x = list(x)
    return sum((c * monomial_eval(lam, x) for lam, c in f.coeffs.items()), Fraction(0))

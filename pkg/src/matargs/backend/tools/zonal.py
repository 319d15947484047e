import csv
import io
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
import sympy

from .linalg import SymMatrix, cholesky, determinant, inverse, sym_eigs
from .misc import DomainError
from .partitions import EMPTY, Partition, dominates, enumerate_partitions, kappa_star, rho
from .symfun import (
    SymPoly,
    eval_exact,
    exponent_patterns,
    first_power_sum_power,
    from_power_sum_basis,
    monomial_eval,
    monomial_eval_batch,
    power_sum_inner,
    to_power_sum_basis,
)

logger = logging.getLogger(__name__)


@dataclass
class ZonalTable:
    """
    Exact zonal polynomials C_kappa for every |kappa| <= max_degree, each in the
    monomial basis, normalized so that sum_{|kappa|=k} C_kappa = (tr)^k.
    """

    max_degree: int
    polys: dict[Partition, SymPoly]
    _float_terms: dict = field(default_factory=dict, repr=False, compare=False)

    def poly(self, kappa: Partition) -> SymPoly:
        try:
            return self.polys[kappa]
        except KeyError:
            raise DomainError(
                f"kappa={kappa} is not in the table (|kappa|={kappa.weight}, K={self.max_degree})"
            )

    def float_terms(self, kappa: Partition) -> list[tuple[float, Partition]]:
        # each exact coefficient is converted to float once per table
        if kappa not in self._float_terms:
            poly = self.poly(kappa)
            self._float_terms[kappa] = [(float(c), lam) for lam, c in poly.coeffs.items()]
        return self._float_terms[kappa]

    def degree(self, k: int) -> list[Partition]:
        return [kappa for kappa in enumerate_partitions(k) if kappa in self.polys]


def _normalize_degree(k: int, unit: dict[Partition, SymPoly]) -> dict[Partition, SymPoly]:
    # (p_1)^k = sum e_kappa J_kappa, solved from the top partition down
    target = first_power_sum_power(k)
    scale = {}
    for kappa in enumerate_partitions(k):
        known = sum((scale[mu] * unit[mu].coefficient(kappa) for mu in scale), Fraction(0))
        scale[kappa] = (target.coefficient(kappa) - known) / unit[kappa].coefficient(kappa)
    return {kappa: unit[kappa].scale(scale[kappa]) for kappa in unit}


def _gram_schmidt_degree(k: int) -> dict[Partition, SymPoly]:
    ascending = list(reversed(enumerate_partitions(k)))
    basis_hat = {}
    norms = {}
    for kappa in ascending:
        m_hat = to_power_sum_basis(SymPoly.monomial(kappa))
        j_hat = dict(m_hat)
        for lam, lam_hat in basis_hat.items():
            coef = power_sum_inner(m_hat, lam_hat) / norms[lam]
            if coef == 0:
                continue
            for mu, c in lam_hat.items():
                j_hat[mu] = j_hat.get(mu, Fraction(0)) - coef * c
        j_hat = {mu: c for mu, c in j_hat.items() if c != 0}
        basis_hat[kappa] = j_hat
        norms[kappa] = power_sum_inner(j_hat, j_hat)
    return {kappa: from_power_sum_basis(k, j_hat) for kappa, j_hat in basis_hat.items()}


def _recursive_degree(k: int) -> dict[Partition, SymPoly]:
    basis = enumerate_partitions(k)
    unit = {}
    for kappa in basis:
        coeffs = {kappa: Fraction(1)}
        rho_kappa = rho(kappa, k)
        for lam in basis:
            if lam == kappa or not dominates(kappa, lam) or lam in coeffs:
                continue
            parts = lam.padded(k)
            total = Fraction(0)
            for j in range(lam.length):
                for i in range(j):
                    for t in range(1, parts[j] + 1):
                        moved = list(parts)
                        moved[i] += t
                        moved[j] -= t
                        mu = Partition(tuple(sorted(moved, reverse=True)))
                        if mu in coeffs and dominates(kappa, mu):
                            total += (parts[i] - parts[j] + 2 * t) * coeffs[mu]
            coeffs[lam] = total / (rho_kappa - rho(lam, k))
        unit[kappa] = SymPoly(k, coeffs)
    return unit


def build_table(max_degree: int, method: str = "gram_schmidt") -> ZonalTable:
    """
    Builds exact zonal polynomial tables up to degree max_degree.

    The normative construction Gram-Schmidt orthogonalizes the monomial symmetric
    functions under the alpha = 2 inner product, taking partitions from the
    bottom of the dominance order up, then fixes each scale from (p_1)^k.
    method="recursive" uses the eigenfunction recursion instead and validates it
    cell by cell against the Gram-Schmidt table, which wins on any disagreement.

    :param max_degree: Largest degree K >= 1.
    :type max_degree: int
    :param method: "gram_schmidt" or "recursive".
    :type method: str
    :return: The table, including C_() = 1.
    :rtype: ZonalTable
    """

    if max_degree < 1:
        raise DomainError(f"requires K >= 1, got {max_degree}")
    if method not in ("gram_schmidt", "recursive"):
        raise DomainError(f"unknown table method {method!r}")

    polys = {EMPTY: SymPoly(0, {EMPTY: Fraction(1)})}
    for k in range(1, max_degree + 1):
        polys.update(_normalize_degree(k, _gram_schmidt_degree(k)))
    table = ZonalTable(max_degree, polys)
    if method == "gram_schmidt":
        return table

    fast = build_table_recursive(max_degree)
    mismatches = compare_tables(table, fast)
    if mismatches:
        logger.warning(
            "recursive zonal table disagrees with Gram-Schmidt in %d cells; using Gram-Schmidt",
            len(mismatches),
        )
        return table
    return fast


def build_table_recursive(max_degree: int) -> ZonalTable:
    polys = {EMPTY: SymPoly(0, {EMPTY: Fraction(1)})}
    for k in range(1, max_degree + 1):
        polys.update(_normalize_degree(k, _recursive_degree(k)))
    return ZonalTable(max_degree, polys)


def compare_tables(a: ZonalTable, b: ZonalTable) -> list[tuple[Partition, Partition]]:
    """
    Cells (kappa, lambda) where two tables disagree exactly.
    """

    out = []
    for kappa in sorted(set(a.polys) | set(b.polys), key=lambda p: (p.weight, p.parts)):
        pa = a.polys.get(kappa, SymPoly(kappa.weight))
        pb = b.polys.get(kappa, SymPoly(kappa.weight))
        for lam in set(pa.coeffs) | set(pb.coeffs):
            if pa.coefficient(lam) != pb.coefficient(lam):
                out.append((kappa, lam))
    return out


@lru_cache(maxsize=8)
def cached_table(max_degree: int) -> ZonalTable:
    return build_table(max_degree)


def eval_eigs(table: ZonalTable, kappa: Partition, eigs: Sequence[float]) -> float:
    """
    C_kappa evaluated at a list of eigenvalues.

    :param table: The zonal table.
    :type table: ZonalTable
    :param kappa: The partition; must be in the table.
    :type kappa: Partition
    :param eigs: The eigenvalues.
    :type eigs: Sequence
    :return: The value in floating point.
    :rtype: float
    """

    eigs = [float(e) for e in eigs]
    return math.fsum(c * monomial_eval(lam, eigs) for c, lam in table.float_terms(kappa))


def eval_eigs_exact(table: ZonalTable, kappa: Partition, eigs: Sequence) -> Fraction:
    return eval_exact(table.poly(kappa), eigs)


def eval_eigs_batch(table: ZonalTable, kappa: Partition, eigs: np.ndarray) -> np.ndarray:
    """Row-wise C_kappa for an (N, m) array of eigenvalues."""
    out = np.zeros(eigs.shape[:-1])
    for c, lam in table.float_terms(kappa):
        out += c * monomial_eval_batch(lam, eigs)
    return out


def eval_matrix(table: ZonalTable, kappa: Partition, a: SymMatrix) -> float:
    return eval_eigs(table, kappa, sym_eigs(a))


def at_identity(table: ZonalTable, kappa: Partition, m: int) -> Fraction:
    """C_kappa(I_m), exactly."""
    return eval_eigs_exact(table, kappa, [1] * m)


def d_kappa(table: ZonalTable, kappa: Partition) -> Fraction:
    return table.poly(kappa).coefficient(kappa)


def s_kappa_kappastar(table: ZonalTable, kappa: Partition, n: int, m: int) -> float:
    """
    s = C_kappa(I_m) / C_kappa*(I_m) for the dual partition kappa* built from n.

    :param table: The zonal table; must hold both kappa and kappa*.
    :type table: ZonalTable
    :param kappa: The partition, at most m parts.
    :type kappa: Partition
    :param n: Integer n >= k_1.
    :type n: int
    :param m: Matrix dimension.
    :type m: int
    :return: The ratio.
    :rtype: float
    """

    star = kappa_star(kappa, n, m)
    denominator = at_identity(table, star, m)
    if denominator == 0:
        raise DomainError(f"C_{star}(I_{m}) vanishes")
    return float(at_identity(table, kappa, m) / denominator)


def dual_identity_residual(table: ZonalTable, kappa: Partition, n: int, a: SymMatrix) -> float:
    """
    det(A)^n C_kappa(A^-1)/C_kappa(I_m) - C_kappa*(A)/C_kappa*(I_m), which vanishes
    up to rounding.

    :param table: The zonal table, holding degrees |kappa| and n*m - |kappa|.
    :type table: ZonalTable
    :param kappa: The partition.
    :type kappa: Partition
    :param n: Integer n >= k_1.
    :type n: int
    :param a: A positive definite matrix.
    :type a: SymMatrix
    :return: The residual.
    :rtype: float
    """

    spd = cholesky(a)
    m = spd.m
    star = kappa_star(kappa, n, m)
    lhs = determinant(spd) ** n * eval_matrix(table, kappa, inverse(spd))
    lhs /= float(at_identity(table, kappa, m))
    rhs = eval_matrix(table, star, spd) / float(at_identity(table, star, m))
    return lhs - rhs


def eigen_operator_residual(table: ZonalTable, kappa: Partition, m: int | None = None) -> sympy.Expr:
    """
    Applies sum_i x_i^2 d^2/dx_i^2 + sum_{i != j} x_i^2/(x_i - x_j) d/dx_i to C_kappa
    in m variables and subtracts (rho_kappa + k(m - 1)) C_kappa, exactly.

    :param table: The zonal table.
    :type table: ZonalTable
    :param kappa: The partition.
    :type kappa: Partition
    :param m: Number of variables, defaults to |kappa|.
    :type m: int
    :return: The expanded residual polynomial; zero for a true eigenfunction.
    :rtype: sympy.Expr
    """

    k = kappa.weight
    m = m or max(k, 1)
    x = sympy.symbols(f"x1:{m + 1}")
    poly = sum(
        (
            sympy.Rational(c.numerator, c.denominator)
            * sum(sympy.Mul(*(xi**e for xi, e in zip(x, pattern))) for pattern in exponent_patterns(lam, m))
            for lam, c in table.poly(kappa).coeffs.items()
        ),
        sympy.Integer(0),
    )
    grads = [sympy.diff(poly, xi) for xi in x]
    image = sum((xi**2 * sympy.diff(poly, xi, 2) for xi in x), sympy.Integer(0))
    for i in range(m):
        for j in range(i + 1, m):
            num = sympy.expand(x[i] ** 2 * grads[i] - x[j] ** 2 * grads[j])
            image += sympy.cancel(num / (x[i] - x[j]))
    eigenvalue = rho(kappa, m) + k * (m - 1)
    return sympy.expand(image - eigenvalue * poly)


def table_to_json(table: ZonalTable) -> dict:
    """
    {"k": [{"kappa": "2,1", "coeffs": [{"lambda": ..., "num": ..., "den": ...}]}]}
    with numerators and denominators as decimal strings.
    """

    out = {}
    for k in range(1, table.max_degree + 1):
        out[str(k)] = [
            {
                "kappa": str(kappa),
                "coeffs": [
                    {"lambda": str(lam), "num": str(c.numerator), "den": str(c.denominator)}
                    for lam, c in sorted(
                        table.poly(kappa).coeffs.items(), key=lambda item: item[0].parts, reverse=True
                    )
                ],
            }
            for kappa in table.degree(k)
        ]
    return out


def table_to_csv(table: ZonalTable) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["kappa", "lambda", "numerator", "denominator"])
    for k, entries in table_to_json(table).items():
        for entry in entries:
            for cell in entry["coeffs"]:
                writer.writerow([entry["kappa"], cell["lambda"], cell["num"], cell["den"]])
    return buffer.getvalue()

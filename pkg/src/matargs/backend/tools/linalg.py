import json
from itertools import combinations
from pathlib import Path

import numpy as np
from scipy.linalg import solve_triangular

from .misc import DomainError, NotPositiveDefiniteError, NotSymmetricError, ParseError

SYMMETRY_TOL = 1e-12
PIVOT_TOL = 1e-12
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 60


class SymMatrix:
    """
    A small dense real symmetric matrix. Entries are validated against
    SYMMETRY_TOL and then replaced by (A + A') / 2.
    """

    def __init__(self, data):
        a = np.array(data, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise DomainError(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise DomainError("matrix has non-finite entries")
        gap = np.abs(a - a.T)
        if np.any(gap > SYMMETRY_TOL * np.maximum(1.0, np.abs(a))):
            raise NotSymmetricError(
                f"matrix is not symmetric (max |A_ij - A_ji| = {gap.max():.3e})"
            )
        self.data = 0.5 * (a + a.T)
        self.data.setflags(write=False)

    @property
    def m(self) -> int:
        return self.data.shape[0]

    @classmethod
    def symmetrized(cls, data) -> "SymMatrix":
        a = np.asarray(data, dtype=np.float64)
        return cls(0.5 * (a + a.T))

    @classmethod
    def identity(cls, m: int) -> "SymMatrix":
        return cls(np.eye(m))

    @classmethod
    def diag(cls, values) -> "SymMatrix":
        return cls(np.diag(np.asarray(values, dtype=np.float64)))

    def __neg__(self) -> "SymMatrix":
        return SymMatrix(-self.data)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.data.tolist()})"

    def to_json(self) -> dict:
        return {"m": self.m, "data": self.data.tolist()}


class SPDMatrix(SymMatrix):
    """
    A positive definite SymMatrix carrying its Cholesky factor: upper-triangular
    T with positive diagonal and A = T'T.
    """

    def __init__(self, data, factor: np.ndarray):
        super().__init__(data)
        self.factor = np.asarray(factor, dtype=np.float64)
        self.factor.setflags(write=False)


def cholesky(a: SymMatrix) -> SPDMatrix:
    """
    Factors A = T'T with T upper-triangular and t_ii > 0.

    :param a: The symmetric matrix to factor.
    :type a: SymMatrix
    :return: A with its factor attached.
    :rtype: SPDMatrix
    """

    if isinstance(a, SPDMatrix):
        return a
    try:
        lower = np.linalg.cholesky(a.data)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError("matrix is not positive definite (Cholesky failed)")
    pivots = np.diag(lower) ** 2
    floor = PIVOT_TOL * np.trace(a.data) / a.m
    if not np.all(pivots > floor):
        raise NotPositiveDefiniteError(
            f"matrix is not positive definite (smallest pivot {pivots.min():.3e})"
        )
    return SPDMatrix(a.data, lower.T)


def _jacobi(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # cyclic Jacobi; returns eigenvalues and the columns of the rotation product
    a = np.array(a, dtype=np.float64)
    m = a.shape[0]
    vectors = np.eye(m)
    target = JACOBI_TOL * np.linalg.norm(a)
    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= target:
            break
        for p, q in combinations(range(m), 2):
            if a[p, q] == 0.0:
                continue
            tau = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
            t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.hypot(1.0, tau))
            c = 1.0 / np.hypot(1.0, t)
            s = t * c
            rot = np.array([[c, s], [-s, c]])
            a[:, [p, q]] = a[:, [p, q]] @ rot
            a[[p, q], :] = rot.T @ a[[p, q], :]
            a[p, q] = a[q, p] = 0.0
            vectors[:, [p, q]] = vectors[:, [p, q]] @ rot
    return np.diag(a).copy(), vectors


def sym_eigs(a: SymMatrix) -> list[float]:
    """
    Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    :param a: The matrix.
    :type a: SymMatrix
    :return: The eigenvalues in descending order.
    :rtype: list
    """

    w, _ = _jacobi(a.data)
    return sorted(w.tolist(), reverse=True)


def sym_sqrt(v: SPDMatrix) -> np.ndarray:
    w, q = _jacobi(v.data)
    return (q * np.sqrt(np.clip(w, 0.0, None))) @ q.T


def elementary_symmetric(a: SymMatrix, j: int) -> float:
    """
    tr_j(A): the j-th elementary symmetric function of the eigenvalues.

    :param a: The matrix.
    :type a: SymMatrix
    :param j: Order, 1 <= j <= m.
    :type j: int
    :return: e_j of the eigenvalues.
    :rtype: float
    """

    if not 1 <= j <= a.m:
        raise DomainError(f"requires 1 <= j <= m={a.m}, got j={j}")
    charpoly = np.poly(sym_eigs(a))
    return float((-1) ** j * charpoly[j])


def leading_principal_minor(a: SymMatrix, j: int) -> float:
    if not 1 <= j <= a.m:
        raise DomainError(f"requires 1 <= j <= m={a.m}, got j={j}")
    return float(np.linalg.det(a.data[:j, :j]))


def product_eigs(v: SPDMatrix, t: SymMatrix) -> list[float]:
    """
    Eigenvalues of the (generally non-symmetric) product V T, read off the
    similar symmetric matrix V^1/2 T V^1/2.

    :param v: Positive definite left factor.
    :type v: SPDMatrix
    :param t: Symmetric right factor, possibly indefinite.
    :type t: SymMatrix
    :return: The real eigenvalues in descending order.
    :rtype: list
    """

    if v.m != t.m:
        raise DomainError(f"dimension mismatch: V is {v.m}x{v.m}, T is {t.m}x{t.m}")
    root = sym_sqrt(cholesky(v))
    return sym_eigs(SymMatrix.symmetrized(root @ t.data @ root))


def determinant(a: SPDMatrix) -> float:
    return float(np.prod(np.diag(cholesky(a).factor)) ** 2)


def inverse(a: SPDMatrix) -> SymMatrix:
    """
    A^-1 = T^-1 T^-T from the Cholesky factor.

    :param a: The positive definite matrix.
    :type a: SPDMatrix
    :return: Its inverse.
    :rtype: SymMatrix
    """

    factor = cholesky(a).factor
    t_inv = solve_triangular(factor, np.eye(a.m), lower=False)
    return SymMatrix.symmetrized(t_inv @ t_inv.T)


def load_matrix_json(path: Path) -> SymMatrix:
    """
    Reads the {"m": 2, "data": [[...], [...]]} matrix file format.

    :param path: The JSON file.
    :type path: Path
    :return: The validated symmetric matrix.
    :rtype: SymMatrix
    """

    try:
        payload = json.loads(Path(path).read_text())
        m = int(payload["m"])
        data = payload["data"]
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise ParseError(f"cannot read matrix file {path}: {e}")
    a = SymMatrix(data)
    if a.m != m:
        raise ParseError(f"matrix file {path} declares m={m} but holds a {a.m}x{a.m} matrix")
    return a

import json
from itertools import combinations

import numpy as np
import pytest

from matargs.backend.tools.linalg import (
    SymMatrix,
    cholesky,
    determinant,
    elementary_symmetric,
    inverse,
    leading_principal_minor,
    load_matrix_json,
    product_eigs,
    sym_eigs,
    sym_sqrt,
)
from matargs.backend.tools.misc import DomainError, NotPositiveDefiniteError, NotSymmetricError, ParseError
from matargs.backend.tools.randmat import RngStream, random_spd


@pytest.fixture
def rng():
    return RngStream(2024)


def test_validation():
    with pytest.raises(NotSymmetricError):
        SymMatrix([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(DomainError):
        SymMatrix([[1.0, 2.0]])
    with pytest.raises(DomainError):
        SymMatrix([[np.nan]])
    a = SymMatrix([[1.0, 2.0], [2.0 + 1e-15, 1.0]])
    assert np.array_equal(a.data, a.data.T)
    with pytest.raises(ValueError):
        a.data[0, 0] = 5.0


def test_cholesky_examples():
    assert np.allclose(cholesky(SymMatrix.identity(3)).factor, np.eye(3))
    spd = cholesky(SymMatrix([[4.0, 2.0], [2.0, 5.0]]))
    assert np.allclose(spd.factor, [[2.0, 1.0], [0.0, 2.0]])
    assert determinant(spd) == pytest.approx(16.0)
    with pytest.raises(NotPositiveDefiniteError):
        cholesky(SymMatrix([[1.0, 2.0], [2.0, 1.0]]))


def test_cholesky_round_trip(rng):
    for m in (1, 2, 3, 5):
        a = random_spd(rng, m)
        t = cholesky(a).factor
        assert np.allclose(np.triu(t), t)
        assert np.all(np.diag(t) > 0)
        assert np.max(np.abs(t.T @ t - a.data)) <= 1e-12 * np.max(np.abs(a.data))
        assert min(sym_eigs(SymMatrix.symmetrized(t.T @ t))) >= 0


def test_sym_eigs_examples(rng):
    assert sym_eigs(SymMatrix.diag([3.0, 1.0, 2.0])) == [3.0, 2.0, 1.0]
    assert sym_eigs(SymMatrix([[0.0, 1.0], [1.0, 0.0]])) == pytest.approx([1.0, -1.0])
    for m in (2, 3, 4, 6):
        a = random_spd(rng, m)
        eigs = sym_eigs(a)
        assert sum(eigs) == pytest.approx(np.trace(a.data), rel=1e-10)
        assert np.prod(eigs) == pytest.approx(determinant(a), rel=1e-10)
        assert eigs == pytest.approx(sorted(np.linalg.eigvalsh(a.data), reverse=True), rel=1e-12, abs=1e-13)


def test_sym_sqrt(rng):
    a = random_spd(rng, 3)
    root = sym_sqrt(a)
    assert np.allclose(root @ root, a.data, atol=1e-12)


def test_elementary_symmetric(rng):
    d = SymMatrix.diag([1.0, 2.0, 3.0])
    assert [elementary_symmetric(d, j) for j in (1, 2, 3)] == pytest.approx([6.0, 11.0, 6.0])
    for m in (2, 3, 4):
        a = random_spd(rng, m)
        assert elementary_symmetric(a, 1) == pytest.approx(np.trace(a.data), rel=1e-10)
        assert elementary_symmetric(a, m) == pytest.approx(determinant(a), rel=1e-10)
        for j in range(1, m + 1):
            minors = sum(np.linalg.det(a.data[np.ix_(rows, rows)]) for rows in combinations(range(m), j))
            assert elementary_symmetric(a, j) == pytest.approx(minors, rel=1e-10)
    with pytest.raises(DomainError):
        elementary_symmetric(d, 4)


def test_leading_principal_minor(rng):
    a = SymMatrix([[4.0, 2.0], [2.0, 5.0]])
    assert leading_principal_minor(a, 1) == 4.0
    assert leading_principal_minor(a, 2) == pytest.approx(16.0)
    assert leading_principal_minor(SymMatrix.identity(4), 3) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        leading_principal_minor(a, 0)


def test_product_eigs(rng):
    t = SymMatrix([[1.0, 0.5], [0.5, -2.0]])
    assert product_eigs(cholesky(SymMatrix.identity(2)), t) == pytest.approx(sym_eigs(t))
    assert product_eigs(cholesky(SymMatrix.diag([4.0, 1.0])), SymMatrix.diag([1.0, -2.0])) == pytest.approx([4.0, -2.0])
    for m in (2, 3):
        v = random_spd(rng, m)
        t = SymMatrix.symmetrized(rng.generator.normal(size=(m, m)))
        eigs = product_eigs(v, t)
        assert np.prod(eigs) == pytest.approx(determinant(v) * np.linalg.det(t.data), rel=1e-10)
        roots = np.sort(np.roots(np.poly(v.data @ t.data)).real)[::-1]
        assert eigs == pytest.approx(roots.tolist(), abs=1e-7)
    with pytest.raises(DomainError):
        product_eigs(cholesky(SymMatrix.identity(2)), SymMatrix.identity(3))


def test_inverse(rng):
    assert np.allclose(inverse(cholesky(SymMatrix.identity(3))).data, np.eye(3))
    assert np.allclose(inverse(cholesky(SymMatrix.diag([2.0, 5.0]))).data, np.diag([0.5, 0.2]))
    a = random_spd(rng, 4)
    assert np.max(np.abs(a.data @ inverse(a).data - np.eye(4))) <= 1e-10


def test_negation_keeps_symmetry():
    a = SymMatrix([[1.0, 2.0], [2.0, 3.0]])
    assert np.array_equal((-a).data, -a.data)


def test_load_matrix_json(tmp_path):
    path = tmp_path / "a.json"
    path.write_text(json.dumps({"m": 2, "data": [[2.0, 1.0], [1.0, 3.0]]}))
    a = load_matrix_json(path)
    assert a.m == 2
    assert np.array_equal(a.data, [[2.0, 1.0], [1.0, 3.0]])
    assert a.to_json() == {"m": 2, "data": [[2.0, 1.0], [1.0, 3.0]]}

    path.write_text(json.dumps({"m": 3, "data": [[2.0, 1.0], [1.0, 3.0]]}))
    with pytest.raises(ParseError):
        load_matrix_json(path)
    path.write_text("{not json")
    with pytest.raises(ParseError):
        load_matrix_json(path)
    with pytest.raises(ParseError):
        load_matrix_json(tmp_path / "missing.json")

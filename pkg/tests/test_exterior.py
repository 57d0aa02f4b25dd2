from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from folhodge.exterior import (
    MetricError,
    MetricGram,
    StarTable,
    contract_basis,
    contraction_matrix,
    dimension,
    induced_gram,
    interior_matrix,
    multi_indices,
    star_basis,
    wedge_basis,
    wedge_matrix,
)


def test_wedge_examples():
    assert wedge_basis((1,), (2,)) == (1, (1, 2))
    assert wedge_basis((2,), (1,)) == (-1, (1, 2))
    assert wedge_basis((1,), (1,)) is None


def test_contract_examples():
    assert contract_basis(1, (1, 2)) == (1, (2,))
    assert contract_basis(2, (1, 2)) == (-1, (1,))
    assert contract_basis(3, (1, 2)) is None


def test_index_range_errors():
    with pytest.raises(IndexError):
        wedge_basis((0,), (1,), 2)
    with pytest.raises(IndexError):
        wedge_basis((1,), (3,), 2)
    with pytest.raises(IndexError):
        contract_basis(4, (1, 2), 3)


def test_enumeration_is_lexicographic_and_complete():
    for q in range(6):
        for k in range(q + 1):
            idx = multi_indices(q, k)
            assert len(idx) == dimension(q, k)
            assert list(idx) == sorted(idx)
            assert all(len(I) == k and all(a < b for a, b in zip(I, I[1:])) for I in idx)
    assert multi_indices(3, 4) == ()
    assert dimension(3, -1) == 0


@pytest.mark.parametrize("q", range(1, 6))
def test_graded_commutativity_exhaustive(q):
    for k, l in product(range(q + 1), repeat=2):
        for I in multi_indices(q, k):
            for J in multi_indices(q, l):
                a, b = wedge_basis(I, J, q), wedge_basis(J, I, q)
                if a is None:
                    assert b is None
                else:
                    assert a[1] == b[1]
                    assert a[0] == (-1) ** (k * l) * b[0]


@pytest.mark.parametrize("q", range(1, 5))
def test_contraction_is_adjoint_of_wedge(q):
    for k in range(q):
        for i in range(1, q + 1):
            e = np.zeros(q, dtype=int)
            e[i - 1] = 1
            W = wedge_matrix(e, q, k)
            C = contraction_matrix(e, q, k + 1)
            assert np.array_equal(C, W.T)


def test_star_q2_table():
    tab = StarTable(MetricGram.identity(2))
    # ⋆1 = e12, ⋆e1 = e2, ⋆e2 = -e1, ⋆e12 = 1
    assert tab.table(0).tolist() == [[1]]
    assert tab.table(1).tolist() == [[0, 1], [-1, 0]]
    assert tab.table(2).tolist() == [[1]]
    S1 = tab.matrix(1)
    assert np.array_equal(S1 @ S1, -np.eye(2, dtype=int))


def test_star_q3_functions():
    tab = StarTable(MetricGram.identity(3))
    assert np.array_equal(tab.matrix(3) @ tab.matrix(0), np.eye(1, dtype=int))


@pytest.mark.parametrize("q", range(1, 7))
@pytest.mark.parametrize("orientation", [1, -1])
def test_star_square_sign_exact(q, orientation):
    tab = StarTable(MetricGram.identity(q), orientation)
    for k in range(q + 1):
        prod = tab.matrix(q - k) @ tab.matrix(k)
        assert prod.dtype.kind == "i"
        assert np.array_equal(prod, (-1) ** (k * (q - k)) * np.eye(dimension(q, k), dtype=int))


@pytest.mark.parametrize("q", range(1, 6))
def test_star_defining_relation_identity_metric(q):
    tab = StarTable(MetricGram.identity(q))
    top = tuple(range(1, q + 1))
    for k in range(q + 1):
        for a, I in enumerate(multi_indices(q, k)):
            col = tab.matrix(k)[:, a]
            (b,) = np.nonzero(col)[0]
            J = multi_indices(q, q - k)[b]
            sign, K = wedge_basis(I, J, q)
            assert K == top and sign * col[b] == 1


@pytest.mark.parametrize("q", range(1, 5))
def test_star_conjugates_wedge_to_contraction(q):
    rng = np.random.default_rng(q)
    tab = StarTable(MetricGram.identity(q))
    for _ in range(3):
        alpha = rng.standard_normal(q)
        alpha /= np.linalg.norm(alpha)
        for k in range(1, q + 1):
            # α⌟ = (-1)^{q(k+1)} ⋆ (α∧) ⋆ on k-forms
            lhs = contraction_matrix(alpha, q, k)
            rhs = (-1) ** (q * (k + 1)) * tab.matrix(q - k + 1) @ wedge_matrix(alpha, q, q - k) @ tab.matrix(k)
            assert np.abs(lhs - rhs).max() < 1e-12


def test_induced_gram_diagonal():
    G = MetricGram(np.diag([2.0, 5.0]))
    assert np.allclose(induced_gram(G, 1), np.diag([0.5, 0.2]))
    assert np.allclose(induced_gram(G, 2), [[0.1]])
    assert induced_gram(G, 0).tolist() == [[1.0]]


def test_identity_gram_is_integer():
    G = MetricGram.identity(4)
    for k in range(5):
        g = induced_gram(G, k)
        assert g.dtype.kind == "i" and np.array_equal(g, np.eye(dimension(4, k), dtype=int))


def test_non_spd_metric_rejected():
    with pytest.raises(MetricError):
        MetricGram(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(MetricError):
        MetricGram(np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(MetricError):
        MetricGram(np.ones((2, 3)))


@st.composite
def spd_metrics(draw, max_q=4):
    q = draw(st.integers(1, max_q))
    entries = draw(st.lists(st.floats(-1, 1, allow_nan=False), min_size=q * q, max_size=q * q))
    A = np.array(entries).reshape(q, q)
    return A @ A.T + 0.5 * np.eye(q)


@settings(max_examples=40, deadline=None)
@given(spd_metrics(), st.sampled_from([1, -1]))
def test_star_relation_general_metric(G, orientation):
    metric = MetricGram(G)
    q = metric.q
    tab = StarTable(metric, orientation)
    top = tuple(range(1, q + 1))
    for k in range(q + 1):
        gram = metric.gram(k)
        assert np.linalg.eigvalsh(gram).min() > 0
        # α ∧ ⋆β = <α, β> vol for basis forms
        for a, I in enumerate(multi_indices(q, k)):
            for b in range(dimension(q, k)):
                star_b = tab.matrix(k)[:, b]
                total = 0.0
                for c, J in enumerate(multi_indices(q, q - k)):
                    res = wedge_basis(I, J, q)
                    if res is not None and res[1] == top:
                        total += res[0] * star_b[c]
                assert abs(total - orientation * metric.volume * gram[a, b]) < 1e-10 * max(1.0, metric.volume)
        prod = tab.matrix(q - k) @ tab.matrix(k)
        assert np.abs(prod - (-1) ** (k * (q - k)) * np.eye(dimension(q, k))).max() < 1e-10


@settings(max_examples=30, deadline=None)
@given(spd_metrics())
def test_interior_is_metric_adjoint_of_wedge(G):
    metric = MetricGram(G)
    q = metric.q
    rng = np.random.default_rng(0)
    alpha = rng.standard_normal(q)
    for k in range(q):
        W = wedge_matrix(alpha, q, k)
        C = interior_matrix(alpha, metric, k + 1)
        lhs = metric.gram(k + 1) @ W
        rhs = (metric.gram(k) @ C).T
        assert np.abs(lhs - rhs).max() < 1e-10


def test_star_basis_rejects_bad_orientation_and_degree():
    with pytest.raises(ValueError):
        star_basis(MetricGram.identity(2), 0, 1)
    with pytest.raises(ValueError):
        star_basis(MetricGram.identity(2), 1, 3)

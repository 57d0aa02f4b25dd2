"""Pointwise exterior algebra on a q-dimensional oriented inner-product space.

Basis covectors are labelled ``e^1 .. e^q`` (1-based, as in the coframe
models).  A basis k-form ``e^I`` is identified with its strictly increasing
index tuple ``I``; the k-forms are enumerated lexicographically, so matrix
layouts are reproducible.

When the metric is the identity every table built here has integer entries
and is computed in integer arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

MultiIndex = tuple[int, ...]


class MetricError(ValueError):
    """The transverse metric is not symmetric positive definite."""


@lru_cache(maxsize=None)
def multi_indices(q: int, k: int) -> tuple[MultiIndex, ...]:
    """All strictly increasing k-tuples from ``1..q`` in lexicographic order."""
    if q < 0 or k < 0 or k > q:
        return ()
    return tuple(combinations(range(1, q + 1), k))


@lru_cache(maxsize=None)
def basis_position(q: int, k: int) -> dict[MultiIndex, int]:
    return {I: n for n, I in enumerate(multi_indices(q, k))}


def dimension(q: int, k: int) -> int:
    """Dimension C(q, k) of Λ^k; zero outside ``0 <= k <= q``."""
    if k < 0 or k > q:
        return 0
    return comb(q, k)


def _check_index(i: int, q: int | None) -> None:
    if i < 1 or (q is not None and i > q):
        raise IndexError(f"coframe index {i} outside 1..{q}")


def wedge_basis(I: MultiIndex, J: MultiIndex, q: int | None = None) -> tuple[int, MultiIndex] | None:
    """Return ``(sign, K)`` with ``e^I ∧ e^J = sign * e^K``, or None if zero.

    >>> wedge_basis((2,), (1,))
    (-1, (1, 2))
    """
    for i in (*I, *J):
        _check_index(i, q)
    if set(I) & set(J):
        return None
    inversions = sum(1 for a in I for b in J if a > b)
    return (-1) ** inversions, tuple(sorted(I + J))


def contract_basis(i: int, I: MultiIndex, q: int | None = None) -> tuple[int, MultiIndex] | None:
    """Interior product of the dual basis vector ``e_i`` with ``e^I``."""
    _check_index(i, q)
    for j in I:
        _check_index(j, q)
    if i not in I:
        return None
    pos = I.index(i)
    return (-1) ** pos, I[:pos] + I[pos + 1 :]


def complement(I: MultiIndex, q: int) -> MultiIndex:
    return tuple(j for j in range(1, q + 1) if j not in I)


@lru_cache(maxsize=None)
def _wedge_unit(q: int, k: int, i: int) -> np.ndarray:
    # matrix of e^i ∧ : Λ^k -> Λ^{k+1}
    rows = basis_position(q, k + 1)
    out = np.zeros((dimension(q, k + 1), dimension(q, k)), dtype=np.int64)
    for col, I in enumerate(multi_indices(q, k)):
        res = wedge_basis((i,), I, q)
        if res is not None:
            sign, K = res
            out[rows[K], col] = sign
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _contract_unit(q: int, k: int, i: int) -> np.ndarray:
    # matrix of e_i ⌟ : Λ^k -> Λ^{k-1}
    rows = basis_position(q, k - 1)
    out = np.zeros((dimension(q, k - 1), dimension(q, k)), dtype=np.int64)
    for col, I in enumerate(multi_indices(q, k)):
        res = contract_basis(i, I, q)
        if res is not None:
            sign, K = res
            out[rows[K], col] = sign
    out.setflags(write=False)
    return out


def wedge_matrix(alpha, q: int, k: int) -> np.ndarray:
    """Matrix of ``alpha ∧`` from Λ^k to Λ^{k+1} for a covector ``alpha``."""
    alpha = np.asarray(alpha)
    out = np.zeros((dimension(q, k + 1), dimension(q, k)), dtype=np.result_type(alpha, np.int64))
    for i in range(1, q + 1):
        if alpha[i - 1] != 0:
            out = out + alpha[i - 1] * _wedge_unit(q, k, i)
    return out


def contraction_matrix(vector, q: int, k: int) -> np.ndarray:
    """Matrix of ``v ⌟`` from Λ^k to Λ^{k-1} for a vector with frame components ``v``."""
    vector = np.asarray(vector)
    out = np.zeros((dimension(q, k - 1), dimension(q, k)), dtype=np.result_type(vector, np.int64))
    if k == 0:
        return out
    for i in range(1, q + 1):
        if vector[i - 1] != 0:
            out = out + vector[i - 1] * _contract_unit(q, k, i)
    return out


@dataclass(frozen=True)
class MetricGram:
    """Constant transverse metric written in the coframe.

    Parameters
    ----------
    G
        q×q symmetric positive definite matrix ``g(e_i, e_j)`` on frame vectors.
        The covector Gram matrix is its inverse.
    """

    G: np.ndarray
    _grams: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        G = np.array(self.G, dtype=float)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise MetricError("metric must be a square matrix")
        if not np.allclose(G, G.T, rtol=0, atol=1e-14 * max(1.0, np.abs(G).max(initial=0))):
            raise MetricError("metric is not symmetric")
        if G.size and np.linalg.eigvalsh(G).min() <= 0:
            raise MetricError("metric is not positive definite")
        G.setflags(write=False)
        object.__setattr__(self, "G", G)

    @classmethod
    def identity(cls, q: int) -> MetricGram:
        return cls(np.eye(q))

    @property
    def q(self) -> int:
        return self.G.shape[0]

    @property
    def is_identity(self) -> bool:
        return bool(np.array_equal(self.G, np.eye(self.q)))

    @property
    def volume(self) -> float:
        """Normalization ``sqrt(det G)`` of the Riemannian volume form."""
        return 1.0 if self.is_identity else float(np.sqrt(np.linalg.det(self.G)))

    @property
    def cometric(self) -> np.ndarray:
        return self.gram(1)

    def gram(self, k: int) -> np.ndarray:
        """Gram matrix of the basis k-forms (see :func:`induced_gram`)."""
        if k not in self._grams:
            self._grams[k] = induced_gram(self, k)
        return self._grams[k]

    def raise_index(self, alpha) -> np.ndarray:
        """Frame components of the vector metrically dual to covector ``alpha``."""
        if self.is_identity:
            return np.asarray(alpha)
        return self.cometric @ np.asarray(alpha)


def induced_gram(metric: MetricGram, k: int) -> np.ndarray:
    """Gram matrix ``<e^I, e^J>`` on Λ^k: k×k minors of the inverse metric."""
    q = metric.q
    if k < 0 or k > q:
        raise ValueError(f"degree {k} outside 0..{q}")
    n = dimension(q, k)
    if metric.is_identity:
        out = np.eye(n, dtype=np.int64)
        out.setflags(write=False)
        return out
    co = np.linalg.inv(metric.G)
    co = 0.5 * (co + co.T)
    idx = multi_indices(q, k)
    out = np.empty((n, n))
    for a, I in enumerate(idx):
        rows = [i - 1 for i in I]
        for b, J in enumerate(idx):
            cols = [j - 1 for j in J]
            out[a, b] = np.linalg.det(co[np.ix_(rows, cols)]) if k else 1.0
    out = 0.5 * (out + out.T)
    out.setflags(write=False)
    return out


def interior_matrix(alpha, metric: MetricGram, k: int) -> np.ndarray:
    """Pointwise adjoint of ``alpha ∧``, i.e. contraction with ``alpha^♯``, on Λ^k."""
    return contraction_matrix(metric.raise_index(alpha), metric.q, k)


def star_basis(metric: MetricGram, orientation: int, k: int) -> np.ndarray:
    """Row table ``S_k`` with ``⋆ e^I = Σ_J S_k[I, J] e^J``.

    Pinned by ``α ∧ ⋆β = <α, β> vol`` with
    ``vol = orientation * sqrt(det G) e^1 ∧ .. ∧ e^q``.
    """
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    q = metric.q
    if k < 0 or k > q:
        raise ValueError(f"degree {k} outside 0..{q}")
    cols = basis_position(q, q - k)
    idx = multi_indices(q, k)
    gram = metric.gram(k)
    exact = metric.is_identity
    S = np.zeros((len(idx), len(cols)), dtype=np.int64 if exact else float)
    scale = orientation if exact else orientation * metric.volume
    # e^A ∧ e^{comp A} = eps(A) e^{1..q}; only J = comp(A) pairs with e^A
    for a, A in enumerate(idx):
        C = complement(A, q)
        eps, _ = wedge_basis(A, C, q)
        for r in range(len(idx)):
            if gram[a, r] != 0:
                S[r, cols[C]] += scale * eps * gram[a, r]
    S.setflags(write=False)
    return S


@dataclass(frozen=True)
class StarTable:
    """Transversal Hodge star tables for every degree of one metric/orientation."""

    metric: MetricGram
    orientation: int = 1
    blocks: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        blocks = tuple(star_basis(self.metric, self.orientation, k) for k in range(self.metric.q + 1))
        object.__setattr__(self, "blocks", blocks)

    @property
    def q(self) -> int:
        return self.metric.q

    def table(self, k: int) -> np.ndarray:
        return self.blocks[k]

    def matrix(self, k: int) -> np.ndarray:
        """Action of ⋆ on coefficient columns of Λ^k (codomain Λ^{q-k})."""
        return self.blocks[k].T

    def sign(self, k: int) -> int:
        return (-1) ** (k * (self.q - k))

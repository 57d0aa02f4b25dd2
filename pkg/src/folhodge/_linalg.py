"""Small numerical helpers shared by the operator and spectral modules."""

from __future__ import annotations

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

_EXACT_NORM_LIMIT = 400
_POWER_STEPS = 60


def as_sparse(a) -> sp.csr_array:
    if sp.issparse(a):
        return sp.csr_array(a, dtype=complex)
    return sp.csr_array(np.asarray(a, dtype=complex))


def dense(a) -> np.ndarray:
    return a.toarray() if sp.issparse(a) else np.asarray(a)


def frobenius(a) -> float:
    if sp.issparse(a):
        return float(np.sqrt(np.sum(np.abs(a.data) ** 2))) if a.nnz else 0.0
    return float(np.linalg.norm(a))


def opnorm(a) -> float:
    """Spectral norm; exact for small blocks, power iteration otherwise.

    The power-iteration estimate never exceeds the true norm, so residuals
    divided by it are conservative.
    """
    m, n = a.shape
    if m == 0 or n == 0:
        return 0.0
    if min(m, n) <= _EXACT_NORM_LIMIT:
        return float(la.norm(dense(a), 2))
    rng = np.random.default_rng(20240601)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x /= np.linalg.norm(x)
    ah = a.conj().T
    sigma = 0.0
    for _ in range(_POWER_STEPS):
        y = ah @ (a @ x)
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0
        sigma = np.sqrt(ny)
        x = y / ny
    return float(sigma)


def relative_residual(residual, *scales) -> float:
    """Frobenius norm of ``residual`` over the product (or max) of reference norms.

    ``scales`` may be matrices (their spectral norm is used) or floats.
    """
    r = frobenius(residual)
    if r == 0.0:
        return 0.0
    ref = 1.0
    for s in scales:
        ref *= s if isinstance(s, (int, float)) else opnorm(s)
    return r / ref if ref > 0 else float("inf")


def compare(lhs, rhs) -> float:
    """Relative residual of ``lhs - rhs`` against the larger of the two norms."""
    r = frobenius(lhs - rhs)
    if r == 0.0:
        return 0.0
    ref = max(opnorm(lhs), opnorm(rhs))
    return r / ref if ref > 0 else float("inf")


def hermitian_sqrt(g: np.ndarray, inverse: bool = False) -> np.ndarray:
    w, v = np.linalg.eigh(np.asarray(g, dtype=float))
    p = -0.5 if inverse else 0.5
    return (v * w**p) @ v.T


def fix_phase(vectors: np.ndarray, rel_tol: float = 1e-8) -> np.ndarray:
    """Make the first significant component of every column real positive."""
    out = np.array(vectors, dtype=complex, copy=True)
    for j in range(out.shape[1]):
        col = out[:, j]
        mags = np.abs(col)
        big = mags.max(initial=0.0)
        if big == 0:
            continue
        first = int(np.argmax(mags > rel_tol * big))
        out[:, j] = col * (np.conj(col[first]) / mags[first])
    return out

"""Spectra, harmonic spaces, Betti numbers and the derived invariants."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from . import _linalg
from .errors import DegreeError, NumericalReliabilityError, OrientationError, TautnessMismatchError
from .model import CoframeModel, add_tables, require_valid, solve_exact_potential, structure_tensor, validate
from .operators import (
    assemble,
    connection_laplacian,
    delta_b,
    exterior_derivative,
    laplacian,
    mu_adjoint,
    star,
    star_involution,
    symmetrize,
    twisted_d,
    twisted_delta,
    weight_matrix,
)

HARMONIC_REL = 1e-8
GAP_RATIO = 10.0
CLUSTER_REL = 1e-7

OPERATOR_ALIASES = {
    "Delta_tilde": "Delta_tilde",
    "twisted-laplacian": "Delta_tilde",
    "Delta_b": "Delta_b",
    "basic-laplacian": "Delta_b",
}


def _canonical(operator: str) -> str:
    try:
        return OPERATOR_ALIASES[operator]
    except KeyError:
        raise ValueError(f"unknown Laplacian {operator!r}; use Delta_tilde or Delta_b") from None


def _hermitian_laplacian(model: CoframeModel, operator: str, k: int) -> tuple[np.ndarray, float]:
    """Dense Hermitian part of the symmetrized Laplacian and its relative skew part."""
    store = model._cache.setdefault("hermitian", {})
    key = (operator, k)
    if key not in store:
        A = laplacian(model, k, twisted=operator == "Delta_tilde")
        S = _linalg.dense(symmetrize(model, A, k))
        H = 0.5 * (S + S.conj().T)
        skew = float(np.linalg.norm(S - H) / max(np.linalg.norm(H), 1e-300)) if S.size else 0.0
        store[key] = (H, skew)
    return store[key]


def _eigvals(model: CoframeModel, operator: str, k: int) -> np.ndarray:
    store = model._cache.setdefault("eigvals", {})
    key = (operator, k)
    if key not in store:
        H, _ = _hermitian_laplacian(model, operator, k)
        store[key] = la.eigvalsh(H) if H.size else np.zeros(0)
    return store[key]


def group_multiplicities(values, rel_gap: float = CLUSTER_REL) -> list[tuple[float, int]]:
    """Cluster sorted values whose consecutive gap is below ``rel_gap·max(1, |λ|)``."""
    out: list[list] = []
    for v in values:
        if out and abs(v - out[-1][2]) <= rel_gap * max(1.0, abs(v)):
            out[-1][1] += 1
            out[-1][2] = v
        else:
            out.append([float(v), 1, v])
    return [(c[0], c[1]) for c in out]


@dataclass(frozen=True)
class SpectrumResult:
    """Lowest eigenpairs of one Laplacian in one degree.

    ``vectors`` hold eigenvectors in model coordinates (columns); they are
    orthonormal for the weighted inner product.
    """

    operator: str
    degree: int
    eigenvalues: np.ndarray
    multiplicities: tuple[tuple[float, int], ...]
    residuals: np.ndarray
    threshold: float
    non_hermitian: float
    vectors: np.ndarray = field(repr=False, compare=False, default=None)

    @property
    def scale(self) -> float:
        return max(1.0, float(self.eigenvalues.max(initial=0.0)))

    def to_dict(self) -> dict:
        return {
            "operator": self.operator,
            "degree": self.degree,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "multiplicities": [[float(v), int(m)] for v, m in self.multiplicities],
            "residuals": [float(x) for x in self.residuals],
            "threshold": self.threshold,
            "non_hermitian": self.non_hermitian,
        }


def spectrum(model: CoframeModel, operator: str = "Delta_tilde", degree: int = 0, count: int | None = None) -> SpectrumResult:
    """Lowest ``count`` eigenpairs of ``Delta_tilde`` or ``Delta_b`` on ``degree``-forms.

    The Laplacian is symmetrized with the square root of the weight, its
    Hermitian part is diagonalized densely, and eigenvectors are mapped back
    and phase-fixed (first significant component real positive).
    """
    require_valid(model)
    operator = _canonical(operator)
    if not 0 <= degree <= model.q:
        raise DegreeError(f"degree {degree} outside 0..{model.q}")
    dim = model.dim(degree)
    count = dim if count is None else int(count)
    if count < 1 or count > dim:
        raise ValueError(f"count must be between 1 and {dim}")
    H, skew = _hermitian_laplacian(model, operator, degree)
    w, y = la.eigh(H, subset_by_index=[0, count - 1])
    v = weight_matrix(model, degree, -0.5) @ y
    v = _linalg.fix_phase(v)
    A = laplacian(model, degree, twisted=operator == "Delta_tilde")
    res = np.linalg.norm(A @ v - v * w[None, :], axis=0) / np.linalg.norm(v, axis=0)
    scale = max(1.0, float(w.max()))
    return SpectrumResult(
        operator,
        degree,
        w,
        tuple(group_multiplicities(w)),
        res,
        HARMONIC_REL * scale,
        skew,
        v,
    )


@dataclass(frozen=True)
class HarmonicCount:
    """Harmonic dimension with the threshold sanity check.

    ``lower``/``upper`` count eigenvalues below ``threshold/10`` and
    ``10·threshold``; the count is reliable when they agree.
    """

    dimension: int
    threshold: float
    reliable: bool
    lower: int
    upper: int
    gap_ratio: float


def _count(values: np.ndarray, threshold: float | None, rel: float = HARMONIC_REL) -> HarmonicCount:
    scale = max(1.0, float(values.max(initial=0.0)))
    thr = rel * scale if threshold is None else float(threshold)
    n = int(np.sum(values < thr))
    lower = int(np.sum(values < thr / GAP_RATIO))
    upper = int(np.sum(values < thr * GAP_RATIO))
    below = values[values < thr]
    above = values[values >= thr]
    if len(above) == 0:
        ratio = float("inf")
    elif len(below) == 0 or below.max() <= 0:
        ratio = float("inf")
    else:
        ratio = float(above.min() / below.max())
    return HarmonicCount(n, thr, lower == upper, lower, upper, ratio)


def harmonic_dimension(
    model: CoframeModel,
    operator: str = "Delta_tilde",
    degree: int = 0,
    threshold: float | None = None,
    rel: float = HARMONIC_REL,
) -> HarmonicCount:
    """Number of eigenvalues below ``threshold`` (default ``rel·max(1, λ_max)``)."""
    require_valid(model)
    operator = _canonical(operator)
    if not 0 <= degree <= model.q:
        raise DegreeError(f"degree {degree} outside 0..{model.q}")
    return _count(_eigvals(model, operator, degree), threshold, rel)


def _rank(matrix, rel: float = HARMONIC_REL) -> tuple[int, bool]:
    if min(matrix.shape) == 0:
        return 0, True
    s = la.svdvals(_linalg.dense(matrix))
    thr = rel * max(1.0, float(s.max(initial=0.0)))
    r = int(np.sum(s > thr))
    ok = int(np.sum(s > thr / GAP_RATIO)) == int(np.sum(s > thr * GAP_RATIO))
    return r, ok


def _rank_betti(model: CoframeModel, twisted: bool, rel: float = HARMONIC_REL) -> tuple[list[int], bool]:
    op = twisted_d if twisted else exterior_derivative
    ranks, ok = [], True
    for k in range(model.q + 1):
        r, good = _rank(op(model, k), rel)
        ranks.append(r)
        ok &= good
    betti = [model.dim(k) - ranks[k] - (ranks[k - 1] if k else 0) for k in range(model.q + 1)]
    return betti, ok


@dataclass(frozen=True)
class CohomologyReport:
    model_name: str
    grid: tuple[int, ...]
    betti: tuple[int, ...]
    twisted: tuple[int, ...]
    euler: int
    twisted_euler: int
    taut: bool
    taut_residual: float
    signature: int | None
    duality_defect: int | None
    refined: bool
    method: str

    def to_dict(self) -> dict:
        return {
            "model": self.model_name,
            "grid": list(self.grid),
            "betti": list(self.betti),
            "twisted": list(self.twisted),
            "euler": self.euler,
            "twisted_euler": self.twisted_euler,
            "taut": self.taut,
            "taut_residual": self.taut_residual,
            "signature": self.signature,
            "duality_defect": self.duality_defect,
            "refined": self.refined,
            "method": self.method,
        }


def _harmonic_counts(model: CoframeModel, rel: float):
    counts = {}
    for op in ("Delta_b", "Delta_tilde"):
        counts[op] = [harmonic_dimension(model, op, k, rel=rel) for k in range(model.q + 1)]
    return counts


def signature(model: CoframeModel, rel: float = HARMONIC_REL) -> int:
    """``dim⁺ - dim⁻`` of ★ on the Δ̃-harmonic forms of all degrees."""
    require_valid(model)
    if not model.oriented:
        raise OrientationError("signature needs a transversally oriented model")
    if model.q % 2:
        raise DegreeError("signature needs even codimension")
    q = model.q
    bases = []
    for k in range(q + 1):
        H, _ = _hermitian_laplacian(model, "Delta_tilde", k)
        vals = _eigvals(model, "Delta_tilde", k)
        thr = rel * max(1.0, float(vals.max(initial=0.0)))
        n = int(np.sum(vals < thr))
        if n:
            _, y = la.eigh(H, subset_by_index=[0, n - 1])
        else:
            y = np.zeros((H.shape[0], 0), dtype=complex)
        bases.append(y)
    total = sum(b.shape[1] for b in bases)
    if total == 0:
        return 0
    offsets = np.cumsum([0] + [b.shape[1] for b in bases])
    R = np.zeros((total, total), dtype=complex)
    for k in range(q + 1):
        j = q - k
        if not bases[k].shape[1] or not bases[j].shape[1]:
            continue
        # ★ in weight-orthonormal coordinates, k -> q-k
        inv = _linalg.dense(symmetrize(model, star_involution(model, k), k, j))
        R[offsets[j] : offsets[j + 1], offsets[k] : offsets[k + 1]] = bases[j].conj().T @ inv @ bases[k]
    ev = la.eigvalsh(0.5 * (R + R.conj().T))
    return int(np.sum(ev > 0) - np.sum(ev < 0))


def cohomology_report(model: CoframeModel, refine: bool = True, rel: float = HARMONIC_REL) -> CohomologyReport:
    """Ordinary and twisted Betti numbers with tautness, χ and σ.

    Oriented models use harmonic counts; non-oriented ones use rank counts
    of ``d`` and ``d̃``.  An unreliable threshold triggers one grid doubling.

    Raises
    ------
    NumericalReliabilityError
        The threshold still sits in an eigenvalue cluster after refinement.
    TautnessMismatchError
        ``b̃_0 > 0`` disagrees with exactness of ``κ``.
    """
    report = require_valid(model)
    refined = False
    current = model
    while True:
        if current.oriented:
            counts = _harmonic_counts(current, rel)
            ok = all(c.reliable for cs in counts.values() for c in cs)
            betti = [c.dimension for c in counts["Delta_b"]]
            twisted = [c.dimension for c in counts["Delta_tilde"]]
            method = "harmonic"
        else:
            betti, ok1 = _rank_betti(current, twisted=False, rel=rel)
            twisted, ok2 = _rank_betti(current, twisted=True, rel=rel)
            ok = ok1 and ok2
            method = "rank"
        if ok:
            break
        if not refine or refined or not current.active:
            raise NumericalReliabilityError(f"harmonic threshold is inside an eigenvalue cluster on grid {current.grid_shape}")
        current = current.refined()
        require_valid(current)
        refined = True
    q = model.q
    taut = twisted[0] > 0
    if taut != report.taut:
        raise TautnessMismatchError(
            f"b~0 = {twisted[0]} but the potential detector says taut={report.taut} (residual {report.taut_residual:.3e})"
        )
    sig = signature(current, rel) if current.oriented and q % 2 == 0 else None
    defect = max(abs(twisted[k] - twisted[q - k]) for k in range(q + 1)) if current.oriented else None
    return CohomologyReport(
        model.name,
        current.grid_shape,
        tuple(betti),
        tuple(twisted),
        sum((-1) ** k * b for k, b in enumerate(betti)),
        sum((-1) ** k * b for k, b in enumerate(twisted)),
        taut,
        report.taut_residual,
        sig,
        defect,
        refined,
        method,
    )


# duality -----------------------------------------------------------------------


@dataclass(frozen=True)
class DualityReport:
    degrees: tuple[int, int]
    count: int
    eigenvalue_gap: float
    star_residual: float
    eigenvalues: tuple[np.ndarray, np.ndarray] = field(repr=False, compare=False, default=None)

    def to_dict(self) -> dict:
        a, b = self.eigenvalues
        return {
            "degrees": list(self.degrees),
            "count": self.count,
            "eigenvalue_gap": self.eigenvalue_gap,
            "star_residual": self.star_residual,
            "eigenvalues": [[float(x) for x in a], [float(x) for x in b]],
        }


def duality_check(model: CoframeModel, degrees: tuple[int, int] | None = None, count: int = 20) -> DualityReport:
    """Compare the spectra of ``Δ̃_k`` and ``Δ̃_{q-k}`` and test that ⋆ maps eigenvectors to eigenvectors."""
    require_valid(model)
    if not model.oriented:
        raise OrientationError("duality needs a transversally oriented model")
    k, j = (0, model.q) if degrees is None else degrees
    if j != model.q - k:
        raise DegreeError("degrees must be complementary (k, q-k)")
    a = spectrum(model, "Delta_tilde", k, count)
    b = spectrum(model, "Delta_tilde", j, count)
    gap = float(np.abs(a.eigenvalues - b.eigenvalues).max())
    A = laplacian(model, j, twisted=True)
    w = star(model, k) @ a.vectors
    res = np.linalg.norm(A @ w - w * a.eigenvalues[None, :], axis=0) / np.linalg.norm(w, axis=0)
    return DualityReport((k, j), count, gap, float(res.max()), (a.eigenvalues, b.eigenvalues))


def middle_union_gap(model: CoframeModel, count: int = 20) -> float:
    """For q = 2: distance between the nonzero spectrum of Δ̃¹ and that of Δ̃⁰ ∪ Δ̃²."""
    require_valid(model)
    if model.q != 2:
        raise DegreeError("the degree-one union check is for codimension 2")
    mid = _eigvals(model, "Delta_tilde", 1)
    outer = np.sort(np.concatenate([_eigvals(model, "Delta_tilde", 0), _eigvals(model, "Delta_tilde", 2)]))
    thr = HARMONIC_REL * max(1.0, float(mid.max()))
    mid = mid[mid >= thr][:count]
    outer = outer[outer >= thr][:count]
    return float(np.abs(mid - outer).max())


# conformal change ---------------------------------------------------------------


@dataclass(frozen=True)
class ConformalReport:
    count: int
    normalized: bool
    eigenvalue_gaps: tuple[float, ...]
    scales: tuple[float, ...]
    alignment: tuple[float, ...]
    taut_before: bool
    taut_after: bool

    @property
    def max_relative_gap(self) -> float:
        return max(g / s for g, s in zip(self.eigenvalue_gaps, self.scales))

    @property
    def min_alignment(self) -> float:
        return min(self.alignment, default=1.0)

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "normalized": self.normalized,
            "eigenvalue_gaps": list(self.eigenvalue_gaps),
            "max_relative_gap": self.max_relative_gap,
            "alignment": list(self.alignment),
            "min_alignment": self.min_alignment,
            "taut_before": self.taut_before,
            "taut_after": self.taut_after,
        }


def _mu_inner(model: CoframeModel, k: int, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u.conj().T @ (weight_matrix(model, k) @ v)


def conformal_compare(model: CoframeModel, h: dict, count: int = 10) -> ConformalReport:
    """Compare Δ̃ of ``model`` with Δ̃ of the model with ``κ + dh``.

    ``h`` is a Fourier table; a nonzero mean is dropped and flagged.
    Eigenvectors are compared through ``v ↦ e^{h/2} v`` in the new weight:
    cosines for simple eigenvalues, smallest principal-angle cosine for
    clusters that fit inside ``count``.
    """
    require_valid(model)
    zero = (0,) * len(model.active)
    table = add_tables(h)
    normalized = abs(table.get(zero, 0.0)) > 0
    table.pop(zero, None)
    other = model.shifted_kappa(table)
    require_valid(other)
    hv = model.evaluate(table).real
    gaps, scales, align = [], [], []
    for k in range(model.q + 1):
        n = min(count, model.dim(k))
        a = spectrum(model, "Delta_tilde", k, n)
        b = spectrum(other, "Delta_tilde", k, n)
        gaps.append(float(np.abs(a.eigenvalues - b.eigenvalues).max()))
        scales.append(max(1.0, float(a.eigenvalues.max())))
        factor = np.repeat(np.exp(hv / 2), model.dim(k) // model.npoints)
        mapped = factor[:, None] * a.vectors
        start = 0
        for value, mult in a.multiplicities:
            stop = start + mult
            if stop < n or n == model.dim(k):
                U, V = mapped[:, start:stop], b.vectors[:, start:stop]
                gu = _mu_inner(other, k, U, U)
                gv = _mu_inner(other, k, V, V)
                cross = _mu_inner(other, k, U, V)
                lu = np.linalg.cholesky(gu)
                lv = np.linalg.cholesky(gv)
                X = la.solve_triangular(lu, cross, lower=True)
                M = la.solve_triangular(lv, X.conj().T, lower=True).conj().T
                align.append(float(la.svdvals(M).min()))
            start = stop
    return ConformalReport(
        count, normalized, tuple(gaps), tuple(scales), tuple(align), validate(model).taut, validate(other).taut
    )


# Hodge decomposition ------------------------------------------------------------


@dataclass(frozen=True)
class HodgeSplit:
    degree: int
    dim: int
    exact_rank: int
    coexact_rank: int
    harmonic: int
    orthogonality: float
    reliable: bool

    @property
    def complete(self) -> bool:
        return self.exact_rank + self.coexact_rank + self.harmonic == self.dim

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "dim": self.dim,
            "exact_rank": self.exact_rank,
            "coexact_rank": self.coexact_rank,
            "harmonic": self.harmonic,
            "orthogonality": self.orthogonality,
            "reliable": self.reliable,
            "complete": self.complete,
        }


def _range_basis(matrix) -> tuple[np.ndarray, bool]:
    m = _linalg.dense(matrix)
    if min(m.shape) == 0:
        return np.zeros((m.shape[0], 0), dtype=complex), True
    u, s, _ = la.svd(m, full_matrices=False)
    thr = HARMONIC_REL * max(1.0, float(s.max()))
    r = int(np.sum(s > thr))
    ok = int(np.sum(s > thr / GAP_RATIO)) == int(np.sum(s > thr * GAP_RATIO))
    return u[:, :r], ok


def hodge_split(model: CoframeModel, degree: int) -> HodgeSplit:
    """Ranks of im d̃, im δ̃ and ker Δ̃ on k-forms with their mutual orthogonality."""
    require_valid(model)
    q = model.q
    if not 0 <= degree <= q:
        raise DegreeError(f"degree {degree} outside 0..{q}")
    k = degree
    if k > 0:
        U1, ok1 = _range_basis(symmetrize(model, twisted_d(model, k - 1), k - 1, k))
    else:
        U1, ok1 = np.zeros((model.dim(k), 0), dtype=complex), True
    if k < q:
        U2, ok2 = _range_basis(symmetrize(model, twisted_delta(model, k + 1), k + 1, k))
    else:
        U2, ok2 = np.zeros((model.dim(k), 0), dtype=complex), True
    H, _ = _hermitian_laplacian(model, "Delta_tilde", k)
    vals = _eigvals(model, "Delta_tilde", k)
    hc = _count(vals, None)
    Y = la.eigh(H, subset_by_index=[0, hc.dimension - 1])[1] if hc.dimension else np.zeros((H.shape[0], 0))
    cross = 0.0
    for X, Z in ((U1, U2), (U1, Y), (U2, Y)):
        if X.shape[1] and Z.shape[1]:
            cross = max(cross, float(np.abs(X.conj().T @ Z).max()))
    return HodgeSplit(k, model.dim(k), U1.shape[1], U2.shape[1], hc.dimension, cross, ok1 and ok2 and hc.reliable)


# tautness and Weitzenböck -------------------------------------------------------------


def taut_kernel_quotient(model: CoframeModel) -> float:
    """Rayleigh quotient of ``e^{h/2}`` in Δ̃⁰ for ``κ = dh`` (weighted inner product)."""
    report = require_valid(model)
    if not report.taut:
        raise ValueError("κ is not exact; the model is not taut")
    h, _ = solve_exact_potential(model, model.kappa_values())
    v = np.exp(h.real / 2).astype(complex)
    A = laplacian(model, 0, twisted=True)
    num = _mu_inner(model, 0, v, A @ v)
    den = _mu_inner(model, 0, v, v)
    return float(abs(num) / den.real)


@dataclass(frozen=True)
class WeitzenbockReport:
    kappa_coclosed: float
    degree0: float | None
    flat: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {"kappa_coclosed": self.kappa_coclosed, "degree0": self.degree0, "flat": list(self.flat)}


def weitzenbock(model: CoframeModel) -> WeitzenbockReport:
    """Residuals of the Weitzenböck formula.

    Degree 0 compares ``Δ̃⁰`` with ``grad*grad + |κ|²/4`` when ``δ_b κ = 0``.
    On abelian models with ``κ = 0`` every degree compares ``Δ̃_k`` with the
    rough Laplacian ``∇*∇`` (zero curvature term).
    """
    require_valid(model)
    kap = model.kappa_values().real.astype(complex).ravel()
    d1 = delta_b(model, 1)
    kn = float(np.linalg.norm(kap))
    cocl = float(np.linalg.norm(d1 @ kap) / (_linalg.opnorm(d1) * kn)) if kn else 0.0
    deg0 = None
    if cocl < 1e-12:
        grad = assemble(model, "d", 0)
        rough = mu_adjoint(grad, model).matrix @ grad.matrix
        G1 = np.asarray(model.gram.gram(1), dtype=float)
        kv = model.kappa_values().real
        sq = np.einsum("pi,ij,pj->p", kv, G1, kv)
        deg0 = _linalg.compare(laplacian(model, 0, twisted=True), rough + 0.25 * sp.diags_array(sq))
    flat: list[float] = []
    abelian = not np.any(structure_tensor(model))
    if abelian and not np.any(kap):
        for k in range(model.q + 1):
            flat.append(_linalg.compare(laplacian(model, k, twisted=True), connection_laplacian(model, k)))
    return WeitzenbockReport(cocl, None if deg0 is None else float(deg0), tuple(flat))


__all__ = [
    "CohomologyReport",
    "ConformalReport",
    "DualityReport",
    "HarmonicCount",
    "HodgeSplit",
    "SpectrumResult",
    "WeitzenbockReport",
    "cohomology_report",
    "conformal_compare",
    "duality_check",
    "group_multiplicities",
    "harmonic_dimension",
    "hodge_split",
    "middle_union_gap",
    "signature",
    "spectrum",
    "taut_kernel_quotient",
    "weitzenbock",
]

"""Matrices of the basic and twisted operators on a coframe model.

A k-form is stored as a flat complex vector with index
``point * C(q, k) + component``.  Every operator is a sparse matrix between
two such spaces; degrees outside ``0..q`` have dimension zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _linalg
from .errors import DegreeError, OrientationError
from .exterior import _contract_unit, _wedge_unit, dimension, multi_indices, basis_position, wedge_basis
from .exterior import StarTable
from .model import BasicForm, CoframeModel, differentiation_matrix, require_valid, structure_tensor

OPERATOR_NAMES = (
    "d",
    "wedge_kappa",
    "contract_kappa",
    "star",
    "delta_b",
    "delta_T",
    "d_tilde",
    "delta_tilde",
    "D_b",
    "Delta_b",
    "Delta_tilde",
    "star_involution",
)


def _codomain(name: str, k: int, q: int):
    if name in ("d", "wedge_kappa", "d_tilde"):
        return k + 1
    if name in ("contract_kappa", "delta_b", "delta_T", "delta_tilde"):
        return k - 1
    if name in ("star", "star_involution"):
        return q - k
    if name == "D_b":
        return (k + 1, k - 1)
    return k


@dataclass(frozen=True, eq=False)
class OperatorBlock:
    """One assembled operator between fixed degrees of one model."""

    name: str
    domain: int
    codomain: int | tuple[int, int]
    matrix: sp.csr_array
    model_hash: str

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def _check(self, other: OperatorBlock) -> None:
        if self.model_hash != other.model_hash:
            raise ValueError("blocks belong to different models")

    def __matmul__(self, other):
        if isinstance(other, OperatorBlock):
            self._check(other)
            if other.codomain != self.domain:
                raise DegreeError(
                    f"cannot compose {self.name} (from degree {self.domain}) "
                    f"after {other.name} (into degree {other.codomain})"
                )
            return OperatorBlock(
                f"{self.name}*{other.name}", other.domain, self.codomain, self.matrix @ other.matrix, self.model_hash
            )
        if isinstance(other, BasicForm):
            return self.apply(other)
        return self.matrix @ other

    def _combine(self, other: OperatorBlock, sign: int, op: str) -> OperatorBlock:
        self._check(other)
        if (self.domain, self.codomain) != (other.domain, other.codomain):
            raise DegreeError(f"cannot combine {self.name} and {other.name}: degrees differ")
        return OperatorBlock(
            f"({self.name}{op}{other.name})", self.domain, self.codomain, self.matrix + sign * other.matrix, self.model_hash
        )

    def __add__(self, other):
        return self._combine(other, 1, "+")

    def __sub__(self, other):
        return self._combine(other, -1, "-")

    def __rmul__(self, scalar):
        return OperatorBlock(self.name, self.domain, self.codomain, scalar * self.matrix, self.model_hash)

    def apply(self, form: BasicForm) -> BasicForm:
        if form.degree != self.domain:
            raise DegreeError(f"{self.name} acts on degree {self.domain}, got a {form.degree}-form")
        if isinstance(self.codomain, tuple):
            raise DegreeError("D_b maps into two degrees; apply its blocks separately")
        return BasicForm(form.model, self.codomain, self.matrix @ form.vector)


# raw sparse builders -----------------------------------------------------------


def _cache(model: CoframeModel) -> dict:
    return model._cache.setdefault("raw", {})


def _check_degree(model: CoframeModel, k: int) -> None:
    if not 0 <= k <= model.q:
        raise DegreeError(f"degree {k} outside 0..{model.q}")


def _zeros(model: CoframeModel, k_out: int, k_in: int) -> sp.csr_array:
    return sp.csr_array((model.dim(k_out), model.dim(k_in)), dtype=complex)


def grid_derivative(model: CoframeModel, pos: int, nyquist: str = "keep") -> sp.csr_array:
    """Derivative along active axis ``pos`` acting on grid functions."""
    key = ("grid_derivative", pos, nyquist)
    store = _cache(model)
    if key not in store:
        shape = model.grid_shape
        a = model.active[pos]
        before = int(np.prod(shape[:pos], dtype=int))
        after = int(np.prod(shape[pos + 1 :], dtype=int))
        D = sp.csr_array(differentiation_matrix(a.n, a.period, nyquist))
        store[key] = sp.csr_array(sp.kron(sp.kron(sp.identity(before), D), sp.identity(after)))
    return store[key]


def structure_action(model: CoframeModel, k: int) -> np.ndarray:
    """Pointwise matrix of ``d`` on constant k-forms, from the structure constants."""
    q = model.q
    S = structure_tensor(model)
    rows = basis_position(q, k + 1)
    out = np.zeros((dimension(q, k + 1), dimension(q, k)))
    for col, I in enumerate(multi_indices(q, k)):
        # d(e^{i1}∧...∧e^{ik}) = Σ_m (-1)^m e^{i1}∧..∧de^{im}∧..∧e^{ik}
        for m, i in enumerate(I):
            prefix, suffix = I[:m], I[m + 1 :]
            for a in range(1, q + 1):
                for b in range(a + 1, q + 1):
                    c = S[i - 1, a - 1, b - 1]
                    if c == 0:
                        continue
                    left = wedge_basis(prefix, (a, b), q)
                    if left is None:
                        continue
                    right = wedge_basis(left[1], suffix, q)
                    if right is None:
                        continue
                    out[rows[right[1]], col] += (-1) ** m * left[0] * right[0] * c
    return out


def exterior_derivative(model: CoframeModel, k: int, nyquist: str = "keep") -> sp.csr_array:
    """Matrix of ``d`` from k-forms to (k+1)-forms.

    ``d(f e^I) = Σ_a (∂_a f) e^{c_a} ∧ e^I + f d(e^I)``.
    """
    key = ("d", k, nyquist)
    store = _cache(model)
    if key in store:
        return store[key]
    q = model.q
    if k < -1 or k > q:
        raise DegreeError(f"degree {k} outside 0..{q}")
    if k == q or k == -1:
        out = _zeros(model, k + 1, k)
    else:
        P = model.npoints
        out = sp.kron(sp.identity(P), sp.csr_array(structure_action(model, k)))
        for pos, a in enumerate(model.active):
            W = sp.csr_array(_wedge_unit(q, k, a.index).astype(float))
            out = out + sp.kron(grid_derivative(model, pos, nyquist), W)
        out = sp.csr_array(out, dtype=complex)
    store[key] = out
    return out


def _pointwise(model: CoframeModel, coeffs: np.ndarray, units) -> sp.csr_array:
    # Σ_i kron(diag(coeffs[:, i]), units[i])
    out = None
    for i, unit in enumerate(units):
        c = coeffs[:, i]
        if not np.any(c) or not np.any(unit):
            continue
        term = sp.kron(sp.diags_array(c), sp.csr_array(unit.astype(float)))
        out = term if out is None else out + term
    return out


def wedge_kappa(model: CoframeModel, k: int) -> sp.csr_array:
    """Pointwise multiplication ``κ ∧`` from k- to (k+1)-forms."""
    key = ("wedge_kappa", k)
    store = _cache(model)
    if key not in store:
        if k < 0 or k >= model.q:
            out = _zeros(model, k + 1, k)
        else:
            kap = model.kappa_values().real
            units = [_wedge_unit(model.q, k, i) for i in range(1, model.q + 1)]
            out = _pointwise(model, kap, units)
            out = _zeros(model, k + 1, k) if out is None else sp.csr_array(out, dtype=complex)
        store[key] = out
    return store[key]


def contract_kappa(model: CoframeModel, k: int) -> sp.csr_array:
    """Contraction ``κ ⌟`` with the metric dual of ``κ``, from k- to (k-1)-forms."""
    key = ("contract_kappa", k)
    store = _cache(model)
    if key not in store:
        if k <= 0 or k > model.q:
            out = _zeros(model, k - 1, k)
        else:
            vec = model.kappa_values().real @ np.asarray(model.gram.cometric, dtype=float).T
            units = [_contract_unit(model.q, k, i) for i in range(1, model.q + 1)]
            out = _pointwise(model, vec, units)
            out = _zeros(model, k - 1, k) if out is None else sp.csr_array(out, dtype=complex)
        store[key] = out
    return store[key]


def star_table(model: CoframeModel) -> StarTable:
    if not model.oriented:
        raise OrientationError("model is not transversally oriented; no star operator")
    store = _cache(model)
    if "star_table" not in store:
        store["star_table"] = StarTable(model.gram, model.orientation)
    return store["star_table"]


def star(model: CoframeModel, k: int) -> sp.csr_array:
    """Transversal Hodge star from k- to (q-k)-forms."""
    key = ("star", k)
    store = _cache(model)
    if key not in store:
        _check_degree(model, k)
        S = star_table(model).matrix(k).astype(float)
        store[key] = sp.csr_array(sp.kron(sp.identity(model.npoints), sp.csr_array(S)), dtype=complex)
    return store[key]


def delta_b(model: CoframeModel, k: int) -> sp.csr_array:
    """``δ_b = (-1)^{q(k+1)+1} ⋆ (d - κ∧) ⋆`` from k- to (k-1)-forms."""
    key = ("delta_b", k)
    store = _cache(model)
    if key not in store:
        q = model.q
        star_table(model)
        if k <= 0 or k > q:
            out = _zeros(model, k - 1, k)
        else:
            j = q - k
            twisted = exterior_derivative(model, j) - wedge_kappa(model, j)
            sign = (-1) ** (q * (k + 1) + 1)
            out = sp.csr_array(sign * (star(model, j + 1) @ twisted @ star(model, k)))
        store[key] = out
    return store[key]


def twisted_d(model: CoframeModel, k: int) -> sp.csr_array:
    return sp.csr_array(exterior_derivative(model, k) - 0.5 * wedge_kappa(model, k))


def twisted_delta(model: CoframeModel, k: int) -> sp.csr_array:
    return sp.csr_array(delta_b(model, k) - 0.5 * contract_kappa(model, k))


def laplacian(model: CoframeModel, k: int, twisted: bool) -> sp.csr_array:
    key = ("Delta_tilde" if twisted else "Delta_b", k)
    store = _cache(model)
    if key not in store:
        _check_degree(model, k)
        dd = twisted_d if twisted else exterior_derivative
        de = twisted_delta if twisted else delta_b
        out = de(model, k + 1) @ dd(model, k) if k < model.q else _zeros(model, k, k)
        if k > 0:
            out = out + dd(model, k - 1) @ de(model, k)
        store[key] = sp.csr_array(out)
    return store[key]


def star_involution(model: CoframeModel, k: int) -> sp.csr_array:
    """``★ = i^{k(k-1)+q/2} ⋆`` on k-forms (even codimension only)."""
    if model.q % 2:
        raise DegreeError("the involution ★ needs even codimension")
    return sp.csr_array(1j ** ((k * (k - 1) + model.q // 2) % 4) * star(model, k))


def _raw(model: CoframeModel, name: str, k: int) -> sp.csr_array:
    if name == "d":
        return exterior_derivative(model, k)
    if name == "wedge_kappa":
        return wedge_kappa(model, k)
    if name == "contract_kappa":
        return contract_kappa(model, k)
    if name == "star":
        return star(model, k)
    if name == "delta_b":
        return delta_b(model, k)
    if name == "delta_T":
        return sp.csr_array(delta_b(model, k) - contract_kappa(model, k))
    if name == "d_tilde":
        return twisted_d(model, k)
    if name == "delta_tilde":
        return twisted_delta(model, k)
    if name == "D_b":
        return sp.csr_array(sp.vstack([twisted_d(model, k), twisted_delta(model, k)]))
    if name == "Delta_b":
        return laplacian(model, k, twisted=False)
    if name == "Delta_tilde":
        return laplacian(model, k, twisted=True)
    if name == "star_involution":
        return star_involution(model, k)
    raise ValueError(f"unknown operator {name!r}; expected one of {', '.join(OPERATOR_NAMES)}")


def assemble(model: CoframeModel, name: str, k: int) -> OperatorBlock:
    """Assemble operator ``name`` on k-forms of a validated model.

    Raises
    ------
    ModelValidationError
        The model fails a validation gate.
    DegreeError
        ``k`` outside ``0..q``, or ``star_involution`` with odd ``q``.
    OrientationError
        A star-based operator on a non-oriented model.
    """
    require_valid(model)
    if name not in OPERATOR_NAMES:
        raise ValueError(f"unknown operator {name!r}; expected one of {', '.join(OPERATOR_NAMES)}")
    _check_degree(model, k)
    return OperatorBlock(name, k, _codomain(name, k, model.q), _raw(model, name, k), model.fingerprint)


def full_dirac(model: CoframeModel) -> sp.csr_array:
    """``D_b = d̃ + δ̃`` on the direct sum of all degrees (block layout by degree)."""
    q = model.q
    offsets = np.cumsum([0] + [model.dim(k) for k in range(q + 1)])
    blocks = [[None] * (q + 1) for _ in range(q + 1)]
    for k in range(q + 1):
        if k < q:
            blocks[k + 1][k] = twisted_d(model, k)
        if k > 0:
            blocks[k - 1][k] = twisted_delta(model, k)
    for k in range(q + 1):
        blocks[k][k] = _zeros(model, k, k)
    out = sp.csr_array(sp.block_array(blocks, format="csr"))
    assert out.shape == (offsets[-1], offsets[-1])
    return out


# weighted inner product --------------------------------------------------------


def weight_matrix(model: CoframeModel, k: int, power: float = 1.0) -> sp.csr_array:
    """``W_k^power`` for the Gram operator ``W_k = diag(μ) ⊗ G_k`` of the model inner product.

    The global factor ``sqrt(det G)/npoints`` is common to all degrees and
    cancels from adjoints, so it is left out.
    """
    key = ("weight", k, power)
    store = _cache(model)
    if key not in store:
        if not 0 <= k <= model.q:
            store[key] = sp.csr_array((0, 0), dtype=complex)
            return store[key]
        mu = model.weight()
        if not np.all(mu > 0):
            raise ValueError("degenerate weight")
        G = np.asarray(model.gram.gram(k), dtype=float)
        if power == 1.0:
            Gp = G
        elif power == -1.0:
            Gp = np.linalg.inv(G)
        elif power in (0.5, -0.5):
            Gp = _linalg.hermitian_sqrt(G, inverse=power < 0)
        else:
            raise ValueError("power must be ±1 or ±1/2")
        store[key] = sp.csr_array(sp.kron(sp.diags_array(mu**power), sp.csr_array(Gp)), dtype=complex)
    return store[key]


def _weight_of(model: CoframeModel, degrees, power: float) -> sp.csr_array:
    if isinstance(degrees, tuple):
        return sp.csr_array(sp.block_diag([weight_matrix(model, j, power) for j in degrees]))
    return weight_matrix(model, degrees, power)


def mu_adjoint(block: OperatorBlock, model: CoframeModel) -> OperatorBlock:
    """Adjoint with respect to ``<u, v> = mean_x μ <u, v>_{G_k} sqrt(det G)``."""
    if block.model_hash != model.fingerprint:
        raise ValueError("block does not belong to this model")
    Winv = _weight_of(model, block.domain, -1.0)
    Wout = _weight_of(model, block.codomain, 1.0)
    mat = sp.csr_array(Winv @ block.matrix.conj().T @ Wout)
    name = block.name[:-3] if block.name.endswith("^mu") else block.name + "^mu"
    return OperatorBlock(name, block.codomain, block.domain, mat, block.model_hash)


def symmetrize(model: CoframeModel, matrix, k: int, k_out: int | None = None):
    """``W^{1/2} A W^{-1/2}``: the matrix in coordinates orthonormal for the model inner product."""
    k_out = k if k_out is None else k_out
    return weight_matrix(model, k_out, 0.5) @ matrix @ weight_matrix(model, k, -0.5)


def connection_laplacian(model: CoframeModel, k: int) -> sp.csr_array:
    """Rough Laplacian ``∇*∇`` on k-forms of an abelian model (flat Levi-Civita connection)."""
    if model.structure and np.any(structure_tensor(model)):
        raise ValueError("the flat connection Laplacian needs an abelian model")
    _check_degree(model, k)
    q, P = model.q, model.npoints
    C = dimension(q, k)
    nabla = sp.csr_array((P * q * C, P * C), dtype=complex)
    for pos, a in enumerate(model.active):
        e = np.zeros((q, 1))
        e[a.index - 1, 0] = 1.0
        nabla = nabla + sp.kron(grid_derivative(model, pos), sp.kron(sp.csr_array(e), sp.identity(C)))
    mu = model.weight()
    Gk = np.asarray(model.gram.gram(k), dtype=float)
    G1 = np.asarray(model.gram.gram(1), dtype=float) if q else np.zeros((0, 0))
    Wout = sp.kron(sp.diags_array(mu), sp.csr_array(np.kron(G1, Gk)))
    Winv = weight_matrix(model, k, -1.0)
    return sp.csr_array(Winv @ nabla.conj().T @ Wout @ nabla)


# identity suite ----------------------------------------------------------------


def lowpass_basis(model: CoframeModel, k: int, fraction: float = 0.25) -> np.ndarray:
    """Orthonormal columns spanning k-forms whose Fourier modes satisfy ``|m_a| < fraction·N_a``.

    On this subspace products with trigonometric-polynomial coefficients do
    not alias, so the continuum Leibniz rule holds for the collocated operators.
    """
    factors = []
    for a in model.active:
        cutoff = max(1, int(fraction * a.n))
        modes = [m for m in range(-cutoff + 1, cutoff)]
        x = np.arange(a.n) / a.n
        factors.append(np.exp(2j * np.pi * np.outer(x, modes)) / np.sqrt(a.n))
    B = np.ones((1, 1), dtype=complex)
    for f in factors:
        B = np.kron(B, f)
    return np.kron(B, np.eye(dimension(model.q, k)))


@dataclass(frozen=True)
class IdentityResidual:
    name: str
    degree: int
    residual: float


@dataclass(frozen=True)
class IdentityReport:
    model_name: str
    residuals: tuple[IdentityResidual, ...]
    subspace: str = "full"

    def worst(self) -> float:
        return max((r.residual for r in self.residuals), default=0.0)

    def failures(self, tol: float) -> list[IdentityResidual]:
        return [r for r in self.residuals if not r.residual < tol]

    def by_name(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for r in self.residuals:
            out[r.name] = max(out.get(r.name, 0.0), r.residual)
        return out

    def to_dict(self) -> dict:
        return {
            "model": self.model_name,
            "subspace": self.subspace,
            "worst": self.worst(),
            "residuals": [{"identity": r.name, "degree": r.degree, "residual": r.residual} for r in self.residuals],
        }


def identity_suite(model: CoframeModel, subspace: str = "full") -> IdentityReport:
    """Relative residuals of the operator identities on every degree.

    Parameters
    ----------
    subspace
        ``"full"`` compares whole matrices; ``"lowpass"`` restricts every
        identity to the inputs spanned by :func:`lowpass_basis`.

    Star-based identities are skipped on non-oriented models and the ★
    identities on odd codimension.
    """
    require_valid(model)
    if subspace not in ("full", "lowpass"):
        raise ValueError("subspace must be 'full' or 'lowpass'")
    q = model.q
    out: list[IdentityResidual] = []
    bases: dict[int, np.ndarray] = {}

    def restrict(k, mat):
        if subspace == "full":
            return mat
        if k not in bases:
            bases[k] = lowpass_basis(model, k)
        return mat @ bases[k]

    def equal(name, k, lhs, rhs):
        lhs, rhs = restrict(k, lhs), restrict(k, rhs)
        out.append(IdentityResidual(name, k, float(_linalg.compare(lhs, rhs))))

    def vanishes(name, k, outer, inner):
        # outer∘inner = 0, relative to |outer|·|inner|
        inner_r = restrict(k, inner)
        out.append(IdentityResidual(name, k, float(_linalg.relative_residual(outer @ inner_r, outer, inner_r))))

    d = lambda k: exterior_derivative(model, k)  # noqa: E731
    dt = lambda k: twisted_d(model, k)  # noqa: E731
    de = lambda k: twisted_delta(model, k)  # noqa: E731
    for k in range(q - 1):
        vanishes("d^2", k, d(k + 1), d(k))
        vanishes("d_tilde^2", k, dt(k + 1), dt(k))
    if model.oriented:
        for k in range(2, q + 1):
            vanishes("delta_tilde^2", k, de(k - 1), de(k))
        _star_identities(model, equal, vanishes)
        for k in range(q):
            adj = mu_adjoint(assemble(model, "d_tilde", k), model)
            equal("delta_tilde=mu_adjoint(d_tilde)", k + 1, de(k + 1), adj.matrix)
    return IdentityReport(model.name, tuple(out), subspace)


def _star_identities(model: CoframeModel, equal, vanishes) -> None:
    q = model.q
    st = lambda k: star(model, k)  # noqa: E731
    wk = lambda k: wedge_kappa(model, k)  # noqa: E731
    ck = lambda k: contract_kappa(model, k)  # noqa: E731
    db = lambda k: delta_b(model, k)  # noqa: E731
    dt = lambda k: twisted_d(model, k)  # noqa: E731
    de = lambda k: twisted_delta(model, k)  # noqa: E731
    dk = lambda k: sp.csr_array(exterior_derivative(model, k) - wedge_kappa(model, k))  # noqa: E731
    for k in range(q):
        s = (-1) ** k
        equal("(1) contract*star", k, ck(q - k) @ st(k), s * (st(k + 1) @ wk(k)))
        equal("(3) delta_b*star", k, db(q - k) @ st(k), -s * (st(k + 1) @ dk(k)))
        equal("(5) delta_tilde*star", k, de(q - k) @ st(k), -s * (st(k + 1) @ dt(k)))
        equal("(7) star*d_tilde", k, st(k + 1) @ dt(k), -s * (de(q - k) @ st(k)))
    for k in range(1, q + 1):
        s = (-1) ** k
        equal("(2) star*contract", k, st(k - 1) @ ck(k), -s * (wk(q - k) @ st(k)))
        equal("(4) star*delta_b", k, st(k - 1) @ db(k), s * (dk(q - k) @ st(k)))
        equal("(6) star*delta_tilde", k, st(k - 1) @ de(k), s * (dt(q - k) @ st(k)))
        equal("(8) d_tilde*star", k, dt(q - k) @ st(k), s * (st(k - 1) @ de(k)))
    lap = lambda j: laplacian(model, j, twisted=True)  # noqa: E731
    for k in range(q + 1):
        equal("star*Delta_tilde", k, st(k) @ lap(k), lap(q - k) @ st(k))
    if q % 2 == 0:
        inv = lambda k: star_involution(model, k)  # noqa: E731
        for k in range(q + 1):
            equal("involution^2", k, inv(q - k) @ inv(k), sp.identity(model.dim(k), dtype=complex, format="csr"))
            # ★D_b = -D_b★ restricted to k-forms, components in degrees q-k-1 and q-k+1
            if k < q:
                equal("involution*D_b+D_b*involution", k, inv(k + 1) @ dt(k), -(de(q - k) @ inv(k)))
            if k > 0:
                equal("involution*D_b+D_b*involution", k, inv(k - 1) @ de(k), -(dt(q - k) @ inv(k)))

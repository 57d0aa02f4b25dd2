"""Coframe models of a reduced basic complex.

A model is a q-dimensional coframe ``e^1 .. e^q`` with constant structure
two-forms ``de^k = Σ c e^i ∧ e^j``, a set of periodic *active* coordinates
``x_a`` (each with ``dx_a = e^{c_a}`` for one coframe index ``c_a``), a
constant transverse metric and a mean-curvature one-form ``κ`` given as
Fourier tables over the active coordinates.  Functions live on the uniform
tensor grid of the active coordinates (C order, axes in the listed order).
"""

from __future__ import annotations

import hashlib
import json
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from math import comb
from pathlib import Path

import numpy as np

from .errors import ModelValidationError, NotClosedError, SchemaError
from .exterior import MetricError, MetricGram

FourierTable = dict[tuple[int, ...], complex]

MODEL_SCHEMA_VERSION = 1

DSQ_TOL = 1e-12
DKAPPA_TOL = 1e-12
REAL_TOL = 1e-12
EXACT_TOL = 1e-10


@dataclass(frozen=True)
class ActiveAxis:
    """Periodic coordinate ``x`` with ``dx = e^index``, sampled at ``n`` points."""

    index: int
    period: float = 1.0
    n: int = 32

    def __post_init__(self):
        object.__setattr__(self, "index", int(self.index))
        object.__setattr__(self, "period", float(self.period))
        object.__setattr__(self, "n", int(self.n))

    @property
    def points(self) -> np.ndarray:
        return self.period * np.arange(self.n) / self.n

    @property
    def wavenumbers(self) -> np.ndarray:
        """Signed integer wavenumbers in FFT order; the Nyquist entry is ``-n/2``."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n)


def _freeze_table(table) -> FourierTable:
    out = {}
    for mode, coef in dict(table).items():
        if isinstance(mode, (int, np.integer)):
            mode = (int(mode),)
        out[tuple(int(m) for m in mode)] = complex(coef)
    return out


@dataclass(frozen=True, eq=False)
class CoframeModel:
    """Finite presentation of a basic complex.

    Parameters
    ----------
    q
        Codimension, the number of coframe one-forms.
    structure
        Entries ``(k, i, j, value)`` meaning ``de^k`` contains ``value e^i ∧ e^j``.
    active
        Active periodic coordinates.
    metric
        q×q frame metric ``g(e_i, e_j)``; identity when omitted.
    kappa
        ``{coframe index: {mode tuple: coefficient}}`` with value
        ``Σ c exp(2πi Σ m_a x_a / L_a)``.
    orientation
        ``+1`` or ``-1`` for a transversally oriented model, ``0`` otherwise.
    """

    q: int
    structure: tuple = ()
    active: tuple = ()
    metric: np.ndarray | None = None
    kappa: Mapping = field(default_factory=dict)
    orientation: int = 1
    name: str = "custom"
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        q = int(self.q)
        object.__setattr__(self, "q", q)
        structure = tuple((int(k), int(i), int(j), float(v)) for k, i, j, v in self.structure)
        object.__setattr__(self, "structure", structure)
        active = tuple(a if isinstance(a, ActiveAxis) else ActiveAxis(*a) for a in self.active)
        object.__setattr__(self, "active", active)
        metric = np.eye(q) if self.metric is None else np.array(self.metric, dtype=float)
        metric.setflags(write=False)
        object.__setattr__(self, "metric", metric)
        kappa = {int(i): _freeze_table(t) for i, t in dict(self.kappa).items()}
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "orientation", int(self.orientation))

    def __eq__(self, other):
        if not isinstance(other, CoframeModel):
            return NotImplemented
        return dumps(self) == dumps(other)

    def __hash__(self):
        return hash(self.fingerprint)

    # grid -----------------------------------------------------------------
    @property
    def grid_shape(self) -> tuple[int, ...]:
        return tuple(a.n for a in self.active)

    @property
    def npoints(self) -> int:
        return int(np.prod(self.grid_shape, dtype=int))

    @property
    def oriented(self) -> bool:
        return self.orientation != 0

    def dim(self, k: int) -> int:
        """Number of degrees of freedom of a k-form."""
        if k < 0 or k > self.q:
            return 0
        return self.npoints * comb(self.q, k)

    def axis_position(self, index: int) -> int:
        """Position in ``active`` of the coordinate dual to ``e^index``."""
        for pos, a in enumerate(self.active):
            if a.index == index:
                return pos
        raise ValueError(f"coframe index {index} is not an active coordinate")

    def coordinates(self) -> list[np.ndarray]:
        """Flattened grid coordinates, one array of length ``npoints`` per axis."""
        if not self.active:
            return []
        mesh = np.meshgrid(*(a.points for a in self.active), indexing="ij")
        return [m.ravel() for m in mesh]

    # geometry ---------------------------------------------------------------
    @property
    def gram(self) -> MetricGram:
        if "gram" not in self._cache:
            self._cache["gram"] = MetricGram(self.metric)
        return self._cache["gram"]

    @property
    def fingerprint(self) -> str:
        if "fingerprint" not in self._cache:
            self._cache["fingerprint"] = hashlib.sha256(dumps(self).encode()).hexdigest()
        return self._cache["fingerprint"]

    def evaluate(self, table: Mapping) -> np.ndarray:
        """Grid values (length ``npoints``) of a Fourier table."""
        return evaluate_table(self.active, table)

    def kappa_values(self) -> np.ndarray:
        """``κ`` sampled on the grid, shape ``(npoints, q)``."""
        if "kappa" not in self._cache:
            out = np.zeros((self.npoints, self.q), dtype=complex)
            for i, table in self.kappa.items():
                if 1 <= i <= self.q:
                    out[:, i - 1] = self.evaluate(table)
            out.setflags(write=False)
            self._cache["kappa"] = out
        return self._cache["kappa"]

    def weight(self) -> np.ndarray:
        """Inner-product weight ``μ = exp(-h)`` with ``dh = κ - modular``."""
        if "weight" not in self._cache:
            omega = self.kappa_values() - modular_form(self)[None, :]
            h, res = solve_exact_potential(self, omega)
            if res > 0 and res >= EXACT_TOL * form_norm(self, omega):
                raise ModelValidationError("κ - modular is not exact; no symmetrizing weight")
            if np.abs(h.imag).max(initial=0.0) > 1e-8 * max(1.0, np.abs(h).max(initial=0.0)):
                raise ModelValidationError("weight potential is not real")
            mu = np.exp(-h.real)
            if not np.all(mu > 0):
                raise ModelValidationError("degenerate weight")
            mu.setflags(write=False)
            self._cache["weight"] = mu
        return self._cache["weight"]

    # derived models ---------------------------------------------------------
    def with_grid(self, n) -> CoframeModel:
        """Copy with grid sizes replaced (an int applies to every axis)."""
        sizes = [n] * len(self.active) if isinstance(n, (int, np.integer)) else list(n)
        if len(sizes) != len(self.active):
            raise ValueError("one grid size per active axis expected")
        active = tuple(ActiveAxis(a.index, a.period, int(s)) for a, s in zip(self.active, sizes))
        return self._replace(active=active)

    def refined(self) -> CoframeModel:
        return self.with_grid([2 * a.n for a in self.active])

    def shifted_kappa(self, h_table: Mapping, name: str | None = None) -> CoframeModel:
        """Model with ``κ + dh`` for a function ``h`` given as a Fourier table."""
        kappa = {i: dict(t) for i, t in self.kappa.items()}
        for pos, axis in enumerate(self.active):
            dtab = derivative_table(h_table, self.active, pos)
            if not dtab:
                continue
            target = kappa.setdefault(axis.index, {})
            for mode, c in dtab.items():
                target[mode] = target.get(mode, 0j) + c
        return self._replace(kappa=kappa, name=name or self.name)

    def _replace(self, **changes) -> CoframeModel:
        fields = dict(
            q=self.q,
            structure=self.structure,
            active=self.active,
            metric=self.metric,
            kappa=self.kappa,
            orientation=self.orientation,
            name=self.name,
        )
        fields.update(changes)
        return CoframeModel(**fields)


# Fourier tables ---------------------------------------------------------------


def evaluate_table(active: Sequence[ActiveAxis], table: Mapping) -> np.ndarray:
    shape = tuple(a.n for a in active)
    out = np.zeros(shape, dtype=complex)
    for mode, c in _freeze_table(table).items():
        if len(mode) != len(active):
            raise ValueError(f"mode {mode} does not match {len(active)} active axes")
        term = np.array(complex(c))
        for m, a in zip(mode, active):
            term = np.multiply.outer(term, np.exp(2j * np.pi * m * a.points / a.period))
        out += term
    return out.ravel()


def derivative_table(table: Mapping, active: Sequence[ActiveAxis], pos: int) -> FourierTable:
    """Fourier table of ``∂h/∂x_pos``; modes constant along the axis drop out."""
    axis = active[pos]
    out = {}
    for mode, c in _freeze_table(table).items():
        if mode[pos] != 0:
            out[mode] = c * 2j * np.pi * mode[pos] / axis.period
    return out


def trig_table(kind: str, amplitude: float, modes: Sequence[int]) -> FourierTable:
    """Table of ``amplitude * kind(2π Σ m_a x_a / L_a)`` for kind ``sin``/``cos``/``exp``."""
    m = tuple(int(x) for x in modes)
    neg = tuple(-x for x in m)
    a = float(amplitude)
    if kind == "exp":
        return {m: complex(a)}
    if all(x == 0 for x in m):
        return {m: complex(a)} if kind == "cos" else {}
    if kind == "sin":
        return {m: -0.5j * a, neg: 0.5j * a}
    if kind == "cos":
        return {m: 0.5 * a, neg: 0.5 * a}
    raise ValueError(f"unknown term kind {kind!r}")


def add_tables(*tables: Mapping) -> FourierTable:
    out: FourierTable = {}
    for t in tables:
        for mode, c in _freeze_table(t).items():
            out[mode] = out.get(mode, 0j) + c
    return out


# spectral differentiation -----------------------------------------------------


def spectral_derivative(samples, axis: int = 0, period: float = 1.0, nyquist: str = "keep") -> np.ndarray:
    """Fourier derivative of periodic samples along ``axis``.

    Parameters
    ----------
    nyquist
        ``"keep"`` differentiates the Nyquist mode with the signed wavenumber
        ``-n/2``; ``"zero"`` discards it.
    """
    samples = np.asarray(samples)
    n = samples.shape[axis]
    if n % 2:
        raise ValueError("grid size must be even")
    k = np.fft.fftfreq(n, d=1.0 / n)
    if nyquist == "zero":
        k[n // 2] = 0.0
    elif nyquist != "keep":
        raise ValueError("nyquist must be 'keep' or 'zero'")
    mult = 2j * np.pi * k / period
    shape = [1] * samples.ndim
    shape[axis] = n
    return np.fft.ifft(np.fft.fft(samples, axis=axis) * mult.reshape(shape), axis=axis)


def differentiation_matrix(n: int, period: float = 1.0, nyquist: str = "keep") -> np.ndarray:
    """Dense ``n×n`` matrix of :func:`spectral_derivative`."""
    return spectral_derivative(np.eye(n), axis=0, period=period, nyquist=nyquist)


def partial(model: CoframeModel, values, index: int) -> np.ndarray:
    """Derivative of grid values along the coordinate dual to ``e^index``."""
    pos = model.axis_position(index)
    grid = np.asarray(values).reshape(model.grid_shape)
    return spectral_derivative(grid, axis=pos, period=model.active[pos].period).ravel()


# forms ------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BasicForm:
    """Degree-k form: complex coefficients of shape ``(npoints, C(q, k))``."""

    model: CoframeModel
    degree: int
    coeffs: np.ndarray
    real: bool = False

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        shape = (self.model.npoints, comb(self.model.q, self.degree))
        if c.size == shape[0] * shape[1] and c.shape != shape:
            c = c.reshape(shape)
        if c.shape != shape:
            raise ValueError(f"coefficients have shape {c.shape}, expected {shape}")
        if self.real and np.abs(c.imag).max(initial=0.0) >= REAL_TOL:
            raise ValueError("form flagged real has imaginary coefficients")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_vector(cls, model: CoframeModel, degree: int, vector, real: bool = False) -> BasicForm:
        return cls(model, degree, np.asarray(vector).reshape(model.npoints, -1), real)

    @property
    def vector(self) -> np.ndarray:
        """Flat layout: point-major, Λ^k component fastest."""
        return self.coeffs.ravel()

    def is_real(self, tol: float = REAL_TOL) -> bool:
        return bool(np.abs(self.coeffs.imag).max(initial=0.0) < tol)


def form_norm(model: CoframeModel, values, degree: int = 1, weight=None) -> float:
    """Model L² norm: grid mean of ``μ <u, u>_G`` times ``sqrt(det G)``, square-rooted."""
    u = np.asarray(values).reshape(model.npoints, -1)
    g = model.gram.gram(degree)
    pointwise = np.einsum("pi,ij,pj->p", u.conj(), g, u).real
    if weight is not None:
        pointwise = pointwise * weight
    return float(np.sqrt(max(pointwise.mean() * model.gram.volume, 0.0))) if u.size else 0.0


# structure --------------------------------------------------------------------


def structure_tensor(model: CoframeModel) -> np.ndarray:
    """``S[k-1, i-1, j-1]`` antisymmetric in ``(i, j)`` with ``de^k = Σ_{i<j} S^k_ij e^i∧e^j``."""
    q = model.q
    S = np.zeros((q, q, q))
    for k, i, j, v in model.structure:
        S[k - 1, i - 1, j - 1] += v
        S[k - 1, j - 1, i - 1] -= v
    return S


def modular_form(model: CoframeModel) -> np.ndarray:
    """Constant one-form with components ``Σ_j S^j_{ij}``."""
    S = structure_tensor(model)
    return np.einsum("jij->i", S)


def solve_exact_potential(model: CoframeModel, omega) -> tuple[np.ndarray, float]:
    """Least-squares potential of a closed one-form.

    Parameters
    ----------
    omega
        :class:`BasicForm` of degree 1 or grid values of shape ``(npoints, q)``.

    Returns
    -------
    h, residual
        Mean-zero grid values of ``h`` and ``‖dh - ω‖`` in the model L² norm.
        ``ω`` is exact iff the residual is below ``1e-10 ‖ω‖``.

    Raises
    ------
    NotClosedError
        If ``dω`` does not vanish.
    """
    from . import _linalg
    from .operators import exterior_derivative

    if isinstance(omega, BasicForm):
        if omega.degree != 1:
            raise ValueError("a one-form is required")
        omega = omega.coeffs
    omega = np.asarray(omega, dtype=complex).reshape(model.npoints, model.q)
    norm = form_norm(model, omega)
    if norm == 0.0:
        return np.zeros(model.npoints, dtype=complex), 0.0
    if model.q >= 2:
        d1 = exterior_derivative(model, 1)
        domega = d1 @ omega.ravel()
        scale = _linalg.opnorm(d1) * np.linalg.norm(omega)
        if np.linalg.norm(domega) > DKAPPA_TOL * scale:
            raise NotClosedError(f"one-form is not closed (relative |dω| = {np.linalg.norm(domega) / scale:.3e})")
    G1 = np.asarray(model.gram.gram(1), dtype=float)
    shape = model.grid_shape
    if not model.active:
        h = np.zeros(1, dtype=complex)
    else:
        hat = np.fft.fftn(omega.reshape(*shape, model.q), axes=tuple(range(len(shape))))
        grads = np.zeros((*shape, model.q), dtype=complex)
        for pos, a in enumerate(model.active):
            k = 2j * np.pi * a.wavenumbers / a.period
            bshape = [1] * len(shape)
            bshape[pos] = a.n
            grads[..., a.index - 1] += k.reshape(bshape)
        num = np.einsum("...i,ij,...j->...", grads.conj(), G1, hat)
        den = np.einsum("...i,ij,...j->...", grads.conj(), G1, grads).real
        hhat = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
        h = np.fft.ifftn(hhat, axes=tuple(range(len(shape)))).ravel()
    dh = np.zeros_like(omega)
    for a in model.active:
        dh[:, a.index - 1] = partial(model, h, a.index)
    return h, form_norm(model, dh - omega)


# validation -------------------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the admission gates for one model.

    Residuals that could not be evaluated because an earlier gate failed are
    reported as ``inf``.
    """

    failures: tuple = ()
    d_squared: float = float("inf")
    d_kappa: float = float("inf")
    metric_spd: bool = False
    kappa_imag: float = float("inf")
    realizability: float = float("inf")
    taut: bool = False
    taut_residual: float = float("inf")

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(code for code, _ in self.failures)

    def summary(self) -> str:
        if self.passed:
            return "model passed validation"
        return "; ".join(f"{code}: {msg}" for code, msg in self.failures)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "failures": [{"code": c, "message": m} for c, m in self.failures],
            "d_squared": self.d_squared,
            "d_kappa": self.d_kappa,
            "metric_spd": self.metric_spd,
            "kappa_imag": self.kappa_imag,
            "realizability": self.realizability,
            "taut": self.taut,
            "taut_residual": self.taut_residual,
        }

    def raise_if_failed(self) -> None:
        if not self.passed:
            raise ModelValidationError(self.summary(), self)


def _structural_failures(model: CoframeModel) -> list[tuple[str, str]]:
    q = model.q
    out = []
    if q < 1:
        out.append(("malformed-structure", f"codimension q={q} must be positive"))
        return out
    for entry in model.structure:
        k, i, j, _ = entry
        if not (1 <= k <= q and 1 <= i <= q and 1 <= j <= q) or i >= j or k == i:
            out.append(("malformed-structure", f"structure entry {entry} needs indices in 1..{q}, i < j and k != i"))
    seen = set()
    for a in model.active:
        if not 1 <= a.index <= q:
            out.append(("malformed-structure", f"active coordinate index {a.index} outside 1..{q}"))
        if a.index in seen:
            out.append(("axis-not-injective", f"coframe index {a.index} carries two active coordinates"))
        seen.add(a.index)
        if a.n < 8 or a.n % 2:
            out.append(("grid-size", f"grid size {a.n} on axis {a.index} must be even and at least 8"))
        if not a.period > 0:
            out.append(("malformed-structure", f"period of axis {a.index} must be positive"))
    for i, table in model.kappa.items():
        if not 1 <= i <= q:
            out.append(("malformed-structure", f"kappa index {i} outside 1..{q}"))
        for mode in table:
            if len(mode) != len(model.active):
                out.append(("malformed-structure", f"kappa mode {mode} needs {len(model.active)} entries"))
    if model.orientation not in (-1, 0, 1):
        out.append(("malformed-structure", "orientation must be -1, 0 or 1"))
    if model.metric.shape != (q, q):
        out.append(("metric-not-spd", f"metric must be {q}x{q}"))
    else:
        try:
            MetricGram(model.metric)
        except MetricError as exc:
            out.append(("metric-not-spd", f"metric {exc}"))
    return out


def validate(model: CoframeModel) -> ValidationReport:
    """Evaluate every admission gate and cache the report on the model."""
    if "report" in model._cache:
        return model._cache["report"]
    from . import _linalg
    from .operators import exterior_derivative

    failures = _structural_failures(model)
    if failures:
        report = ValidationReport(failures=tuple(failures), metric_spd=not any(c == "metric-not-spd" for c, _ in failures))
        model._cache["report"] = report
        return report

    dsq = 0.0
    for k in range(model.q - 1):
        a, b = exterior_derivative(model, k), exterior_derivative(model, k + 1)
        dsq = max(dsq, _linalg.relative_residual(b @ a, b, a))
    if dsq >= DSQ_TOL:
        failures.append(("d-squared", f"relative |d∘d| = {dsq:.3e}"))

    kap = model.kappa_values()
    scale = max(1.0, np.abs(kap).max(initial=0.0))
    imag = float(np.abs(kap.imag).max(initial=0.0) / scale)
    if imag >= REAL_TOL:
        failures.append(("kappa-not-real", f"max imaginary part of κ = {imag:.3e}"))

    dkappa = 0.0
    if model.q >= 2 and np.any(kap):
        d1 = exterior_derivative(model, 1)
        dkappa = _linalg.relative_residual(d1 @ kap.ravel(), d1, float(np.linalg.norm(kap)))
    if dkappa >= DKAPPA_TOL:
        failures.append(("kappa-not-closed", f"relative |dκ| = {dkappa:.3e}"))

    real_res = taut_res = float("inf")
    taut = False
    if dkappa < DKAPPA_TOL:
        omega = kap - modular_form(model)[None, :]
        try:
            _, res = solve_exact_potential(model, omega)
            onorm = form_norm(model, omega)
            real_res = res / onorm if onorm else 0.0
        except NotClosedError as exc:
            failures.append(("not-realizable", str(exc)))
        else:
            if real_res >= EXACT_TOL:
                failures.append(("not-realizable", f"κ - modular is not exact (relative residual {real_res:.3e})"))
        _, res = solve_exact_potential(model, kap)
        knorm = form_norm(model, kap)
        taut_res = res / knorm if knorm else 0.0
        taut = taut_res < EXACT_TOL
    report = ValidationReport(
        failures=tuple(failures),
        d_squared=float(dsq),
        d_kappa=float(dkappa),
        metric_spd=True,
        kappa_imag=imag,
        realizability=float(real_res),
        taut=bool(taut),
        taut_residual=float(taut_res),
    )
    model._cache["report"] = report
    return report


def require_valid(model: CoframeModel) -> ValidationReport:
    report = validate(model)
    report.raise_if_failed()
    return report


# serialization ----------------------------------------------------------------

_NUMBER = {"type": "number"}
_COEF = {"oneOf": [_NUMBER, {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}]}

MODEL_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["q", "structure", "active", "metric", "kappa", "orientation"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": MODEL_SCHEMA_VERSION},
        "name": {"type": "string"},
        "q": {"type": "integer", "minimum": 1},
        "structure": {
            "type": "array",
            "items": {
                "type": "array",
                "prefixItems": [{"type": "integer"}] * 3 + [_NUMBER],
                "minItems": 4,
                "maxItems": 4,
            },
        },
        "active": {
            "type": "array",
            "items": {
                "type": "array",
                "prefixItems": [{"type": "integer"}, _NUMBER, {"type": "integer"}],
                "minItems": 3,
                "maxItems": 3,
            },
        },
        "metric": {"type": "array", "items": {"type": "array", "items": _NUMBER}},
        "kappa": {
            "type": "object",
            "propertyNames": {"pattern": "^[0-9]+$"},
            "additionalProperties": {
                "type": "object",
                "propertyNames": {"pattern": "^(-?[0-9]+(,-?[0-9]+)*)?$"},
                "additionalProperties": _COEF,
            },
        },
        "orientation": {"enum": [-1, 0, 1]},
    },
}


def to_dict(model: CoframeModel) -> dict:
    kappa = {}
    for i in sorted(model.kappa):
        kappa[str(i)] = {
            ",".join(str(m) for m in mode): [float(c.real), float(c.imag)]
            for mode, c in sorted(model.kappa[i].items())
        }
    return {
        "schema_version": MODEL_SCHEMA_VERSION,
        "name": model.name,
        "q": model.q,
        "structure": [[k, i, j, float(v)] for k, i, j, v in model.structure],
        "active": [[a.index, a.period, a.n] for a in model.active],
        "metric": [[float(x) for x in row] for row in model.metric],
        "kappa": kappa,
        "orientation": model.orientation,
    }


def dumps(model: CoframeModel) -> str:
    """Canonical JSON text; write→read→write is byte-identical."""
    return json.dumps(to_dict(model), sort_keys=True, indent=2) + "\n"


def from_dict(data: Mapping) -> CoframeModel:
    import jsonschema

    try:
        jsonschema.validate(data, MODEL_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"model field {where}: {exc.message}") from None
    kappa = {}
    for i, table in data["kappa"].items():
        kappa[int(i)] = {
            (tuple(int(m) for m in key.split(",")) if key else ()): (
                complex(v[0], v[1]) if isinstance(v, list) else complex(v)
            )
            for key, v in table.items()
        }
    metric = data["metric"]
    q = data["q"]
    if len(metric) != q or any(len(row) != q for row in metric):
        raise SchemaError(f"model field metric: expected a {q}x{q} matrix")
    return CoframeModel(
        q=q,
        structure=[tuple(e) for e in data["structure"]],
        active=[ActiveAxis(*a) for a in data["active"]],
        metric=metric,
        kappa=kappa,
        orientation=data["orientation"],
        name=data.get("name", "custom"),
    )


def loads(text: str) -> CoframeModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"model file is not valid JSON: {exc}") from None
    return from_dict(data)


def save_model(model: CoframeModel, path) -> None:
    Path(path).write_text(dumps(model))


def load_model(path, check: bool = True) -> CoframeModel:
    """Read a model file and (by default) run validation before returning.

    Raises
    ------
    OSError
        Unreadable file.
    SchemaError
        Schema violation; the message names the offending field.
    ModelValidationError
        A gate failed; the report is attached as ``.report``.
    """
    model = loads(Path(path).read_text())
    if check:
        require_valid(model)
    return model

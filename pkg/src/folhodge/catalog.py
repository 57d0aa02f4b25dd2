"""Built-in coframe models and the suspension Betti bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import log, sqrt

from .model import ActiveAxis, CoframeModel, add_tables, trig_table

GOLDEN_LAMBDA = (3 + sqrt(5)) / 2


def lambda_from_trace(trace: float) -> float:
    """Larger eigenvalue of a hyperbolic matrix in SL(2, Z) with the given trace."""
    if not trace > 2:
        raise ValueError("trace must exceed 2 for a hyperbolic matrix")
    return (trace + sqrt(trace * trace - 4)) / 2


def make_carriere(lam: float = GOLDEN_LAMBDA, n: int = 64) -> CoframeModel:
    """Carrière flow on a hyperbolic torus bundle, reduced to the circle.

    Coframe ``(α, β)`` with ``dα = 0``, ``dβ = (log λ) α∧β``, ``κ = (log λ) α``
    and one active coordinate ``t`` dual to ``α``.
    """
    if not lam > 1:
        raise ValueError("lambda must be greater than 1")
    c = log(lam)
    return CoframeModel(
        q=2,
        structure=[(2, 1, 2, c)],
        active=[ActiveAxis(1, 1.0, n)],
        kappa={1: {(0,): c}},
        orientation=1,
        name="carriere",
    )


def make_flat_torus(q: int = 2, n: int = 32, h=None) -> CoframeModel:
    """Flat ``T^q`` with every coordinate active and ``κ = dh``.

    Parameters
    ----------
    h
        Fourier table (mode tuples of length q) of the potential; ``None`` for ``κ = 0``.
    """
    if q < 1:
        raise ValueError("q must be positive")
    sizes = [n] * q if isinstance(n, int) else list(n)
    base = CoframeModel(
        q=q,
        active=[ActiveAxis(i + 1, 1.0, s) for i, s in enumerate(sizes)],
        orientation=1,
        name="flat-torus",
    )
    return base if not h else base.shifted_kappa(h)


def make_carriere_product(
    lam: float = GOLDEN_LAMBDA, m: int = 1, n: int = 64, circle_n: int | None = None
) -> CoframeModel:
    """Carrière model times ``m`` flat circles (coframe indices ``3..2+m``).

    The circles are inactive (forms constant along them) unless ``circle_n``
    is given, in which case each gets its own grid of that size.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    base = make_carriere(lam, n)
    active = list(base.active)
    if circle_n is not None:
        active += [ActiveAxis(3 + j, 1.0, circle_n) for j in range(m)]
    kappa = {1: {(0,) * len(active): log(lam)}}
    return CoframeModel(
        q=2 + m,
        structure=base.structure,
        active=active,
        kappa=kappa,
        orientation=1,
        name="carriere-product",
    )


def make_codim1_constant(c: float = 1.0, n: int = 32) -> CoframeModel:
    """Circle with ``κ = c dt``; not realizable for ``c ≠ 0``."""
    return CoframeModel(
        q=1,
        active=[ActiveAxis(1, 1.0, n)],
        kappa={1: {(0,): c}},
        orientation=1,
        name="codim1-constant",
    )


def h_table(terms, naxes: int):
    """Fourier table from ``(kind, amplitude, modes)`` terms; see :func:`trig_table`."""
    tables = []
    for kind, amp, modes in terms:
        modes = tuple(modes) + (0,) * (naxes - len(modes))
        tables.append(trig_table(kind, amp, modes))
    return add_tables(*tables)


# suspension bookkeeping ------------------------------------------------------------

CONSTANTS_ONLY = "constants-only"
WITH_VOLUME = "constants-and-transverse-volume"


@dataclass(frozen=True)
class SuspensionInput:
    """Basic cohomology data of a suspension over a closed base.

    ``taut`` states whether the suspended foliation is taut; it decides
    which twisted constraints apply.
    """

    base_betti: tuple[int, ...]
    pattern: str = CONSTANTS_ONLY
    fiber_codim: int = 0
    oriented: bool = True
    taut: bool = False

    def __post_init__(self):
        object.__setattr__(self, "base_betti", tuple(int(b) for b in self.base_betti))
        if not self.base_betti or any(b < 0 for b in self.base_betti):
            raise ValueError("base Betti numbers must be a nonempty list of nonnegative integers")
        if self.pattern not in (CONSTANTS_ONLY, WITH_VOLUME):
            raise ValueError(f"unknown fiber pattern {self.pattern!r}")
        if self.pattern == WITH_VOLUME and not self.oriented:
            raise ValueError("a transverse volume form requires a transversally oriented fiber")
        if self.fiber_codim < 0:
            raise ValueError("fiber codimension must be nonnegative")
        if self.pattern == WITH_VOLUME and self.fiber_codim == 0:
            raise ValueError("a transverse volume needs positive fiber codimension")

    @property
    def q(self) -> int:
        return len(self.base_betti) - 1 + self.fiber_codim


@dataclass(frozen=True)
class Constraint:
    """Integer linear relation ``Σ coeffs[k] b̃_k  (relation)  rhs``."""

    coeffs: tuple[tuple[int, int], ...]
    relation: str
    rhs: int

    def holds(self, twisted) -> bool:
        lhs = sum(c * twisted[k] for k, c in self.coeffs)
        return {"=": lhs == self.rhs, ">=": lhs >= self.rhs}[self.relation]

    def __str__(self) -> str:
        parts = []
        for k, c in self.coeffs:
            mag = "" if abs(c) == 1 else str(abs(c))
            sign = "-" if c < 0 else "+"
            parts.append((sign, f"{mag}b~{k}"))
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, term in parts[1:]:
            text += f" {sign} {term}"
        return f"{text} {self.relation} {self.rhs}"


@dataclass(frozen=True)
class SuspensionReport:
    input: SuspensionInput
    betti: tuple[int, ...]
    euler: int
    constraints: tuple[Constraint, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "betti": list(self.betti),
            "euler": self.euler,
            "taut": self.input.taut,
            "oriented": self.input.oriented,
            "constraints": [str(c) for c in self.constraints],
        }


PRESETS = {
    "7.2": SuspensionInput((1, 4, 1), CONSTANTS_ONLY, fiber_codim=1, oriented=False, taut=False),
    "7.3": SuspensionInput((1, 4, 1), WITH_VOLUME, fiber_codim=2, oriented=True, taut=False),
}


def suspension_report(source: SuspensionInput | str) -> SuspensionReport:
    """Ordinary Betti numbers, Euler characteristic and twisted constraints.

    ``H^k = H^k(base)`` for constant fiber invariants, plus ``H^{k-f}(base)``
    when the fiber contributes its transverse volume of degree ``f``.

    Raises
    ------
    ValueError
        The twisted constraints admit no solution (nonzero χ where the
        nontaut and duality relations force the twisted Euler number to 0).
    """
    inp = PRESETS[source] if isinstance(source, str) else source
    q = inp.q
    base = list(inp.base_betti) + [0] * (q + 1 - len(inp.base_betti))
    betti = list(base)
    if inp.pattern == WITH_VOLUME:
        f = inp.fiber_codim
        for k in range(f, q + 1):
            betti[k] += base[k - f]
    euler = sum((-1) ** k * b for k, b in enumerate(betti))
    return SuspensionReport(inp, tuple(betti), euler, tuple(_twisted_constraints(inp, tuple(betti), euler)))


def _twisted_constraints(inp: SuspensionInput, betti, euler: int) -> list[Constraint]:
    q = inp.q
    if inp.taut:
        return [Constraint(((k, 1),), "=", b) for k, b in enumerate(betti)]
    out = [Constraint(((0, 1),), "=", 0)]
    if q > 0:
        out.append(Constraint(((q, 1),), "=", 0))
    # representative unknown for every degree after using duality
    rep = {k: (min(k, q - k) if inp.oriented else k) for k in range(1, q)}
    if inp.oriented:
        for k in range(1, q):
            if q - k > k:
                out.append(Constraint(((q - k, 1), (k, -1)), "=", 0))
    coeffs: dict[int, int] = {}
    for k in range(1, q):
        coeffs[rep[k]] = coeffs.get(rep[k], 0) + (-1) ** k
    terms = sorted(((k, c) for k, c in coeffs.items() if c), reverse=True)
    if not terms:
        if euler != 0:
            raise ValueError(f"inconsistent input: a nontaut suspension forces twisted Euler 0 but χ = {euler}")
        return out
    rhs = euler
    if terms[0][1] < 0:
        terms = [(k, -c) for k, c in terms]
        rhs = -rhs
    out.append(Constraint(tuple(terms), "=", rhs))
    negatives = [(k, c) for k, c in terms if c < 0]
    if len(negatives) == 1:
        # all other unknowns enter with positive sign and are nonnegative
        k, c = negatives[0]
        bound = -(rhs // -c) if rhs < 0 else 0
        if bound > 0:
            for j in sorted(j for j in range(1, q) if rep[j] == k):
                out.append(Constraint(((j, 1),), ">=", bound))
    return out

"""The ten acceptance criteria, each at its stated tolerance.

Every test prints one PASS/FAIL line; the lines are also collected into a
summary section at the end of the pytest run.
"""

import time
from math import log, pi

import pytest

from conftest import ACCEPTANCE
from folhodge.catalog import (
    GOLDEN_LAMBDA,
    make_carriere,
    make_carriere_product,
    make_codim1_constant,
    make_flat_torus,
    suspension_report,
)
from folhodge.hodge import (
    cohomology_report,
    conformal_compare,
    duality_check,
    hodge_split,
    spectrum,
    taut_kernel_quotient,
    weitzenbock,
)
from folhodge.model import trig_table, validate
from folhodge.operators import identity_suite

KAPPA_SQ = 0.25 * log(GOLDEN_LAMBDA) ** 2


def record(n, desc, ok, detail):
    ok = bool(ok)
    ACCEPTANCE[n] = (desc, ok, detail)
    print(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {desc}  [{detail}]")
    assert ok, f"criterion {n} failed: {detail}"


def test_criterion_01_identity_suite():
    start = time.perf_counter()
    models = [
        make_carriere(GOLDEN_LAMBDA, n=32),
        make_flat_torus(q=2, n=32),
        make_carriere_product(GOLDEN_LAMBDA, m=1, n=32),
        make_carriere_product(GOLDEN_LAMBDA, m=2, n=32),
    ]
    worst = {}
    for model in models:
        report = identity_suite(model)
        names = {r.name for r in report.residuals}
        for required in ("d^2", "d_tilde^2", "delta_tilde^2", "star*Delta_tilde", "delta_tilde=mu_adjoint(d_tilde)"):
            assert required in names, (model.name, required)
        assert sum(name.startswith("(") for name in names) == 8
        if model.q % 2 == 0:
            assert {"involution^2", "involution*D_b+D_b*involution"} <= names
        worst[f"{model.name}/q={model.q}"] = report.worst()
    elapsed = time.perf_counter() - start
    top = max(worst.values())
    record(1, "identity suite < 1e-10, runtime < 60 s", top < 1e-10 and elapsed < 60, f"worst {top:.1e}, {elapsed:.1f} s")


def test_criterion_02_carriere_cohomology():
    start = time.perf_counter()
    rep = cohomology_report(make_carriere(GOLDEN_LAMBDA, n=64))
    elapsed = time.perf_counter() - start
    ok = (
        rep.betti == (1, 1, 0)
        and rep.twisted == (0, 0, 0)
        and rep.taut is False
        and rep.signature == 0
        and rep.euler == rep.twisted_euler == 0
        and not rep.refined
        and elapsed < 10
    )
    detail = f"b={rep.betti} b~={rep.twisted} taut={rep.taut} sigma={rep.signature} chi={rep.euler}/{rep.twisted_euler} {elapsed:.1f} s"
    record(2, "Carriere Betti, tautness, signature, Euler", ok, detail)


def test_criterion_03_carriere_twisted_spectrum(carriere):
    res = spectrum(carriere, "Delta_tilde", 0, 4)
    ev = res.eigenvalues
    e0 = abs(ev[0] - KAPPA_SQ)
    e1 = max(abs(ev[1] - 4 * pi**2 - KAPPA_SQ), abs(ev[2] - 4 * pi**2 - KAPPA_SQ))
    mult = res.multiplicities[1][1]
    ok = e0 < 1e-6 and e1 < 1e-6 and mult == 2 and abs(ev[0] - 0.23156) < 1e-5
    record(3, "lowest twisted eigenvalues of Carriere", ok, f"{ev[0]:.8f}, {ev[1]:.6f} x{mult}, errors {e0:.1e}/{e1:.1e}")


def test_criterion_04_poincare_duality(carriere):
    rep = duality_check(carriere, (0, 2), count=20)
    ok = rep.eigenvalue_gap < 1e-8 and rep.star_residual < 1e-8
    record(4, "Poincare duality degrees 0 and 2", ok, f"gap {rep.eigenvalue_gap:.1e}, star residual {rep.star_residual:.1e}")


def test_criterion_05_conformal_invariance(carriere):
    h = trig_table("sin", 0.3, (1,))
    rep = conformal_compare(carriere, h, count=10)
    gap = max(rep.eigenvalue_gaps)
    ok = gap < 1e-8 and rep.min_alignment > 1 - 1e-6 and len(rep.alignment) > 0
    record(5, "conformal invariance under kappa + dh", ok, f"gap {gap:.1e}, alignment {rep.min_alignment:.12f}")


def test_criterion_06_odd_codimension():
    rep = cohomology_report(make_carriere_product(GOLDEN_LAMBDA, m=1, n=64))
    ok = rep.euler == 0 and rep.twisted_euler == 0 and rep.twisted == (0, 0, 0, 0)
    record(6, "odd codimension Euler characteristics", ok, f"chi={rep.euler} chi~={rep.twisted_euler} b~={rep.twisted}")


def test_criterion_07_tautness():
    h = {**trig_table("sin", 0.3, (1, 0)), **trig_table("cos", 0.2, (1, 1))}
    flat = make_flat_torus(q=2, n=16, h=h)
    taut = cohomology_report(flat)
    quotient = taut_kernel_quotient(flat)
    nontaut = cohomology_report(make_carriere(GOLDEN_LAMBDA, n=64))
    codim1 = validate(make_codim1_constant(1.0))
    ok = (
        taut.taut
        and taut.twisted[0] == 1
        and taut.twisted[2] == 1
        and quotient < 1e-10
        and not nontaut.taut
        and nontaut.twisted[0] == 0
        and "not-realizable" in codim1.codes
    )
    detail = f"flat b~={taut.twisted} Rayleigh {quotient:.1e}; carriere b~0={nontaut.twisted[0]}; codim1 {codim1.codes}"
    record(7, "tautness verdicts", ok, detail)


def test_criterion_08_weitzenbock(carriere):
    rep = weitzenbock(carriere)
    flat = weitzenbock(make_flat_torus(q=2, n=32))
    ok = (
        rep.kappa_coclosed < 1e-12
        and rep.degree0 is not None
        and rep.degree0 < 1e-10
        and len(flat.flat) == 3
        and max(flat.flat) < 1e-10
    )
    detail = f"delta_b kappa {rep.kappa_coclosed:.1e}, degree 0 {rep.degree0:.1e}, flat {max(flat.flat):.1e}"
    record(8, "Weitzenbock formula", ok, detail)


def test_criterion_09_suspension_bookkeeping():
    a = suspension_report("7.2")
    b = suspension_report("7.3")
    sa = {str(c) for c in a.constraints}
    sb = {str(c) for c in b.constraints}
    ok = (
        a.betti == (1, 4, 1, 0)
        and a.euler == -2
        and "b~2 - b~1 = -2" in sa
        and b.betti == (1, 4, 2, 4, 1)
        and b.euler == -4
        and {"b~3 - b~1 = 0", "b~1 >= 2", "b~3 >= 2", "b~2 - 2b~1 = -4"} <= sb
    )
    record(9, "suspension Betti tables", ok, f"{a.betti} chi={a.euler}; {b.betti} chi={b.euler}")


def test_criterion_10_hodge_decomposition(carriere, flat16):
    split = hodge_split(flat16, 1)
    flat_ok = (
        (split.exact_rank, split.coexact_rank, split.harmonic) == (255, 255, 2)
        and split.dim == 512
        and split.orthogonality < 1e-9
    )
    carr = [hodge_split(carriere, k) for k in range(3)]
    carr_ok = all(s.complete and s.reliable for s in carr)
    detail = f"flat {split.exact_rank}+{split.coexact_rank}+{split.harmonic}={split.dim} orth {split.orthogonality:.1e}; "
    detail += "carriere " + ", ".join(f"{s.exact_rank}+{s.coexact_rank}+{s.harmonic}={s.dim}" for s in carr)
    record(10, "Hodge decomposition", flat_ok and carr_ok, detail)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))

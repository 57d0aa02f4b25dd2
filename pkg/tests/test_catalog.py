from itertools import product
from math import log, sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from folhodge import validate
from folhodge.catalog import (
    CONSTANTS_ONLY,
    GOLDEN_LAMBDA,
    PRESETS,
    WITH_VOLUME,
    Constraint,
    SuspensionInput,
    h_table,
    lambda_from_trace,
    make_carriere,
    make_carriere_product,
    make_codim1_constant,
    make_flat_torus,
    suspension_report,
)
from folhodge.model import modular_form


def test_golden_lambda_from_trace():
    assert abs(lambda_from_trace(3) - GOLDEN_LAMBDA) < 1e-15
    assert abs(GOLDEN_LAMBDA - (3 + sqrt(5)) / 2) < 1e-15
    with pytest.raises(ValueError):
        lambda_from_trace(2)


def test_carriere_model_shape():
    m = make_carriere()
    assert m.q == 2 and m.grid_shape == (64,)
    assert m.structure == ((2, 1, 2, log(GOLDEN_LAMBDA)),)
    report = validate(m)
    assert report.passed and not report.taut
    assert np.allclose(modular_form(m), [log(GOLDEN_LAMBDA), 0])
    with pytest.raises(ValueError):
        make_carriere(0.5)


def test_products_and_tori():
    assert make_carriere_product(m=2).q == 4
    assert make_carriere_product(m=1, circle_n=8).grid_shape == (64, 8)
    assert make_flat_torus(q=3, n=8).npoints == 512
    assert validate(make_flat_torus(q=2, n=8, h=h_table([("sin", 0.2, (1,))], 2))).taut
    with pytest.raises(ValueError):
        make_carriere_product(m=0)
    assert not validate(make_codim1_constant()).passed


def test_h_table_pads_modes():
    assert h_table([("exp", 1.0, (1,))], 2) == {(1, 0): 1.0}


def test_preset_nonoriented_fiber():
    rep = suspension_report("7.2")
    assert rep.betti == (1, 4, 1, 0)
    assert rep.euler == -2
    assert [str(c) for c in rep.constraints] == ["b~0 = 0", "b~3 = 0", "b~2 - b~1 = -2", "b~1 >= 2"]


def test_preset_transverse_volume():
    rep = suspension_report("7.3")
    assert rep.betti == (1, 4, 2, 4, 1)
    assert rep.euler == -4
    assert [str(c) for c in rep.constraints] == [
        "b~0 = 0",
        "b~4 = 0",
        "b~3 - b~1 = 0",
        "b~2 - 2b~1 = -4",
        "b~1 >= 2",
        "b~3 >= 2",
    ]


def test_presets_are_frozen_inputs():
    assert PRESETS["7.2"].q == 3 and not PRESETS["7.2"].oriented
    assert PRESETS["7.3"].q == 4 and PRESETS["7.3"].pattern == WITH_VOLUME


def test_taut_suspension_copies_betti():
    rep = suspension_report(SuspensionInput((1, 2, 1), taut=True))
    assert all(c.relation == "=" for c in rep.constraints)
    assert [c.rhs for c in rep.constraints] == [1, 2, 1]


def test_suspension_input_checks():
    with pytest.raises(ValueError):
        SuspensionInput(())
    with pytest.raises(ValueError):
        SuspensionInput((1, -1))
    with pytest.raises(ValueError):
        SuspensionInput((1, 1), "other")
    with pytest.raises(ValueError):
        SuspensionInput((1, 1), WITH_VOLUME, fiber_codim=0)
    with pytest.raises(ValueError):
        SuspensionInput((1, 1), WITH_VOLUME, fiber_codim=1, oriented=False)


def test_constraint_format_and_holds():
    c = Constraint(((2, 1), (1, -2)), "=", -4)
    assert str(c) == "b~2 - 2b~1 = -4"
    assert c.holds([0, 2, 0, 2, 0]) and not c.holds([0, 3, 0, 3, 0])
    assert Constraint(((1, 1),), ">=", 2).holds([0, 2, 0])


@st.composite
def suspension_inputs(draw):
    base = draw(st.lists(st.integers(0, 6), min_size=1, max_size=3))
    base[0] = max(base[0], 1)
    oriented = draw(st.booleans())
    if oriented and draw(st.booleans()):
        f = draw(st.integers(1, 2))
        return SuspensionInput(tuple(base), WITH_VOLUME, fiber_codim=f, oriented=True)
    return SuspensionInput(tuple(base), CONSTANTS_ONLY, fiber_codim=draw(st.integers(0, 2)), oriented=oriented)


def relations_hold(inp, vec, euler):
    q = inp.q
    ok = vec[0] == vec[q] == 0 and sum((-1) ** k * b for k, b in enumerate(vec)) == euler
    return ok and (not inp.oriented or all(vec[k] == vec[q - k] for k in range(q + 1)))


def candidates(q):
    for inner in product(range(7), repeat=max(q - 1, 0)):
        yield (0, *inner, 0) if q > 0 else (0,)


@settings(max_examples=100, deadline=None)
@given(suspension_inputs())
def test_constraints_match_defining_relations(inp):
    q = inp.q
    base = list(inp.base_betti) + [0] * (q + 1 - len(inp.base_betti))
    try:
        rep = suspension_report(inp)
    except ValueError:
        # only raised when no twisted Betti vector can exist
        euler = sum((-1) ** k * b for k, b in enumerate(base))
        if inp.pattern == WITH_VOLUME:
            euler += sum((-1) ** (k + inp.fiber_codim) * b for k, b in enumerate(base) if k + inp.fiber_codim <= q)
        assert euler != 0
        assert not any(relations_hold(inp, vec, euler) for vec in candidates(q))
        return
    assert len(rep.betti) == q + 1
    assert rep.euler == sum((-1) ** k * b for k, b in enumerate(rep.betti))
    equalities = [c for c in rep.constraints if c.relation == "="]
    for vec in candidates(q):
        expected = relations_hold(inp, vec, rep.euler)
        assert all(c.holds(vec) for c in equalities) == expected
        if expected:
            assert all(c.holds(vec) for c in rep.constraints)


def test_inconsistent_input_rejected():
    with pytest.raises(ValueError):
        suspension_report(SuspensionInput((1, 0)))

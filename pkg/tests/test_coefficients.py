import math

import numpy as np
import pytest

from critwave.coefficients import (
    CoefficientSpec,
    check_decay_condition,
    check_defocusing_condition,
    check_focusing_condition,
    defocusing_values,
    morawetz_weight,
    phi_eval,
)
from critwave.grid import make_grid


def test_spec_validation():
    with pytest.raises(ValueError):
        CoefficientSpec.constant(0.0)
    with pytest.raises(ValueError):
        CoefficientSpec.constant(1.5)
    with pytest.raises(ValueError):
        CoefficientSpec.sinh_power(-2.0)
    with pytest.raises(ValueError):
        CoefficientSpec.gaussian(0.0)
    with pytest.raises(ValueError):
        CoefficientSpec.table([0.0, 1.0], [1.0, 0.0])  # zero value not allowed
    with pytest.raises(ValueError):
        CoefficientSpec.table([0.5, 1.0], [1.0, 0.5])  # must start at r=0


def test_sinh_power_origin_limit():
    spec = CoefficientSpec.sinh_power(2.0)
    v, dv = phi_eval(spec, 1e-7)
    assert v == pytest.approx(1.0, abs=1e-12)
    assert dv == pytest.approx(0.0, abs=1e-6)


def test_sinh_power_series_matches_direct_formula():
    # evaluate the direct formula below the series switch radius by hand
    sigma = 2.0
    r = 5e-5
    v, dv = phi_eval(CoefficientSpec.sinh_power(sigma), r)
    direct_v = (r / math.sinh(r)) ** sigma
    direct_dv = sigma * direct_v * (1.0 / r - 1.0 / math.tanh(r))
    assert v == pytest.approx(direct_v, rel=1e-12)
    assert dv == pytest.approx(direct_dv, rel=1e-5)


def test_sinh_power_at_one():
    v, _ = phi_eval(CoefficientSpec.sinh_power(2.0), 1.0)
    assert v == pytest.approx(1.0 / math.sinh(1.0) ** 2, rel=1e-12)


def test_constant_eval():
    v, dv = phi_eval(CoefficientSpec.constant(1.0), 3.7)
    assert v == 1.0 and dv == 0.0


def test_gaussian_eval():
    v, dv = phi_eval(CoefficientSpec.gaussian(1.0), 1.0)
    assert v == pytest.approx(math.exp(-1.0))
    assert dv == pytest.approx(-2.0 * math.exp(-1.0))


def test_defocusing_constant_passes():
    rep = check_defocusing_condition(CoefficientSpec.constant(1.0))
    assert rep.passed
    assert rep.min_value == pytest.approx(1.0)


def test_defocusing_gaussian_passes():
    rep = check_defocusing_condition(CoefficientSpec.gaussian(1.0))
    assert rep.passed
    assert rep.min_value > 0.0


def test_defocusing_rising_table_fails_near_jump():
    # decreasing ramp that jumps back up to 0.01 just past r=1: the rising
    # segment has a large positive slope, driving the weight negative there
    spec = CoefficientSpec.table(
        [0.0, 0.5, 0.9, 0.99, 0.999, 1.0, 2.0, 50.0],
        [1.0, 0.5, 0.1, 0.01, 0.001, 0.01, 0.01, 0.01],
    )
    rep = check_defocusing_condition(spec)
    assert not rep.passed
    assert 0.9 < rep.argmin_r < 1.05
    assert rep.min_value < 0.0


def test_table_coarse_grid_warning():
    spec = CoefficientSpec.table([0.0, 0.001, 50.0], [1.0, 0.9, 0.5])
    rep = check_defocusing_condition(spec, make_grid(3, 50.0, 1000))
    assert rep.coarse_grid_warning


def test_focusing_constant_one_equality():
    rep = check_focusing_condition(CoefficientSpec.constant(1.0))
    assert rep.passed
    assert abs(rep.min_value) <= 1e-12


@pytest.mark.parametrize("sigma", [2.0, 3.0, 4.0, 5.0, 6.0])
def test_focusing_sinh_power_admissible_range(sigma):
    rep = check_focusing_condition(CoefficientSpec.sinh_power(sigma))
    assert rep.passed


@pytest.mark.parametrize(
    "spec",
    [
        CoefficientSpec.constant(0.7),
        CoefficientSpec.gaussian(0.5),
        CoefficientSpec.sinh_power(2.0),
        CoefficientSpec.sinh_power(6.0),
    ],
)
def test_verdicts_stable_under_refinement(spec):
    g1 = make_grid(3, 50.0, 50_000)
    g2 = g1.refined()
    for checker in (check_defocusing_condition, check_focusing_condition):
        assert checker(spec, g1).passed == checker(spec, g2).passed


@pytest.mark.parametrize(
    "spec",
    [CoefficientSpec.constant(1.0), CoefficientSpec.gaussian(1.0), CoefficientSpec.sinh_power(2.0)],
)
def test_builtin_families_bounded_and_decreasing(spec):
    # r_max chosen inside the representable range of exp(-r^2)
    g = make_grid(3, 26.0, 20_000)
    val, _ = phi_eval(spec, g.nodes)
    assert np.all(val > 0.0) and np.all(val <= 1.0 + 1e-15)
    assert np.all(np.diff(val) <= 1e-15)


def test_decay_condition_verdicts():
    assert check_decay_condition(CoefficientSpec.gaussian(1.0)).passed
    assert check_decay_condition(CoefficientSpec.sinh_power(2.0)).passed
    # a constant never attains the vanishing limit
    assert not check_decay_condition(CoefficientSpec.constant(1.0)).passed


def test_morawetz_weight_values():
    g = make_grid(3, 10.0, 1000)
    w = morawetz_weight(CoefficientSpec.constant(1.0), g)
    assert np.allclose(w.values, 1.0)
    wg = morawetz_weight(CoefficientSpec.gaussian(1.0), g)
    k = int(round(1.0 / g.dr))
    assert wg.values[k] == pytest.approx(1.5 * math.exp(-1.0), rel=1e-12)
    ws = morawetz_weight(CoefficientSpec.sinh_power(2.0), g)
    assert np.all(ws.values > 0.0)


def test_morawetz_weight_equals_defocusing_integrand():
    g = make_grid(3, 25.0, 2048)
    spec = CoefficientSpec.sinh_power(3.0)
    assert np.array_equal(morawetz_weight(spec, g).values, defocusing_values(spec, g))


@pytest.mark.parametrize(
    "spec",
    [
        CoefficientSpec.constant(0.25),
        CoefficientSpec.sinh_power(2.0),
        CoefficientSpec.gaussian(2.0),
        CoefficientSpec.table([0.0, 1.0, 2.0], [1.0, 0.5, 0.1]),
    ],
)
def test_json_roundtrip(spec):
    back = CoefficientSpec.from_json_dict(spec.to_json_dict())
    assert back.family == spec.family
    r = np.linspace(0.0, 3.0, 17)
    va, _ = phi_eval(spec, r)
    vb, _ = phi_eval(back, r)
    assert np.allclose(va, vb)

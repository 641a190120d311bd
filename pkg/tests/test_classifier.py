import numpy as np
import pytest

from critwave.classifier import (
    BLOW_UP,
    CONSISTENT,
    INCONSISTENT,
    INDETERMINATE,
    SCATTER,
    UNTESTED,
    compare,
    predict_constant_c,
    predict_defocusing,
    predict_focusing,
)
from critwave.coefficients import CoefficientSpec
from critwave.evolution import Outcome, OutcomeEvidence, WaveState
from critwave.families import scaled_ground_state
from critwave.grid import RadialField, make_grid
from critwave.ground_state import ground_state_constants, ground_state_value

SINH2 = CoefficientSpec.sinh_power(2.0)
GROUND = ground_state_constants(3)

# big, fine grid: bubble-family data is fat-tailed, so margins quoted below
# already account for the ~1e-2 gradient-tail truncation at this radius
GRID = make_grid(3, 2048.0, 1 << 16)


def _bubble_state(a, lam=1.0):
    vals = a * ground_state_value(3, GRID.nodes / lam) * lam**-0.5
    return WaveState(RadialField(GRID, vals), RadialField.zeros(GRID))


def _outcome(kind, t=None):
    return Outcome(kind, t, OutcomeEvidence(0.0, (), None, ""))


def test_focusing_small_data_scatters():
    pred = predict_focusing(_bubble_state(0.3), SINH2, GROUND)
    assert pred.verdict == SCATTER
    assert pred.energy_margin > 10 * pred.tolerance_energy
    assert pred.norm_margin > 10 * pred.tolerance_norm


def test_focusing_unit_scale_large_bubble_fails_gate():
    # at unit scale the coefficient-weighted potential is too weak: the
    # conserved energy of 1.5x data sits above the threshold (4.335 > 4.274),
    # so the honest verdict is Indeterminate, not BlowUp
    pred = predict_focusing(_bubble_state(1.5), SINH2, GROUND)
    assert pred.verdict == INDETERMINATE
    assert pred.energy_margin < 0


def test_focusing_concentrated_large_bubble_blows_up():
    # concentrating the datum (lam = 0.5) restores the energy gate
    pred = predict_focusing(_bubble_state(1.5, lam=0.5), SINH2, GROUND)
    assert pred.verdict == BLOW_UP
    assert pred.energy_margin > 0
    assert pred.norm_margin < 0


def test_focusing_above_threshold_energy_is_indeterminate():
    pred = predict_focusing(_bubble_state(0.95), SINH2, GROUND)
    assert pred.verdict == INDETERMINATE


def test_focusing_rejects_inadmissible_coefficient():
    # a cliff right after the plateau: r phi' overwhelms 2*(1 - phi) there
    cliff = CoefficientSpec.table([0.0, 1.0, 1.2, 50.0], [1.0, 1.0, 0.1, 0.1])
    from critwave.coefficients import check_focusing_condition

    assert not check_focusing_condition(cliff).passed
    with pytest.raises(ValueError, match="hypothesis not satisfied"):
        predict_focusing(_bubble_state(0.3), cliff, GROUND)


def test_defocusing_predictions():
    g = make_grid(3, 32.0, 512)
    zero = WaveState.zero(g)
    assert predict_defocusing(zero, CoefficientSpec.gaussian(1.0)).verdict == SCATTER
    assert predict_defocusing(zero, CoefficientSpec.constant(1.0)).verdict == SCATTER
    bad = CoefficientSpec.table(
        [0.0, 0.5, 0.9, 0.99, 0.999, 1.0, 2.0, 50.0],
        [1.0, 0.5, 0.1, 0.01, 0.001, 0.01, 0.01, 0.01],
    )
    assert predict_defocusing(zero, bad).verdict == INDETERMINATE


def test_constant_c_reduces_to_focusing_at_one():
    for a in (0.3, 0.95):
        state = _bubble_state(a)
        via_c = predict_constant_c(state, 1.0, GROUND)
        via_focusing = predict_focusing(state, CoefficientSpec.constant(1.0), GROUND)
        assert via_c.verdict == via_focusing.verdict


def test_constant_c_threshold_rescaling():
    pred = predict_constant_c(_bubble_state(0.3), 1.0 / 16.0, GROUND)
    assert pred.norm_threshold == pytest.approx(2.0 * GROUND.grad_norm, rel=1e-12)
    assert pred.energy_threshold == pytest.approx(4.0 * GROUND.threshold_energy, rel=1e-12)
    with pytest.raises(ValueError):
        predict_constant_c(_bubble_state(0.3), 0.0, GROUND)
    with pytest.raises(ValueError):
        predict_constant_c(_bubble_state(0.3), 1.5, GROUND)


@pytest.mark.parametrize("a", [0.5, 1.4])
@pytest.mark.parametrize("c", [1.0 / 16.0, 0.5])
def test_constant_c_two_path_consistency(a, c):
    state = _bubble_state(a)
    direct = predict_constant_c(state, c, GROUND)
    transformed = state.scaled(c ** 0.25)
    via_unit = predict_focusing(transformed, CoefficientSpec.constant(1.0), GROUND)
    assert direct.verdict == via_unit.verdict


def test_constant_c_blowup_branch():
    pred = predict_constant_c(_bubble_state(1.4), 0.5, GROUND)
    assert pred.verdict == BLOW_UP


def test_compare_rows():
    scatter = predict_focusing(_bubble_state(0.3), SINH2, GROUND)
    blow = predict_focusing(_bubble_state(1.5, lam=0.5), SINH2, GROUND)
    indet = predict_focusing(_bubble_state(0.95), SINH2, GROUND)
    assert compare(scatter, _outcome("Dispersed")).verdict == CONSISTENT
    assert compare(blow, _outcome("BlewUp", 0.3)).verdict == CONSISTENT
    assert compare(scatter, _outcome("Undecided")).verdict == UNTESTED
    assert compare(indet, _outcome("BlewUp", 0.3)).verdict == UNTESTED
    assert compare(scatter, _outcome("BlewUp", 0.3)).verdict == INCONSISTENT


def test_amplitude_ray_verdicts_are_ordered():
    # along a * bubble the verdicts form contiguous blocks
    # Scatter..., Indeterminate..., BlowUp...
    verdicts = [
        predict_focusing(_bubble_state(a), SINH2, GROUND).verdict
        for a in np.linspace(0.2, 2.2, 21)
    ]
    order = {SCATTER: 0, INDETERMINATE: 1, BLOW_UP: 2}
    ranks = [order[v] for v in verdicts]
    assert ranks == sorted(ranks)
    assert ranks[0] == 0 and ranks[-1] == 2 and 1 in ranks


@pytest.mark.parametrize("a", [0.3, 1.5])
def test_prediction_stable_under_refinement(a):
    lam = 0.5
    coarse = make_grid(3, 1024.0, 1 << 14)
    fine = coarse.refined()
    verdicts = []
    for g in (coarse, fine):
        vals = a * lam**-0.5 * ground_state_value(3, g.nodes / lam)
        state = WaveState(RadialField(g, vals), RadialField.zeros(g))
        verdicts.append(predict_focusing(state, SINH2, GROUND).verdict)
    assert verdicts[0] == verdicts[1]


def test_tapered_sweep_rows_keep_verdicts():
    # the documented sweep family (tapered, lam = 0.5) preserves the expected
    # verdicts per-row once its own energies are measured
    g = make_grid(3, 84.0, 4096)
    for a, want in ((0.25, SCATTER), (0.5, SCATTER), (0.75, SCATTER),
                    (1.5, BLOW_UP), (1.75, BLOW_UP), (2.0, BLOW_UP)):
        state = scaled_ground_state(g, a, 0.5, taper=(18.0, 42.0))
        pred = predict_focusing(state, SINH2, GROUND)
        assert pred.verdict == want, (a, pred.as_dict())

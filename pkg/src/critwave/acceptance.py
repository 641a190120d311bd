"""The acceptance suite: one callable per criterion, each returning a result
record with pass/fail, the numbers that decided it, and its runtime.

Every tolerance is fixed here; the CLI's verify subcommand and the pytest
acceptance module both run exactly these functions.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .classifier import BLOW_UP, SCATTER, compare, predict_constant_c, predict_focusing
from .coefficients import (
    CoefficientSpec,
    check_defocusing_condition,
    check_focusing_condition,
)
from .evolution import (
    SolverConfig,
    WaveState,
    evolve,
    evolve_confirmed,
    evolve_linear,
    free_decay_test,
    rescale_constant_coefficient,
)
from .families import gaussian_bump, outgoing_shell, scaled_ground_state
from .functionals import blowup_functional, morawetz_accumulate, virial_functional
from .grid import make_grid, critical_sobolev
from .ground_state import ground_state_constants, stationarity_residual
from .hyperbolic import (
    BRIDGE_COEFFICIENT,
    H3RadialField,
    h01_norm_sq,
    h3_energy,
    h3_predict,
    intertwining_residual,
    to_euclidean,
)

SINH2 = CoefficientSpec.sinh_power(2.0)
GAUSS = CoefficientSpec.gaussian(1.0)

# frozen output of the independent adaptive-quadrature oracle (see tests)
ORACLE_GRAD_NORM_SQ_D3 = 12.820992204969127


@dataclass
class CriterionResult:
    name: str
    passed: bool
    runtime: float
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.name} ({self.runtime:.1f}s)"


def _result(name, passed, t0, **details):
    return CriterionResult(name, bool(passed), time.perf_counter() - t0, details)


def criterion_ground_constants() -> CriterionResult:
    """Identities of the bubble constants at 1e-6 relative, d in {3,4,5}."""
    t0 = time.perf_counter()
    checks = {}
    ok = True
    for d in (3, 4, 5):
        c = ground_state_constants(d)
        ts = critical_sobolev(d)
        rel_same = abs(c.grad_norm_sq - c.crit_power) / c.grad_norm_sq
        rel_energy = abs(c.threshold_energy - c.grad_norm_sq / d) / c.threshold_energy
        rel_sobolev = abs(c.sobolev_constant**ts * c.grad_norm_sq ** ((ts - 2.0) / 2.0) - 1.0)
        checks[f"d{d}"] = {
            "grad_vs_power": rel_same,
            "energy_ratio": rel_energy,
            "sobolev_identity": rel_sobolev,
        }
        ok &= rel_same <= 1e-6 and rel_energy <= 1e-6 and rel_sobolev <= 1e-6
    c3 = ground_state_constants(3)
    oracle_rel = abs(c3.grad_norm_sq - ORACLE_GRAD_NORM_SQ_D3) / ORACLE_GRAD_NORM_SQ_D3
    ok &= oracle_rel <= 1e-6
    checks["d3_vs_oracle"] = oracle_rel
    return _result("ground-constants", ok, t0, **checks)


def criterion_stationarity() -> CriterionResult:
    """Discrete elliptic residual of the bubble converges at order >= 1.9."""
    t0 = time.perf_counter()
    details = {}
    ok = True
    for d in (3, 4):
        res = {n: stationarity_residual(d, make_grid(d, 32.0, n)).sup_residual for n in (1024, 4096)}
        order = math.log(res[1024] / res[4096]) / math.log(4.0)
        details[f"order_d{d}"] = order
        ok &= order >= 1.9
    return _result("stationarity", ok, t0, **details)


def criterion_linear_exactness() -> CriterionResult:
    """Unit-Courant d=3 free wave reproduces the d'Alembert oracle to 1e-12."""
    t0 = time.perf_counter()
    g = make_grid(3, 16.0, 2048)
    state = gaussian_bump(g, 1.0, 0.0, 1.0)
    out = evolve_linear(state, 3.0, cfl=1.0)

    def odd_profile(s):
        return s * np.exp(-(s**2))

    w_exact = 0.5 * (odd_profile(g.nodes + 3.0) + odd_profile(g.nodes - 3.0))
    sup_err = float(np.max(np.abs(g.nodes * out.u.values - w_exact)))
    return _result("linear-exactness", sup_err <= 1e-12, t0, sup_error=sup_err)


DECAY_CSV_HEADER = "t,crit_norm,sup_norm"


def criterion_free_decay(out_dir=None) -> CriterionResult:
    """Free-wave decay exponents fitted over t in [10, 100]."""
    t0 = time.perf_counter()
    g = make_grid(3, 576.0, 16384)
    state = outgoing_shell(g, 1.0, ramp_on=(0.2, 0.8), plateau_end=400.0, taper_width=50.0)
    fit = free_decay_test(state, np.geomspace(10.0, 100.0, 14))
    ok = -0.55 <= fit.slope_crit_norm <= -0.45 and fit.slope_sup_norm <= -0.9
    if out_dir is not None:
        from pathlib import Path

        lines = [DECAY_CSV_HEADER]
        for t, c, s in zip(fit.times, fit.crit_norms, fit.sup_norms):
            lines.append(f"{t:.17g},{c:.17g},{s:.17g}")
        Path(out_dir, "decay.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return _result(
        "free-decay", ok, t0, crit_slope=fit.slope_crit_norm, sup_slope=fit.slope_sup_norm
    )


def criterion_energy_conservation() -> CriterionResult:
    """Trace-energy drift <= 1e-4 at cfl .5, improving >= 3.5x at cfl .25."""
    t0 = time.perf_counter()
    g = make_grid(3, 64.0, 4096)
    drifts = {}
    for cfl in (0.5, 0.25):
        state = scaled_ground_state(g, 0.5, 1.0, taper=(24.0, 40.0))
        cfg = SolverConfig(coefficient=SINH2, zeta=+1, t_final=10.0, cfl=cfl, cadence=40)
        e = evolve(state, cfg).column("E_total")
        drifts[cfl] = float(np.max(np.abs(e - e[0])) / abs(e[0]))
    ratio = drifts[0.5] / drifts[0.25]
    ok = drifts[0.5] <= 1e-4 and ratio >= 3.5
    return _result(
        "energy-conservation", ok, t0, drift_half=drifts[0.5], drift_quarter=drifts[0.25], ratio=ratio
    )


def criterion_morawetz() -> CriterionResult:
    """Defocusing space-time estimate with positive margin at t_final=20."""
    t0 = time.perf_counter()
    g = make_grid(3, 30.0, 4096)
    cfg = SolverConfig(coefficient=GAUSS, zeta=-1, t_final=20.0, cfl=0.5, cadence=25)
    trace = evolve(gaussian_bump(g, 2.0, 0.0, 1.0), cfg)
    rep = morawetz_accumulate(trace, GAUSS)
    ok = rep.lhs <= rep.bound and rep.margin > 0.0
    return _result("morawetz", ok, t0, lhs=rep.lhs, bound=rep.bound, margin=rep.margin)


def _five_point_rate(vals, i, step):
    return (-vals[i + 2] + 8.0 * vals[i + 1] - 8.0 * vals[i - 1] + vals[i - 2]) / (12.0 * step)


def _five_point_curvature(vals, i, step):
    return (
        -vals[i + 2] + 16.0 * vals[i + 1] - 30.0 * vals[i] + 16.0 * vals[i - 1] - vals[i - 2]
    ) / (12.0 * step**2)


def criterion_virial_identities() -> CriterionResult:
    """Measured d/dt of the virial functional and d2/dt2 of the localized
    mass match the predicted identities at max(1e-3 scale, 5 kappa).

    Both documented runs stop while the solution is spatially resolved
    (sup stays ~3, far below the 1e3 amplitude window).
    """
    t0 = time.perf_counter()

    # combined virial functional on a 1.2x tapered bubble
    g = make_grid(3, 50.0, 4096)
    R = 24.0
    cfg = SolverConfig(coefficient=SINH2, zeta=+1, t_final=1.05, cfl=0.5, cadence=1, cutoff_radius=R)
    vir_vals, vir_pred, vir_kap, sups1 = [], [], [], []

    def vir_hook(s):
        rep = virial_functional(s, SINH2, R)
        vir_vals.append(rep.value)
        vir_pred.append(rep.rate_predicted)
        vir_kap.append(rep.kappa)
        sups1.append(float(np.max(np.abs(s.u.values))))
        return {}

    evolve(scaled_ground_state(g, 1.2, 1.0, taper=(10.0, 20.0)), cfg, hooks=(vir_hook,))
    step = 0.5 * g.dr
    idx = range(2, len(vir_vals) - 2)
    scale1 = max(abs(vir_pred[i]) for i in idx)
    kap1 = max(vir_kap)
    tol1 = max(1e-3 * scale1, 5.0 * kap1)
    worst1 = max(abs(_five_point_rate(vir_vals, i, step) - vir_pred[i]) for i in idx)

    # localized-mass curvature on the early window of a blow-up run
    g2 = make_grid(3, 48.0, 4096)
    R2 = 20.0
    cfg2 = SolverConfig(
        coefficient=SINH2, zeta=+1, t_final=0.2, cfl=0.5, cadence=1, cutoff_radius=R2
    )
    ys, cur, kap_loc, sups2 = [], [], [], []

    def loc_hook(s):
        rep = blowup_functional(s, SINH2, R2)
        ys.append(rep.value)
        cur.append(rep.curvature_predicted)
        kap_loc.append(rep.kappa)
        sups2.append(float(np.max(np.abs(s.u.values))))
        return {}

    evolve(scaled_ground_state(g2, 1.5, 0.5, taper=(14.0, 18.0)), cfg2, hooks=(loc_hook,))
    step2 = 0.5 * g2.dr
    idx2 = range(2, len(ys) - 2)
    scale2 = max(abs(cur[i]) for i in idx2)
    kap2 = max(kap_loc)
    tol2 = max(1e-3 * scale2, 5.0 * kap2)
    worst2 = max(abs(_five_point_curvature(ys, i, step2) - cur[i]) for i in idx2)

    in_window = max(sups1) < 1e3 and max(sups2) < 1e3
    ok = worst1 <= tol1 and worst2 <= tol2 and in_window
    return _result(
        "virial-identities",
        ok,
        t0,
        virial_worst=worst1,
        virial_tol=tol1,
        virial_kappa=kap1,
        mass_worst=worst2,
        mass_tol=tol2,
        mass_kappa=kap2,
        sup_max=(max(sups1), max(sups2)),
    )


SWEEP_AMPLITUDES_SCATTER = (0.25, 0.5, 0.75)
SWEEP_AMPLITUDES_BLOWUP = (1.5, 1.75, 2.0)
SWEEP_SCALE = 0.5
SWEEP_TAPER = (18.0, 42.0)


def sweep_row(a: float, grid=None, t_final: float = 40.0):
    """One threshold-sweep row: prediction, confirmed outcome, comparison.

    The sweep runs at cfl 0.25: the blow-up event-time lag between
    resolutions is dt-dominated, and the smaller step keeps the documented
    refinement gap near 3%, inside the 5% consistency requirement.
    """
    ground = ground_state_constants(3)
    if grid is None:
        grid = make_grid(3, 84.0, 4096)
    builder = lambda g: scaled_ground_state(g, a, SWEEP_SCALE, taper=SWEEP_TAPER)
    pred = predict_focusing(builder(grid), SINH2, ground)
    cfg = SolverConfig(coefficient=SINH2, zeta=+1, t_final=t_final, cfl=0.25, cadence=50)
    trace = evolve_confirmed(builder, grid, cfg)
    row = compare(pred, trace.outcome)
    return pred, trace, row


SWEEP_CSV_HEADER = "a,E_phi,grad_ratio,prediction,outcome,verdict"


def criterion_threshold_sweep(out_dir=None) -> CriterionResult:
    """Predicted and observed dichotomy across the amplitude sweep."""
    t0 = time.perf_counter()
    details = {}
    csv_rows = [SWEEP_CSV_HEADER]
    grad_norm = ground_state_constants(3).grad_norm
    ok = True
    for a in SWEEP_AMPLITUDES_SCATTER + SWEEP_AMPLITUDES_BLOWUP:
        pred, trace, row = sweep_row(a)
        details[f"a={a}"] = {
            "prediction": pred.verdict,
            "outcome": trace.outcome.kind,
            "verdict": row.verdict,
            "t_event": trace.outcome.t_event,
            "refinement_consistent": trace.outcome.evidence.refinement_consistent,
            "energy_margin": pred.energy_margin,
        }
        csv_rows.append(
            f"{a:.17g},{pred.energy_value:.17g},{pred.norm_value / grad_norm:.17g},"
            f"{pred.verdict},{trace.outcome.kind},{row.verdict}"
        )
        ok &= row.verdict == "Consistent"
        if a in SWEEP_AMPLITUDES_SCATTER:
            ok &= pred.verdict == SCATTER and trace.outcome.kind == "Dispersed"
        else:
            ok &= pred.verdict == BLOW_UP and pred.energy_margin > 0
            ok &= trace.outcome.kind == "BlewUp"
            ok &= trace.outcome.evidence.refinement_consistent is True
    if out_dir is not None:
        from pathlib import Path

        Path(out_dir, "sweep.csv").write_text("\n".join(csv_rows) + "\n", encoding="utf-8")
    return _result("threshold-sweep", ok, t0, **details)


def criterion_constant_coefficient() -> CriterionResult:
    """Two-path prediction agreement and two-run solution agreement."""
    t0 = time.perf_counter()
    ground = ground_state_constants(3)
    details = {}
    ok = True

    big = make_grid(3, 1024.0, 1 << 14)
    from .ground_state import ground_state_value
    from .grid import RadialField

    for c in (1.0 / 16.0, 0.5):
        for a in (0.5, 1.4):
            vals = a * ground_state_value(3, big.nodes)
            state = WaveState(RadialField(big, vals), RadialField.zeros(big))
            direct = predict_constant_c(state, c, ground)
            via_unit = predict_focusing(
                state.scaled(c**0.25), CoefficientSpec.constant(1.0), ground
            )
            details[f"c={c},a={a}"] = (direct.verdict, via_unit.verdict)
            ok &= direct.verdict == via_unit.verdict

    g = make_grid(3, 24.0, 2048)
    for c in (1.0 / 16.0, 0.5):
        state = scaled_ground_state(g, 0.3, 1.0, taper=(8.0, 14.0))
        cfg_c = SolverConfig(coefficient=CoefficientSpec.constant(c), zeta=+1, t_final=1.0, cfl=0.5)
        cfg_1 = SolverConfig(coefficient=CoefficientSpec.constant(1.0), zeta=+1, t_final=1.0, cfl=0.5)
        mapped = rescale_constant_coefficient(evolve(state, cfg_c).final_state, c)
        direct = evolve(rescale_constant_coefficient(state, c), cfg_1).final_state
        sup = float(np.max(np.abs(mapped.u.values - direct.u.values)))
        details[f"two_run_sup_c={c}"] = sup
        ok &= sup <= 1e-6
    return _result("constant-coefficient", ok, t0, **details)


def criterion_hyperbolic_bridge() -> CriterionResult:
    """Transform isometries, intertwining convergence, energy equality and
    verdict-for-verdict prediction agreement on the 6-point sweep."""
    t0 = time.perf_counter()
    details = {}
    ok = True

    from .grid import h1_seminorm, lp_norm
    from .functionals import energy as flat_energy
    from .hyperbolic import h3_integrate

    g = make_grid(3, 16.0, 1 << 16)
    v = H3RadialField.from_function(g, lambda r: np.exp(-(r**2)))
    flat = to_euclidean(v)
    l2_flat = lp_norm(flat, 2.0)
    l2_hyp = math.sqrt(h3_integrate(H3RadialField(g, v.values**2)))
    rel_l2 = abs(l2_flat - l2_hyp) / l2_hyp
    grad_term, mass_term = h01_norm_sq(v)
    rel_h1 = abs(math.sqrt(grad_term - mass_term) - h1_seminorm(flat)) / h1_seminorm(flat)
    details["l2_isometry_rel"] = rel_l2
    details["sobolev_isometry_rel"] = rel_h1
    ok &= rel_l2 <= 1e-6 and rel_h1 <= 1e-6

    res = {}
    for n in (2048, 8192):
        gg = make_grid(3, 16.0, n)
        res[n] = intertwining_residual(
            H3RadialField.from_function(gg, lambda r: np.exp(-(r**2)))
        ).sup_residual
    order = math.log(res[2048] / res[8192]) / math.log(4.0)
    details["intertwining_order"] = order
    ok &= order >= 1.9

    vt = H3RadialField.from_function(g, lambda r: 0.4 * np.exp(-2.0 * r**2))
    lhs = h3_energy(v, vt).total
    state = WaveState(to_euclidean(v), to_euclidean(vt))
    rhs = flat_energy(state, BRIDGE_COEFFICIENT, zeta=+1).total
    rel_e = abs(lhs - rhs) / abs(rhs)
    details["energy_equality_rel"] = rel_e
    ok &= rel_e <= 1e-6

    ground = ground_state_constants(3)
    g6 = make_grid(3, 24.0, 8192)
    zero = H3RadialField.zeros(g6)
    agreement = []
    for b in (0.5, 1.0, 1.5, 2.0, 2.5, 3.0):
        vb = H3RadialField.from_function(g6, lambda r: b * np.exp(-(r**2)))
        pred_h3 = h3_predict(vb, zero, ground)
        direct = predict_focusing(
            WaveState(to_euclidean(vb), to_euclidean(zero)), BRIDGE_COEFFICIENT, ground
        )
        agreement.append((b, pred_h3.verdict, direct.verdict))
        ok &= pred_h3.verdict == direct.verdict
    details["sweep"] = agreement
    return _result("hyperbolic-bridge", ok, t0, **details)


def criterion_condition_checkers() -> CriterionResult:
    """Structural-condition verdicts with refinement stability."""
    t0 = time.perf_counter()
    details = {}
    ok = True
    for sigma in (2.0, 3.0, 4.0, 5.0, 6.0):
        rep = check_focusing_condition(CoefficientSpec.sinh_power(sigma))
        details[f"focusing_sigma_{sigma:g}"] = rep.passed
        ok &= rep.passed
    unit = check_focusing_condition(CoefficientSpec.constant(1.0))
    details["focusing_constant_min"] = unit.min_value
    ok &= unit.passed and abs(unit.min_value) <= 1e-12

    decreasing = (
        CoefficientSpec.constant(1.0),
        CoefficientSpec.constant(0.5),
        CoefficientSpec.gaussian(1.0),
        CoefficientSpec.sinh_power(2.0),
        CoefficientSpec.sinh_power(6.0),
    )
    for spec in decreasing:
        rep = check_defocusing_condition(spec)
        details[f"defocusing_{spec.family}_{sorted(spec.params.items())}"] = rep.passed
        ok &= rep.passed

    g1 = make_grid(3, 50.0, 50_000)
    g2 = g1.refined()
    for spec in decreasing + (CoefficientSpec.sinh_power(4.0),):
        stable = (
            check_defocusing_condition(spec, g1).passed == check_defocusing_condition(spec, g2).passed
            and check_focusing_condition(spec, g1).passed == check_focusing_condition(spec, g2).passed
        )
        ok &= stable
    details["refinement_stable"] = ok
    return _result("condition-checkers", ok, t0, **details)


CRITERIA = (
    ("ground-constants", criterion_ground_constants),
    ("stationarity", criterion_stationarity),
    ("linear-exactness", criterion_linear_exactness),
    ("free-decay", criterion_free_decay),
    ("energy-conservation", criterion_energy_conservation),
    ("morawetz", criterion_morawetz),
    ("virial-identities", criterion_virial_identities),
    ("threshold-sweep", criterion_threshold_sweep),
    ("constant-coefficient", criterion_constant_coefficient),
    ("hyperbolic-bridge", criterion_hyperbolic_bridge),
    ("condition-checkers", criterion_condition_checkers),
)


ARTIFACT_CRITERIA = {"free-decay", "threshold-sweep"}


def run_acceptance(only: str | None = None, out_dir=None):
    """Run every criterion (or the ones whose name contains `only`).

    out_dir, when given, receives the CSV artifacts of the decay and sweep
    criteria (the plotting package consumes exactly these files).
    """
    results = []
    for name, fn in CRITERIA:
        if only is not None and only not in name:
            continue
        if out_dir is not None and name in ARTIFACT_CRITERIA:
            results.append(fn(out_dir=out_dir))
        else:
            results.append(fn())
    return results

"""Named experiments with pinned grids and durations."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from .dispersion import glue_beta_star, hadeler_rothe_speed, large_d_condition, nonlocal_linear_speed
from .model import KernelSpec, LVModel, LVParams, ModelSpec, NonlinearityFamily, NonlocalModel
from .output import OutputDir
from .speed import CauchySetup, SpreadingRun, speed_excess, spreading_speed
from .waves.shooting import scalar_min_speed

SQRT2 = math.sqrt(2.0)
V_FIG = 2.0 / 3.0


@dataclass(frozen=True)
class CauchyCase:
    label: str
    model: ModelSpec
    setup: CauchySetup
    reference: float


def _lv(d=1.0, r=1.0, a=0.5, b=0.5) -> LVModel:
    return LVModel(LVParams(a=a, b=b, d=d, r=r))


def _fixed_frame_length(speed_bound: float, t_end: float, x0: float = 10.0, margin: float = 50.0) -> float:
    return x0 + speed_bound * t_end + margin


FIGURE1_CASES = (
    CauchyCase("d=1", _lv(d=1.0),
               CauchySetup(length=400.0, h=0.1, t_end=300.0, v_background=V_FIG), SQRT2),
    # Large d converges slowly towards its speed; fine grid and long horizon.
    CauchyCase("d=50", _lv(d=50.0),
               CauchySetup(length=500.0, h=0.05, t_end=4000.0, dt=0.01, scheme="imex_diffusion",
                           v_background=V_FIG, sample_dt=1.0), SQRT2),
)

# With tiny r the far field keeps v = 2/3, so the window stays fixed instead of
# being refilled with the limit state.
FIGURE2_CASES = (
    CauchyCase("r=1", _lv(r=1.0),
               CauchySetup(length=400.0, h=0.1, t_end=300.0, v_background=V_FIG), SQRT2),
    CauchyCase("r=1e-05", _lv(r=1e-5),
               CauchySetup(length=_fixed_frame_length(1.7, 300.0), h=0.1, t_end=300.0,
                           v_background=V_FIG, comoving=False), SQRT2),
)

BETA_STAR_CASE = CauchyCase(
    "d=400", _lv(d=400.0),
    CauchySetup(length=1000.0, h=0.1, t_end=400.0, scheme="imex_diffusion", v_background=1.0), SQRT2)

NONLOCAL_KERNEL_H = 1e-3
NONLOCAL_CASE = CauchyCase(
    "uniform", NonlocalModel(NonlinearityFamily("fisher_kpp"), KernelSpec.uniform(1.0, 0.1)),
    CauchySetup(length=400.0, h=0.1, t_end=200.0), math.nan)

HR_VALUES = (0.0, 1.0, 2.0, 3.0, 4.0, 8.0)


def run_case(case: CauchyCase) -> SpreadingRun:
    return spreading_speed(case.model, case.setup)


def case_summary(case: CauchyCase, run: SpreadingRun, reference: Optional[float] = None) -> dict:
    ref = case.reference if reference is None else reference
    est = run.estimate
    ex = speed_excess(est, ref)
    return {
        "label": case.label,
        "reference_speed": ref,
        "c_hat": est.c_hat,
        "ci_half_width": est.ci_half_width,
        "late_x_over_t": est.ratio_tail,
        "window": list(est.window),
        "excess": ex.excess,
        "exceeds_reference": ex.significant,
        "within_ci": ex.within_ci,
        "dt": run.config.dt,
        "scheme": run.config.scheme,
        "h": case.setup.h,
        "t_end": case.setup.t_end,
    }


def _track_rows(run: SpreadingRun):
    t, x = run.track.t, run.track.x
    for ti, xi in zip(t.tolist(), x.tolist()):
        yield ti, xi, (xi / ti if ti > 0 else math.nan)


def _cauchy_preset(name: str, cases: Sequence[CauchyCase], out: Optional[OutputDir], svg: bool,
                   log: Callable[[str], None]) -> dict:
    results, curves = [], []
    for case in cases:
        t0 = time.perf_counter()
        run = run_case(case)
        summ = case_summary(case, run)
        summ["wall_time_s"] = round(time.perf_counter() - t0, 2)
        results.append(summ)
        log(f"{name} {case.label}: c_hat={summ['c_hat']:.5f} ci={summ['ci_half_width']:.2e}")
        if out is not None:
            out.write_csv(f"{name}_{case.label.replace('=', '')}.csv", ("t", "x", "x_over_t"),
                          _track_rows(run))
        pos = run.track.t > 5.0
        curves.append((case.label, run.track.t[pos].tolist(), (run.track.x[pos] / run.track.t[pos]).tolist()))
    payload = {"preset": name, "cases": results}
    if out is not None:
        out.write_json(f"{name}.json", payload)
        if svg:
            out.write_svg(f"{name}.svg", series=curves, hlines=[(SQRT2, "sqrt(2)")],
                          title=name, xlabel="t", ylabel="x(t)/t")
    return payload


def figure1(out=None, svg=False, log=print, cases=FIGURE1_CASES) -> dict:
    return _cauchy_preset("figure1", cases, out, svg, log)


def figure2(out=None, svg=False, log=print, cases=FIGURE2_CASES) -> dict:
    return _cauchy_preset("figure2", cases, out, svg, log)


def hadeler_rothe_table(out=None, svg=False, log=print, values=HR_VALUES, tol=1e-5) -> dict:
    rows = []
    for s in values:
        c_shoot = scalar_min_speed(NonlinearityFamily("hadeler_rothe", s), tol=tol)
        c_exact = hadeler_rothe_speed(s)
        rows.append({"s": s, "c_shooting": c_shoot, "c_formula": c_exact, "abs_error": abs(c_shoot - c_exact)})
        log(f"hadeler_rothe s={s:g}: shooting={c_shoot:.6f} formula={c_exact:.6f}")
    payload = {"preset": "hadeler_rothe_table", "rows": rows,
               "max_abs_error": max(r["abs_error"] for r in rows)}
    if out is not None:
        out.write_csv("hadeler_rothe_table.csv", ("s", "c_shooting", "c_formula", "abs_error"),
                      ([r["s"], r["c_shooting"], r["c_formula"], r["abs_error"]] for r in rows))
        out.write_json("hadeler_rothe_table.json", payload)
        if svg:
            s_fine = np.linspace(0.0, max(values), 200)
            out.write_svg("hadeler_rothe_table.svg",
                          series=[("formula", s_fine.tolist(), [hadeler_rothe_speed(x) for x in s_fine]),
                                  ("shooting", [r["s"] for r in rows], [r["c_shooting"] for r in rows])],
                          title="minimal speed", xlabel="s", ylabel="c*")
    return payload


def beta_star_check(out=None, svg=False, log=print, case=BETA_STAR_CASE) -> dict:
    params = case.model.params
    glue = glue_beta_star(params)
    lhs, rhs = large_d_condition(params)
    run = run_case(case)
    summ = case_summary(case, run)
    pred = glue.predicted_speed
    summ["relative_gap_to_prediction"] = abs(summ["c_hat"] - pred) / pred if pred else math.nan
    log(f"beta_star_check: beta*={glue.beta_star:.7f} predicted={pred:.5f} measured={summ['c_hat']:.5f}")
    payload = {"preset": "beta_star_check", "condition_lhs": lhs, "condition_rhs": rhs,
               "glue": glue.to_dict(), "run": summ}
    if out is not None:
        out.write_csv("beta_star_check_track.csv", ("t", "x", "x_over_t"), _track_rows(run))
        out.write_json("beta_star_check.json", payload)
        if svg:
            pos = run.track.t > 5.0
            out.write_svg("beta_star_check.svg",
                          series=[(case.label, run.track.t[pos].tolist(),
                                   (run.track.x[pos] / run.track.t[pos]).tolist())],
                          hlines=[(SQRT2, "sqrt(2)"), (pred, "glue prediction")],
                          title="beta_star_check", xlabel="t", ylabel="x(t)/t")
    return payload


def nonlocal_kpp(out=None, svg=False, log=print, case=NONLOCAL_CASE,
                 kernel_h=NONLOCAL_KERNEL_H) -> dict:
    fam = case.model.family
    fine = nonlocal_linear_speed(KernelSpec.uniform(1.0, kernel_h), fam.gamma0)
    sim = nonlocal_linear_speed(case.model.kernel, fam.gamma0)
    run = run_case(case)
    summ = case_summary(case, run, reference=fine.c0_star)
    summ["relative_gap"] = abs(summ["c_hat"] - fine.c0_star) / fine.c0_star
    log(f"nonlocal_kpp: c0*={fine.c0_star:.7f} c_hat={summ['c_hat']:.5f}")
    payload = {"preset": "nonlocal_kpp", "c0_star": fine.c0_star, "lambda0": fine.lambda0,
               "kernel_h": kernel_h, "c0_star_simulation_kernel": sim.c0_star, "run": summ}
    if out is not None:
        out.write_csv("nonlocal_kpp_track.csv", ("t", "x", "x_over_t"), _track_rows(run))
        out.write_json("nonlocal_kpp.json", payload)
        if svg:
            pos = run.track.t > 5.0
            out.write_svg("nonlocal_kpp.svg",
                          series=[(case.label, run.track.t[pos].tolist(),
                                   (run.track.x[pos] / run.track.t[pos]).tolist())],
                          hlines=[(fine.c0_star, "c0*")], title="nonlocal_kpp", xlabel="t",
                          ylabel="x(t)/t")
    return payload


PRESETS: Dict[str, Callable[..., dict]] = {
    "figure1": figure1,
    "figure2": figure2,
    "hadeler_rothe_table": hadeler_rothe_table,
    "beta_star_check": beta_star_check,
    "nonlocal_kpp": nonlocal_kpp,
}

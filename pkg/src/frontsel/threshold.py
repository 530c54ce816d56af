"""Selection verdicts, threshold bisection and parameter sweeps."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import BracketError, ContractError, DomainError, FrontselError
from .model import LVModel, ModelSpec, NonlocalModel, ScalarModel
from .speed import CauchySetup, speed_excess, spreading_speed
from .waves.lv_bvp import BVPGrid, linear_speed_for, lv_min_speed, lv_wave_bvp, pushed_integral
from .waves.shooting import minimal_wave, scalar_min_speed, shoot
from .waves.tails import fit_tail

METHODS = ("tw_bisection", "cauchy_speed")
MEASUREMENTS = ("c_hat", "excess", "c_star", "tail_class", "I", "verdict")


@dataclass(frozen=True)
class ModelFamily:
    """One-parameter family obtained by varying ``parameter`` of ``base``.

    ``s`` (alias ``q``) varies the nonlinearity of scalar and nonlocal
    models; ``a``, ``b``, ``d``, ``r`` vary competition parameters.
    """

    base: ModelSpec
    parameter: str

    def __post_init__(self):
        ok = ("a", "b", "d", "r") if isinstance(self.base, LVModel) else ("s", "q")
        if self.parameter not in ok:
            raise DomainError(f"parameter {self.parameter!r} not valid for {self.base.kind}")

    def at(self, p: float) -> ModelSpec:
        p = float(p)
        if isinstance(self.base, LVModel):
            return LVModel(self.base.params.replace(**{self.parameter: p}))
        fam = self.base.family.with_parameter(p)
        if isinstance(self.base, NonlocalModel):
            return NonlocalModel(fam, self.base.kernel)
        return ScalarModel(fam)


@dataclass
class Verdict:
    parameter: Optional[float]
    verdict: str
    method: str
    linear_speed: float
    c_hat: Optional[float] = None
    excess: Optional[float] = None
    ci_half_width: Optional[float] = None
    integral: Optional[float] = None
    integral_bound: Optional[float] = None
    note: str = ""

    @property
    def linear(self) -> bool:
        return self.verdict == "linear"

    def to_dict(self) -> dict:
        return asdict(self)


class LVWaveCache:
    """Linear-speed LV waves reused as Newton guesses across nearby parameters."""

    def __init__(self, grid: Optional[BVPGrid] = None, h: float = 0.02, db: float = 0.05):
        self.grid, self.h, self.db = grid, h, db
        self.profiles = {}

    def solve(self, model: LVModel):
        params = model.params
        grid = self.grid or BVPGrid.for_params(params, linear_speed_for(params, self.h)[0], self.h)
        key = (params.a, params.b, params.d, params.r)
        if key in self.profiles:
            return self.profiles[key]
        guess = None
        if self.profiles:
            near = min(self.profiles, key=lambda k: sum(abs(x - y) for x, y in zip(k, key)))
            guess = self.profiles[near]
        try:
            prof = lv_wave_bvp(params, grid=grid, initial_guess=guess)
        except FrontselError:
            if guess is None:
                raise
            prof = self._walk(guess, params, grid)
        self.profiles[key] = prof
        return prof

    def _walk(self, start, params, grid):
        """Natural-parameter continuation from ``start`` with step halving."""
        src = start.model.params
        t, step, prof = 0.0, 0.25, start
        while t < 1.0:
            nt = min(1.0, t + step)
            mid = src.replace(**{k: getattr(src, k) + nt * (getattr(params, k) - getattr(src, k))
                                 for k in ("a", "b", "d", "r")})
            try:
                prof = lv_wave_bvp(mid, grid=grid, initial_guess=prof)
                t, step = nt, min(0.25, 2 * step)
            except FrontselError:
                step *= 0.5
                if step < 1e-6:
                    raise
        return prof


def default_margin(ci: float) -> float:
    return max(3.0 * ci, 1e-2)


def selection_verdict(model: ModelSpec, method: str = "tw_bisection", margin: Optional[float] = None,
                      setup: Optional[CauchySetup] = None, cache: Optional[LVWaveCache] = None,
                      parameter: Optional[float] = None) -> Verdict:
    """Linear or nonlinear selection of the minimal/spreading speed.

    ``tw_bisection``: scalar models test whether a monotone wave exists at
    the linear speed; LV models use the sign of the pushed integral of the
    linear-speed wave. Nonlocal models always use ``cauchy_speed``, which
    compares a measured spreading speed with the linear speed and declares
    nonlinear selection when the excess exceeds ``margin``.
    """
    if method not in METHODS:
        raise DomainError(f"unknown verdict method {method!r}")
    if method == "tw_bisection" and isinstance(model, ScalarModel):
        c_lin = model.linear_speed
        ok = shoot(model.family, c_lin).connects
        c_hat = c_lin if ok else scalar_min_speed(model.family, tol=1e-4)
        return Verdict(parameter, "linear" if ok else "nonlinear", method, c_lin, c_hat, c_hat - c_lin)
    if method == "tw_bisection" and isinstance(model, LVModel):
        cache = cache or LVWaveCache()
        prof = cache.solve(model)
        crit = pushed_integral(prof, refine=False)
        bad = prof.u.min() < 0.0 or np.any(np.diff(prof.u) > 1e-12)
        nonlinear = crit.integral_value > 0.0 or bad
        return Verdict(parameter, "nonlinear" if nonlinear else "linear", method, model.linear_speed,
                       integral=crit.integral_value, integral_bound=crit.error_bound,
                       note="non-monotone linear-speed solution" if bad else "")
    setup = setup or CauchySetup()
    run = spreading_speed(model, setup)
    c_lin = model.linear_speed
    ex = speed_excess(run.estimate, c_lin)
    m = default_margin(ex.ci_half_width) if margin is None else margin
    return Verdict(parameter, "nonlinear" if ex.excess > m else "linear", "cauchy_speed", c_lin,
                   run.estimate.c_hat, ex.excess, ex.ci_half_width, note=f"margin={m:.4g}")


@dataclass
class ThresholdResult:
    parameter: str
    bracket: tuple
    estimate: float
    tol: float
    method: str
    increasing: bool
    log: List[Verdict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "schema": "frontsel.threshold/1",
            "parameter": self.parameter,
            "bracket": list(self.bracket),
            "estimate": self.estimate,
            "tol": self.tol,
            "method": self.method,
            "increasing": self.increasing,
            "log": [v.to_dict() for v in self.log],
        }


def _check_monotone(log: Sequence[Verdict]):
    pts = sorted(log, key=lambda v: v.parameter)
    flips = sum(1 for u, w in zip(pts, pts[1:]) if u.verdict != w.verdict)
    if flips > 1:
        seq = ", ".join(f"{v.parameter:.6g}:{v.verdict}" for v in pts)
        raise ContractError(f"verdicts are not monotone in the parameter: {seq}")


def find_threshold(family: ModelFamily, bracket, tol: float = 1e-2, method: str = "tw_bisection",
                   margin: Optional[float] = None, setup: Optional[CauchySetup] = None,
                   bvp_h: float = 0.02) -> ThresholdResult:
    """Bisection for the parameter where selection switches from linear to nonlinear."""
    lo, hi = map(float, bracket)
    if not hi > lo:
        raise BracketError("bracket must satisfy lo < hi")
    cache = None
    if isinstance(family.base, LVModel) and method == "tw_bisection":
        g_lo = BVPGrid.for_params(family.at(lo).params, linear_speed_for(family.at(lo).params, bvp_h)[0], bvp_h)
        g_hi = BVPGrid.for_params(family.at(hi).params, linear_speed_for(family.at(hi).params, bvp_h)[0], bvp_h)
        cache = LVWaveCache(BVPGrid(min(g_lo.xi_min, g_hi.xi_min), max(g_lo.xi_max, g_hi.xi_max), bvp_h), bvp_h)

    def judge(p):
        return selection_verdict(family.at(p), method, margin, setup, cache, parameter=p)

    log = [judge(lo), judge(hi)]
    if log[0].verdict == log[1].verdict:
        raise BracketError(f"both bracket ends are {log[0].verdict}: [{lo}, {hi}]")
    increasing = log[0].linear
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        v = judge(mid)
        log.append(v)
        if v.linear == increasing:
            lo = mid
        else:
            hi = mid
        _check_monotone(log)
    return ThresholdResult(family.parameter, (lo, hi), 0.5 * (lo + hi), tol, method, increasing, log)


# ---------------------------------------------------------------- sweeps

@dataclass(frozen=True)
class _SweepTask:
    family: ModelFamily
    value: float
    measurements: tuple
    setup: Optional[CauchySetup]
    method: str


def minimal_wave_for(model: ModelSpec, h: float = 0.02):
    if isinstance(model, ScalarModel):
        return minimal_wave(model.family)
    if isinstance(model, LVModel):
        return lv_min_speed(model.params, h=h)[1]
    from .waves.nonlocal_waves import nonlocal_minimal_wave

    return nonlocal_minimal_wave(model)


def _measure(task: _SweepTask) -> dict:
    row: Dict[str, object] = {task.family.parameter: task.value}
    model = task.family.at(task.value)
    try:
        need_run = any(m in task.measurements for m in ("c_hat", "excess"))
        if need_run:
            run = spreading_speed(model, task.setup or CauchySetup())
            ex = speed_excess(run.estimate, model.linear_speed)
            if "c_hat" in task.measurements:
                row["c_hat"] = run.estimate.c_hat
                row["ci_half_width"] = run.estimate.ci_half_width
            if "excess" in task.measurements:
                row["excess"] = ex.excess
                row.setdefault("ci_half_width", ex.ci_half_width)
        wave = None
        if "c_star" in task.measurements or "tail_class" in task.measurements:
            wave = minimal_wave_for(model)
            if "c_star" in task.measurements:
                row["c_star"] = wave.c
            if "tail_class" in task.measurements:
                row["tail_class"] = fit_tail(wave).tail_class
        if "I" in task.measurements:
            if not isinstance(model, LVModel):
                raise ContractError("the pushed integral is defined for the LV system only")
            crit = pushed_integral(lv_wave_bvp(model.params))
            row["I"] = crit.integral_value
            row["I_bound"] = crit.error_bound
        if "verdict" in task.measurements:
            row["verdict"] = selection_verdict(model, task.method, setup=task.setup).verdict
        row["error"] = ""
    except FrontselError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


@dataclass
class SweepTable:
    parameter: str
    columns: List[str]
    rows: List[dict]

    def column(self, name: str) -> list:
        return [r.get(name) for r in self.rows]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.DictWriter(fh, fieldnames=self.columns, extrasaction="ignore")
            wr.writeheader()
            for r in self.rows:
                wr.writerow({k: r.get(k, "") for k in self.columns})


def sweep(family: ModelFamily, values: Sequence[float], measurements: Sequence[str] = (),
          setup: Optional[CauchySetup] = None, workers: int = 1,
          method: str = "tw_bisection") -> SweepTable:
    """Evaluate ``measurements`` at each parameter value; rows come back in grid order."""
    values = [float(v) for v in values]
    if not values:
        raise ContractError("empty parameter grid")
    bad = [m for m in measurements if m not in MEASUREMENTS]
    if bad:
        raise DomainError(f"unknown measurements {bad}; choose from {MEASUREMENTS}")
    meas = tuple(measurements)
    if not meas:
        return SweepTable(family.parameter, [family.parameter], [{family.parameter: v} for v in values])
    tasks = [_SweepTask(family, v, meas, setup, method) for v in values]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_measure, tasks))
    else:
        rows = [_measure(t) for t in tasks]
    cols = [family.parameter]
    for r in rows:
        for k in r:
            if k not in cols and k != "error":
                cols.append(k)
    cols.append("error")
    return SweepTable(family.parameter, cols, rows)

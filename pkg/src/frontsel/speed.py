"""Spreading-speed estimates from front-position time series."""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .dispersion import scheme_linear_speed
from .errors import ContractError
from .model import LVModel, ModelSpec, NonlocalModel
from .simulate import (FieldState, Grid1D, StepperConfig, TimeSeries, default_config, init_front,
                       locate_level, run_until)

MIN_SAMPLES = 20


class EmptyTrackError(ContractError):
    pass


@dataclass
class FrontTrack:
    t: np.ndarray
    x: np.ndarray
    level: float = 0.5

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.x = np.asarray(self.x, dtype=float)
        if self.t.shape != self.x.shape:
            raise ContractError("track arrays differ in length")
        if self.t.size > 1 and np.any(np.diff(self.t) <= 0):
            raise ContractError("track times must be strictly increasing")

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t", "x", "x_over_t"])
            for t, x in zip(self.t.tolist(), self.x.tolist()):
                wr.writerow([t, x, x / t if t > 0 else math.nan])


def track_front(series, level: float = 0.5) -> FrontTrack:
    """Front positions ``sup{x : u >= level}`` from a :class:`TimeSeries` or a snapshot list.

    Snapshot lists hold :class:`FieldState` objects; positions are in absolute
    coordinates (the co-moving shift is folded in).
    """
    if not 0.0 < level < 1.0:
        raise ContractError("level must lie in (0, 1)")
    if isinstance(series, TimeSeries):
        t = np.asarray(series.t)
        if level in series.front:
            x = np.asarray(series.front[level])
        elif series.snapshots is not None:
            x = np.array([locate_level(xs, u, level) for xs, u in zip(series.snapshot_x, series.snapshots)])
        else:
            raise ContractError(f"series was not recorded at level {level}")
    else:
        states: Sequence[FieldState] = list(series)
        t = np.array([s.t for s in states])
        x = np.array([locate_level(s.x, s.u, level) for s in states])
    if x.size == 0 or not math.isfinite(x[0]):
        raise EmptyTrackError(f"level {level} is not attained at the initial time")
    keep = np.isfinite(x)
    return FrontTrack(t[keep], x[keep], level)


@dataclass
class SpeedEstimate:
    """Late-window speed. ``ci_half_width`` is a diagnostic band, not a rigorous interval.

    It adds the 2-sigma slope error, the bias of the discrete stepper's linear
    speed (``resolution_band``, set by :func:`spreading_speed`) and a transient band: the slopes of the two
    halves of the window are matched to a front ``x = c t - K log t`` and the
    band is the gap between the window slope and ``c`` under that law, which
    covers logarithmically converging fronts.
    """

    c_hat: float
    ci_half_width: float
    window: tuple
    method: str
    ratio_tail: float
    slope_sigma: float
    transient_band: float
    n_samples: int
    intercept: float
    resolution_band: float = 0.0

    def with_resolution_band(self, band: float) -> "SpeedEstimate":
        """Add the stepper's own linear-speed bias to the band."""
        return replace(self, resolution_band=float(band),
                       ci_half_width=self.ci_half_width - self.resolution_band + float(band))

    def to_dict(self) -> dict:
        return asdict(self)


def _slope(t, x):
    A = np.column_stack((t, np.ones_like(t)))
    coef, *_ = np.linalg.lstsq(A, x, rcond=None)
    res = x - A @ coef
    n = t.size
    s2 = float(res @ res) / max(n - 2, 1)
    sxx = float(((t - t.mean()) ** 2).sum())
    return float(coef[0]), float(coef[1]), math.sqrt(s2 / sxx) if sxx > 0 else math.inf


def _secant(ta, tb):
    return math.log(tb / ta) / (tb - ta)


def _transient_band(tw, xw) -> float:
    if tw[0] <= 0:
        return 0.0
    half = tw.size // 2
    c1, _, _ = _slope(tw[: half + 1], xw[: half + 1])
    c2, _, _ = _slope(tw[half:], xw[half:])
    ta, tm, tb = tw[0], tw[half], tw[-1]
    denom = _secant(ta, tm) - _secant(tm, tb)
    K = (c2 - c1) / denom if denom > 0 else 0.0
    return abs(K) * _secant(ta, tb)


def estimate_speed(track: FrontTrack, t_lo_fraction: float = 0.5) -> SpeedEstimate:
    if not 0.0 <= t_lo_fraction < 1.0:
        raise ContractError("t_lo_fraction must lie in [0, 1)")
    t, x = track.t, track.x
    if t.size == 0:
        raise EmptyTrackError("empty track")
    sel = t >= t_lo_fraction * t[-1]
    tw, xw = t[sel], x[sel]
    if tw.size < MIN_SAMPLES:
        raise ContractError(f"need >= {MIN_SAMPLES} samples in the fit window, have {tw.size}")
    c, b0, sig = _slope(tw, xw)
    band = _transient_band(tw, xw)
    pos = tw > 0
    ratio = float(np.mean(xw[pos] / tw[pos])) if pos.any() else math.nan
    ci = 2.0 * sig + band
    return SpeedEstimate(c, float(ci), (float(tw[0]), float(tw[-1])), "slope_fit", ratio,
                         sig, float(band), int(tw.size), b0)


@dataclass
class SpeedExcess:
    excess: float
    ci_half_width: float
    linear_speed: float

    @property
    def significant(self) -> bool:
        """Positive beyond the band: evidence of nonlinear selection."""
        return self.excess > self.ci_half_width

    @property
    def within_ci(self) -> bool:
        return abs(self.excess) <= self.ci_half_width

    def to_dict(self) -> dict:
        out = asdict(self)
        out.update(significant=self.significant, within_ci=self.within_ci)
        return out


def speed_excess(estimate, linear_speed: float) -> SpeedExcess:
    if isinstance(estimate, FrontTrack):
        estimate = estimate_speed(estimate)
    return SpeedExcess(estimate.c_hat - linear_speed, estimate.ci_half_width, linear_speed)


@dataclass(frozen=True)
class CauchySetup:
    """Standard front-invasion Cauchy problem used for speed measurements."""

    length: float = 400.0
    h: float = 0.1
    t_end: float = 100.0
    x0: float = 10.0
    profile: str = "step"
    v_background: float = 1.0
    dt: Optional[float] = None
    scheme: Optional[str] = None
    dt_cap: Optional[float] = None
    comoving: bool = True
    sample_dt: float = 0.5
    level: float = 0.5
    t_lo_fraction: float = 0.5

    def grid(self) -> Grid1D:
        return Grid1D.from_spacing(0.0, self.length, self.h)

    def stepper(self, model: ModelSpec) -> StepperConfig:
        cfg = default_config(model, self.h, scheme=self.scheme, dt_cap=self.dt_cap)
        if self.dt is not None:
            cfg = StepperConfig(dt=self.dt, scheme=cfg.scheme, cfl_safety=cfg.cfl_safety)
        return cfg


@dataclass
class SpreadingRun:
    estimate: SpeedEstimate
    track: FrontTrack
    series: TimeSeries
    final: FieldState
    config: StepperConfig


def spreading_speed(model: ModelSpec, setup: CauchySetup = CauchySetup()) -> SpreadingRun:
    grid = setup.grid()
    if isinstance(model, NonlocalModel) and abs(model.kernel.h - grid.h) > 1e-12:
        raise ContractError("kernel spacing must equal the simulation spacing")
    cfg = setup.stepper(model)
    state = init_front(grid, model, setup.profile, setup.x0, v_background=setup.v_background)
    final, series = run_until(state, model, cfg, setup.t_end, sample_dt=setup.sample_dt,
                              levels=(setup.level,), comoving=setup.comoving)
    track = track_front(series, setup.level)
    est = estimate_speed(track, setup.t_lo_fraction)
    est = est.with_resolution_band(resolution_bias(model, grid.h, cfg))
    return SpreadingRun(est, track, series, final, cfg)


def resolution_bias(model: ModelSpec, h: float, config: StepperConfig) -> float:
    """``|c_lin(h, dt) - c_lin|`` for the stepper; zero when there is no linear speed."""
    if isinstance(model, LVModel):
        growth = 1.0 - model.params.a
        if growth <= 0:
            return 0.0
        exact = model.linear_speed
        kernel = None
    else:
        growth = model.family.gamma0
        exact = model.linear_speed
        kernel = model.kernel if isinstance(model, NonlocalModel) else None
    disc = scheme_linear_speed(growth, h, config.dt, config.scheme, kernel)
    return abs(disc - exact)

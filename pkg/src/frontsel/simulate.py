"""Method-of-lines Cauchy solvers on a 1-D grid with co-moving window support."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.linalg import lapack

from .errors import ContractError, DomainError, NumericError
from .model import LVModel, ModelSpec, NonlocalModel, ScalarModel

SCHEMES = ("explicit_euler", "imex_diffusion")


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 3 or not self.x_max > self.x_min:
            raise DomainError("grid needs n >= 3 and x_max > x_min")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(self.n)

    @classmethod
    def from_spacing(cls, x_min: float, x_max: float, h: float) -> "Grid1D":
        n = int(round((x_max - x_min) / h)) + 1
        return cls(x_min, x_min + (n - 1) * h, n)


@dataclass
class FieldState:
    grid: Grid1D
    t: float
    u: np.ndarray
    v: Optional[np.ndarray] = None
    frame_shift: float = 0.0

    def copy(self) -> "FieldState":
        return FieldState(self.grid, self.t, self.u.copy(),
                          None if self.v is None else self.v.copy(), self.frame_shift)

    @property
    def x(self) -> np.ndarray:
        """Absolute coordinates of the current window."""
        return self.grid.x + self.frame_shift


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    scheme: str = "explicit_euler"
    boundary: str = "clamp_to_limit_states"
    cfl_safety: float = 0.4

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise DomainError(f"unknown scheme {self.scheme!r}")
        if self.boundary != "clamp_to_limit_states":
            raise DomainError("only clamp_to_limit_states boundaries are supported")
        if not (self.dt > 0 and 0 < self.cfl_safety <= 1):
            raise DomainError("dt must be positive and cfl_safety in (0, 1]")


def max_stable_dt(model: ModelSpec, h: float, scheme: str, cfl_safety: float = 0.4) -> float:
    if isinstance(model, NonlocalModel):
        return cfl_safety / (1.0 + model.family.sup_fprime())
    if scheme == "imex_diffusion":
        # reaction-limited; keeps the explicit reaction update monotone
        rate = model.family.sup_fprime() if isinstance(model, ScalarModel) else max(1.0, model.params.r)
        return cfl_safety / rate
    d = model.params.d if isinstance(model, LVModel) else 1.0
    return cfl_safety * h * h / (2.0 * max(1.0, d))


# first-order time stepping biases the front speed by O(dt); these caps keep
# the bias of the linear speed below about 1e-3
DT_ACCURACY = {"explicit_euler": 0.005, "imex_diffusion": 0.01}


def default_config(model: ModelSpec, h: float, scheme: Optional[str] = None,
                   cfl_safety: float = 0.4, dt_cap: Optional[float] = None) -> StepperConfig:
    if scheme is None:
        scheme = "explicit_euler"
        if isinstance(model, LVModel) and model.params.d > 2:
            scheme = "imex_diffusion"
    if isinstance(model, NonlocalModel):
        scheme = "explicit_euler"
    if dt_cap is None:
        dt_cap = DT_ACCURACY[scheme]
    dt = min(max_stable_dt(model, h, scheme, cfl_safety), dt_cap)
    return StepperConfig(dt=dt, scheme=scheme, cfl_safety=cfl_safety)


def check_cfl(model: ModelSpec, grid: Grid1D, config: StepperConfig):
    if config.scheme == "imex_diffusion" and not isinstance(model, NonlocalModel):
        return
    if isinstance(model, NonlocalModel) and config.scheme != "explicit_euler":
        raise DomainError("nonlocal runs use explicit_euler")
    bound = max_stable_dt(model, grid.h, "explicit_euler", config.cfl_safety)
    if config.dt > bound * (1 + 1e-12):
        raise ContractError(f"dt={config.dt:.3g} violates the CFL bound {bound:.3g}")
    if isinstance(model, NonlocalModel):
        if abs(model.kernel.h - grid.h) > 1e-12:
            raise DomainError(f"kernel spacing {model.kernel.h} differs from grid spacing {grid.h}")


# ---------------------------------------------------------------- initial data

def _profile(x: np.ndarray, profile: str, x0: float, width: float, x1: float) -> np.ndarray:
    if profile == "step":
        return (x <= x0).astype(float)
    if profile == "tanh":
        return 0.5 * (1.0 - np.tanh((x - x0) / width))
    if profile == "compact_bump":
        out = np.zeros_like(x)
        if x1 > x0:
            inside = (x > x0) & (x < x1)
            mid, half = 0.5 * (x0 + x1), 0.5 * (x1 - x0)
            out[inside] = np.cos(0.5 * np.pi * (x[inside] - mid) / half) ** 2
        return out
    raise DomainError(f"unknown initial profile {profile!r}")


def init_front(grid: Grid1D, model: ModelSpec, profile: str = "step", x0: float = 10.0,
               width: float = 1.0, x1: Optional[float] = None,
               v_background: float = 1.0) -> FieldState:
    """Front-like initial datum; for the LV system ``u`` gets the profile and ``v`` is constant."""
    x = grid.x
    for pt in (x0,) if x1 is None else (x0, x1):
        if not grid.x_min < pt < grid.x_max:
            raise DomainError(f"profile point {pt} outside the grid interior")
    u = _profile(x, profile, x0, width, x0 if x1 is None else x1)
    if isinstance(model, LVModel):
        return FieldState(grid, 0.0, u, np.full(grid.n, float(v_background)))
    return FieldState(grid, 0.0, u)


# ---------------------------------------------------------------- stepping

def laplacian(w: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(w)
    out[1:-1] = (w[2:] - 2.0 * w[1:-1] + w[:-2]) / (h * h)
    return out


def dispersal(w: np.ndarray, kernel, left: float, right: float) -> np.ndarray:
    """``J * w - w`` with the field extended by constant ``left``/``right`` values."""
    m = kernel.m
    ext = np.concatenate((np.full(m, left), w, np.full(m, right)))
    return np.convolve(ext, kernel.weights, mode="valid") - w


class _ImplicitDiffusion:
    """Factorized ``(I - dt D d_xx)`` on interior nodes with Dirichlet ends."""

    def __init__(self, n: int, h: float, dt: float, diff: float):
        k = dt * diff / (h * h)
        self.k = k
        diag = np.full(n - 2, 1.0 + 2.0 * k)
        off = np.full(n - 3, -k)
        d, e, info = lapack.dpttrf(diag, off)
        if info != 0:
            raise NumericError("tridiagonal factorization failed")
        self.d, self.e = d, e

    def solve(self, rhs: np.ndarray, left: float, right: float) -> np.ndarray:
        b = rhs[1:-1].copy()
        b[0] += self.k * left
        b[-1] += self.k * right
        x, info = lapack.dpttrs(self.d, self.e, b)
        out = np.empty_like(rhs)
        out[1:-1] = x
        out[0], out[-1] = left, right
        return out


class Stepper:
    """Advances a :class:`FieldState` by one step; caches implicit factorizations."""

    def __init__(self, model: ModelSpec, grid: Grid1D, config: StepperConfig):
        check_cfl(model, grid, config)
        self.model, self.grid, self.config = model, grid, config
        self.left, self.right = model.limits
        self._imp = []
        if config.scheme == "imex_diffusion":
            diffs = [1.0] if not isinstance(model, LVModel) else [1.0, model.params.d]
            self._imp = [_ImplicitDiffusion(grid.n, grid.h, config.dt, D) for D in diffs]

    def __call__(self, state: FieldState) -> FieldState:
        m, dt, h = self.model, self.config.dt, self.grid.h
        if isinstance(m, NonlocalModel):
            w = state.u
            new = w + dt * (dispersal(w, m.kernel, self.left[0], self.right[0]) + m.family.f(w))
            new[0], new[-1] = self.left[0], self.right[0]
            out = FieldState(state.grid, state.t + dt, new, None, state.frame_shift)
        elif isinstance(m, ScalarModel):
            w = state.u
            if self._imp:
                new = self._imp[0].solve(w + dt * m.family.f(w), self.left[0], self.right[0])
            else:
                new = w + dt * (laplacian(w, h) + m.family.f(w))
                new[0], new[-1] = self.left[0], self.right[0]
            out = FieldState(state.grid, state.t + dt, new, None, state.frame_shift)
        else:
            p = m.params
            u, v = state.u, state.v
            fu = u * (1.0 - u - p.a * v)
            fv = p.r * v * (1.0 - v - p.b * u)
            if self._imp:
                nu = self._imp[0].solve(u + dt * fu, self.left[0], self.right[0])
                nv = self._imp[1].solve(v + dt * fv, self.left[1], self.right[1])
            else:
                nu = u + dt * (laplacian(u, h) + fu)
                nv = v + dt * (p.d * laplacian(v, h) + fv)
                nu[0], nu[-1] = self.left[0], self.right[0]
                nv[0], nv[-1] = self.left[1], self.right[1]
            out = FieldState(state.grid, state.t + dt, nu, nv, state.frame_shift)
        _check_finite(out, state)
        return out


def _check_finite(new: FieldState, last_good: FieldState):
    total = new.u.sum() if new.v is None else new.u.sum() + new.v.sum()
    if not math.isfinite(total):
        raise NumericError(f"non-finite field at t={new.t:.6g}", payload=last_good)
    if __debug__:
        lo = new.u.min() if new.v is None else min(new.u.min(), new.v.min())
        hi = new.u.max() if new.v is None else max(new.u.max(), new.v.max())
        if lo < -0.1 or hi > 1.5:
            raise NumericError(f"field left [-0.1, 1.5] at t={new.t:.6g}", payload=last_good)


def step(state: FieldState, model: ModelSpec, config: StepperConfig) -> FieldState:
    return Stepper(model, state.grid, config)(state)


# ---------------------------------------------------------------- driver

def locate_level(x: np.ndarray, w: np.ndarray, level: float) -> float:
    """Rightmost crossing of ``level`` by linear interpolation; NaN if never attained."""
    above = w >= level
    if not above.any():
        return math.nan
    idx = np.flatnonzero(above[:-1] & ~above[1:])
    if idx.size == 0:
        # attained but no downward crossing: level reached at the right edge
        return float(x[-1]) if above[-1] else math.nan
    i = int(idx[-1])
    w0, w1 = w[i], w[i + 1]
    return float(x[i] + (w0 - level) / (w0 - w1) * (x[i + 1] - x[i]))


@dataclass
class TimeSeries:
    t: List[float] = field(default_factory=list)
    front: Dict[float, List[float]] = field(default_factory=dict)
    u_min: List[float] = field(default_factory=list)
    u_max: List[float] = field(default_factory=list)
    mass: List[float] = field(default_factory=list)
    snapshots: Optional[List[np.ndarray]] = None
    snapshot_x: Optional[List[np.ndarray]] = None

    def record(self, state: FieldState, levels: Sequence[float], keep_snapshot: bool):
        x = state.x
        self.t.append(state.t)
        for lev in levels:
            self.front.setdefault(lev, []).append(locate_level(x, state.u, lev))
        self.u_min.append(float(state.u.min()))
        self.u_max.append(float(state.u.max()))
        self.mass.append(float(state.u.sum() * state.grid.h))
        if keep_snapshot:
            if self.snapshots is None:
                self.snapshots, self.snapshot_x = [], []
            self.snapshots.append(state.u.copy())
            self.snapshot_x.append(x.copy())

    def rows(self, level: float = 0.5):
        """CSV-ready rows ``(t, front_position, u_min, u_max, mass)``."""
        fr = self.front.get(level, [math.nan] * len(self.t))
        return list(zip(self.t, fr, self.u_min, self.u_max, self.mass))


def reframe(state: FieldState, shift_cells: int, model: ModelSpec) -> FieldState:
    """Move the window right by whole cells, filling inflow with the right limit state."""
    if shift_cells <= 0:
        return state
    right = model.limits[1]
    k = min(shift_cells, state.grid.n - 1)

    def shifted(a, fill):
        out = np.empty_like(a)
        out[:-k] = a[k:]
        out[-k:] = fill
        return out

    u = shifted(state.u, right[0])
    v = None if state.v is None else shifted(state.v, right[1])
    return FieldState(state.grid, state.t, u, v, state.frame_shift + k * state.grid.h)


def run_until(state: FieldState, model: ModelSpec, config: StepperConfig, t_end: float,
              sample_dt: float = 1.0, levels: Sequence[float] = (0.5,),
              comoving: bool = True, reframe_fraction: float = 0.7,
              keep_snapshots: bool = False,
              callbacks: Sequence[Callable[[FieldState], None]] = ()):
    """Step to ``t_end`` sampling every ``sample_dt``; returns ``(state, TimeSeries)``.

    With ``comoving`` the window is shifted by whole cells whenever the
    tracked front passes ``reframe_fraction`` of the domain.
    """
    if t_end < state.t:
        raise ContractError("t_end precedes the current time")
    series = TimeSeries()
    series.record(state, levels, keep_snapshots)
    for cb in callbacks:
        cb(state)
    if t_end == state.t:
        return state, series
    stepper = Stepper(model, state.grid, config)
    dt = config.dt
    n_steps = int(math.ceil((t_end - state.t) / dt - 1e-9))
    every = max(1, int(round(sample_dt / dt)))
    grid = state.grid
    track_level = levels[0] if levels else 0.5
    trigger = grid.x_min + reframe_fraction * (grid.x_max - grid.x_min)
    t0 = state.t
    for k in range(1, n_steps + 1):
        state = stepper(state)
        state.t = t0 + k * dt
        if k % every == 0 or k == n_steps:
            if comoving:
                pos = locate_level(grid.x, state.u, track_level)
                if math.isfinite(pos) and pos > trigger:
                    cells = int(round((pos - (grid.x_min + 0.5 * (grid.x_max - grid.x_min))) / grid.h))
                    state = reframe(state, cells, model)
            series.record(state, levels, keep_snapshots)
            for cb in callbacks:
                cb(state)
    return state, series

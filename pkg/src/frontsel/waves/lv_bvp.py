"""Finite-difference Newton solver for competition waves and the implicit pushed criterion.

Unknowns are ``U_i, V_i`` on a uniform grid. Rows: the two centered-difference
ODEs at interior nodes, ``(U, V) = (u*, v*)`` at the left end, ``V = 1`` at the
right end, and the phase condition ``U(0) = u*/2`` in the slot of the right-end
``U`` row. ``U`` is left free at the right end: at the linear speed both
``U``-modes decay there and pinning ``U = 0`` at a finite point would distort
the ``(A xi + B) exp(-lam xi)`` tail that carries the selection information.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ..dispersion import discrete_double_rate, discrete_linear_speed, lv_roots_minus_infinity
from ..errors import ContractError, NumericError
from ..model import LVModel, LVParams
from .profile import WaveProfile

NEWTON_TOL = 1e-10
NEWTON_MAXIT = 60


@dataclass(frozen=True)
class BVPGrid:
    xi_min: float
    xi_max: float
    h: float

    @property
    def xi(self) -> np.ndarray:
        i0 = int(round(-self.xi_min / self.h))
        i1 = int(round(self.xi_max / self.h))
        return self.h * np.arange(-i0, i1 + 1)

    @classmethod
    def for_params(cls, params: LVParams, c: float, h: float = 0.02, reach: float = 30.0,
                   min_left: float = 40.0, min_right: float = 60.0, max_side: float = 400.0) -> "BVPGrid":
        """Window long enough for ``reach`` e-foldings of the slowest tail on each side."""
        lam = math.sqrt(1.0 - params.a) if params.a < 1 else 1.0
        lv_minus = abs((c - math.sqrt(c * c + 4.0 * params.r * params.d)) / (2.0 * params.d))
        right = min(max(min_right, reach / min(lam, lv_minus)), max_side)
        roots = lv_roots_minus_infinity(params, c)
        if roots.algebraic_order is not None:
            slow = 0.0
        elif roots.nu is not None:
            slow = roots.nu
        elif roots.mu_v_plus is not None:
            slow = min(roots.mu_u_plus, roots.mu_v_plus)
        else:
            slow = 0.0
        left = max_side if slow <= 0 else min(max(min_left, reach / slow), max_side)
        # multiples of 2h so the coarse companion grid keeps xi = 0 as a node
        return cls(-2 * h * math.ceil(left / (2 * h)), 2 * h * math.ceil(right / (2 * h)), h)


def linear_speed_for(params: LVParams, h: float) -> Tuple[float, float]:
    """Grid-consistent linear speed and double decay rate for spacing ``h``."""
    gamma = 1.0 - params.a
    return discrete_linear_speed(gamma, h), discrete_double_rate(gamma, h)


def _residual(x, params: LVParams, c: float, h: float, i0: int):
    n = x.size // 2
    U, V = x[:n], x[n:]
    a, b, d, r = params.a, params.b, params.d, params.r
    us, vs = params.equilibrium
    Fu = np.empty(n)
    Fv = np.empty(n)
    Um, Uc, Up = U[:-2], U[1:-1], U[2:]
    Vm, Vc, Vp = V[:-2], V[1:-1], V[2:]
    Fu[1:-1] = (Up - 2 * Uc + Um) / h**2 + c * (Up - Um) / (2 * h) + Uc * (1 - Uc - a * Vc)
    Fv[1:-1] = d * (Vp - 2 * Vc + Vm) / h**2 + c * (Vp - Vm) / (2 * h) + r * Vc * (1 - Vc - b * Uc)
    Fu[0] = U[0] - us
    Fv[0] = V[0] - vs
    Fv[-1] = V[-1] - 1.0
    Fu[-1] = U[i0] - 0.5 * us
    return np.concatenate((Fu, Fv))


def _jacobian(x, params: LVParams, c: float, h: float, i0: int):
    n = x.size // 2
    U, V = x[:n], x[n:]
    a, b, d, r = params.a, params.b, params.d, params.r
    idx = np.arange(1, n - 1)
    lo_u, hi_u = 1 / h**2 - c / (2 * h), 1 / h**2 + c / (2 * h)
    lo_v, hi_v = d / h**2 - c / (2 * h), d / h**2 + c / (2 * h)
    Uc, Vc = U[1:-1], V[1:-1]
    rows, cols, vals = [], [], []

    def add(r_, c_, v_):
        rows.append(np.broadcast_to(r_, np.shape(v_)) if np.ndim(v_) else np.atleast_1d(r_))
        cols.append(np.broadcast_to(c_, np.shape(v_)) if np.ndim(v_) else np.atleast_1d(c_))
        vals.append(np.broadcast_to(v_, np.shape(r_)) if np.ndim(r_) else np.atleast_1d(v_))

    add(idx, idx - 1, np.full(n - 2, lo_u))
    add(idx, idx + 1, np.full(n - 2, hi_u))
    add(idx, idx, -2 / h**2 + 1 - 2 * Uc - a * Vc)
    add(idx, n + idx, -a * Uc)
    add(n + idx, n + idx - 1, np.full(n - 2, lo_v))
    add(n + idx, n + idx + 1, np.full(n - 2, hi_v))
    add(n + idx, n + idx, -2 * d / h**2 + r * (1 - 2 * Vc - b * Uc))
    add(n + idx, idx, -r * b * Vc)
    add(np.array([0, n, 2 * n - 1, n - 1]), np.array([0, n, 2 * n - 1, i0]), np.ones(4))
    R = np.concatenate(rows)
    C = np.concatenate(cols)
    D = np.concatenate(vals)
    return sp.csc_matrix((D, (R, C)), shape=(2 * n, 2 * n))


def tanh_guess(params: LVParams, xi: np.ndarray) -> np.ndarray:
    us, vs = params.equilibrium
    k = 0.5 * math.sqrt(max(1.0 - params.a, 0.05))
    U = 0.5 * us * (1.0 - np.tanh(k * xi))
    V = vs + (1.0 - vs) * 0.5 * (1.0 + np.tanh(0.5 * k * xi))
    return np.concatenate((U, V))


def newton_solve(params: LVParams, c: float, xi: np.ndarray, x0: np.ndarray,
                 tol: float = NEWTON_TOL, maxit: int = NEWTON_MAXIT):
    """Damped Newton; returns ``(x, residual_sup, iterations)``."""
    h = float(xi[1] - xi[0])
    i0 = int(np.argmin(np.abs(xi)))
    x = x0.copy()
    F = _residual(x, params, c, h, i0)
    nrm = float(np.max(np.abs(F)))
    for it in range(1, maxit + 1):
        if nrm < tol:
            return x, nrm, it - 1
        J = _jacobian(x, params, c, h, i0)
        try:
            dx = splu(J).solve(-F)
        except RuntimeError as exc:
            raise NumericError(f"singular Newton matrix: {exc}", payload=F) from exc
        alpha = 1.0
        while True:
            xn = x + alpha * dx
            Fn = _residual(xn, params, c, h, i0)
            nn = float(np.max(np.abs(Fn)))
            if np.isfinite(nn) and (nn < (1 - 0.25 * alpha) * nrm or nn < tol):
                break
            alpha *= 0.5
            if alpha * np.max(np.abs(dx)) < 1e-14:
                raise NumericError(f"Newton stagnated with residual {nrm:.3e}", payload=F)
        x, F, nrm = xn, Fn, nn
    if nrm < tol:
        return x, nrm, maxit
    raise NumericError(f"Newton did not converge: residual {nrm:.3e}", payload=F)


def lv_wave_bvp(params: LVParams, c: Optional[float] = None, grid: Optional[BVPGrid] = None,
                initial_guess: Optional[WaveProfile] = None, h: float = 0.02) -> WaveProfile:
    """Competition wave at speed ``c`` (default: grid-consistent linear speed)."""
    if grid is None:
        c_ref = c if c is not None else linear_speed_for(params, h)[0]
        grid = BVPGrid.for_params(params, c_ref, h)
    h = grid.h
    c_lin, lam_h = linear_speed_for(params, h)
    if c is None:
        c = c_lin
    if params.a < 1 and c < c_lin - 1e-12:
        raise ContractError(f"speed {c} below the linear speed {c_lin}")
    xi = grid.xi
    if initial_guess is not None:
        x0 = np.concatenate((np.interp(xi, initial_guess.xi, initial_guess.u),
                             np.interp(xi, initial_guess.xi, initial_guess.v)))
        us, vs = params.equilibrium
        x0[0], x0[xi.size] = us, vs
    else:
        x0 = tanh_guess(params, xi)
    x, res, its = newton_solve(params, c, xi, x0)
    n = xi.size
    meta = {"method": "newton_fd", "iterations": its, "b": params.b, "d": params.d}
    if abs(c - c_lin) < 1e-12:
        meta["lambda_double"] = lam_h
    us, _ = params.equilibrium
    return WaveProfile(xi=xi, u=x[:n], v=x[n:], c=c, model=LVModel(params), anchor=0.5 * us,
                       residual=res, meta=meta)


def continuation(params: LVParams, b_values, grid: Optional[BVPGrid] = None, h: float = 0.02,
                 db: float = 0.05, start: Optional[WaveProfile] = None) -> List[WaveProfile]:
    """Linear-speed waves along ``b_values`` by natural-parameter continuation.

    Intermediate steps of size at most ``db`` are inserted and halved on failure.
    """
    b_values = list(b_values)
    if grid is None:
        grid = BVPGrid.for_params(params.replace(b=min(b_values)), linear_speed_for(params, h)[0], h)
    prof = start
    b_cur = None if start is None else start.meta.get("b")
    out = []
    for b_target in b_values:
        if prof is None:
            prof = lv_wave_bvp(params.replace(b=b_target), grid=grid)
            b_cur = b_target
        step = db
        while b_cur != b_target:
            nxt = b_target if abs(b_target - b_cur) <= step else b_cur + math.copysign(step, b_target - b_cur)
            try:
                prof = lv_wave_bvp(params.replace(b=nxt), grid=grid, initial_guess=prof)
                b_cur = nxt
                step = min(db, 2 * step)
            except NumericError:
                step *= 0.5
                if step < 1e-6:
                    raise
        out.append(prof)
    return out


@dataclass
class PushedCriterion:
    integral_value: float
    lambda_u: float
    error_bound: float
    window_part: float
    left_closure: float
    right_closure: float
    refinement_gap: float

    @property
    def resolved_nonzero(self) -> bool:
        return abs(self.integral_value) > self.error_bound

    def to_dict(self) -> dict:
        out = asdict(self)
        out["resolved_nonzero"] = self.resolved_nonzero
        return out


def _trapz(y, h):
    return h * (y.sum() - 0.5 * (y[0] + y[-1]))


def _integral_parts(xi, U, V, a, lam):
    h = float(xi[1] - xi[0])
    g = np.exp(lam * xi) * U * (a * (1.0 - V) - U)
    window = _trapz(g, h)
    us = U[0]
    left = us * (a - 1.0) * math.exp(lam * xi[0]) / lam if us != 0 else 0.0
    right = 0.0
    tail = g[-20:]
    scale = np.abs(g).max()
    if scale > 0 and np.abs(tail).max() < 1e-10 * scale:
        # round-off level (1 - V is formed by cancellation): nothing left to close
        return window, left, right
    if np.all(tail != 0.0) and np.all(np.isfinite(tail)):
        ratio = abs(tail[-1] / tail[0])
        kappa = -math.log(ratio) / (xi[-1] - xi[-20]) if ratio > 0 else math.inf
        right = float(tail[-1] / kappa) if kappa > 0 else math.inf
    return window, left, right


def coarse_companion(profile: WaveProfile) -> Optional[WaveProfile]:
    """Same wave re-solved on every other node, or ``None`` if the grid does not allow it."""
    xi = profile.xi
    i0 = int(np.argmin(np.abs(xi)))
    if profile.meta.get("method") != "newton_fd" or i0 % 2 or (xi.size - 1) % 2:
        return None
    params = profile.model.params
    grid = BVPGrid(float(xi[0]), float(xi[-1]), 2 * profile.h)
    c = linear_speed_for(params, grid.h)[0] if "lambda_double" in profile.meta else profile.c
    return lv_wave_bvp(params, c=c, grid=grid, initial_guess=profile)


def pushed_integral(profile: WaveProfile, params: Optional[LVParams] = None,
                    lam: Optional[float] = None, refine: bool = True) -> PushedCriterion:
    """``I = int exp(lam xi) U [a(1 - V) - U] dxi`` over the profile with analytic tail closures.

    ``I < 0`` for a pulled wave, ``I = 0`` at the transition and ``I > 0`` when
    the linear-speed solution is not an admissible (positive) wave. The error
    bound adds the tail closures to the change of ``I`` when the wave is
    recomputed at twice the spacing (trapezoid sums of such rapidly decaying
    integrands are spectrally accurate, so profile discretization dominates).
    """
    if params is None:
        params = profile.model.params
    if lam is None:
        lam = profile.meta.get("lambda_double")
        if lam is None:
            c_lin = params.linear_speed
            if abs(profile.c - c_lin) > 1e-6:
                raise ContractError(f"profile speed {profile.c} is not the linear speed {c_lin}")
            lam = math.sqrt(1.0 - params.a)
    a = params.a
    window, left, right = _integral_parts(profile.xi, profile.u, profile.v, a, lam)
    total = window + left + right
    coarse = coarse_companion(profile) if refine else None
    if coarse is not None:
        lam_c = coarse.meta.get("lambda_double", lam)
        cw, cl, cr = _integral_parts(coarse.xi, coarse.u, coarse.v, a, lam_c)
        gap = abs(total - (cw + cl + cr))
    else:
        xi = profile.xi
        m = xi.size - 1 if (xi.size - 1) % 2 == 0 else xi.size - 2
        sub = _integral_parts(xi[: m + 1 : 2], profile.u[: m + 1 : 2], profile.v[: m + 1 : 2], a, lam)
        gap = abs(total - sum(sub))
    bound = abs(left) + abs(right) + gap
    return PushedCriterion(float(total), float(lam), float(bound), float(window),
                           float(left), float(right), float(gap))


def _discrete_rates(gamma: float, c: float, h: float) -> Tuple[float, float]:
    """Slow and fast decay rates of the centered-difference tail operator at speed ``c``."""
    A = 1.0 / h**2 + c / (2 * h)
    B = gamma - 2.0 / h**2
    C = 1.0 / h**2 - c / (2 * h)
    disc = B * B - 4 * A * C
    if disc < 0:
        raise ContractError(f"speed {c} below the discrete linear speed")
    z1 = (-B + math.sqrt(disc)) / (2 * A)
    z2 = (-B - math.sqrt(disc)) / (2 * A)
    return -math.log(max(z1, z2)) / h, -math.log(min(z1, z2)) / h


def slow_mode_integral(profile: WaveProfile) -> float:
    """``int exp(lam_- xi) U [a(1-V) - U]``; proportional to minus the slow-mode amplitude."""
    params = profile.model.params
    lam_slow, _ = _discrete_rates(1.0 - params.a, profile.c, profile.h)
    w, l_, r_ = _integral_parts(profile.xi, profile.u, profile.v, params.a, lam_slow)
    return w + l_ + r_


def lv_min_speed(params: LVParams, h: float = 0.02, grid: Optional[BVPGrid] = None,
                 c_max: Optional[float] = None, tol: float = 1e-8,
                 guess: Optional[WaveProfile] = None) -> Tuple[float, WaveProfile]:
    """Minimal wave speed from the sign of the slow-mode integral.

    At the linear speed a negative pushed integral means the front is pulled.
    Otherwise the minimal speed is the ``c`` at which the slow tail mode
    vanishes, found by bisection.
    """
    c_lin, _ = linear_speed_for(params, h)
    if grid is None:
        grid = BVPGrid.for_params(params, c_lin, h)
    base = lv_wave_bvp(params, grid=grid, initial_guess=guess)
    if pushed_integral(base, refine=False).integral_value < 0 and base.u.min() >= 0:
        return c_lin, base
    lo, hi = c_lin, c_max if c_max is not None else 2.0
    prof_lo = base
    prof_hi = lv_wave_bvp(params, c=hi, grid=grid, initial_guess=base)
    if slow_mode_integral(prof_hi) >= 0:
        raise ContractError(f"no pushed wave below c={hi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        pm = lv_wave_bvp(params, c=mid, grid=grid, initial_guess=prof_hi)
        if slow_mode_integral(pm) < 0:
            hi, prof_hi = mid, pm
        else:
            lo, prof_lo = mid, pm
    return hi, prof_hi

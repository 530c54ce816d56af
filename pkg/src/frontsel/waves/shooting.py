"""Phase-plane shooting for scalar monostable waves ``W'' + cW' + f(W) = 0``.

The orbit leaves the saddle at ``W = 1`` along its unstable direction and is
followed in the variables ``y = log W``, ``z = W'/W``, which keeps the
exponentially small tail resolvable down to ``W ~ e^-300``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from ..dispersion import decay_rates, scalar_linear_speed
from ..errors import ContractError, DomainError, NumericError
from ..model import NonlinearityFamily, ScalarModel
from ..roots import bisect
from .profile import WaveProfile

EPS0 = 1e-8
Y_END = -300.0
C_MAX = 6.0


@dataclass
class ShootResult:
    c: float
    connects: bool
    reason: str
    sol: object = None
    xi0: float = 0.0


def _unstable_rate(family: NonlinearityFamily, c: float) -> float:
    f1 = family.fprime1
    return 0.5 * (-c + math.sqrt(c * c - 4.0 * f1))


def _classify_threshold(family: NonlinearityFamily, c: float) -> float:
    """Value of ``z`` separating the slow from the fast decay at ``W -> 0``."""
    g0 = family.gamma0
    lam_m, lam_p = decay_rates(c, g0) if c * c >= 4 * g0 else (math.nan, math.nan)
    if math.isnan(lam_p):
        return math.nan
    if lam_p - lam_m < 1e-9:
        return -lam_p
    return -0.5 * (lam_m + lam_p)


def shoot(family: NonlinearityFamily, c: float, rtol: float = 1e-12) -> ShootResult:
    if not c > 0:
        raise DomainError("wave speed must be positive")
    mu = _unstable_rate(family, c)
    w0 = 1.0 - EPS0
    y0 = math.log(w0)
    z0 = -EPS0 * mu / w0

    def rhs(_, s):
        w = math.exp(s[0])
        return [s[1], -c * s[1] - s[1] * s[1] - float(family.f_over_w(w))]

    def up(_, s):
        return s[1]

    up.terminal, up.direction = True, 1

    def blow(_, s):
        return s[1] + (c + 10.0)

    blow.terminal, blow.direction = True, -1

    def end(_, s):
        return s[0] - Y_END

    end.terminal, end.direction = True, -1

    sol = solve_ivp(rhs, (0.0, 5e3), [y0, z0], method="DOP853", rtol=rtol, atol=1e-14,
                    events=(up, blow, end), dense_output=True)
    if sol.status == -1:
        raise NumericError(f"shooting integration failed at c={c}: {sol.message}")
    if sol.t_events[0].size:
        return ShootResult(c, False, "non_monotone", sol)
    if sol.t_events[1].size:
        return ShootResult(c, False, "undershoot", sol)
    if not sol.t_events[2].size:
        return ShootResult(c, False, "stalled", sol)
    z_end = sol.y[1, -1]
    zc = _classify_threshold(family, c)
    if math.isnan(zc):
        return ShootResult(c, False, "subcritical", sol)
    # at the double root the slow approach is from above: z = -lam + O(1/xi)
    connects = z_end >= zc if zc != -0.5 * c else z_end + 0.5 * c >= 0.0
    return ShootResult(c, bool(connects), "connection" if connects else "fast_undershoot", sol)


def scalar_wave_shoot(family: NonlinearityFamily, c: float, tol: float = 1e-9,
                      h: float = 0.01, w_floor: float = 1e-14) -> Optional[WaveProfile]:
    """Monotone wave at speed ``c`` or ``None`` when no monotone connection exists."""
    res = shoot(family, c)
    if not res.connects:
        return None
    return _profile_from(res, family, h, w_floor)


def _profile_from(res: ShootResult, family, h: float, w_floor: float) -> WaveProfile:
    sol, c = res.sol, res.c
    t_end = sol.t[-1]
    y_floor = max(math.log(w_floor), Y_END)
    # locate W = 1/2 and the floor crossing on the dense output
    ts = np.linspace(0.0, t_end, 20001)
    ys = sol.sol(ts)[0]
    i_half = int(np.argmax(ys <= math.log(0.5)))
    t_half = bisect(lambda t: sol.sol(t)[0] - math.log(0.5), ts[max(i_half - 1, 0)], ts[i_half], xtol=1e-13)
    i_floor = int(np.argmax(ys <= y_floor)) if np.any(ys <= y_floor) else ts.size - 1
    t_stop = ts[i_floor]
    # analytic unstable-manifold tail to the left of the launch point
    mu = _unstable_rate(family, c)
    t_left = math.log(1e-12 / EPS0) / mu
    xi = np.arange(math.ceil((t_left - t_half) / h), math.floor((t_stop - t_half) / h) + 1) * h
    t = xi + t_half
    w = np.empty_like(xi)
    inside = t >= 0.0
    w[inside] = np.exp(sol.sol(t[inside])[0])
    w[~inside] = 1.0 - EPS0 * np.exp(mu * t[~inside])
    prof = WaveProfile(xi=xi, u=w, c=c, model=ScalarModel(family), anchor=0.5,
                       meta={"method": "shooting", "launch_xi": -t_half})
    prof.residual = scalar_residual(prof)
    return prof


def scalar_residual(prof: WaveProfile) -> float:
    """Sup norm of ``W'' + cW' + f(W)`` with fourth-order differences at interior nodes."""
    w, h, c = prof.u, prof.h, prof.c
    d1 = (-w[4:] + 8 * w[3:-1] - 8 * w[1:-3] + w[:-4]) / (12 * h)
    d2 = (-w[4:] + 16 * w[3:-1] - 30 * w[2:-2] + 16 * w[1:-3] - w[:-4]) / (12 * h * h)
    r = d2 + c * d1 + prof.model.family.f(w[2:-2])
    return float(np.max(np.abs(r)))


def scalar_min_speed(family: NonlinearityFamily, tol: float = 1e-4, c_max: float = C_MAX) -> float:
    """Minimal speed by bisection on the monotone-connection predicate."""
    c_lin = scalar_linear_speed(family.gamma0)
    if shoot(family, c_lin).connects:
        return c_lin
    lo, hi = c_lin, c_max
    if not shoot(family, hi).connects:
        raise ContractError(f"no monotone connection up to c={c_max}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if shoot(family, mid).connects:
            hi = mid
        else:
            lo = mid
    return hi


def minimal_wave(family: NonlinearityFamily, tol: float = 1e-12, h: float = 0.01) -> WaveProfile:
    """Profile at the minimal speed, resolved tightly enough for tail fitting."""
    c = scalar_min_speed(family, tol=tol)
    prof = scalar_wave_shoot(family, c, h=h)
    if prof is None:
        raise NumericError(f"no connection at the computed minimal speed {c}")
    return prof

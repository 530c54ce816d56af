"""Decay-law fits ``g(xi) ~ |xi|^p exp(-lam |xi|)`` on the tail of a profile."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional

import numpy as np

from ..dispersion import (decay_rates, lv_roots_minus_infinity, nonlocal_linear_speed,
                          nonlocal_minus_infinity_rate)
from ..errors import NumericError
from ..model import LVModel, NonlocalModel, ScalarModel
from .profile import WaveProfile

AMP_WINDOW = (1e-8, 1e-3)
WIDE_WINDOW = (1e-10, 1e-2)
MIN_SAMPLES = 30
RATE_TOL = 0.05
# relative change of the prefactor g*exp(lam*s) across the window that counts as a resolved
# linear factor (A xi + B); half of it is the ambiguity band
DRIFT_MIN = 0.05


class InsufficientResolution(NumericError):
    pass


@dataclass
class TailFit:
    side: str
    lambda_hat: float
    p_hat: float
    tail_class: str
    window: tuple
    residual: float
    n_samples: int
    p_fixed: Optional[float] = None
    p_class: Optional[int] = None
    prefactor_drift: Optional[float] = None
    loglog_slope: Optional[float] = None
    reference_rates: Dict[str, float] = field(default_factory=dict)
    retried: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def _window(s: np.ndarray, g: np.ndarray, amp) -> np.ndarray:
    """Indices of the outermost contiguous run with ``amp[0] <= g <= amp[1]``."""
    lo, hi = amp
    # walk outward from the profile core so interior samples never leak in
    order = np.argsort(s)
    gs = g[order]
    start = np.flatnonzero(gs > hi)
    first = int(start[-1]) + 1 if start.size else 0
    sel = []
    for k in range(first, gs.size):
        if gs[k] < lo or not np.isfinite(gs[k]) or gs[k] <= 0.0:
            break
        sel.append(order[k])
    return np.asarray(sel, dtype=int)


def _lstsq(cols, y):
    A = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    return coef, float(np.sqrt(np.mean(res * res)))


def default_reference_rates(profile: WaveProfile, side: str) -> Dict[str, float]:
    """Candidate decay rates implied by the model and the profile speed."""
    m, c = profile.model, profile.c
    rates: Dict[str, float] = {}
    if "lambda_double" in profile.meta and side == "plus_inf":
        rates["double"] = float(profile.meta["lambda_double"])
        return rates
    if side == "plus_inf":
        if isinstance(m, NonlocalModel):
            disp = nonlocal_linear_speed(m.kernel, m.family.gamma0)
            rates["double"] = disp.lambda0
            if c > disp.c0_star * (1.0 + 1e-6):
                rates["fast"] = disp.lambda_plus(c)
                rates["slow"] = disp.lambda_minus(c)
            return rates
        gamma = m.family.gamma0 if isinstance(m, ScalarModel) else 1.0 - m.params.a
        # the double rate is always offered: a fast rate within tolerance of it
        # cannot be told apart from a transition tail
        rates["double"] = math.sqrt(gamma)
        if c * c - 4.0 * gamma > 1e-9:
            lm, lp = decay_rates(c, gamma)
            rates["fast"], rates["slow"] = lp, lm
        return rates
    if isinstance(m, LVModel):
        roots = lv_roots_minus_infinity(m.params, c)
        if roots.algebraic_order is not None:
            rates["algebraic"] = 0.0
        elif roots.nu is not None:
            rates["exponential"] = roots.nu
        else:
            rates["exponential"] = min(roots.mu_u_plus, roots.mu_v_plus)
        return rates
    if isinstance(m, NonlocalModel):
        rates["exponential"] = nonlocal_minus_infinity_rate(m.kernel, m.family.fprime1, c)
        return rates
    f1 = m.family.fprime1
    rates["exponential"] = 0.5 * (-c + math.sqrt(c * c - 4.0 * f1))
    return rates


def fit_tail(profile: WaveProfile, side: str = "plus_inf",
             reference_rates: Optional[Dict[str, float]] = None,
             component: str = "u", amp=AMP_WINDOW) -> TailFit:
    """Fit ``log g = -lam s + p log s + k`` with ``s = |xi|`` over the amplitude window.

    ``reference_rates`` may hold ``double`` (pulled/transition rate), ``fast``
    (pushed rate), ``slow`` and, on the ``minus_inf`` side, ``exponential``.
    """
    if side not in ("plus_inf", "minus_inf"):
        raise ValueError(f"side must be plus_inf or minus_inf, got {side!r}")
    rates = dict(reference_rates) if reference_rates is not None else default_reference_rates(profile, side)
    fit = _fit_once(profile, side, rates, component, amp)
    if fit.tail_class == "ambiguous" and amp == AMP_WINDOW:
        try:
            wide = _fit_once(profile, side, rates, component, WIDE_WINDOW)
        except InsufficientResolution:
            wide = None
        if wide is not None:
            wide.retried = True
            return wide
        fit.retried = True
    return fit


def fit_tail_arrays(xi: np.ndarray, g: np.ndarray, side: str, rates: Dict[str, float],
                    amp=AMP_WINDOW) -> TailFit:
    """Same as :func:`fit_tail` on raw ``(xi, g)`` samples."""
    s = xi if side == "plus_inf" else -xi
    mask = s > 0
    idx = _window(s[mask], np.abs(g[mask]), amp)
    s_w = s[mask][idx]
    g_w = np.abs(g[mask])[idx]
    if s_w.size < MIN_SAMPLES:
        raise InsufficientResolution(
            f"only {s_w.size} samples with gap in [{amp[0]:.0e}, {amp[1]:.0e}] on {side}")
    order = np.argsort(s_w)
    s_w, g_w = s_w[order], g_w[order]
    y, ls = np.log(g_w), np.log(s_w)
    ones = np.ones_like(s_w)
    (neg_lam, p, _), res = _lstsq([s_w, ls, ones], y)
    lam = -neg_lam
    (slope, _), _ = _lstsq([ls, ones], y)
    window = (float(xi[mask][idx].min()), float(xi[mask][idx].max()))
    fit = TailFit(side, float(lam), float(p), "ambiguous", window, res, int(s_w.size),
                  loglog_slope=float(slope), reference_rates=dict(rates))
    fit.tail_class = _classify(fit, s_w, y, ls, ones, rates)
    return fit


def _fit_once(profile, side, rates, component, amp) -> TailFit:
    return fit_tail_arrays(profile.xi, profile.gap(side, component), side, rates, amp)


def _near(x: float, ref: float) -> bool:
    return abs(x - ref) <= RATE_TOL * abs(ref)


def _classify(fit: TailFit, s, y, ls, ones, rates) -> str:
    lam = fit.lambda_hat
    if "double" in rates and _near(lam, rates["double"]):
        lam_d = rates["double"]
        (p_fix, _), _ = _lstsq([ls, ones], y + lam_d * s)
        fit.p_fixed = float(p_fix)
        # two-mode law (A s + B) exp(-lam_d s): p = 1 iff the A term is resolved
        pref = np.exp(y + lam_d * s)
        (A, B), _ = _lstsq([s, ones], pref)
        base = A * s[0] + B
        drift = float(A * (s[-1] - s[0]) / base) if base > 0 else -math.inf
        fit.prefactor_drift = drift
        if 0.5 * DRIFT_MIN < drift <= DRIFT_MIN:
            return "ambiguous"
        fit.p_class = 1 if drift > DRIFT_MIN else 0
        return "pulled" if fit.p_class == 1 else "transition"
    if "fast" in rates and _near(lam, rates["fast"]):
        fit.p_class = 0
        return "pushed"
    if "double" in rates and "fast" not in rates and lam > (1.0 + RATE_TOL) * rates["double"]:
        fit.p_class = 0
        return "pushed"
    if abs(fit.loglog_slope + 1.0) < 0.25 and abs(lam) < 0.05 * max(1.0, *(abs(v) for v in rates.values())):
        return "algebraic"
    if "exponential" in rates and _near(lam, rates["exponential"]):
        return "exponential"
    return "ambiguous"

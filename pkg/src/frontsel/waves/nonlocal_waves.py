"""Nonlocal waves ``c W' + J*W - W + f(W) = 0`` by co-moving relaxation and Newton polish."""
from __future__ import annotations

import math
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from ..dispersion import nonlocal_linear_speed
from ..errors import ContractError, NumericError
from ..model import NonlocalModel
from ..simulate import dispersal, locate_level
from .profile import WaveProfile


def _recenter(xi, w, h):
    """Shift by whole cells so the 1/2 crossing sits nearest ``xi = 0``."""
    pos = locate_level(xi, w, 0.5)
    k = int(round(pos / h))
    if k == 0:
        return w, 0
    out = np.empty_like(w)
    if k > 0:
        out[:-k] = w[k:]
        out[-k:] = 0.0
    else:
        out[-k:] = w[:k]
        out[:-k] = 1.0
    return out, k


def relax(model: NonlocalModel, c: float, xi: np.ndarray, w0: np.ndarray, t_max: float = 400.0,
          check_dt: float = 5.0, tol: float = 1e-8, safety: float = 0.4):
    """Co-moving relaxation at speed ``c``; returns ``(w, settled, elapsed)``."""
    h = float(xi[1] - xi[0])
    dt = safety * min(h / c, 1.0 / (1.0 + model.family.sup_fprime()))
    steps = max(1, int(round(check_dt / dt)))
    w = w0.copy()
    prev = None
    t = 0.0
    while t < t_max:
        for _ in range(steps):
            adv = np.empty_like(w)
            adv[:-1] = (w[1:] - w[:-1]) / h
            adv[-1] = (0.0 - w[-1]) / h
            w = w + dt * (c * adv + dispersal(w, model.kernel, 1.0, 0.0) + model.family.f(w))
            # 0 is unstable: round-off negatives would grow, positivity is preserved exactly
            np.maximum(w, 0.0, out=w)
        t += steps * dt
        if not np.all(np.isfinite(w)):
            raise NumericError("relaxation produced non-finite values")
        w, _ = _recenter(xi, w, h)
        if prev is not None and np.max(np.abs(w - prev)) < tol:
            return w, True, t
        prev = w.copy()
    return w, False, t


def _operators(n: int, h: float, kernel, rho: float):
    """Sparse ``J*W`` and centered ``W'`` on the window plus constant left-ghost terms.

    Ghosts are 1 to the left; to the right they continue the last node
    geometrically, ``W[n-1+j] = rho**j W[n-1]``.
    """
    m = kernel.m
    wts = kernel.weights
    K = sp.diags([np.full(n - abs(k), wts[m + k]) for k in range(-m, m + 1)],
                 list(range(-m, m + 1)), shape=(n, n), format="lil")
    g = np.zeros(n)
    for i in range(min(m, n)):
        g[i] = wts[m + i + 1:].sum()
    last = n - 1
    for i in range(max(0, n - 1 - m), n):
        extra = sum(wts[m + (last + j - i)] * rho**j for j in range(1, m + 1) if last + j - i <= m)
        K[i, last] += extra
    D = sp.diags([np.full(n - 1, 1.0), np.full(n - 1, -1.0)], [1, -1], shape=(n, n), format="lil")
    D[last, last] += rho
    D = D.tocsr() / (2 * h)
    dbc = np.zeros(n)
    dbc[0] = -1.0 / (2 * h)
    return K.tocsr(), g, D, dbc


def newton_polish(model: NonlocalModel, xi: np.ndarray, w: np.ndarray, c: float, lam_right: float,
                  tol: float = 1e-11, maxit: int = 40):
    """Solve the discrete wave equation at fixed ``c`` with the phase ``W(0) = 1/2``.

    The equation at the last node is replaced by the phase condition; the
    right ghosts decay at ``lam_right``.
    """
    n = xi.size
    h = float(xi[1] - xi[0])
    i0 = int(np.argmin(np.abs(xi)))
    K, ghost, D, dbc = _operators(n, h, model.kernel, math.exp(-lam_right * h))
    fam = model.family
    eye = sp.identity(n, format="csr")

    def F(W):
        r = c * (D @ W + dbc) + K @ W + ghost - W + fam.f(W)
        r[-1] = W[i0] - 0.5
        return r

    W = w.copy()
    r = F(W)
    nrm = float(np.max(np.abs(r)))
    for _ in range(maxit):
        if nrm < tol:
            break
        J = (c * D + K - eye + sp.diags(fam.fprime(W))).tolil()
        J[n - 1, :] = 0.0
        J[n - 1, i0] = 1.0
        dx = spsolve(J.tocsc(), -r)
        alpha = 1.0
        while True:
            Wn = W + alpha * dx
            rn = F(Wn)
            nn = float(np.max(np.abs(rn)))
            if nn < (1 - 0.25 * alpha) * nrm or nn < tol:
                break
            alpha *= 0.5
            if alpha < 1e-8:
                raise NumericError(f"nonlocal wave polish stagnated (residual {nrm:.2e})", payload=r)
        W, r, nrm = Wn, rn, nn
    if nrm >= tol:
        raise NumericError(f"nonlocal wave polish did not converge (residual {nrm:.2e})", payload=r)
    return W, nrm


def wave_residual(model: NonlocalModel, profile: WaveProfile) -> float:
    """Sup norm of ``c W' + J*W - W + f(W)`` at nodes whose stencil lies in the window."""
    w, h, m = profile.u, profile.h, model.kernel.m
    conv = dispersal(w, model.kernel, 1.0, 0.0)
    d1 = np.gradient(w, h, edge_order=2)
    r = profile.c * d1 + conv + model.family.f(w)
    return float(np.max(np.abs(r[m + 1: -(m + 1)])))


def nonlocal_wave_extract(model: NonlocalModel, c_hat: float, xi_min: float = -40.0,
                          xi_max: float = 60.0, t_max: float = 400.0,
                          initial: Optional[np.ndarray] = None) -> WaveProfile:
    """Wave profile from co-moving relaxation at ``c_hat`` followed by a Newton polish.

    Speeds below the linear speed admit no monotone wave; such estimates
    (typical of finite-time measurements of pulled fronts) are raised to it.
    """
    if not c_hat > 0:
        raise ContractError("relaxation speed must be positive")
    disp = nonlocal_linear_speed(model.kernel, model.family.gamma0)
    c = max(c_hat, disp.c0_star)
    lam = disp.lambda0 if c <= disp.c0_star * (1 + 1e-9) else disp.lambda_minus(c)
    h = model.kernel.h
    i_lo, i_hi = int(round(xi_min / h)), int(round(xi_max / h))
    xi = h * np.arange(i_lo, i_hi + 1)
    w0 = initial if initial is not None else 0.5 * (1.0 - np.tanh(0.5 * lam * xi))
    w, settled, elapsed = relax(model, c, xi, w0, t_max=t_max)
    try:
        w, res = newton_polish(model, xi, w, c, lam)
    except NumericError as exc:
        raise NumericError(f"profile did not settle within t_max={t_max}: {exc}") from exc
    prof = WaveProfile(xi=xi, u=w, c=c, model=model, anchor=0.5,
                       meta={"method": "comoving_relaxation", "settled": settled,
                             "relax_time": elapsed, "c_relax": c_hat, "newton_residual": res})
    prof.residual = wave_residual(model, prof)
    return prof


def nonlocal_minimal_wave(model: NonlocalModel, **kw) -> WaveProfile:
    return nonlocal_wave_extract(model, model.linear_speed, **kw)

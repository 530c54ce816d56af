"""Characteristic exponents, linear spreading speeds and the large-diffusion glue cubic.

All roots are found by closed form or by bracketing bisection; no open
Newton iterations are used.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, NumericError
from .model import KernelSpec, LVParams, kernel_moment, kernel_moment_derivative
from .roots import bisect, golden_min

DEGENERACY_TOL = 1e-12
LAMBDA_MAX = 50.0


def scalar_linear_speed(f_prime_0: float) -> float:
    if not f_prime_0 > 0:
        raise DomainError(f"f'(0) must be positive, got {f_prime_0}")
    return 2.0 * math.sqrt(f_prime_0)


def hadeler_rothe_speed(s: float) -> float:
    """Closed-form minimal speed of ``w_t = w_xx + w(1-w)(1+s w)``."""
    if s < 0:
        raise DomainError(f"s must be >= 0, got {s}")
    if s <= 2.0:
        return 2.0
    return math.sqrt(2.0 / s) + math.sqrt(s / 2.0)


def decay_rates(c: float, gamma: float):
    """Roots of ``lam^2 - c lam + gamma = 0`` (tail rates of ``W'' + cW' + gamma W = 0``).

    Returns ``(lam_minus, lam_plus)``; raises for complex roots.
    """
    disc = c * c - 4.0 * gamma
    if disc < -DEGENERACY_TOL:
        raise DomainError("subcritical speed: oscillatory roots")
    sq = math.sqrt(max(disc, 0.0))
    return 0.5 * (c - sq), 0.5 * (c + sq)


def discrete_linear_speed(gamma: float, h: float) -> float:
    """Speed at which the centered-difference tail operator has a double root.

    ``D2 + c D1 + gamma`` on spacing ``h`` has a double characteristic root at
    ``c^2 = 4 gamma - gamma^2 h^2``, slightly below ``2 sqrt(gamma)``.
    """
    return math.sqrt(4.0 * gamma - (gamma * h) ** 2)


def discrete_double_rate(gamma: float, h: float) -> float:
    """Decay rate of the double root at :func:`discrete_linear_speed`."""
    c = discrete_linear_speed(gamma, h)
    z = (2.0 - gamma * h * h) / (2.0 + c * h)
    return -math.log(z) / h


@dataclass
class CharacteristicRoots:
    c: float
    lambda_u_plus: Optional[float] = None
    lambda_u_minus: Optional[float] = None
    lambda_v_plus: Optional[float] = None
    lambda_v_minus: Optional[float] = None
    mu_u_plus: Optional[float] = None
    mu_u_minus: Optional[float] = None
    mu_v_plus: Optional[float] = None
    mu_v_minus: Optional[float] = None
    nu: Optional[float] = None
    Lambda: Optional[float] = None
    Lambda_candidates: Optional[tuple] = None
    degenerate_double: bool = False
    algebraic_order: Optional[int] = None
    regime: Optional[str] = None

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if v is not None}


def lv_roots_plus_infinity(params: LVParams, c: float) -> CharacteristicRoots:
    """Tail exponents at the invaded state ``(0, 1)`` in the ``exp(-lam xi)`` convention."""
    a, d, r = params.a, params.d, params.r
    if not 0 < a < 1:
        raise DomainError("roots at +infinity need 0 < a < 1")
    disc = c * c - 4.0 * (1.0 - a)
    if disc < -DEGENERACY_TOL:
        raise DomainError("subcritical speed: oscillatory roots")
    degenerate = bool(abs(disc) <= DEGENERACY_TOL)
    sq = 0.0 if degenerate else math.sqrt(disc)
    lu_p, lu_m = 0.5 * (c + sq), 0.5 * (c - sq)
    sv = math.sqrt(c * c + 4.0 * r * d)
    roots = CharacteristicRoots(
        c=c,
        lambda_u_plus=lu_p,
        lambda_u_minus=lu_m,
        lambda_v_plus=(c + sv) / (2.0 * d),
        lambda_v_minus=(c - sv) / (2.0 * d),
        degenerate_double=degenerate,
        Lambda_candidates=(lu_m, lu_p),
    )
    if degenerate:
        roots.Lambda = lu_p
    return roots


def quartic_rho(params: LVParams, c: float, lam):
    u_s, v_s = params.equilibrium
    a, b, d, r = params.a, params.b, params.d, params.r
    return (lam * lam + c * lam - u_s) * (d * lam * lam + c * lam - r * v_s) - r * a * b * u_s * v_s


def lv_roots_minus_infinity(params: LVParams, c: float) -> CharacteristicRoots:
    """Growth exponents of ``(U, V)`` toward the left limit state, ``exp(mu xi)`` convention."""
    if not c > 0:
        raise DomainError("speed must be positive")
    a, b, d, r = params.a, params.b, params.d, params.r
    roots = CharacteristicRoots(c=c)
    s1 = math.sqrt(c * c + 4.0)
    roots.mu_u_plus = 0.5 * (-c + s1)
    roots.mu_u_minus = 0.5 * (-c - s1)
    if b > 1.0:
        roots.regime = "strong_weak"
        sv = math.sqrt(c * c + 4.0 * r * d * (b - 1.0))
        roots.mu_v_plus = (-c + sv) / (2.0 * d)
        roots.mu_v_minus = (-c - sv) / (2.0 * d)
        return roots
    if b == 1.0:
        roots.regime = "critical"
        roots.algebraic_order = 1
        return roots

    roots.regime = "weak"
    u_s, v_s = params.equilibrium
    mu_u = 0.5 * (-c + math.sqrt(c * c + 4.0 * u_s))
    mu_v = (-c + math.sqrt(c * c + 4.0 * d * r * v_s)) / (2.0 * d)
    roots.mu_u_plus, roots.mu_v_plus = mu_u, mu_v
    roots.mu_u_minus = 0.5 * (-c - math.sqrt(c * c + 4.0 * u_s))
    roots.mu_v_minus = (-c - math.sqrt(c * c + 4.0 * d * r * v_s)) / (2.0 * d)
    hi = min(mu_u, mu_v)
    rho = lambda lam: quartic_rho(params, c, lam)
    r0, rhi = rho(0.0), rho(hi)
    if not (r0 > 0 > rhi):
        raise NumericError(
            f"quartic bracket failed: rho(0)={r0:.3e}, rho({hi:.6g})={rhi:.3e}",
            payload={"rho0": r0, "rho_hi": rhi},
        )
    roots.nu = bisect(rho, 0.0, hi, xtol=0.0)
    return roots


@dataclass
class NonlocalDispersion:
    c0_star: float
    lambda0: float
    kernel: KernelSpec
    f_prime_0: float
    lambda_max: float = LAMBDA_MAX

    def h(self, lam: float) -> float:
        return kernel_moment(self.kernel, lam) - 1.0 + self.f_prime_0

    def lambda_minus(self, c: float) -> float:
        self._check_speed(c)
        return bisect(lambda x: self.h(x) - c * x, 0.0, self.lambda0, xtol=0.0)

    def lambda_plus(self, c: float) -> float:
        self._check_speed(c)
        if self.h(self.lambda_max) - c * self.lambda_max <= 0:
            raise NumericError(f"no fast root below lambda_max={self.lambda_max}")
        return bisect(lambda x: self.h(x) - c * x, self.lambda0, self.lambda_max, xtol=0.0)

    def _check_speed(self, c):
        if not c > self.c0_star:
            raise DomainError(f"c={c} must exceed c0*={self.c0_star}")


def nonlocal_linear_speed(
    kernel: KernelSpec, f_prime_0: float, lambda_max: float = LAMBDA_MAX
) -> NonlocalDispersion:
    """``c0* = min_lam (int J e^{lam y} + f'(0) - 1) / lam``."""
    if not f_prime_0 > 0:
        raise DomainError("f'(0) must be positive")

    def g(lam):
        return (kernel_moment(kernel, lam) + f_prime_0 - 1.0) / lam

    grid = np.geomspace(1e-3, lambda_max, 400)
    vals = np.array([g(x) for x in grid])
    k = int(np.argmin(vals))
    if k == len(grid) - 1 or not np.isfinite(vals[k]):
        raise NumericError("no interior minimum of h(lam)/lam below lambda_max")
    lo, hi = grid[max(k - 1, 0)], grid[k + 1]
    lam0 = golden_min(g, lo, hi, xtol=1e-12)

    # polish on the stationarity condition lam h'(lam) = h(lam)
    def stat(lam):
        return lam * kernel_moment_derivative(kernel, lam) - (kernel_moment(kernel, lam) + f_prime_0 - 1.0)

    if stat(lo) < 0 < stat(hi):
        lam0 = bisect(stat, lo, hi, xtol=0.0)
    return NonlocalDispersion(c0_star=g(lam0), lambda0=lam0, kernel=kernel, f_prime_0=f_prime_0,
                              lambda_max=lambda_max)


def nonlocal_minus_infinity_rate(
    kernel: KernelSpec, f_prime_1: float, c: float, lambda_max: float = LAMBDA_MAX
) -> float:
    """Positive root of ``c lam = int J e^{lam y} dy + f'(1) - 1``."""
    if not f_prime_1 < 0:
        raise DomainError("f'(1) must be negative")
    if not c > 0:
        raise DomainError("c must be positive")

    def resid(lam):
        return kernel_moment(kernel, lam) + f_prime_1 - 1.0 - c * lam

    if resid(lambda_max) <= 0:
        raise NumericError(f"no sign change of the -infinity residual below lambda={lambda_max}")
    return bisect(resid, 0.0, lambda_max, xtol=0.0)


@dataclass
class GlueCubic:
    params: LVParams
    v_star: float
    coefficients: tuple  # (c0, c1, c2, c3), ascending powers of beta
    condition_holds: bool
    beta_star: Optional[float] = None
    predicted_speed: Optional[float] = None
    no_threshold_prediction: bool = False

    def __call__(self, beta):
        c0, c1, c2, c3 = self.coefficients
        return ((c3 * beta + c2) * beta + c1) * beta + c0

    def derivative(self, beta):
        p = self.params
        return p.b * p.r * beta * (p.a * beta - 1.0)

    def to_dict(self):
        return {
            "v_star": self.v_star,
            "coefficients": list(self.coefficients),
            "condition_holds": self.condition_holds,
            "beta_star": self.beta_star,
            "predicted_speed": self.predicted_speed,
            "no_threshold_prediction": self.no_threshold_prediction,
        }


def large_d_condition(params: LVParams) -> tuple:
    """Both sides of the large-diffusion nonlinear-selection inequality."""
    a, b = params.a, params.b
    v = (1.0 - b) / (1.0 - a * b)
    lhs = 1.0 / 6.0 - b / 2.0 + a * b / 3.0
    rhs = (1.0 - b) * v * v / 2.0 - (1.0 - a * b) * v ** 3 / 3.0
    return lhs, rhs


def glue_beta_star(params: LVParams) -> GlueCubic:
    a, b, r = params.a, params.b, params.r
    if not (0 < a < 1 and 0 < b < 1):
        raise DomainError("glue cubic needs 0 < a, b < 1")
    v = (1.0 - b) / (1.0 - a * b)
    c3 = r * a * b / 3.0
    c2 = -r * b / 2.0
    c0 = r * (-(1.0 - b) * v * v / 2.0 + (1.0 - a * b) * v ** 3 / 3.0 + 1.0 / 6.0)
    lhs, rhs = large_d_condition(params)
    cubic = GlueCubic(params, v, (c0, 0.0, c2, c3), condition_holds=lhs < rhs)
    if not cubic.condition_holds:
        cubic.no_threshold_prediction = True
        return cubic
    cubic.beta_star = bisect(cubic, v, 1.0, xtol=0.0)
    cubic.predicted_speed = 2.0 * math.sqrt(1.0 - a * cubic.beta_star)
    return cubic


def sufficient_condition_report(params: LVParams) -> dict:
    """Verdicts of the two published sufficient conditions for linear selection."""
    a, b, d, r = params.a, params.b, params.d, params.r
    if not 0 < a < 1:
        raise DomainError("sufficient conditions need 0 < a < 1")
    llw = 0 < d < 2 and r * (a * b - 1.0) <= (2.0 - d) * (1.0 - a)
    lhs = ((2.0 - d) * (1.0 - a) + r) / (r * b)
    second = -math.inf if d == 1.0 else (d - 2.0) / (2.0 * abs(d - 1.0))
    huang = lhs >= max(a, second)
    verdict = lambda ok: "guaranteed-linear" if ok else "unknown"
    return {
        "llw": verdict(llw),
        "llw_applicable": 0 < d < 2,
        "huang": verdict(huang),
        "huang_lhs": lhs,
        "huang_rhs": max(a, second),
    }


def lv_dispersion_report(params: LVParams, c: Optional[float] = None) -> dict:
    """Everything computable from ``params`` in one JSON-ready mapping."""
    out = {"params": asdict(params), "equilibrium": list(params.equilibrium)}
    if 0 < params.a < 1:
        c_lin = params.linear_speed
        c_eval = c_lin if c is None else c
        out["linear_speed"] = c_lin
        out["speed"] = c_eval
        out["plus_infinity"] = lv_roots_plus_infinity(params, c_eval).to_dict()
        out["sufficient_conditions"] = sufficient_condition_report(params)
        if c_eval > 0:
            out["minus_infinity"] = lv_roots_minus_infinity(params, c_eval).to_dict()
        if params.b < 1:
            out["glue"] = glue_beta_star(params).to_dict()
    elif c is not None and c > 0:
        out["minus_infinity"] = lv_roots_minus_infinity(params, c).to_dict()
    return out


def scheme_linear_speed(growth: float, h: float, dt: float, scheme: str = "explicit_euler",
                        kernel: Optional[KernelSpec] = None) -> float:
    """Linear spreading speed of the fully discrete stepper.

    The invading component obeys ``w_t = L w + growth w`` near zero, with ``L``
    the centered Laplacian (or ``J*w - w`` when ``kernel`` is given). One step
    multiplies ``exp(-lam x)`` by ``G(lam)``; the speed is
    ``min_lam log G(lam) / (dt lam)``.
    """
    if kernel is not None:
        def rate(lam):
            return math.log1p(dt * (kernel_moment(kernel, lam) - 1.0 + growth)) / dt
    else:
        def rate(lam):
            lap = (2.0 * math.cosh(lam * h) - 2.0) / (h * h)
            if scheme == "imex_diffusion":
                den = 1.0 - dt * lap
                if den <= 0:
                    return math.inf
                return math.log((1.0 + dt * growth) / den) / dt
            return math.log1p(dt * (growth + lap)) / dt
    lam0 = math.sqrt(growth) if kernel is None else 1.0
    lam = golden_min(lambda l: rate(l) / l, 1e-3 * lam0, 10.0 * lam0)
    return rate(lam) / lam

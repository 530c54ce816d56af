"""Equations of study: monostable reaction terms, competition parameters, dispersal kernels."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DomainError

KINDS = ("fisher_kpp", "hadeler_rothe", "custom_cubic")
KERNEL_SHAPES = ("uniform", "parabolic_bump", "custom_samples")

# Overshoot tolerated for solver transients.
STATE_BOUNDS = (-0.1, 1.5)


@dataclass(frozen=True)
class NonlinearityFamily:
    """Monostable reaction term ``f(w; s)`` on ``[0, 1]``.

    ``fisher_kpp`` is ``w(1-w)``; ``hadeler_rothe`` and ``custom_cubic`` are
    ``w(1-w)(1+s w)``. ``custom_cubic`` also accepts an explicit ascending
    coefficient list, in which case ``s`` is only a label.
    """

    kind: str = "fisher_kpp"
    s: float = 0.0
    coeffs: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown nonlinearity kind {self.kind!r}")
        if not self.s >= 0.0:
            raise DomainError(f"family parameter s must be >= 0, got {self.s}")
        if self.coeffs is not None:
            if self.kind != "custom_cubic":
                raise DomainError("coefficient lists are only accepted for custom_cubic")
            object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        object.__setattr__(self, "_poly", self._build_poly())
        self._check_monostable()

    def _build_poly(self) -> np.ndarray:
        if self.coeffs is not None:
            return np.trim_zeros(np.asarray(self.coeffs, dtype=float), "b")
        if self.kind == "fisher_kpp":
            return np.array([0.0, 1.0, -1.0])
        s = float(self.s)
        return np.array([0.0, 1.0, s - 1.0, -s])

    def _check_monostable(self):
        p = self._poly
        if len(p) < 2 or p[0] != 0.0:
            raise DomainError("reaction term must vanish at w=0")
        if abs(P.polyval(1.0, p)) > 1e-12 * max(1.0, np.abs(p).sum()):
            raise DomainError("reaction term must vanish at w=1")
        if not self.fprime(0.0) > 0.0 > self.fprime(1.0):
            raise DomainError("monostable condition f'(0) > 0 > f'(1) violated")
        w = np.arange(1, 1000) * 1e-3
        if np.any(self.f(w) <= 0.0):
            raise DomainError("reaction term must be positive on (0, 1)")

    def f(self, w):
        return P.polyval(w, self._poly)

    def fprime(self, w):
        return P.polyval(w, P.polyder(self._poly))

    def fsecond(self, w):
        return P.polyval(w, P.polyder(self._poly, 2))

    def f_over_w(self, w):
        """``f(w)/w`` evaluated without division; equals ``f'(0)`` at ``w = 0``."""
        return P.polyval(w, self._poly[1:])

    @property
    def gamma0(self) -> float:
        return float(self.fprime(0.0))

    @property
    def fprime1(self) -> float:
        return float(self.fprime(1.0))

    def sup_fprime(self) -> float:
        w = np.linspace(0.0, 1.0, 2001)
        return float(np.max(self.fprime(w)))

    def with_parameter(self, s: float) -> "NonlinearityFamily":
        return NonlinearityFamily(self.kind, float(s), self.coeffs)


def eval_reaction(family: NonlinearityFamily, w):
    if __debug__:
        lo = np.min(w)
        hi = np.max(w)
        if lo < -0.1 or hi > 1.1:
            raise DomainError(f"w outside [-0.1, 1.1]: [{lo}, {hi}]")
    out = family.f(w)
    return float(out) if np.ndim(out) == 0 else out


def kpp_condition(family: NonlinearityFamily, n: int = 1001) -> bool:
    """True when ``f'(0) w >= f(w)`` on a uniform sample of ``[0, 1]``."""
    w = np.linspace(0.0, 1.0, n)
    return bool(np.all(family.gamma0 * w - family.f(w) >= -1e-14))


@dataclass(frozen=True)
class LVParams:
    """Competition parameters; ``d`` and ``r`` are diffusion and growth of ``v``."""

    a: float
    b: float
    d: float = 1.0
    r: float = 1.0

    def __post_init__(self):
        for name in ("a", "b", "d", "r"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0.0):
                raise DomainError(f"LV parameter {name} must be positive, got {val}")

    @property
    def equilibrium(self) -> Tuple[float, float]:
        """Left limit state ``(u*, v*)`` of the invasion front."""
        a, b = self.a, self.b
        if b >= 1.0:
            return (1.0, 0.0)
        if a * b >= 1.0 or a >= 1.0:
            raise DomainError("no coexistence state for b < 1 unless a < 1")
        return ((1.0 - a) / (1.0 - a * b), (1.0 - b) / (1.0 - a * b))

    @property
    def linear_speed(self) -> float:
        if self.a >= 1.0:
            return 0.0
        return 2.0 * math.sqrt(1.0 - self.a)

    def replace(self, **kw) -> "LVParams":
        vals = dict(a=self.a, b=self.b, d=self.d, r=self.r)
        vals.update(kw)
        return LVParams(**vals)


def lv_reaction(params: LVParams, u, v):
    if __debug__:
        if np.min(u) < -0.1 or np.max(u) > 1.5 or np.min(v) < -0.1 or np.max(v) > 1.5:
            raise DomainError("LV state outside [-0.1, 1.5]")
    fu = u * (1.0 - u - params.a * v)
    fv = params.r * v * (1.0 - v - params.b * u)
    return fu, fv


def _trapezoid_weights(m: int) -> np.ndarray:
    w = np.ones(2 * m + 1)
    w[0] = w[-1] = 0.5
    return w


@dataclass(frozen=True)
class KernelSpec:
    """Symmetric unit-mass kernel sampled at spacing ``h`` on ``[-L, L]``.

    ``weights`` are the trapezoid quadrature weights times the samples, so the
    discrete convolution is ``sum_j weights[j] * w[i - j]`` and ``weights``
    sums to one.
    """

    half_width: float
    h: float
    shape: str
    samples: np.ndarray = field(repr=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.shape not in KERNEL_SHAPES:
            raise DomainError(f"unknown kernel shape {self.shape!r}")
        if not (self.half_width > 0 and self.h > 0):
            raise DomainError("kernel half-width and spacing must be positive")
        m = self.half_width / self.h
        if abs(m - round(m)) > 1e-9 * max(1.0, m):
            raise DomainError("kernel half-width must be an integer multiple of h")
        m = int(round(m))
        J = np.array(self.samples, dtype=float)
        if J.shape != (2 * m + 1,):
            raise DomainError(f"expected {2 * m + 1} kernel samples, got {J.shape}")
        if np.any(J < 0):
            raise DomainError("kernel samples must be nonnegative")
        J = 0.5 * (J + J[::-1])
        mass = self.h * np.dot(_trapezoid_weights(m), J)
        if mass <= 0:
            raise DomainError("kernel has zero mass")
        J = J / mass
        J.setflags(write=False)
        wts = self.h * _trapezoid_weights(m) * J
        wts = 0.5 * (wts + wts[::-1])
        wts.setflags(write=False)
        object.__setattr__(self, "samples", J)
        object.__setattr__(self, "weights", wts)

    @property
    def m(self) -> int:
        return (len(self.samples) - 1) // 2

    @property
    def nodes(self) -> np.ndarray:
        return self.h * np.arange(-self.m, self.m + 1)

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    @classmethod
    def uniform(cls, half_width: float = 1.0, h: float = 0.01) -> "KernelSpec":
        m = int(round(half_width / h))
        return cls(half_width, h, "uniform", np.full(2 * m + 1, 1.0 / (2 * half_width)))

    @classmethod
    def parabolic_bump(cls, half_width: float = 1.0, h: float = 0.01) -> "KernelSpec":
        m = int(round(half_width / h))
        y = h * np.arange(-m, m + 1)
        return cls(half_width, h, "parabolic_bump", np.clip(1.0 - (y / half_width) ** 2, 0, None))

    @classmethod
    def from_samples(cls, samples, h: float) -> "KernelSpec":
        samples = np.asarray(samples, dtype=float)
        m = (len(samples) - 1) // 2
        return cls(m * h, h, "custom_samples", samples)

    def __eq__(self, other):
        return (
            isinstance(other, KernelSpec)
            and self.shape == other.shape
            and self.h == other.h
            and self.half_width == other.half_width
            and np.array_equal(self.samples, other.samples)
        )

    def __hash__(self):
        return hash((self.shape, self.h, self.half_width, self.samples.tobytes()))


def kernel_moment(kernel: KernelSpec, lam: float) -> float:
    """Trapezoid value of ``int J(y) exp(lam y) dy``; exactly even in ``lam``."""
    return float(np.dot(kernel.weights, np.cosh(lam * kernel.nodes)))


def kernel_moment_derivative(kernel: KernelSpec, lam: float) -> float:
    y = kernel.nodes
    return float(np.dot(kernel.weights, y * np.sinh(lam * y)))


@dataclass(frozen=True)
class ScalarModel:
    family: NonlinearityFamily
    kind: str = field(default="scalar_local", init=False)

    @property
    def limits(self):
        return (1.0,), (0.0,)

    @property
    def linear_speed(self) -> float:
        return 2.0 * math.sqrt(self.family.gamma0)


@dataclass(frozen=True)
class LVModel:
    params: LVParams
    kind: str = field(default="lv_system", init=False)

    @property
    def limits(self):
        return self.params.equilibrium, (0.0, 1.0)

    @property
    def linear_speed(self) -> float:
        return self.params.linear_speed


@dataclass(frozen=True)
class NonlocalModel:
    family: NonlinearityFamily
    kernel: KernelSpec
    kind: str = field(default="scalar_nonlocal", init=False)

    @property
    def limits(self):
        return (1.0,), (0.0,)

    @property
    def linear_speed(self) -> float:
        from .dispersion import nonlocal_linear_speed

        return nonlocal_linear_speed(self.kernel, self.family.gamma0).c0_star


ModelSpec = Union[ScalarModel, LVModel, NonlocalModel]

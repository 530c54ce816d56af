"""Container for computed wave profiles."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..model import LVModel, ModelSpec


@dataclass
class WaveProfile:
    """Discretized wave ``(U[, V])(xi)`` moving at speed ``c``.

    ``xi`` is uniform; the phase is fixed so that ``u`` crosses ``anchor``
    at ``xi = 0`` (to grid accuracy).
    """

    xi: np.ndarray
    u: np.ndarray
    c: float
    model: ModelSpec
    v: Optional[np.ndarray] = None
    anchor: float = 0.5
    residual: float = math.nan
    meta: dict = field(default_factory=dict)

    @property
    def h(self) -> float:
        return float(self.xi[1] - self.xi[0])

    @property
    def limits(self):
        return self.model.limits

    def gap(self, side: str, component: str = "u") -> np.ndarray:
        """Distance to the limit state on ``side`` ('plus_inf' or 'minus_inf')."""
        idx = 0 if component == "u" else 1
        w = self.u if component == "u" else self.v
        left, right = self.limits
        ref = right[idx] if side == "plus_inf" else left[idx]
        return np.abs(w - ref)

    def is_monotone(self, tol: float = 1e-12) -> bool:
        """``U`` nonincreasing (and ``V`` nondecreasing) up to round-off ``tol``."""
        ok = bool(np.all(np.diff(self.u) <= tol))
        if self.v is not None:
            ok = ok and bool(np.all(np.diff(self.v) >= -tol))
        return ok

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            if self.v is None:
                wr.writerow(["xi", "U"])
                wr.writerows(zip(self.xi.tolist(), self.u.tolist()))
            else:
                wr.writerow(["xi", "U", "V"])
                wr.writerows(zip(self.xi.tolist(), self.u.tolist(), self.v.tolist()))

    def summary(self) -> dict:
        return {
            "kind": self.model.kind,
            "c": self.c,
            "xi_min": float(self.xi[0]),
            "xi_max": float(self.xi[-1]),
            "h": self.h,
            "n": int(self.xi.size),
            "residual": self.residual,
            "monotone": self.is_monotone(),
            **{k: v for k, v in self.meta.items() if isinstance(v, (int, float, str, bool))},
        }

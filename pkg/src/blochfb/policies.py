"""Control policies consumed by the trajectory integrators.

Policies are table-driven so that both the compiled and the pure path loops
can evaluate them without calling back into Python:

* ``ZeroPolicy``: no control.
* ``OpenLoopPolicy``: (ux, uy) interpolated in time, state-independent.
* ``CostateFeedbackPolicy``: the costate path lambda(t) is stored open loop
  and the control is formed from the live state,
  ux = l2 z - l3 y,  uy = l3 x - l1 z,
  which makes the applied control state-dependent.  Past the stored horizon
  the costate is held at its terminal value.

All grids are uniform starting at t = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["ZeroPolicy", "OpenLoopPolicy", "CostateFeedbackPolicy", "ZERO_POLICY"]

KIND_ZERO = 0
KIND_OPEN_LOOP = 1
KIND_COSTATE = 2

_EMPTY = np.zeros(0)


def _interp_clamped(arr: np.ndarray, pos: float) -> float:
    """Linear interpolation at fractional index pos, held at the last value."""
    i = int(pos)
    if i >= arr.size - 1:
        return float(arr[-1])
    w = pos - i
    return float(arr[i] + w * (arr[i + 1] - arr[i]))


@dataclass(frozen=True)
class ZeroPolicy:
    kind: int = field(default=KIND_ZERO, init=False)

    @property
    def dt(self) -> float:
        return 1.0

    def tables(self):
        return _EMPTY, _EMPTY, _EMPTY

    def control(self, t: float, s) -> tuple[float, float]:
        return 0.0, 0.0


@dataclass(frozen=True)
class OpenLoopPolicy:
    """State-independent control u(t) on a uniform grid of spacing dt."""

    dt: float
    ux: np.ndarray
    uy: np.ndarray
    kind: int = field(default=KIND_OPEN_LOOP, init=False)

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("policy grid spacing must be positive")
        if self.ux.shape != self.uy.shape or self.ux.ndim != 1 or self.ux.size < 1:
            raise ValueError("ux and uy must be equal-length 1-d arrays")
        self.ux.setflags(write=False)
        self.uy.setflags(write=False)

    def tables(self):
        return self.ux, self.uy, _EMPTY

    def control(self, t: float, s) -> tuple[float, float]:
        pos = t / self.dt
        return _interp_clamped(self.ux, pos), _interp_clamped(self.uy, pos)


@dataclass(frozen=True)
class CostateFeedbackPolicy:
    """Feedback rule built from a stored costate path on a uniform grid."""

    dt: float
    lam: np.ndarray  # shape (n, 3)
    kind: int = field(default=KIND_COSTATE, init=False)

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("policy grid spacing must be positive")
        if self.lam.ndim != 2 or self.lam.shape[1] != 3 or self.lam.shape[0] < 1:
            raise ValueError("costate table must have shape (n, 3)")
        self.lam.setflags(write=False)

    def tables(self):
        # contiguous per-component copies for the kernels
        return (
            np.ascontiguousarray(self.lam[:, 0]),
            np.ascontiguousarray(self.lam[:, 1]),
            np.ascontiguousarray(self.lam[:, 2]),
        )

    def costate_at(self, t: float) -> np.ndarray:
        pos = t / self.dt
        i = int(pos)
        if i >= self.lam.shape[0] - 1:
            return self.lam[-1].copy()
        w = pos - i
        return self.lam[i] + w * (self.lam[i + 1] - self.lam[i])

    def control(self, t: float, s) -> tuple[float, float]:
        x, y, z = (s.x, s.y, s.z) if hasattr(s, "z") else map(float, s)
        l1, l2, l3 = self.costate_at(t)
        return l2 * z - l3 * y, l3 * x - l1 * z


ZERO_POLICY = ZeroPolicy()

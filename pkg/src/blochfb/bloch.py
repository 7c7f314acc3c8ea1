"""Qubit state maps, superoperators and the Bloch-vector equations of motion.

States live on (or inside) the Bloch ball,

    rho = (I + x sigma_x + y sigma_y + z sigma_z) / 2,

and evolve under free precession at ``omega0`` about z, two control channels
(ux/2) sigma_x + (uy/2) sigma_y, thermal decay channels sigma-/sigma+ with
time-dependent rates Gamma1/Gamma2, and a continuously monitored -sigma_z/2
with strength M and efficiency eta.  In Bloch components the deterministic
part reads

    dx/dt = -Delta x - (M/2) x - omega0 y + uy z
    dy/dt =  omega0 x - Delta y - (M/2) y - ux z
    dz/dt = -uy x + ux y - 2 Delta z - 2 gamma

and the measurement innovation multiplies sqrt(M eta) (xz, yz, z^2 - 1).

``matrix_drift_oracle`` assembles the same generator from the density-matrix
superoperators; its Bloch image must reproduce ``drift`` and serves as the
independent check on the component equations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .reservoir import CoefficientTable, ReservoirParams, markov_rates

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "SIGMA_MINUS",
    "SIGMA_PLUS",
    "Mode",
    "BlochState",
    "ControlInput",
    "density_from_bloch",
    "bloch_from_density",
    "dissipator",
    "meas_superop",
    "drift",
    "diffusion",
    "matrix_drift_oracle",
    "target_state",
    "coherence_factor",
    "populations",
]

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)
# sigma- = (sigma_x - i sigma_y)/2 lowers |0> (z=+1) to |1> (z=-1), so the
# Gamma1 channel relaxes the population toward z = -1.
SIGMA_MINUS = 0.5 * (SIGMA_X - 1.0j * SIGMA_Y)
SIGMA_PLUS = 0.5 * (SIGMA_X + 1.0j * SIGMA_Y)

NORM_SLACK = 1e-9


class Mode(Enum):
    """Rate model: full time-dependent rates or their long-time constants."""

    NONMARKOVIAN = "nonmarkovian"
    MARKOVIAN = "markovian"


@dataclass(frozen=True)
class BlochState:
    """Bloch vector (x, y, z); physical states satisfy x^2+y^2+z^2 <= 1."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        n2 = self.x * self.x + self.y * self.y + self.z * self.z
        if n2 > 1.0 + NORM_SLACK:
            raise ValueError(f"Bloch vector leaves the unit ball: |s|^2 = {n2}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @classmethod
    def from_array(cls, a) -> "BlochState":
        return cls(float(a[0]), float(a[1]), float(a[2]))

    def norm(self) -> float:
        return math.sqrt(self.x**2 + self.y**2 + self.z**2)


@dataclass(frozen=True)
class ControlInput:
    """Amplitudes of the two control channels."""

    ux: float = 0.0
    uy: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.ux) and math.isfinite(self.uy)):
            raise ValueError(f"control must be finite, got ({self.ux}, {self.uy})")


def density_from_bloch(s: BlochState) -> np.ndarray:
    """Density matrix (I + s . sigma)/2 of a Bloch vector."""
    return 0.5 * (IDENTITY + s.x * SIGMA_X + s.y * SIGMA_Y + s.z * SIGMA_Z)


def bloch_from_density(rho: np.ndarray, atol: float = 1e-9) -> BlochState:
    """Invert density_from_bloch; validates hermiticity and unit trace."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=atol):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > atol or abs(np.trace(rho).imag) > atol:
        raise ValueError(f"density matrix trace is {np.trace(rho)}, expected 1")
    x = float(np.trace(rho @ SIGMA_X).real)
    y = float(np.trace(rho @ SIGMA_Y).real)
    z = float(np.trace(rho @ SIGMA_Z).real)
    return BlochState(x, y, z)


def dissipator(L: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Lindblad dissipator D[L] rho = L rho L+ - (L+L rho + rho L+L)/2."""
    Ld = L.conj().T
    LdL = Ld @ L
    return L @ rho @ Ld - 0.5 * (LdL @ rho + rho @ LdL)


def meas_superop(A: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Measurement innovation H[A] rho = A rho + rho A - tr(A rho + rho A) rho.

    A must be Hermitian (the monitored observable).
    """
    if not np.allclose(A, A.conj().T, atol=1e-12):
        raise ValueError("measurement operator must be Hermitian")
    anti = A @ rho + rho @ A
    return anti - np.trace(anti) * rho


def _rates(t: float, table: CoefficientTable, p: ReservoirParams, mode: Mode):
    if mode is Mode.MARKOVIAN:
        return _markov_rates_cached(p)
    return table.rates_at(t)


@lru_cache(maxsize=64)
def _markov_rates_cached(p: ReservoirParams) -> tuple[float, float]:
    return markov_rates(p)


def drift(
    s,
    t: float,
    u: ControlInput,
    table: CoefficientTable,
    p: ReservoirParams,
    mode: Mode = Mode.NONMARKOVIAN,
) -> np.ndarray:
    """Deterministic Bloch velocity (dx/dt, dy/dt, dz/dt).

    Rates are interpolated linearly from the table (nonmarkovian) or taken
    as the long-time constants (markovian).  ``s`` may be a BlochState or a
    length-3 array.
    """
    x, y, z = (s.x, s.y, s.z) if isinstance(s, BlochState) else map(float, s)
    dlt, gam = _rates(t, table, p, mode)
    w0, M = p.omega0, p.M
    fx = -dlt * x - 0.5 * M * x - w0 * y + u.uy * z
    fy = w0 * x - dlt * y - 0.5 * M * y - u.ux * z
    fz = -u.uy * x + u.ux * y - 2.0 * dlt * z - 2.0 * gam
    return np.array([fx, fy, fz])


def diffusion(s, p: ReservoirParams) -> np.ndarray:
    """Measurement noise vector sqrt(M eta) (xz, yz, z^2 - 1)."""
    x, y, z = (s.x, s.y, s.z) if isinstance(s, BlochState) else map(float, s)
    c = math.sqrt(p.M * p.eta)
    return np.array([c * x * z, c * y * z, c * (z * z - 1.0)])


def matrix_drift_oracle(
    rho: np.ndarray,
    t: float,
    u: ControlInput,
    table: CoefficientTable,
    p: ReservoirParams,
    mode: Mode = Mode.NONMARKOVIAN,
) -> np.ndarray:
    """Deterministic generator assembled in density-matrix form.

    -(i/2) omega0 [sz, rho] - (i/2) ux [sx, rho] - (i/2) uy [sy, rho]
    + Gamma1 D[sigma-] rho + Gamma2 D[sigma+] rho + M D[-sz/2] rho

    The Bloch image of the result must match ``drift``; the two routes share
    no code beyond the rate lookup.
    """
    dlt, gam = _rates(t, table, p, mode)
    g1 = dlt + gam
    g2 = dlt - gam
    out = -0.5j * p.omega0 * (SIGMA_Z @ rho - rho @ SIGMA_Z)
    out = out - 0.5j * u.ux * (SIGMA_X @ rho - rho @ SIGMA_X)
    out = out - 0.5j * u.uy * (SIGMA_Y @ rho - rho @ SIGMA_Y)
    out = out + g1 * dissipator(SIGMA_MINUS, rho)
    out = out + g2 * dissipator(SIGMA_PLUS, rho)
    out = out + p.M * dissipator(-0.5 * SIGMA_Z, rho)
    return out


def target_state(t: float, s0: BlochState, omega0: float) -> BlochState:
    """Freely precessing reference state (the control target).

    Rotates the initial transverse components at omega0 about z and keeps
    z fixed; an isometry of the Bloch vector.
    """
    c, sn = math.cos(omega0 * t), math.sin(omega0 * t)
    return BlochState(
        s0.x * c - s0.y * sn,
        s0.x * sn + s0.y * c,
        s0.z,
    )


def coherence_factor(s, s0) -> float:
    """Transverse magnitude of ``s`` relative to the initial state ``s0``.

    Equals 1 while coherence is fully preserved and 0 once the off-diagonal
    part of the density matrix is gone.  Undefined (raises) when the
    reference state has no transverse component.
    """
    x, y, _ = (s.x, s.y, s.z) if isinstance(s, BlochState) else map(float, s)
    x0, y0, _ = (s0.x, s0.y, s0.z) if isinstance(s0, BlochState) else map(float, s0)
    q0 = x0 * x0 + y0 * y0
    if q0 <= 0.0:
        raise ValueError(
            "coherence factor needs a reference state with transverse part"
        )
    return math.sqrt(x * x + y * y) / math.sqrt(q0)


def populations(s) -> tuple[float, float]:
    """Level populations (p00, p11) = ((1+z)/2, (1-z)/2)."""
    z = s.z if isinstance(s, BlochState) else float(s[2])
    return (1.0 + z) / 2.0, (1.0 - z) / 2.0

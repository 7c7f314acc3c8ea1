"""Reservoir spectral density, memory kernels and time-dependent decay rates.

A single qubit (transition frequency ``omega0``) is damped by a bosonic bath
with an Ohmic spectral density under a Lorentz-Drude cutoff,

    J(w) = (2 gamma0 / pi) * w * wc^2 / (wc^2 + w^2).

To second order in the system-reservoir coupling ``alpha`` the time-local
master equation carries a diffusion rate ``Delta(t)`` and a damping rate
``gamma(t)`` built from the noise and dissipation kernels of the bath:

    k(tau)   = 2 * int_0^inf J(w) coth(w / 2 kBT) cos(w tau) dw
    mu(tau)  = 2 * int_0^inf J(w) sin(w tau) dw  =  2 gamma0 wc^2 exp(-wc tau)

    Delta(t) = alpha^2 * int_0^t k(tau) cos(omega0 tau) dtau
    gamma(t) = alpha^2 * int_0^t mu(tau) sin(omega0 tau) dtau

``gamma(t)`` has a closed form; ``Delta(t)`` is evaluated by swapping the
integration order, which turns the double integral into a single frequency
quadrature of

    J(w) coth(w / 2 kBT) * [ sin((w - omega0) t)/(w - omega0)
                           + sin((w + omega0) t)/(w + omega0) ]

with a removable singularity at ``w = omega0`` (the first factor tends to
``t`` there).  ``Delta(t)`` dipping below zero is the memory signature of
the structured bath: it temporarily reverses the transverse decay.

Combined rates for the two thermal decay channels:

    Gamma1(t) = Delta(t) + gamma(t)      (sigma- channel)
    Gamma2(t) = Delta(t) - gamma(t)      (sigma+ channel)
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad

__all__ = [
    "ReservoirParams",
    "QuadratureConfig",
    "CoefficientTable",
    "ResourceLimitError",
    "spectral_density",
    "dissipation_kernel",
    "noise_kernel",
    "diffusion_coefficient",
    "damping_coefficient",
    "markov_rates",
    "build_coefficient_table",
]

# Soft cap on table length; larger requests raise ResourceLimitError.
MAX_TABLE_POINTS = 20_000_000


class ResourceLimitError(RuntimeError):
    """Requested grid exceeds the configured memory budget."""

    def __init__(self, requested: int, available: int):
        self.requested = requested
        self.available = available
        super().__init__(
            f"coefficient table needs {requested} points, "
            f"budget allows {available}"
        )


@dataclass(frozen=True)
class ReservoirParams:
    """Physical constants of the qubit, its reservoir and the monitor.

    Parameters
    ----------
    omega0 : float
        Qubit transition frequency; also the unit of time (omega0 = 1).
    gamma0 : float
        Dimensionless damping constant in front of the spectral density.
    omega_c : float
        Reservoir cutoff frequency.  The ratio r = omega_c / omega0 controls
        how structured the bath looks from the qubit's point of view.
    kBT : float
        Temperature in energy units (hbar = 1).  kBT = 0 selects the
        zero-temperature branch (coth -> 1) of the noise kernel.
    alpha_sq : float
        Squared system-reservoir coupling; scales both decay rates.
    M : float
        Strength of the continuous sigma_z measurement.
    eta : float
        Detection efficiency in [0, 1].
    """

    omega0: float = 1.0
    gamma0: float = 1.0
    omega_c: float = 0.5
    kBT: float = 10.0
    alpha_sq: float = 0.01
    M: float = 0.05
    eta: float = 1.0

    def __post_init__(self):
        if not (self.omega0 > 0):
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if not (self.gamma0 > 0):
            raise ValueError(f"gamma0 must be positive, got {self.gamma0}")
        if not (self.omega_c > 0):
            raise ValueError(f"omega_c must be positive, got {self.omega_c}")
        if not (self.kBT >= 0):
            raise ValueError(f"kBT must be nonnegative, got {self.kBT}")
        if not (self.alpha_sq >= 0):
            raise ValueError(f"alpha_sq must be nonnegative, got {self.alpha_sq}")
        if not (self.M >= 0):
            raise ValueError(f"M must be nonnegative, got {self.M}")
        if not (0.0 <= self.eta <= 1.0):
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        if not math.isfinite(self.omega_c / self.omega0):
            raise ValueError("cutoff ratio omega_c/omega0 is not finite")

    @property
    def ratio(self) -> float:
        """Cutoff ratio r = omega_c / omega0."""
        return self.omega_c / self.omega0

    @classmethod
    def from_ratio(cls, r: float, **kwargs) -> "ReservoirParams":
        """Build parameters from the cutoff ratio instead of omega_c."""
        omega0 = kwargs.pop("omega0", 1.0)
        return cls(omega0=omega0, omega_c=r * omega0, **kwargs)


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances for the frequency quadrature behind Delta(t).

    ``abs_tol`` is the target absolute tolerance of the adaptive panel
    refinement on [0, Omega_max]; the tail beyond Omega_max is bounded
    analytically and reported, not refined.
    """

    abs_tol: float = 1e-10
    max_refinements: int = 12
    panel_order: int = 10

    def __post_init__(self):
        if not (self.abs_tol > 0):
            raise ValueError("abs_tol must be positive")
        if self.max_refinements < 1 or self.panel_order < 2:
            raise ValueError("degenerate quadrature configuration")


def spectral_density(omega, p: ReservoirParams):
    """Ohmic spectral density with a Lorentz-Drude cutoff.

    J(w) = (2 gamma0/pi) w wc^2 / (wc^2 + w^2).  Accepts scalars or arrays;
    negative frequencies are a domain error.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("spectral density is defined for omega >= 0")
    wc2 = p.omega_c * p.omega_c
    out = (2.0 * p.gamma0 / math.pi) * w * wc2 / (wc2 + w * w)
    return float(out) if np.isscalar(omega) else out


def dissipation_kernel(tau, p: ReservoirParams):
    """Dissipation kernel mu(tau) = 2 gamma0 wc^2 exp(-wc tau), tau > 0.

    The sine transform of J jumps at tau = 0 (it is odd), so the point
    value there is not defined; tau <= 0 raises.
    """
    t = np.asarray(tau, dtype=float)
    if np.any(t <= 0):
        raise ValueError("dissipation kernel requires tau > 0")
    out = 2.0 * p.gamma0 * p.omega_c**2 * np.exp(-p.omega_c * t)
    return float(out) if np.isscalar(tau) else out


def _w_coth(w: np.ndarray, kBT: float) -> np.ndarray:
    """w * coth(w / 2 kBT), finite at w = 0 (limit 2 kBT); kBT = 0 gives w."""
    w = np.asarray(w, dtype=float)
    if kBT == 0.0:
        return w.copy()
    x = w / (2.0 * kBT)
    out = np.empty_like(w)
    small = x < 1e-4
    out[small] = 2.0 * kBT * (1.0 + x[small] ** 2 / 3.0)
    out[~small] = w[~small] / np.tanh(x[~small])
    return out


def _thermal_weight(w: np.ndarray, p: ReservoirParams) -> np.ndarray:
    """J(w) coth(w / 2 kBT) written without the 0 * inf ambiguity at w = 0."""
    w = np.asarray(w, dtype=float)
    wc2 = p.omega_c * p.omega_c
    return (2.0 * p.gamma0 / math.pi) * wc2 / (wc2 + w * w) * _w_coth(w, p.kBT)


def noise_kernel(tau: float, p: ReservoirParams) -> float:
    """Thermal noise kernel k(tau) by adaptive Fourier quadrature.

    k(tau) = 2 int_0^inf J(w) coth(w/2kBT) cos(w tau) dw, evaluated with
    the QUADPACK cosine-weight algorithm on the half line.  At kBT = 0 the
    coth factor is replaced by 1.

    The integrand envelope decays only like 1/w, so the kernel diverges
    logarithmically at tau = 0 for every temperature; tau <= 0 raises.
    """
    if tau <= 0:
        raise ValueError(
            "noise kernel diverges at tau = 0 (the integrand falls off "
            "like 1/omega); tau must be positive"
        )

    def f(w):
        return 2.0 * float(_thermal_weight(np.array([w]), p)[0])

    # QUADPACK's per-cycle roundoff flag fires on the thermal spike even
    # when the extrapolated result is fully converged; rely on the returned
    # error estimate instead of the warning.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, abserr = quad(
            f, 0.0, np.inf, weight="cos", wvar=tau,
            limlst=200, limit=300, epsabs=1e-12, epsrel=1e-9,
        )
    if abserr > max(1e-8, 1e-6 * abs(val)):
        raise RuntimeError(
            f"noise kernel quadrature did not converge at tau={tau}: "
            f"value {val}, error estimate {abserr}"
        )
    return val


def _omega_max(p: ReservoirParams) -> float:
    """Truncation frequency for the Delta(t) quadrature."""
    return max(50.0 * p.omega_c, 50.0 * p.omega0, 20.0 * p.kBT)


def _delta_tail_bound(t: np.ndarray, p: ReservoirParams) -> np.ndarray:
    """Bound on the dropped tail of the Delta integrand beyond Omega_max.

    Uses |J coth| <= C/w on the tail and either the static envelope
    min(2/(w - omega0)) or one integration by parts in the oscillation,
    whichever is tighter at each t.
    """
    om = _omega_max(p)
    w0 = p.omega0
    c_coth = 1.0 + 2.0 * p.kBT / om
    c_env = (2.0 * p.gamma0 / math.pi) * p.omega_c**2 * c_coth
    static = (2.0 * c_env / w0) * math.log(om / (om - w0))
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        byparts = (2.0 * c_env / np.maximum(t, 1e-300)) * (
            1.0 / (om * (om - w0)) + 1.0 / (om * (om + w0))
        )
    return p.alpha_sq * np.minimum(static, byparts)


def _delta_on_grid(
    ts: np.ndarray, p: ReservoirParams, qcfg: QuadratureConfig
) -> tuple[np.ndarray, np.ndarray, bool]:
    """Evaluate Delta on a time grid with shared adaptive panels.

    Returns (values, per-point error estimates, converged flag).  The error
    estimate is the last refinement change plus the analytic tail bound.
    """
    ts = np.asarray(ts, dtype=float)
    if np.any(ts < 0):
        raise ValueError("diffusion coefficient requires t >= 0")
    w0 = p.omega0
    om = _omega_max(p)
    t_max = float(np.max(ts)) if ts.size else 0.0

    vals = np.zeros_like(ts)
    errs = _delta_tail_bound(ts, p)
    errs[ts == 0.0] = 0.0
    live = ts > 0.0
    if not np.any(live):
        return vals, errs, True

    t_live = ts[live]
    xg, wg = np.polynomial.legendre.leggauss(qcfg.panel_order)

    # Panel width: resolve both the smooth thermal weight and the fastest
    # oscillation sin(w t_max); refinement halves it until converged.
    h = min(min(p.omega_c, w0) / 4.0, 4.0 / max(t_max, 1e-30))
    n_panels = max(16, int(math.ceil(om / h)))

    def level(npan: int) -> np.ndarray:
        edges = np.linspace(0.0, om, npan + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
        wts = (half[:, None] * wg[None, :]).ravel()
        fw = _thermal_weight(nodes, p) * wts
        out = np.empty_like(t_live)
        # chunk the outer product to keep the node x time matrix small
        chunk = max(1, int(4_000_000 // max(nodes.size, 1)))
        for i in range(0, t_live.size, chunk):
            tj = t_live[i : i + chunk]
            a = (nodes[:, None] - w0) * tj[None, :] / math.pi
            b = (nodes[:, None] + w0) * tj[None, :] / math.pi
            bracket = tj[None, :] * (np.sinc(a) + np.sinc(b))
            out[i : i + chunk] = fw @ bracket
        return out

    prev = level(n_panels)
    converged = False
    delta_change = np.full_like(t_live, np.inf)
    for _ in range(qcfg.max_refinements):
        n_panels *= 2
        cur = level(n_panels)
        delta_change = np.abs(cur - prev)
        prev = cur
        if float(np.max(delta_change)) < qcfg.abs_tol / max(p.alpha_sq, 1e-300):
            converged = True
            break

    vals[live] = p.alpha_sq * prev
    errs[live] = errs[live] + p.alpha_sq * delta_change
    return vals, errs, converged


def diffusion_coefficient(
    t: float, p: ReservoirParams, qcfg: QuadratureConfig = QuadratureConfig()
) -> float:
    """Diffusion rate Delta(t) = alpha^2 int_0^t k(tau) cos(omega0 tau) dtau.

    Computed as a single frequency quadrature after swapping the order of
    integration; see the module docstring.  t < 0 raises.
    """
    if t < 0:
        raise ValueError("diffusion coefficient requires t >= 0")
    vals, _, _ = _delta_on_grid(np.array([t]), p, qcfg)
    return float(vals[0])


def damping_coefficient(t, p: ReservoirParams):
    """Damping rate gamma(t), in closed form.

    gamma(t) = alpha^2 2 gamma0 wc^2
               [omega0 - e^{-wc t}(omega0 cos(omega0 t) + wc sin(omega0 t))]
               / (wc^2 + omega0^2)

    Accepts scalars or arrays; t < 0 raises.
    """
    tt = np.asarray(t, dtype=float)
    if np.any(tt < 0):
        raise ValueError("damping coefficient requires t >= 0")
    w0, wc = p.omega0, p.omega_c
    bracket = w0 - np.exp(-wc * tt) * (w0 * np.cos(w0 * tt) + wc * np.sin(w0 * tt))
    out = p.alpha_sq * 2.0 * p.gamma0 * wc * wc * bracket / (wc * wc + w0 * w0)
    return float(out) if np.isscalar(t) else out


def markov_rates(p: ReservoirParams) -> tuple[float, float]:
    """Long-time limits (Delta_inf, gamma_inf) of the decay rates.

    gamma_inf follows from the closed form of gamma(t); Delta_inf is the
    resonance value alpha^2 pi J(omega0) coth(omega0 / 2 kBT), with coth
    replaced by 1 at kBT = 0.  Always Delta_inf >= gamma_inf >= 0.
    """
    w0, wc = p.omega0, p.omega_c
    gamma_inf = p.alpha_sq * 2.0 * p.gamma0 * wc * wc * w0 / (wc * wc + w0 * w0)
    if p.kBT == 0.0:
        coth = 1.0
    else:
        coth = 1.0 / math.tanh(w0 / (2.0 * p.kBT))
    delta_inf = p.alpha_sq * math.pi * spectral_density(w0, p) * coth
    return delta_inf, gamma_inf


@dataclass(frozen=True)
class CoefficientTable:
    """Decay rates sampled on a uniform time grid.

    ``gamma1`` and ``gamma2`` are the primary columns; ``delta`` and
    ``gamma`` are reconstructed as half sum and half difference so that
    the identities Gamma1 + Gamma2 = 2 Delta and Gamma1 - Gamma2 = 2 gamma
    hold exactly in floating point.  All arrays are read-only; a table can
    be shared freely across threads.
    """

    t_grid: np.ndarray
    delta: np.ndarray
    gamma: np.ndarray
    gamma1: np.ndarray
    gamma2: np.ndarray
    dt: float
    quad_error: np.ndarray = field(repr=False, default=None)
    quad_converged: bool = True

    def __post_init__(self):
        for name in ("t_grid", "delta", "gamma", "gamma1", "gamma2", "quad_error"):
            arr = getattr(self, name)
            if arr is not None:
                arr.setflags(write=False)

    def __len__(self) -> int:
        return self.t_grid.size

    @property
    def t_max(self) -> float:
        return float(self.t_grid[-1])

    def rates_at(self, t: float) -> tuple[float, float]:
        """Linear interpolation of (Delta, gamma) at time t."""
        if t < 0.0 or t > self.t_max + 0.5 * self.dt:
            raise ValueError(f"t={t} outside table range [0, {self.t_max}]")
        pos = t / self.dt
        i = min(int(pos), len(self) - 2)
        w = pos - i
        d = self.delta[i] + w * (self.delta[i + 1] - self.delta[i])
        g = self.gamma[i] + w * (self.gamma[i + 1] - self.gamma[i])
        return float(d), float(g)


def build_coefficient_table(
    p: ReservoirParams,
    t_max: float,
    dt: float,
    qcfg: QuadratureConfig = QuadratureConfig(),
    constant_rates: tuple[float, float] | None = None,
) -> CoefficientTable:
    """Tabulate Delta, gamma, Gamma1, Gamma2 on the grid 0..t_max step dt.

    With ``constant_rates=(delta_inf, gamma_inf)`` every row is filled with
    those constants (the memoryless comparison table); otherwise Delta comes
    from the shared-panel quadrature and gamma from its closed form.
    """
    if not (t_max > 0):
        raise ValueError("t_max must be positive")
    if not (0 < dt <= t_max):
        raise ValueError("need 0 < dt <= t_max")
    n = int(round(t_max / dt))
    if n + 1 > MAX_TABLE_POINTS:
        raise ResourceLimitError(requested=n + 1, available=MAX_TABLE_POINTS)
    ts = np.arange(n + 1) * dt

    if constant_rates is not None:
        d_raw = np.full(n + 1, float(constant_rates[0]))
        g_raw = np.full(n + 1, float(constant_rates[1]))
        errs = np.zeros(n + 1)
        converged = True
    else:
        d_raw, errs, converged = _delta_on_grid(ts, p, qcfg)
        g_raw = damping_coefficient(ts, p)

    gamma1 = d_raw + g_raw
    gamma2 = d_raw - g_raw
    # exact-identity reconstruction (see class docstring)
    delta = (gamma1 + gamma2) / 2.0
    gamma = (gamma1 - gamma2) / 2.0
    return CoefficientTable(
        t_grid=ts,
        delta=delta,
        gamma=gamma,
        gamma1=gamma1,
        gamma2=gamma2,
        dt=dt,
        quad_error=errs,
        quad_converged=converged,
    )

"""Stochastic integration of the monitored Bloch equations.

Trajectories follow the Ito equations (see blochfb.bloch) under an
Euler-Maruyama step.  Noise comes from counter-based Philox streams, so the
increments of trajectory ``i`` are a pure function of
(master_seed, stream, i): ensembles are reproducible bitwise no matter how
many workers run or in which order trajectories finish.

The homodyne record accumulates as

    dY = dW + sqrt(eta M) tr(F rho) dt,   F = -sigma_z / 2,

so dY = dW - sqrt(eta M) (z/2) dt along the path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .bloch import BlochState, ControlInput, Mode, diffusion, drift
from .policies import ZERO_POLICY
from .reservoir import CoefficientTable, ReservoirParams, markov_rates

__all__ = [
    "IntegratorConfig",
    "TrajectoryRecord",
    "IntegrationError",
    "wiener_increments",
    "em_step",
    "simulate",
    "integrate_deterministic",
]

SCHEMES = ("euler_maruyama",)
CLAMP_POLICIES = ("project_to_ball", "reject_step")
RETRY_POOL = 8
# folded into the Philox key word so retry draws never collide with the
# primary increment stream
_RETRY_SALT = 0x9E3779B97F4A7C15

_MAX_SEED = 2**64
_MAX_INDEX = 2**32


class IntegrationError(RuntimeError):
    """A trajectory produced a non-finite state."""

    def __init__(self, t, state, control, trajectory_index):
        self.t = t
        self.state = state
        self.control = control
        self.trajectory_index = trajectory_index
        super().__init__(
            f"non-finite state at t={t} (trajectory {trajectory_index}): "
            f"s={state}, u={control}"
        )


@dataclass(frozen=True)
class IntegratorConfig:
    """Grid, scheme, clamping and noise-stream identity of one trajectory."""

    dt: float = 1e-3
    t_max: float = 15.0
    scheme: str = "euler_maruyama"
    clamp_policy: str = "project_to_ball"
    master_seed: int = 987654321
    trajectory_index: int = 0

    def __post_init__(self):
        if not (0 < self.dt <= self.t_max):
            raise ValueError("need 0 < dt <= t_max")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; one of {SCHEMES}")
        if self.clamp_policy not in CLAMP_POLICIES:
            raise ValueError(
                f"unknown clamp policy {self.clamp_policy!r}; one of {CLAMP_POLICIES}"
            )
        if not (0 <= self.master_seed < _MAX_SEED):
            raise ValueError("master_seed must fit in 64 bits")
        if not (0 <= self.trajectory_index < _MAX_INDEX):
            raise ValueError("trajectory_index must fit in 32 bits")

    @property
    def n_steps(self) -> int:
        n = int(round(self.t_max / self.dt))
        return max(n, 1)


@dataclass
class TrajectoryRecord:
    """One integrated path and everything needed to audit it.

    All sequences share length n_steps + 1.  ``noise[j]`` is the Wiener
    increment applied on the step arriving at ``times[j]`` (noise[0] = 0);
    after reject-resampling it is the increment actually used.  ``record``
    is the cumulative homodyne signal Y with Y(0) = 0.
    """

    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    noise: np.ndarray
    record: np.ndarray
    lambda_t: np.ndarray
    clamp_count: int
    master_seed: int
    trajectory_index: int
    stream: int = 0


def _philox(key0: int, key1: int) -> np.random.Generator:
    key = np.array([key0 % _MAX_SEED, key1 % _MAX_SEED], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def wiener_increments(
    n: int, dt: float, master_seed: int, trajectory_index: int, stream: int = 0
) -> np.ndarray:
    """n Gaussian increments of variance dt from a counter-based substream.

    The stream is a pure function of (master_seed, stream, trajectory_index);
    distinct trajectory indices and distinct stream ids never share draws.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if dt <= 0:
        raise ValueError("dt must be positive")
    if not (0 <= trajectory_index < _MAX_INDEX):
        raise ValueError("trajectory_index must fit in 32 bits")
    if not (0 <= stream < _MAX_INDEX):
        raise ValueError("stream must fit in 32 bits")
    g = _philox(master_seed, (stream << 32) | trajectory_index)
    return g.standard_normal(n) * math.sqrt(dt)


def _retry_pool(
    n: int, dt: float, master_seed: int, trajectory_index: int, stream: int
) -> np.ndarray:
    """Replacement increments for the reject-step clamp policy."""
    g = _philox(master_seed ^ _RETRY_SALT, (stream << 32) | trajectory_index)
    return g.standard_normal((n, RETRY_POOL)) * math.sqrt(dt)


def _rate_tables(
    table: CoefficientTable, p: ReservoirParams, mode: Mode, horizon: float
):
    """Arrays the path loop interpolates rates from."""
    if mode is Mode.MARKOVIAN:
        d_inf, g_inf = markov_rates(p)
        tab_dt = max(horizon, 1.0)
        return (
            np.array([d_inf, d_inf]),
            np.array([g_inf, g_inf]),
            tab_dt,
        )
    if horizon > table.t_max + 0.5 * table.dt:
        raise ValueError(
            f"horizon {horizon} exceeds the coefficient table range "
            f"[0, {table.t_max}]"
        )
    return table.delta, table.gamma, table.dt


def em_step(
    s: BlochState,
    t: float,
    u,
    dW: float,
    dt: float,
    table: CoefficientTable,
    p: ReservoirParams,
    mode: Mode = Mode.NONMARKOVIAN,
    clamp_policy: str = "project_to_ball",
    retry=(),
) -> BlochState:
    """One Euler-Maruyama step s -> s + f dt + g dW with clamping.

    ``retry`` supplies replacement increments for the reject policy (the
    path integrator draws them from a salted substream); with an empty pool
    an overshoot falls back to projection.
    """
    if not isinstance(u, ControlInput):
        u = ControlInput(float(u[0]), float(u[1]))
    f = drift(s, t, u, table, p, mode)
    g = diffusion(s, p)
    candidates = [dW] + (list(retry) if clamp_policy == "reject_step" else [])
    nxt = None
    for w in candidates:
        trial = s.as_array() + f * dt + g * w
        if float(trial @ trial) <= 1.0:
            nxt = trial
            break
    if nxt is None:
        trial = s.as_array() + f * dt + g * candidates[-1]
        nxt = trial / math.sqrt(float(trial @ trial))
    if not np.all(np.isfinite(nxt)):
        raise IntegrationError(t, s.as_array(), (u.ux, u.uy), None)
    return BlochState.from_array(nxt)


def simulate(
    p: ReservoirParams,
    table: CoefficientTable,
    cfg: IntegratorConfig,
    policy=ZERO_POLICY,
    mode: Mode = Mode.NONMARKOVIAN,
    s0: BlochState = None,
    stream: int = 0,
) -> TrajectoryRecord:
    """Integrate one stochastic trajectory over [0, t_max].

    The policy is either open loop (a control table in t) or state feedback
    (a costate table turned into u(t, s)); see blochfb.policies.  Raises
    IntegrationError if the state becomes non-finite; clamp events are
    counted on the record, never silent.
    """
    if s0 is None:
        raise ValueError("simulate needs an initial BlochState s0")
    n = cfg.n_steps
    tab_delta, tab_gamma, tab_dt = _rate_tables(table, p, mode, n * cfg.dt)

    dW = wiener_increments(n, cfg.dt, cfg.master_seed, cfg.trajectory_index, stream)
    if cfg.clamp_policy == "reject_step":
        retry = _retry_pool(n, cfg.dt, cfg.master_seed, cfg.trajectory_index, stream)
        clamp_mode = 1
    else:
        retry = np.zeros((0, 0))
        clamp_mode = 0

    pol_a, pol_b, pol_c = policy.tables()
    states = np.empty((n + 1, 3))
    controls = np.empty((n + 1, 2))
    clamp_count, fail = backend.integrate_path(
        s0.x, s0.y, s0.z,
        cfg.dt, n,
        dW, retry,
        np.ascontiguousarray(tab_delta), np.ascontiguousarray(tab_gamma), tab_dt,
        p.omega0, p.M, p.eta,
        clamp_mode,
        policy.kind, policy.dt, pol_a, pol_b, pol_c,
        states, controls,
    )
    if fail >= 0:
        raise IntegrationError(
            fail * cfg.dt, states[fail], controls[fail], cfg.trajectory_index
        )

    times = np.arange(n + 1) * cfg.dt
    noise = np.concatenate(([0.0], dW))
    dY = dW + math.sqrt(p.eta * p.M) * (-states[:-1, 2] / 2.0) * cfg.dt
    record = np.concatenate(([0.0], np.cumsum(dY)))
    q0 = s0.x * s0.x + s0.y * s0.y
    if q0 > 0.0:
        lam = np.sqrt(states[:, 0] ** 2 + states[:, 1] ** 2) / math.sqrt(q0)
    else:
        # coherence factor undefined for a populations-only initial state
        lam = np.full(n + 1, np.nan)
    return TrajectoryRecord(
        times=times,
        states=states,
        controls=controls,
        noise=noise,
        record=record,
        lambda_t=lam,
        clamp_count=int(clamp_count),
        master_seed=cfg.master_seed,
        trajectory_index=cfg.trajectory_index,
        stream=stream,
    )


def integrate_deterministic(
    s0: BlochState,
    dt: float,
    n_steps: int,
    table: CoefficientTable,
    p: ReservoirParams,
    mode: Mode = Mode.NONMARKOVIAN,
    policy=ZERO_POLICY,
) -> np.ndarray:
    """Classical RK4 integration of the drift (no measurement noise).

    Returns the (n_steps+1, 3) state path.  Used for the control-free rate
    comparisons and as a reference for zero-noise stochastic runs.
    """
    horizon = n_steps * dt
    tab_delta, tab_gamma, tab_dt = _rate_tables(table, p, mode, horizon)
    m = tab_delta.shape[0]
    t_nodes = np.arange(m) * tab_dt

    def rates(t):
        d = np.interp(t, t_nodes, tab_delta)
        g = np.interp(t, t_nodes, tab_gamma)
        return d, g

    w0, M = p.omega0, p.M

    def f(t, s):
        d, g = rates(t)
        ux, uy = policy.control(t, s)
        x, y, z = s
        return np.array(
            [
                -d * x - 0.5 * M * x - w0 * y + uy * z,
                w0 * x - d * y - 0.5 * M * y - ux * z,
                -uy * x + ux * y - 2.0 * d * z - 2.0 * g,
            ]
        )

    out = np.empty((n_steps + 1, 3))
    out[0] = s0.as_array()
    s = out[0].copy()
    for k in range(n_steps):
        t = k * dt
        k1 = f(t, s)
        k2 = f(t + 0.5 * dt, s + 0.5 * dt * k1)
        k3 = f(t + 0.5 * dt, s + 0.5 * dt * k2)
        k4 = f(t + dt, s + dt * k3)
        s = s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k + 1] = s
    return out

"""Trajectory ensembles, mode comparisons and temperature scans.

Ensemble statistics are reduced in trajectory-index order after all paths
complete, so the result is bitwise independent of the worker count.  Each
comparison branch draws from its own noise-stream namespace: trajectory i
of branch b never shares Philox counters with any other (b, i).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .bloch import BlochState, Mode, target_state
from .control import OCConfig, OCResult, feedback_policy, forward_backward_sweep
from .policies import ZERO_POLICY
from .reservoir import (
    CoefficientTable,
    QuadratureConfig,
    ReservoirParams,
    build_coefficient_table,
)
from .sde import IntegratorConfig, integrate_deterministic, simulate

__all__ = [
    "EnsembleStats",
    "CompareModesResult",
    "TemperatureScan",
    "run_ensemble",
    "compare_modes",
    "temperature_scan",
    "STREAM_DEFAULT",
    "STREAM_CONTROLLED",
    "STREAM_UNCONTROLLED",
    "STREAM_MARKOVIAN",
]

# noise-stream namespaces of the comparison branches
STREAM_DEFAULT = 0
STREAM_CONTROLLED = 1
STREAM_UNCONTROLLED = 2
STREAM_MARKOVIAN = 3


@dataclass(frozen=True)
class EnsembleStats:
    """Across-trajectory means and variances on the shared time grid."""

    times: np.ndarray
    mean_lambda: np.ndarray
    var_lambda: np.ndarray
    mean_x: np.ndarray
    var_x: np.ndarray
    mean_y: np.ndarray
    var_y: np.ndarray
    mean_z: np.ndarray
    var_z: np.ndarray
    trajectory_count: int
    master_seed: int
    stream: int
    clamp_rate: float


def run_ensemble(
    p: ReservoirParams,
    table: CoefficientTable,
    cfg: IntegratorConfig,
    policy=ZERO_POLICY,
    N: int = 1,
    mode: Mode = Mode.NONMARKOVIAN,
    s0: BlochState = None,
    stream: int = STREAM_DEFAULT,
    workers: int = 1,
) -> EnsembleStats:
    """Monte Carlo ensemble of N trajectories with substreams 0..N-1.

    Trajectories may run on several threads (the compiled path loop drops
    the GIL); statistics are accumulated in index order regardless, so two
    runs with the same configuration agree bitwise.  A failed trajectory
    aborts the whole ensemble with its index and step context.
    """
    if N < 1:
        raise ValueError("ensemble needs N >= 1")
    if s0 is None:
        raise ValueError("run_ensemble needs an initial BlochState s0")

    def one(idx: int):
        rec = simulate(
            p, table, replace(cfg, trajectory_index=idx), policy, mode, s0, stream
        )
        return rec.lambda_t, rec.states, rec.clamp_count

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = pool.map(one, range(N))
            acc = _reduce(results, cfg, N)
    else:
        acc = _reduce(map(one, range(N)), cfg, N)

    sums, sq, clamps, n_steps, times = acc
    means = [s / N for s in sums]
    variances = [np.maximum(q / N - m * m, 0.0) for q, m in zip(sq, means)]
    return EnsembleStats(
        times=times,
        mean_lambda=means[0],
        var_lambda=variances[0],
        mean_x=means[1],
        var_x=variances[1],
        mean_y=means[2],
        var_y=variances[2],
        mean_z=means[3],
        var_z=variances[3],
        trajectory_count=N,
        master_seed=cfg.master_seed,
        stream=stream,
        clamp_rate=clamps / (N * n_steps),
    )


def _reduce(results, cfg: IntegratorConfig, N: int):
    sums = sq = None
    clamps = 0
    times = None
    for lam, states, clamp_count in results:
        if sums is None:
            sums = [np.zeros_like(lam) for _ in range(4)]
            sq = [np.zeros_like(lam) for _ in range(4)]
            times = np.arange(lam.size) * cfg.dt
        series = (lam, states[:, 0], states[:, 1], states[:, 2])
        for j, a in enumerate(series):
            sums[j] += a
            sq[j] += a * a
        clamps += clamp_count
    return sums, sq, clamps, times.size - 1, times


@dataclass(frozen=True)
class CompareModesResult:
    """Labeled branch statistics plus the control solution behind branch (a)."""

    controlled: EnsembleStats
    uncontrolled_nonmarkovian: EnsembleStats
    uncontrolled_markovian: EnsembleStats
    target: EnsembleStats
    oc_result: OCResult

    def branches(self) -> dict[str, EnsembleStats]:
        return {
            "controlled": self.controlled,
            "uncontrolled_nonmarkovian": self.uncontrolled_nonmarkovian,
            "uncontrolled_markovian": self.uncontrolled_markovian,
            "target": self.target,
        }


def compare_modes(
    p: ReservoirParams,
    oc: OCConfig,
    cfg: IntegratorConfig,
    N: int,
    s0: BlochState,
    table: CoefficientTable | None = None,
    table_dt: float = 0.01,
    qcfg: QuadratureConfig = QuadratureConfig(),
    workers: int = 1,
) -> CompareModesResult:
    """The four comparison curves behind the controlled-vs-free figures.

    (a) feedback control on the memory-kernel model, (b) no control on the
    same model, (c) no control with constant asymptotic rates, (d) the
    freely precessing target (coherence identically 1).  Branches use
    disjoint noise namespaces of the shared master seed.
    """
    horizon = max(cfg.t_max, oc.t_max)
    if table is None:
        table = build_coefficient_table(p, horizon, table_dt, qcfg)
    res = forward_backward_sweep(p, table, s0, oc, Mode.NONMARKOVIAN)
    policy = feedback_policy(res)

    controlled = run_ensemble(
        p, table, cfg, policy, N, Mode.NONMARKOVIAN, s0, STREAM_CONTROLLED, workers
    )
    free_nm = run_ensemble(
        p, table, cfg, ZERO_POLICY, N, Mode.NONMARKOVIAN, s0, STREAM_UNCONTROLLED,
        workers,
    )
    free_mk = run_ensemble(
        p, table, cfg, ZERO_POLICY, N, Mode.MARKOVIAN, s0, STREAM_MARKOVIAN, workers
    )

    times = controlled.times
    tgt = np.array([target_state(t, s0, p.omega0).as_array() for t in times])
    zeros = np.zeros_like(times)
    target = EnsembleStats(
        times=times,
        mean_lambda=np.ones_like(times),
        var_lambda=zeros,
        mean_x=tgt[:, 0],
        var_x=zeros,
        mean_y=tgt[:, 1],
        var_y=zeros,
        mean_z=tgt[:, 2],
        var_z=zeros,
        trajectory_count=1,
        master_seed=cfg.master_seed,
        stream=STREAM_DEFAULT,
        clamp_rate=0.0,
    )
    return CompareModesResult(
        controlled=controlled,
        uncontrolled_nonmarkovian=free_nm,
        uncontrolled_markovian=free_mk,
        target=target,
        oc_result=res,
    )


@dataclass(frozen=True)
class TemperatureScan:
    """Control-free coherence decay across temperatures, both rate models."""

    times: np.ndarray
    curves: dict  # (Mode, kBT) -> Lambda(t) array


def temperature_scan(
    p: ReservoirParams,
    kbt_values,
    cfg: IntegratorConfig,
    table_dt: float = 0.01,
    qcfg: QuadratureConfig = QuadratureConfig(),
    s0: BlochState = BlochState(math.sqrt(2) / 4, math.sqrt(2) / 4, math.sqrt(3) / 2),
) -> TemperatureScan:
    """Deterministic coherence curves Lambda(t) per (rate model, kBT).

    Integrates the control-free master equation (no measurement: M = 0,
    u = 0) with classical RK4 for every requested temperature, in both the
    time-dependent and the constant-rate model.
    """
    kbt_values = list(kbt_values)
    if not kbt_values:
        raise ValueError("temperature scan needs at least one kBT value")
    n = cfg.n_steps
    times = np.arange(n + 1) * cfg.dt
    q0 = math.sqrt(s0.x**2 + s0.y**2)
    curves = {}
    for kbt in kbt_values:
        p_t = replace(p, kBT=float(kbt), M=0.0)
        table = build_coefficient_table(p_t, n * cfg.dt, table_dt, qcfg)
        for mode in (Mode.NONMARKOVIAN, Mode.MARKOVIAN):
            path = integrate_deterministic(s0, cfg.dt, n, table, p_t, mode)
            lam = np.sqrt(path[:, 0] ** 2 + path[:, 1] ** 2) / q0
            curves[(mode, float(kbt))] = lam
    return TemperatureScan(times=times, curves=curves)

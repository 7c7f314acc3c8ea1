"""CSV and JSON artifact writers.

Every CSV starts with '#' comment lines carrying the master seed and the
parameters needed to audit the file.  Nothing time- or host-dependent is
written, so re-running a command with the same configuration reproduces
each file byte for byte.  Floats are rendered with repr (shortest
round-trip form).
"""

from __future__ import annotations

import json
import os

import numpy as np

from .control import OCResult
from .ensemble import EnsembleStats
from .reservoir import CoefficientTable, ReservoirParams
from .sde import TrajectoryRecord

__all__ = [
    "write_coefficients",
    "write_trajectory",
    "write_control",
    "write_ensemble",
    "write_lambda_curve",
]


def _fmt(v) -> str:
    return repr(float(v))


def _reservoir_comment(p: ReservoirParams) -> str:
    return (
        f"# reservoir: omega0={_fmt(p.omega0)} gamma0={_fmt(p.gamma0)} "
        f"r={_fmt(p.ratio)} kBT={_fmt(p.kBT)} alpha_sq={_fmt(p.alpha_sq)} "
        f"M={_fmt(p.M)} eta={_fmt(p.eta)}"
    )


def _write_rows(fh, header: str, columns) -> None:
    fh.write(header + "\n")
    cols = [np.asarray(c) for c in columns]
    for row in zip(*cols):
        fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_coefficients(
    path: str, table: CoefficientTable, p: ReservoirParams, seed: int
) -> None:
    with open(path, "w") as fh:
        fh.write("# blochfb coefficient table\n")
        fh.write(f"# seed={seed}\n")
        fh.write(_reservoir_comment(p) + "\n")
        fh.write(
            f"# quad_converged={table.quad_converged} "
            f"quad_error_max={_fmt(np.max(table.quad_error))}\n"
        )
        _write_rows(
            fh,
            "t,Delta,gamma,Gamma1,Gamma2",
            (table.t_grid, table.delta, table.gamma, table.gamma1, table.gamma2),
        )


def write_trajectory(path: str, rec: TrajectoryRecord, p: ReservoirParams) -> None:
    with open(path, "w") as fh:
        fh.write("# blochfb trajectory\n")
        fh.write(
            f"# seed={rec.master_seed} trajectory_index={rec.trajectory_index} "
            f"stream={rec.stream} clamp_count={rec.clamp_count}\n"
        )
        fh.write(_reservoir_comment(p) + "\n")
        _write_rows(
            fh,
            "t,x,y,z,ux,uy,dW,Y,Lambda",
            (
                rec.times,
                rec.states[:, 0],
                rec.states[:, 1],
                rec.states[:, 2],
                rec.controls[:, 0],
                rec.controls[:, 1],
                rec.noise,
                rec.record,
                rec.lambda_t,
            ),
        )


def write_control(path: str, res: OCResult, p: ReservoirParams, seed: int) -> None:
    with open(path, "w") as fh:
        fh.write("# blochfb optimal control\n")
        fh.write(f"# seed={seed}\n")
        fh.write(_reservoir_comment(p) + "\n")
        fh.write(
            f"# cost={_fmt(res.cost)} iterations={res.iterations} "
            f"converged={res.converged}\n"
        )
        _write_rows(
            fh,
            "t,ux,uy,l1,l2,l3,x,y,z",
            (
                res.control.times,
                res.control.ux,
                res.control.uy,
                res.costate.lam[:, 0],
                res.costate.lam[:, 1],
                res.costate.lam[:, 2],
                res.state_path[:, 0],
                res.state_path[:, 1],
                res.state_path[:, 2],
            ),
        )


def write_ensemble(
    path: str,
    stats: EnsembleStats,
    p: ReservoirParams,
    config_echo: str,
    solver_warning: int | None = None,
) -> None:
    """Ensemble CSV plus a .json sidecar with the full configuration."""
    with open(path, "w") as fh:
        fh.write("# blochfb ensemble statistics\n")
        fh.write(
            f"# seed={stats.master_seed} stream={stats.stream} "
            f"N={stats.trajectory_count} clamp_rate={_fmt(stats.clamp_rate)}\n"
        )
        fh.write(_reservoir_comment(p) + "\n")
        header = "t,mean_Lambda,var_Lambda,mean_x,mean_y,mean_z"
        columns = [
            stats.times,
            stats.mean_lambda,
            stats.var_lambda,
            stats.mean_x,
            stats.mean_y,
            stats.mean_z,
        ]
        if solver_warning is not None:
            header += ",solver_warning"
            columns.append(np.full(stats.times.size, float(solver_warning)))
        _write_rows(fh, header, columns)

    sidecar = {
        "seed": stats.master_seed,
        "stream": stats.stream,
        "trajectories": stats.trajectory_count,
        "clamp_rate": stats.clamp_rate,
        "config": config_echo,
    }
    base, _ = os.path.splitext(path)
    with open(base + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_lambda_curve(
    path: str, times, lam, p: ReservoirParams, seed: int, label: str
) -> None:
    """Single deterministic coherence curve (temperature-scan output)."""
    with open(path, "w") as fh:
        fh.write(f"# blochfb coherence curve: {label}\n")
        fh.write(f"# seed={seed}\n")
        fh.write(_reservoir_comment(p) + "\n")
        _write_rows(fh, "t,Lambda", (times, lam))

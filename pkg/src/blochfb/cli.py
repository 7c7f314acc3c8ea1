"""Command-line front end.

    blochfb <command> [--config FILE] [--preset NAME] [--seed U64]
                      [--out DIR] [--trajectories N] [--mode MODE]

Commands
--------
coeffs     tabulate the decay rates, write coefficients.csv
control    solve the optimality system, write control.csv
simulate   integrate one stochastic trajectory, write trajectory.csv
ensemble   Monte Carlo ensemble statistics, write ensemble.csv (+ .json)
fig1       control-free temperature scan, one CSV per (rate model, kBT)
fig2       controlled / uncontrolled / constant-rate comparison, four CSVs

Exit codes: 0 success, 2 invalid configuration, 3 control solver did not
converge (outputs are still written), 4 output I/O failure.

Each command echoes the fully resolved configuration to stdout before it
starts computing; the echo alone reproduces the run.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .bloch import Mode
from .config import ConfigError, RunConfig, echo_config, parse_config
from .control import forward_backward_sweep
from .ensemble import compare_modes, run_ensemble, temperature_scan
from .output import (
    write_coefficients,
    write_control,
    write_ensemble,
    write_lambda_curve,
    write_trajectory,
)
from .policies import ZERO_POLICY
from .reservoir import build_coefficient_table, markov_rates
from .sde import simulate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_CONVERGENCE = 3
EXIT_IO = 4

COMMANDS = ("coeffs", "control", "simulate", "ensemble", "fig1", "fig2")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="blochfb",
        description="monitored-qubit reservoir dynamics and feedback control",
    )
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="path to an INI configuration file")
    ap.add_argument("--preset", help="parameter preset (fig1, fig2a..fig2d, none)")
    ap.add_argument("--seed", type=int, help="64-bit master seed")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--trajectories", type=int, help="ensemble size")
    ap.add_argument(
        "--mode", choices=[m.value for m in Mode], help="rate model"
    )
    return ap


def _load_config(args) -> RunConfig:
    text = ""
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
    overrides = {}
    if args.preset is not None:
        overrides[("run", "preset")] = args.preset
    if args.seed is not None:
        overrides[("run", "seed")] = str(args.seed)
    if args.out is not None:
        overrides[("run", "output_dir")] = args.out
    if args.trajectories is not None:
        overrides[("run", "trajectories")] = str(args.trajectories)
    if args.mode is not None:
        overrides[("run", "mode")] = args.mode
    return parse_config(text, overrides)


def _table(cfg: RunConfig, p=None):
    return build_coefficient_table(
        p or cfg.reservoir, cfg.table_t_max, cfg.table_dt, cfg.quadrature
    )


def _optimal_policy(cfg: RunConfig, table):
    from .control import feedback_policy

    res = forward_backward_sweep(
        cfg.reservoir, table, cfg.initial_state, cfg.control, cfg.mode
    )
    return feedback_policy(res), res


def cmd_coeffs(cfg: RunConfig, outdir: str) -> int:
    if cfg.mode is Mode.MARKOVIAN:
        table = build_coefficient_table(
            cfg.reservoir,
            cfg.table_t_max,
            cfg.table_dt,
            constant_rates=markov_rates(cfg.reservoir),
        )
    else:
        table = _table(cfg)
    write_coefficients(
        os.path.join(outdir, "coefficients.csv"), table, cfg.reservoir, cfg.seed
    )
    return EXIT_OK


def cmd_control(cfg: RunConfig, outdir: str) -> int:
    table = _table(cfg)
    res = forward_backward_sweep(
        cfg.reservoir, table, cfg.initial_state, cfg.control, cfg.mode
    )
    write_control(os.path.join(outdir, "control.csv"), res, cfg.reservoir, cfg.seed)
    zero_cost = res.history[0] if res.history else float("nan")
    print(
        f"control: converged={res.converged} iterations={res.iterations} "
        f"cost={res.cost!r} zero_control_cost={zero_cost!r} tol={cfg.control.tol!r}"
    )
    return EXIT_OK if res.converged else EXIT_NO_CONVERGENCE


def cmd_simulate(cfg: RunConfig, outdir: str) -> int:
    table = _table(cfg)
    status = EXIT_OK
    if cfg.policy == "optimal":
        policy, res = _optimal_policy(cfg, table)
        if not res.converged:
            status = EXIT_NO_CONVERGENCE
    else:
        policy = ZERO_POLICY
    rec = simulate(
        cfg.reservoir, table, cfg.integrator, policy, cfg.mode, cfg.initial_state
    )
    write_trajectory(os.path.join(outdir, "trajectory.csv"), rec, cfg.reservoir)
    return status


def cmd_ensemble(cfg: RunConfig, outdir: str) -> int:
    table = _table(cfg)
    status = EXIT_OK
    if cfg.policy == "optimal":
        policy, res = _optimal_policy(cfg, table)
        if not res.converged:
            status = EXIT_NO_CONVERGENCE
    else:
        policy = ZERO_POLICY
    stats = run_ensemble(
        cfg.reservoir,
        table,
        cfg.integrator,
        policy,
        cfg.trajectories,
        cfg.mode,
        cfg.initial_state,
        workers=cfg.workers,
    )
    write_ensemble(
        os.path.join(outdir, "ensemble.csv"), stats, cfg.reservoir, echo_config(cfg)
    )
    return status


def _fmt_kbt(v: float) -> str:
    return f"{v:g}".replace(".", "p")


def cmd_fig1(cfg: RunConfig, outdir: str) -> int:
    scan = temperature_scan(
        cfg.reservoir,
        cfg.fig1_kbt,
        cfg.integrator,
        table_dt=cfg.table_dt,
        qcfg=cfg.quadrature,
        s0=cfg.initial_state,
    )
    for (mode, kbt), lam in scan.curves.items():
        name = f"fig1_{mode.value}_kBT{_fmt_kbt(kbt)}.csv"
        write_lambda_curve(
            os.path.join(outdir, name),
            scan.times,
            lam,
            replace(cfg.reservoir, kBT=kbt, M=0.0),
            cfg.seed,
            f"{mode.value}, kBT={kbt:g}, control-free",
        )
    return EXIT_OK


def cmd_fig2(cfg: RunConfig, outdir: str) -> int:
    res = compare_modes(
        cfg.reservoir,
        cfg.control,
        cfg.integrator,
        cfg.trajectories,
        cfg.initial_state,
        table_dt=cfg.table_dt,
        qcfg=cfg.quadrature,
        workers=cfg.workers,
    )
    warning = 0 if res.oc_result.converged else 1
    prefix = cfg.preset if cfg.preset and cfg.preset.startswith("fig2") else "fig2"
    echo = echo_config(cfg)
    for label, stats in res.branches().items():
        write_ensemble(
            os.path.join(outdir, f"{prefix}_{label}.csv"),
            stats,
            cfg.reservoir,
            echo,
            solver_warning=warning,
        )
    print(
        f"fig2: solver converged={res.oc_result.converged} "
        f"iterations={res.oc_result.iterations} cost={res.oc_result.cost!r}"
    )
    return EXIT_OK if warning == 0 else EXIT_NO_CONVERGENCE


_DISPATCH = {
    "coeffs": cmd_coeffs,
    "control": cmd_control,
    "simulate": cmd_simulate,
    "ensemble": cmd_ensemble,
    "fig1": cmd_fig1,
    "fig2": cmd_fig2,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    print(echo_config(cfg))
    outdir = cfg.output_dir
    try:
        os.makedirs(outdir, exist_ok=True)
        return _DISPATCH[args.command](cfg, outdir)
    except OSError as exc:
        print(f"output failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

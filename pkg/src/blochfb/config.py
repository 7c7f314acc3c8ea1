"""INI-style run configuration: parsing, validation, presets and echo.

A run is described by a plain-text document with nested key-value sections
(configparser dialect).  Every key has a default; an empty document is a
complete configuration.  Unknown sections or keys are rejected.  The exact
schema, with defaults:

    [run]
    preset = none            ; none | fig1 | fig2a | fig2b | fig2c | fig2d
    mode = nonmarkovian      ; nonmarkovian | markovian
    trajectories = 500
    seed = 987654321
    output_dir = .
    workers = 1
    policy = zero            ; zero | optimal (simulate/ensemble commands)

    [reservoir]
    omega0 = 1.0
    gamma0 = 1.0
    r = 0.5                  ; cutoff ratio omega_c/omega0 (or give omega_c)
    kBT = 10.0
    alpha_sq = 0.01
    M = 0.05
    eta = 1.0

    [initial_state]
    x = 0.35355339059327373  ; sqrt(2)/4
    y = 0.35355339059327373
    z = 0.8660254037844386   ; sqrt(3)/2

    [table]
    dt = 0.01
    t_max =                  ; empty: covers the integration/control horizon
    quad_tol = 1e-10

    [integrator]
    dt = 0.001
    t_max = 15.0
    scheme = euler_maruyama
    clamp_policy = project_to_ball

    [control]
    theta = 1.0
    relaxation = 0.3
    tol = 1e-6
    max_iter = 500
    dt = 0.005
    t_max = 15.0

    [fig1]
    kbt_grid = 0, 1, 2, 5, 10

Precedence: defaults < config file < preset < command-line flags.  Presets
overwrite their parameter blocks wholesale.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass

from .bloch import BlochState, Mode
from .control import OCConfig
from .reservoir import QuadratureConfig, ReservoirParams
from .sde import IntegratorConfig

__all__ = ["ConfigError", "RunConfig", "parse_config", "echo_config", "PRESETS"]


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""


_DEFAULTS: dict[str, dict[str, str]] = {
    "run": {
        "preset": "none",
        "mode": "nonmarkovian",
        "trajectories": "500",
        "seed": "987654321",
        "output_dir": ".",
        "workers": "1",
        "policy": "zero",
    },
    "reservoir": {
        "omega0": "1.0",
        "gamma0": "1.0",
        "r": "0.5",
        "kBT": "10.0",
        "alpha_sq": "0.01",
        "M": "0.05",
        "eta": "1.0",
    },
    "initial_state": {
        "x": repr(math.sqrt(2) / 4),
        "y": repr(math.sqrt(2) / 4),
        "z": repr(math.sqrt(3) / 2),
    },
    "table": {
        "dt": "0.01",
        "t_max": "",
        "quad_tol": "1e-10",
    },
    "integrator": {
        "dt": "0.001",
        "t_max": "15.0",
        "scheme": "euler_maruyama",
        "clamp_policy": "project_to_ball",
    },
    "control": {
        "theta": "1.0",
        "relaxation": "0.3",
        "tol": "1e-6",
        "max_iter": "500",
        "dt": "0.005",
        "t_max": "15.0",
    },
    "fig1": {
        "kbt_grid": "0, 1, 2, 5, 10",
    },
}

# Figure presets: the published simulation parameter sets.
_FIG2_COMMON = {
    "reservoir": {"M": "0.05", "eta": "1.0"},
    "integrator": {"dt": "0.001", "t_max": "30.0"},
    "control": {
        "theta": "1.0",
        "relaxation": "0.3",
        "tol": "1e-6",
        "max_iter": "500",
        "dt": "0.005",
        "t_max": "15.0",
    },
    "run": {"trajectories": "500"},
}


def _fig2(r: str, kbt: str) -> dict:
    preset = {sec: dict(vals) for sec, vals in _FIG2_COMMON.items()}
    preset["reservoir"].update({"r": r, "kBT": kbt})
    return preset


PRESETS: dict[str, dict[str, dict[str, str]]] = {
    "fig1": {
        "reservoir": {"r": "0.1", "M": "0.0"},
        "integrator": {"dt": "0.01", "t_max": "20.0"},
        "fig1": {"kbt_grid": "0, 1, 2, 5, 10"},
    },
    "fig2a": _fig2("0.5", "1.0"),
    "fig2b": _fig2("3.0", "1.0"),
    "fig2c": _fig2("0.5", "10.0"),
    "fig2d": _fig2("3.0", "10.0"),
}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration of one command invocation."""

    reservoir: ReservoirParams
    integrator: IntegratorConfig
    control: OCConfig
    quadrature: QuadratureConfig
    initial_state: BlochState
    mode: Mode
    trajectories: int
    output_dir: str
    preset: str | None
    workers: int
    policy: str
    table_dt: float
    table_t_max: float
    fig1_kbt: tuple[float, ...]

    @property
    def seed(self) -> int:
        return self.integrator.master_seed


def _merge(base: dict, overlay: dict) -> None:
    for sec, vals in overlay.items():
        base.setdefault(sec, {}).update(vals)


def _parse_float(raw: dict, sec: str, key: str) -> float:
    try:
        return float(raw[sec][key])
    except ValueError as exc:
        raise ConfigError(f"[{sec}] {key}: not a number: {raw[sec][key]!r}") from exc


def _parse_int(raw: dict, sec: str, key: str) -> int:
    try:
        return int(raw[sec][key])
    except ValueError as exc:
        raise ConfigError(f"[{sec}] {key}: not an integer: {raw[sec][key]!r}") from exc


def parse_config(text: str = "", overrides: dict | None = None) -> RunConfig:
    """Parse a configuration document into a validated RunConfig.

    ``overrides`` maps (section, key) pairs to raw string values; it carries
    the command-line flags and is applied after any preset.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from exc

    raw = {sec: dict(vals) for sec, vals in _DEFAULTS.items()}
    for sec in parser.sections():
        if sec not in _DEFAULTS:
            raise ConfigError(f"unknown section [{sec}]")
        known = {k.lower(): k for k in _DEFAULTS[sec]}
        if sec == "reservoir":
            known["omega_c"] = "omega_c"  # alternative to the ratio r
        for key, val in parser.items(sec):
            if key.lower() not in known:
                raise ConfigError(f"unknown key {key!r} in section [{sec}]")
            raw[sec][known[key.lower()]] = val.strip()

    preset = raw["run"]["preset"].strip().lower()
    if overrides and ("run", "preset") in overrides:
        preset = overrides[("run", "preset")].strip().lower()
        raw["run"]["preset"] = preset
    if preset not in ("", "none"):
        if preset not in PRESETS:
            raise ConfigError(
                f"unknown preset {preset!r}; one of {sorted(PRESETS)} or none"
            )
        _merge(raw, PRESETS[preset])
    else:
        preset = None
        raw["run"]["preset"] = "none"

    if overrides:
        for (sec, key), val in overrides.items():
            raw.setdefault(sec, {})[key] = str(val)

    # reservoir: r and omega_c are aliases; explicit omega_c wins
    omega0 = _parse_float(raw, "reservoir", "omega0")
    if "omega_c" in raw["reservoir"]:
        omega_c = _parse_float(raw, "reservoir", "omega_c")
        raw["reservoir"]["r"] = repr(omega_c / omega0)
    else:
        omega_c = _parse_float(raw, "reservoir", "r") * omega0
    try:
        reservoir = ReservoirParams(
            omega0=omega0,
            gamma0=_parse_float(raw, "reservoir", "gamma0"),
            omega_c=omega_c,
            kBT=_parse_float(raw, "reservoir", "kBT"),
            alpha_sq=_parse_float(raw, "reservoir", "alpha_sq"),
            M=_parse_float(raw, "reservoir", "M"),
            eta=_parse_float(raw, "reservoir", "eta"),
        )
    except ValueError as exc:
        raise ConfigError(f"[reservoir] {exc}") from exc

    x = _parse_float(raw, "initial_state", "x")
    y = _parse_float(raw, "initial_state", "y")
    z = _parse_float(raw, "initial_state", "z")
    try:
        initial_state = BlochState(x, y, z)
    except ValueError as exc:
        raise ConfigError(f"[initial_state] {exc}") from exc

    mode_raw = raw["run"]["mode"].strip().lower()
    try:
        mode = Mode(mode_raw)
    except ValueError as exc:
        raise ConfigError(
            f"[run] mode must be nonmarkovian or markovian, got {mode_raw!r}"
        ) from exc

    policy = raw["run"]["policy"].strip().lower()
    if policy not in ("zero", "optimal"):
        raise ConfigError(f"[run] policy must be zero or optimal, got {policy!r}")

    trajectories = _parse_int(raw, "run", "trajectories")
    if trajectories < 1:
        raise ConfigError("[run] trajectories must be at least 1")
    workers = _parse_int(raw, "run", "workers")
    if workers < 1:
        raise ConfigError("[run] workers must be at least 1")
    seed = _parse_int(raw, "run", "seed")

    try:
        integrator = IntegratorConfig(
            dt=_parse_float(raw, "integrator", "dt"),
            t_max=_parse_float(raw, "integrator", "t_max"),
            scheme=raw["integrator"]["scheme"].strip(),
            clamp_policy=raw["integrator"]["clamp_policy"].strip(),
            master_seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(f"[integrator] {exc}") from exc

    try:
        control = OCConfig(
            theta=_parse_float(raw, "control", "theta"),
            relaxation=_parse_float(raw, "control", "relaxation"),
            tol=_parse_float(raw, "control", "tol"),
            max_iter=_parse_int(raw, "control", "max_iter"),
            dt=_parse_float(raw, "control", "dt"),
            t_max=_parse_float(raw, "control", "t_max"),
        )
    except ValueError as exc:
        raise ConfigError(f"[control] {exc}") from exc

    try:
        quadrature = QuadratureConfig(abs_tol=_parse_float(raw, "table", "quad_tol"))
    except ValueError as exc:
        raise ConfigError(f"[table] {exc}") from exc

    table_dt = _parse_float(raw, "table", "dt")
    if table_dt <= 0:
        raise ConfigError("[table] dt must be positive")
    t_max_raw = raw["table"]["t_max"].strip()
    if t_max_raw:
        table_t_max = float(t_max_raw)
    else:
        table_t_max = max(integrator.t_max, control.t_max)
    if table_t_max < max(integrator.t_max, control.t_max):
        raise ConfigError(
            "[table] t_max must cover the integration and control horizons"
        )

    try:
        fig1_kbt = tuple(
            float(v) for v in raw["fig1"]["kbt_grid"].split(",") if v.strip()
        )
    except ValueError as exc:
        raise ConfigError(f"[fig1] kbt_grid: {exc}") from exc
    if not fig1_kbt or any(v < 0 for v in fig1_kbt):
        raise ConfigError("[fig1] kbt_grid must be nonempty and nonnegative")

    return RunConfig(
        reservoir=reservoir,
        integrator=integrator,
        control=control,
        quadrature=quadrature,
        initial_state=initial_state,
        mode=mode,
        trajectories=trajectories,
        output_dir=raw["run"]["output_dir"].strip() or ".",
        preset=preset,
        workers=workers,
        policy=policy,
        table_dt=table_dt,
        table_t_max=table_t_max,
        fig1_kbt=fig1_kbt,
    )


def echo_config(cfg: RunConfig) -> str:
    """Render the fully resolved configuration as an INI document.

    Feeding the echo back through parse_config reproduces the run exactly.
    """
    out = io.StringIO()
    p = cfg.reservoir

    def sec(name: str, items: list[tuple[str, object]]):
        out.write(f"[{name}]\n")
        for k, v in items:
            out.write(f"{k} = {v}\n")
        out.write("\n")

    sec(
        "run",
        [
            ("preset", cfg.preset or "none"),
            ("mode", cfg.mode.value),
            ("trajectories", cfg.trajectories),
            ("seed", cfg.seed),
            ("output_dir", cfg.output_dir),
            ("workers", cfg.workers),
            ("policy", cfg.policy),
        ],
    )
    sec(
        "reservoir",
        [
            ("omega0", repr(p.omega0)),
            ("gamma0", repr(p.gamma0)),
            ("r", repr(p.ratio)),
            ("kBT", repr(p.kBT)),
            ("alpha_sq", repr(p.alpha_sq)),
            ("M", repr(p.M)),
            ("eta", repr(p.eta)),
        ],
    )
    s = cfg.initial_state
    sec("initial_state", [("x", repr(s.x)), ("y", repr(s.y)), ("z", repr(s.z))])
    sec(
        "table",
        [
            ("dt", repr(cfg.table_dt)),
            ("t_max", repr(cfg.table_t_max)),
            ("quad_tol", repr(cfg.quadrature.abs_tol)),
        ],
    )
    i = cfg.integrator
    sec(
        "integrator",
        [
            ("dt", repr(i.dt)),
            ("t_max", repr(i.t_max)),
            ("scheme", i.scheme),
            ("clamp_policy", i.clamp_policy),
        ],
    )
    c = cfg.control
    sec(
        "control",
        [
            ("theta", repr(c.theta)),
            ("relaxation", repr(c.relaxation)),
            ("tol", repr(c.tol)),
            ("max_iter", c.max_iter),
            ("dt", repr(c.dt)),
            ("t_max", repr(c.t_max)),
        ],
    )
    sec("fig1", [("kbt_grid", ", ".join(repr(v) for v in cfg.fig1_kbt))])
    return out.getvalue().rstrip("\n") + "\n"

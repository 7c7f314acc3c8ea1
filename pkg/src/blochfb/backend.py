"""Selection between the compiled and the pure-Python path loop.

The compiled extension is preferred when importable; set the environment
variable ``BLOCHFB_BACKEND`` to ``pure`` or ``compiled`` before import to
force a choice (``compiled`` raises if the extension is missing).  Both
backends produce bitwise-identical trajectories; the compiled one is two
to three orders of magnitude faster and releases the GIL.
"""

from __future__ import annotations

import os

from . import _pathloop as _pure

try:
    from . import _pathloop_c as _compiled
except ImportError:
    _compiled = None

_BACKENDS = {"pure": _pure}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled


def _initial_choice() -> str:
    env = os.environ.get("BLOCHFB_BACKEND", "auto").lower()
    if env == "auto":
        return "compiled" if _compiled is not None else "pure"
    if env not in ("pure", "compiled"):
        raise ValueError(f"BLOCHFB_BACKEND must be auto|pure|compiled, got {env!r}")
    if env == "compiled" and _compiled is None:
        raise ImportError(
            "BLOCHFB_BACKEND=compiled but the blochfb._pathloop_c extension "
            "is not built"
        )
    return env


_active = _initial_choice()


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def active_backend() -> str:
    return _active


def set_backend(name: str) -> None:
    """Switch the path-loop implementation (mainly for tests/benchmarks)."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    _active = name


def integrate_path(*args):
    return _BACKENDS[_active].integrate_path(*args)

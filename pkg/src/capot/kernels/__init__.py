"""Kernel backend selection.

The hot loop of the dual solver is available in two implementations: a
compiled Cython extension and a pure-numpy fallback with the same
contract. The compiled one is used when it importable; set
``CAPOT_KERNEL=fallback`` (or ``compiled``) to force a choice, e.g. for
benchmarking. ``CAPOT_THREADS`` caps internal parallelism; both current
backends are single-threaded, so any cap is trivially honored and results
are deterministic.
"""

from __future__ import annotations

import os

from . import fallback

_compiled = None
try:
    from . import _dualcore as _compiled  # type: ignore[attr-defined]
except ImportError:
    _compiled = None


def available_backends() -> dict:
    out = {"fallback": fallback}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out


def _select():
    choice = os.environ.get("CAPOT_KERNEL", "auto").strip().lower()
    if choice in ("", "auto"):
        return _compiled if _compiled is not None else fallback
    backends = available_backends()
    if choice not in backends:
        raise RuntimeError(
            f"CAPOT_KERNEL={choice!r} not available; choices: {sorted(backends)}"
        )
    return backends[choice]


def thread_cap() -> int:
    """Parsed CAPOT_THREADS value (0 = auto); backends are single-threaded today."""
    raw = os.environ.get("CAPOT_THREADS", "0").strip()
    try:
        cap = int(raw)
    except ValueError as exc:
        raise RuntimeError(f"CAPOT_THREADS must be an integer, got {raw!r}") from exc
    if cap < 0:
        raise RuntimeError("CAPOT_THREADS must be >= 0")
    return cap


_active = _select()

BACKEND_NAME = _active.BACKEND_NAME
eval_dual = _active.eval_dual
eval_dual_with_subgrad = _active.eval_dual_with_subgrad

"""File formats: problem JSON, plan CSV, potentials JSON.

Problem schema (JSON object):

    {
      "version": 1,
      "m": int, "n": int,
      "weights_x": [..]?,          # cell volumes, default uniform
      "weights_y": [..]?,
      "f": [..], "g": [..],        # marginal densities
      "hbar": scalar | [[..]],     # capacity, scalar means constant
      "s": [[..]] | {"builtin": "product" | "neg_sq_dist"},
      "eta": real?                 # default 2.0
    }

Matrices are row-major nested lists. Plan CSV is headerless, row-major,
one matrix row per line, 17 significant digits (lossless for float64).
Midpoints are the cumulative-weight cell centers on [0, 1].
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dual import DualPotentials
from .errors import InputError
from .grid import Axis, Kernel, Marginal, Problem, TransportPlan, builtin_surplus

__all__ = [
    "problem_to_dict",
    "problem_from_dict",
    "load_problem",
    "save_problem",
    "save_matrix_csv",
    "load_matrix_csv",
    "load_potentials",
    "save_potentials",
]

SCHEMA_VERSION = 1


def _axis_from_weights(weights) -> Axis:
    w = np.asarray(weights, dtype=float)
    mid = np.cumsum(w) - 0.5 * w
    return Axis(w, mid)


def problem_to_dict(problem: Problem) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "m": problem.m,
        "n": problem.n,
        "weights_x": problem.wx.tolist(),
        "weights_y": problem.wy.tolist(),
        "f": problem.f.tolist(),
        "g": problem.g.tolist(),
        "hbar": problem.hbar.values.tolist(),
        "s": problem.s.values.tolist(),
        "eta": problem.eta,
    }


def _field(data: dict, name: str, default=None, required=False):
    if name not in data:
        if required:
            raise InputError(f"problem JSON: missing required field {name!r}")
        return default
    return data[name]


def _vector(data, name, length) -> np.ndarray:
    raw = _field(data, name, required=True)
    try:
        vec = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"problem JSON: field {name!r} is not a numeric vector") from None
    if vec.shape != (length,):
        raise InputError(f"problem JSON: field {name!r} must have length {length}, "
                         f"got shape {vec.shape}")
    return vec


def problem_from_dict(data: dict) -> Problem:
    if not isinstance(data, dict):
        raise InputError("problem JSON: top level must be an object")
    version = _field(data, "version", default=SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise InputError(f"problem JSON: unsupported version {version!r}")
    m = _field(data, "m", required=True)
    n = _field(data, "n", required=True)
    if not (isinstance(m, int) and isinstance(n, int) and m >= 1 and n >= 1):
        raise InputError("problem JSON: fields 'm' and 'n' must be positive integers")

    wx = data.get("weights_x")
    wy = data.get("weights_y")
    x = _axis_from_weights(wx) if wx is not None else Axis.uniform(m)
    y = _axis_from_weights(wy) if wy is not None else Axis.uniform(n)
    if x.cell_count != m or y.cell_count != n:
        raise InputError("problem JSON: weight vector lengths disagree with m, n")

    f = Marginal(x, _vector(data, "f", m))
    g = Marginal(y, _vector(data, "g", n))

    hbar_raw = _field(data, "hbar", required=True)
    if isinstance(hbar_raw, (int, float)):
        hbar = Kernel(np.full((m, n), float(hbar_raw)), "capacity")
    else:
        hbar = Kernel(_matrix(hbar_raw, "hbar", m, n), "capacity")

    s_raw = _field(data, "s", required=True)
    if isinstance(s_raw, dict):
        name = s_raw.get("builtin")
        if not isinstance(name, str):
            raise InputError("problem JSON: field 's' object needs a 'builtin' name")
        s = builtin_surplus(name, x, y)
    else:
        s = Kernel(_matrix(s_raw, "s", m, n), "surplus")

    eta = _field(data, "eta", default=2.0)
    if not isinstance(eta, (int, float)):
        raise InputError("problem JSON: field 'eta' must be a number")
    return Problem(x=f, y=g, hbar=hbar, s=s, eta=float(eta))


def _matrix(raw, name, m, n) -> np.ndarray:
    try:
        mat = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"problem JSON: field {name!r} is not a numeric matrix") from None
    if mat.shape != (m, n):
        raise InputError(f"problem JSON: field {name!r} must be {m}x{n}, got {mat.shape}")
    return mat


def load_problem(path) -> Problem:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
                         f"{exc.msg}") from None
    try:
        return problem_from_dict(data)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


def save_problem(problem: Problem, path) -> None:
    Path(path).write_text(json.dumps(problem_to_dict(problem), indent=2) + "\n")


def save_matrix_csv(matrix: np.ndarray, path) -> None:
    rows = [",".join(f"{x:.17g}" for x in row) for row in np.atleast_2d(matrix)]
    Path(path).write_text("\n".join(rows) + "\n")


def load_matrix_csv(path) -> np.ndarray:
    try:
        rows = [
            [float(tok) for tok in line.split(",")]
            for line in Path(path).read_text().strip().splitlines()
        ]
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot parse CSV matrix from {path}: {exc}") from None
    return np.asarray(rows, dtype=float)


def load_plan(path) -> TransportPlan:
    return TransportPlan(load_matrix_csv(path))


def save_potentials(potentials: DualPotentials, path) -> None:
    Path(path).write_text(json.dumps(
        {"u": potentials.u.tolist(), "v": potentials.v.tolist()}, indent=2
    ) + "\n")


def load_potentials(path, problem: Problem) -> DualPotentials:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot parse potentials from {path}: {exc}") from None
    if not isinstance(data, dict) or "u" not in data or "v" not in data:
        raise InputError(f"{path}: potentials JSON needs fields 'u' and 'v'")
    u = np.asarray(data["u"], dtype=float)
    v = np.asarray(data["v"], dtype=float)
    return DualPotentials.build(u, v, problem)

"""Config loading, points files and trace serialisation."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np
import yaml

from ..manifolds import SPD, Hyperboloid
from ..manifolds.base import InvalidInput, Manifold
from ..optimizer import RegretTrace

TRACE_COLUMNS = (
    "t",
    "instant_regret",
    "cum_regret",
    "frechet_var",
    "network_err",
    "network_err_bound",
    "runtime_ns",
    "solver_worst_grad",
)
_INT_COLUMNS = {"t", "runtime_ns"}


def fmt_float(x: float) -> str:
    return "%.17g" % x


def load_config(path) -> dict:
    """Read a YAML or JSON mapping; JSON is valid YAML so one parser covers both."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InvalidInput(f"cannot read config {path}: {exc}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise InvalidInput(f"cannot parse config {path}: {exc}") from None
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise InvalidInput(f"config {path} must hold a mapping at top level")
    return raw


def manifold_from_header(name: str, dim: int) -> Manifold:
    if name in ("hyperbolic", "hyperboloid"):
        return Hyperboloid(dim)
    if name == "spd":
        return SPD(dim)
    raise InvalidInput(f"unknown manifold {name!r} in points header")


def read_points(path) -> tuple[Manifold, np.ndarray]:
    """Parse a points file.

    The first non-blank line reads ``manifold <hyperbolic|spd> <dim>`` (a
    leading ``#`` is allowed). Each following line holds one point's ambient
    coordinates: ``dim + 1`` numbers for hyperbolic points, ``dim * dim``
    row-major entries for SPD matrices.
    """
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise InvalidInput(f"{path} is empty")
    header = lines[0].lstrip("#").split()
    if len(header) != 3 or header[0] != "manifold":
        raise InvalidInput("points file must start with 'manifold <name> <dim>'")
    try:
        M = manifold_from_header(header[1], int(header[2]))
    except ValueError:
        raise InvalidInput(f"bad dimension in header: {header[2]!r}") from None
    width = int(np.prod(M.point_shape))
    rows = []
    for lineno, ln in enumerate(lines[1:], start=2):
        if ln.startswith("#"):
            continue
        try:
            vals = [float(tok) for tok in ln.split()]
        except ValueError:
            raise InvalidInput(f"line {lineno}: non-numeric coordinate") from None
        if len(vals) != width:
            raise InvalidInput(f"line {lineno}: expected {width} coordinates, got {len(vals)}")
        rows.append(vals)
    if not rows:
        raise InvalidInput(f"{path} holds no points")
    points = M.unflatten(np.array(rows))
    M.check_point(points, tol=1e-6)
    return M, points


def read_weights(path, count: int) -> np.ndarray:
    w = np.loadtxt(path, dtype=float, ndmin=1).ravel()
    if w.shape != (count,):
        raise InvalidInput(f"expected {count} weights, got {w.size}")
    return w


def write_trace_csv(trace: RegretTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for row in trace.rows:
            writer.writerow(
                str(int(getattr(row, c))) if c in _INT_COLUMNS else fmt_float(getattr(row, c))
                for c in TRACE_COLUMNS
            )


def read_trace_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TRACE_COLUMNS:
            raise InvalidInput(f"unexpected trace header {header}")
        cols = list(zip(*reader))
    return {
        name: np.array(col, dtype=np.int64 if name in _INT_COLUMNS else float)
        for name, col in zip(header, cols)
    }


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def write_summary_json(trace: RegretTrace, path) -> None:
    payload = dict(trace.summary)
    payload["T"] = len(trace.rows)
    payload["config"] = trace.config
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_states_csv(M: Manifold, trace: RegretTrace, comparators, path) -> None:
    """Per-round agent states plus the comparator (agent ``-1``).

    For hyperbolic points in two dimensions the Poincaré disk coordinates are
    appended so the file can be plotted directly.
    """
    from ..manifolds import to_poincare_disk

    if trace.states is None:
        raise InvalidInput("run was made without keep_states")
    states = trace.states
    T, n = states.shape[:2]
    width = int(np.prod(M.point_shape))
    disk = isinstance(M, Hyperboloid) and M.m == 2
    header = ["t", "agent"] + [f"x{j}" for j in range(width)]
    if disk:
        header += ["disk1", "disk2"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for t in range(T):
            pts = np.concatenate([states[t], np.asarray(comparators)[t][None]])
            flat = M.flatten(pts)
            dcoords = to_poincare_disk(pts) if disk else None
            for i in range(n + 1):
                row = [str(t + 1), str(i if i < n else -1)] + [fmt_float(v) for v in flat[i]]
                if disk:
                    row += [fmt_float(v) for v in dcoords[i]]
                writer.writerow(row)

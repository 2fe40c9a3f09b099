"""
Snapshot serialisation for knot states.

A snapshot is the flat record {time, dim, N, mean, positions, amplitudes},
stored either as YAML or as CSV with one row per knot and the scalar fields
in leading ``#`` comment lines.
"""
import csv
import os
from typing import Any, Dict

import numpy as np
import yaml

from src.state.knot_state import KnotState, evaluate

SNAPSHOT_FORMATS = ("yaml", "csv")


def _ensure_parent(path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)


def state_to_record(state: KnotState) -> Dict[str, Any]:
    return {
        "time": float(state.time),
        "dim": int(state.dim),
        "N": int(state.n),
        "mean": state.mean.tolist(),
        "positions": state.positions.tolist(),
        "amplitudes": state.amplitudes.tolist(),
    }


def record_to_state(record: Dict[str, Any]) -> KnotState:
    """
    Rebuild a state from a snapshot record.

    Raises:
        ValueError: If a field is missing or the sizes disagree
    """
    missing = [key for key in ("time", "dim", "N", "mean", "positions", "amplitudes") if key not in record]
    if missing:
        raise ValueError(f"Snapshot record is missing fields: {missing}")
    positions = np.asarray(record["positions"], dtype=float)
    amplitudes = np.asarray(record["amplitudes"], dtype=float).reshape(len(positions), int(record["dim"]))
    if len(positions) != int(record["N"]):
        raise ValueError(f"Snapshot declares N={record['N']} but stores {len(positions)} positions")
    return KnotState(positions=positions, amplitudes=amplitudes, mean=record["mean"], time=record["time"])


def write_snapshot_yaml(state: KnotState, path: str) -> None:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(state_to_record(state), f, sort_keys=False)


def read_snapshot_yaml(path: str) -> KnotState:
    if not os.path.exists(path):
        raise FileNotFoundError(f"Snapshot file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        return record_to_state(yaml.safe_load(f))


def write_snapshot_csv(state: KnotState, path: str) -> None:
    """Write one row per knot; time, dim, N and mean go into ``#`` comment lines."""
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(f"# time={state.time!r}\n")
        f.write(f"# dim={state.dim}\n")
        f.write(f"# N={state.n}\n")
        f.write("# mean=" + ",".join(repr(float(v)) for v in state.mean) + "\n")
        writer = csv.writer(f)
        writer.writerow(["x"] + [f"a_{k}" for k in range(state.dim)])
        for x, a in zip(state.positions, state.amplitudes):
            writer.writerow([repr(float(x))] + [repr(float(v)) for v in a])


def read_snapshot_csv(path: str) -> KnotState:
    if not os.path.exists(path):
        raise FileNotFoundError(f"Snapshot file not found: {path}")
    with open(path, "r", encoding="utf-8", newline="") as f:
        lines = f.readlines()
    meta: Dict[str, str] = {}
    for line in lines:
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key.strip()] = value.strip()
    rows = list(csv.reader(line for line in lines if not line.startswith("#")))
    table = np.asarray(rows[1:], dtype=float).reshape(len(rows) - 1, -1)
    record = {
        "time": float(meta["time"]),
        "dim": int(meta["dim"]),
        "N": int(meta["N"]),
        "mean": [float(v) for v in meta["mean"].split(",")],
        "positions": table[:, 0],
        "amplitudes": table[:, 1:],
    }
    return record_to_state(record)


def write_snapshot(state: KnotState, path: str, fmt: str = "yaml") -> None:
    if fmt == "yaml":
        write_snapshot_yaml(state, path)
    elif fmt == "csv":
        write_snapshot_csv(state, path)
    else:
        raise ValueError(f"Unsupported snapshot format '{fmt}'. Supported formats: {list(SNAPSHOT_FORMATS)}")


def read_snapshot(path: str) -> KnotState:
    if path.endswith(".csv"):
        return read_snapshot_csv(path)
    return read_snapshot_yaml(path)


def sample_spline_csv(state: KnotState, path: str, points: int = 1000) -> None:
    """Write the spline sampled on a uniform grid, for plotting."""
    _ensure_parent(path)
    x = np.arange(points) / points
    values = evaluate(state, x)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["x"] + [f"q_{k}" for k in range(state.dim)])
        for xi, qi in zip(x, values):
            writer.writerow([f"{xi:.10g}"] + [f"{v:.12g}" for v in qi])

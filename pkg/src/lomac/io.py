"""Diagnostics CSV, versioned snapshot files and convergence tables."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .lowrank import LowRankFunction, to_dense
from .stepper import DiagnosticsRecord

DIAG_COLUMNS = [
    "t", "mass", "mass_rel_dev", "momentum", "momentum_abs_dev", "kinetic_energy",
    "field_energy", "total_energy", "energy_rel_dev", "rank",
]
SNAPSHOT_VERSION = 1
DENSE_DUMP_LIMIT = 1_000_000


def _fmt(x: float) -> str:
    return "%.17g" % x


def _rel(x: float, x0: float) -> float:
    return abs(x - x0) / abs(x0) if x0 != 0 else abs(x - x0)


def diagnostics_rows(series: Sequence[DiagnosticsRecord]) -> list[list]:
    """Rows of :data:`DIAG_COLUMNS`; deviations are measured from the first record.

    Mass and energy deviations are relative (absolute when the initial value
    is zero); the momentum deviation is always absolute.
    """
    if not series:
        raise ValueError("empty diagnostics series")
    first = series[0]
    rows = []
    for r in series:
        rows.append([
            r.t, r.mass, _rel(r.mass, first.mass), r.momentum, abs(r.momentum - first.momentum),
            r.kinetic_energy, r.field_energy, r.total_energy, _rel(r.total_energy, first.total_energy), r.rank,
        ])
    return rows


def write_diagnostics(series: Sequence[DiagnosticsRecord], path) -> Path:
    path = Path(path)
    rows = diagnostics_rows(series)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(DIAG_COLUMNS)
            for row in rows:
                w.writerow([_fmt(v) for v in row[:-1]] + [str(int(row[-1]))])
    except OSError as exc:
        raise OSError(f"cannot write diagnostics to {path}: {exc}") from exc
    return path


def read_diagnostics(path) -> dict[str, np.ndarray]:
    """Columns of a diagnostics CSV as float arrays (``rank`` as int)."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != DIAG_COLUMNS:
        raise ValueError(f"{path}: not a diagnostics file (header {rows[:1]})")
    data = np.array([[float(v) for v in row] for row in rows[1:]]).reshape(-1, len(DIAG_COLUMNS))
    out = {name: data[:, i] for i, name in enumerate(DIAG_COLUMNS)}
    out["rank"] = out["rank"].astype(int)
    return out


# -- snapshots -------------------------------------------------------------------
#
# Format (numpy .npz, version 1):
#   header     JSON string: {"version", "mode", "k", "t", "shape"}
#   coef       (r,)   coefficients C_l
#   left       (m, r) factors on the first grid
#   right      (n, r) factors on the second grid
#   grid1_points, grid1_weights, grid2_points, grid2_weights
#   dense      optional (m, n) nodal values

class SnapshotVersionError(ValueError):
    pass


@dataclass
class Snapshot:
    f: LowRankFunction
    mode: str
    k: int
    t: float
    grids: tuple[tuple[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]
    dense: np.ndarray | None = None


def write_snapshot(
    f: LowRankFunction, grids, path, mode: str = "vp1d1v", k: int = 0, t: float = 0.0, dense: bool | None = None
) -> Path:
    """Write a factorized snapshot; ``grids`` are two ``NodalGrid`` objects or ``(points, weights)`` pairs.

    ``dense=None`` adds the full nodal array when it has at most
    ``DENSE_DUMP_LIMIT`` entries.
    """
    path = Path(path)
    g = []
    for grid in grids:
        pts, wts = (grid.points, grid.weights) if hasattr(grid, "points") else grid
        g.append((np.asarray(pts, dtype=float), np.asarray(wts, dtype=float)))
    if g[0][0].size != f.shape[0] or g[1][0].size != f.shape[1]:
        raise ValueError("grids do not match the factor lengths")
    header = {"version": SNAPSHOT_VERSION, "mode": mode, "k": int(k), "t": float(t), "shape": list(f.shape)}
    arrays = dict(
        header=np.array(json.dumps(header)), coef=f.coef, left=f.left, right=f.right,
        grid1_points=g[0][0], grid1_weights=g[0][1], grid2_points=g[1][0], grid2_weights=g[1][1],
    )
    if dense is None:
        dense = f.shape[0] * f.shape[1] <= DENSE_DUMP_LIMIT
    if dense:
        arrays["dense"] = to_dense(f)
    try:
        with path.open("wb") as fh:
            np.savez(fh, **arrays)
    except OSError as exc:
        raise OSError(f"cannot write snapshot to {path}: {exc}") from exc
    return path


def read_snapshot(path) -> Snapshot:
    path = Path(path)
    with np.load(path, allow_pickle=False) as z:
        header = json.loads(str(z["header"]))
        if header.get("version") != SNAPSHOT_VERSION:
            raise SnapshotVersionError(
                f"{path}: snapshot version {header.get('version')!r}, this reader supports {SNAPSHOT_VERSION}"
            )
        f = LowRankFunction(z["coef"], z["left"], z["right"])
        grids = ((z["grid1_points"], z["grid1_weights"]), (z["grid2_points"], z["grid2_weights"]))
        dense = z["dense"] if "dense" in z.files else None
    return Snapshot(f, header["mode"], header["k"], header["t"], grids, dense)


# -- convergence tables -------------------------------------------------------------

CONV_COLUMNS = ["mesh", "l2_error", "l2_order", "linf_error", "linf_order", "cpu_seconds"]


def observed_orders(errors: Sequence[float]) -> list[float]:
    """``log2(e_i / e_{i+1})`` for successive refinement levels (mesh halved each time)."""
    e = np.asarray(errors, dtype=float)
    return list(np.log2(e[:-1] / e[1:]))


def convergence_table(levels: Sequence[dict], path=None) -> list[dict]:
    """Rows of (mesh, L2 error, order, Linf error, order, CPU seconds).

    ``levels`` are dicts with keys ``mesh``, ``l2``, ``linf`` and optionally
    ``seconds``; the first row has empty orders.
    """
    if len(levels) < 2:
        raise ValueError("a convergence table needs at least two refinement levels")
    l2 = observed_orders([lv["l2"] for lv in levels])
    li = observed_orders([lv["linf"] for lv in levels])
    rows = []
    for i, lv in enumerate(levels):
        rows.append({
            "mesh": lv["mesh"],
            "l2_error": lv["l2"],
            "l2_order": l2[i - 1] if i else math.nan,
            "linf_error": lv["linf"],
            "linf_order": li[i - 1] if i else math.nan,
            "cpu_seconds": lv.get("seconds", math.nan),
        })
    if path is not None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CONV_COLUMNS)
            for r in rows:
                w.writerow([r["mesh"]] + ["" if math.isnan(r[c]) else "%.6g" % r[c] for c in CONV_COLUMNS[1:]])
    return rows


def format_table(rows: list[dict]) -> str:
    lines = ["%-12s %12s %7s %12s %7s %9s" % ("mesh", "L2 error", "order", "Linf error", "order", "CPU s")]
    for r in rows:
        o2 = "" if math.isnan(r["l2_order"]) else "%.2f" % r["l2_order"]
        oi = "" if math.isnan(r["linf_order"]) else "%.2f" % r["linf_order"]
        cpu = "" if math.isnan(r["cpu_seconds"]) else "%.2f" % r["cpu_seconds"]
        lines.append("%-12s %12.3e %7s %12.3e %7s %9s" % (r["mesh"], r["l2_error"], o2, r["linf_error"], oi, cpu))
    return "\n".join(lines)

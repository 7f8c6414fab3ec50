"""File writers. Every file is written to a temp name and renamed into place."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def metrics_csv(metrics) -> str:
    row = metrics.row()
    return csv_text(metrics.FIELDS, [[row[f] for f in metrics.FIELDS]])


def events_jsonl(events) -> str:
    return "".join(json.dumps(e.to_dict(), separators=(",", ":")) + "\n" for e in events)


def exposure_pgm(dose: np.ndarray) -> str:
    """Plain (P2) PGM, doses scaled to 0..65535; the first row is the field's far (max-y) edge."""
    ny, nx = dose.shape
    peak = float(dose.max()) if dose.size else 0.0
    if peak > 0:
        scaled = np.rint(dose / peak * 65535.0).astype(np.int64)
    else:
        scaled = np.zeros(dose.shape, dtype=np.int64)
    lines = [f"P2\n{nx} {ny}\n65535\n"]
    for row in scaled[::-1]:
        lines.append(" ".join(map(str, row.tolist())) + "\n")
    return "".join(lines)


def read_pgm(path) -> np.ndarray:
    tokens = Path(path).read_text().split()
    if tokens[0] != "P2":
        raise ValueError("not a plain PGM file")
    nx, ny = int(tokens[1]), int(tokens[2])
    data = np.array(tokens[4:4 + nx * ny], dtype=np.int64).reshape(ny, nx)
    return data[::-1]


def plan_csv(lap_waypoints) -> str:
    rows = []
    for lap, wps in enumerate(lap_waypoints, start=1):
        for seq, (x, y) in enumerate(wps):
            rows.append([lap, seq, f"{x:.6f}", f"{y:.6f}"])
    return csv_text(["lap", "seq", "x_m", "y_m"], rows)

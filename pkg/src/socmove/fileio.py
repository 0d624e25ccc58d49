"""File formats: comma-separated tables with headers, JSON manifests.

Time steps are 1-based in every file; labels are opaque text. All floats
are written with shortest round-trip formatting and every write is atomic
(temp file then rename), so identical runs produce byte-identical outputs.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .model import PARAM_NAMES
from .simulate import MlmdDataset

FORMAT_VERSION = 1

TRAJECTORY_HEADER = "t,label,x,y"
NETWORK_HEADER = "t,i,j"
LABEL_MAP_HEADER = "label,individual"
CHAIN_HEADER = "iteration," + ",".join(PARAM_NAMES)


class ParseError(ValueError):
    """Malformed input file; carries the offending 1-based line number."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


def atomic_write_text(path, text: str):
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x) -> str:
    """Shortest decimal string that round-trips to the same float."""
    return repr(float(x))


def write_trajectory_file(path, data: MlmdDataset):
    lines = [TRAJECTORY_HEADER]
    for t, lab, x, y in data.records():
        lines.append(f"{t + 1},{lab},{_fmt(x)},{_fmt(y)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_trajectory_file(path, T: int | None = None) -> MlmdDataset:
    """Parse and validate a t,label,x,y table into an MLMD dataset.

    Violations (bad header, non-numeric fields, duplicate (t, label) rows,
    non-contiguous label runs) raise ParseError with the offending line.
    """
    with open(path) as fh:
        raw = fh.read().splitlines()
    if not raw or raw[0].strip() != TRAJECTORY_HEADER:
        raise ParseError(path, 1, f"expected header {TRAJECTORY_HEADER!r}")
    times, labels, xs, ys = [], [], [], []
    seen = set()
    label_times = {}
    for line_no, line in enumerate(raw[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise ParseError(path, line_no, f"expected 4 fields, got {len(parts)}")
        t_str, lab, x_str, y_str = (p.strip() for p in parts)
        try:
            t = int(t_str)
        except ValueError:
            raise ParseError(path, line_no, f"time {t_str!r} is not an integer") from None
        if t < 1:
            raise ParseError(path, line_no, f"time must be >= 1, got {t}")
        if not lab:
            raise ParseError(path, line_no, "empty label")
        try:
            x, y = float(x_str), float(y_str)
        except ValueError:
            raise ParseError(path, line_no, "positions must be numeric") from None
        if not (np.isfinite(x) and np.isfinite(y)):
            raise ParseError(path, line_no, "positions must be finite")
        if (t, lab) in seen:
            raise ParseError(path, line_no, f"duplicate record for label {lab!r} at t={t}")
        seen.add((t, lab))
        label_times.setdefault(lab, []).append((t, line_no))
        times.append(t - 1)
        labels.append(lab)
        xs.append(x)
        ys.append(y)
    for lab, ts in label_times.items():
        ts.sort()
        for (t0, _), (t1, ln) in zip(ts, ts[1:]):
            if t1 != t0 + 1:
                raise ParseError(
                    path, ln, f"label {lab!r} skips from t={t0} to t={t1}; runs must be contiguous"
                )
    horizon = T if T is not None else (max(times) + 1 if times else 0)
    if times and max(times) + 1 > horizon:
        raise ParseError(path, 1, f"records extend past the stated horizon T={T}")
    return MlmdDataset(
        np.array(times, dtype=int),
        np.array(labels, dtype=object),
        np.column_stack([xs, ys]) if times else np.zeros((0, 2)),
        horizon,
    )


def write_network_file(path, network):
    lines = [NETWORK_HEADER]
    for t, i, j in network.edge_list():
        lines.append(f"{t + 1},{i},{j}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_label_map(path, label_map: dict):
    lines = [LABEL_MAP_HEADER]
    for lab in sorted(label_map):
        lines.append(f"{lab},{label_map[lab]}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_chain_file(path, samples):
    lines = [CHAIN_HEADER]
    for i in range(samples.n_draws):
        row = ",".join(_fmt(v) for v in samples.draws[i])
        lines.append(f"{i},{row}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_chain_file(path) -> np.ndarray:
    """Draw matrix from a chain file; schema must match exactly."""
    with open(path) as fh:
        raw = fh.read().splitlines()
    if not raw or raw[0].strip() != CHAIN_HEADER:
        raise ParseError(path, 1, f"expected header {CHAIN_HEADER!r}")
    rows = []
    for line_no, line in enumerate(raw[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(PARAM_NAMES) + 1:
            raise ParseError(
                path, line_no, f"expected {len(PARAM_NAMES) + 1} fields, got {len(parts)}"
            )
        try:
            rows.append([float(p) for p in parts[1:]])
        except ValueError:
            raise ParseError(path, line_no, "draws must be numeric") from None
    if not rows:
        raise ParseError(path, 1, "chain file has no draws")
    return np.asarray(rows, dtype=float)


def write_manifest(path, payload: dict):
    doc = {"format_version": FORMAT_VERSION}
    doc.update(payload)
    atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def write_rows_csv(path, header: list, rows):
    """Generic comma-separated writer; floats get round-trip formatting."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for key in header:
            v = row[key]
            if isinstance(v, float):
                cells.append(_fmt(v))
            elif v is None:
                cells.append("")
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    atomic_write_text(path, "\n".join(lines) + "\n")

"""Text file formats: complex matrices, measurement counts.

Both formats are line oriented and diff friendly.  Header lines are
``# key=value`` pairs; body rows hold indices plus numbers serialized with
17 significant digits, which round-trips IEEE doubles exactly, so
write -> read -> write reproduces identical bytes.  Files are written to a
temporary name and renamed into place only on success.
"""

from __future__ import annotations

import os
import tempfile

import numpy as np

from .errors import FormatError
from .lattice import Grid, UnitMap, make_grid
from .weaksim import MeasurementRecord, READOUT_KEYS

MATRIX_MAGIC = "# diracsim matrix v1"
COUNTS_MAGIC = "# diracsim counts v1"


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def grid_meta(grid: Grid) -> dict:
    meta = {"n": grid.n, "dx": grid.dx, "x0": grid.x0}
    if grid.unit_map is not None:
        meta["wavelength"] = grid.unit_map.wavelength
        meta["focal_length"] = grid.unit_map.focal_length
        meta["magnification"] = grid.unit_map.magnification
    return meta


def grid_from_meta(meta: dict, path: str = "<meta>") -> Grid:
    try:
        unit_map = None
        if "wavelength" in meta:
            unit_map = UnitMap(
                wavelength=float(meta["wavelength"]),
                focal_length=float(meta["focal_length"]),
                magnification=float(meta["magnification"]),
            )
        return make_grid(int(meta["n"]), float(meta["dx"]), float(meta["x0"]), unit_map)
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: incomplete or invalid grid header ({exc})") from exc


def write_matrix(path: str, arr: np.ndarray, meta: dict) -> None:
    """Write a complex matrix with '# key=value' headers and 'i j re im' rows."""
    arr = np.asarray(arr, dtype=complex)
    lines = [MATRIX_MAGIC]
    header = {"rows": arr.shape[0], "cols": arr.shape[1]}
    header.update(meta)
    for key, value in header.items():
        lines.append(f"# {key}={_fmt(value)}")
    for i in range(arr.shape[0]):
        for j in range(arr.shape[1]):
            z = arr[i, j]
            lines.append(f"{i} {j} {_fmt(z.real)} {_fmt(z.imag)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def _read_lines(path: str, magic: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if not lines or lines[0] != magic:
        raise FormatError(f"{path}:1: missing magic line {magic!r}")
    meta = {}
    body_start = 1
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.startswith("#"):
            body_start = lineno
            break
        text = line[1:].strip()
        if "=" not in text:
            raise FormatError(f"{path}:{lineno}: malformed header line {line!r}")
        key, _, value = text.partition("=")
        meta[key.strip()] = value.strip()
        body_start = lineno + 1
    return lines, meta, body_start


def read_matrix(path: str):
    """Read a matrix file; returns ``(array, meta)`` with meta values as strings."""
    lines, meta, body_start = _read_lines(path, MATRIX_MAGIC)
    try:
        rows, cols = int(meta["rows"]), int(meta["cols"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: missing or invalid rows/cols header ({exc})") from exc
    arr = np.zeros((rows, cols), dtype=complex)
    seen = np.zeros((rows, cols), dtype=bool)
    for lineno, line in enumerate(lines[body_start - 1:], start=body_start):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 4:
            raise FormatError(f"{path}:{lineno}: expected 'i j re im', got {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
            re, im = float(parts[2]), float(parts[3])
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from exc
        if not (0 <= i < rows and 0 <= j < cols):
            raise FormatError(f"{path}:{lineno}: index ({i}, {j}) out of bounds")
        if seen[i, j]:
            raise FormatError(f"{path}:{lineno}: duplicate entry ({i}, {j})")
        seen[i, j] = True
        arr[i, j] = complex(re, im)
    if not seen.all():
        raise FormatError(f"{path}: missing {int((~seen).sum())} matrix entries")
    return arr, meta


def write_counts(path: str, record: MeasurementRecord, extra_meta: dict | None = None) -> None:
    """Serialize one measurement record; body rows are 'k N_D N_A N_L N_R'."""
    n = len(record.counts["D"])
    lines = [COUNTS_MAGIC]
    header = {
        "n": n,
        "sliver_lo": record.sliver[0],
        "sliver_hi": record.sliver[1],
        "phi": record.phi,
        "photon_budget": record.photon_budget,
        "seed": "none" if record.seed is None else record.seed,
    }
    header.update(extra_meta or {})
    for key, value in header.items():
        lines.append(f"# {key}={_fmt(value)}")
    for k in range(n):
        row = " ".join(_fmt(float(record.counts[key][k])) for key in READOUT_KEYS)
        lines.append(f"{k} {row}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_counts(path: str) -> MeasurementRecord:
    lines, meta, body_start = _read_lines(path, COUNTS_MAGIC)
    try:
        n = int(meta["n"])
        sliver = (int(meta["sliver_lo"]), int(meta["sliver_hi"]))
        phi = float(meta["phi"])
        budget = float(meta["photon_budget"])
        seed = None if meta.get("seed", "none") == "none" else int(meta["seed"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: missing or invalid counts header ({exc})") from exc
    counts = {key: np.zeros(n) for key in READOUT_KEYS}
    seen = np.zeros(n, dtype=bool)
    for lineno, line in enumerate(lines[body_start - 1:], start=body_start):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 5:
            raise FormatError(f"{path}:{lineno}: expected 'k D A L R', got {line!r}")
        try:
            k = int(parts[0])
            vals = [float(p) for p in parts[1:]]
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from exc
        if not 0 <= k < n:
            raise FormatError(f"{path}:{lineno}: momentum index {k} out of bounds")
        if seen[k]:
            raise FormatError(f"{path}:{lineno}: duplicate momentum index {k}")
        seen[k] = True
        for key, val in zip(READOUT_KEYS, vals):
            counts[key][k] = val
    if not seen.all():
        raise FormatError(f"{path}: missing {int((~seen).sum())} momentum rows")
    return MeasurementRecord(sliver=sliver, phi=phi, counts=counts,
                             photon_budget=budget, seed=seed)

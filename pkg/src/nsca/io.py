"""CSV serialization for records, indexes, masks, matrices and spectra.

All files are plain comma-separated text. Numbers are written with 17
significant digits so doubles survive a round trip bit-exactly. Readers
reject non-finite cells and report 1-based line numbers in errors.

Formats:

* record    -- header ``ch1,...,chn``; one row per sample, one column per
               channel.
* index     -- header ``k,value``; the warm-up convention (``valid_from``)
               is not stored, a reread series starts at 0.
* mask      -- header ``k,label`` with integer labels.
* matrix    -- no header; one row per matrix row.
* spectra   -- header ``class,component,value``; one row per entry.
"""

import numpy as np

from .errors import MalformedInput
from .partition import Partition
from .records import IndexSeries, Record

__all__ = [
    "write_record",
    "read_record",
    "write_index",
    "read_index",
    "write_mask",
    "read_mask",
    "write_matrix",
    "read_matrix",
    "write_spectra",
    "read_spectra",
]

_FMT = "%.17g"


def _fmt_row(values):
    return ",".join(_FMT % v for v in values)


def _read_lines(path):
    with open(path, "r", encoding="ascii") as fh:
        return fh.read().splitlines()


def _parse_float(cell, lineno, path):
    try:
        v = float(cell)
    except ValueError as err:
        raise MalformedInput(f"{path}: bad number {cell!r} on line {lineno}", line=lineno) from err
    if not np.isfinite(v):
        raise MalformedInput(f"{path}: non-finite value on line {lineno}", line=lineno)
    return v


def write_record(path, record):
    """Record -> CSV, samples as rows so channels line up with the header."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(record.channel_names) + "\n")
        for row in record.samples.T:
            fh.write(_fmt_row(row) + "\n")


def read_record(path, sample_rate_hz=1.0):
    lines = _read_lines(path)
    if not lines:
        raise MalformedInput(f"{path}: empty file", line=1)
    names = [c.strip() for c in lines[0].split(",")]
    if not names or any(not c for c in names):
        raise MalformedInput(f"{path}: malformed header", line=1)
    n = len(names)
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != n:
            raise MalformedInput(
                f"{path}: expected {n} columns, got {len(cells)} on line {i}", line=i
            )
        rows.append([_parse_float(c, i, path) for c in cells])
    if not rows:
        raise MalformedInput(f"{path}: no data rows", line=1)
    return Record(np.array(rows).T, sample_rate_hz, names)


def write_index(path, idx):
    with open(path, "w", encoding="ascii") as fh:
        fh.write("k,value\n")
        for k, v in enumerate(idx.values):
            fh.write(f"{k},{_FMT % v}\n")


def read_index(path, name="index"):
    lines = _read_lines(path)
    if not lines or lines[0].strip() != "k,value":
        raise MalformedInput(f"{path}: expected 'k,value' header", line=1)
    values = []
    for i, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != 2:
            raise MalformedInput(f"{path}: expected 2 columns on line {i}", line=i)
        k = _parse_float(cells[0], i, path)
        if k != len(values):
            raise MalformedInput(f"{path}: sample numbers must run 0,1,... (line {i})", line=i)
        values.append(_parse_float(cells[1], i, path))
    if not values:
        raise MalformedInput(f"{path}: no data rows", line=1)
    return IndexSeries(np.array(values), valid_from=0, name=name)


def write_mask(path, part):
    with open(path, "w", encoding="ascii") as fh:
        fh.write("k,label\n")
        for k, v in enumerate(part.labels):
            fh.write(f"{k},{int(v)}\n")


def read_mask(path):
    lines = _read_lines(path)
    if not lines or lines[0].strip() != "k,label":
        raise MalformedInput(f"{path}: expected 'k,label' header", line=1)
    labels = []
    for i, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != 2:
            raise MalformedInput(f"{path}: expected 2 columns on line {i}", line=i)
        k = _parse_float(cells[0], i, path)
        if k != len(labels):
            raise MalformedInput(f"{path}: sample numbers must run 0,1,... (line {i})", line=i)
        lab = _parse_float(cells[1], i, path)
        if lab != int(lab) or lab < 0:
            raise MalformedInput(f"{path}: labels must be nonnegative integers (line {i})", line=i)
        labels.append(int(lab))
    if not labels:
        raise MalformedInput(f"{path}: no data rows", line=1)
    return Partition(np.array(labels, dtype=np.int64))


def write_matrix(path, mat):
    mat = np.atleast_2d(np.asarray(mat, dtype=np.float64))
    with open(path, "w", encoding="ascii") as fh:
        for row in mat:
            fh.write(_fmt_row(row) + "\n")


def read_matrix(path):
    lines = _read_lines(path)
    rows = []
    width = None
    for i, line in enumerate(lines, start=1):
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise MalformedInput(
                f"{path}: expected {width} columns, got {len(cells)} on line {i}", line=i
            )
        rows.append([_parse_float(c, i, path) for c in cells])
    if not rows:
        raise MalformedInput(f"{path}: empty file", line=1)
    return np.array(rows)


def write_spectra(path, spectra):
    spectra = np.atleast_2d(np.asarray(spectra, dtype=np.float64))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("class,component,value\n")
        for i, row in enumerate(spectra):
            for j, v in enumerate(row):
                fh.write(f"{i},{j},{_FMT % v}\n")


def read_spectra(path):
    lines = _read_lines(path)
    if not lines or lines[0].strip() != "class,component,value":
        raise MalformedInput(f"{path}: expected 'class,component,value' header", line=1)
    entries = {}
    for i, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != 3:
            raise MalformedInput(f"{path}: expected 3 columns on line {i}", line=i)
        ci = _parse_float(cells[0], i, path)
        cj = _parse_float(cells[1], i, path)
        if ci != int(ci) or cj != int(cj) or ci < 0 or cj < 0:
            raise MalformedInput(f"{path}: class/component must be indexes (line {i})", line=i)
        entries[(int(ci), int(cj))] = _parse_float(cells[2], i, path)
    if not entries:
        raise MalformedInput(f"{path}: no data rows", line=1)
    K = max(k for k, _ in entries) + 1
    n = max(j for _, j in entries) + 1
    if len(entries) != K * n:
        raise MalformedInput(f"{path}: missing spectra entries", line=len(lines))
    out = np.empty((K, n))
    for (ci, cj), v in entries.items():
        out[ci, cj] = v
    return out

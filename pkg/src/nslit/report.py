"""Delimited output and run manifests.

CSV files are UTF-8, comma separated, one header row, floats printed with 17
significant digits so every value round-trips bit-exactly.  The manifest is
flat ``key = value`` text recording resolved parameters, numeric policy
knobs, package versions and SHA-256 checksums of every emitted file; no
timestamps, so identical runs produce identical bytes.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

__all__ = ["format_float", "write_csv", "write_manifest", "sha256_of"]


def format_float(value):
    return f"{float(value):.17g}"


def write_csv(path, header, columns):
    """Write columns (equal-length 1-d arrays) under the given header names."""
    path = Path(path)
    cols = [np.asarray(c) for c in columns]
    n = len(cols[0])
    if any(len(c) != n for c in cols) or len(header) != len(cols):
        raise ValueError("header/column shape mismatch")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n):
            fh.write(
                ",".join(
                    str(int(c[i])) if np.issubdtype(c.dtype, np.integer) else format_float(c[i])
                    for c in cols
                )
                + "\n"
            )
    return path


def sha256_of(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(path, entries):
    """Write ordered ``key = value`` lines; values are formatted as given."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in entries.items():
            fh.write(f"{key} = {value}\n")
    return path

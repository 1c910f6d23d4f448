"""Binary PGM (P5) rasters.

Depth images use maxval 65535 with big-endian samples, value =
millimeters, 0 = invalid.  Masks and rendered heatmaps use maxval 255.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def write_pgm(path, data: np.ndarray) -> None:
    """Write a P5 raster; dtype picks the maxval (uint8 -> 255, uint16 -> 65535)."""
    arr = np.asarray(data)
    if arr.ndim != 2:
        raise ValueError("PGM raster must be 2-D")
    if arr.dtype == np.uint8:
        maxval, payload = 255, arr.tobytes()
    elif arr.dtype == np.uint16:
        maxval, payload = 65535, arr.astype(">u2").tobytes()
    else:
        raise ValueError(f"unsupported dtype {arr.dtype}; use uint8 or uint16")
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n{maxval}\n".encode("ascii")
    Path(path).write_bytes(header + payload)


def read_pgm(path) -> np.ndarray:
    """Read a binary P5 raster; returns uint8 or uint16 per its maxval."""
    raw = Path(path).read_bytes()
    if not raw.startswith(b"P5"):
        raise ValueError("not a binary PGM (P5) file")
    fields: list[int] = []
    i = 2
    while len(fields) < 3:
        while i < len(raw) and raw[i:i + 1].isspace():
            i += 1
        if raw[i:i + 1] == b"#":  # comment runs to end of line
            while i < len(raw) and raw[i] != 0x0A:
                i += 1
            continue
        j = i
        while j < len(raw) and not raw[j:j + 1].isspace():
            j += 1
        fields.append(int(raw[i:j]))
        i = j
    i += 1  # single whitespace byte after maxval
    width, height, maxval = fields
    if maxval == 255:
        data = np.frombuffer(raw, dtype=np.uint8, count=width * height, offset=i)
    elif maxval == 65535:
        data = np.frombuffer(raw, dtype=">u2", count=width * height,
                             offset=i).astype(np.uint16)
    else:
        raise ValueError(f"unsupported maxval {maxval}")
    return data.reshape(height, width).copy()

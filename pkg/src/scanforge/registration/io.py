"""Frame and deformation file formats.

* binary PGM (P5), 8 or 16 bit: values are clipped to [0, 1] and scaled
  to the maxval, so it is lossy by quantization; big-endian 16-bit per
  the netpbm convention.
* raw grids: 16-byte header (magic ``SFG1``, uint32 level, 8 reserved
  bytes), then float32 little-endian values row-major. Lossless up to
  float32.
* deformations: one ``alpha t0 t1`` text line each.
* series manifest: one frame path per line.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .deform import RigidDeformation
from .grid import GridImage, level_side

RAW_MAGIC = b"SFG1"


class FrameIOError(IOError):
    pass


def write_pgm(path, img: GridImage, bits: int = 16) -> None:
    if bits not in (8, 16):
        raise FrameIOError("PGM depth must be 8 or 16 bits")
    maxval = (1 << bits) - 1
    scaled = np.clip(img.values, 0.0, 1.0) * maxval
    data = np.rint(scaled).astype(">u2" if bits == 16 else "u1")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.side} {img.side}\n{maxval}\n".encode("ascii"))
        fh.write(data.tobytes())


def read_pgm(path) -> GridImage:
    with open(path, "rb") as fh:
        blob = fh.read()
    if not blob.startswith(b"P5"):
        raise FrameIOError(f"{path}: not a binary PGM")
    fields: list[int] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(blob) and blob[pos:pos + 1].isspace():
            pos += 1
        if blob[pos:pos + 1] == b"#":          # comment line
            pos = blob.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos:pos + 1].isspace():
            pos += 1
        fields.append(int(blob[start:pos]))
    pos += 1
    width, height, maxval = fields
    if width != height:
        raise FrameIOError(f"{path}: frame must be square, got {width}x{height}")
    dtype = ">u2" if maxval > 255 else "u1"
    count = width * height
    data = np.frombuffer(blob, dtype=dtype, count=count, offset=pos)
    if data.size != count:
        raise FrameIOError(f"{path}: truncated pixel data")
    return GridImage(data.reshape(height, width).astype(np.float64) / maxval)


def write_raw(path, img: GridImage) -> None:
    header = RAW_MAGIC + struct.pack("<I", img.level) + b"\x00" * 8
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(img.values.astype("<f4").tobytes())


def read_raw(path) -> GridImage:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16 or header[:4] != RAW_MAGIC:
            raise FrameIOError(f"{path}: bad raw-grid header")
        level = struct.unpack("<I", header[4:8])[0]
        side = level_side(level)
        data = np.frombuffer(fh.read(), dtype="<f4")
    if data.size != side * side:
        raise FrameIOError(f"{path}: expected {side * side} values, "
                           f"got {data.size}")
    return GridImage(data.reshape(side, side).astype(np.float64))


def write_deformations(path, phis) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for phi in phis:
            fh.write(f"{phi.alpha!r} {phi.t0!r} {phi.t1!r}\n")


def read_deformations(path) -> list[RigidDeformation]:
    out = []
    with open(path, encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            a, t0, t1 = (float(tok) for tok in line.split())
            out.append(RigidDeformation(a, t0, t1))
    return out


def write_manifest(path, frame_paths) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in frame_paths:
            fh.write(f"{p}\n")


def read_manifest(path) -> list[Path]:
    base = Path(path).parent
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                p = Path(line)
                out.append(p if p.is_absolute() else base / p)
    return out


def load_frame(path) -> GridImage:
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return read_pgm(path)
    return read_raw(path)

"""On-disk formats for trained parameters and loss traces.

Parameter file layout (all integers little-endian)::

    offset  size  field
    0       4     magic b"HSTV"
    4       2     format version (1)
    6       2     reserved (0)
    8       4     d        text-embedding width
    12      4     d_p      projection width (= head hidden width)
    16      8     seed     signed
    24      32    sha256 of the canonical JSON of the training config
    56      ...   float64 arrays, C order, in this sequence:
                  node.A1 (d_p, d), node.b1 (d_p), node.A2 (d_p, d_p), node.b2 (d_p),
                  edge.A1 (d_p, d), edge.b1 (d_p), edge.A2 (d_p, d_p), edge.b2 (d_p),
                  discriminator.B (d_p, d_p)
"""

from __future__ import annotations

import io
import os
import struct
from dataclasses import dataclass

import numpy as np

from .config import TriViewConfig
from .heads import HeadParams
from .training import LossParts, TriViewParams

MAGIC = b"HSTV"
VERSION = 1
_HEADER = struct.Struct("<4sHHIIq32s")
TRACE_HEADER = "step,L_n,L_g,L_m,L"


@dataclass(frozen=True)
class ParamHeader:
    version: int
    d: int
    d_p: int
    seed: int
    config_hash: bytes


def _shapes(d: int, d_p: int) -> list[tuple[int, ...]]:
    head = [(d_p, d), (d_p,), (d_p, d_p), (d_p,)]
    return head + head + [(d_p, d_p)]


def dump_params(params: TriViewParams, config: TriViewConfig) -> bytes:
    d, d_p = config.d, config.d_p
    buf = io.BytesIO()
    buf.write(_HEADER.pack(MAGIC, VERSION, 0, d, d_p, config.seed, config.digest()))
    for arr, shape in zip(params.arrays(), _shapes(d, d_p)):
        if arr.shape != shape:
            raise ValueError(f"parameter shape {arr.shape} does not match expected {shape}")
        buf.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return buf.getvalue()


def load_params_bytes(data: bytes) -> tuple[ParamHeader, TriViewParams]:
    if len(data) < _HEADER.size:
        raise ValueError("parameter file truncated")
    magic, version, _, d, d_p, seed, digest = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError("not a hyperscene parameter file")
    if version != VERSION:
        raise ValueError(f"unsupported parameter file version {version}")
    offset = _HEADER.size
    arrays = []
    for shape in _shapes(d, d_p):
        count = int(np.prod(shape))
        chunk = data[offset: offset + 8 * count]
        if len(chunk) != 8 * count:
            raise ValueError("parameter file truncated")
        arrays.append(np.frombuffer(chunk, dtype="<f8").astype(np.float64).reshape(shape))
        offset += 8 * count
    if offset != len(data):
        raise ValueError("trailing bytes in parameter file")
    params = TriViewParams(HeadParams(*arrays[0:4]), HeadParams(*arrays[4:8]), arrays[8])
    return ParamHeader(version, d, d_p, seed, digest), params


def save_params(path: str | os.PathLike, params: TriViewParams, config: TriViewConfig) -> None:
    with open(path, "wb") as fh:
        fh.write(dump_params(params, config))


def load_params(path: str | os.PathLike) -> tuple[ParamHeader, TriViewParams]:
    with open(path, "rb") as fh:
        return load_params_bytes(fh.read())


def format_trace(trace: list[LossParts]) -> str:
    lines = [TRACE_HEADER]
    for step, p in enumerate(trace):
        lines.append(f"{step},{p.node!r},{p.area!r},{p.membership!r},{p.total!r}")
    return "\n".join(lines) + "\n"


def write_trace(path: str | os.PathLike, trace: list[LossParts]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_trace(trace))

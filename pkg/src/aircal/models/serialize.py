"""Byte-deterministic model files.

Layout::

    AIRCAL-MODEL\\n
    version=<int>\\n
    kind=<kind>\\n
    <8-byte little-endian header length><sorted-key JSON header>
    <raw little-endian arrays, in header order>
    <8-byte blake2b digest of everything above>

The header lists each array's name, dtype and shape plus the training
metadata. No timestamps or platform data are written, so the same model
always gives the same bytes.
"""
from __future__ import annotations

import hashlib
import json
import os
import struct
from pathlib import Path

import numpy as np

from ..atomic import atomic_write
from ..errors import CorruptPayload, FormatVersionMismatch
from .config import TrainConfig
from .core import Model, Scaler
from .forest import Forest, Tree
from .neural import build_network
from .nn import Sequential
from .svr import SvrSolution

MAGIC = b"AIRCAL-MODEL\n"
FORMAT_VERSION = 1
DIGEST = 8
_TREE_FIELDS = ("feature", "threshold", "left", "right", "value")


def _digest(data: bytes) -> bytes:
    return hashlib.blake2b(data, digest_size=DIGEST).digest()


def _arrays(model: Model) -> list[tuple[str, np.ndarray]]:
    s = model.scaler
    out = [("scaler.x_mean", s.x_mean), ("scaler.x_std", s.x_std),
           ("scaler.y", np.array([s.y_mean, s.y_std]))]
    p = model.params
    if isinstance(p, Forest):
        out.append(("forest.y_range", np.array([p.y_min, p.y_max])))
        for i, tree in enumerate(p.trees):
            out += [(f"tree{i}.{f}", getattr(tree, f)) for f in _TREE_FIELDS]
    elif isinstance(p, SvrSolution):
        out += [("svr.support", p.support), ("svr.coef", p.coef),
                ("svr.scalars", np.array([p.bias, p.gamma]))]
    else:
        out += [(q.name, q.value) for q in p.params()]
    return out


def dump_model(model: Model) -> bytes:
    arrays = _arrays(model)
    header = {
        "metadata": model.metadata,
        "config": model.config.to_dict(),
        "arrays": [[name, np.asarray(a).dtype.str.lstrip("<>|="), list(np.shape(a))] for name, a in arrays],
    }
    if isinstance(model.params, SvrSolution):
        header["svr"] = {"iterations": model.params.iterations, "converged": model.params.converged}
    if isinstance(model.params, Forest):
        header["n_trees"] = len(model.params.trees)
    hbytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    parts = [MAGIC, f"version={FORMAT_VERSION}\n".encode(), f"kind={model.kind}\n".encode(),
             struct.pack("<Q", len(hbytes)), hbytes]
    for _, a in arrays:
        a = np.asarray(a)
        parts.append(np.ascontiguousarray(a, dtype=a.dtype.newbyteorder("<")).tobytes())
    body = b"".join(parts)
    return body + _digest(body)


def _readline(data: bytes, pos: int) -> tuple[str, int]:
    end = data.find(b"\n", pos)
    if end < 0:
        raise CorruptPayload("truncated preamble")
    return data[pos:end].decode("ascii", errors="replace"), end + 1


def load_bytes(data: bytes) -> Model:
    if not data.startswith(MAGIC):
        raise CorruptPayload("missing AIRCAL-MODEL magic")
    line, pos = _readline(data, len(MAGIC))
    if not line.startswith("version="):
        raise CorruptPayload("missing version line")
    try:
        version = int(line[len("version="):])
    except ValueError:
        raise CorruptPayload(f"bad version line {line!r}") from None
    if version != FORMAT_VERSION:
        raise FormatVersionMismatch(f"file format version {version}, this reader handles {FORMAT_VERSION}")
    if len(data) < pos + DIGEST or _digest(data[:-DIGEST]) != data[-DIGEST:]:
        raise CorruptPayload("checksum mismatch")
    line, pos = _readline(data, pos)
    kind = line[len("kind="):]
    (hlen,) = struct.unpack_from("<Q", data, pos)
    pos += 8
    header = json.loads(data[pos:pos + hlen])
    pos += hlen
    arrays = {}
    for name, dtype, shape in header["arrays"]:
        dt = np.dtype(dtype).newbyteorder("<")
        n = int(np.prod(shape, dtype=np.int64)) * dt.itemsize
        arrays[name] = np.frombuffer(data[pos:pos + n], dtype=dt).reshape(shape).astype(dt.newbyteorder("="))
        pos += n
    if pos != len(data) - DIGEST:
        raise CorruptPayload("payload length does not match header")
    return _rebuild(kind, header, arrays)


def _rebuild(kind: str, header: dict, arrays: dict) -> Model:
    config = TrainConfig.from_dict(header["config"])
    y_mean, y_std = arrays["scaler.y"]
    scaler = Scaler(arrays["scaler.x_mean"], arrays["scaler.x_std"], float(y_mean), float(y_std))
    if kind == "rfr":
        trees = tuple(Tree(*(arrays[f"tree{i}.{f}"] for f in _TREE_FIELDS)) for i in range(header["n_trees"]))
        lo, hi = arrays["forest.y_range"]
        params = Forest(trees, float(lo), float(hi))
    elif kind == "svr":
        bias, gamma = arrays["svr.scalars"]
        params = SvrSolution(arrays["svr.support"], arrays["svr.coef"], float(bias), float(gamma),
                             header["svr"]["iterations"], header["svr"]["converged"])
    else:
        net: Sequential = build_network(config.model, np.random.default_rng(0),
                                        seq_len=arrays["scaler.x_mean"].size)
        net.set_weights([arrays[p.name] for p in net.params()])
        params = net
    return Model(kind, config, params, scaler, header["metadata"])


def save_model(model: Model, path: str | os.PathLike) -> None:
    """Write atomically: temp file in the target directory, then rename."""
    atomic_write(path, dump_model(model))


def load_model(path: str | os.PathLike) -> Model:
    return load_bytes(Path(path).read_bytes())

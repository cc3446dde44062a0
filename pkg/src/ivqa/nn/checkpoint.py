"""Flat named-array checkpoints (npz) with shape/precision metadata, bit-exact round-trip."""
from __future__ import annotations

import io
import json
import os
import tempfile

import numpy as np

__all__ = ["save_named_arrays", "load_named_arrays"]

_META_KEY = "__meta__"


def save_named_arrays(path: str, arrays: dict[str, np.ndarray], meta: dict | None = None) -> None:
    if _META_KEY in arrays:
        raise ValueError(f"array name {_META_KEY!r} is reserved")
    payload = dict(arrays)
    record = {
        "arrays": {name: {"shape": list(a.shape), "dtype": str(a.dtype)} for name, a in arrays.items()},
        "meta": meta or {},
    }
    payload[_META_KEY] = np.frombuffer(json.dumps(record).encode("utf-8"), dtype=np.uint8)
    buffer = io.BytesIO()
    np.savez(buffer, **payload)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".npz")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(buffer.getvalue())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_named_arrays(path: str) -> tuple[dict[str, np.ndarray], dict]:
    with np.load(path) as bundle:
        raw = bundle[_META_KEY].tobytes().decode("utf-8")
        record = json.loads(raw)
        arrays = {}
        for name, described in record["arrays"].items():
            array = bundle[name]
            if list(array.shape) != described["shape"] or str(array.dtype) != described["dtype"]:
                raise ValueError(
                    f"checkpoint entry {name!r} does not match its metadata "
                    f"({array.shape}/{array.dtype} vs {described})"
                )
            arrays[name] = array
    return arrays, record["meta"]

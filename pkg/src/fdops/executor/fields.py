from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["Field", "allocate", "dump_snapshot", "load_snapshot"]


@dataclass
class Field:
    """Dense storage for one grid function, halo included on every side.

    Time functions carry a leading axis of ``time_order + 1`` levels.
    """

    function: object
    data: np.ndarray

    @property
    def halo(self):
        return self.function.halo

    def interior(self, level=None):
        h = self.halo
        core = tuple(slice(h, h + n) for n in self.function.grid.shape)
        if self.function.is_time_function:
            return self.data[(level,) + core]
        return self.data[core]


def allocate(function, values=None, dtype=np.float32):
    """Zero-initialised field; ``values`` (interior shaped) fills time-invariant data."""
    padded = tuple(n + 2 * function.halo for n in function.grid.shape)
    if function.is_time_function:
        data = np.zeros((function.levels,) + padded, dtype=dtype)
        if values is not None:
            raise ValueError(f"{function.name}: initial data for time functions is always zero")
        return Field(function, data)
    if values is None:
        return Field(function, np.zeros(padded, dtype=dtype))
    values = np.broadcast_to(np.asarray(values, dtype=dtype), function.grid.shape)
    # edge padding keeps e.g. m strictly positive in the halo
    return Field(function, np.pad(values, function.halo, mode="edge").astype(dtype))


def dump_snapshot(prefix, array, spacing, step):
    """Write ``prefix.bin`` (little-endian float32, C order) and a ``prefix.txt`` sidecar."""
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    arr = np.ascontiguousarray(array, dtype="<f4")
    prefix.with_suffix(".bin").write_bytes(arr.tobytes(order="C"))
    prefix.with_suffix(".txt").write_text(
        f"shape={','.join(map(str, arr.shape))}\n"
        f"spacing={','.join(repr(float(h)) for h in spacing)}\n"
        f"step={int(step)}\n")
    return prefix.with_suffix(".bin")


def load_snapshot(prefix):
    prefix = Path(prefix)
    meta = dict(line.split("=", 1) for line in prefix.with_suffix(".txt").read_text().split())
    shape = tuple(int(n) for n in meta["shape"].split(","))
    data = np.frombuffer(prefix.with_suffix(".bin").read_bytes(), dtype="<f4").reshape(shape)
    spacing = tuple(float(h) for h in meta["spacing"].split(","))
    return data, spacing, int(meta["step"])

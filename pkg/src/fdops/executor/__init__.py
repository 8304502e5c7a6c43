"""Reference executor for compiled wave-propagation stencils."""
from .fields import Field, allocate, dump_snapshot, load_snapshot
from .interpreter import HaloAccessError, InstabilityError, RunResult, evaluate, run
from .problem import (PointSource, WaveProblem, cfl_dt, damp_mask, default_damp_max,
                      ricker_wavelet)

__all__ = ["Field", "allocate", "dump_snapshot", "load_snapshot", "HaloAccessError",
           "InstabilityError", "RunResult", "evaluate", "run", "PointSource", "WaveProblem",
           "cfl_dt", "damp_mask", "default_damp_max", "ricker_wavelet"]

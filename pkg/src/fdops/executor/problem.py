from dataclasses import dataclass, field
from math import pi, sqrt

import numpy as np

from ..pipeline import build
from ..symbolic import Equation, GridFunction, TimeSeries, fd_coefficients
from .interpreter import run as run_iet

__all__ = ["PointSource", "WaveProblem", "ricker_wavelet", "cfl_dt", "damp_mask",
           "default_damp_max"]


def ricker_wavelet(peak_frequency, dt, steps):
    """Ricker pulse peaking at ``t = 1/peak_frequency``, scaled to max amplitude 1."""
    if peak_frequency <= 0:
        raise ValueError("peak frequency must be positive")
    t = np.arange(int(steps)) * float(dt)
    a = (pi * peak_frequency * (t - 1.0 / peak_frequency)) ** 2
    w = (1.0 - 2.0 * a) * np.exp(-a)
    peak = np.max(np.abs(w)) if len(w) else 1.0
    return w / peak


def _stencil_weight(so):
    return sum(abs(c) for _, c in fd_coefficients(2, so))


def cfl_dt(problem, safety=0.9):
    """Stable time step for the leapfrog scheme at the problem's space order."""
    grid = problem.grid
    cmax = float(np.max(problem.velocity))
    dt = min(grid.spacing) / cmax / sqrt(grid.ndim) * safety
    return dt * float(_stencil_weight(2) / _stencil_weight(problem.space_order))


def damp_mask(grid, halo, width=10, d_max=1.0):
    """Linear taper: 0 in the interior, ``d_max`` on the outermost updated ring."""
    dist = None
    for axis, n in enumerate(grid.shape):
        i = np.arange(n)
        d = np.minimum(i - halo, n - 1 - halo - i).clip(min=0)
        shape = [1] * grid.ndim
        shape[axis] = n
        d = d.reshape(shape)
        dist = d if dist is None else np.minimum(dist, d)
    taper = np.clip((width - dist) / float(width), 0.0, 1.0) if width > 0 else 0.0 * dist
    return np.broadcast_to(d_max * taper, grid.shape).astype(np.float64)


@dataclass
class PointSource:
    coordinates: tuple
    wavelet: np.ndarray


@dataclass
class WaveProblem:
    """Damped acoustic wave equation ``m u_tt + damp u_t - lap(u) = q``.

    ``velocity`` is a scalar or an interior-shaped array (m/s); ``damp`` is an
    interior-shaped array or ``None`` for no absorption; ``dt=None`` picks
    :func:`cfl_dt`.
    """

    grid: object
    velocity: object
    steps: int
    source: PointSource = None
    dt: float = None
    damp: object = None
    space_order: int = 2
    time_order: int = 2
    _functions: dict = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        c = np.asarray(self.velocity, dtype=np.float64)
        if np.any(c <= 0):
            raise ValueError("velocity must be positive everywhere")
        if self.damp is not None and np.any(np.asarray(self.damp) < 0):
            raise ValueError("damp must be nonnegative")
        if self.dt is None:
            self.dt = cfl_dt(self)
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.source is not None:
            h = self.space_order // 2
            for p, n in zip(self.source.coordinates, self.grid.shape):
                if not h <= p <= n - 1 - h:
                    raise ValueError(
                        f"source {self.source.coordinates} outside the updated interior")

    @property
    def functions(self):
        if self._functions is None:
            g, so = self.grid, self.space_order
            self._functions = {
                "u": GridFunction("u", g, so, self.time_order),
                "m": GridFunction("m", g, so),
                "damp": GridFunction("damp", g, so),
            }
        return self._functions

    @property
    def m(self):
        return 1.0 / np.asarray(self.velocity, dtype=np.float64) ** 2

    def equations(self):
        """``(equations, targets)``: the stencil update then the source injection."""
        f = self.functions
        u, m, damp = f["u"], f["m"], f["damp"]
        eqs = [Equation(m * u.dt2 + damp * u.dt - u.laplace)]
        if self.source is not None:
            dt = self.grid.time_dim.spacing
            src = TimeSeries("src")
            eqs.append(Equation(u.forward, u.forward + src * dt ** 2 / m,
                                point=self.source.coordinates))
        return eqs, [u] * len(eqs)

    def compile(self, level="basic"):
        eqs, targets = self.equations()
        return build(eqs, targets, level, self.steps, self.time_order)

    def initial(self):
        damp = np.zeros(self.grid.shape) if self.damp is None else self.damp
        return {"m": np.broadcast_to(self.m, self.grid.shape), "damp": damp}

    def scalars(self):
        s = dict(self.grid.spacing_map)
        s[self.grid.time_dim.spacing.name] = self.dt
        return s

    def series(self):
        if self.source is None:
            return {}
        w = np.zeros(self.steps)
        n = min(self.steps, len(self.source.wavelet))
        w[:n] = self.source.wavelet[:n]
        return {"src": w}

    def run(self, iet, **kwargs):
        return run_iet(iet, self.initial(), self.scalars(), self.series(), **kwargs)


def default_damp_max(velocity, grid, width):
    """Damping strong enough to absorb a wave within a few layer crossings."""
    cmin = float(np.min(velocity))
    return 6.0 / (cmin * max(width, 1) * min(grid.spacing))


"""``fdops`` command line: generate OPS sources, run the reference model, roofline reports."""
import argparse
import hashlib
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .executor import (InstabilityError, PointSource, WaveProblem, damp_mask, default_damp_max,
                       dump_snapshot, ricker_wavelet)
from .opsgen import emit_reference_c, generate
from .pipeline import DseLevel
from .roofline import (ProfileFormatError, bundled, emit_chart, ingest_profiles, load_device,
                       roofline_point)
from .symbolic import Grid

__all__ = ["ProblemConfig", "ConfigError", "ConfigParseError", "main", "iet_digest",
           "cmd_generate", "cmd_run", "cmd_roofline"]

EXIT_OK, EXIT_VALIDATION, EXIT_INSTABILITY, EXIT_PARSE = 0, 2, 3, 4


class ConfigError(ValueError):
    """A config value failed validation; ``field`` names the offending key."""

    def __init__(self, field_, message):
        super().__init__(f"{field_}: {message}")
        self.field = field_


class ConfigParseError(ValueError):
    pass


def _ints(text):
    return tuple(int(v) for v in text.split(","))


def _floats(text):
    return tuple(float(v) for v in text.split(","))


def _auto_float(text):
    return None if text.strip().lower() == "auto" else float(text)


_PARSERS = {
    "name": str, "shape": _ints, "spacing": _floats, "space_order": int, "time_order": int,
    "dt": _auto_float, "steps": int, "velocity": str, "damp_width": int,
    "damp_max": _auto_float, "source": _ints, "wavelet": str, "frequency": float,
    "dse": str, "out": str,
}


@dataclass
class ProblemConfig:
    """Flat ``key=value`` problem description (see the README for the keys)."""

    name: str = "wave"
    shape: tuple = (32, 32, 32)
    spacing: tuple = None
    space_order: int = 2
    time_order: int = 2
    dt: float = None            # None: derive from the CFL bound
    steps: int = 100
    velocity: str = "1500"      # constant in m/s, or a .npy / raw float32 .bin file
    damp_width: int = 10
    damp_max: float = None      # None: strong enough to absorb within the layer
    source: tuple = None        # None: grid centre
    wavelet: str = "ricker"
    frequency: float = 15.0
    dse: str = "basic"
    out: str = "out"
    base_dir: Path = field(default=Path("."), repr=False)

    @classmethod
    def from_text(cls, text, base_dir="."):
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigParseError(f"line {lineno}: expected key=value, got {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in _PARSERS:
                raise ConfigParseError(f"line {lineno}: unknown key {key!r}")
            try:
                values[key] = _PARSERS[key](value)
            except ValueError:
                raise ConfigParseError(f"line {lineno}: bad value for {key}: {value!r}") from None
        return cls(**values, base_dir=Path(base_dir))

    @classmethod
    def from_file(cls, path):
        path = Path(path)
        return cls.from_text(path.read_text(), path.parent)

    def validate(self):
        nd = len(self.shape)
        if nd < 1 or any(n < 1 for n in self.shape):
            raise ConfigError("shape", f"needs positive extents, got {self.shape}")
        spacing = self.spacing or (10.0,) * nd
        if len(spacing) != nd or any(h <= 0 for h in spacing):
            raise ConfigError("spacing", f"needs {nd} positive values, got {spacing}")
        if self.space_order < 2 or self.space_order % 2:
            raise ConfigError("space_order", f"must be an even integer >= 2, got "
                                             f"{self.space_order}")
        if self.time_order < 2:
            raise ConfigError("time_order", f"must be >= 2, got {self.time_order}")
        if self.steps < 1:
            raise ConfigError("steps", f"must be >= 1, got {self.steps}")
        if self.dt is not None and self.dt <= 0:
            raise ConfigError("dt", "must be positive or 'auto'")
        if self.dse not in {lvl.value for lvl in DseLevel}:
            raise ConfigError("dse", f"must be basic or aggressive, got {self.dse!r}")
        if self.damp_width < 0:
            raise ConfigError("damp_width", "must be >= 0")
        if self.damp_max is not None and self.damp_max < 0:
            raise ConfigError("damp_max", "must be >= 0 or 'auto'")
        if self.wavelet not in ("ricker", "impulse"):
            raise ConfigError("wavelet", f"unknown kind {self.wavelet!r}")
        if self.frequency <= 0:
            raise ConfigError("frequency", "must be positive")
        halo = self.space_order // 2
        if any(n <= 2 * halo for n in self.shape):
            raise ConfigError("shape", f"too small for space_order {self.space_order}")
        src = self.source or tuple(n // 2 for n in self.shape)
        if len(src) != nd or any(not halo <= p <= n - 1 - halo for p, n in zip(src, self.shape)):
            raise ConfigError("source", f"{src} is outside the updated interior")
        return replace(self, spacing=tuple(spacing), source=tuple(src))

    def load_velocity(self):
        text = self.velocity.strip()
        try:
            c = float(text)
        except ValueError:
            path = self.base_dir / text
            if not path.exists():
                raise ConfigError("velocity", f"not a number and no such file: {text}") from None
            if path.suffix == ".npy":
                c = np.load(path)
            else:
                c = np.fromfile(path, dtype="<f4")
            try:
                c = np.asarray(c, dtype=np.float64).reshape(self.shape)
            except ValueError:
                raise ConfigError("velocity", f"{text} does not hold {self.shape} values") \
                    from None
        if np.any(np.asarray(c) <= 0):
            raise ConfigError("velocity", "must be positive everywhere")
        return c

    def problem(self):
        """Build the :class:`WaveProblem` this config describes."""
        cfg = self.validate()
        grid = Grid(cfg.shape, cfg.spacing)
        c = cfg.load_velocity()
        probe = WaveProblem(grid, c, cfg.steps, None, cfg.dt, None, cfg.space_order,
                            cfg.time_order)
        dt = probe.dt
        if cfg.wavelet == "ricker":
            w = ricker_wavelet(cfg.frequency, dt, cfg.steps)
        else:
            w = np.zeros(cfg.steps)
            w[0] = 1.0
        damp = None
        if cfg.damp_width > 0:
            d_max = cfg.damp_max if cfg.damp_max is not None else \
                default_damp_max(c, grid, cfg.damp_width)
            damp = damp_mask(grid, cfg.space_order // 2, cfg.damp_width, d_max)
        return WaveProblem(grid, c, cfg.steps, PointSource(cfg.source, w), dt, damp,
                           cfg.space_order, cfg.time_order)


def iet_digest(iet):
    """Content hash of an IET, via its reference C rendering."""
    return hashlib.sha256(emit_reference_c(iet).encode()).hexdigest()


def _manifest_path(cfg):
    return Path(cfg.out) / f"{cfg.name}.manifest"


def _read_manifest(path):
    if not path.exists():
        return {}
    return dict(line.split("=", 1) for line in path.read_text().split() if "=" in line)


# ---------------------------------------------------------------------------
# subcommands

def cmd_generate(cfg, write_inputs=False, stdout=None):
    stdout = stdout or sys.stdout
    problem = cfg.problem()
    counts = {}
    compiled = {}
    for lvl in DseLevel:
        compiled[lvl.value] = problem.compile(lvl)
        counts[lvl.value] = compiled[lvl.value].flop_count
    chosen = compiled[cfg.dse]
    out = Path(cfg.out)
    prog = generate(chosen, cfg.name, problem.scalars())
    written = prog.write(out)
    ref = out / f"{cfg.name}_reference.c"
    ref.write_text(emit_reference_c(chosen.iet, f"{cfg.name}_reference"))
    written.append(ref)
    digest = iet_digest(chosen.iet)
    _manifest_path(cfg).write_text(f"dse={cfg.dse}\niet_sha256={digest}\n")
    if write_inputs:
        init = problem.initial()
        for name in ("m", "damp"):
            np.asarray(init[name], dtype="<f4").tofile(out / f"{cfg.name}_{name}.bin")
        np.asarray(problem.series()["src"], dtype="<f4").tofile(out / f"{cfg.name}_src.bin")
    for lvl, n in counts.items():
        print(f"flop_count[{lvl}] = {n}", file=stdout)
    print(f"flop_ratio basic/aggressive = {counts['basic'] / counts['aggressive']:.3f}",
          file=stdout)
    print(f"iet_sha256 = {digest}", file=stdout)
    for path in written:
        print(f"wrote {path}", file=stdout)
    return counts


def cmd_run(cfg, snapshots=0, stdout=None, stderr=None):
    stdout, stderr = stdout or sys.stdout, stderr or sys.stderr
    problem = cfg.problem()
    compiled = problem.compile(cfg.dse)
    digest = iet_digest(compiled.iet)
    manifest = _read_manifest(_manifest_path(cfg))
    if manifest.get("dse") == cfg.dse and manifest.get("iet_sha256") not in (None, digest):
        raise ConfigError("out", "emitted sources were generated from a different IET; "
                                 "re-run 'generate'")
    out = Path(cfg.out)
    callback = None
    if snapshots:
        u = problem.functions["u"]

        def snap(step, fields_):
            if (step + 1) % snapshots == 0:
                f = fields_["u"]
                dump_snapshot(out / "snapshots" / f"{cfg.name}_u_{step + 1:06d}",
                              f.interior((step + 1) % u.levels), problem.grid.spacing,
                              step + 1)

        callback = snap

    t0 = time.perf_counter()
    result = problem.run(compiled.iet, callback=callback)
    wall = time.perf_counter() - t0
    points = int(np.prod(cfg.shape))
    interior = sum(int(np.prod([b.size for b in oc.cluster.iteration_space])) * oc.flop_count
                   for oc in compiled.optimized if not oc.cluster.is_point)
    point_flops = sum(oc.flop_count for oc in compiled.optimized if oc.cluster.is_point)
    final = result.final()
    lines = [
        f"dse = {cfg.dse}",
        f"grid = {'x'.join(map(str, cfg.shape))} ({points} points)",
        f"steps = {cfg.steps}",
        f"dt = {problem.dt:.9g}",
        f"flop_count = {compiled.flop_count}",
        f"estimated_flops = {(interior + point_flops) * cfg.steps}",
        f"max_abs_u = {float(np.max(np.abs(final))):.9g}",
        f"peak_abs_u = {max(result.max_abs):.9g}",
        f"iet_sha256 = {digest}",
    ]
    summary = "\n".join(lines) + "\n"
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{cfg.name}_summary.txt").write_text(summary)
    stdout.write(summary)
    print(f"wall_time_s = {wall:.3f}", file=stderr)
    return summary


def _resolve_data(arg, suffix):
    path = Path(arg)
    if path.exists():
        return path
    candidate = bundled(arg + suffix)
    if candidate.exists():
        return candidate
    raise FileNotFoundError(f"no such file: {arg}")


def cmd_roofline(profiles, device, out, stdout=None):
    stdout = stdout or sys.stdout
    dev = load_device(_resolve_data(device, ".device"))
    source = _resolve_data(profiles, "_profiles.csv")
    records = ingest_profiles(source)
    if not records:
        raise ConfigError("profiles", "profile file holds no records")
    points = [roofline_point(r, dev) for r in records]
    stem = source.stem
    svg, dat = emit_chart(points, dev).write(Path(out) / stem)
    print(f"device = {dev.name}; ridge point = {dev.ridge_point:.2f} FLOP/Byte", file=stdout)
    for r, p in zip(records, points):
        flag = "; ".join(r.inconsistencies())
        print(f"so={r.space_order:<3d} dse={r.dse:<10s} oi={p.oi:7.3f} perf={p.performance:9.2f} "
              f"attainable={p.attainable:9.2f} pct={100 * p.pct_of_attainable:6.2f}% "
              f"{p.bound.value}-bound" + (f"  [inconsistent: {flag}]" if flag else ""),
              file=stdout)
    print(f"wrote {svg}\nwrote {dat}", file=stdout)
    return points


# ---------------------------------------------------------------------------

def _parser():
    p = argparse.ArgumentParser(prog="fdops", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def problem_args(sp):
        sp.add_argument("--config", help="key=value problem file (defaults apply otherwise)")
        sp.add_argument("--dse", choices=[lvl.value for lvl in DseLevel])
        sp.add_argument("--space-order", type=int)
        sp.add_argument("--out")

    g = sub.add_parser("generate", help="emit OPS kernel/host sources and reference C")
    problem_args(g)
    g.add_argument("--inputs", action="store_true",
                   help="also write m, damp and wavelet binaries read by the host program")
    r = sub.add_parser("run", help="execute the reference model")
    problem_args(r)
    r.add_argument("--snapshots", type=int, default=0, metavar="EVERY",
                   help="dump u every EVERY steps")
    rl = sub.add_parser("roofline", help="roofline chart and table from profile counters")
    rl.add_argument("--profiles", required=True,
                    help="profile CSV (or bundled name: titan_z, v100)")
    rl.add_argument("--device", required=True,
                    help="device key=value file (or bundled name: titan_z, v100)")
    rl.add_argument("--out", default="out")
    return p


def _config(args):
    cfg = ProblemConfig.from_file(args.config) if args.config else ProblemConfig()
    overrides = {k: v for k, v in (("dse", args.dse), ("space_order", args.space_order),
                                   ("out", args.out)) if v is not None}
    return replace(cfg, **overrides)


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        if args.command == "roofline":
            cmd_roofline(args.profiles, args.device, args.out)
            return EXIT_OK
        cfg = _config(args)
        if args.command == "generate":
            cmd_generate(cfg, args.inputs)
        else:
            if args.snapshots < 0:
                raise ConfigError("snapshots", "must be >= 0")
            cmd_run(cfg, args.snapshots)
    except (ConfigParseError, ProfileFormatError) as exc:
        print(f"fdops: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InstabilityError as exc:
        print(f"fdops: unstable run: {exc}", file=sys.stderr)
        return EXIT_INSTABILITY
    except (ConfigError, ValueError, FileNotFoundError) as exc:
        print(f"fdops: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())


"""Roofline model: device specs, profile ingestion, derived points and charts.

Operational intensity counts 32-byte DRAM transactions; performance is the
per-invocation flop count times the number of time steps over the total run
time (the counters are per kernel launch, the time covers the whole run).
"""
import csv
import enum
import math
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

__all__ = ["TRANSACTION_BYTES", "DeviceSpec", "ProfileRecord", "RooflinePoint", "Bound",
           "ProfileFormatError", "operational_intensity", "performance", "attainable_peak",
           "classify", "roofline_point", "ingest_profiles", "load_device", "parse_device",
           "emit_chart", "chart_table", "Chart", "TITAN_Z", "V100", "bundled"]

TRANSACTION_BYTES = 32


class ProfileFormatError(ValueError):
    """Malformed profile or device file; the message names the line or key."""


class Bound(str, enum.Enum):
    memory = "memory"
    compute = "compute"


@dataclass(frozen=True)
class DeviceSpec:
    name: str
    bandwidth: float     # GB/s, aggregate
    sp_peak: float       # GFLOP/s
    dp_peak: float       # GFLOP/s
    memory: float        # GB

    def __post_init__(self):
        for k in ("bandwidth", "sp_peak", "dp_peak", "memory"):
            if not getattr(self, k) > 0:
                raise ValueError(f"{self.name}: {k} must be positive")

    @property
    def ridge_point(self):
        return self.sp_peak / self.bandwidth


TITAN_Z = DeviceSpec("GTX Titan Z", 672.0, 4746.0, 1582.0, 12.0)
V100 = DeviceSpec("Tesla V100", 900.0, 14000.0, 7000.0, 16.0)


@dataclass(frozen=True)
class ProfileRecord:
    space_order: int
    dse: str
    fp32_per_invocation: int
    mem_transactions_per_invocation: int
    total_time: float
    timesteps: int
    runs: int
    reported_oi: float = None
    reported_gflops: float = None

    def __post_init__(self):
        if min(self.fp32_per_invocation, self.mem_transactions_per_invocation, self.runs) < 0:
            raise ValueError("counts must be nonnegative")
        if self.timesteps < 1:
            raise ValueError("timesteps must be >= 1")

    @property
    def label(self):
        return (self.space_order, self.dse)

    def inconsistencies(self, rel_tol=0.005, oi_tol=0.02):
        """Reported columns the raw counts do not reproduce."""
        out = []
        if self.reported_oi is not None and self.mem_transactions_per_invocation > 0:
            oi = operational_intensity(self.fp32_per_invocation,
                                       self.mem_transactions_per_invocation)
            if abs(oi - self.reported_oi) > oi_tol:
                out.append(f"OI {oi:.3f} vs reported {self.reported_oi}")
        if self.reported_gflops is not None and self.total_time > 0:
            perf = performance(self)
            if abs(perf - self.reported_gflops) > rel_tol * self.reported_gflops:
                out.append(f"performance {perf:.2f} GFLOP/s vs reported {self.reported_gflops}")
        return out


@dataclass(frozen=True)
class RooflinePoint:
    oi: float
    performance: float
    attainable: float
    pct_of_attainable: float
    bound: Bound
    label: tuple


def operational_intensity(fp_ops, mem_transactions):
    """FLOP per byte with 32-byte transactions."""
    if mem_transactions <= 0:
        raise ValueError("operational intensity needs a positive transaction count")
    return fp_ops / (mem_transactions * TRANSACTION_BYTES)


def performance(rec):
    """GFLOP/s over the whole run: ``fp32 * timesteps / total_time``."""
    if not rec.total_time > 0:
        raise ValueError(f"total time must be positive, got {rec.total_time}")
    return rec.fp32_per_invocation * rec.timesteps / rec.total_time / 1e9


def attainable_peak(dev, oi):
    if oi <= 0:
        raise ValueError("operational intensity must be positive")
    return min(dev.sp_peak, dev.bandwidth * oi)


def classify(dev, pt):
    """Memory-bound strictly left of the ridge point; the ridge itself is compute-bound."""
    oi = pt.oi if isinstance(pt, RooflinePoint) else pt
    return Bound.memory if oi < dev.ridge_point else Bound.compute


def roofline_point(rec, dev):
    oi = operational_intensity(rec.fp32_per_invocation, rec.mem_transactions_per_invocation)
    perf = performance(rec)
    att = attainable_peak(dev, oi)
    if perf > att * (1 + 1e-6):
        warnings.warn(f"{rec.label}: {perf:.2f} GFLOP/s exceeds the {dev.name} roof "
                      f"({att:.2f})", stacklevel=2)
    return RooflinePoint(oi, perf, att, perf / att, classify(dev, oi), rec.label)


# ---------------------------------------------------------------------------
# file formats

PROFILE_HEADER = ["space_order", "dse", "fp32_count", "mem_transactions", "total_time_s",
                  "timesteps", "runs"]
OPTIONAL_COLUMNS = ["reported_oi", "reported_gflops"]


def _count(text):
    s = text.strip().replace(" ", "")
    if "," in s:
        groups = s.split(",")
        if not all(len(g) == 3 for g in groups[1:]):
            raise ValueError(f"bad thousands grouping in {text!r}")
        s = "".join(groups)
    if not s.lstrip("-").isdigit():
        raise ValueError(f"not an integer: {text!r}")
    return int(s)


def _real(text):
    """Float with ``1,150.01`` thousands separators or a ``135,73`` decimal comma."""
    s = text.strip().replace(" ", "")
    if "," in s and "." in s:
        s = s.replace(",", "")
    elif s.count(",") == 1 and len(s.rpartition(",")[2]) != 3:
        s = s.replace(",", ".")
    elif "," in s:
        return float(_count(s))
    return float(s)


def ingest_profiles(source):
    """Read profile rows from a path or a text stream.

    Thousands separators (``"1,450,112,268"``, quoted) and decimal commas
    (``"135,73"``) are normalized.  Malformed rows raise
    :class:`ProfileFormatError` naming the line.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return _ingest(fh)
    return _ingest(source)


def _ingest(fh):
    records = []
    rows = csv.reader(fh)
    header = None
    for row in rows:
        lineno = rows.line_num
        if not row or all(not c.strip() for c in row) or row[0].lstrip().startswith("#"):
            continue
        cells = [c.strip() for c in row]
        if header is None and cells[0] == "space_order":
            header = cells
            if header[:7] != PROFILE_HEADER or any(c not in OPTIONAL_COLUMNS
                                                   for c in header[7:]):
                raise ProfileFormatError(f"line {lineno}: unexpected header {cells}")
            continue
        cols = header or PROFILE_HEADER
        if len(cells) not in (7, len(cols)):
            raise ProfileFormatError(
                f"line {lineno}: expected {len(cols)} fields, got {len(cells)}")
        try:
            so = _count(cells[0])
            dse = cells[1].lower()
            if dse not in ("basic", "aggressive"):
                raise ValueError(f"unknown dse level {cells[1]!r}")
            extra = {k: _real(c) for k, c in zip(cols[7:], cells[7:]) if c}
            rec = ProfileRecord(so, dse, _count(cells[2]), _count(cells[3]), _real(cells[4]),
                                _count(cells[5]), _count(cells[6]),
                                extra.get("reported_oi"), extra.get("reported_gflops"))
        except ValueError as exc:
            raise ProfileFormatError(f"line {lineno}: {exc}") from None
        if rec.total_time <= 0:
            raise ProfileFormatError(f"line {lineno}: total time must be positive")
        records.append(rec)
    return records


DEVICE_KEYS = {"name": str, "bandwidth_gbs": float, "sp_peak_gflops": float,
               "dp_peak_gflops": float, "memory_gb": float}


def load_device(path):
    """Read a ``key=value`` device file."""
    return parse_device(Path(path).read_text())


def parse_device(text):
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ProfileFormatError(f"line {lineno}: expected key=value, got {line!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        if k not in DEVICE_KEYS:
            raise ProfileFormatError(f"line {lineno}: unknown device key {k!r}")
        try:
            values[k] = DEVICE_KEYS[k](v)
        except ValueError:
            raise ProfileFormatError(f"line {lineno}: bad value for {k}: {v!r}") from None
    for k in DEVICE_KEYS:
        if k not in values:
            raise ProfileFormatError(f"device file is missing key {k!r}")
    try:
        return DeviceSpec(values["name"], values["bandwidth_gbs"], values["sp_peak_gflops"],
                          values["dp_peak_gflops"], values["memory_gb"])
    except ValueError as exc:
        raise ProfileFormatError(str(exc)) from None


def bundled(name):
    """Path of a data file shipped with the package (profiles and device specs)."""
    return Path(str(resources.files("fdops") / "data" / name))


# ---------------------------------------------------------------------------
# chart

@dataclass
class Chart:
    svg: str
    table: str

    def write(self, prefix):
        prefix = Path(prefix)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        svg_path, dat_path = prefix.with_suffix(".svg"), prefix.with_suffix(".dat")
        svg_path.write_text(self.svg)
        dat_path.write_text(self.table)
        return svg_path, dat_path


def _label_text(label):
    so, dse = label
    return f"so{so}-{dse}"


def chart_table(points):
    lines = ["# oi_flop_per_byte perf_gflops attainable_gflops pct_of_attainable label"]
    for p in points:
        lines.append(f"{p.oi:.4f} {p.performance:.2f} {p.attainable:.2f} "
                     f"{100 * p.pct_of_attainable:.2f} {_label_text(p.label)}")
    return "\n".join(lines) + "\n"


def _decades(lo, hi):
    return range(math.floor(math.log10(lo)), math.ceil(math.log10(hi)) + 1)


def emit_chart(points, dev, title=None):
    """Log-log roofline SVG (bandwidth roof, compute roof, ridge, points) plus data table."""
    if not points:
        raise ValueError("a roofline chart needs at least one point")
    ridge = dev.ridge_point
    xs = [p.oi for p in points] + [ridge]
    ys = [p.performance for p in points] + [dev.sp_peak]
    x0, x1 = 10 ** math.floor(math.log10(min(xs) / 2)), 10 ** math.ceil(math.log10(max(xs) * 2))
    y0, y1 = 10 ** math.floor(math.log10(min(ys) / 2)), 10 ** math.ceil(math.log10(max(ys) * 2))
    W, H, ml, mr, mt, mb = 720, 480, 70, 20, 40, 50

    def px(x):
        return ml + (math.log10(x) - math.log10(x0)) / (math.log10(x1) - math.log10(x0)) * (
            W - ml - mr)

    def py(y):
        return H - mb - (math.log10(y) - math.log10(y0)) / (math.log10(y1) - math.log10(y0)) * (
            H - mt - mb)

    title = title or f"Roofline: {dev.name}"
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
           f'<title>{_esc(title)}</title>',
           f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
           f'<text x="{W / 2:.1f}" y="20" text-anchor="middle" font-size="14">{_esc(title)}'
           f'</text>']
    for k in _decades(x0, x1):
        x = px(10.0 ** k)
        out.append(f'<line class="grid" x1="{x:.1f}" y1="{mt}" x2="{x:.1f}" y2="{H - mb}" '
                   f'stroke="#ddd"/>')
        out.append(f'<text x="{x:.1f}" y="{H - mb + 15}" text-anchor="middle">{10.0 ** k:g}'
                   f'</text>')
    for k in _decades(y0, y1):
        y = py(10.0 ** k)
        out.append(f'<line class="grid" x1="{ml}" y1="{y:.1f}" x2="{W - mr}" y2="{y:.1f}" '
                   f'stroke="#ddd"/>')
        out.append(f'<text x="{ml - 5}" y="{y + 4:.1f}" text-anchor="end">{10.0 ** k:g}</text>')
    out.append(f'<text x="{W / 2:.1f}" y="{H - 10}" text-anchor="middle">'
               f'Operational intensity (FLOP/Byte)</text>')
    out.append(f'<text x="15" y="{H / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 15 {H / 2:.1f})">Performance (GFLOP/s)</text>')
    xb = max(x0, y0 / dev.bandwidth)
    out.append(f'<polyline class="roof" fill="none" stroke="black" stroke-width="2" '
               f'points="{px(xb):.1f},{py(dev.bandwidth * xb):.1f} {px(ridge):.1f},'
               f'{py(dev.sp_peak):.1f} {px(x1):.1f},{py(dev.sp_peak):.1f}"/>')
    out.append(f'<circle class="ridge" cx="{px(ridge):.1f}" cy="{py(dev.sp_peak):.1f}" r="3" '
               f'fill="black"/>')
    out.append(f'<text x="{px(ridge) + 5:.1f}" y="{py(dev.sp_peak) - 6:.1f}">ridge '
               f'{ridge:.2f} FLOP/B, {dev.sp_peak:g} GFLOP/s</text>')
    colors = {"basic": "#1f77b4", "aggressive": "#d62728"}
    for p in points:
        so, dse = p.label
        cx, cy = px(p.oi), py(p.performance)
        out.append(f'<circle class="point" data-label="{_label_text(p.label)}" cx="{cx:.1f}" '
                   f'cy="{cy:.1f}" r="4" fill="{colors.get(dse, "gray")}"/>')
        out.append(f'<text x="{cx + 6:.1f}" y="{cy + 4:.1f}">so {so}, '
                   f'{100 * p.pct_of_attainable:.1f}%</text>')
    out.append("</svg>")
    return Chart("\n".join(out) + "\n", chart_table(points))


def _esc(s):
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")

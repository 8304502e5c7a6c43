"""OPS host program emission."""
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..pipeline.iet import iet_functions
from .kernel import kernel_source, outline_kernel
from .printer import CPrinter

__all__ = ["ProgramMeta", "OpsProgram", "emit_program", "generate", "float_literal"]


def float_literal(x):
    """Single-precision C literal for a host value, always with a decimal point."""
    s = f"{float(np.float32(x)):.9g}"
    if not any(c in s for c in ".en"):
        s += ".0"
    return s + "F"


@dataclass
class ProgramMeta:
    """What the host program needs beyond the kernels."""

    name: str
    grid: object
    functions: list
    steps: int
    levels: int
    scalars: dict = field(default_factory=dict)


@dataclass
class OpsProgram:
    name: str
    kernels_header: str
    host: str

    @property
    def files(self):
        return {f"{self.name}_kernels.h": self.kernels_header, f"{self.name}_host.c": self.host}

    def write(self, directory):
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        out = []
        for fname, text in self.files.items():
            path = directory / fname
            path.write_text(text)
            out.append(path)
        return out


_READ_FIELD = """\
static float *read_field(const char *path, size_t n)
{
  float *buf = (float *)calloc(n, sizeof(float));
  FILE *fp = fopen(path, "rb");
  if (fp != NULL) {
    if (fread(buf, sizeof(float), n, fp) != n)
      fprintf(stderr, "short read: %s\\n", path);
    fclose(fp);
  }
  return buf;
}
"""


def _ilist(values):
    return "{" + ", ".join(str(v) for v in values) + "}"


def _emit_header(kernels, meta):
    dims = meta.grid.dimensions
    guard = f"{meta.name.upper()}_KERNELS_H"
    parts = [f"#ifndef {guard}", f"#define {guard}", ""]
    for k in kernels:
        parts.append(kernel_source(k, dims))
    parts.append(f"#endif /* {guard} */")
    return "\n".join(parts) + "\n"


def _collect_consts(kernels):
    consts = {}
    for k in kernels:
        for s, v in k.consts:
            if s.name in consts and consts[s.name] != v:
                raise ValueError(f"kernels disagree on the definition of constant {s.name}")
            consts[s.name] = v
    return consts


def _emit_host(kernels, meta):
    g = meta.grid
    nd = g.ndim
    pr = CPrinter()
    levels = meta.levels
    consts = _collect_consts(kernels)
    needed = []
    for k in kernels:
        for s in k.scalars():
            if s not in consts and s not in needed:
                needed.append(s)
    missing = [s for s in needed if s not in meta.scalars]
    if missing:
        raise ValueError(f"no value for scalar(s): {', '.join(missing)}")
    series = []
    for k in kernels:
        series += [s for s in k.globals if s not in series]

    L = []
    w = L.append
    w(f"/* {meta.name}_host.c: OPS host program */")
    w("#include <stdio.h>")
    w("#include <stdlib.h>")
    w(f"#define OPS_{nd}D")
    w('#include "ops_seq.h"')
    w(f'#include "{meta.name}_kernels.h"')
    w("")
    w(_READ_FIELD)
    w("int main(int argc, char **argv)")
    w("{")
    w("  ops_init(argc, argv, 1);")
    w("")
    w(f'  ops_block grid = ops_decl_block({nd}, "grid");')
    w("")
    w(f"  int size[] = {_ilist(g.shape)};")
    w(f"  int base[] = {_ilist([0] * nd)};")
    for f in meta.functions:
        w(f"  int {f.name}_d_m[] = {_ilist([-f.halo] * nd)};")
        w(f"  int {f.name}_d_p[] = {_ilist([f.halo] * nd)};")
    for f in meta.functions:
        decl = (f"ops_decl_dat(grid, 1, size, base, {f.name}_d_m, {f.name}_d_p, "
                f"(float *)NULL, \"float\"")
        if f.is_time_function:
            w(f"  ops_dat {f.name}_dat[{levels}];")
            for lvl in range(levels):
                w(f"  {f.name}_dat[{lvl}] = {decl}, \"{f.name}_{lvl}\");")
        else:
            w(f"  ops_dat {f.name}_dat = {decl}, \"{f.name}\");")
    w("")
    for s in needed:
        w(f"  float {s} = {float_literal(meta.scalars[s])};")
        w(f'  ops_decl_const("{s}", 1, "float", &{s});')
    for name, v in consts.items():
        w(f"  float {name} = {pr(v)};")
        w(f'  ops_decl_const("{name}", 1, "float", &{name});')
    w("")
    stencils = {}
    for k in kernels:
        for a in k.args:
            pts = tuple(sorted(a.stencil_points))
            if pts not in stencils:
                sname = f"S{nd}D_{len(stencils)}"
                stencils[pts] = sname
                flat = [o for p in pts for o in p]
                w(f"  int {sname}_pts[] = {_ilist(flat)};")
                w(f'  ops_stencil {sname} = ops_decl_stencil({nd}, {len(pts)}, {sname}_pts, '
                  f'"{sname}");')
    w("")
    w('  ops_partition("");')
    w("")
    npts = int(np.prod(g.shape))
    for f in meta.functions:
        if not f.is_time_function:
            w(f'  float *{f.name}_init = read_field("{meta.name}_{f.name}.bin", {npts});')
            w(f"  ops_dat_set_data({f.name}_dat, 0, (char *){f.name}_init);")
            w(f"  free({f.name}_init);")
    for s in series:
        w(f'  float *{s} = read_field("{meta.name}_{s}.bin", {meta.steps});')
    for k in kernels:
        flat = [v for lo, hi in k.iteration_range for v in (lo, hi + 1)]
        w(f"  int range_{k.name}[] = {_ilist(flat)};")
    w("")
    w(f"  for (int time = 0; time < {meta.steps}; time++) {{")
    for j in range(levels):
        w(f"    int t{j} = (time + {j}) % {levels};")
    for k in kernels:
        args = []
        for a in k.args:
            dat = f"{a.base_function.name}_dat"
            if a.base_function.is_time_function:
                dat += f"[t{a.time_offset % levels}]"
            st = stencils[tuple(sorted(a.stencil_points))]
            args.append(f'ops_arg_dat({dat}, 1, {st}, "float", {a.access_mode.ops_token})')
        args += [f'ops_arg_gbl(&{s}[time], 1, "float", OPS_READ)' for s in k.globals]
        if k.uses_idx:
            args.append("ops_arg_idx()")
        head = f'    ops_par_loop({k.name}, "{k.name}", grid, {nd}, range_{k.name},'
        w(head)
        for i, a in enumerate(args):
            w("                 " + a + ("," if i < len(args) - 1 else ");"))
    w("  }")
    w("")
    final = meta.steps % levels
    for f in meta.functions:
        if f.is_time_function:
            n = int(np.prod([s + 2 * f.halo for s in g.shape]))
            w(f"  float *{f.name}_result = (float *)malloc({n} * sizeof(float));")
            w(f"  ops_dat_fetch_data({f.name}_dat[{final}], 0, (char *){f.name}_result);")
            w(f'  FILE *{f.name}_fp = fopen("{meta.name}_{f.name}_final.bin", "wb");')
            w(f"  if ({f.name}_fp != NULL) {{")
            w(f"    fwrite({f.name}_result, sizeof(float), {n}, {f.name}_fp);")
            w(f"    fclose({f.name}_fp);")
            w("  }")
            w(f"  free({f.name}_result);")
    for s in series:
        w(f"  free({s});")
    w("")
    w("  ops_end();")
    w("  return 0;")
    w("}")
    return "\n".join(L) + "\n"


def emit_program(kernels, meta):
    """Kernel header and host source for ``kernels`` (issued in list order each step)."""
    if not kernels:
        raise ValueError("an OPS program needs at least one kernel")
    if any(not k.stores for k in kernels):
        raise ValueError("kernel with an empty body")
    return OpsProgram(meta.name, _emit_header(kernels, meta), _emit_host(kernels, meta))


def generate(compiled, name, scalars):
    """Outline every cluster of ``compiled`` and emit the OPS program."""
    kernels = [outline_kernel(oc, f"{name}_kernel{i}")
               for i, oc in enumerate(compiled.optimized)]
    iet = compiled.iet
    meta = ProgramMeta(name, iet.grid, iet_functions(iet), iet.steps, iet.levels, dict(scalars))
    return emit_program(kernels, meta)

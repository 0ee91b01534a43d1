"""``fhesim`` command line: verify, bench, sweep and explain."""
from __future__ import annotations

import sys
from pathlib import Path

import click
import tomli

from .. import __version__
from ..archmodel import (
    ArchConfig,
    ConfigError,
    CostReport,
    ModelParams,
    available_presets,
    estimate_op,
)
from ..archmodel.counts import OPS
from ..scheduler import (
    OpProgram,
    Shape,
    declared_histogram,
    load_program,
    lower_to_kernels,
    map_and_schedule,
    parse_program,
    trace_path,
)
from .report import Report

DEFAULT_ARCHS = ("lake", "bts", "cryptolight")
DEFAULT_OPS = ("FMUL", "FROT", "FBOT")
PARAM_KEYS = ("N", "Q_bits", "Q_target_bits", "k", "W", "dnum")
MIB = 1 << 20


# -- argument plumbing -----------------------------------------------------

def load_arch(name: str, overrides) -> ArchConfig:
    from ..archmodel import load_preset

    if not Path(name).exists() and name not in available_presets():
        raise click.BadParameter(
            f"unknown preset {name!r}; available: {', '.join(available_presets())}", param_hint="--arch"
        )
    try:
        return load_preset(name).with_overrides(list(overrides))
    except ConfigError as exc:
        raise click.BadParameter(str(exc), param_hint="--set") from None


def read_params(path: str | None) -> dict:
    if path is None:
        return {}
    data = tomli.loads(Path(path).read_text())
    unknown = set(data) - set(PARAM_KEYS) - {"scale_bits", "sigma", "seed", "moduli", "special"}
    if unknown:
        raise click.BadParameter(f"unknown parameter keys {sorted(unknown)}", param_hint="--params")
    return data


def model_params(data: dict, arch: ArchConfig) -> ModelParams:
    """Cost-model workload; ``k`` (with the preset's ``W``) stands in for ``Q_bits``."""
    N = int(data.get("N", ModelParams.N))
    dnum = int(data.get("dnum", 1))
    if "Q_bits" in data or "Q_target_bits" in data:
        q = int(data.get("Q_bits", data.get("Q_target_bits")))
    elif "k" in data:
        q = int(data["k"]) * arch.W
    else:
        q = ModelParams.Q_bits
    return ModelParams(N=N, Q_bits=q, dnum=dnum)


def lowering_shape(data: dict, arch: ArchConfig) -> Shape:
    if "k" in data:
        k, dnum = int(data["k"]), int(data.get("dnum", 1))
        return Shape(int(data.get("N", ModelParams.N)), k, -(-k // dnum), dnum, int(data.get("W", arch.W)))
    return Shape.of(model_params(data, arch), arch)


def resolve_program(ref: str) -> tuple[str, OpProgram]:
    """A path to a program file, or the name of a bundled trace."""
    p = Path(ref)
    if p.exists():
        return p.stem, load_program(p)
    try:
        return ref, load_program(trace_path(ref))
    except FileNotFoundError:
        raise click.BadParameter(f"no program file or bundled trace {ref!r}", param_hint="--program") from None


def single_op_program(op: str) -> OpProgram:
    op = op.upper()
    if op not in OPS:
        raise click.BadParameter(f"unknown operation {op!r}; expected one of {', '.join(OPS)}")
    body = {
        "KEYGEN": "keys = KEYGEN()",
        "ENC": "r = ENC(m0)",
        "DEC": "a = ENC(m0)\nr = DEC(a)",
        "FADD": "a = ENC(m0)\nb = ENC(m1)\nr = FADD(a, b)",
        "FMUL": "a = ENC(m0)\nb = ENC(m1)\nr = FMUL(a, b)",
        "ADDCP": "a = ENC(m0)\nr = ADDCP(a, p)",
        "MULTCP": "a = ENC(m0)\nr = MULTCP(a, p)",
        "FROT": "a = ENC(m0)\nr = FROT(a, steps=1)",
        "FBOT": "a = ENC(m0)\nr = FBOT(a)",
    }[op]
    return parse_program(body)


def _archs(names, overrides, baseline: str) -> tuple[list[ArchConfig], str]:
    """Load the presets (adding the baseline if missing); also return the baseline's name."""
    names = list(names or DEFAULT_ARCHS)
    if baseline not in names:
        names.append(baseline)
    configs = [load_arch(n, overrides) for n in names]
    return configs, configs[names.index(baseline)].name


def schedule_program(p: OpProgram, arch: ArchConfig, data: dict):
    g = lower_to_kernels(p, model_params(data, arch), arch)
    return g, *map_and_schedule(g, arch)


# -- commands ----------------------------------------------------------------

common_arch = click.option("--arch", "archs", multiple=True, help="Preset name or TOML path (repeatable).")
common_set = click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
                          help="Override a preset field, e.g. spm_bytes=268435456 or energy.hbm_byte=40.")
common_params = click.option("--params", type=click.Path(exists=True, dir_okay=False),
                             help="TOML with N, Q_bits or k, W, dnum.")
common_out = click.option("--out", type=click.Path(dir_okay=False), help="Write the CSV report here.")
common_seed = click.option("--seed", type=int, default=0, show_default=True)


@click.group()
@click.version_option(__version__, prog_name="fhesim")
def main():
    """Kernel-level FHE arithmetic and an accelerator cost model."""


@main.command()
@click.option("--suite", "suites", multiple=True, help="Run only these suites (repeatable).")
@click.option("--scale", type=int, default=1, show_default=True, help="Multiply the number of random cases.")
@common_seed
def verify(suites, scale, seed):
    """Run the oracle-backed correctness suites at desk scale."""
    from .verify import SUITES, run_suites

    bad = [s for s in suites if s not in SUITES]
    if bad:
        raise click.BadParameter(f"unknown suite(s) {bad}; choose from {sorted(SUITES)}", param_hint="--suite")
    results = run_suites(suites or None, seed=seed, scale=scale)
    click.echo(f"{'suite':<10} {'cases':>7} {'status':>6} {'time_s':>8}")
    for r in results:
        click.echo(f"{r.name:<10} {r.cases:>7} {'PASS' if r.ok else 'FAIL':>6} {r.seconds:>8.2f}")
        for f in r.failures:
            click.echo(f"    {f}")
    if not all(r.ok for r in results):
        sys.exit(1)


@main.command()
@click.option("--op", "ops", multiple=True, help=f"Operation(s) to cost; default {' '.join(DEFAULT_OPS)}.")
@click.option("--program", "programs", multiple=True, help="Op-program file or bundled trace (lr, lola).")
@click.option("--baseline", default="lake", show_default=True, help="Preset the ratio columns divide by.")
@common_arch
@common_params
@common_set
@common_out
@common_seed
def bench(ops, programs, baseline, archs, params, overrides, out, seed):
    """Cost operations or programs on each preset, normalised to a baseline preset."""
    data = read_params(params)
    configs, baseline = _archs(archs, overrides, baseline)
    report = Report("bench", configs, seed, overrides, params)
    report.columns(["item", "arch", "count", "cycles", "seconds", "joules", "hint_loads"])
    rows: dict[tuple[str, str], CostReport] = {}
    counts: dict[str, int] = {}
    if not programs or ops:
        for op in ops or DEFAULT_OPS:
            op = op.upper()
            if op not in OPS:
                raise click.BadParameter(f"unknown operation {op!r}", param_hint="--op")
            for arch in configs:
                rows[(op, arch.name)] = estimate_op(op, arch, model_params(data, arch))
            counts[op] = 1
    for ref in programs:
        name, prog = resolve_program(ref)
        hist = prog.histogram()
        declared = declared_histogram(prog)
        report.meta(f"program {name}: " + " ".join(f"{k}={v}" for k, v in hist.items()))
        if declared is not None and declared != hist:
            report.meta(f"program {name}: header histogram differs from the statements")
        for arch in configs:
            mp = model_params(data, arch)
            for op, n in hist.items():
                rows[(f"{name}/{op}", arch.name)] = estimate_op(op, arch, mp).scaled(n)
                counts[f"{name}/{op}"] = n
            _, _, rep = schedule_program(prog, arch, data)
            rows[(name, arch.name)] = rep
            counts[name] = len(prog)
    report.ratio_columns(["seconds", "joules"], baseline)
    for item in dict.fromkeys(i for i, _ in rows):
        for arch in configs:
            r = rows[(item, arch.name)]
            report.row(item=item, arch=arch.name, count=counts[item], cycles=r.cycles,
                       seconds=r.seconds, joules=r.joules, hint_loads=r.counts.get("hint_loads", 0))
    report.emit(out)


@main.command()
@click.option("--width", "widths", multiple=True, type=int, help="Datapath widths (default 256 512 1024).")
@click.option("--spm-mb", "spms", multiple=True, type=int, help="SPM sizes in MiB (default 256 512 1024).")
@click.option("--op", "ops", multiple=True, help=f"Operation(s) per point; default {' '.join(DEFAULT_OPS)}.")
@click.option("--program", "programs", multiple=True, help="Op-program file or bundled trace.")
@click.option("--arch", "arch_name", default="cryptolight", show_default=True, help="Base preset.")
@common_params
@common_set
@common_out
@common_seed
def sweep(widths, spms, ops, programs, arch_name, params, overrides, out, seed):
    """Cartesian sweep over datapath width and SPM capacity."""
    data = read_params(params)
    base = load_arch(arch_name, overrides)
    widths = widths or (256, 512, 1024)
    spms = spms or (256, 512, 1024)
    items = [("op", o.upper()) for o in (ops or (() if programs else DEFAULT_OPS))]
    items += [("program", r) for r in programs]
    report = Report("sweep", [base], seed, overrides, params)
    report.columns(["W", "spm_mb", "item", "freq_hz", "cycles", "seconds", "joules", "hint_loads", "streamed"])
    for W in widths:
        for spm in spms:
            try:
                arch = base.replace(W=W, spm_bytes=spm * MIB)
            except ConfigError as exc:
                raise click.BadParameter(str(exc)) from None
            for kind, ref in items:
                if kind == "op":
                    r = estimate_op(ref, arch, model_params(data, arch))
                    streamed = r.labels.get("streamed", "")
                else:
                    name, prog = resolve_program(ref)
                    g, _, r = schedule_program(prog, arch, data)
                    ref = name
                    streamed = ",".join(g.meta["residency"].streamed) if g.meta["residency"] else ""
                report.row(W=W, spm_mb=spm, item=ref, freq_hz=arch.freq_hz, cycles=r.cycles,
                           seconds=r.seconds, joules=r.joules,
                           hint_loads=r.counts.get("hint_loads", 0), streamed=streamed.replace(",", ";"))
    report.emit(out)


@main.command()
@click.argument("target")
@click.option("--arch", "arch_name", default="cryptolight", show_default=True)
@click.option("--timeline/--no-timeline", default=False, help="Print every scheduled interval.")
@common_params
@common_set
@common_out
def explain(target, arch_name, timeline, params, overrides, out):
    """Census and schedule of one operation (e.g. FMUL) or one program."""
    data = read_params(params)
    arch = load_arch(arch_name, overrides)
    if target.upper() in OPS:
        name, prog = target.upper(), single_op_program(target)
    else:
        name, prog = resolve_program(target)
    shape = lowering_shape(data, arch)
    g = lower_to_kernels(prog, shape, arch)
    tl, rep = map_and_schedule(g, arch)
    click.echo(f"# {name} on {arch.name}: N={shape.N} k={shape.k} alpha={shape.alpha} dnum={shape.dnum} W={shape.W}")
    click.echo(f"# nodes={len(g)} edges={len(g.edges)} hint_loads={g.meta['hint_loads']}")
    click.echo("statement,op," + ",".join(_CENSUS))
    for i, st in enumerate(g.meta["program"].statements):
        c = g.census(op=i)
        click.echo(f"{st.target},{st.op}," + ",".join(str(c.get(k, 0)) for k in _CENSUS))
    c = g.census()
    click.echo("total,," + ",".join(str(c.get(k, 0)) for k in _CENSUS))
    click.echo(f"# makespan={tl.makespan} critical_path={tl.critical_path} serial_sum={tl.serial_sum} "
               f"cycles; {rep.seconds * 1e6:.3f} us, {rep.joules * 1e3:.6f} mJ")
    click.echo("unit,utilization")
    for u, v in tl.utilization.items():
        click.echo(f"{u},{v:.4f}")
    if timeline:
        click.echo(tl.to_csv(), nl=False)
    if out:
        Path(out).write_text(tl.to_csv())


_CENSUS = ("ntt", "intt", "mod_mult", "mod_add", "base_conv", "automorphism", "sample")

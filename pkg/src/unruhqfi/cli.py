"""Command-line interface.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 parameter out
of range, 4 sweep degraded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass, fields

from . import checks, figures
from .errors import OutOfRange, SweepDegraded
from .params import ChannelScenario, EstimationTarget, ModelParams
from .qfi import DEGENERACY_DELTA, EIG_CUTOFF, FD_STEP, PROVIDERS, qfi_for_params
from .sweep import (
    DEFAULT_MIN_CELLS, DEFAULT_TAU, Axis, GridSpec, detect_frozen_regions, export_csv,
    export_heatmap, parse_number, resolve_workers, run_sweep,
)

EXIT_OK, EXIT_VALIDATION, EXIT_USAGE, EXIT_DOMAIN, EXIT_DEGRADED = 0, 1, 2, 3, 4

log = logging.getLogger("unruhqfi")

CONFIG_HELP = """\
config file: a strict JSON object; any key below may appear, unknown keys are
an error, and command-line flags override file values.
  mu, r, gamma, gamma_a, gamma_b   numbers (r also accepts "pi/4")
  scenario                         "none" | "qubit" | "qutrit" | "both"
  wrt                              "r" | "mu"
  provider                         "analytic" | "fd"
  axis1, axis2                     "name:min:max:count", name in mu, r, gamma, gamma_a, gamma_b
  out                              output path prefix
  heatmap, components, frozen      booleans
  tau, min_cells, vmax             frozen-region threshold, minimum region size, PGM scale
  eig_cutoff, degeneracy_delta, h  numerical thresholds and finite-difference step
  seed, samples, points, workers   validation RNG seed / draws, figure grid size, sweep processes
environment: QFI_THREADS caps sweep parallelism.
"""


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    mu: float = 0.25
    r: float = 0.0
    gamma: float | None = None
    gamma_a: float = 0.0
    gamma_b: float = 0.0
    scenario: str = "none"
    wrt: str = "r"
    provider: str = "analytic"
    axis1: str | None = None
    axis2: str | None = None
    out: str | None = None
    heatmap: bool = False
    components: bool = False
    frozen: bool = False
    tau: float = DEFAULT_TAU
    min_cells: int = DEFAULT_MIN_CELLS
    vmax: float | None = None
    eig_cutoff: float = EIG_CUTOFF
    degeneracy_delta: float = DEGENERACY_DELTA
    h: float = FD_STEP
    seed: int = 0
    samples: int = 1000
    points: int = figures.DEFAULT_POINTS
    workers: int | None = None

    def params(self) -> ModelParams:
        try:
            scenario = ChannelScenario.parse(self.scenario)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if self.gamma is not None:
            return ModelParams.coupled(parse_number(self.mu), parse_number(self.r), parse_number(self.gamma), scenario)
        return ModelParams(parse_number(self.mu), parse_number(self.r), parse_number(self.gamma_a),
                           parse_number(self.gamma_b), scenario)

    def target(self) -> EstimationTarget:
        try:
            return EstimationTarget.parse(self.wrt)
        except ValueError as exc:
            raise UsageError(str(exc)) from None


CONFIG_KEYS = {f.name for f in fields(RunConfig)}


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    unknown = sorted(set(data) - CONFIG_KEYS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    return data


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then config file values, then explicitly passed flags."""
    merged = load_config(getattr(args, "config", None))
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    cfg = RunConfig(**merged)
    if cfg.gamma is not None and ("gamma_a" in merged or "gamma_b" in merged):
        raise UsageError("--gamma sets both strengths; do not combine it with --gamma-a/--gamma-b")
    return cfg


def _emit_json(record: dict) -> None:
    sys.stdout.write(json.dumps(record, separators=(",", ":"), allow_nan=False) + "\n")


def _clean(x):
    return None if x is None or x != x else x


def cmd_qfi(args) -> int:
    cfg = resolve_config(args)
    if cfg.provider not in PROVIDERS:
        raise UsageError(f"unknown provider {cfg.provider!r}")
    res = qfi_for_params(cfg.params(), cfg.target(), cfg.provider, eig_cutoff=cfg.eig_cutoff,
                         degeneracy_delta=cfg.degeneracy_delta, h=cfg.h)
    record = {k: _clean(v) for k, v in res.as_dict().items()}
    if res.fallback:
        log.warning("three-term decomposition degraded, reporting SLD total: %s", res.note)
    _emit_json(record)
    return EXIT_OK


def _sweep_spec(cfg: RunConfig) -> GridSpec:
    if not cfg.axis1:
        raise UsageError("sweep needs --axis1 name:min:max:count")
    try:
        axis1 = Axis.parse(cfg.axis1)
        axis2 = Axis.parse(cfg.axis2) if cfg.axis2 else None
    except OutOfRange:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return GridSpec(axis1=axis1, axis2=axis2, fixed=cfg.params(), wrt=cfg.target())


def _regions_json(res, regions) -> list[dict]:
    a1 = res.spec.axis1.values
    a2 = res.spec.axis2.values if res.spec.axis2 is not None else None
    out = []
    for reg in regions:
        item = {
            "i0": reg.i0, "i1": reg.i1, "j0": reg.j0, "j1": reg.j1,
            "axis1_range": [float(a1[reg.i0]), float(a1[reg.i1])],
            "mean_f": reg.mean_f, "flatness": reg.flatness, "area": reg.area,
        }
        if a2 is not None:
            item["axis2_range"] = [float(a2[reg.j0]), float(a2[reg.j1])]
        out.append(item)
    return out


def cmd_sweep(args) -> int:
    cfg = resolve_config(args)
    if not cfg.out:
        raise UsageError("sweep needs --out PREFIX")
    spec = _sweep_spec(cfg)
    if cfg.heatmap and spec.axis2 is None:
        raise UsageError("--heatmap needs a second axis")
    start = time.perf_counter()
    try:
        res = run_sweep(spec, components=cfg.components, workers=resolve_workers(cfg.workers))
    except SweepDegraded as exc:
        print(f"unruhqfi {args.command}: {exc}", file=sys.stderr)
        return EXIT_DEGRADED
    export_csv(res, f"{cfg.out}.csv")
    written = [f"{cfg.out}.csv"]
    if cfg.heatmap:
        export_heatmap(res, f"{cfg.out}.pgm", "global-max" if cfg.vmax is None else cfg.vmax)
        written.append(f"{cfg.out}.pgm")
    summary = {"cells": int(res.values.size), "failures": len(res.failures),
               "wall_time_s": round(time.perf_counter() - start, 3), "files": written}
    if cfg.frozen:
        regions = detect_frozen_regions(res, cfg.tau, cfg.min_cells)
        with open(f"{cfg.out}.frozen.json", "w", newline="\n") as fh:
            json.dump(_regions_json(res, regions), fh, indent=1)
            fh.write("\n")
        written.append(f"{cfg.out}.frozen.json")
        summary["frozen_regions"] = len(regions)
    if args.json:
        _emit_json(summary)
    else:
        print(f"cells={summary['cells']} failures={summary['failures']} "
              f"wall_time={summary['wall_time_s']}s files={','.join(written)}", file=sys.stderr)
    return EXIT_OK


def cmd_figure(args) -> int:
    preset = figures.PRESETS.get(args.id)
    if preset is None:
        print(f"unruhqfi figure: error: unknown figure id {args.id!r}; choose from "
              f"{', '.join(figures.PRESETS)}", file=sys.stderr)
        return EXIT_USAGE
    cfg = resolve_config(args)
    if not cfg.out:
        raise UsageError("figure needs --out PREFIX")
    r_override = parse_number(args.r) if args.r is not None else None
    if r_override is not None and preset.kind != "heatmap":
        raise UsageError("--r only applies to heatmap figures")
    print(figures.describe(preset, r_override), file=sys.stderr)
    if preset.kind == "heatmap":
        try:
            res = figures.run_heatmap(preset, cfg.points, r_override, workers=resolve_workers(cfg.workers))
        except SweepDegraded as exc:
            print(f"unruhqfi {args.command}: {exc}", file=sys.stderr)
            return EXIT_DEGRADED
        export_csv(res, f"{cfg.out}.csv")
        export_heatmap(res, f"{cfg.out}.pgm")
        written = [f"{cfg.out}.csv", f"{cfg.out}.pgm"]
    else:
        rs, curves = figures.run_curves(preset, cfg.points)
        with open(f"{cfg.out}.csv", "w", newline="\n", encoding="ascii") as fh:
            fh.write(figures.curves_csv(preset, rs, curves))
        written = [f"{cfg.out}.csv"]
    if args.json:
        _emit_json({"figure": preset.id, "files": written})
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = resolve_config(args)
    if cfg.samples < 1:
        raise UsageError("--samples must be >= 1")
    reports = checks.run_all(seed=cfg.seed, samples=cfg.samples)
    for rep in reports:
        status = "PASS" if rep.ok else "FAIL"
        line = f"{status} {rep.name}: {rep.passed} passed, {rep.failed} failed, worst {rep.worst:.3e}"
        if rep.first_failure:
            line += f"; first failure: {rep.first_failure}"
        print(line, file=sys.stderr)
    ok = all(rep.ok for rep in reports)
    if args.json:
        _emit_json({
            "ok": ok,
            "suites": [{"name": r.name, "passed": r.passed, "failed": r.failed, "worst": r.worst} for r in reports],
        })
    else:
        print(f"{sum(r.ok for r in reports)}/{len(reports)} suites passed", file=sys.stderr)
    return EXIT_OK if ok else EXIT_VALIDATION


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mu", type=parse_number)
    p.add_argument("--r", type=parse_number, help="Rindler angle in radians; accepts 'pi/4'")
    p.add_argument("--gamma", type=parse_number, help="set gamma_a = gamma_b = GAMMA")
    p.add_argument("--gamma-a", dest="gamma_a", type=parse_number)
    p.add_argument("--gamma-b", dest="gamma_b", type=parse_number)
    p.add_argument("--scenario", choices=[s.value for s in ChannelScenario])
    p.add_argument("--wrt", choices=[t.value for t in EstimationTarget])
    p.add_argument("--eig-cutoff", dest="eig_cutoff", type=float)
    p.add_argument("--degeneracy-delta", dest="degeneracy_delta", type=float)
    p.add_argument("--h", type=float, help="finite-difference step")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="unruhqfi",
        description="Quantum Fisher information of an accelerated qubit-qutrit pair under phase-flip noise.",
        epilog=CONFIG_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="strict JSON config file (see top-level --help)")
        p.add_argument("--json", action="store_true", help="machine-readable single-line JSON on stdout")

    p = sub.add_parser("qfi", help="QFI at one parameter point")
    common(p)
    _add_param_flags(p)
    p.add_argument("--provider", choices=PROVIDERS)
    p.set_defaults(func=cmd_qfi)

    p = sub.add_parser("sweep", help="QFI on a 1-D or 2-D grid")
    common(p)
    _add_param_flags(p)
    p.add_argument("--axis1", help="name:min:max:count")
    p.add_argument("--axis2", help="name:min:max:count")
    p.add_argument("--out", help="output prefix; writes PREFIX.csv")
    p.add_argument("--heatmap", action="store_const", const=True, help="also write PREFIX.pgm")
    p.add_argument("--vmax", type=float, help="fixed PGM scale instead of the global maximum")
    p.add_argument("--components", action="store_const", const=True, help="fill f_cl, f_qu, f_mix columns")
    p.add_argument("--frozen", action="store_const", const=True, help="write PREFIX.frozen.json")
    p.add_argument("--tau", type=float, help=f"flatness threshold (default {DEFAULT_TAU})")
    p.add_argument("--min-cells", dest="min_cells", type=int, help=f"minimum region size (default {DEFAULT_MIN_CELLS})")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser(
        "figure", help="compute a named figure preset",
        description="Presets: " + "; ".join(figures.describe(pr) for pr in figures.PRESETS.values()),
    )
    common(p)
    p.add_argument("--id", required=True)
    p.add_argument("--out")
    p.add_argument("--points", type=int, help=f"grid points per axis (default {figures.DEFAULT_POINTS})")
    p.add_argument("--r", help="override the fixed r of a heatmap preset")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("validate", help="run the invariant suites")
    common(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"unruhqfi {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OutOfRange as exc:
        print(f"unruhqfi {args.command}: parameter out of range: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        print(f"unruhqfi {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command line front end.

Subcommands: verify | counts | simulate | register | scaling. Exit
codes: 0 success, 1 verification or consistency mismatch, 2 usage
errors, 3 I/O errors. The seed comes from --seed, else the
SCANFORGE_SEED environment variable, else a config file, else 0.
Config files are flat ``key=value`` lines mirroring the flags; unknown
keys are rejected.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from . import costs
from .networks import (MalformedNetworkError, build_network, parse_network,
                       verify_network)
from .ops import ScanKind, int_add
from .scans import run_scan
from .simulate import (Constant, CostModel, LogNormal, Trace, Uniform,
                       simulate)
from .scaling import (CSV_HEADER, rows_to_csv, sigma_speedup, strong_scaling,
                      weak_scaling)
from .strategy import StrategyVariant
from .distributed import run_distributed
from .scans import serial_scan

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_IO = 3

CONFIG_KEYS = {
    "command", "kind", "kinds", "variant", "n", "k", "p", "p-list", "widths",
    "cost", "latency", "seed", "repetitions", "out", "out-dir", "mode",
    "runner", "level", "m0", "snr", "alpha-std", "t-std", "frames",
    "network", "all",
}


class UsageError(ValueError):
    pass


def _parse_int_list(text: str) -> list[int]:
    """Comma list with .. ranges: '2,4..7,16' -> [2,4,5,6,7,16]."""
    out: list[int] = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if ".." in tok:
            lo, hi = tok.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(tok))
    if not out:
        raise UsageError(f"empty integer list {text!r}")
    return out


def _pow2_list(text: str) -> list[int]:
    """'2..256' style ranges keep only powers of two; lists pass through."""
    vals = _parse_int_list(text)
    if ".." in text:
        vals = [v for v in vals if v >= 1 and (v & (v - 1)) == 0]
    return vals


def _parse_kinds(text: str) -> list[ScanKind]:
    if text.strip().lower() == "all":
        return list(ScanKind)
    return [ScanKind.parse(tok) for tok in text.split(",") if tok.strip()]


def _parse_cost(text: str, trace_loader=None) -> object:
    name, _, args = text.partition(":")
    name = name.strip().lower()
    try:
        if name == "constant":
            return Constant(float(args or 1.0))
        if name == "uniform":
            lo, hi = (float(x) for x in args.split(","))
            return Uniform(lo, hi)
        if name == "lognormal":
            mu, sigma = (float(x) for x in args.split(","))
            return LogNormal(mu, sigma)
        if name == "trace":
            return Trace(tuple(_load_trace(args)))
    except UsageError:
        raise
    except Exception as exc:
        raise UsageError(f"bad cost spec {text!r}: {exc}") from exc
    raise UsageError(f"unknown cost distribution {name!r}")


def _load_trace(path: str) -> list[float]:
    """Costs from a file: either bare floats, or a CSV whose last column
    holds the durations (the register command's timings.csv works)."""
    vals: list[float] = []
    try:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                tok = line.split(",")[-1].strip()
                try:
                    vals.append(float(tok))
                except ValueError:
                    continue    # header line
    except OSError as exc:
        raise UsageError(f"cannot read trace file {path}: {exc}") from exc
    if not vals:
        raise UsageError(f"no costs found in trace file {path}")
    return vals


_COST_PARAM_ORDER = {"constant": ["c"], "uniform": ["lo", "hi"],
                     "lognormal": ["mu", "sigma"], "trace": ["file"]}


def _read_config(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    cost_kv: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{ln}: expected key=value")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key.startswith("cost."):
                cost_kv[key[5:]] = value
                continue
            key = key.replace("_", "-")
            if key not in CONFIG_KEYS:
                raise UsageError(f"{path}:{ln}: unknown key {key!r}")
            out[key] = value
    if cost_kv:
        kind = cost_kv.pop("kind", "constant")
        order = _COST_PARAM_ORDER.get(kind)
        if order is None:
            raise UsageError(f"{path}: unknown cost.kind {kind!r}")
        unknown = set(cost_kv) - set(order)
        if unknown:
            raise UsageError(f"{path}: unknown cost keys {sorted(unknown)}")
        params = ",".join(cost_kv[k] for k in order if k in cost_kv)
        out["cost"] = f"{kind}:{params}" if params else kind
    return out


def _resolve_seed(args, config: dict[str, str]) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("SCANFORGE_SEED")
    if env is not None:
        return int(env)
    if "seed" in config:
        return int(config["seed"])
    return 0


def _merge(args, config: dict[str, str], key: str, cast, default=None):
    """Flag wins; config fills in; default last."""
    val = getattr(args, key.replace("-", "_"), None)
    if val is not None:
        return val
    if key in config:
        return cast(config[key])
    return default


# --- subcommands -----------------------------------------------------------

def cmd_verify(args, config) -> int:
    if args.network:
        try:
            net = parse_network(Path(args.network).read_text())
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
        try:
            report = verify_network(net)
        except MalformedNetworkError as exc:
            print(f"structural error: {exc}")
            return EXIT_MISMATCH
        print(f"{net.kind.value} n={net.n} size={report.size} "
              f"depth={report.depth} lanes_ok={report.valid}"
              + ("" if report.valid else f" bad_lanes={report.bad_lanes}"))
        return EXIT_OK if report.valid else EXIT_MISMATCH
    kinds = _parse_kinds(_merge(args, config, "kinds", str, "all"))
    widths = _pow2_list(_merge(args, config, "widths", str, "2..256"))
    ok = True
    print(f"{'kind':<12}{'n':>6}{'size':>8}{'formula':>9}"
          f"{'depth':>7}{'formula':>9}  lanes")
    for kind in kinds:
        for n in widths:
            if kind is not ScanKind.SERIAL and n & (n - 1):
                continue
            net = build_network(kind, n)
            rep = verify_network(net)
            size_ok = rep.size == costs.work(kind, n)
            depth_ok = rep.depth == costs.span(kind, n)
            good = rep.valid and size_ok and depth_ok
            ok &= good
            print(f"{kind.value:<12}{n:>6}{rep.size:>8}"
                  f"{costs.work(kind, n):>9}{rep.depth:>7}"
                  f"{costs.span(kind, n):>9}  "
                  + ("ok" if good else f"FAIL bad_lanes={rep.bad_lanes}"))
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_counts(args, config) -> int:
    kinds = list(ScanKind) if args.all else \
        [ScanKind.parse(_merge(args, config, "kind", str, "serial"))]
    n = _merge(args, config, "n", int, 8)
    ok = True
    print(f"{'kind':<12}{'n':>6}{'span':>6}{'work':>8}{'counted':>9}")
    for kind in kinds:
        op = int_add()
        run_scan(kind, list(range(1, n + 1)), op)
        counted = op.applications
        formula = costs.work(kind, n)
        good = counted == formula
        ok &= good
        print(f"{kind.value:<12}{n:>6}{costs.span(kind, n):>6}"
              f"{formula:>8}{counted:>9}  " + ("ok" if good else "MISMATCH"))
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_simulate(args, config) -> int:
    variant = StrategyVariant.parse(_merge(args, config, "variant", str,
                                           "general-exclusive"))
    kind = ScanKind.parse(_merge(args, config, "kind", str, "blelloch"))
    n = _merge(args, config, "n", int, 4096)
    p_list = _pow2_list(_merge(args, config, "p-list", str, "2..512"))
    reps = _merge(args, config, "repetitions", int, 5)
    seed = _resolve_seed(args, config)
    dist = _parse_cost(_merge(args, config, "cost", str, "constant:1.0"))
    latency = _merge(args, config, "latency", float, 0.0)
    model = CostModel(dist, latency, seed)

    rows = strong_scaling(variant, kind, n, p_list, cost_model=model,
                          repetitions=reps, runner="simulated", seed=seed)
    lines = [CSV_HEADER + ",theory_span,theory_speedup"]
    for r in rows:
        fig = costs.distributed_span(kind, n, r.p, variant)
        lines.append(",".join([
            variant.value, kind.value, str(n), str(r.p), str(r.rep),
            repr(r.t_serial), repr(r.t_parallel), repr(r.speedup),
            repr(r.sigma), str(fig.total_span),
            repr((n - 1) / fig.total_span)]))
    _emit(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_scaling(args, config) -> int:
    variant = StrategyVariant.parse(_merge(args, config, "variant", str,
                                           "general-exclusive"))
    kind = ScanKind.parse(_merge(args, config, "kind", str, "blelloch"))
    mode = _merge(args, config, "mode", str, "strong")
    runner = _merge(args, config, "runner", str, "simulated")
    reps = _merge(args, config, "repetitions", int, 5)
    seed = _resolve_seed(args, config)
    p_list = _pow2_list(_merge(args, config, "p-list", str, "1,2,4,8"))
    dist = _parse_cost(_merge(args, config, "cost", str, "constant:1.0"))
    latency = _merge(args, config, "latency", float, 0.0)
    model = CostModel(dist, latency, seed)
    if mode == "strong":
        n = _merge(args, config, "n", int, 512)
        rows = strong_scaling(variant, kind, n, p_list, cost_model=model,
                              repetitions=reps, runner=runner, seed=seed)
    elif mode == "weak":
        k = _merge(args, config, "k", int, 8)
        rows = weak_scaling(variant, kind, k, p_list, cost_model=model,
                            repetitions=reps, runner=runner, seed=seed)
    else:
        raise UsageError(f"mode must be strong or weak, not {mode!r}")
    _emit(args.out, rows_to_csv(rows))
    return EXIT_OK


def cmd_register(args, config) -> int:
    from .registration import (DriftSpec, GradientFlowConfig,
                               MultilevelConfig, SeriesRegistrar,
                               generate_series, mean_aligned,
                               neighbour_links, preprocess_series)
    from .registration import io as fio

    seed = _resolve_seed(args, config)
    level = _merge(args, config, "level", int, 8)
    m0 = _merge(args, config, "m0", int, max(level - 2, 2))
    p = _merge(args, config, "p", int, 1)
    variant = StrategyVariant.parse(_merge(args, config, "variant", str,
                                           "general-exclusive"))
    kind = ScanKind.parse(_merge(args, config, "kind", str, "blelloch"))
    out_dir = Path(_merge(args, config, "out-dir", str, "register-out"))

    truth = None
    manifest = _merge(args, config, "frames", str)
    if manifest:
        try:
            frames = [fio.load_frame(pth) for pth in fio.read_manifest(manifest)]
        except (OSError, fio.FrameIOError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
        if len(frames) < 2:
            raise UsageError("manifest must list at least two frames")
    else:
        n = _merge(args, config, "n", int, 16)
        spec = DriftSpec(level=level,
                         alpha_std=_merge(args, config, "alpha-std", float, 4e-4),
                         t_std=_merge(args, config, "t-std", float, 1.5e-3),
                         snr=_merge(args, config, "snr", float, 10.0))
        frames, truth = generate_series(n, spec, seed)

    ml = MultilevelConfig(m0, frames[0].level)
    gf = GradientFlowConfig()
    timings: list[float] = []
    phis = preprocess_series(frames, ml, gf, parallel=p > 1, timings=timings)
    reg = SeriesRegistrar(frames, ml, gf)
    op = reg.operator()
    links = neighbour_links(phis)

    import time as _time
    scan_t0 = _time.perf_counter()
    if p == 1:
        result = serial_scan(links, op)
    else:
        result = run_distributed(links, op, variant, kind, p, timeout=600.0)
    scan_seconds = _time.perf_counter() - scan_t0
    cumulative = [reg.operator().identity.phi] + [l.phi for l in result]

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        fio.write_deformations(out_dir / "deformations.txt", cumulative)
        fio.write_deformations(out_dir / "neighbours.txt", phis)
        with open(out_dir / "deformations.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["frame", "alpha", "t0", "t1"])
            for i, phi in enumerate(cumulative):
                w.writerow([i, repr(phi.alpha), repr(phi.t0), repr(phi.t1)])
        mean_img = mean_aligned(frames, cumulative)
        fio.write_raw(out_dir / "mean_aligned.raw", mean_img)
        fio.write_pgm(out_dir / "mean_aligned.pgm", mean_img)
        with open(out_dir / "timings.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["phase", "index", "seconds"])
            for i, t in enumerate(timings):
                w.writerow(["preprocess", i, repr(t)])
            w.writerow(["scan", 0, repr(scan_seconds)])
        if truth is not None:
            fio.write_deformations(out_dir / "ground_truth.txt",
                                   truth.cumulative)
    except OSError as exc:
        print(f"error writing {out_dir}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"registered {len(frames)} frames (p={p}); results in {out_dir}")
    return EXIT_OK


def _emit(out, text: str) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="scanforge",
        description="prefix-scan verification, counting, simulation, "
                    "registration and scaling experiments")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--seed", type=int,
                       help="RNG seed (overrides SCANFORGE_SEED)")

    p = sub.add_parser("verify", help="check circuits lane by lane")
    common(p)
    p.add_argument("--kinds", help="comma list or 'all'")
    p.add_argument("--widths", help="list/range, e.g. 2..256")
    p.add_argument("--network", help="verify a serialized network file")

    p = sub.add_parser("counts", help="span/work table vs counted applications")
    common(p)
    p.add_argument("--kind")
    p.add_argument("--n", type=int)
    p.add_argument("--all", action="store_true", help="every kind")

    p = sub.add_parser("simulate", help="cost-model makespans vs theory")
    common(p)
    p.add_argument("--variant")
    p.add_argument("--kind")
    p.add_argument("--n", type=int)
    p.add_argument("--p-list", dest="p_list")
    p.add_argument("--cost")
    p.add_argument("--latency", type=float)
    p.add_argument("--repetitions", type=int)
    p.add_argument("--out")

    p = sub.add_parser("register", help="align a frame series")
    common(p)
    p.add_argument("--frames", help="manifest of frame paths")
    p.add_argument("--n", type=int, help="synthetic series length")
    p.add_argument("--level", type=int)
    p.add_argument("--m0", type=int)
    p.add_argument("--snr", type=float)
    p.add_argument("--alpha-std", dest="alpha_std", type=float)
    p.add_argument("--t-std", dest="t_std", type=float)
    p.add_argument("--p", type=int)
    p.add_argument("--variant")
    p.add_argument("--kind")
    p.add_argument("--out-dir", dest="out_dir")

    p = sub.add_parser("scaling", help="strong/weak scaling CSV")
    common(p)
    p.add_argument("--mode")
    p.add_argument("--runner")
    p.add_argument("--variant")
    p.add_argument("--kind")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--p-list", dest="p_list")
    p.add_argument("--cost")
    p.add_argument("--latency", type=float)
    p.add_argument("--repetitions", type=int)
    p.add_argument("--out")
    return top


COMMANDS = {
    "verify": cmd_verify,
    "counts": cmd_counts,
    "simulate": cmd_simulate,
    "register": cmd_register,
    "scaling": cmd_scaling,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _read_config(args.config) if args.config else {}
        return COMMANDS[args.command](args, config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

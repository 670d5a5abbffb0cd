"""Command-line front door: run, sweep, constants.

Exit codes: 0 all hard checks pass, 1 hard-check failure, 2 schema
violation, 3 regime violation, 4 capacity exceeded.  CSV layouts are
documented in the README; writes are atomic (temp file, then rename).
The output directory comes from the config, overridable by the
BOSECORR_OUTPUT_DIR environment variable or the --output flag.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import from_dict, load_config
from .cutoff import velocity_params
from .errors import CapacityError, ConfigError, RegimeError
from .hopping import beta_of, build_power_law, kappa, moment, zero_hopping
from .lattice import TorusLattice
from .observables import correlation_profile
from .report import hard_checks_pass
from .runner import RunResult, run
from .verifier import scaling_sweep, stability_ratio

EXIT_OK = 0
EXIT_HARD_FAIL = 1
EXIT_SCHEMA = 2
EXIT_REGIME = 3
EXIT_CAPACITY = 4


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _write_outputs(result: RunResult, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    trace = result.trace

    rows = [
        (t, trace.norm_drift[k], trace.energy[k], trace.leakage[k])
        for k, t in enumerate(trace.times)
    ]
    _atomic_write(outdir / "trace.csv", _csv_text(["t", "norm_drift", "energy", "leakage"], rows))

    prows = []
    for k, t in enumerate(trace.times):
        prof = correlation_profile(trace.states[k], result.basis)
        for x, val in enumerate(prof.values):
            prows.append((t, x, val))
    _atomic_write(outdir / "profile.csv", _csv_text(["t", "x", "value"], prows))

    rrows = []
    for rep in result.reports:
        for row in rep.rows:
            rrows.append((rep.name, row.get("t", ""), row.get("label", ""),
                          row.get("lhs", ""), row.get("rhs", ""), row.get("margin", "")))
    _atomic_write(outdir / "report.csv",
                  _csv_text(["check", "t", "label", "lhs", "rhs", "margin"], rrows))

    lines = [
        "verdict tiers: hard checks verify unconditional inequalities and fail the run;",
        "fitted checks report the minimal constant for bounds with non-explicit constants,",
        "judged by finiteness and stability across sweeps.",
        f"kappa={result.kappa:.6g} v={result.v:.6g} beta={result.beta}",
        f"cutoff: canonical bump, epsilon per pair; max leakage {trace.max_leakage:.3e} "
        f"(threshold {trace.leakage_threshold:.3e})",
    ]
    lines += [rep.summary_line() for rep in result.reports]
    lines.append("OVERALL: " + ("PASS" if result.ok else "FAIL"))
    _atomic_write(outdir / "summary.txt", "\n".join(lines) + "\n")


def _resolve_outdir(cfg_outdir: str, override: str | None) -> Path:
    if override:
        return Path(override)
    env = os.environ.get("BOSECORR_OUTPUT_DIR")
    if env:
        return Path(env)
    return Path(cfg_outdir)


def cmd_run(config_path: str, output: str | None = None) -> int:
    cfg = load_config(config_path)
    result = run(cfg)
    _write_outputs(result, _resolve_outdir(cfg.output_dir, output))
    return EXIT_OK if result.ok else EXIT_HARD_FAIL


def cmd_sweep(config_path: str, output: str | None = None, jobs: int = 1) -> int:
    with open(config_path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {config_path}: {exc}") from exc
    if not isinstance(data, dict) or "base" not in data or "sweep" not in data:
        raise ConfigError("sweep config must contain 'base' and 'sweep'")
    members = data["sweep"].get("members", [])
    if not members:
        raise ConfigError("sweep rule expands to no members")

    configs = []
    for member in members:
        merged = json.loads(json.dumps(data["base"]))
        for key, val in member.get("overrides", {}).items():
            node = merged
            parts = key.split(".")
            for part in parts[:-1]:
                node = node.setdefault(part, {})
            node[parts[-1]] = val
        configs.append((member.get("name", f"member{len(configs)}"), from_dict(merged)))

    outdir = _resolve_outdir(data.get("output_dir", "sweep_out"), output)
    outdir.mkdir(parents=True, exist_ok=True)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda nc: run(nc[1]), configs))
    else:
        results = [run(cfg) for _, cfg in configs]

    rows = []
    constants: dict[str, list] = {}
    for (name, _), result in zip(configs, results):
        _write_outputs(result, outdir / name)
        for rep in result.reports:
            for key, val in rep.fitted.items():
                rows.append((name, rep.name, key, val))
                constants.setdefault(f"{rep.name}:{key}", []).append(val)
        rows.append((name, "scaling", "sup_n0sq", result.scaling_entry.sup_n0sq))

    scaling = scaling_sweep([r.scaling_entry for r in results])
    for key, val in scaling.fitted.items():
        rows.append(("aggregate", scaling.name, key, val))
    for key, vals in sorted(constants.items()):
        finite = [v for v in vals if isinstance(v, float) and math.isfinite(v)]
        if len(finite) >= 2:
            rows.append(("aggregate", "stability", key, stability_ratio(finite)))
    _atomic_write(outdir / "sweep_report.csv",
                  _csv_text(["member", "check", "quantity", "value"], rows))

    summary = [r.summary_line() for r in [scaling]]
    summary += [f"{name}: " + ("PASS" if res.ok else "FAIL")
                for (name, _), res in zip(configs, results)]
    _atomic_write(outdir / "summary.txt", "\n".join(summary) + "\n")
    return EXIT_OK if all(hard_checks_pass(r.reports) for r in results) else EXIT_HARD_FAIL


def cmd_constants(args) -> int:
    lat = TorusLattice(args.d, args.L)
    if args.cj > 0:
        hop = build_power_law(lat, args.cj, args.alpha)
    else:
        hop = zero_hopping(lat, alpha=args.alpha)
    kap = kappa(hop)
    print(f"kappa = {kap:.12g}")
    try:
        beta = beta_of(args.alpha, args.d)
    except RegimeError as exc:
        print(f"beta: undefined ({exc})")
        beta = None
    if beta is not None:
        print(f"beta = {beta}")
        for k in range(1, beta + 2):
            print(f"kappa^({k}) = {moment(hop, k):.12g}")
    if args.alpha <= 3 * args.d + 1:
        print(f"warning: alpha={args.alpha} <= 3d+1={3 * args.d + 1} (outside the bound regime)")
    print(f"R^d * lambda^2 = {args.R**args.d * args.lam**2:.12g}")
    try:
        p = velocity_params(args.v, kap, args.R, args.r)
        print(f"v_tilde = {p.v_tilde:.12g}")
        print(f"epsilon = {p.epsilon:.12g}")
        print(f"s = {p.s:.12g}")
        print("preconditions: PASS")
    except RegimeError as exc:
        print(f"preconditions: FAIL ({exc})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bosecorr",
        description="Bose-Hubbard dynamics with a correlation-spread verification harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one configured run and all enabled checks")
    p_run.add_argument("config")
    p_run.add_argument("--output", default=None)

    p_sweep = sub.add_parser("sweep", help="expand a sweep config and aggregate trends")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--output", default=None)
    p_sweep.add_argument("--jobs", type=int, default=1)

    p_const = sub.add_parser("constants", help="print derived constants, no Fock space")
    p_const.add_argument("--d", type=int, required=True)
    p_const.add_argument("--L", type=int, required=True)
    p_const.add_argument("--alpha", type=float, required=True)
    p_const.add_argument("--cj", type=float, required=True)
    p_const.add_argument("--v", type=float, required=True)
    p_const.add_argument("--R", type=float, required=True)
    p_const.add_argument("--r", type=float, required=True)
    p_const.add_argument("--lam", type=float, default=1.0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args.config, args.output)
        if args.command == "sweep":
            return cmd_sweep(args.config, args.output, args.jobs)
        return cmd_constants(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except RegimeError as exc:
        print(f"regime violation: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except CapacityError as exc:
        print(f"capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())

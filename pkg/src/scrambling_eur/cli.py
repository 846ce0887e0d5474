"""Command-line entry point: ``scrambling-eur <subcommand>``.

Every subcommand exits 0 iff all computed rows satisfy the uncertainty
relation being checked.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .experiments import (
    ConfigError,
    check_random_instances,
    emit,
    fig4_config,
    load_config,
    reference_config,
    run_fig4,
    run_kfold_demo,
    run_qubit_weakvalue_demo,
    run_sweep,
    summarize,
)
from .experiments.sweep import SweepContext

log = logging.getLogger("scrambling_eur")


def _add_output(p: argparse.ArgumentParser, default: str | None = None):
    p.add_argument("-o", "--output", default=default, help="output file (CSV or JSON)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--reproducible", action="store_true", help="omit the timestamp from the metadata sidecar")


def _add_grid(p: argparse.ArgumentParser):
    p.add_argument("--n-steps", type=int, default=None, help="number of time points")
    p.add_argument("--t-min", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scrambling-eur", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a sweep described by a TOML config")
    p.add_argument("config")
    _add_output(p)
    _add_grid(p)

    for name in ("fig1", "fig2", "fig3"):
        p = sub.add_parser(name, help=f"built-in eight-qubit Gibbs sweep ({name})")
        _add_output(p, default=f"{name}.csv")
        _add_grid(p)

    p = sub.add_parser("fig4", help="fine-grained sweep on a W(t*) eigenstate at g~=0.16")
    p.add_argument("--which", type=int, default=0, help="computational basis index of the eigenstate")
    p.add_argument("--t-star", type=float, default=4.0)
    _add_output(p, default="fig4.csv")
    _add_grid(p)

    p = sub.add_parser("qubit-demo", help="qubit weak-value uncertainty relation")
    p.add_argument("--gtilde", type=float, default=0.02)

    p = sub.add_parser("kfold-demo", help="K-fold OTOC quasiprobability on a three-qubit chain")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--t", type=float, default=2.0)

    p = sub.add_parser("check-theorem", help="randomized small-instance theorem checks")
    p.add_argument("--random", type=int, default=200, metavar="N")
    p.add_argument("--seed", type=int, default=0)
    return parser


def _apply_grid(cfg, args):
    over = {k: v for k, v in (("n_steps", args.n_steps), ("t_min", args.t_min), ("t_max", args.t_max)) if v is not None}
    return cfg.replace(sweep=over) if over else cfg


def _run_and_emit(cfg, args, runner) -> int:
    ctx = SweepContext(cfg)
    records = runner(cfg, ctx)
    path = args.output or cfg.output.path or "sweep.csv"
    fmt = args.format or (cfg.output.format if not args.output else Path(path).suffix.lstrip(".") or "csv")
    if fmt not in ("csv", "json"):
        fmt = "csv"
    meta = {"config": cfg.to_dict(), **ctx.metadata(), "t_star_estimate": records[0].t_star_estimate}
    emit(records, fmt, path, metadata=meta, reproducible=args.reproducible)
    bad = [r.t for r in records if not r.satisfied()]
    print(f"wrote {len(records)} records to {path}; t* estimate {records[0].t_star_estimate:.4g}")
    if bad:
        print(f"uncertainty relation violated at t = {bad}")
    return 0 if not bad else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "sweep":
            cfg = _apply_grid(load_config(args.config), args)
            return _run_and_emit(cfg, args, run_sweep)
        if args.command in ("fig1", "fig2", "fig3"):
            return _run_and_emit(_apply_grid(reference_config(), args), args, run_sweep)
        if args.command == "fig4":
            cfg = _apply_grid(fig4_config(which=args.which, t_star=args.t_star), args)
            return _run_and_emit(cfg, args, lambda c, _ctx: run_fig4(c))
        if args.command == "qubit-demo":
            rec = run_qubit_weakvalue_demo(args.gtilde)
            print(f"g~ = {rec.gtilde:g}: H_min(I) + H_max(II) = {rec.lhs_minmax:.6f} >= f_weak = {rec.f_weak:.6f}")
            for (z, x), v in sorted(rec.weak_values.items()):
                print(f"  A_w(z={z:+d}, x={x:+d}) = {v.real:+.6f}{v.imag:+.6f}i")
            return 0 if rec.satisfied else 1
        if args.command == "kfold-demo":
            out = run_kfold_demo(k=args.k, t=args.t)
            print(f"K = {out['k']}, t = {out['t']:g}")
            print(f"  correlator          {out['kfold_otoc']:.12g}")
            print(f"  coarse-grained      {out['coarse_grained']:.12g}")
            print(f"  zeroth-order bound  {out['bound'].value:.6f} bits")
            return 0 if out["identity_error"] < 1e-10 else 1
        if args.command == "check-theorem":
            checks = check_random_instances(args.random, args.seed)
            s = summarize(checks)
            print(
                f"{s['instances']} instances: {s['theorem_failures']} theorem failures, "
                f"{s['chain_failures']} bound-chain failures, worst slack {s['worst_theorem_slack']:.4g} bits"
            )
            return 0 if s["theorem_failures"] == 0 and s["chain_failures"] == 0 else 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())

"""Command line entry point: ``flowqubo {run,sweep,compare,validate}``."""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from . import export
from .config import CaseConfig
from .encoding import count_inconsistencies
from .optimize import OptimizationError, compare, run_annealing_optimization, run_sweep

log = logging.getLogger("flowqubo")


def _load(args) -> tuple[CaseConfig, str | None]:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.backend is not None:
        overrides["backend"] = args.backend
    if args.config:
        text = Path(args.config).read_text()
        return CaseConfig.from_text(text, **overrides), text
    return CaseConfig(**overrides), None


def _parse_values(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def cmd_run(args) -> int:
    cfg, text = _load(args)
    out = Path(args.out)
    export.echo_config(out, cfg, text)
    try:
        res = run_annealing_optimization(cfg, keep_designs=args.steps)
    except OptimizationError as exc:
        export.write_history(out / "annealing_history.csv", exc.history, bool(cfg.record_timing))
        raise
    mesh = cfg.mesh()
    export.export_run(out, "annealing", mesh, res.history, res.design, res.flow, cfg.alpha_max,
                      bool(cfg.record_timing), res.designs)
    print(f"steps={len(res.history)} J={res.final_J:.6e} volume_fraction={res.history[-1].volume_fraction:.6f}")
    return 0


def cmd_sweep(args) -> int:
    cfg, text = _load(args)
    if len(args.param) != len(args.values) or not 1 <= len(args.param) <= 2:
        raise ValueError("give one or two --param names, each with a matching --values list")
    out = Path(args.out)
    export.echo_config(out, cfg, text)
    names = args.param[0] if len(args.param) == 1 else tuple(args.param)
    values = _parse_values(args.values[0]) if len(args.param) == 1 else [_parse_values(v) for v in args.values]
    entries = run_sweep(cfg, names, values)
    mesh = cfg.mesh()
    rows = []
    for i, e in enumerate(entries):
        sub = out / f"run{i:03d}"
        r = e.result
        export.export_run(sub, "annealing", mesh, r.history, r.design, r.flow, cfg.alpha_max, bool(cfg.record_timing))
        full = cfg.formulation == "full"
        rows.append([
            i,
            *(export._fmt(float(v)) for v in e.values.values()),
            len(r.history),
            export._fmt(r.final_J),
            export._fmt(r.history[-1].volume_fraction),
            count_inconsistencies(r.design) if full else "",
            count_inconsistencies(r.design, strict=True) if full else "",
        ])
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["run", *entries[0].values.keys(), "steps", "J", "volume_fraction", "inconsistencies", "inconsistencies_strict"])
        w.writerows(rows)
    print(f"{len(entries)} runs written to {out / 'sweep.csv'}")
    return 0


def cmd_compare(args) -> int:
    cfg, text = _load(args)
    out = Path(args.out)
    export.echo_config(out, cfg, text)
    cmp = compare(cfg)
    mesh = cfg.mesh()
    timing = bool(cfg.record_timing)
    c, a = cmp.classical, cmp.annealing
    export.export_run(out, "classical", mesh, c.history, c.design, c.flow, cfg.alpha_max, timing)
    export.export_run(out, "annealing", mesh, a.history, a.design, a.flow, cfg.alpha_max, timing)
    (out / "comparison.csv").write_text(cmp.table())
    sys.stdout.write(cmp.table())
    return 0


def cmd_validate(args) -> int:
    from .validate import run_checks

    results = run_checks()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return 0 if all(ok for _, ok, _ in results) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flowqubo", description="Annealing-based topology optimization of flow channels")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        sp.add_argument("--config", help="flat key = value config file")
        if out:
            sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--seed", type=int, help="master RNG seed (overrides config)")
        sp.add_argument("--backend", choices=["local-sa"], help="QUBO solver backend")

    r = sub.add_parser("run", help="one annealing-based optimization")
    common(r)
    r.add_argument("--steps", action="store_true", help="also write one VTK file per step")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="hyperparameter study (1D or 2D grid)")
    common(s)
    s.add_argument("--param", action="append", required=True, help="lambda_char, lambda_reg, lambda_dis or lambda_vol")
    s.add_argument("--values", action="append", required=True, help="comma-separated values for the matching --param")
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("compare", help="classical density method vs annealing")
    common(c)
    c.set_defaults(func=cmd_compare)

    v = sub.add_parser("validate", help="Poiseuille and oracle self-tests")
    v.set_defaults(func=cmd_validate, config=None, seed=None, backend=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"flowqubo: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

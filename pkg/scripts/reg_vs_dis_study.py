"""Effect of lambda_reg versus lambda_dis on the final characteristic function.

Runs the lambda_dis x lambda_reg grid (full formulation, diffuser) and prints
the fraction of elements that differ between designs along each row and column.
"""
import argparse
import itertools
import logging

import numpy as np

from flowqubo.config import diffuser_config
from flowqubo.optimize import run_sweep


def parse(text):
    return [float(v) for v in text.split(",")]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dis", default="1,10,100,1000")
    ap.add_argument("--reg", default="0.1,1,10,100")
    ap.add_argument("--lambda-char", type=float, default=3.0)
    ap.add_argument("--max-steps", type=int, default=10)
    ap.add_argument("--restarts", type=int, default=4)
    ap.add_argument("--show", action="store_true", help="print each design as text")
    args = ap.parse_args()
    logging.basicConfig(level=logging.WARNING)

    dis, reg = parse(args.dis), parse(args.reg)
    cfg = diffuser_config(formulation="full", lambda_vol=20.0, n_bits=8, lambda_char=args.lambda_char,
                          max_steps=args.max_steps, restarts=args.restarts)
    entries = run_sweep(cfg, ("lambda_dis", "lambda_reg"), (dis, reg))
    chi = {tuple(e.values.values()): e.result.design.chi for e in entries}

    def spread(keys):
        return max((np.mean(chi[a] != chi[b]) for a, b in itertools.combinations(keys, 2)), default=0.0)

    for d in dis:
        print(f"lambda_dis={d:g}: lambda_reg varied -> max change {spread([(d, r) for r in reg]):.1%}")
    for r in reg:
        print(f"lambda_reg={r:g}: lambda_dis varied -> max change {spread([(d, r) for d in dis]):.1%}")
    if args.show:
        for (d, r), c in chi.items():
            print(f"\nlambda_dis={d:g} lambda_reg={r:g}")
            for row in c.reshape(cfg.ny, cfg.nx)[::-1]:
                print("".join("." if x else "#" for x in row))


if __name__ == "__main__":
    main()

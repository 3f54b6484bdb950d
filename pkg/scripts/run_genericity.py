#!/usr/bin/env python3
"""Perturbation experiment: sample modules near an indecomposable and count
how many stay near-indecomposable after tau-smoothing.

Acceptance: accepted trials carry a verified interleaving witness below mu,
and every accepted trial should pass the tau test (pass rate 1)."""

import argparse

from obspers import library
from obspers.stability import perturbation_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=30)
    ap.add_argument("--seed", type=int, default=2)
    ap.add_argument("--lam", type=int, default=1, help="leg twist in F_5^x")
    args = ap.parse_args()

    v = library.m_lambda(5, args.lam)
    rep = perturbation_experiment(v, trials=args.trials, seed=args.seed)
    print(f"base module: twisted-leg lambda={args.lam} over F_5, "
          f"eps={rep.eps} mu={rep.mu} tau={rep.tau}")
    for t in rep.trials:
        mark = "pass" if t.tau_pass else ("FAIL" if t.accepted else "-")
        eps = "" if t.witness_eps is None else f" d<={t.witness_eps}"
        print(f"  [{t.index:02d}] {t.sampler:<12} "
              f"{'accepted' if t.accepted else 'rejected':<8} {mark:<4} "
              f"{t.reason}{eps}")
    rate = "n/a" if rep.pass_rate is None else str(rep.pass_rate)
    print(f"accepted {rep.accepted}/{len(rep.trials)}, passes {rep.passes}, "
          f"pass rate {rate}")


if __name__ == "__main__":
    main()

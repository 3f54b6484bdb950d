#!/usr/bin/env python3
"""Emit a small gallery of JSON inputs for the obspers CLI.

Writes modules, an interleaving witness, a simplicial complex with vertex
values, a metric space, and a Cauchy chain manifest into --out, then prints
a few commands worth running against them.
"""

import argparse
import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from obspers import library
from obspers.calculus import lattice_grid, restrict_extend, restriction_pair
from obspers.fields import PrimeField
from obspers.metric import verify
from obspers.serialize import (complex_to_json, interleaving_to_json,
                               metric_to_json, module_to_json, write_json)
from obspers.stepmodule import Grid


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="examples_out")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)

    F2 = PrimeField(2)

    fam_dir = out / "mlam"
    fam_dir.mkdir(exist_ok=True)
    for lam in range(1, 5):
        write_json(fam_dir / f"mlam_{lam}.json", module_to_json(library.m_lambda(5, lam)))

    v = library.random_module(F2, rng)
    write_json(out / "random_module.json", module_to_json(v))
    w, _names = library.random_library_sum(2, rng, 3)
    write_json(out / "library_sum.json", module_to_json(w))

    # a verified 1/2-interleaving: v against its half-integer discretization
    pair = restriction_pair(v, lattice_grid(Fraction(1, 2), v.grid.min_corner(),
                                            v.grid.max_corner()), Fraction(1, 2))
    wit = verify(v, pair.module, Fraction(1, 2), pair.f, pair.g)
    write_json(out / "interleaving.json", interleaving_to_json(wit))

    # hollow triangle with 2-parameter vertex values, ready for `sublevel`
    from obspers.pipelines import complex_from_simplices, metric_space
    cx = complex_from_simplices([(0, 1), (0, 2), (1, 2)])
    values = {0: (0, 0), 1: (Fraction(1, 2), Fraction(1, 4)), 2: (1, Fraction(1, 2))}
    write_json(out / "triangle.json", complex_to_json(cx, values))

    rows = [[0, 1, 1, 3], [1, 0, 1, 3], [1, 1, 0, 3], [3, 3, 3, 0]]
    write_json(out / "cluster_metric.json", metric_to_json(metric_space(list(range(4)), rows)))

    # Cauchy chain: dyadic restrictions of a constant block, manifest + parts
    base = library.constant_module(F2, Grid(((0, 1), (0, 1))))
    terms, links = [], []
    grids = [lattice_grid(Fraction(1, 2 ** k), (0, 0), (1, 1)) for k in range(3)]
    mods = [restrict_extend(base, g) for g in grids]
    for k, m in enumerate(mods):
        name = f"chain_term_{k}.json"
        write_json(out / name, module_to_json(m))
        terms.append(name)
    for k in range(2):
        eps = Fraction(1, 2 ** k)
        p = restriction_pair(mods[k + 1], grids[k], eps)
        cert = verify(mods[k], mods[k + 1], eps, p.g, p.f)
        name = f"chain_link_{k}.json"
        write_json(out / name, interleaving_to_json(cert))
        links.append(name)
    (out / "chain.json").write_text(json.dumps(
        {"format": "obspers/1", "kind": "chain", "terms": terms, "links": links},
        sort_keys=True, indent=2) + "\n")

    print(f"wrote {len(list(out.rglob('*.json')))} files under {out}/")
    print("try:")
    print(f"  obspers validate {out}/random_module.json")
    print(f"  obspers distance {fam_dir}/mlam_1.json {fam_dir}/mlam_2.json")
    print(f"  obspers decompose {out}/library_sum.json")
    print(f"  obspers limit {out}/chain.json")
    print(f"  obspers probe --delta 1 {fam_dir}")
    print(f"  obspers sublevel {out}/triangle.json --out {out}")
    print(f"  obspers degree-rips --radii 1,3 --degrees 1,2 {out}/cluster_metric.json --out {out}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Run a small benchmark grid and print the method ranking per cell.

Two auxiliary-divergence levels r, all six methods, a handful of trials at
p=20 with skewed margins. Takes a minute or two on one core.

What to look for: at r=2 the divergence is tiny (entries bounded by r/p=0.1),
so plain rank pooling (CPC) is hard to beat and the divergence-corrected CTC
pays a small premium for estimating a correction it does not need. Raising r
to 20 hurts the uncorrected poolers while CTC holds or improves. The gap
widens with dimension; the p=50 acceptance cell shows CTC in front.
"""

from tcclime import BenchmarkSuite, run_benchmark


def main():
    suite = BenchmarkSuite(
        designs=("banded",),
        transforms=("exponential",),
        r_values=(2.0, 20.0),
        n_informative=(2,),
        methods=("C", "CC", "TC", "PC", "CPC", "CTC"),
        trials=4,
        p=20,
        n=100,
        n_k=100,
        n_studies=3,
        seed=4,
        use_cv=False,
        c_n=1.0,
        fpr_grid_size=21,
    )
    result = run_benchmark(suite, 1)
    print(f"{len(result.rows)} fits, {len(result.failures)} failures")
    # summary rows are per (cell, method); group and rank once per cell
    cells = sorted({(c["design"], c["transform"], c["r"], c["n_info"]) for c in result.summary})
    for key in cells:
        rows = [c for c in result.summary if (c["design"], c["transform"], c["r"], c["n_info"]) == key]
        rows.sort(key=lambda c: c["mean_frob"])
        print(f"\nr={key[2]:g}: mean frobenius error over {suite.trials} trials")
        for c in rows:
            print(f"  {c['method']:>3}  {c['mean_frob']:7.3f} +- {c['se_frob']:.3f}")


if __name__ == "__main__":
    main()

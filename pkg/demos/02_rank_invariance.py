#!/usr/bin/env python3
"""Why rank correlation: it ignores monotone marginal distortions.

The same latent Gaussian sample is pushed through increasingly nasty monotone
maps. The Kendall-based correlation estimate does not change by a single bit,
while the Pearson estimate drifts away from the latent truth.
"""

import numpy as np

from tcclime import (
    StudyDataset,
    pearson_correlation_matrix,
    rank_correlation_matrix,
)
from tcclime.linalg import max_abs


def main():
    rng = np.random.default_rng(7)
    p, n, rho = 6, 500, 0.6
    sigma = rho ** np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
    latent = rng.multivariate_normal(np.zeros(p), sigma, size=n)

    maps = {
        "identity": lambda x: x,
        "exp": np.exp,
        "cube": lambda x: x ** 3,
        "exp(3x)": lambda x: np.exp(3.0 * x),
    }

    base_rank = rank_correlation_matrix(StudyDataset(latent)).s_hat
    print(f"latent AR(0.6) correlation, p={p}, n={n}")
    print(f"{'transform':>10}  {'rank est err':>12}  {'bitwise same':>12}  {'pearson err':>12}")
    for name, g in maps.items():
        data = StudyDataset(g(latent))
        s_rank = rank_correlation_matrix(data).s_hat
        s_pear = pearson_correlation_matrix(data)
        print(
            f"{name:>10}  {max_abs(s_rank - sigma):12.4f}  "
            f"{str(np.array_equal(s_rank, base_rank)):>12}  {max_abs(s_pear - sigma):12.4f}"
        )
    print("\nrank column is constant and bit-identical across transforms;")
    print("pearson degrades as the marginal map gets more convex.")


if __name__ == "__main__":
    main()

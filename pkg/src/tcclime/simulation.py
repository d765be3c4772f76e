"""Synthetic data generation: precision designs, auxiliary studies, sampling.

The target truth is built in two stages: a structured precision matrix is
inverted, rescaled to a correlation matrix, and re-inverted, so the final
(omega, sigma) pair satisfies sigma = omega^{-1} with unit diagonal sigma.
Auxiliary studies perturb the target through divergence matrices and are
repaired (symmetrize, eigenvalue floor, rescale) into valid correlation
matrices before sampling.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.integrate
import scipy.linalg
from scipy.special import ndtr

from .exceptions import ConfigError, DataError, QuadratureFailure
from .linalg import invert_pd, pd_project, rescale_to_correlation
from .linalg import cholesky as chol_factor
from .rank_correlation import StudyDataset

__all__ = [
    "PrecisionDesign",
    "TransformSpec",
    "AuxDesign",
    "Scenario",
    "banded_precision",
    "block_toeplitz_precision",
    "design_truth",
    "draw_divergence",
    "informative_aux_covariance",
    "noninformative_aux_covariance",
    "gaussian_cdf_transform_value",
    "apply_transform",
    "sample_nonparanormal",
    "simulate_scenario",
    "divergence_norms",
]

DESIGN_KINDS = ("banded", "block_toeplitz")
TRANSFORM_KINDS = ("gaussian_cdf", "exponential", "linear")

# Substream tags: every random draw hangs off SeedSequence((seed, tag, ...)).
_TAG_TARGET = 11
_TAG_AUX_COV = 23
_TAG_AUX_DATA = 37

QUAD_ABS_TOL = 1e-10


@dataclass(frozen=True)
class PrecisionDesign:
    """Which structured precision matrix to use and at what dimension."""

    kind: str = "banded"
    p: int = 100

    def __post_init__(self):
        if self.kind not in DESIGN_KINDS:
            raise ConfigError(f"unknown design kind {self.kind!r}; choose from {DESIGN_KINDS}")
        if self.kind == "banded" and self.p < 8:
            raise ConfigError(f"banded design needs p >= 8, got {self.p}")
        if self.kind == "block_toeplitz" and (self.p < 4 or self.p % 4 != 0):
            raise ConfigError(f"block design needs p divisible by 4, got {self.p}")


@dataclass(frozen=True)
class TransformSpec:
    """Coordinatewise monotone transform applied to latent Gaussian samples."""

    kind: str = "gaussian_cdf"
    mu_g0: float = 0.05
    sigma_g0: float = 0.4

    def __post_init__(self):
        if self.kind not in TRANSFORM_KINDS:
            raise ConfigError(f"unknown transform kind {self.kind!r}; choose from {TRANSFORM_KINDS}")
        if not self.sigma_g0 > 0:
            raise ConfigError(f"sigma_g0 must be positive, got {self.sigma_g0}")


@dataclass(frozen=True)
class AuxDesign:
    """How an auxiliary study's covariance relates to the target."""

    informative: bool = True
    r: float = 10.0
    sparsity_prob: float = 0.1

    def __post_init__(self):
        if self.informative and not self.r > 0:
            raise ConfigError(f"informative studies need r > 0, got {self.r}")
        if not 0 <= self.sparsity_prob <= 1:
            raise ConfigError(f"sparsity_prob must lie in [0, 1], got {self.sparsity_prob}")


def _finalize_truth(omega0):
    sigma = rescale_to_correlation(invert_pd(omega0))
    omega = invert_pd(sigma)
    return omega, sigma


def banded_precision(p):
    """Banded target: raw entries 2 * 0.6^|i-j| inside bandwidth 8.

    Returns the finalized (omega, sigma) pair after the rescale-and-reinvert
    step, so sigma has unit diagonal and omega = sigma^{-1}.
    """
    PrecisionDesign("banded", p)
    dist = np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
    omega0 = 2.0 * 0.6**dist * (dist <= 7)
    return _finalize_truth(omega0)


def block_toeplitz_precision(p):
    """Block-diagonal target: p/4 identical 4x4 Toeplitz(1.2, 0.9, 0.6, 0.3) blocks."""
    PrecisionDesign("block_toeplitz", p)
    block = scipy.linalg.toeplitz([1.2, 0.9, 0.6, 0.3])
    omega0 = np.kron(np.eye(p // 4), block)
    return _finalize_truth(omega0)


def design_truth(design):
    """(omega, sigma) for a PrecisionDesign."""
    if design.kind == "banded":
        return banded_precision(design.p)
    return block_toeplitz_precision(design.p)


def draw_divergence(p, r, rng, sparsity_prob=0.1):
    """Sparse divergence draw: each entry 0 w.p. 0.9, else U[-r/p, r/p]."""
    if not r > 0:
        raise ConfigError(f"informative aux needs r > 0, got {r}")
    keep = rng.random((p, p)) < sparsity_prob
    draw = rng.uniform(-r / p, r / p, size=(p, p))
    return np.where(keep, draw, 0.0)


def informative_aux_covariance(sigma, omega, r, rng, eps=1e-3):
    """Auxiliary correlation matrix close to the target in divergence norm.

    Draws a sparse divergence matrix via draw_divergence, forms
    sigma @ (delta + I), then symmetrizes, floors the spectrum at eps and
    rescales to unit diagonal.
    """
    sigma = np.asarray(sigma, dtype=float)
    omega = np.asarray(omega, dtype=float)
    p = sigma.shape[0]
    if omega.shape != sigma.shape:
        raise DataError("sigma and omega must have matching shapes")
    if float(np.max(np.abs(omega @ sigma - np.eye(p)))) > 1e-6:
        raise DataError("omega is not the inverse of sigma")
    delta = draw_divergence(p, r, rng)
    raw = sigma @ (delta + np.eye(p))
    sym = (raw + raw.T) / 2.0
    return rescale_to_correlation(pd_project(sym, eps))


def noninformative_aux_covariance(p, rng, eps=1e-3):
    """Auxiliary correlation matrix unrelated to the target.

    Builds a sparse random precision matrix 1.5*I + (0.2 mass w.p. 0.1),
    symmetrizes and floors it, then inverts and rescales.
    """
    if p < 2:
        raise ConfigError(f"need p >= 2, got {p}")
    delta = np.where(rng.random((p, p)) < 0.1, 0.2, 0.0)
    omega_k = 1.5 * np.eye(p) + delta
    omega_k = pd_project((omega_k + omega_k.T) / 2.0, eps)
    return rescale_to_correlation(invert_pd(omega_k))


@lru_cache(maxsize=None)
def _transform_constants(mu_g0, sigma_g0, mu_j, sigma_j):
    """Centering and scaling constants of the Gaussian-CDF transform.

    Mean and standard deviation of g0(T) = Phi((T - mu_g0)/sigma_g0) with
    T ~ N(mu_j, sigma_j^2), by adaptive quadrature on [mu_j +- 8 sigma_j].
    """
    lo, hi = mu_j - 8.0 * sigma_j, mu_j + 8.0 * sigma_j
    norm = 1.0 / (sigma_j * np.sqrt(2.0 * np.pi))

    def density(t):
        return norm * np.exp(-0.5 * ((t - mu_j) / sigma_j) ** 2)

    def g0(t):
        return ndtr((t - mu_g0) / sigma_g0)

    mean, err1 = scipy.integrate.quad(
        lambda t: g0(t) * density(t), lo, hi, epsabs=QUAD_ABS_TOL, epsrel=1e-12, limit=200
    )
    var, err2 = scipy.integrate.quad(
        lambda t: (g0(t) - mean) ** 2 * density(t), lo, hi, epsabs=QUAD_ABS_TOL, epsrel=1e-12, limit=200
    )
    if err1 > QUAD_ABS_TOL or err2 > QUAD_ABS_TOL:
        raise QuadratureFailure(
            f"transform integrals did not reach tolerance: errors {err1:.2e}, {err2:.2e}"
        )
    if var <= 0:
        raise QuadratureFailure("nonpositive variance integral")
    return mean, float(np.sqrt(var))


def gaussian_cdf_transform_value(z, mu_g0=0.05, sigma_g0=0.4, mu_j=0.0, sigma_j=1.0):
    """Centered and scaled Gaussian-CDF transform value(s) at z.

    g(z) = (Phi((z - mu_g0)/sigma_g0) - m) / s where m, s normalize g to
    mean 0 and variance 1 under z ~ N(mu_j, sigma_j^2).
    """
    if not sigma_j > 0:
        raise ConfigError(f"sigma_j must be positive, got {sigma_j}")
    mean, scale = _transform_constants(float(mu_g0), float(sigma_g0), float(mu_j), float(sigma_j))
    return (ndtr((np.asarray(z, dtype=float) - mu_g0) / sigma_g0) - mean) / scale


def apply_transform(z, spec):
    """Apply a TransformSpec elementwise to latent Gaussian draws."""
    if spec.kind == "linear":
        return np.asarray(z, dtype=float)
    if spec.kind == "exponential":
        return np.exp(z)
    return gaussian_cdf_transform_value(z, spec.mu_g0, spec.sigma_g0)


def sample_nonparanormal(sigma, spec, n, rng, label="target", kind="target"):
    """Draw n rows of the copula model: g applied to N(0, sigma) samples."""
    sigma = np.asarray(sigma, dtype=float)
    lower = chol_factor(sigma)
    z = rng.standard_normal((n, sigma.shape[0])) @ lower.T
    return StudyDataset(apply_transform(z, spec), label=label, kind=kind)


def divergence_norms(delta):
    """Summary norms of a realized divergence matrix for manifests."""
    delta = np.asarray(delta, dtype=float)
    return {
        "max_abs": float(np.max(np.abs(delta))),
        "max_row_l1": float(np.max(np.sum(np.abs(delta), axis=1))),
        "max_col_l1": float(np.max(np.sum(np.abs(delta), axis=0))),
    }


@dataclass
class Scenario:
    """Everything one simulated experiment needs: truth, datasets, bookkeeping."""

    design: str
    transform: TransformSpec
    p: int
    n: int
    n_k: int
    n_studies: int
    informative: tuple
    r: float
    seed: int
    omega: np.ndarray
    sigma: np.ndarray
    aux_sigmas: list
    aux_deltas: list
    target: StudyDataset
    aux: list


def _rng(*entropy):
    return np.random.default_rng(np.random.SeedSequence(entropy))


def simulate_scenario(
    design="banded",
    p=100,
    n=200,
    n_k=200,
    n_studies=5,
    informative=(0, 1, 2),
    r=10.0,
    transform=TransformSpec(),
    seed=0,
    eps=1e-3,
):
    """Generate one full multi-study experiment.

    Auxiliary studies listed in ``informative`` (0-based indices) perturb the
    target covariance by a sparse divergence of size r; the rest follow an
    unrelated random precision design. All randomness derives from ``seed``
    through fixed per-study substreams, so equal seeds give bit-identical
    scenarios regardless of call order elsewhere.
    """
    spec = PrecisionDesign(design, p)
    if isinstance(transform, str):
        transform = TransformSpec(kind=transform)
    informative = tuple(sorted(int(k) for k in informative))
    if any(k < 0 or k >= n_studies for k in informative):
        raise ConfigError(
            f"informative indices {informative} out of range for {n_studies} studies"
        )
    if len(set(informative)) != len(informative):
        raise ConfigError(f"informative indices must be unique, got {informative}")
    if seed < 0:
        raise ConfigError(f"seed must be nonnegative, got {seed}")
    if n < 2 or n_k < 2:
        raise ConfigError("need at least 2 samples per study")
    omega, sigma = design_truth(spec)
    eye = np.eye(p)
    target = sample_nonparanormal(
        sigma, transform, n, _rng(seed, _TAG_TARGET), label="target", kind="target"
    )
    aux_sigmas = []
    aux_deltas = []
    aux = []
    for k in range(n_studies):
        cov_rng = _rng(seed, _TAG_AUX_COV, k)
        if k in informative:
            sig_k = informative_aux_covariance(sigma, omega, r, cov_rng, eps)
        else:
            sig_k = noninformative_aux_covariance(p, cov_rng, eps)
        aux_sigmas.append(sig_k)
        aux_deltas.append(omega @ sig_k - eye)
        aux.append(
            sample_nonparanormal(
                sig_k,
                transform,
                n_k,
                _rng(seed, _TAG_AUX_DATA, k),
                label=f"aux_{k}",
                kind="auxiliary",
            )
        )
    return Scenario(
        design=design,
        transform=transform,
        p=p,
        n=n,
        n_k=n_k,
        n_studies=n_studies,
        informative=informative,
        r=float(r),
        seed=int(seed),
        omega=omega,
        sigma=sigma,
        aux_sigmas=aux_sigmas,
        aux_deltas=aux_deltas,
        target=target,
        aux=aux,
    )

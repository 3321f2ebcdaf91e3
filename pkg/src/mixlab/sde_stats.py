"""Monte Carlo estimators built on the path engine.

Escape probabilities (heat content), coupled strong-error statistics, and
the distributional comparison of the two frozen Gaussian surrogates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .coefficients import averaged_coefficients
from .errors import SimulationError
from .families import MetricFamily
from .regions import Region
from .sde import (
    InitialLaw,
    PathEnsemble,
    derive_seeds,
    euler_maruyama,
    indicator_law,
    point_mass_law,
    sde_spec_for_family,
)

__all__ = [
    "heat_content_mc",
    "strong_error",
    "StrongErrorReport",
    "law_equality_check",
    "LawEqualityReport",
]

#: fixed unit vectors used for 1-D distribution projections
PROJECTIONS = np.array([
    [1.0, 0.0],
    [0.0, 1.0],
    [1.0 / np.sqrt(2.0), 1.0 / np.sqrt(2.0)],
    [1.0 / np.sqrt(2.0), -1.0 / np.sqrt(2.0)],
])


def heat_content_mc(region: Region, family: MetricFamily, eps: float,
                    n_paths: int, n_steps: int, seed: int,
                    law: InitialLaw | None = None):
    """Estimate the diffusive outflow by simulating the backward process.

    Samples the initial position from the region's mass-weighted indicator
    (or a caller-provided law), runs the time-reversed diffusion, and
    returns ``mass * fraction escaped`` with its binomial standard error.
    """
    if law is None:
        law = indicator_law(region, family)
    spec = sde_spec_for_family(family, eps, time_reversed=True)
    ens = euler_maruyama(spec, law, n_paths, n_steps, seed)
    outside = ~np.asarray(region.contains(ens.endpoints), dtype=bool)
    p = float(np.mean(outside))
    estimate = law.mass * p
    se = law.mass * float(np.sqrt(p * (1.0 - p) / n_paths))
    return estimate, se


@dataclass
class StrongErrorReport:
    """Checkpoint-resolved mean squared gap between two coupled ensembles."""

    times: np.ndarray
    mean_sq_gap: np.ndarray
    se: np.ndarray
    max_mean_sq_gap: float
    se_at_max: float
    argmax_time: float


def strong_error(ens_a: PathEnsemble, ens_b: PathEnsemble) -> StrongErrorReport:
    """Max over checkpoints of mean |A_t - B_t|^2, with its standard error.

    Both ensembles must be driven by the same noise (same tag) from the same
    initial samples; an uncoupled comparison is meaningless and is refused.
    """
    if ens_a.shared_noise_tag != ens_b.shared_noise_tag:
        raise SimulationError("ensembles do not share a noise tag")
    if ens_a.n_paths != ens_b.n_paths:
        raise SimulationError("ensembles have different path counts")
    if ens_a.checkpoints is None or ens_b.checkpoints is None:
        raise SimulationError("strong_error needs checkpointed ensembles")
    if not np.array_equal(ens_a.checkpoint_times, ens_b.checkpoint_times):
        raise SimulationError("checkpoint times differ between ensembles")
    if not np.array_equal(ens_a.initial, ens_b.initial):
        raise SimulationError("ensembles started from different samples")

    gap = ens_a.checkpoints - ens_b.checkpoints
    sq = np.sum(gap * gap, axis=-1)          # (n_ckpt, N)
    means = sq.mean(axis=1)
    n = sq.shape[1]
    ses = sq.std(axis=1, ddof=1) / np.sqrt(n) if n > 1 else np.zeros_like(means)
    idx = int(np.argmax(means))
    return StrongErrorReport(
        times=np.asarray(ens_a.checkpoint_times, dtype=float),
        mean_sq_gap=means,
        se=ses,
        max_mean_sq_gap=float(means[idx]),
        se_at_max=float(ses[idx]),
        argmax_time=float(ens_a.checkpoint_times[idx]),
    )


@dataclass
class LawEqualityReport:
    """Comparison of the two frozen surrogate endpoint displacements."""

    n_paths: int
    target_cov: np.ndarray
    mean_a: np.ndarray
    mean_b: np.ndarray
    cov_a: np.ndarray
    cov_b: np.ndarray
    mean_ok: bool
    cov_ok: bool
    ks_pvalues: np.ndarray
    ks_ok: bool
    gaussian_pvalues: np.ndarray
    gaussian_ok: bool
    inconclusive: bool

    @property
    def passed(self) -> bool | None:
        if self.inconclusive:
            return None
        return bool(self.mean_ok and self.cov_ok and self.ks_ok)


def _cov_entry_se(cov: np.ndarray, n: int) -> np.ndarray:
    """Asymptotic standard errors of sample covariance entries."""
    v = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            v[i, j] = (cov[i, i] * cov[j, j] + cov[i, j] ** 2) / n
    return np.sqrt(v)


def law_equality_check(family: MetricFamily, x0, eps: float, n_paths: int,
                       seed: int, n_steps: int = 4096,
                       p_threshold: float = 0.01) -> LawEqualityReport:
    """Test that the two frozen surrogates share the Gaussian endpoint law.

    Simulates the frozen time-reversed process and the frozen averaged
    process from a point start with independent noise, then compares: sample
    means against 0 and covariances against eps * abar(x0) within three
    standard errors, plus two-sample KS on four fixed projections.  Also
    reports one-sample normality p-values for the first surrogate.
    """
    x0 = np.asarray(x0, dtype=float).reshape(2)
    law = point_mass_law(x0)
    seed_a, seed_b = derive_seeds(seed, 2)
    spec_a = sde_spec_for_family(family, eps, time_reversed=True, frozen=True)
    spec_b = sde_spec_for_family(family, eps, averaged=True, frozen=True)
    ens_a = euler_maruyama(spec_a, law, n_paths, n_steps, seed_a)
    ens_b = euler_maruyama(spec_b, law, n_paths, n_steps, seed_b)
    disp_a = ens_a.endpoints - x0
    disp_b = ens_b.endpoints - x0

    abar = averaged_coefficients(family).a(0.0, x0.reshape(1, 2))[0]
    target = eps * abar

    if n_paths < 2:
        zeros = np.zeros((2, 2))
        return LawEqualityReport(
            n_paths=n_paths, target_cov=target,
            mean_a=disp_a.mean(axis=0), mean_b=disp_b.mean(axis=0),
            cov_a=zeros, cov_b=zeros, mean_ok=False, cov_ok=False,
            ks_pvalues=np.full(len(PROJECTIONS), np.nan), ks_ok=False,
            gaussian_pvalues=np.full(len(PROJECTIONS), np.nan),
            gaussian_ok=False, inconclusive=True)

    mean_a = disp_a.mean(axis=0)
    mean_b = disp_b.mean(axis=0)
    cov_a = np.cov(disp_a.T, ddof=1)
    cov_b = np.cov(disp_b.T, ddof=1)

    mean_se_a = np.sqrt(np.diag(cov_a) / n_paths)
    mean_se_b = np.sqrt(np.diag(cov_b) / n_paths)
    mean_ok = bool(np.all(np.abs(mean_a) <= 3 * mean_se_a)
                   and np.all(np.abs(mean_b) <= 3 * mean_se_b))

    cov_ok = True
    for cov in (cov_a, cov_b):
        se = _cov_entry_se(cov, n_paths)
        cov_ok = cov_ok and bool(np.all(np.abs(cov - target) <= 3 * se))

    ks_p = np.array([
        stats.ks_2samp(disp_a @ e, disp_b @ e).pvalue for e in PROJECTIONS])
    gauss_p = np.array([
        stats.kstest(disp_a @ e,
                     stats.norm(scale=np.sqrt(e @ target @ e)).cdf).pvalue
        for e in PROJECTIONS])

    return LawEqualityReport(
        n_paths=n_paths, target_cov=target,
        mean_a=mean_a, mean_b=mean_b, cov_a=cov_a, cov_b=cov_b,
        mean_ok=mean_ok, cov_ok=cov_ok,
        ks_pvalues=ks_p, ks_ok=bool(np.all(ks_p >= p_threshold)),
        gaussian_pvalues=gauss_p,
        gaussian_ok=bool(np.all(gauss_p >= p_threshold)),
        inconclusive=False)

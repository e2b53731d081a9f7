"""
Monte Carlo ground truth: draw full channel realizations and evaluate the
exact mutual information ``log det(I + rho G Q G^H)``.

Every sample owns a counter-based RNG substream keyed by ``(seed, index)``,
so results do not depend on the number of worker threads or on scheduling.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import sample_with_roots, substream
from .linalg import psd_sqrt

__all__ = ["MonteCarloResult", "simulate", "sample_mi", "empirical_cdf"]

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MonteCarloResult:
    """MI samples in nats with the master seed that produced them.

    ``excluded`` counts realizations dropped because the log-det was not
    finite.
    """

    samples: np.ndarray
    seed: int
    excluded: int = 0

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def n(self):
        return self.samples.size

    @property
    def mean(self):
        return float(np.mean(self.samples))

    @property
    def variance(self):
        return float(np.var(self.samples, ddof=1)) if self.n > 1 else 0.0

    @property
    def std_error(self):
        return float(np.sqrt(self.variance / self.n))

    def cdf(self, grid):
        return empirical_cdf(self, grid)


class _Sampler:
    """Square roots and coefficients shared by all samples of one run."""

    def __init__(self, config, phases):
        if len(phases) != config.k:
            raise ValueError(f"expected {config.k} phase profiles, got {len(phases)}")
        self.config = config
        self.rho = float(config.rho)
        self.q_half = psd_sqrt(config.q)
        self.direct = None
        if config.direct_link:
            r_d, t_d = config.direct_correlations()
            self.direct = (psd_sqrt(r_d), psd_sqrt(t_d))
        self.links = []
        gammas = config.gammas()
        for k, ris in enumerate(config.ris):
            r, t = config.link_correlations(k)
            coeff = np.asarray(getattr(phases[k], "coefficients", phases[k]))
            if not np.iscomplexobj(coeff):
                coeff = np.exp(1j * coeff)
            self.links.append((r.sqrt, ris.s_r().sqrt, ris.s_t().sqrt, t.sqrt,
                               np.sqrt(gammas[k]), coeff))

    def __call__(self, seed, index):
        cfg = self.config
        rng = substream(seed, index)
        g = np.zeros((cfg.n_r, cfg.n_t), dtype=complex)
        if self.direct is not None:
            g += sample_with_roots(*self.direct, rng, n_t=cfg.n_t)
        for r, s_r, s_t, t, root_gamma, coeff in self.links:
            g_r = sample_with_roots(r, s_r, rng, n_t=cfg.n_t)
            g_t = sample_with_roots(s_t, t, rng, n_t=cfg.n_t)
            g += root_gamma * (g_r * coeff) @ g_t
        return sample_mi(g @ self.q_half, self.rho)


def sample_mi(g, rho):
    """``log det(I + rho G G^H)`` via Cholesky; ``nan`` if not finite."""
    m = np.eye(g.shape[0]) + rho * (g @ g.conj().T)
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return np.nan
    value = 2.0 * float(np.sum(np.log(np.diagonal(chol).real)))
    return value if np.isfinite(value) else np.nan


def simulate(config, phases, n_samples, seed, threads=1):
    """Exact MI for ``n_samples`` independent channel realizations.

    Parameters
    ----------
    config : SystemConfig
    phases : list of PhaseProfile or array_like
        One profile per RIS.
    n_samples : int
    seed : int
        64-bit master seed.
    threads : int
        Worker threads; the sample vector is identical for every value.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    config.check()
    sampler = _Sampler(config, phases)
    indices = range(int(n_samples))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(lambda i: sampler(seed, i), indices))
    else:
        values = [sampler(seed, i) for i in indices]
    values = np.asarray(values)
    finite = np.isfinite(values)
    excluded = int(np.count_nonzero(~finite))
    if excluded:
        log.warning("excluded %d non-finite MI samples", excluded)
    return MonteCarloResult(values[finite], int(seed), excluded)


def empirical_cdf(result, grid):
    """Right-continuous empirical CDF of the samples on ``grid``."""
    samples = np.sort(getattr(result, "samples", result))
    grid = np.asarray(grid, dtype=float)
    return np.searchsorted(samples, grid, side="right") / samples.size

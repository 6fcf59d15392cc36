"""Monte Carlo estimates of survival and half-space escape probabilities.

Chain ``i`` draws from its own counter-based stream keyed by ``(seed, i)``,
so results do not depend on how chains are split across workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distributions import GaussianDistribution
from .kernels import get_backend
from .oracle_dp import SurvivalCurve

Z95 = 1.959963984540054
INSIDE_TOL = 1e-12
BLOCK = 65_536


@dataclass
class McConfig:
    chains: int
    horizon: int
    seed: int = 0
    start: tuple | None = None
    workers: int = 1

    def __post_init__(self):
        if self.chains < 1:
            raise ValueError("chains must be >= 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")


def wilson_interval(successes, trials, z=Z95):
    """Wilson score interval for a binomial proportion (vectorized)."""
    k = np.asarray(successes, dtype=float)
    n = float(trials)
    phat = k / n
    denom = 1.0 + z * z / n
    centre = (phat + z * z / (2 * n)) / denom
    half = z * np.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    lo = np.where(k == 0, 0.0, np.clip(centre - half, 0.0, 1.0))
    hi = np.where(k == n, 1.0, np.clip(centre + half, 0.0, 1.0))
    return lo, hi


def exit_times(d, normals, x0, seed, chains, horizon, workers=1, backend=None):
    """First exit time from ``{y : normals @ y >= 0}`` for each chain.

    Survivors get ``horizon + 1``.
    """
    kern = get_backend(backend)
    normals = np.ascontiguousarray(np.atleast_2d(normals), dtype=np.float64)
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    blocks = [(s, min(BLOCK, chains - s)) for s in range(0, chains, BLOCK)]

    if isinstance(d, GaussianDistribution):
        mean = np.ascontiguousarray(d.mean, dtype=np.float64)

        def run(block):
            return kern.mc_exit_times_gauss(mean, normals, x0, seed, block[0], block[1],
                                            horizon, INSIDE_TOL)
    else:
        atoms = np.ascontiguousarray(d.atoms, dtype=np.float64)
        cum = np.cumsum(d.probs)
        cum = np.ascontiguousarray(cum / cum[-1])

        def run(block):
            return kern.mc_exit_times_atomic(atoms, cum, normals, x0, seed, block[0],
                                             block[1], horizon, INSIDE_TOL)

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(b) for b in blocks]
    return np.concatenate(parts)


def survival_mc(d, p, cfg, backend=None):
    """Empirical ``P(tau > n)``, ``n = 0..horizon``, with 95% Wilson intervals."""
    start = np.zeros(p.dim) if cfg.start is None else np.asarray(cfg.start, dtype=float)
    if not p.contains(start):
        raise ValueError("start point is not in the cone")
    times = exit_times(d, p.normals, start, cfg.seed, cfg.chains, cfg.horizon,
                       cfg.workers, backend)
    counts = np.bincount(np.minimum(times, cfg.horizon + 1), minlength=cfg.horizon + 2)
    exited_by = np.cumsum(counts)[: cfg.horizon + 1]
    survivors = cfg.chains - exited_by
    values = survivors / cfg.chains
    exits = counts[: cfg.horizon + 1] / cfg.chains
    lo, hi = wilson_interval(survivors, cfg.chains)
    return SurvivalCurve(values, exits, "mc", start, lo, hi,
                         meta={"chains": cfg.chains, "seed": cfg.seed})


@dataclass
class HalfspaceEstimate:
    prob: float
    ci_low: float
    ci_high: float
    horizon: int
    chains: int
    survivors: int


def halfspace_exit_prob(d, u, x, cfg, backend=None):
    """Fraction of chains leaving ``D_u`` within the horizon.

    Chains still inside at the horizon may leave later, so this is a lower
    estimate of ``P^x(sigma_u < inf)``; the bias is exponentially small when
    the drift points out of ``D_u``.
    """
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    times = exit_times(d, u[None, :], np.asarray(x, dtype=float), cfg.seed, cfg.chains,
                       cfg.horizon, cfg.workers, backend)
    exited = int(np.sum(times <= cfg.horizon))
    lo, hi = wilson_interval(exited, cfg.chains)
    return HalfspaceEstimate(exited / cfg.chains, float(lo), float(hi), cfg.horizon,
                             cfg.chains, cfg.chains - exited)


def binomial_sigma(prob, chains):
    return math.sqrt(max(prob * (1 - prob), 0.0) / chains)

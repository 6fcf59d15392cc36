"""Explicit rate formulas for the weighted five-step quadrant model and the
Gaussian walk in a planar wedge."""
from __future__ import annotations

import math

import numpy as np

from .distributions import AtomicDistribution, GaussianDistribution
from .errors import DomainError, DriftNotInterior, Trapped
from .geometry import Pyramid

WEIGHTED_STEPS = ((-1, 1), (0, 1), (1, 1), (1, 0), (1, -1))


def closed_form_weighted(p_m11, p_01, p_11, p_10, p_1m1):
    """Rate for the quadrant walk with steps (-1,1), (0,1), (1,1), (1,0), (1,-1).

    Arguments are the step weights in that order.

    Raises
    ------
    Trapped
        If both corner weights ``p_m11`` and ``p_1m1`` vanish.
    DriftNotInterior
        If the drift is not in the open quadrant.
    """
    w = np.array([p_m11, p_01, p_11, p_10, p_1m1], dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise DomainError("weights must be non-negative and sum to 1")
    if p_01 + p_11 + p_10 <= 0:
        raise DomainError("walk is not truly two-dimensional")
    if not (p_m11 < p_11 + p_10 + p_1m1 and p_1m1 < p_m11 + p_01 + p_11):
        raise DriftNotInterior("drift is not in the open quadrant")
    if p_m11 == 0 and p_1m1 == 0:
        raise Trapped("no step leaves the quadrant")
    if p_m11 > 0 and p_1m1 > 0:
        return max(p_01 + 2.0 * math.sqrt(p_m11 * (p_11 + p_10 + p_1m1)),
                   p_10 + 2.0 * math.sqrt(p_1m1 * (p_m11 + p_01 + p_11)))
    if p_m11 == 0:
        return p_10 + 2.0 * math.sqrt(p_1m1 * (p_01 + p_11))
    return p_01 + 2.0 * math.sqrt(p_m11 * (p_11 + p_10))


def weighted_model(p_m11, p_01, p_11, p_10, p_1m1):
    """Atomic distribution for the weighted five-step model (zero weights dropped)."""
    w = [p_m11, p_01, p_11, p_10, p_1m1]
    atoms = [s for s, p in zip(WEIGHTED_STEPS, w) if p > 0]
    probs = np.array([p for p in w if p > 0], dtype=float)
    return AtomicDistribution(atoms, probs / probs.sum())


def _check_wedge(alpha, beta, r):
    if not (0 < beta < alpha <= math.pi) or not r > 0:
        raise DomainError("need 0 < beta < alpha <= pi and r > 0")


def closed_form_gaussian(alpha, beta, r):
    """Rate for ``N(m, I)`` increments in the wedge of opening ``alpha``.

    The drift is ``m = r (cos beta, sin beta)``.

    Returns
    -------
    rho : float
    z_u, z_v : ndarray
        Reflections of ``m`` through the two boundary lines; ``rho`` equals
        ``exp(-min(d(z_u, K), d(z_v, K))**2 / 2)``.
    """
    _check_wedge(alpha, beta, r)
    d = r * min(math.sin(beta), math.sin(alpha - beta))
    z_u = r * np.array([math.cos(beta), -math.sin(beta)])
    z_v = r * np.array([math.cos(2 * alpha - beta), math.sin(2 * alpha - beta)])
    return math.exp(-0.5 * d * d), z_u, z_v


def gaussian_wedge(alpha, beta, r):
    """``(distribution, pyramid)`` for the planar Gaussian wedge example."""
    _check_wedge(alpha, beta, r)
    mean = r * np.array([math.cos(beta), math.sin(beta)])
    cone = Pyramid([[0.0, 1.0], [math.sin(alpha), -math.cos(alpha)]])
    return GaussianDistribution(mean), cone

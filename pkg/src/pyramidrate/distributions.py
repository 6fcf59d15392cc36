"""Increment laws with Laplace transforms, exponential tilting and sampling.

Two families are supported: finitely supported (atomic) laws and isotropic
Gaussians ``N(m, I)``.  Both have every exponential moment.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .geometry import Pyramid

PROB_TOL = 1e-12
SUPPORT_TOL = 1e-12
A3_MAX_STEPS = 20
A3_MAX_STATES = 2_000_000


@dataclass(frozen=True, eq=False)
class AtomicDistribution:
    """Law putting mass ``probs[j]`` on ``atoms[j]``."""

    atoms: np.ndarray
    probs: np.ndarray

    def __init__(self, atoms, probs=None):
        atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
        if probs is None:
            probs = np.full(atoms.shape[0], 1.0 / atoms.shape[0])
        probs = np.asarray(probs, dtype=float)
        if probs.shape != (atoms.shape[0],):
            raise ValueError("need exactly one probability per atom")
        if np.any(probs <= 0):
            raise ValueError("probabilities must be positive; drop zero-weight atoms")
        if abs(probs.sum() - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
        for i in range(len(atoms)):
            for j in range(i):
                if np.array_equal(atoms[i], atoms[j]):
                    raise ValueError(f"duplicate atom {atoms[i].tolist()}")
        atoms.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)

    kind = "atomic"

    @property
    def dim(self):
        return self.atoms.shape[1]

    @property
    def drift(self):
        return self.probs @ self.atoms

    @property
    def is_lattice(self):
        return bool(np.all(self.atoms == np.round(self.atoms)))

    def log_laplace(self, t):
        t = np.asarray(t, dtype=float)
        return float(logsumexp(self.atoms @ t, b=self.probs))

    def laplace(self, t):
        return float(np.exp(self.log_laplace(t)))

    def tilted_weights(self, t):
        """Probabilities of the ``t``-changed law, computed with a max shift."""
        e = self.atoms @ np.asarray(t, dtype=float) + np.log(self.probs)
        w = np.exp(e - e.max())
        return w / w.sum()

    def grad_log_laplace(self, t):
        return self.tilted_weights(t) @ self.atoms

    def grad_laplace(self, t):
        return self.laplace(t) * self.grad_log_laplace(t)

    def hess_log_laplace(self, t):
        w = self.tilted_weights(t)
        mean = w @ self.atoms
        centered = self.atoms - mean
        return (centered * w[:, None]).T @ centered

    def tilt(self, t0):
        return AtomicDistribution(self.atoms, self.tilted_weights(t0))

    def support_in_halfspace(self, u):
        return bool(np.all(self.atoms @ np.asarray(u, dtype=float) >= -SUPPORT_TOL))

    def max_projection(self, v):
        return float(np.max(self.atoms @ np.asarray(v, dtype=float)))

    def sample(self, rng, size=None):
        n = 1 if size is None else size
        cum = np.cumsum(self.probs)
        idx = np.searchsorted(cum, rng.random(n) * cum[-1], side="right")
        idx = np.minimum(idx, len(cum) - 1)
        out = self.atoms[idx]
        return out[0] if size is None else out

    def to_dict(self):
        return {"kind": "atomic", "atoms": self.atoms.tolist(),
                "probabilities": self.probs.tolist()}


@dataclass(frozen=True, eq=False)
class GaussianDistribution:
    """Standard normal law shifted by ``mean`` (identity covariance)."""

    mean: np.ndarray = field()

    def __init__(self, mean):
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        if not np.all(np.isfinite(mean)):
            raise ValueError("mean must be finite")
        mean.setflags(write=False)
        object.__setattr__(self, "mean", mean)

    kind = "gaussian"
    is_lattice = False

    @property
    def dim(self):
        return self.mean.shape[0]

    @property
    def drift(self):
        return self.mean.copy()

    def log_laplace(self, t):
        t = np.asarray(t, dtype=float)
        return float(t @ self.mean + 0.5 * t @ t)

    def laplace(self, t):
        return float(np.exp(self.log_laplace(t)))

    def grad_log_laplace(self, t):
        return np.asarray(t, dtype=float) + self.mean

    def grad_laplace(self, t):
        return self.laplace(t) * self.grad_log_laplace(t)

    def hess_log_laplace(self, t):
        return np.eye(self.dim)

    def tilt(self, t0):
        return GaussianDistribution(self.mean + np.asarray(t0, dtype=float))

    def support_in_halfspace(self, u):
        return False

    def max_projection(self, v):
        return np.inf

    def sample(self, rng, size=None):
        n = 1 if size is None else size
        out = rng.standard_normal((n, self.dim)) + self.mean
        return out[0] if size is None else out

    def to_dict(self):
        return {"kind": "gaussian", "mean": self.mean.tolist()}


def laplace(d, t):
    return d.laplace(t)


def grad_laplace(d, t):
    return d.grad_laplace(t)


def tilt(d, t0):
    """The ``t0``-changed law ``exp(<t0, y>) mu(dy) / L(t0)``."""
    return d.tilt(t0)


def support_in_halfspace(d, u):
    return d.support_in_halfspace(u)


def sample(d, rng, size=None):
    return d.sample(rng, size)


@dataclass
class HypothesisReport:
    """Pass/fail per standing hypothesis, with a note for each failure."""

    a1: bool
    a2: bool
    a3: bool
    a4: bool
    a5: bool
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("a1", "a2", "a3", "a4", "a5"):
            setattr(self, name, bool(getattr(self, name)))

    @property
    def ok(self):
        return self.a1 and self.a2 and self.a3 and self.a4 and self.a5

    @property
    def failed(self):
        return [name.upper() for name in ("a1", "a2", "a3", "a4", "a5")
                if not getattr(self, name)]

    def as_dict(self):
        return {"A1": self.a1, "A2": self.a2, "A3": self.a3, "A4": self.a4,
                "A5": self.a5, "notes": dict(self.notes)}


def _reaches_interior(d, p, max_steps=A3_MAX_STEPS):
    """Breadth-first search for a path from 0 that stays in K and enters its interior."""
    frontier = {tuple(np.zeros(d.dim))}
    seen_layers = 0
    for _ in range(max_steps):
        nxt = set()
        for y in frontier:
            for a in d.atoms:
                z = np.round(np.asarray(y) + a, 9)
                if p.contains(z, tol=1e-9):
                    if p.contains_interior(z, tol=1e-9):
                        return True, seen_layers + 1
                    nxt.add(tuple(z))
        seen_layers += 1
        if not nxt or len(nxt) > A3_MAX_STATES:
            return False, seen_layers
        frontier = nxt
    return False, seen_layers


def validate_hypotheses(d, p):
    """Check the standing hypotheses A1-A5 for ``d`` in the pyramid ``p``."""
    notes = {}
    if d.dim != p.dim:
        raise ValueError(f"distribution has dimension {d.dim}, cone has {p.dim}")
    a1 = isinstance(p, Pyramid)
    if isinstance(d, GaussianDistribution):
        return HypothesisReport(a1, True, True, True, True, notes)

    rank = np.linalg.matrix_rank(d.atoms)
    a2 = rank == d.dim
    if not a2:
        notes["A2"] = f"atoms span a subspace of dimension {rank} < {d.dim}"
    a3, steps = _reaches_interior(d, p)
    if not a3:
        notes["A3"] = f"no path from 0 reaches the interior within {steps} steps"
    a5 = not all(p.contains(a, tol=SUPPORT_TOL) for a in d.atoms)
    if not a5:
        notes["A5"] = "every step stays in the cone; the walk is trapped"
    return HypothesisReport(a1, a2, a3, True, a5, notes)

"""Polyhedral cone computations.

A :class:`Pyramid` is the closed cone ``K = {y : <y, u> >= 0 for u in S}``
described by its inner unit normals ``S``.  Its dual ``K*`` is the conic hull
of ``S`` and is represented by a :class:`GeneratedCone`.  Non-negative least
squares (:func:`nnls`) is the single workhorse for membership, extremality and
projection.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import CapacityExceeded, Infeasible, NoConvergence, NotSalient

DUP_TOL = 1e-10
NNLS_TOL = 1e-12
NNLS_MAX_ITER = 100_000
INTERIOR_TOL = 1e-10
MEMBERSHIP_TOL = 1e-9
MAX_RAY_SUBSETS = 500_000


def unit_rows(vectors, *, name="vector"):
    """Normalize rows to unit length and drop duplicates, keeping first occurrences."""
    arr = np.atleast_2d(np.asarray(vectors, dtype=float))
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"expected a non-empty list of {name}s")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}s must be finite")
    norms = np.linalg.norm(arr, axis=1)
    if np.any(norms == 0.0):
        raise ValueError(f"zero {name} cannot be normalized")
    arr = arr / norms[:, None]
    kept = []
    for row in arr:
        if all(np.linalg.norm(row - other) > DUP_TOL for other in kept):
            kept.append(row)
    out = np.array(kept)
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# Non-negative least squares
# ---------------------------------------------------------------------------

def _lawson_hanson(G, x, max_outer):
    """Active-set NNLS; exact after finitely many support changes."""
    k = G.shape[1]
    lam = np.zeros(k)
    passive = np.zeros(k, dtype=bool)
    wtol = 1e-14 * max(1.0, float(np.linalg.norm(G, 2)) * max(1.0, float(np.linalg.norm(x))))
    for _ in range(max_outer):
        w = G.T @ (x - G @ lam)
        cand = np.where(~passive, w, -np.inf)
        j = int(np.argmax(cand))
        if cand[j] <= wtol:
            break
        passive[j] = True
        while True:
            sol = np.zeros(k)
            sol[passive], *_ = np.linalg.lstsq(G[:, passive], x, rcond=None)
            bad = passive & (sol <= 0)
            if not np.any(bad):
                lam = sol
                break
            alpha = float(np.min(lam[bad] / (lam[bad] - sol[bad])))
            lam = lam + alpha * (sol - lam)
            passive &= lam > 1e-15
            lam[~passive] = 0.0
            if not np.any(passive):
                break
    return lam


def nnls(G, x, tol=NNLS_TOL, max_iter=NNLS_MAX_ITER):
    """Solve ``min ||G @ lam - x||`` over ``lam >= 0``.

    An active-set (Lawson-Hanson) pass finds the optimal support; projected
    gradient with backtracking then refines until the stationarity
    certificate holds.

    Parameters
    ----------
    G : (d, k) array
        Generators as columns.
    x : (d,) array
        Target point.
    tol : float
        Stationarity threshold on ``||lam - P(lam - grad)||_inf``, scaled by
        ``max(1, ||x||)``.

    Returns
    -------
    lam : (k,) ndarray
    residual : float
        ``||G @ lam - x||``.
    """
    G = np.asarray(G, dtype=float)
    x = np.asarray(x, dtype=float)
    k = G.shape[1]
    scale = max(1.0, float(np.linalg.norm(x)))
    lipschitz = float(np.linalg.norm(G, 2)) ** 2
    step = 1.0 / lipschitz if lipschitz > 0 else 1.0

    def objective(lam):
        r = G @ lam - x
        return 0.5 * float(r @ r)

    lam = _lawson_hanson(G, x, max_outer=3 * k + 10)
    f = objective(lam)
    for _ in range(max_iter):
        grad = G.T @ (G @ lam - x)
        if np.max(np.abs(lam - np.maximum(lam - grad, 0.0))) <= tol * scale:
            return lam, math.sqrt(2.0 * f)
        t = step
        while True:
            trial = np.maximum(lam - t * grad, 0.0)
            ft = objective(trial)
            # sufficient decrease for projected steps
            if ft <= f - 0.5 / t * float((trial - lam) @ (trial - lam)) + 1e-300 or t < 1e-20:
                break
            t *= 0.5
        lam, f = trial, ft
    raise NoConvergence(f"nnls did not reach stationarity {tol} in {max_iter} iterations")


# ---------------------------------------------------------------------------
# Interior feasibility
# ---------------------------------------------------------------------------

def _project_simplex(v):
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, len(v) + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def interior_point(normals, max_iter=200_000):
    """Return ``y`` with ``<y, u> >= 1`` for every normal ``u``.

    Computes the minimum-norm point ``c`` of the convex hull of the normals.
    By Gordan's alternative the cone has non-empty interior iff ``c != 0``,
    and then ``<c, u> >= ||c||^2`` for every ``u``.

    Raises
    ------
    Infeasible
        If the certified minimum norm is at most ``1e-10``.
    """
    if isinstance(normals, Pyramid):
        normals = normals.normals
    S = np.atleast_2d(np.asarray(normals, dtype=float))
    k = S.shape[0]
    lam = np.full(k, 1.0 / k)
    step = 1.0 / max(float(np.linalg.norm(S, 2)) ** 2, 1e-300)
    for _ in range(max_iter):
        c = lam @ S
        cc = float(c @ c)
        if math.sqrt(cc) <= INTERIOR_TOL:
            raise Infeasible("normals admit no common strictly positive direction "
                             "(cone has empty interior)")
        margins = S @ c
        # Frank-Wolfe gap certifies optimality of c
        if cc - margins.min() <= 1e-15 * max(cc, 1.0):
            break
        lam = _project_simplex(lam - step * (S @ c))
    else:
        margins = S @ (lam @ S)
    if margins.min() <= 0.0:
        raise Infeasible("normals admit no common strictly positive direction "
                         "(cone has empty interior)")
    y = (lam @ S) / margins.min()
    return y


# ---------------------------------------------------------------------------
# Cone types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ExtremalSet:
    """Indices of the extremal generators of a :class:`GeneratedCone`."""

    indices: tuple

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)


@dataclass(frozen=True, eq=False)
class GeneratedCone:
    """Conic hull of finitely many unit rays (stored as rows)."""

    generators: np.ndarray

    def __init__(self, generators):
        object.__setattr__(self, "generators", unit_rows(generators, name="generator"))

    @property
    def dim(self):
        return self.generators.shape[1]

    def __len__(self):
        return self.generators.shape[0]

    def contains(self, x, tol=MEMBERSHIP_TOL):
        return conic_membership(self, x, tol)[0]

    @cached_property
    def extremal(self):
        return extremal_directions(self)

    def dual(self):
        """Dual cone as a :class:`Pyramid` whose normals are the extremal rays."""
        return Pyramid(self.generators[list(self.extremal.indices)])


@dataclass(frozen=True, eq=False)
class Pyramid:
    """Closed cone ``{y : <y, u> >= 0 for every normal u}`` with non-empty interior.

    Normals are unit-normalized and de-duplicated on construction; a cone with
    empty interior raises :class:`~pyramidrate.errors.Infeasible`.
    """

    normals: np.ndarray

    def __init__(self, normals):
        object.__setattr__(self, "normals", unit_rows(normals, name="normal"))
        object.__setattr__(self, "_interior", interior_point(self.normals))

    @classmethod
    def orthant(cls, dim):
        return cls(np.eye(dim))

    @property
    def dim(self):
        return self.normals.shape[1]

    def __len__(self):
        return self.normals.shape[0]

    @property
    def interior(self):
        return self._interior

    def contains(self, y, tol=MEMBERSHIP_TOL):
        y = np.asarray(y, dtype=float)
        return bool(np.all(self.normals @ y >= -tol))

    def contains_interior(self, y, tol=MEMBERSHIP_TOL):
        y = np.asarray(y, dtype=float)
        return bool(np.all(self.normals @ y > tol))

    def dual(self):
        return dual_cone(self)

    @cached_property
    def generated(self):
        """``K`` itself as a :class:`GeneratedCone` (the dual of its dual)."""
        return GeneratedCone(_cone_rays(self.normals))


def dual_cone(p):
    """``K*`` of a pyramid: the conic hull of its normals."""
    return GeneratedCone(p.normals)


def _null_space(A, tol=1e-10):
    if A.shape[0] == 0:
        return np.eye(A.shape[1])
    _, sv, vt = np.linalg.svd(A)
    rank = int(np.sum(sv > tol * max(1.0, sv[0])))
    return vt[rank:].T


def _cone_rays(normals):
    """Generators of ``{y : normals @ y >= 0}``, including lineality directions."""
    S = np.asarray(normals, dtype=float)
    d = S.shape[1]
    lineality = _null_space(S)
    rays = [v for b in lineality.T for v in (b, -b)]
    # work in the orthogonal complement of the lineality space, where K is pointed
    if lineality.shape[1]:
        basis = _null_space(lineality.T)
    else:
        basis = np.eye(d)
    dr = basis.shape[1]
    if dr == 0:
        return np.array(rays)
    R = S @ basis
    n_subsets = math.comb(R.shape[0], dr - 1)
    if n_subsets > MAX_RAY_SUBSETS:
        raise CapacityExceeded(f"ray enumeration needs {n_subsets} facet subsets")
    pointed = []
    for subset in itertools.combinations(range(R.shape[0]), dr - 1):
        ns = _null_space(R[list(subset)])
        if ns.shape[1] != 1:
            continue
        r = ns[:, 0]
        for cand in (r, -r):
            if np.all(R @ cand >= -1e-10) and np.any(R @ cand > 1e-10):
                pointed.append(cand)
    if not pointed and dr > 0:
        raise Infeasible("pyramid has no extreme rays")
    rays.extend(basis @ r for r in pointed)
    return np.array(rays)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def _generators(c):
    if isinstance(c, Pyramid):
        return c.generated.generators
    if isinstance(c, GeneratedCone):
        return c.generators
    return unit_rows(c, name="generator")


def conic_membership(c, x, tol=MEMBERSHIP_TOL):
    """Test whether ``x`` is a non-negative combination of the generators.

    Returns
    -------
    member : bool
    coefficients : ndarray or None
        The achieving coefficients when ``member`` is true.
    """
    U = _generators(c)
    x = np.asarray(x, dtype=float)
    lam, residual = nnls(U.T, x)
    if residual <= tol * max(1.0, float(np.linalg.norm(x))):
        return True, lam
    return False, None


def extremal_directions(c):
    """Indices of generators that are not combinations of the others.

    Indices are processed in ascending order; a generator found redundant is
    removed before later ones are tested.

    Raises
    ------
    NotSalient
        If the cone contains a line (its dual pyramid has empty interior).
    """
    U = _generators(c)
    try:
        interior_point(U)
    except Infeasible as exc:
        raise NotSalient("generated cone is not salient") from exc
    keep = list(range(U.shape[0]))
    for i in range(U.shape[0]):
        others = [j for j in keep if j != i]
        if not others:
            continue
        member, _ = conic_membership(U[others], U[i])
        if member:
            keep.remove(i)
    return ExtremalSet(tuple(keep))


def project_onto_cone(c, x):
    """Euclidean projection of ``x`` onto a generated cone (or a pyramid)."""
    U = _generators(c)
    lam, _ = nnls(U.T, np.asarray(x, dtype=float))
    return lam @ U


def distance_to_cone(c, x):
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(x - project_onto_cone(c, x)))

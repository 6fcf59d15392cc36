"""Exponential rate of convergence of survival probabilities in a pyramid.

For interior drift the rate is ``max over u in S' of min over z in K* of
L(t_u + z)`` where ``t_u = s_u u`` and ``s_u < 0`` solves ``L(s u) = 1``.
For a drift outside the interior of the cone it is ``min over K* of L``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .distributions import GaussianDistribution, validate_hypotheses
from .errors import (BracketFailure, DriftNotInterior, HypothesisViolation,
                     NoConvergence, NotCoercive)
from .geometry import GeneratedCone, Pyramid, dual_cone

DEFAULT_TOL = 1e-10
MAX_ITER = 100_000
KKT_TOL = 1e-8
DRIFT_TOL = 1e-10
TIE_TOL = 1e-12
EXTREMAL_TOL = 1e-9
NOISE_FLOOR = 1e-14


class DriftClass(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    EXTERIOR = "exterior"


def classify_drift(m, p):
    """Locate the drift relative to the cone: interior, boundary or exterior."""
    m = np.asarray(m, dtype=float)
    proj = p.normals @ m
    scale = float(np.linalg.norm(m))
    if np.all(proj > DRIFT_TOL * scale) and scale > 0:
        return DriftClass.INTERIOR
    if np.all(proj >= -DRIFT_TOL):
        return DriftClass.BOUNDARY
    return DriftClass.EXTERIOR


# ---------------------------------------------------------------------------
# Root s_u
# ---------------------------------------------------------------------------

def solve_su(d, u, bisect_iter=200, newton_iter=5):
    """Negative root of ``s -> L(s u) = 1``, or ``None`` when it does not exist.

    No root exists exactly when the support lies in the half-space ``D_u``.
    The root is bracketed by doubling from ``s = -1``, located by bisection
    on ``log L(s u)`` and polished with a few guarded Newton steps.
    """
    u = np.asarray(u, dtype=float)
    if float(d.drift @ u) <= 0:
        raise DriftNotInterior("root search needs <m, u> > 0")
    if d.support_in_halfspace(u):
        return None

    def g(s):
        return d.log_laplace(s * u)

    def dg(s):
        return float(d.grad_log_laplace(s * u) @ u)

    # lo: g(lo) > 0, hi: g(hi) < 0
    s = -1.0
    gs = g(s)
    if gs == 0.0:
        return s
    if gs < 0:
        hi = s
        for _ in range(1100):
            s *= 2.0
            gs = g(s)
            if gs > 0:
                break
            hi = s
        else:
            raise BracketFailure("L(su) stays below 1 as s -> -inf")
        lo = s
    else:
        lo = s
        for _ in range(1100):
            s *= 0.5
            gs = g(s)
            if gs < 0:
                break
            lo = s
        else:
            raise BracketFailure("L(su) never drops below 1 near 0")
        hi = s
    for _ in range(bisect_iter):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        gm = g(mid)
        if gm > 0:
            lo = mid
        elif gm < 0:
            hi = mid
        else:
            lo = hi = mid
            break
    s = 0.5 * (lo + hi)
    gs = g(s)
    for _ in range(newton_iter):
        slope = dg(s)
        if slope == 0.0:
            break
        cand = s - gs / slope
        if not (lo <= cand <= hi):
            break
        gc = g(cand)
        if abs(gc) >= abs(gs):
            break
        s, gs = cand, gc
    return s


# ---------------------------------------------------------------------------
# Minimization over the dual cone
# ---------------------------------------------------------------------------

@dataclass
class DualMinimum:
    rho: float
    zstar: np.ndarray
    lam: np.ndarray
    kkt_residual: float
    iterations: int


def check_coercive(d, c):
    """Raise :class:`NotCoercive` unless ``L`` blows up along every ray of ``c``.

    Along ``v`` the transform is coercive iff some atom has ``<x, v> > 0``,
    so the cone ``{v in c : <x, v> <= 0 for all atoms}`` must be trivial.
    """
    if isinstance(d, GaussianDistribution):
        return
    U = c.generators
    for i in c.extremal.indices:
        if d.max_projection(U[i]) <= 1e-12:
            raise NotCoercive(f"support lies in -D_v for generator v={U[i].tolist()}")
    k = U.shape[0]
    res = linprog(np.zeros(k), A_ub=d.atoms @ U.T, b_ub=np.full(d.atoms.shape[0], 1e-12),
                  A_eq=np.ones((1, k)), b_eq=[1.0], bounds=[(0, None)] * k,
                  method="highs")
    if res.status == 0:
        v = res.x @ U
        raise NotCoercive(f"support lies in -D_v for v={v.tolist()} in the dual cone")


def _kkt_residual(d, point, lam, U):
    grad = d.grad_laplace(point)
    dirs = U @ grad
    return float(max(np.max(np.maximum(-dirs, 0.0)), np.max(np.abs(lam * dirs))))


def minimize_over_dual(d, t, c, tol=DEFAULT_TOL, max_iter=MAX_ITER, check=True):
    """Minimize ``z -> L(t + z)`` over the generated cone ``c``.

    Works on ``lam >= 0`` with ``z = sum lam_i u_i`` and minimizes the convex
    log-Laplace transform by a projected Newton-scaled gradient method with
    Armijo backtracking, started at ``lam = 0``.

    Raises
    ------
    NotCoercive
        When ``L`` does not grow along some ray of the cone.
    NoConvergence
        When the projected gradient stays above ``tol`` for ``max_iter`` steps.
    """
    if isinstance(c, Pyramid):
        c = dual_cone(c)
    if check:
        check_coercive(d, c)
    U = c.generators
    t = np.asarray(t, dtype=float)
    k = U.shape[0]
    lam = np.zeros(k)

    def f(lam):
        return d.log_laplace(t + lam @ U)

    fx = f(lam)
    for it in range(max_iter):
        point = t + lam @ U
        gx = U @ d.grad_log_laplace(point)
        pg = lam - np.maximum(lam - gx, 0.0)
        pg_norm = float(np.max(np.abs(pg)))
        if pg_norm <= tol:
            return DualMinimum(float(np.exp(fx)), lam @ U, lam,
                               _kkt_residual(d, point, lam, U), it)
        eps = min(1e-6, pg_norm)
        active = (lam <= eps) & (gx > 0)
        free = ~active
        direction = -gx.copy()
        if np.any(free):
            H = U[free] @ d.hess_log_laplace(point) @ U[free].T
            H = H + 1e-12 * max(1.0, float(np.trace(H))) * np.eye(H.shape[0])
            try:
                direction[free] = -np.linalg.solve(H, gx[free])
            except np.linalg.LinAlgError:
                pass
        if float(gx @ direction) >= 0:
            direction = -gx
        alpha = 1.0
        full = np.maximum(lam + direction, 0.0)
        if -float(gx @ (full - lam)) < NOISE_FLOOR:
            # decrease is below the rounding level of log L; judge by the gradient
            gf = U @ d.grad_log_laplace(t + full @ U)
            if np.max(np.abs(full - np.maximum(full - gf, 0.0))) < pg_norm:
                lam, fx = full, f(full)
                continue
        while True:
            trial = np.maximum(lam + alpha * direction, 0.0)
            ft = f(trial)
            if ft <= fx + 1e-4 * float(gx @ (trial - lam)):
                break
            alpha *= 0.5
            if alpha < 1e-20:
                if np.array_equal(direction, -gx):
                    raise NoConvergence("line search failed along the projected gradient")
                direction = -gx
                alpha = 1.0
        lam, fx = trial, ft
    raise NoConvergence(f"projected gradient above {tol} after {max_iter} iterations")


# ---------------------------------------------------------------------------
# Rate
# ---------------------------------------------------------------------------

@dataclass
class DirectionRecord:
    index: int
    u: np.ndarray
    s_u: float | None = None
    t_u: np.ndarray | None = None
    rho_u: float | None = None
    zstar: np.ndarray | None = None
    lam: np.ndarray | None = None
    kkt_residual: float | None = None
    root_residual: float | None = None
    tilted_drift_u: float | None = None

    @property
    def in_s_prime(self):
        return self.s_u is not None

    def as_dict(self):
        def vec(x):
            return None if x is None else [float(v) for v in x]
        return {"index": self.index, "u": vec(self.u), "in_S_prime": self.in_s_prime,
                "s_u": self.s_u, "t_u": vec(self.t_u), "rho_u": self.rho_u,
                "zstar": vec(self.zstar), "kkt_residual": self.kkt_residual,
                "root_residual": self.root_residual,
                "tilted_drift_u": self.tilted_drift_u}


@dataclass
class RateReport:
    drift: np.ndarray
    drift_class: DriftClass
    branch: str
    rho: float
    records: list = field(default_factory=list)
    argmax: int | None = None
    maximizers: list = field(default_factory=list)
    rho_extremal: float | None = None
    zstar: np.ndarray | None = None
    kkt_residual: float | None = None
    hypotheses: dict = field(default_factory=dict)

    @property
    def argmax_u(self):
        return None if self.argmax is None else self.records[self.argmax].u

    @property
    def s_prime(self):
        return [r.index for r in self.records if r.in_s_prime]

    def as_dict(self):
        return {
            "drift": [float(v) for v in self.drift],
            "drift_class": self.drift_class.value,
            "branch": self.branch,
            "rho": self.rho,
            "argmax": self.argmax,
            "maximizers": list(self.maximizers),
            "S_prime": self.s_prime,
            "rho_extremal": self.rho_extremal,
            "zstar": None if self.zstar is None else [float(v) for v in self.zstar],
            "kkt_residual": self.kkt_residual,
            "records": [r.as_dict() for r in self.records],
            "hypotheses": self.hypotheses,
        }


def direction_record(d, p, index, K_dual=None, tol=DEFAULT_TOL):
    """Root, tilt point and per-direction rate for normal ``index`` of ``p``."""
    K_dual = dual_cone(p) if K_dual is None else K_dual
    u = p.normals[index]
    rec = DirectionRecord(index=index, u=u)
    s = solve_su(d, u)
    if s is None:
        return rec
    t_u = s * u
    rec.s_u = float(s)
    rec.t_u = t_u
    rec.root_residual = abs(d.laplace(t_u) - 1.0)
    rec.tilted_drift_u = float(d.grad_laplace(t_u) @ u)
    res = minimize_over_dual(d, t_u, K_dual, tol=tol)
    rec.rho_u = res.rho
    rec.zstar = res.zstar
    rec.lam = res.lam
    rec.kkt_residual = res.kkt_residual
    return rec


def compute_rate(d, p, tol=DEFAULT_TOL, check=True):
    """Exponential rate ``rho`` of ``P(tau > n) -> P(tau = inf)`` for walk ``d`` in ``p``.

    Interior drift takes the max-min branch; boundary or exterior drift takes
    the plain minimum of ``L`` over the dual cone.
    """
    hyp = validate_hypotheses(d, p)
    m = d.drift
    cls = classify_drift(m, p)
    K_dual = dual_cone(p)
    if cls is DriftClass.INTERIOR:
        if check and not hyp.ok:
            raise HypothesisViolation(
                "hypotheses failed: " + ", ".join(
                    f"{h} ({hyp.notes.get(h, 'failed')})" for h in hyp.failed),
                hyp.failed)
        records = [direction_record(d, p, i, K_dual, tol) for i in range(len(p))]
        present = [r for r in records if r.in_s_prime]
        if not present:
            raise HypothesisViolation("no direction admits a negative root; the walk is trapped",
                                      ["A5"])
        rho = max(r.rho_u for r in present)
        maximizers = [r.index for r in present if r.rho_u >= rho - TIE_TOL]
        extremal = set(K_dual.extremal.indices)
        on_extremal = [r.rho_u for r in present if r.index in extremal]
        rho_ext = max(on_extremal) if on_extremal else None
        if rho_ext is None or abs(rho_ext - rho) > EXTREMAL_TOL:
            raise NoConvergence(
                f"max over extremal normals ({rho_ext}) differs from max over all ({rho})")
        return RateReport(drift=m, drift_class=cls, branch="thm1", rho=float(rho),
                          records=records, argmax=maximizers[0], maximizers=maximizers,
                          rho_extremal=float(rho_ext), hypotheses=hyp.as_dict())

    if check and not (hyp.a1 and hyp.a2 and hyp.a3 and hyp.a4):
        failed = [h for h in hyp.failed if h != "A5"]
        raise HypothesisViolation(
            "hypotheses failed: " + ", ".join(
                f"{h} ({hyp.notes.get(h, 'failed')})" for h in failed), failed)
    res = minimize_over_dual(d, np.zeros(p.dim), K_dual, tol=tol)
    return RateReport(drift=m, drift_class=cls, branch="thm2", rho=res.rho,
                      zstar=res.zstar, kkt_residual=res.kkt_residual,
                      hypotheses=hyp.as_dict())

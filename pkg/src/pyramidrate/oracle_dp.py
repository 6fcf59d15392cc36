"""Exact dynamic-programming oracle for lattice walks in a pyramid.

The sub-probability mass of walks that have stayed in the closed cone is
propagated forward on a dense integer box.  The mass leaving the cone at step
``n`` is summed directly, which gives ``P(tau = n)`` with full relative
precision even when it is far below ``P(tau > n)``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np
from scipy.optimize import linprog

from .errors import CapacityExceeded, Degenerate
from .geometry import Pyramid
from .kernels import get_backend

MAX_CELLS = 10**8
MAX_STEPS = 2000
UNDERFLOW = 1e-300


def _integer_normal(u, max_den=10**6):
    """Smallest integer vector parallel to the unit vector ``u``."""
    u = np.asarray(u, dtype=float)
    scale = np.max(np.abs(u))
    fracs = [Fraction(float(v / scale)).limit_denominator(max_den) for v in u]
    den = reduce(math.lcm, (f.denominator for f in fracs), 1)
    ints = np.array([int(f * den) for f in fracs], dtype=np.int64)
    g = reduce(math.gcd, (abs(int(v)) for v in ints if v), 0) or 1
    ints //= g
    back = ints / np.linalg.norm(ints)
    if np.max(np.abs(back - u)) > 1e-12:
        raise ValueError(f"normal {u.tolist()} is not rational")
    return ints


@dataclass(frozen=True, eq=False)
class LatticeModel:
    """Integer-step walk in a pyramid with integer-scaled normals."""

    atoms: np.ndarray
    probs: np.ndarray
    normals: np.ndarray

    @classmethod
    def from_model(cls, d, p: Pyramid):
        if getattr(d, "kind", None) != "atomic":
            raise ValueError("dp requires lattice model (integer atoms)")
        if not d.is_lattice:
            raise ValueError("dp requires lattice model (integer atoms)")
        normals = np.array([_integer_normal(u) for u in p.normals], dtype=np.int64)
        return cls(np.round(d.atoms).astype(np.int64), np.asarray(d.probs, dtype=float),
                   normals)

    @property
    def dim(self):
        return self.atoms.shape[1]

    @property
    def bound(self):
        return int(np.max(np.abs(self.atoms)))

    def contains(self, y):
        return bool(np.all(self.normals @ np.asarray(y, dtype=np.int64) >= 0))


@dataclass
class SurvivalCurve:
    """``P(tau > n)`` for ``n = 0..N`` together with ``P(tau = n)``."""

    values: np.ndarray
    exits: np.ndarray
    method: str
    start: np.ndarray
    ci_low: np.ndarray | None = None
    ci_high: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def horizon(self):
        return len(self.values) - 1

    @property
    def deltas(self):
        return self.exits

    def ratios(self):
        d = self.exits
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.full(len(d), np.nan)
            r[1:] = np.where(d[:-1] > 0, d[1:] / np.where(d[:-1] > 0, d[:-1], 1.0), np.nan)
        return r

    def to_csv(self, fh=None):
        """Write ``n, survival, delta, ratio`` (plus CI columns for MC) as CSV."""
        own = fh is None
        fh = io.StringIO() if own else fh
        writer = csv.writer(fh, lineterminator="\n")
        header = ["n", "survival", "delta", "ratio"]
        if self.ci_low is not None:
            header += ["ci_low", "ci_high"]
        writer.writerow(header)
        ratios = self.ratios()
        for n in range(len(self.values)):
            row = [n, repr(float(self.values[n])), repr(float(self.exits[n])),
                   "" if np.isnan(ratios[n]) else repr(float(ratios[n]))]
            if self.ci_low is not None:
                row += [repr(float(self.ci_low[n])), repr(float(self.ci_high[n]))]
            writer.writerow(row)
        if own:
            return fh.getvalue()
        return None


class _Box:
    """Dense integer box (with a one-step padding) covering every reachable cell."""

    def __init__(self, model, x, n_steps):
        B = model.bound
        d = model.dim
        reach = n_steps * B
        lo = x - reach
        hi = x + reach
        # tighten each coordinate range to the part of the box inside the cone
        A_ub = -model.normals.astype(float)
        b_ub = np.zeros(len(model.normals))
        bounds = list(zip(lo.tolist(), hi.tolist()))
        tight_lo, tight_hi = lo.copy(), hi.copy()
        for i in range(d):
            c = np.zeros(d)
            c[i] = 1.0
            r_min = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
            r_max = linprog(-c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
            if r_min.status == 0:
                tight_lo[i] = max(lo[i], math.floor(r_min.fun - 1e-9))
            if r_max.status == 0:
                tight_hi[i] = min(hi[i], math.ceil(-r_max.fun + 1e-9))
        self.origin = tight_lo - B
        self.shape = tuple(int(v) for v in (tight_hi - tight_lo + 1 + 2 * B))
        cells = math.prod(self.shape)
        if cells > MAX_CELLS:
            raise CapacityExceeded(f"state box needs {cells} cells (limit {MAX_CELLS})")
        self.strides = np.array([math.prod(self.shape[i + 1:]) for i in range(d)],
                                dtype=np.int64)
        grids = np.indices(self.shape, dtype=np.int64).reshape(d, -1)
        coords = grids + self.origin[:, None]
        inside = np.all(model.normals @ coords >= 0, axis=0)
        core = np.ones(cells, dtype=bool)
        for i in range(d):
            core &= (grids[i] >= B) & (grids[i] < self.shape[i] - B)
        self.mask = np.ascontiguousarray((inside & core).astype(np.uint8))
        self.offsets = np.ascontiguousarray(model.atoms @ self.strides)
        self.size = cells

    def index(self, y):
        return int((np.asarray(y, dtype=np.int64) - self.origin) @ self.strides)

    def coords(self):
        grids = np.indices(self.shape, dtype=np.int64).reshape(len(self.shape), -1)
        return grids + self.origin[:, None]


def iter_dp(model, x, N, backend=None):
    """Yield ``(n, q_n, exit_n, total_n)`` for ``n = 1..N``.

    ``q_n`` is a flat view on the internal buffer (valid until the next
    iteration); use :func:`dp_box` to map flat indices to lattice points.
    """
    kern = get_backend(backend)
    x = np.asarray(np.round(x), dtype=np.int64)
    if not model.contains(x):
        raise ValueError("start point is not in the cone")
    if N > MAX_STEPS:
        raise CapacityExceeded(f"N={N} exceeds {MAX_STEPS}")
    box = _Box(model, x, N)
    q = np.zeros(box.size)
    out = np.zeros(box.size)
    i0 = box.index(x)
    q[i0] = 1.0
    lo = hi = i0
    probs = np.ascontiguousarray(model.probs, dtype=np.float64)
    for n in range(1, N + 1):
        if lo < 0:
            yield n, q, 0.0, 0.0
            continue
        ex, tot, new_lo, new_hi = kern.dp_step(q, out, box.mask, box.offsets, probs, lo, hi)
        q[lo:hi + 1] = 0.0
        q, out = out, q
        lo, hi = new_lo, new_hi
        yield n, q, ex, tot


def dp_box(model, x, N):
    return _Box(model, np.asarray(np.round(x), dtype=np.int64), N)


def survival_dp(model, x, N, backend=None):
    """Exact ``P^x(tau > n)`` for ``n = 0..N``.

    Survival means staying in the closed cone (boundary allowed) at every
    step up to ``n``.
    """
    values = np.empty(N + 1)
    exits = np.zeros(N + 1)
    values[0] = 1.0
    exited = 0.0
    for n, _, ex, tot in iter_dp(model, x, N, backend):
        exits[n] = ex
        exited += ex
        # no exit yet means survival is exactly 1, whatever the rounding in q;
        # steps without exits may otherwise drift up by an ulp
        values[n] = min(tot, values[n - 1]) if exited > 0.0 else 1.0
    return SurvivalCurve(values, exits, "dp", np.asarray(x))


# ---------------------------------------------------------------------------
# Rate extraction
# ---------------------------------------------------------------------------

@dataclass
class RateEstimate:
    rho_hat: float
    rho_raw: float
    period: int
    last_ratios: list
    monotone: bool
    window: tuple


def _period(exits, n1, n2):
    idx = [n for n in range(n1, n2 + 1) if exits[n] > UNDERFLOW]
    if len(idx) < 3:
        raise Degenerate("fewer than three positive exit masses in the window")
    return reduce(math.gcd, np.diff(idx).tolist())


def _block_exits(curve, p):
    """``e_n = sum of P(tau = j)`` over the ``p`` steps ending at ``n``."""
    e = np.asarray(curve.exits, dtype=float)
    out = np.full(len(e), np.nan)
    for n in range(p, len(e)):
        out[n] = float(np.sum(e[n - p + 1:n + 1]))
    return out


def extract_rate(curve, window=None):
    """Estimate the geometric decay rate of ``P(tau = n)``.

    Ratios ``r_n = (e_n / e_{n-p})^(1/p)`` of exit masses aggregated over the
    lattice period ``p`` are formed on the window ``(n1, n2)``; the
    polynomial correction is removed by ``exp(2 log r_{2k} - log r_k)`` with
    ``2k = n2``.

    Raises
    ------
    Degenerate
        For flat curves or exit masses that underflow.
    """
    N = curve.horizon
    n1, n2 = window if window is not None else (N // 2, N)
    if n2 > N or n1 < 1 or n2 - n1 < 4:
        raise ValueError(f"bad window {(n1, n2)} for horizon {N}")
    v = np.asarray(curve.values)
    if np.any(np.diff(v[n1 - 1:n2 + 1]) > 1e-15):
        raise Degenerate("survival curve increases on the window")
    if not np.any(np.asarray(curve.exits[n1:n2 + 1]) > UNDERFLOW):
        raise Degenerate("no exit mass on the window (trapped walk or underflow)")
    p = _period(curve.exits, n1, n2)
    e = _block_exits(curve, p)
    n2 -= (n2 - n1) % p
    k = n2 // 2
    while k - p < p:
        k += p

    def ratio(n):
        if not (e[n] > UNDERFLOW and e[n - p] > UNDERFLOW):
            raise Degenerate(f"exit mass underflow near n={n}")
        return (e[n] / e[n - p]) ** (1.0 / p)

    r_end = ratio(n2)
    r_half = ratio(k)
    rho_hat = math.exp(2.0 * math.log(r_end) - math.log(r_half))
    last = [ratio(n) for n in range(max(n2 - 9 * p, 2 * p), n2 + 1, p)]
    mono = bool(np.all(np.diff(last) >= -1e-15) or np.all(np.diff(last) <= 1e-15))
    return RateEstimate(rho_hat, r_end, p, last, mono, (n1, n2))


@dataclass
class LimitEstimate:
    upper: float
    corrected: float


def survival_limit_estimate(curve):
    """``P(tau = inf)`` as the bound ``P(tau > N)`` and a geometric-tail correction."""
    N = curve.horizon
    upper = float(curve.values[N])
    if not np.any(np.asarray(curve.exits[1:]) > 0) or upper == 0.0:
        return LimitEstimate(upper, upper)
    est = extract_rate(curve)
    p = est.period
    e = _block_exits(curve, p)
    rp = est.rho_raw ** p
    if not rp < 1.0:
        # noisy or non-decaying tail: no geometric correction available
        return LimitEstimate(upper, upper)
    n_last = est.window[1]
    tail_from_last = e[n_last] * rp / (1.0 - rp)
    # mass exiting between the last block end and N is already excluded from upper
    already = float(np.sum(curve.exits[n_last + 1:N + 1]))
    return LimitEstimate(upper, upper - max(tail_from_last - already, 0.0))


def halfspace_escape_probabilities(model, normal_index, levels, tol=1e-17, max_iter=200_000):
    """``P^y(sigma_u < inf)`` as a function of the level ``<y, u_int>``.

    Value iteration for the one-dimensional projected walk on levels
    ``0..max(levels)`` plus a margin; levels beyond the margin are treated as
    never escaping, which under-estimates by an exponentially small amount.
    """
    u = model.normals[normal_index]
    steps = model.atoms @ u
    probs = model.probs
    top = int(max(levels)) + 60 * max(1, int(np.max(np.abs(steps))))
    h = np.zeros(top + 1)
    z = np.arange(top + 1)
    for _ in range(max_iter):
        new = np.zeros_like(h)
        for s, p in zip(steps, probs):
            target = z + s
            below = target < 0
            above = target > top
            val = np.where(below, 1.0, np.where(above, 0.0, h[np.clip(target, 0, top)]))
            new += p * val
        if np.max(np.abs(new - h)) <= tol:
            h = new
            break
        h = new
    return h

"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run under pytest (``pytest tests/test_acceptance.py -v``) or directly as a
script (``python tests/test_acceptance.py``).
"""
import itertools
import math
import os
import sys
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from pyramidrate.closed_forms import (closed_form_gaussian, closed_form_weighted,
                                      gaussian_wedge, weighted_model)
from pyramidrate.distributions import AtomicDistribution, GaussianDistribution, laplace, tilt
from pyramidrate.errors import DomainError, DriftNotInterior, PyramidRateError, Trapped
from pyramidrate.geometry import GeneratedCone, Pyramid, distance_to_cone, dual_cone, extremal_directions
from pyramidrate.models import QUADRANT_MODELS
from pyramidrate.montecarlo import McConfig, survival_mc
from pyramidrate.oracle_dp import (LatticeModel, dp_box, extract_rate,
                                   halfspace_escape_probabilities, iter_dp, survival_dp)
from pyramidrate.rate import compute_rate, solve_su

SEED = 20240601
QUADRANT = Pyramid.orthant(2)


def _line(number, title, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}: {detail}"


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def criterion_1():
    t0 = time.perf_counter()
    worst, bad = 0.0, []
    for row in QUADRANT_MODELS:
        rep = compute_rate(row.distribution(), QUADRANT)
        a, b = rep.records
        got = (a.s_u, a.rho_u, b.s_u, b.rho_u, rep.rho)
        want = (row.s10, row.rho10, row.s01, row.rho01, row.rho)
        err = max(abs(g - w) for g, w in zip(got, want))
        worst = max(worst, err)
        if err > 1e-9:
            bad.append(f"model {row.number} |diff|={err:.3g} (computed rho {rep.rho:.9f}, "
                       f"table {row.rho:.9f})")
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 5.0
    detail = f"{12 - len(bad)}/12 rows within 1e-9, {elapsed:.2f} s"
    if bad:
        detail += "; mismatches: " + "; ".join(bad)
    return ok, detail


def _admissible_weights(rng, zero=None):
    while True:
        w = rng.dirichlet(np.ones(5))
        if zero is not None:
            w[zero] = 0.0
            w /= w.sum()
        try:
            closed_form_weighted(*w)
        except (DriftNotInterior, Trapped, DomainError):
            continue
        return w


def criterion_2():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for i in range(70):
        w = _admissible_weights(rng, zero=None if i < 50 else (0, 4)[i % 2])
        rho = compute_rate(weighted_model(*w), QUADRANT).rho
        worst = max(worst, abs(rho - closed_form_weighted(*w)))
    return worst <= 1e-8, f"70 weight vectors (20 with a zero corner), max |diff| {worst:.2e}"


def criterion_3():
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for _ in range(20):
        alpha = rng.uniform(0.05, math.pi)
        beta = rng.uniform(0.02, 0.98) * alpha
        r = rng.uniform(0.1, 3.0)
        target = math.exp(-0.5 * (r * min(math.sin(beta), math.sin(alpha - beta))) ** 2)
        closed, _, _ = closed_form_gaussian(alpha, beta, r)
        d, cone = gaussian_wedge(alpha, beta, r)
        worst = max(worst, abs(compute_rate(d, cone).rho - target), abs(closed - target))
    moreau = 0.0
    for dim, k in ((2, 2), (2, 3), (3, 4), (4, 6)):
        centre = np.ones(dim) / math.sqrt(dim)
        p = Pyramid(centre + 0.5 * rng.normal(size=(k, dim)) / math.sqrt(dim))
        polar = GeneratedCone(-dual_cone(p).generators)
        for x in rng.normal(size=(25, dim)) * 2:
            res = distance_to_cone(p, x) ** 2 + distance_to_cone(polar, x) ** 2 - x @ x
            moreau = max(moreau, abs(res))
    ok = worst <= 1e-6 and moreau <= 1e-9
    return ok, f"Gaussian max |diff| {worst:.2e} on 20 wedges; Moreau residual {moreau:.2e} on 100 points"


def criterion_4():
    parts, ok = [], True
    for number in (1, 3, 7, 12):
        row = QUADRANT_MODELS[number - 1]
        d = row.distribution()
        t0 = time.perf_counter()
        est = extract_rate(survival_dp(LatticeModel.from_model(d, QUADRANT), (0, 0), 600))
        elapsed = time.perf_counter() - t0
        theory = compute_rate(d, QUADRANT).rho
        rel = abs(est.rho_hat / theory - 1)
        ok &= rel <= 0.02 and elapsed < 60
        parts.append(f"model {number} rel {rel:.1e} in {elapsed:.1f} s")
    return ok, "; ".join(parts)


def criterion_5():
    d = AtomicDistribution(-np.array(QUADRANT_MODELS[0].steps))
    try:
        rho = compute_rate(d, QUADRANT).rho
    except PyramidRateError as exc:
        return False, f"compute_rate raised {type(exc).__name__}: {exc}"
    try:
        est = extract_rate(survival_dp(LatticeModel.from_model(d, QUADRANT), (0, 0), 600))
    except PyramidRateError as exc:
        return False, f"rho={rho:.6f}; DP rate extraction raised {type(exc).__name__}: {exc}"
    rel = abs(est.rho_hat / rho - 1)
    return rel <= 0.02 and rho < 1, f"rho={rho:.6f}, DP {est.rho_hat:.6f}, rel {rel:.1e}"


def _enumerate(d, x, k, event, weight):
    total = 0.0
    for path in itertools.product(range(len(d.probs)), repeat=k):
        pos = np.cumsum(d.atoms[list(path)], axis=0) + x
        total += float(np.prod(d.probs[list(path)])) * event(pos) * weight(pos)
    return total


def criterion_6():
    rng = np.random.default_rng(SEED + 6)
    laws = [AtomicDistribution(QUADRANT_MODELS[0].steps),
            AtomicDistribution([[1, 0], [0, 1], [-1, 0], [0, -1], [1, 1]],
                               [0.3, 0.25, 0.1, 0.15, 0.2])]
    events = [lambda P: float(np.all(P >= 0)),
              lambda P: float(P[-1, 0] > P[-1, 1]),
              lambda P: float(np.any(P[:, 0] + 2 * P[:, 1] < 1))]
    worst, points = 0.0, 0
    while points < 10:
        d = laws[points % 2]
        v = rng.normal(size=2)
        v /= np.linalg.norm(v)
        if d.drift @ v <= 0:
            continue
        s = solve_su(d, v)
        if s is None:
            continue
        t0 = s * v
        star = tilt(d, t0)
        scale = laplace(d, t0)
        x = rng.integers(-1, 3, size=2).astype(float)
        for k in (1, 2, 3):
            for ev in events:
                lhs = _enumerate(d, x, k, ev, lambda P: 1.0)
                rhs = scale ** k * math.exp(t0 @ x) * _enumerate(
                    star, x, k, ev, lambda P: math.exp(-t0 @ P[-1]))
                worst = max(worst, abs(lhs - rhs))
        points += 1
    return worst <= 1e-12, f"10 tilt points, k<=3, 3 events: max |diff| {worst:.2e}"


def criterion_7():
    rng = np.random.default_rng(SEED + 7)
    extra = rng.uniform(0.05, 1.0, size=(3, 2))
    cone = Pyramid(np.vstack([np.eye(2), extra]))
    worst = 0.0
    for row in QUADRANT_MODELS:
        d = row.distribution()
        worst = max(worst, abs(compute_rate(d, cone).rho - compute_rate(d, QUADRANT).rho))
    return worst <= 1e-9, f"12 models, 3 redundant normals: max |diff| {worst:.2e}"


def criterion_8():
    d = AtomicDistribution(QUADRANT_MODELS[0].steps)
    mc = survival_mc(d, QUADRANT, McConfig(chains=10**6, horizon=50, seed=7))
    dp = survival_dp(LatticeModel.from_model(d, QUADRANT), (0, 0), 50)
    n = np.arange(1, 51)
    inside = (mc.ci_low[n] <= dp.values[n]) & (dp.values[n] <= mc.ci_high[n])
    hits = int(inside.sum())
    return hits >= 45, f"{hits}/50 DP values inside the MC 95% intervals"


def criterion_9():
    rng = np.random.default_rng(SEED + 9)
    fails = []
    m1 = AtomicDistribution(QUADRANT_MODELS[0].steps)

    # convexity of L
    for _ in range(500):
        t1, t2 = rng.uniform(-3, 3, size=(2, 2))
        th = rng.uniform()
        if laplace(m1, th * t1 + (1 - th) * t2) > th * laplace(m1, t1) + (1 - th) * laplace(m1, t2) + 1e-12:
            fails.append("convexity")
            break

    # gradient vs central differences
    h, gerr = 1e-6, 0.0
    for d in (m1, GaussianDistribution([0.4, -0.2])):
        for t in rng.normal(size=(20, 2)):
            fd = np.array([(laplace(d, t + h * e) - laplace(d, t - h * e)) / (2 * h) for e in np.eye(2)])
            gerr = max(gerr, float(np.max(np.abs(d.grad_laplace(t) - fd))))
    if gerr > 1e-6:
        fails.append(f"gradient {gerr:.1e}")

    # KKT residuals at every reported minimiser
    kkt = max(r.kkt_residual for row in QUADRANT_MODELS
              for r in compute_rate(row.distribution(), QUADRANT).records)
    if kkt > 1e-8:
        fails.append(f"kkt {kkt:.1e}")

    # double duality on 1000 points
    p = Pyramid(np.ones(3) / math.sqrt(3) + 0.4 * rng.normal(size=(5, 3)))
    dual = dual_cone(p)
    back = Pyramid(dual.generators[list(extremal_directions(dual).indices)])
    for y in rng.normal(size=(1000, 3)):
        if abs(np.min(p.normals @ y)) > 1e-7 and p.contains(y) != back.contains(y):
            fails.append("double duality")
            break

    # DP mass conservation
    model = LatticeModel.from_model(m1, QUADRANT)
    prev, cons = 1.0, 0.0
    for _, q, ex, _ in iter_dp(model, (0, 0), 300):
        mass = q.sum()
        cons = max(cons, abs(mass + ex - prev))
        prev = mass
    if cons > 1e-12:
        fails.append(f"mass {cons:.1e}")

    # sandwich bounds for n <= 50
    tail = np.cumsum(survival_dp(model, (0, 0), 600).exits[::-1])[::-1]
    hs = [halfspace_escape_probabilities(model, i, range(60)) for i in range(2)]
    levels = model.normals @ dp_box(model, (0, 0), 50).coords()
    for n, q, _, _ in iter_dp(model, (0, 0), 50):
        parts = [float(q @ hu[np.clip(levels[i], 0, len(hu) - 1)]) for i, hu in enumerate(hs)]
        if not (max(parts) <= tail[n + 1] + 1e-10 and tail[n + 1] <= sum(parts) + 1e-10):
            fails.append(f"sandwich at n={n}")
            break

    detail = ("convexity, gradient (max err %.1e), KKT (max %.1e), double duality, "
              "mass conservation (max %.1e), sandwich n<=50" % (gerr, kkt, cons))
    if fails:
        detail += "; failed: " + ", ".join(fails)
    return not fails, detail


CRITERIA = [
    (1, "quadrant table reproduction", criterion_1),
    (2, "weighted closed form", criterion_2),
    (3, "Gaussian closed form and Moreau identity", criterion_3),
    (4, "DP rate limit", criterion_4),
    (5, "exterior-drift branch vs DP", criterion_5),
    (6, "change-of-measure identity", criterion_6),
    (7, "representation independence", criterion_7),
    (8, "MC vs DP agreement", criterion_8),
    (9, "property suites", criterion_9),
]


@pytest.mark.parametrize("number, title, check", CRITERIA, ids=[f"criterion{c[0]}" for c in CRITERIA])
def test_criterion(number, title, check, capsys):
    ok, detail = check()
    with capsys.disabled():
        print("\n" + _line(number, title, ok, detail))
    assert ok, detail


def main():
    failed = 0
    for number, title, check in CRITERIA:
        try:
            ok, detail = check()
        except Exception as exc:  # report and keep going
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        failed += not ok
        print(_line(number, title, ok, detail), flush=True)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())

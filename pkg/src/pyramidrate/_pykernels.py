"""Pure numpy implementations of the hot kernels.

These mirror :mod:`pyramidrate._ckernels` operation for operation, so atomic
Monte Carlo runs and DP sweeps agree bitwise between the two backends.
"""
import numpy as np

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_STEP = np.uint64(0xD1B54A32D192ED03)
_S30, _S27, _S31, _S11 = np.uint64(30), np.uint64(27), np.uint64(31), np.uint64(11)
_TWO53 = 1.0 / 9007199254740992.0


def _mix64(z):
    z = z ^ (z >> _S30)
    z = z * _M1
    z = z ^ (z >> _S27)
    z = z * _M2
    return z ^ (z >> _S31)


def stream_keys(seed, chain_ids):
    """Per-chain stream keys derived from ``(seed, chain index)``."""
    with np.errstate(over="ignore"):
        base = _mix64(np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64))[0]
        ids = np.asarray(chain_ids, dtype=np.uint64)
        return _mix64(base + ids * _GOLDEN)


def uniforms(keys, counter):
    """Uniform doubles in [0, 1) for draw number ``counter`` of each stream."""
    with np.errstate(over="ignore"):
        c = np.uint64(counter + 1) * _STEP
        return (_mix64(keys + c) >> _S11).astype(np.float64) * _TWO53


def dp_step(q, out, mask, offsets, probs, lo, hi):
    """Advance the sub-probability mass one step.

    ``q`` is non-zero only on ``[lo, hi]`` and ``out`` must be zero on the
    write range ``[lo + min(offsets), hi + max(offsets)]``.

    Returns
    -------
    exit_mass, total, new_lo, new_hi
        ``new_lo == -1`` when no mass survives.
    """
    omin, omax = int(offsets.min()), int(offsets.max())
    seg = q[lo:hi + 1]
    for off, p in zip(offsets, probs):
        out[lo + off:hi + 1 + off] += p * seg
    a, b = lo + omin, hi + omax + 1
    region = out[a:b]
    dead = mask[a:b] == 0
    exit_mass = float(region[dead].sum())
    region[dead] = 0.0
    total = float(region.sum())
    nz = np.flatnonzero(region)
    if nz.size == 0:
        return exit_mass, total, -1, -1
    return exit_mass, total, a + int(nz[0]), a + int(nz[-1])


def _inside(X, normals, tol):
    ok = np.ones(X.shape[0], dtype=bool)
    for u in normals:
        s = u[0] * X[:, 0]
        for j in range(1, X.shape[1]):
            s = s + u[j] * X[:, j]
        ok &= s >= -tol
    return ok


def mc_exit_times_atomic(atoms, cum, normals, x0, seed, chain_start, n_chains, horizon, tol):
    """First exit time of each chain, ``horizon + 1`` for survivors."""
    keys = stream_keys(seed, np.arange(chain_start, chain_start + n_chains))
    exit_time = np.full(n_chains, horizon + 1, dtype=np.int64)
    X = np.tile(np.asarray(x0, dtype=float), (n_chains, 1))
    alive = np.arange(n_chains)
    last = len(cum) - 1
    for n in range(horizon):
        if alive.size == 0:
            break
        u = uniforms(keys[alive], n)
        idx = np.minimum(np.searchsorted(cum, u, side="right"), last)
        X[alive] += atoms[idx]
        ok = _inside(X[alive], normals, tol)
        exit_time[alive[~ok]] = n + 1
        alive = alive[ok]
    return exit_time


def mc_exit_times_gauss(mean, normals, x0, seed, chain_start, n_chains, horizon, tol):
    dim = len(mean)
    keys = stream_keys(seed, np.arange(chain_start, chain_start + n_chains))
    exit_time = np.full(n_chains, horizon + 1, dtype=np.int64)
    X = np.tile(np.asarray(x0, dtype=float), (n_chains, 1))
    alive = np.arange(n_chains)
    for n in range(horizon):
        if alive.size == 0:
            break
        k = keys[alive]
        for i in range(dim):
            u1 = uniforms(k, n * 2 * dim + 2 * i)
            u2 = uniforms(k, n * 2 * dim + 2 * i + 1)
            z = np.sqrt(-2.0 * np.log(1.0 - u1)) * np.cos(2.0 * np.pi * u2)
            X[alive, i] += mean[i] + z
        ok = _inside(X[alive], normals, tol)
        exit_time[alive[~ok]] = n + 1
        alive = alive[ok]
    return exit_time

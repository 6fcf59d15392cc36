import numpy as np
import pytest

from pyramidrate import _pykernels, kernels


def test_backend_selection():
    assert kernels.BACKEND in ("python", "cython")
    assert kernels.get_backend("python") is _pykernels
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_splitmix_reference_values():
    # splitmix64 finaliser applied to 0 and 1
    out = _pykernels._mix64(np.array([0, 1], dtype=np.uint64))
    assert int(out[0]) == 0
    assert int(out[1]) == 0x5692161D100B05E5


def test_uniforms_in_unit_interval():
    keys = _pykernels.stream_keys(1, np.arange(1000))
    u = _pykernels.uniforms(keys, 0)
    assert np.all((u >= 0) & (u < 1))
    assert abs(u.mean() - 0.5) < 0.05


def test_dp_step_shift_add():
    q = np.zeros(10)
    q[4] = 1.0
    out = np.zeros(10)
    mask = np.ones(10, dtype=np.uint8)
    mask[6] = 0
    offsets = np.array([-1, 2], dtype=np.int64)
    probs = np.array([0.25, 0.75])
    ex, tot, lo, hi = _pykernels.dp_step(q, out, mask, offsets, probs, 4, 4)
    assert ex == 0.75 and tot == 0.25 and (lo, hi) == (3, 3)
    assert out[3] == 0.25 and out[6] == 0.0


@pytest.mark.skipif(kernels.compiled_backend is None, reason="compiled kernels not built")
def test_compiled_matches_python():
    c = kernels.compiled_backend
    ids = np.arange(50, dtype=np.uint64)
    assert np.array_equal(c.stream_keys(7, ids), _pykernels.stream_keys(7, ids))
    rng = np.random.default_rng(0)
    q = np.zeros(200)
    q[80:120] = rng.random(40)
    mask = (rng.random(200) > 0.2).astype(np.uint8)
    offsets = np.array([-21, -1, 1, 20], dtype=np.int64)
    probs = np.array([0.1, 0.2, 0.3, 0.4])
    o1, o2 = np.zeros(200), np.zeros(200)
    r1 = _pykernels.dp_step(q, o1, mask, offsets, probs, 80, 119)
    r2 = c.dp_step(q, o2, mask, offsets, probs, 80, 119)
    assert np.allclose(o1, o2, rtol=0, atol=1e-16)
    assert r1[2:] == r2[2:]
    assert abs(r1[0] - r2[0]) <= 1e-15 and abs(r1[1] - r2[1]) <= 1e-15

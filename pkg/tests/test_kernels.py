import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from forbidtrans import _kernels
from forbidtrans._kernels import _fallback

compiled = pytest.mark.skipif(_kernels.BACKEND != "compiled", reason="extension not built")


def _problem(seed, n, m):
    rng = np.random.default_rng(seed)
    e = np.sort(rng.uniform(-3, 3, n))
    sigma = rng.random(n)
    sigma[rng.random(n) < 0.3] = 0
    sigma /= max(sigma.sum(), 1e-300)
    r2 = rng.random((n, n)) ** 2
    offsets = rng.uniform(-6, 6, m)
    return e, sigma, r2, offsets


@compiled
@given(st.integers(0, 2**31), st.integers(1, 40), st.booleans(),
       st.floats(0.01, 2.0), st.sampled_from([math.inf, 0.5, 2.0]))
def test_backends_agree(seed, n, gaussian, width, cutoff):
    from forbidtrans._kernels import _bath
    args = _problem(seed, n, 7)
    fast = _bath.bath_spectrum(*args, gaussian, width, cutoff)
    slow = _fallback.bath_spectrum(*args, gaussian, width, cutoff)
    assert np.allclose(fast, slow, rtol=1e-12, atol=1e-300)


def test_cutoff_masks_pairs():
    e = np.array([0.0, 1.0, 5.0])
    sigma = np.array([1.0, 0.0, 0.0])
    r2 = np.ones((3, 3))
    out = _kernels.bath_spectrum(e, sigma, r2, [5.0], True, 0.1, 2.0)
    assert out[0] == 0.0
    out = _kernels.bath_spectrum(e, sigma, r2, [5.0], True, 0.1, 10.0)
    assert out[0] > 0


def test_environment_forces_fallback():
    env = dict(os.environ, FORBIDTRANS_PURE_PYTHON="1")
    res = subprocess.run([sys.executable, "-c", "import forbidtrans; print(forbidtrans.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert res.stdout.strip() == "python"

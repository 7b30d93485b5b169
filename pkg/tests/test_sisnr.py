import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scenarios import orthogonal_noise
from speechkit.metrics import si_snr, si_snri


def test_perfect_estimate_is_inf():
    s = np.random.default_rng(0).normal(size=1000)
    assert si_snr(s, s) == float("inf")


def test_mixture_improvement_is_zero():
    rng = np.random.default_rng(1)
    s, x = rng.normal(size=(2, 800))
    assert si_snri(s, x, x) == 0.0


def test_constructed_orthogonal_twenty_db():
    rng = np.random.default_rng(2)
    s = rng.normal(size=4000) + 0.3
    n = orthogonal_noise(s, rng, 100.0)
    assert si_snr(s, s + n) == pytest.approx(20.0, abs=1e-9)


def test_errors():
    with pytest.raises(ValueError):
        si_snr(np.ones(10), np.ones(11))
    with pytest.raises(ValueError):
        si_snr(np.ones(10), np.arange(10.0))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
def test_scale_invariance(seed, beta):
    rng = np.random.default_rng(seed)
    s, e = rng.normal(size=(2, 256))
    assert si_snr(s, beta * e) == pytest.approx(si_snr(s, e), abs=1e-10)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from speechkit.metrics import eer

from oracles import eer_dense


def test_separable():
    rate, thr = eer([0.9, 0.8], [0.1, 0.2])
    assert rate == 0.0
    assert 0.2 < thr < 0.8


def test_identical_distributions_near_fifty():
    rng = np.random.default_rng(0)
    x = rng.normal(size=20_000)
    y = rng.normal(size=20_000)
    assert eer(x, y)[0] == pytest.approx(50.0, abs=1.5)


def test_identical_lists_exactly_fifty():
    x = np.linspace(0, 1, 101)
    assert eer(x, x)[0] == pytest.approx(50.0, abs=1.0)


def test_empty_raises():
    with pytest.raises(ValueError):
        eer([], [1.0])


@pytest.mark.parametrize("seed", range(3))
def test_dense_sweep_oracle(seed):
    rng = np.random.default_rng(seed)
    t = rng.normal(1.5, 1.0, 500)
    n = rng.normal(0.0, 1.0, 500)
    assert eer(t, n)[0] == pytest.approx(eer_dense(t, n), abs=0.05)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=30),
       st.lists(st.floats(-5, 5), min_size=1, max_size=30))
def test_role_sign_swap_symmetry(t, n):
    a, _ = eer(t, n)
    b, _ = eer([-x for x in n], [-x for x in t])
    assert a == pytest.approx(b, abs=1e-9)

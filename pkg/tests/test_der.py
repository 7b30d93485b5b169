import numpy as np
import pytest

from speechkit.metrics import der, der_breakdown
from speechkit.metrics.der import read_rttm

from oracles import der_grid
from scenarios import diarization_scenario as random_scenario


def test_identical_is_zero():
    ref = [(0.0, 2.0, "a"), (1.5, 4.0, "b"), (5.0, 6.0, "a")]
    assert der(ref, ref) == 0.0
    hyp = [(s, e, {"a": "X", "b": "Y"}[k]) for s, e, k in ref]
    assert der(ref, hyp) == 0.0


def test_one_second_missed():
    assert der([(0.0, 10.0, "A")], [(0.0, 9.0, "A")]) == pytest.approx(10.0, abs=1e-12)


def test_breakdown_terms():
    ref = [(0.0, 4.0, "a"), (4.0, 8.0, "b")]
    hyp = [(0.0, 6.0, "x"), (6.0, 9.0, "y")]
    b = der_breakdown(ref, hyp)
    assert b.mapping == {"x": "a", "y": "b"}
    assert b.confusion == pytest.approx(2.0)
    assert b.false_alarm == pytest.approx(1.0)
    assert b.missed == 0.0
    assert b.reference_length == pytest.approx(8.0)


def test_collar_forgives_boundary_shift():
    ref = [(1.0, 5.0, "a")]
    hyp = [(1.2, 4.9, "a")]
    assert der(ref, hyp, collar=0.25) == 0.0
    assert der(ref, hyp, collar=0.0) > 0.0


def test_errors():
    with pytest.raises(ValueError):
        der([], [(0, 1, "a")])
    with pytest.raises(ValueError):
        der([(1.0, 1.0, "a")], [])


@pytest.mark.parametrize("collar,ignore_overlap", [(0.0, False), (0.25, False), (0.0, True), (0.25, True)])
def test_matches_grid_oracle(collar, ignore_overlap):
    rng = np.random.default_rng(int(collar * 100) + 10 * ignore_overlap)
    for _ in range(10):
        ref, hyp = random_scenario(rng)
        assert der(ref, hyp, collar, ignore_overlap) == pytest.approx(
            der_grid(ref, hyp, collar, ignore_overlap), abs=1e-9)


def test_label_permutation_invariance():
    rng = np.random.default_rng(3)
    for _ in range(20):
        ref, hyp = random_scenario(rng)
        labels = sorted({k for *_, k in hyp})
        perm = dict(zip(labels, rng.permutation(labels)))
        relabelled = [(s, e, perm[k]) for s, e, k in hyp]
        assert der(ref, relabelled, 0.25) == der(ref, hyp, 0.25)


def test_read_rttm(tmp_path):
    p = tmp_path / "x.rttm"
    p.write_text(
        "SPEAKER meet 1 0.50 1.25 <NA> <NA> spk1 <NA> <NA>\n"
        "SPKR-INFO meet 1 <NA> <NA> <NA> unknown spk1 <NA> <NA>\n"
        "SPEAKER meet 1 2.00 0.50 <NA> <NA> spk2 <NA> <NA>\n")
    assert read_rttm(p) == [(0.5, 1.75, "spk1"), (2.0, 2.5, "spk2")]

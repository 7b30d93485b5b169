
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from speechkit.metrics import ErrorRateStats, align, error_rate, render_wer_report, score_corpus
from speechkit.metrics.wer import read_transcripts

from oracles import edit_distance


def test_substitution_alignment():
    ali = align("AT ANOTHER TIME HARALD ASKED".split(), "AT ANOTHER TIME HAROLD ASKED".split())
    assert ali.codes == ["EQ", "EQ", "EQ", "SUB", "EQ"]
    assert ali.ops[3][1:] == ("HARALD", "HAROLD")


def test_insertion_alignment():
    ref = "THAT WILL BE SAFEST NO NO NEVER".split()
    hyp = "THAT WILL BE THE SAFEST NO NO NEVER".split()
    ali = align(ref, hyp)
    assert ali.codes.count("INS") == 1
    assert ali.codes.count("EQ") == 7
    assert ali.ops[3] == (3, None, "THE")


def test_identical_sequences():
    ali = align(list("abc"), list("abc"))
    assert ali.errors == 0
    assert set(ali.codes) == {"EQ"}


@pytest.mark.parametrize("ref,hyp,codes", [
    ([], [], []),
    (["a", "b"], [], ["DEL", "DEL"]),
    ([], ["a"], ["INS"]),
])
def test_empty_sides(ref, hyp, codes):
    assert align(ref, hyp).codes == codes


def test_tie_break_prefers_sub_over_del_ins():
    # cost 1 either as SUB, or as DEL+INS (cost 2): SUB must win
    assert align(["a"], ["b"]).codes == ["SUB"]
    # "ab" vs "ba": several optimal paths of cost 2
    assert align(["a", "b"], ["b", "a"]).codes == ["SUB", "SUB"]


def test_error_rate_one_sub_in_five():
    stats = ErrorRateStats()
    stats.add("u", "AT ANOTHER TIME HARALD ASKED".split(), "AT ANOTHER TIME HAROLD ASKED".split())
    assert error_rate(stats) == 20.0


def test_error_rate_identical_and_empty():
    stats = score_corpus({"a": ["x", "y"]}, {"a": ["x", "y"]})
    assert error_rate(stats) == 0.0
    with pytest.raises(ValueError):
        error_rate(ErrorRateStats())


def test_random_pairs_match_oracle():
    rng = np.random.default_rng(7)
    stats = ErrorRateStats()
    expected = 0
    for k in range(200):
        ref = [str(x) for x in rng.integers(0, 3, rng.integers(0, 9))]
        hyp = [str(x) for x in rng.integers(0, 3, rng.integers(0, 9))]
        stats.add(str(k), ref, hyp)
        expected += edit_distance(ref, hyp)
    assert stats.errors == expected
    assert error_rate(stats) == pytest.approx(100.0 * expected / stats.n_ref_tokens, abs=0)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from("abc"), max_size=10), st.lists(st.sampled_from("abc"), max_size=10))
def test_alignment_reconstructs_both_sides(ref, hyp):
    ali = align(ref, hyp)
    assert ali.ref_tokens() == ref
    assert ali.hyp_tokens() == hyp
    assert ali.errors == edit_distance(ref, hyp)


def test_report_empty_and_all_eq():
    text = render_wer_report(ErrorRateStats())
    assert text.splitlines()[0] == "Scored 0 sentences, 0 not present in hyp."
    assert text.splitlines()[2] == "ALIGNMENTS"
    stats = score_corpus({"x": ["A", "BB"]}, {"x": ["A", "BB"]})
    lines = render_wer_report(stats).splitlines()
    assert set(lines[-2].replace(";", "").split()) == {"="}


def test_missing_hypothesis_counted():
    stats = score_corpus({"a": ["x"], "b": ["y", "z"]}, {"a": ["x"]})
    assert stats.missing_hyp == 1
    assert stats.dels == 2
    assert render_wer_report(stats).startswith("Scored 2 sentences, 1 not present in hyp.\n")


def test_threaded_scoring_equals_serial():
    rng = np.random.default_rng(1)
    refs = {str(i): list(rng.choice(list("abcd"), 6)) for i in range(50)}
    hyps = {str(i): list(rng.choice(list("abcd"), 5)) for i in range(50)}
    a = score_corpus(refs, hyps)
    b = score_corpus(refs, hyps, threads=4)
    assert render_wer_report(a) == render_wer_report(b)


def test_read_transcripts(tmp_path):
    p = tmp_path / "t.txt"
    p.write_text("u1\tHELLO WORLD\nu2\t\n\n", encoding="utf-8")
    assert read_transcripts(p) == {"u1": ["HELLO", "WORLD"], "u2": []}

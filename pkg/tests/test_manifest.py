import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from speechkit.manifest import ManifestError, load_manifest, parse_manifest, validate_manifest

JSON_EXCERPT = """\
{
  "sentence001": {
    "wav": "{data_root}/file_snt001.wav",
    "length": 2.10,
    "words": "SWITCH OFF THE LIGHT"
  },
}
"""

CSV_EXCERPT = """\
ID,length,wav,words
sentence001,2.10,{data_root}/file_snt001.wav,"SWITCH OFF THE LIGHT"
sentence002,2.70,{data_root}/file_snt002.wav,"SWITCH ON THE LIGHT"
sentence003,3.20,{data_root}/file_snt003.wav,"PLEASE, TURN OFF THE LIGHT"
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_json_excerpt(tmp_path):
    m = load_manifest(write(tmp_path, "m.json", JSON_EXCERPT), data_root="/data")
    assert m.ids == ["sentence001"]
    assert m["sentence001"] == {"wav": "/data/file_snt001.wav", "length": 2.10, "words": "SWITCH OFF THE LIGHT"}


def test_csv_excerpt(tmp_path):
    m = load_manifest(write(tmp_path, "m.csv", CSV_EXCERPT), data_root="/data/")
    assert m.ids == ["sentence001", "sentence002", "sentence003"]
    assert m["sentence003"]["words"] == "PLEASE, TURN OFF THE LIGHT"
    assert m["sentence002"]["length"] == 2.70 and m["sentence002"]["wav"] == "/data/file_snt002.wav"


def test_csv_typing():
    m = parse_manifest('ID,a,b,c,d,e\nx,3,"3",-1.5e2,abc,""\n', "csv")
    assert m["x"] == {"a": 3, "b": "3", "c": -150.0, "d": "abc", "e": ""}


def test_csv_quoting_rules():
    text = 'ID,t\r\nx,"say ""hi""\nthere"\r\ny,plain\r\n\r\n'
    m = parse_manifest(text, "csv")
    assert m["x"]["t"] == 'say "hi"\nthere' and m["y"]["t"] == "plain"


def test_other_placeholders_pass_through():
    m = parse_manifest('{"a": {"p": "{data_root}/{split}/x.wav"}}', "json", "/r")
    assert m["a"]["p"] == "/r/{split}/x.wav"


def test_empty():
    assert len(parse_manifest("{}", "json")) == 0
    assert len(parse_manifest("ID,a\n", "csv")) == 0


@pytest.mark.parametrize("text,fmt", [
    ('{"a": {"x": 1}, "a": {"x": 2}}', "json"),
    ('{"a": {"x": [1]}}', "json"),
    ('{"a": {"x": null}}', "json"),
    ('[1, 2]', "json"),
    ('{"a": 1}', "json"),
    ('{"a": {"x": 1}', "json"),
    ("ID,a\nx,1\nx,2\n", "csv"),
    ("ID,a\nx,1,2\n", "csv"),
    ("ID,a\nx\n", "csv"),
    ("name,a\nx,1\n", "csv"),
    ('ID,a\nx,"open\n', "csv"),
    ('ID,a\nx,"q"z\n', "csv"),
])
def test_errors(text, fmt):
    with pytest.raises(ManifestError):
        parse_manifest(text, fmt)


def test_unreadable_and_format(tmp_path):
    with pytest.raises(ManifestError):
        load_manifest(tmp_path / "missing.json")
    with pytest.raises(ManifestError):
        load_manifest(write(tmp_path, "m.txt", "{}"))
    assert len(load_manifest(write(tmp_path, "m.txt", "{}"), format="json")) == 0


def test_load_is_pure(tmp_path):
    p = write(tmp_path, "m.csv", CSV_EXCERPT)
    assert load_manifest(p, data_root="/d") == load_manifest(p, data_root="/d")


def test_validate(tmp_path):
    (tmp_path / "a.wav").write_bytes(b"")
    text = json.dumps({
        "a": {"wav": "{data_root}/a.wav", "length": 1.0},
        "b": {"wav": "{data_root}/b.wav", "length": -1},
        "c": {"words": "NOT A PATH", "length": "x"},
    })
    m = parse_manifest(text, "json", tmp_path)
    report = validate_manifest(m, audio_check=True)
    kinds = [(f.kind, f.example_id, f.key) for f in report]
    assert kinds == [("missing_file", "b", "wav"), ("nonpositive_length", "b", "length"),
                     ("bad_length", "c", "length")]
    assert report.findings[0].detail == str(tmp_path / "b.wav")
    assert [f.kind for f in validate_manifest(m, audio_check=False)] == ["nonpositive_length", "bad_length"]
    ok = parse_manifest(json.dumps({"a": {"wav": str(tmp_path / "a.wav")}}), "json")
    assert validate_manifest(ok).ok
    assert [f.kind for f in validate_manifest(parse_manifest("{}", "json"))] == ["empty"]


def test_validate_does_not_mutate():
    m = parse_manifest('{"a": {"length": -1}}', "json")
    before = {k: dict(v) for k, v in m.examples.items()}
    validate_manifest(m)
    assert m.examples == before


def _csv_quote(s):
    return '"' + s.replace('"', '""') + '"'


ids = st.text(st.characters(min_codepoint=33, max_codepoint=0x2000, blacklist_characters='",'),
              min_size=1, max_size=6)
values = st.text(st.characters(blacklist_categories=("Cs",), blacklist_characters="\r"), max_size=10)


@settings(max_examples=200, deadline=None)
@given(st.dictionaries(ids, st.lists(values, min_size=2, max_size=2), max_size=6))
def test_csv_json_equivalence(rows):
    as_json = json.dumps({k: {"a": v[0], "b": v[1]} for k, v in rows.items()})
    lines = ["ID,a,b"] + [",".join([_csv_quote(k), _csv_quote(v[0]), _csv_quote(v[1])]) for k, v in rows.items()]
    as_csv = "\n".join(lines) + "\n"
    assert parse_manifest(as_json, "json", "/r") == parse_manifest(as_csv, "csv", "/r")

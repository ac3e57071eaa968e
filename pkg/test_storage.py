"""Tests for the local artifact store."""

import json

import pytest

from core.errors import IoFailure, MissingArtifact
from services import LocalArtifactStore, get_artifact_store
from services.storage import records_checksum


def test_default_base_path_follows_settings(out_dir):
    store = get_artifact_store()
    assert store.path("data.jsonl") == out_dir / "data.jsonl"
    assert store.path("a.svg", "plots") == out_dir / "plots" / "a.svg"


def test_jsonl_header_and_records(tmp_path):
    store = LocalArtifactStore(tmp_path)
    records = [{"x": 0.5, "y1": 1, "y2": 0}, {"x": -1.0, "y1": 0, "y2": 0}]
    store.write_jsonl("data.jsonl", {"task": "sin1d", "seed": 3}, records)

    header, again = store.read_jsonl("data.jsonl")
    assert again == records
    assert header["task"] == "sin1d"
    assert header["n"] == 2
    assert header["schema_version"] == 1
    lines = (tmp_path / "data.jsonl").read_text().splitlines()
    assert header["checksum"] == records_checksum(lines[1:])


def test_jsonl_keys_are_sorted(tmp_path):
    store = LocalArtifactStore(tmp_path)
    store.write_jsonl("d.jsonl", {"task": "pi"}, [{"y2": "b", "x": 1, "y1": "a"}])
    record_line = (tmp_path / "d.jsonl").read_text().splitlines()[1]
    assert record_line == '{"x":1,"y1":"a","y2":"b"}'


def test_tampered_jsonl_fails_checksum(tmp_path):
    store = LocalArtifactStore(tmp_path)
    store.write_jsonl("data.jsonl", {"task": "sin1d"}, [{"x": 0.5, "y1": 1, "y2": 0}])
    path = tmp_path / "data.jsonl"
    path.write_text(path.read_text().replace('"y1":1', '"y1":0'))
    with pytest.raises(IoFailure):
        store.read_jsonl("data.jsonl")


def test_truncated_jsonl_fails(tmp_path):
    store = LocalArtifactStore(tmp_path)
    store.write_jsonl("data.jsonl", {"task": "sin1d"}, [{"x": i} for i in range(3)])
    path = tmp_path / "data.jsonl"
    path.write_text("\n".join(path.read_text().splitlines()[:-1]) + "\n")
    with pytest.raises(IoFailure):
        store.read_jsonl("data.jsonl")
    (tmp_path / "empty.jsonl").write_text("")
    with pytest.raises(IoFailure):
        store.read_jsonl("empty.jsonl")


def test_missing_and_invalid_json(tmp_path):
    store = LocalArtifactStore(tmp_path)
    with pytest.raises(MissingArtifact):
        store.read_json("model.json")
    (tmp_path / "model.json").write_text("{not json")
    with pytest.raises(IoFailure):
        store.read_json("model.json")
    assert not store.exists("eval.json")


def test_csv_round_trip_as_strings(tmp_path):
    store = LocalArtifactStore(tmp_path)
    store.write_csv("coverage.csv", [{"beta": 0.05, "failure_rate": 0.01}, {"beta": 0.1, "failure_rate": 0.02}])
    rows = store.read_csv("coverage.csv")
    assert rows == [{"beta": "0.05", "failure_rate": "0.01"}, {"beta": "0.1", "failure_rate": "0.02"}]
    assert (tmp_path / "coverage.csv").read_bytes().count(b"\r") == 0


def test_empty_csv_keeps_given_header(tmp_path):
    store = LocalArtifactStore(tmp_path)
    store.write_csv("loss.csv", [], fieldnames=["step", "loss"])
    assert (tmp_path / "loss.csv").read_text() == "step,loss\n"


def test_metadata_accumulates_stages(tmp_path):
    store = LocalArtifactStore(tmp_path)
    store.write_metadata("gen-data:train", {"seed": 1})
    store.write_metadata("train", {"seed": 1}, {"model": {"kind": "oracle"}})
    metadata = json.loads((tmp_path / "metadata.json").read_text())
    assert set(metadata) == {"gen-data:train", "train"}
    assert metadata["train"]["model"] == {"kind": "oracle"}
    assert "finished_at" in metadata["train"]

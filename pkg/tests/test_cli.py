"""CLI plumbing: artifacts, config precedence, exit codes, determinism."""

import json
import os

import pytest

from ustlab.cli import run


def read(path):
    with open(path) as fh:
        return fh.read()


@pytest.fixture
def forest_dump(tmp_path):
    out = tmp_path / "forest.json"
    rc = run(
        ["sample-ust", "--domain", "box", "--n", "3", "--bc", "wired",
         "--seed", "11", "--out", str(out)]
    )
    assert rc == 0
    return out


class TestSampleUst:
    def test_dump_shape(self, forest_dump):
        doc = json.loads(read(forest_dump))
        assert doc["type"] == "forest"
        assert doc["domain"]["kind"] == "box"
        # wired 7x7 box: 5x5 interior + wired root -> 25 tree edges
        assert len(doc["tree_edges"]) == 25

    def test_svg_output(self, tmp_path):
        svg = tmp_path / "t.svg"
        rc = run(
            ["sample-ust", "--domain", "rect", "--nx", "4", "--ny", "3", "--bc",
             "free", "--seed", "2", "--out", str(tmp_path / "f.json"), "--svg", str(svg)]
        )
        assert rc == 0
        text = read(svg)
        assert text.startswith("<?xml")
        assert "<line" in text

    def test_deterministic(self, tmp_path):
        outs = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            run(["sample-ust", "--n", "3", "--seed", "4", "--out", str(out)])
            outs.append(read(out))
        assert outs[0] == outs[1]


class TestCutAndStructure:
    def test_cut_snapshots_nested(self, forest_dump, tmp_path):
        out = tmp_path / "cut.json"
        rc = run(["cut", "--forest", str(forest_dump), "--t", "-0.3", "-1.5",
                  "--seed", "11", "--out", str(out)])
        assert rc == 0
        doc = json.loads(read(out))
        late, early = doc["snapshots"]
        assert set(map(tuple, map(json.dumps, early["tree_edges"]))) <= set(
            map(tuple, map(json.dumps, late["tree_edges"]))
        ) or len(early["tree_edges"]) <= len(late["tree_edges"])

    def test_structure_weights(self, forest_dump, tmp_path):
        out = tmp_path / "s.json"
        rc = run(["structure", "--forest", str(forest_dump), "--t", "-1.0",
                  "--seed", "11", "--out", str(out)])
        assert rc == 0
        doc = json.loads(read(out))
        assert doc["mesh"] == 1.0
        for e in doc["edges"]:
            assert e["w"] == e["m"] * doc["mesh"] ** 1.25

    def test_glue_roundtrip(self, forest_dump, tmp_path):
        s = tmp_path / "s.json"
        run(["structure", "--forest", str(forest_dump), "--t", "-1.0",
             "--seed", "11", "--out", str(s)])
        g = tmp_path / "g.json"
        rc = run(["glue", "--structure", str(s), "--scheme", "uniform",
                  "--t", "-1.0", "--seed", "11", "--out", str(g)])
        assert rc == 0
        doc = json.loads(read(g))
        sites = json.loads(read(s))["sites"]
        assert len(doc["events"]) == len(sites) - 1

    def test_resistance_scheme_on_triangle_fixture(self, tmp_path):
        s = tmp_path / "k3.json"
        s.write_text(json.dumps({
            "mesh": 1.0,
            "sites": [{"id": "x", "size": 1, "diameter": 0.0},
                      {"id": "y", "size": 1, "diameter": 0.0},
                      {"id": "z", "size": 1, "diameter": 0.0}],
            "edges": [{"a": "x", "b": "y", "m": 1, "w": 1.0},
                      {"a": "y", "b": "z", "m": 1, "w": 1.0},
                      {"a": "x", "b": "z", "m": 1, "w": 1.0}],
        }))
        g = tmp_path / "g.json"
        rc = run(["glue", "--structure", str(s), "--scheme", "resistance",
                  "--seed", "3", "--out", str(g)])
        assert rc == 0
        assert len(json.loads(read(g))["events"]) == 2


class TestConfigPrecedence:
    def test_config_file_supplies_defaults(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n": 2, "seed": 5, "bc": "free"}))
        out = tmp_path / "f.json"
        rc = run(["--config", str(cfg), "sample-ust", "--out", str(out)])
        assert rc == 0
        assert json.loads(read(out))["domain"]["n"] == 2

    def test_flags_override_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n": 2, "seed": 5}))
        out = tmp_path / "f.json"
        rc = run(["--config", str(cfg), "sample-ust", "--n", "3", "--out", str(out)])
        assert rc == 0
        assert json.loads(read(out))["domain"]["n"] == 3

    def test_toml_config(self, tmp_path):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text('n = 2\nseed = 5\nbc = "free"\n')
        out = tmp_path / "f.json"
        rc = run(["--config", str(cfg), "sample-ust", "--out", str(out)])
        assert rc == 0

    def test_env_seed_override(self, tmp_path, monkeypatch):
        out1, out2 = tmp_path / "1.json", tmp_path / "2.json"
        monkeypatch.setenv("USTLAB_SEED", "123")
        run(["sample-ust", "--n", "2", "--out", str(out1)])
        monkeypatch.delenv("USTLAB_SEED")
        run(["sample-ust", "--n", "2", "--seed", "123", "--out", str(out2)])
        assert read(out1) == read(out2)

    def test_bad_config_is_exit_2(self, tmp_path):
        cfg = tmp_path / "broken.json"
        cfg.write_text("{nope")
        assert run(["--config", str(cfg), "sample-ust"]) == 2

    def test_missing_required_input_is_exit_2(self):
        assert run(["glue"]) == 2

    def test_unknown_exponent_kind_is_exit_2(self):
        assert run(["exponents"]) == 2


class TestExponentsCsv:
    def test_schema_header_and_17_digit_floats(self, tmp_path):
        out = tmp_path / "e.csv"
        rc = run(["exponents", "lerw-length", "--sizes", "8,16,32",
                  "--samples", "100", "--seed", "3", "--out", str(out)])
        assert rc == 0
        lines = read(out).splitlines()
        assert lines[0] == "# schema: ustlab.csv.v1"
        assert lines[1] == "N,mean,stderr,samples"
        assert len(lines) == 5

    def test_summary_json(self, tmp_path):
        out, summ = tmp_path / "e.csv", tmp_path / "e.json"
        rc = run(["exponents", "es", "--L", "1", "--sizes", "8,16,32",
                  "--samples", "400", "--seed", "3", "--out", str(out),
                  "--summary", str(summ)])
        assert rc == 0
        doc = json.loads(read(summ))
        assert "fit" in doc and doc["kind"] == "es"


class TestVerify:
    def test_passes_and_reports(self, tmp_path, capsys):
        out = tmp_path / "v.txt"
        assert run(["verify", "--seed", "1", "--out", str(out)]) == 0
        text = read(out)
        assert "FAIL" not in text
        assert text.strip().endswith("OK")


class TestRender:
    def test_forest_render(self, forest_dump, tmp_path):
        out = tmp_path / "r.svg"
        assert run(["render", "--input", str(forest_dump), "--out", str(out)]) == 0
        assert "<svg" in read(out)

    def test_structure_render(self, forest_dump, tmp_path):
        s = tmp_path / "s.json"
        run(["structure", "--forest", str(forest_dump), "--t", "-1.0",
             "--seed", "11", "--out", str(s)])
        out = tmp_path / "r.svg"
        assert run(["render", "--input", str(s), "--out", str(out)]) == 0
        assert "<circle" in read(out)

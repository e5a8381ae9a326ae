import json
import os

import pytest

from periodic_spectra import make_g11
from periodic_spectra.cli import main
from periodic_spectra.io import (
    graph_to_spec,
    load_graph_file,
    write_graph_file,
)


def run(tmp_path, *argv):
    cwd = os.getcwd()
    os.chdir(tmp_path)
    try:
        return main(list(argv))
    finally:
        os.chdir(cwd)


def read_json(path):
    return json.loads(path.read_text())


class TestSigmaEss:
    def test_builtin_pendant_chain(self, tmp_path):
        code = run(
            tmp_path,
            "sigma-ess", "--graph", "builtin:g11", "--grid", "256",
            "--out", str(tmp_path / "spec"),
        )
        assert code == 0
        payload = read_json(tmp_path / "spec.json")
        intervals = payload["intervals"]
        assert len(intervals) == 2
        assert intervals[0]["lo"] == pytest.approx(-1.0, abs=1e-9)
        assert intervals[0]["hi"] == pytest.approx(-1.0 / 3.0, abs=1e-9)
        assert intervals[1]["lo"] == pytest.approx(1.0 / 3.0, abs=1e-9)
        assert intervals[1]["hi"] == pytest.approx(1.0, abs=1e-9)
        assert not intervals[0]["flat"]

    def test_flat_band_marked(self, tmp_path):
        run(
            tmp_path,
            "sigma-ess", "--graph", "builtin:g21", "--grid", "64",
            "--out", str(tmp_path / "g21"),
        )
        payload = read_json(tmp_path / "g21.json")
        flats = [iv for iv in payload["intervals"] if iv["flat"]]
        assert len(flats) == 1
        assert flats[0]["lo"] == pytest.approx(0.0, abs=1e-12)

    def test_graph_file_equals_builtin(self, tmp_path):
        path = tmp_path / "g11.json"
        write_graph_file(path, make_g11().base)
        assert load_graph_file(path) == make_g11().base
        run(
            tmp_path,
            "sigma-ess", "--graph", str(path), "--grid", "64",
            "--out", str(tmp_path / "from_file"),
        )
        run(
            tmp_path,
            "sigma-ess", "--graph", "builtin:g11", "--grid", "64",
            "--out", str(tmp_path / "from_builtin"),
        )
        a = read_json(tmp_path / "from_file.json")
        b = read_json(tmp_path / "from_builtin.json")
        assert a["intervals"] == b["intervals"]


class TestBands:
    def test_csv_layout(self, tmp_path):
        run(
            tmp_path,
            "bands", "--graph", "builtin:g11", "--grid", "8",
            "--out", str(tmp_path / "bands"), "--emit-plot-data",
        )
        lines = (tmp_path / "bands.csv").read_text().splitlines()
        assert lines[0].startswith("# manifest-sha256: ")
        assert lines[1] == "k_1,lambda_1,lambda_2"
        assert len(lines) == 2 + 8
        first = lines[2].split(",")
        assert float(first[0]) == 0.0
        assert float(first[2]) == pytest.approx(1.0)
        assert (tmp_path / "bands.dat").exists()
        assert (tmp_path / "bands.manifest.json").exists()

    def test_manifest_hash_stamped_everywhere(self, tmp_path):
        run(
            tmp_path,
            "bands", "--graph", "builtin:lattice1", "--grid", "4",
            "--out", str(tmp_path / "b"),
        )
        manifest_text = (tmp_path / "b.manifest.json").read_text()
        import hashlib

        digest = hashlib.sha256(manifest_text.encode()).hexdigest()
        assert digest in (tmp_path / "b.csv").read_text()

    def test_manifest_excludes_threads(self, tmp_path):
        run(
            tmp_path,
            "bands", "--graph", "builtin:lattice1", "--grid", "4",
            "--out", str(tmp_path / "t1"), "--threads", "1",
        )
        run(
            tmp_path,
            "bands", "--graph", "builtin:lattice1", "--grid", "4",
            "--out", str(tmp_path / "t2"), "--threads", "3",
        )
        assert (tmp_path / "t1.manifest.json").read_text() == (
            tmp_path / "t2.manifest.json"
        ).read_text()


class TestLambdaSet:
    def test_cone_bitmap(self, tmp_path):
        run(
            tmp_path,
            "lambda-set", "--graph", "builtin:lattice2",
            "--perturbation", "builtin:cone",
            "--window", "0,3,0,3", "--out", str(tmp_path / "ls"),
        )
        lines = (tmp_path / "ls.csv").read_text().splitlines()
        assert lines[1] == "cell_1,cell_2,v1"
        grid = {}
        for line in lines[2:]:
            x, y, bit = line.split(",")
            grid[(int(x), int(y))] = int(bit)
        for (x, y), bit in grid.items():
            assert bit == (1 if x >= 1 and y >= 1 else 0)


class TestConditionP:
    def test_cone_center(self, tmp_path):
        run(
            tmp_path,
            "condition-p", "--graph", "builtin:lattice2",
            "--perturbation", "builtin:cone",
            "--n", "3", "--window", "0,20,0,20",
            "--out", str(tmp_path / "cp"),
        )
        payload = read_json(tmp_path / "cp.json")
        assert payload["center"] == {"cell": [4, 4], "label": 1}
        assert payload["box_lo"] == -3
        assert payload["box_hi"] == 3

    def test_seeded_random_pendant(self, tmp_path):
        run(
            tmp_path,
            "condition-p", "--graph", "builtin:lattice2",
            "--perturbation", "builtin:random_pendant,p=0.5,seed=7",
            "--n", "1", "--window", "0,60,0,60",
            "--out", str(tmp_path / "rp"),
        )
        payload = read_json(tmp_path / "rp.json")
        assert payload["center"] is not None
        assert payload["searched"] >= 1


class TestWeylCheck:
    def test_rows_and_slope(self, tmp_path):
        run(
            tmp_path,
            "weyl-check", "--graph", "builtin:lattice2",
            "--perturbation", "builtin:half_plane",
            "--lambda", "0.0", "--n-list", "2,4,8",
            "--out", str(tmp_path / "wc"),
        )
        lines = (tmp_path / "wc.csv").read_text().splitlines()
        assert lines[1] == "n,x_n,residual,sup_norm,bound"
        assert len(lines) == 2 + 3
        payload = read_json(tmp_path / "wc.json")
        assert payload["slope"] < 0
        for row in payload["rows"]:
            assert row["residual"] <= row["bound"]
            assert row["defect_sup"] == 0.0

    def test_thread_count_invariance(self, tmp_path):
        for label, threads in (("one", "1"), ("four", "4")):
            run(
                tmp_path,
                "weyl-check", "--graph", "builtin:lattice2",
                "--perturbation", "builtin:half_plane",
                "--lambda", "0.7", "--n-list", "2,4,8",
                "--out", str(tmp_path / label), "--threads", threads,
            )
        assert (tmp_path / "one.csv").read_bytes() == (
            tmp_path / "four.csv"
        ).read_bytes()
        assert (tmp_path / "one.json").read_bytes() == (
            tmp_path / "four.json"
        ).read_bytes()


class TestTruncateCommand:
    def test_counterexample_zero_modes(self, tmp_path):
        run(
            tmp_path,
            "truncate", "--graph", "builtin:g11",
            "--perturbation", "builtin:counterexample",
            "--box=-20,20", "--out", str(tmp_path / "ce"),
        )
        payload = read_json(tmp_path / "ce.json")
        assert payload["zero_modes"] >= 21
        assert payload["vertices"] == 103

    def test_wrapped_ring(self, tmp_path):
        run(
            tmp_path,
            "truncate", "--graph", "builtin:lattice1",
            "--box", "0,255", "--wrap", "--out", str(tmp_path / "ring"),
        )
        payload = read_json(tmp_path / "ring.json")
        assert payload["inside_fraction"] == 1.0
        lines = (tmp_path / "ring.csv").read_text().splitlines()
        assert len(lines) == 2 + 256


class TestRandomTrial:
    def test_estimate_close(self, tmp_path):
        run(
            tmp_path,
            "random-trial", "--p", "0.5", "--n", "1",
            "--trials", "200000", "--seed", "20240808",
            "--out", str(tmp_path / "mc"),
        )
        payload = read_json(tmp_path / "mc.json")
        assert abs(payload["z"]) <= 3.0
        assert payload["expected"] == pytest.approx(2.0**-9)

    def test_thread_invariance(self, tmp_path):
        for label, threads in (("s", "1"), ("p", "4")):
            run(
                tmp_path,
                "random-trial", "--p", "0.5", "--n", "1",
                "--trials", "200000", "--seed", "20240808",
                "--out", str(tmp_path / label), "--threads", threads,
            )
        assert (tmp_path / "s.json").read_bytes() == (tmp_path / "p.json").read_bytes()


class TestErrorPaths:
    def test_missing_file_is_parse_error(self, tmp_path):
        assert run(
            tmp_path,
            "sigma-ess", "--graph", str(tmp_path / "absent.json"), "--grid", "8",
        ) == 2

    def test_invalid_json_is_parse_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run(tmp_path, "sigma-ess", "--graph", str(bad), "--grid", "8") == 2

    def test_malformed_builtin_params(self, tmp_path):
        assert run(
            tmp_path,
            "condition-p", "--graph", "builtin:lattice2",
            "--perturbation", "builtin:random_pendant,p0.5",
            "--n", "1", "--window", "0,5,0,5",
        ) == 2

    def test_off_band_value_is_math_error(self, tmp_path):
        assert run(
            tmp_path,
            "weyl-check", "--graph", "builtin:g11",
            "--perturbation", "builtin:counterexample",
            "--lambda", "0.0", "--n-list", "2", "--window=-10,10",
        ) == 3

    def test_no_clear_box_is_math_error(self, tmp_path):
        assert run(
            tmp_path,
            "weyl-check", "--graph", "builtin:lattice2",
            "--perturbation", "builtin:half_plane",
            "--lambda", "0.0", "--n-list", "8", "--window", "0,2,0,2",
        ) == 3

    def test_wrong_window_arity(self, tmp_path):
        assert run(
            tmp_path,
            "condition-p", "--graph", "builtin:lattice2",
            "--perturbation", "builtin:cone",
            "--n", "1", "--window", "0,5",
        ) == 2

    def test_base_mismatch_rejected(self, tmp_path):
        assert run(
            tmp_path,
            "condition-p", "--graph", "builtin:lattice1",
            "--perturbation", "builtin:half_plane",
            "--n", "1", "--window", "0,5",
        ) == 2


class TestPerturbationFiles:
    def test_patch_file(self, tmp_path):
        source = tmp_path / "patch.json"
        source.write_text(
            json.dumps(
                {
                    "patch": {
                        "added_vertices": [[[0], 2]],
                        "added_edges": [[[[0], 1], [[0], 2]]],
                    }
                }
            )
        )
        code = run(
            tmp_path,
            "condition-p", "--graph", "builtin:lattice1",
            "--perturbation", str(source),
            "--n", "2", "--window=-20,20",
            "--out", str(tmp_path / "patchy"),
        )
        assert code == 0
        payload = read_json(tmp_path / "patchy.json")
        # a single extra pendant at 0: first clear box sits left of it
        assert payload["center"]["cell"] == [-20]

    def test_builtin_file_form(self, tmp_path):
        source = tmp_path / "pert.json"
        source.write_text(json.dumps({"builtin": "half_plane"}))
        code = run(
            tmp_path,
            "condition-p", "--graph", "builtin:lattice2",
            "--perturbation", str(source),
            "--n", "2", "--window", "0,10,0,10",
            "--out", str(tmp_path / "hp"),
        )
        assert code == 0
        assert read_json(tmp_path / "hp.json")["center"]["cell"] == [0, 3]


class TestCatalogCommand:
    def test_listing(self, capsys, tmp_path):
        assert run(tmp_path, "catalog") == 0
        out = capsys.readouterr().out
        assert "g11" in out
        assert "random_pendant" in out


class TestResolution:
    def test_env_var_thread_fallback(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PERIODIC_SPECTRA_THREADS", "2")
        code = run(
            tmp_path,
            "weyl-check", "--graph", "builtin:lattice2",
            "--perturbation", "builtin:half_plane",
            "--lambda", "0.0", "--n-list", "2,4",
            "--out", str(tmp_path / "env"),
        )
        assert code == 0
        monkeypatch.setenv("PERIODIC_SPECTRA_THREADS", "nope")
        assert run(
            tmp_path,
            "weyl-check", "--graph", "builtin:lattice2",
            "--perturbation", "builtin:half_plane",
            "--lambda", "0.0", "--n-list", "2",
            "--out", str(tmp_path / "env2"),
        ) == 2

    def test_perturbed_entry_as_graph(self, tmp_path):
        code = run(
            tmp_path,
            "weyl-check", "--graph", "builtin:half_plane",
            "--lambda", "0.0", "--n-list", "2,4",
            "--out", str(tmp_path / "entry"),
        )
        assert code == 0
        payload = read_json(tmp_path / "entry.json")
        assert len(payload["rows"]) == 2

    def test_random_pendant_entry_as_graph(self, tmp_path):
        code = run(
            tmp_path,
            "condition-p", "--graph", "builtin:random_pendant,p=0.25,seed=3",
            "--n", "1", "--window", "0,40,0,40",
            "--out", str(tmp_path / "rp_entry"),
        )
        assert code == 0
        assert read_json(tmp_path / "rp_entry.json")["center"] is not None


def test_graph_roundtrip(tmp_path):
    graph = make_g11().base
    spec = graph_to_spec(graph)
    assert spec["edges"] == [[1, 1, [-1]], [1, 2, [0]]]
    path = tmp_path / "g.json"
    write_graph_file(path, graph)
    assert load_graph_file(path) == graph

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import SIX
from fastpam.cli import main
from fastpam.datasets import read_csv
from fastpam.dissimilarity import build_matrix, load_matrix


@pytest.fixture
def six_csv(tmp_path):
    path = tmp_path / "six.csv"
    path.write_text("x\n" + "".join(f"{v}\n" for v in SIX))
    return path


def cluster(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main(["cluster", *map(str, argv), "--output", str(out)])
    assert code == 0
    return json.loads(out.read_text())


def test_six_point_pam(six_csv, tmp_path):
    res = cluster([six_csv, "--k", 2, "--init", "build", "--engine", "pam",
                   "--metric", "manhattan"], tmp_path)
    assert sorted(SIX[i] for i in res["medoids"]) == [1.0, 7.0]
    assert res["td"] == 4.0
    assert res["assignment"] == [1, 1, 1, 4, 4, 4]
    assert res["config"]["rng"] and res["config"]["backend"]
    assert "lookups" not in res["stats"]


def test_pam_and_fastpam1_fields_identical(six_csv, tmp_path):
    base = [six_csv, "--k", 2, "--init", "build", "--metric", "manhattan"]
    a = cluster(base + ["--engine", "pam"], tmp_path, "a.json")
    b = cluster(base + ["--engine", "fastpam1"], tmp_path, "b.json")
    for key in ("medoids", "td", "assignment"):
        assert json.dumps(a[key]) == json.dumps(b[key])


def test_k_equals_n_and_too_large(six_csv, tmp_path, capsys):
    res = cluster([six_csv, "--k", 6], tmp_path)
    assert res["td"] == 0.0 and res["medoids"] == list(range(6))
    assert main(["cluster", str(six_csv), "--k", "7"]) == 2
    assert "k=7" in capsys.readouterr().err


def test_usage_errors_exit_2(six_csv):
    with pytest.raises(SystemExit) as err:
        main(["cluster", str(six_csv)])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main(["cluster", str(six_csv), "--k", "2", "--engine", "kmeans"])
    assert err.value.code == 2


def test_ragged_csv_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n3,4\n5\n")
    assert main(["cluster", str(path), "--k", "2"]) == 1
    assert "line 4" in capsys.readouterr().err
    assert main(["cluster", str(tmp_path / "missing.csv"), "--k", "2"]) == 1


def test_precomputed_and_count_lookups(tmp_path):
    path = tmp_path / "six.tri"
    assert main(["convert-matrix", "--metric", "manhattan", "--output", str(path),
                 str(tmp_path / "six.csv")]) == 1
    (tmp_path / "six.csv").write_text("".join(f"{v}\n" for v in SIX))
    assert main(["convert-matrix", "--metric", "manhattan", "--output", str(path),
                 str(tmp_path / "six.csv")]) == 0
    res = cluster([path, "--precomputed", "--k", 2, "--engine", "fastpam2",
                   "--count-lookups"], tmp_path)
    assert res["td"] == 4.0 and res["stats"]["lookups"] > 0


def test_trace_output(six_csv, tmp_path):
    trace = tmp_path / "trace.csv"
    cluster([six_csv, "--k", 2, "--engine", "pam", "--init", "random", "--seed", 3,
             "--metric", "manhattan", "--trace", trace], tmp_path)
    rows = list(csv.DictReader(trace.open()))
    assert trace.read_text().startswith("iteration,slot,out_index,in_index,delta_td")
    assert all(float(r["delta_td"]) < 0 for r in rows)


@pytest.mark.parametrize("engine", ["clara", "fastclara", "clarans", "fastclarans", "parkjun"])
def test_meta_engines_via_cli(tmp_path, engine):
    data = tmp_path / "mix.csv"
    assert main(["generate", "--n", "150", "--clusters", "3", "--seed", "1",
                 "--output", str(data)]) == 0
    res = cluster([data, "--k", 3, "--engine", engine, "--seed", 2], tmp_path)
    assert len(set(res["medoids"])) == 3 and res["td"] > 0
    assert res["stats"]["iterations"] >= 1


def test_matrix_free_clarans_counts_distances(tmp_path):
    data = tmp_path / "mix.csv"
    main(["generate", "--n", "200", "--clusters", "4", "--output", str(data)])
    res = cluster([data, "--k", 4, "--engine", "fastclarans", "--matrix-free"], tmp_path)
    assert res["stats"]["distance_evals"] > 0
    assert len(res["assignment"]) == 200


def test_generate_reproducible_and_sized(tmp_path):
    a, b, labels = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "labels.txt"
    args = ["generate", "--n", "137", "--clusters", "4", "--d", "3", "--seed", "9"]
    assert main(args + ["--output", str(a), "--labels-output", str(labels)]) == 0
    assert main(args + ["--output", str(b)]) == 0
    assert a.read_text() == b.read_text()
    assert a.read_text().startswith("# gaussian-mixture n=137")
    assert read_csv(a.read_text()).shape == (137, 3)
    assert len(np.loadtxt(labels)) == 137
    assert main(["generate", "--n", "0"]) == 2
    assert main(["generate", "--n", "10", "--d", "-1"]) == 2


def test_pam_recovers_true_clusters(tmp_path):
    hits = 0
    for seed in range(20):
        data, labels = tmp_path / f"d{seed}.csv", tmp_path / f"l{seed}.txt"
        main(["generate", "--n", "300", "--clusters", "5", "--seed", str(seed),
              "--output", str(data), "--labels-output", str(labels)])
        res = cluster([data, "--k", 5, "--engine", "pam"], tmp_path)
        truth = np.loadtxt(labels, dtype=int)
        hits += len(set(truth[res["medoids"]].tolist())) == 5
    assert hits >= 18


def test_convert_matrix_round_trip(tmp_path):
    data = np.random.default_rng(0).normal(size=(15, 2))
    src = tmp_path / "v.csv"
    src.write_text("".join(f"{float(x)!r},{float(y)!r}\n" for x, y in data))
    out = tmp_path / "m.tri"
    assert main(["convert-matrix", str(src), "--output", str(out)]) == 0
    back = load_matrix(out.read_text())
    assert back.values.tobytes() == build_matrix(data).values.tobytes()


def write_spec(path, **overrides):
    spec = {
        "dataset": {"generator": "gaussian-mixture", "n": 80, "clusters": 4, "seed": 3},
        "algorithms": [{"engine": "fastpam1"}],
        "k_values": [2, 3, 4],
        "repeats": 25,
    }
    spec.update(overrides)
    path.write_text(json.dumps(spec))
    return path


def read_records(path):
    return list(csv.DictReader((path / "records.csv").open()))


def test_bench_counts_and_determinism(tmp_path):
    spec = write_spec(tmp_path / "spec.json",
                      algorithms=[{"engine": "fastpam1", "init": "random"}])
    assert main(["bench", str(spec), str(tmp_path / "r1")]) == 0
    assert main(["bench", str(spec), str(tmp_path / "r2")]) == 0
    r1, r2 = read_records(tmp_path / "r1"), read_records(tmp_path / "r2")
    assert len(r1) == 75
    assert [r["final_td"] for r in r1] == [r["final_td"] for r in r2]
    assert [(r["k"], r["repeat"], r["seed"]) for r in r1][:3] == [("2", "0", "0"),
                                                                  ("2", "1", "1"),
                                                                  ("2", "2", "2")]
    assert all(float(r["wall_time_ms"]) > 0 for r in r1)
    meta = json.loads((tmp_path / "r1" / "meta.json").read_text())
    assert meta["records"] == 75 and meta["failures"] == 0 and meta["rng"]


def test_bench_speedup_column(tmp_path):
    spec = write_spec(tmp_path / "spec.json", repeats=2, k_values=[3, 5],
                      algorithms=[{"engine": "pam"}, {"engine": "fastpam1"}])
    assert main(["bench", str(spec), str(tmp_path / "out")]) == 0
    records = read_records(tmp_path / "out")
    summary = list(csv.DictReader((tmp_path / "out" / "summary.csv").open()))
    assert len(summary) == 4
    for row in summary:
        own = [float(r["inner_updates"]) for r in records
               if r["combo"] == row["combo"] and r["k"] == row["k"]]
        pam = [float(r["inner_updates"]) for r in records
               if r["combo"] == "build+pam" and r["k"] == row["k"]]
        assert float(row["speedup_vs_baseline"]) == pytest.approx(np.mean(pam) / np.mean(own))
        assert float(row["final_td_min"]) <= float(row["final_td_mean"]) <= float(row["final_td_max"])
    fast = [r for r in summary if r["combo"] == "build+fastpam1"]
    assert all(float(r["speedup_vs_baseline"]) > 1 for r in fast)


def test_bench_failed_combo_continues(tmp_path):
    # reynolds needs k >= 2; k=1 fails for that combo only
    spec = write_spec(tmp_path / "spec.json", repeats=2, k_values=[1],
                      algorithms=[{"engine": "reynolds", "id": "bad"},
                                  {"engine": "fastpam2", "id": "good"}])
    assert main(["bench", str(spec), str(tmp_path / "out")]) == 1
    records = read_records(tmp_path / "out")
    assert [r["status"].split(":")[0] for r in records] == ["failed", "failed", "ok", "ok"]
    assert records[2]["final_td"] != ""


def test_bench_rejects_bad_spec(tmp_path):
    spec = write_spec(tmp_path / "spec.json", repeats=0)
    assert main(["bench", str(spec), str(tmp_path / "out")]) == 2
    spec = write_spec(tmp_path / "spec.json", algorithms=[{"engine": "kmeans"}])
    assert main(["bench", str(spec), str(tmp_path / "out")]) == 2


def test_module_entry_point(six_csv):
    proc = subprocess.run(
        [sys.executable, "-m", "fastpam", "cluster", str(six_csv), "--k", "2",
         "--metric", "manhattan", "--engine", "pam"],
        capture_output=True, text=True, check=True,
    )
    assert json.loads(proc.stdout)["td"] == 4.0

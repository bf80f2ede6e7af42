import json

import pytest

from noisysis.cli import main
from noisysis.experiments import read_csv
from noisysis.graph import path_graph, read_graph, write_graph


@pytest.fixture
def path3(tmp_path):
    p = tmp_path / "p3.graph"
    write_graph(path_graph(3), p)
    return str(p)


def test_gen_graph_files(tmp_path):
    out = str(tmp_path / "er")
    assert main(["gen-graph", "--family", "er", "--n", "30", "--p", "0.2", "--seed", "4", "--out", out]) == 0
    g = read_graph(out + ".graph")
    assert g.n == 30
    side = json.loads(open(out + ".json").read())
    assert side["generator"]["p"] == 0.2
    out2 = str(tmp_path / "gw")
    assert main(["gen-graph", "--family", "gw-poisson", "--n", "50", "--out", out2]) == 0
    assert "gw_meta" in json.loads(open(out2 + ".json").read())


def test_gen_graph_deterministic(tmp_path, capsys):
    main(["gen-graph", "--family", "regular", "--n", "10", "--d", "3", "--seed", "2"])
    first = capsys.readouterr().out
    main(["gen-graph", "--family", "regular", "--n", "10", "--d", "3", "--seed", "2"])
    assert capsys.readouterr().out == first
    assert first.startswith("nsis-graph v1 n=10\n")


def test_simulate(path3, tmp_path):
    out = tmp_path / "sim.csv"
    rc = main(["simulate", "--graph", path3, "--a", "0.5", "--lambda", "0.1", "--kappa", "0.3",
               "--steps", "100", "--stride", "10", "--seed", "1", "--out", str(out)])
    assert rc == 0
    header, cols, rows = read_csv(out.read_text())
    assert cols == ["t", "infected_count"]
    assert [int(r[0]) for r in rows] == list(range(0, 101, 10))
    assert header["seed"] == "1"


def test_simulate_supercritical_is_usage_error(path3):
    rc = main(["simulate", "--graph", path3, "--a", "0.9", "--lambda", "0.1", "--kappa", "0.3",
               "--steps", "10"])
    assert rc == 2


def test_couple(path3, tmp_path):
    out = tmp_path / "c.csv"
    rc = main(["couple", "--graph", path3, "--a", "0.99", "--lambda", "0.001", "--kappa", "0.05",
               "--kind", "common", "--replicas", "200", "--tmax", "30", "--out", str(out)])
    assert rc == 0
    _, cols, rows = read_csv(out.read_text())
    assert cols == ["t", "survival", "stderr"]
    assert float(rows[0][1]) == 1.0


def test_exact(path3, tmp_path):
    prefix = str(tmp_path / "ex")
    rc = main(["exact", "--graph", path3, "--a", "0.99", "--lambda", "0.001", "--kappa", "0.05",
               "--coupled", "paper", "--tmax", "40", "--out", prefix])
    assert rc == 0
    checks = json.loads(open(prefix + ".checks.json").read())
    assert checks["pass"] and checks["contraction"]["pass"] and checks["bounds"]["upper_pass"]
    _, cols, rows = read_csv(open(prefix + ".profile.csv").read())
    assert cols == ["t", "d", "dbar"] and len(rows) == 41


def test_regimes(tmp_path, capsys):
    assert main(["regimes", "--n-grid", "10", "--alpha-grid", "2,3"]) == 0
    _, cols, rows = read_csv(capsys.readouterr().out)
    assert [r[cols.index("feasible")] for r in rows] == ["false", "true"]
    assert rows[1][cols.index("kappa")] == "0.002"


def test_verify(tmp_path):
    assert main(["verify", "--n", "2", "--tmax", "50", "--out", str(tmp_path / "v")]) == 0


def test_scaling_cli(tmp_path):
    prefix = str(tmp_path / "s")
    assert main(["scaling", "--n-grid", "10,20", "--replicas", "100", "--out", prefix]) == 0
    header, cols, rows = read_csv(open(prefix + ".csv").read())
    assert "recipe" in header and len(rows) == 2
    assert json.loads(open(prefix + ".json").read())["pass"] is True


def test_concentration_cli(tmp_path):
    out = str(tmp_path / "deg")
    assert main(["concentration", "--kind", "degree", "--n", "400", "--p", "0.1",
                 "--graphs", "10", "--deltas", "0.5", "--out", out]) == 0
    assert main(["concentration", "--kind", "selfloop", "--n", "100", "--d", "3",
                 "--graphs", "200", "--out", out]) in (0, 1)
    assert main(["concentration", "--kind", "degree", "--n", "100", "--p", "0.05"]) == 2


def test_usage_errors():
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--graph", "x"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["nope"])
    assert exc.value.code == 2


def test_missing_file_is_usage_error(tmp_path):
    assert main(["simulate", "--graph", str(tmp_path / "none"), "--a", "0.5", "--lambda", "0",
                 "--kappa", "0.3", "--steps", "5"]) == 2

import csv
import json

import numpy as np
import pytest

from bipartite.cli import CSV_COLUMNS, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, cli_main
from bipartite.errors import NoConvergence
from bipartite.sppt import SeparableEnsemble
from bipartite.states import load_state, maximally_mixed, save_state


def run(capsys, *argv):
    code = cli_main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_circulant_identity_all_yes(tmp_path, capsys):
    f = tmp_path / "c.json"
    assert run(capsys, "gen", "circulant", "--a11", ".25", "--a22", ".25", "--b11", ".25", "--b22", ".25", "-o", f)[0] == 0
    assert np.allclose(load_state(f).rho, np.eye(4) / 4)
    code, out, _ = run(capsys, "classify", f, "--json")
    assert code == EXIT_OK
    assert set(json.loads(out)["flags"].values()) == {"yes"}


def test_pure_schmidt_min(tmp_path, capsys):
    f = tmp_path / "p.json"
    run(capsys, "gen", "pure-schmidt", "--l", "0.7071,0.7071", "-o", f)
    code, out, _ = run(capsys, "measure", f, "--min-a")
    assert code == 0
    assert float(out.split("=")[1].split()[0]) == pytest.approx(0.5, abs=1e-12)


def test_decompose_ssppt(tmp_path, capsys):
    f, e = tmp_path / "s.json", tmp_path / "e.json"
    run(capsys, "gen", "ssppt-random", "--dim-a", "3", "--dim-b", "2", "--seed", "7", "-o", f)
    code, out, _ = run(capsys, "decompose", f, "-o", e)
    assert code == 0
    assert float(out.split("residual")[1]) < 1e-8
    ens = SeparableEnsemble.from_json(e.read_text())
    assert np.linalg.norm(ens.reconstruct() - load_state(f).rho) < 1e-8


def test_decompose_entangled_is_rejected(tmp_path, capsys):
    f = tmp_path / "b.json"
    run(capsys, "gen", "pure-schmidt", "--l", "0.8,0.6", "-o", f)
    code, _, err = run(capsys, "decompose", f, "-o", tmp_path / "e.json")
    assert code == EXIT_VALIDATION and "NotSSPPT" in err


def test_numerical_failure_exit_code(tmp_path, capsys, monkeypatch):
    import bipartite.cli as cli

    def boom(*a, **k):
        raise NoConvergence("sweep limit reached")

    monkeypatch.setattr(cli, "classify", boom)
    f = tmp_path / "m.json"
    save_state(maximally_mixed(2, 2), f)
    code, out, err = run(capsys, "classify", f)
    assert code == EXIT_NUMERICAL and "NoConvergence" in err and out == ""


@pytest.mark.parametrize("family", ["product", "cq", "qc", "random", "ssppt-random", "example3"])
def test_gen_families(family, tmp_path, capsys):
    f = tmp_path / "x.json"
    assert run(capsys, "gen", family, "--dim-a", 2, "--dim-b", 3, "-o", f)[0] == 0
    s = load_state(f)
    assert abs(np.trace(s.rho) - 1) < 1e-12


def test_gen_example1(tmp_path, capsys):
    f = tmp_path / "x.json"
    code, _, _ = run(capsys, "gen", "example1", "--rho11", "[[1,0],[0,1]]", "--dmat", "[[0.5,0],[0,0.2]]", "--t", "[[0,0],[0,0]]", "-o", f)
    assert code == 0 and load_state(f).dim_a == 2


def test_gen_to_stdout(capsys):
    code, out, _ = run(capsys, "gen", "product", "--seed", 1)
    assert code == 0 and json.loads(out)["dim_a"] == 2


def test_classify_text(tmp_path, capsys):
    f = tmp_path / "w.json"
    save_state(maximally_mixed(2, 2), f)
    code, out, _ = run(capsys, "classify", f, "--measures")
    assert code == 0 and "separability=Separable" in out and "gmqd_a" in out


def test_json_round_trip(tmp_path, capsys):
    f = tmp_path / "r.json"
    run(capsys, "gen", "random", "--dim-a", 2, "--dim-b", 3, "--seed", 4, "-o", f)
    _, first, _ = run(capsys, "classify", f, "--json")
    save_state(load_state(f), f)
    _, second, _ = run(capsys, "classify", f, "--json")
    assert first == second


def test_batch(tmp_path, capsys):
    d = tmp_path / "states"
    d.mkdir()
    for i, fam in enumerate(["product", "random", "cq"]):
        run(capsys, "gen", fam, "--seed", i, "-o", d / f"{i}_{fam}.json")
    report = tmp_path / "r.csv"
    code, _, _ = run(capsys, "batch", d, "--report", report)
    assert code == 0
    rows = list(csv.reader(report.open()))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert [r[0] for r in rows[1:]] == ["0_product.json", "1_random.json", "2_cq.json"]
    assert all(r[3] in ("yes", "no", "marginal") for r in rows[1:])


def test_batch_bad_file(tmp_path, capsys):
    d = tmp_path / "states"
    d.mkdir()
    (d / "bad.json").write_text(json.dumps({"dim_a": 2, "dim_b": 2, "matrix": [[[1, 0]]]}))
    code, _, err = run(capsys, "batch", d, "--report", tmp_path / "r.csv")
    assert code == EXIT_VALIDATION and "bad.json" in err


def test_validation_errors(tmp_path, capsys):
    assert run(capsys, "classify", tmp_path / "missing.json")[0] == EXIT_VALIDATION
    f = tmp_path / "bad.json"
    f.write_text("{not json")
    assert run(capsys, "classify", f)[0] == EXIT_VALIDATION
    code, _, err = run(capsys, "gen", "pure-schmidt", "--l", "0.5,0.5")
    assert code == EXIT_VALIDATION and "BadNormalization" in err
    f2 = tmp_path / "ok.json"
    save_state(maximally_mixed(2, 2), f2)
    assert run(capsys, "measure", f2)[0] == EXIT_VALIDATION


def test_unsupported_dimension_is_validation(tmp_path, capsys):
    f = tmp_path / "big.json"
    run(capsys, "gen", "random", "--dim-a", 4, "--dim-b", 2, "-o", f)
    code, _, err = run(capsys, "measure", f, "--discord-a")
    assert code == EXIT_VALIDATION and "UnsupportedDimension" in err

import json

import numpy as np
import pytest

from ggmgof import (
    band_edge_set,
    dn_statistic,
    fit_constrained_precision,
    invert_to_covariance,
    load_edge_set,
    load_matrix_csv,
    sample_covariance,
    sample_mvn,
    save_edge_set,
)
from ggmgof.cli import main
from ggmgof.covid import CANONICAL_STATES
from conftest import write_synthetic_nyt


@pytest.fixture
def workspace(tmp_path):
    """Generated matrix, support edges, and a sampled dataset."""
    prefix = tmp_path / "om"
    assert main([
        "gen", "--family", "exp-band", "--p", "25", "--s0", "4",
        "--base", "0.6", "--output", str(prefix),
    ]) == 0
    omega = load_matrix_csv(f"{prefix}.csv")
    X = sample_mvn(invert_to_covariance(omega), 200, 99)
    data = tmp_path / "data.csv"
    np.savetxt(data, X, delimiter=",")
    return tmp_path, prefix, X


class TestGen:
    def test_writes_matrix_support_and_provenance(self, workspace):
        tmp_path, prefix, _ = workspace
        omega = load_matrix_csv(f"{prefix}.csv")
        assert omega.shape == (25, 25)
        assert omega[0, 1] == pytest.approx(0.6)
        edges = load_edge_set(f"{prefix}.edges.json")
        assert edges.edges == band_edge_set(25, 4).edges
        meta = json.loads((tmp_path / "om.csv.meta.json").read_text())
        assert meta["family"] == "exp-band"
        assert meta["base"] == 0.6

    def test_factor_family(self, tmp_path, capsys):
        prefix = tmp_path / "f"
        code = main([
            "gen", "--family", "factor", "--p", "10",
            "--u", "1,1,1", "--output", str(prefix),
        ])
        assert code == 0
        omega = load_matrix_csv(f"{prefix}.csv")
        assert omega[0, 0] == 2.0
        assert omega[0, 1] == 1.0

    def test_invalid_base_exits_2_naming_constraint(self, tmp_path, capsys):
        code = main([
            "gen", "--family", "exp-band", "--p", "10", "--s0", "3",
            "--base", "1.5", "--output", str(tmp_path / "bad"),
        ])
        assert code == 2
        assert "base must be in (0, 1)" in capsys.readouterr().err

    def test_not_positive_definite_exits_3(self, tmp_path, capsys):
        code = main([
            "gen", "--family", "exp-band", "--p", "8", "--s0", "2",
            "--base", "0.6", "--output", str(tmp_path / "bad"),
        ])
        assert code == 3
        assert "positive definite" in capsys.readouterr().err

    def test_missing_output_prefix(self, capsys):
        assert main(["gen", "--family", "identity", "--p", "4"]) == 2


class TestTest:
    def test_json_report_matches_library(self, workspace, capsys):
        tmp_path, prefix, X = workspace
        code = main([
            "test", str(tmp_path / "data.csv"), f"{prefix}.edges.json",
            "--gamma", "1",
        ])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        expected = dn_statistic(X, band_edge_set(25, 4), gamma=1.0)
        assert payload["statistic"] == pytest.approx(expected.statistic, rel=1e-12)
        assert payload["p_value"] == pytest.approx(expected.p_value, rel=1e-12)
        assert payload["decision"] in ("reject", "fail-to-reject")
        assert payload["gamma"] == 1.0

    def test_node_variant(self, workspace, capsys):
        tmp_path, prefix, _ = workspace
        code = main([
            "test", str(tmp_path / "data.csv"), f"{prefix}.edges.json",
            "--variant", "node", "--node", "3",
        ])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["variant"] == "node-local"
        assert payload["node"] == 3

    def test_empowered_variant(self, workspace, capsys):
        tmp_path, prefix, _ = workspace
        code = main([
            "test", str(tmp_path / "data.csv"), f"{prefix}.edges.json",
            "--variant", "empowered", "--cn", "0.05",
        ])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["variant"] == "empowered"
        assert "flagged_entries" in payload

    def test_dimension_mismatch_exits_2(self, workspace, tmp_path, capsys):
        _, prefix, _ = workspace
        other = tmp_path / "narrow.csv"
        np.savetxt(other, np.random.default_rng(0).normal(size=(30, 7)), delimiter=",")
        code = main(["test", str(other), f"{prefix}.edges.json"])
        assert code == 2
        assert "columns" in capsys.readouterr().err

    def test_estimator_failure_exits_3_with_column(self, workspace, tmp_path, capsys):
        _, prefix, _ = workspace
        tiny = tmp_path / "tiny.csv"
        np.savetxt(tiny, np.random.default_rng(0).normal(size=(5, 25)), delimiter=",")
        code = main(["test", str(tiny), f"{prefix}.edges.json"])
        assert code == 3
        assert "column" in capsys.readouterr().err

    def test_output_file(self, workspace, tmp_path):
        _, prefix, _ = workspace
        out = tmp_path / "report.json"
        code = main([
            "test", str(tmp_path / "data.csv"), f"{prefix}.edges.json",
            "--output", str(out),
        ])
        assert code == 0
        assert json.loads(out.read_text())["variant"] == "plain"

    def test_rejects_correlated_data_under_diagonal_hypothesis(self, tmp_path, capsys):
        # strong dependence vs an independence hypothesis: must reject
        from ggmgof import banded_exponential_precision, isolated_edge_set

        omega = banded_exponential_precision(30, 4, 0.6)
        X = sample_mvn(invert_to_covariance(omega), 1000, 5)
        data = tmp_path / "d.csv"
        np.savetxt(data, X, delimiter=",")
        save_edge_set(isolated_edge_set(30), tmp_path / "iso.json")
        assert main(["test", str(data), str(tmp_path / "iso.json")]) == 0
        assert json.loads(capsys.readouterr().out)["decision"] == "reject"


class TestSimulate:
    def test_csv_output(self, tmp_path, capsys):
        spec = {
            "truth": {"family": "exponential", "p": 25, "s0": 4, "base": 0.6},
            "hypothesis": {"kind": "isolated"},
            "n": 100,
            "replications": 8,
            "seed": 3,
        }
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(spec))
        assert main(["simulate", str(path), "--threads", "1"]) == 0
        out = capsys.readouterr().out.strip().split("\n")
        assert out[0].startswith("family,")
        assert out[1].split(",")[8] == "1"  # full rejection of independence

    def test_both_variants_two_rows(self, tmp_path, capsys):
        spec = {
            "truth": {"family": "exponential", "p": 20, "s0": 3, "base": 0.5},
            "hypothesis": {"kind": "truth-support"},
            "n": 80,
            "replications": 5,
            "variant": "both",
            "seed": 1,
        }
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(spec))
        assert main(["simulate", str(path), "--threads", "1"]) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert len(lines) == 3
        assert lines[1].split(",")[5] == "plain"
        assert lines[2].split(",")[5] == "empowered"

    def test_seed_override_changes_stream(self, tmp_path, capsys):
        spec = {
            "truth": {"family": "exponential", "p": 25, "s0": 4, "base": 0.6},
            "hypothesis": {"kind": "truth-support"},
            "n": 100,
            "replications": 10,
            "seed": 3,
        }
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(spec))
        main(["simulate", str(path), "--threads", "1", "--format", "json"])
        first = json.loads(capsys.readouterr().out)
        main(["simulate", str(path), "--threads", "1", "--format", "json", "--seed", "3"])
        same = json.loads(capsys.readouterr().out)
        assert first == same

    def test_bad_spec_exits_2(self, tmp_path, capsys):
        path = tmp_path / "spec.json"
        path.write_text(json.dumps({"truth": {}, "hypothesis": {}}))
        assert main(["simulate", str(path)]) == 2

    def test_infeasible_spec_exits_3(self, tmp_path, capsys):
        spec = {
            "truth": {"family": "exponential", "p": 12, "s0": 4, "base": 0.6},
            "hypothesis": {"kind": "truth-support"},
            "n": 6,
            "replications": 2,
            "seed": 0,
        }
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(spec))
        assert main(["simulate", str(path), "--threads", "1"]) == 3
        assert "replication 0" in capsys.readouterr().err


class TestCovidPrepAndGee:
    def test_pipeline(self, tmp_path, capsys):
        import datetime as dt

        from ggmgof import banded_exponential_precision, sample_mvn as draw

        # weekly targets with banded dependence across weeks, so the
        # banded working-precision fit downstream is well conditioned
        sigma_w = invert_to_covariance(banded_exponential_precision(52, 3, 0.5))
        eps = draw(sigma_w, 51, 314)
        weekly = np.maximum(8000.0 + 2000.0 * eps, 500.0)
        daily_targets = np.rint(weekly / 7.0).astype(int)

        nyt = tmp_path / "nyt.csv"
        write_synthetic_nyt(
            nyt,
            CANONICAL_STATES,
            start=dt.date(2021, 1, 1),
            days=364,
            daily=lambda idx, off: int(daily_targets[idx, off // 7]),
        )
        prefix = tmp_path / "cv"
        assert main(["covid-prep", str(nyt), "--output", str(prefix)]) == 0
        capsys.readouterr()
        panel = np.loadtxt(f"{prefix}.panel.csv", delimiter=",")
        assert panel.shape == (51, 52)
        covariates = np.loadtxt(f"{prefix}.covariates.csv", delimiter=",")
        np.testing.assert_array_equal(covariates.sum(axis=0), [9, 12, 13])

        # working precision from the constrained fit under a band structure
        fit = fit_constrained_precision(
            sample_covariance(panel), band_edge_set(52, 3), panel.shape[0]
        )
        W = fit.symmetrized()
        wpath = tmp_path / "W.csv"
        np.savetxt(wpath, W, delimiter=",")
        code = main([
            "gee", f"{prefix}.panel.csv", f"{prefix}.covariates.csv", str(wpath),
            "--bootstrap", "40x10", "--seed", "7",
        ])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert len(payload["beta"]) == 4
        assert len(payload["bootstrap"]["ave"]) == 4
        assert payload["bootstrap"]["repeats"] == 10

    def test_gee_bad_bootstrap_format(self, tmp_path, capsys):
        a = tmp_path / "a.csv"
        np.savetxt(a, np.random.default_rng(0).normal(size=(6, 4)), delimiter=",")
        b = tmp_path / "b.csv"
        np.savetxt(b, np.random.default_rng(1).integers(0, 2, size=(6, 2)), delimiter=",")
        w = tmp_path / "w.csv"
        np.savetxt(w, np.eye(4), delimiter=",")
        code = main(["gee", str(a), str(b), str(w), "--bootstrap", "nope"])
        assert code == 2
        assert "SIZExREPEATS" in capsys.readouterr().err

    def test_malformed_nyt_exits_2(self, tmp_path, capsys):
        nyt = tmp_path / "nyt.csv"
        nyt.write_text("date,state,fips,cases,deaths\n2021-01-01,Ohio,39,xyz,0\n")
        assert main(["covid-prep", str(nyt), "--output", str(tmp_path / "cv")]) == 2

    def test_missing_file_exits_2(self, tmp_path, capsys):
        assert main(["test", str(tmp_path / "no.csv"), str(tmp_path / "no.json")]) == 2


class TestLibraryCliIdentity:
    def test_same_statistic_via_both_paths(self, workspace, capsys):
        tmp_path, prefix, X = workspace
        main(["test", str(tmp_path / "data.csv"), f"{prefix}.edges.json"])
        payload = json.loads(capsys.readouterr().out)
        # the CSV round trip is limited by the %.17g writer, which is exact
        # for doubles, so the statistic matches bit for bit
        library = dn_statistic(
            load_matrix_csv(tmp_path / "data.csv"), band_edge_set(25, 4)
        )
        assert payload["statistic"] == library.statistic

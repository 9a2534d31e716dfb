import json

import pytest

import ssr_cli
from ssr_core.data_io import read_json, read_povm, weighted_states_from_dict


def run(capsys, *argv):
    code = ssr_cli.main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


class TestMeasures:
    def test_biased_pair(self, capsys):
        code, doc = run_json(capsys, "measures", "--state", "biased_pair")
        assert code == 0
        assert doc["schema"] == 1
        assert doc["eoe"] == pytest.approx(0.650022421648, abs=1e-9)
        assert doc["siv"] == pytest.approx(5 / 9, abs=1e-12)
        assert doc["siv_bob"] == pytest.approx(doc["siv"])
        assert doc["p_n"]["1"] == pytest.approx(5 / 6)

    def test_byte_identical(self, capsys):
        _, a = run(capsys, "measures", "--state", "biased_pair")
        _, b = run(capsys, "measures", "--state", "biased_pair")
        assert a == b
        assert a.endswith("}\n")

    def test_missing_file(self, capsys):
        code, doc = run_json(capsys, "measures", "--state", "nowhere.json")
        assert code == 1
        assert doc["error"] == "invalid_state"

    def test_non_numeric_fields(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"schema": 1, "n_total": "one", "alice_dims": [1, 1], "bob_dims": [1, 1], '
                       '"blocks": [{"n_alice": 0, "amplitudes": [[[1.0, 0.0]]]}]}', encoding="utf-8")
        code, doc = run_json(capsys, "measures", "--state", str(bad))
        assert code == 1
        assert doc["error"] == "invalid_state"

        rho = tmp_path / "rho.json"
        rho.write_text('{"schema": 1, "alice_dims": [1, 1], "bob_dims": [1, 1], '
                       '"sectors": [{"n_total": 1, "weight": "half", "matrix": [[[1.0, 0.0]]]}]}',
                       encoding="utf-8")
        code, doc = run_json(capsys, "formation", "--rho", str(rho))
        assert code == 1
        assert doc["error"] == "invalid_state"


class TestUsage:
    def test_no_command(self, capsys):
        assert ssr_cli.main([]) == 2

    def test_bad_choice(self, capsys):
        assert ssr_cli.main(["dilute", "--p0", "0.3", "--copies", "8", "--count-rule", "mean"]) == 2

    def test_bad_range(self, capsys):
        assert ssr_cli.main(["teleport-scaling", "--n", "a..b"]) == 2

    def test_help(self, capsys):
        assert ssr_cli.main(["--help"]) == 0
        assert "teleport-scaling" in capsys.readouterr().out

    def test_domain_error(self, capsys):
        code, doc = run_json(capsys, "distill", "--p0", "1.5", "--copies", "8")
        assert code == 1
        assert doc == {"schema": 1, "error": "domain_error", "detail": doc["detail"]}

    def test_missing_config_warns(self, capsys, tmp_path):
        code = ssr_cli.main(["--config", str(tmp_path / "none.json"), "measures", "--state", "biased_pair"])
        captured = capsys.readouterr()
        assert code == 0
        assert "not found" in captured.err
        assert json.loads(captured.out)["eoe"] > 0


class TestConversion:
    def test_convert_check(self, capsys):
        code, doc = run_json(capsys, "convert-check", "--source", "phi_plus", "--targets", "biased_pair")
        assert code == 0
        assert doc["convertible"] is False
        assert [r["n"] for r in doc["sectors"]] == [0, 1]

    def test_protocol_writes_povm(self, capsys, tmp_path):
        out = tmp_path / "povm.json"
        code, doc = run_json(capsys, "protocol", "--source", "phi_plus", "--target", "phi_minus",
                             "--out", str(out))
        assert code == 0
        assert doc["completeness_residual"] < 1e-9
        assert doc["povm"] == str(out)
        assert read_povm(out).completeness_residual() < 1e-9

    def test_protocol_refused(self, capsys):
        code, doc = run_json(capsys, "protocol", "--source", "biased_pair", "--target", "phi_plus")
        assert code == 1
        assert doc["error"] == "not_convertible"

    def test_povm_monotone_harness(self, capsys):
        code, doc = run_json(capsys, "povm-monotone", "--trials", "20", "--seed", "3")
        assert code == 0
        assert doc["trials"] == 20
        assert doc["all_ok"] is True

    def test_povm_monotone_needs_both(self, capsys):
        code, doc = run_json(capsys, "povm-monotone", "--state", "biased_pair")
        assert code == 1
        assert doc["error"] == "domain_error"

    def test_hiding(self, capsys):
        code, doc = run_json(capsys, "hiding", "--a", "phi_plus", "--b", "phi_minus", "--trials", "50")
        assert code == 0
        assert doc["distance"] <= 1e-10
        assert doc["ssr"] is True


class TestAsymptotics:
    def test_distill(self, capsys):
        code, doc = run_json(capsys, "distill", "--p0", "0.3333333333333333", "--copies", "256")
        assert code == 0
        assert doc["convertible"] is True
        assert doc["rate"] <= doc["entropy"]
        assert doc["remainder_eoe"] <= doc["remainder_bound"] + 1e-9

    def test_distill_csv(self, capsys):
        code, out = run(capsys, "distill", "--p0", "0.5", "--copies", "4", "--csv")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "n,c_n,log2_count"
        assert len(lines) == 6

    def test_dilute(self, capsys):
        code, doc = run_json(capsys, "dilute", "--p0", "0.3333333333333333", "--copies", "256",
                             "--count-rule", "min")
        assert code == 0
        assert doc["convertible"] is False

    def test_gaussian(self, capsys):
        code, doc = run_json(capsys, "gaussian", "--p0", "0.25", "--copies", "64")
        assert doc["mean"] == pytest.approx(16.0, abs=1e-9)
        assert doc["variance"] == pytest.approx(doc["expected_variance"], abs=1e-9)


class TestTeleport:
    def test_single_qubit_half(self, capsys):
        code, doc = run_json(capsys, "teleport", "--n", "1", "--m", "1")
        assert code == 0
        assert doc["success_prob_formula"] == 0.5
        assert doc["success_prob_exact"] == pytest.approx(0.5, abs=1e-12)
        assert len(doc["outcomes"]) == 4

    def test_alpha_file(self, capsys, tmp_path):
        p = tmp_path / "alpha.json"
        p.write_text("[0.6, 0.8]", encoding="utf-8")
        code, doc = run_json(capsys, "teleport", "--n", "1", "--m", "3", "--alpha", str(p), "--shots", "100")
        assert code == 0
        assert sum(r["count"] for r in doc["samples"]) == 100
        code, doc = run_json(capsys, "teleport", "--n", "2", "--m", "3", "--alpha", str(p))
        assert code == 1
        assert doc["error"] == "domain_error"

    def test_scaling_csv(self, capsys):
        code, out = run(capsys, "teleport-scaling", "--n", "1..3", "--targets", "0.5,0.9")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "n,target,m_min,success"
        assert len(lines) == 1 + 6
        assert lines[1] == "1,0.5,1,0.5"


class TestFormation:
    def test_mixed_state(self, capsys, tmp_path):
        out = tmp_path / "ens.json"
        code, doc = run_json(capsys, "formation", "--rho", "mixed_rho", "--measure", "siv",
                             "--restarts", "2", "--ensemble-out", str(out))
        assert code == 0
        assert doc["value"] == pytest.approx(0.5, abs=1e-6)
        assert doc["reconstruction_distance"] <= 1e-8
        members = weighted_states_from_dict(read_json(out), "members")
        assert sum(p for p, _ in members) == pytest.approx(1.0)

    def test_unrestricted_siv(self, capsys):
        code, doc = run_json(capsys, "formation", "--rho", "mixed_rho", "--measure", "siv", "--unrestricted")
        assert code == 1
        assert doc["error"] == "domain_error"

    def test_projection_bound_csv(self, capsys):
        code, out = run(capsys, "projection-bound", "--copies", "3", "--seed", "1")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "sector,rank,eoe,bound,per_copy"
        assert len(lines) == 1 + 7


@pytest.mark.slow
class TestSelftest:
    def test_quick(self, capsys):
        code, doc = run_json(capsys, "selftest", "--quick")
        assert code == 0
        assert doc["passed"] is True
        assert all(c["passed"] for c in doc["checks"])

"""CLI tests: solve output (including the golden machine format), scenario
runs, curve tables, wizard scripting, ratify determinism, and equality with
the service's answers."""

import json
import pathlib

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from powerkit.cli import cli
from powerkit.service import AppConfig, create_app

GOLDEN_DIR = pathlib.Path(__file__).parent / "golden"


def run_cli(*args, **kw):
    return CliRunner().invoke(cli, list(args), catch_exceptions=False, **kw)


class TestSolve:
    def test_machine_output_golden(self):
        r = run_cli("solve", "two_sample_t", "--delta", "1.5", "--sd", "0.5",
                    "--power", "0.8", "--format", "machine")
        assert r.exit_code == 0
        expected = (GOLDEN_DIR / "solve_two_sample_t.txt").read_text()
        assert r.output == expected

    def test_log_rank_values(self):
        r = run_cli("solve", "log_rank", "--hr", "2", "--pE", "0.5", "--pC", "0.7",
                    "--power", "0.9", "--format", "machine")
        assert r.exit_code == 0
        assert "events_required=95" in r.output
        assert "n_per_arm=79,79" in r.output

    def test_missing_flag_named_with_exit_2(self):
        r = run_cli("solve", "two_sample_t", "--delta", "1.5", "--sd", "0.5")
        assert r.exit_code == 2
        assert "power" in r.output

    def test_validation_matches_service_diagnostics(self, tmp_path):
        r = run_cli("solve", "one_proportion_z", "--p0", "1.7", "--p1", "0.5",
                    "--power", "0.8")
        assert r.exit_code == 2
        with TestClient(create_app(AppConfig(data_dir=str(tmp_path)))) as c:
            resp = c.post("/api/v1/one_proportion_z_test",
                          json={"p0": 1.7, "p1": 0.5, "power": 0.8})
        service_msg = resp.json()["errors"]["p0"]
        assert service_msg in r.output

    def test_power_target(self):
        r = run_cli("solve", "two_sample_t", "--delta", "1.5", "--sd", "0.5",
                    "--target", "power", "--n", "4", "--format", "machine")
        assert r.exit_code == 0
        assert "achieved_power=0.9389357455090215" in r.output


class TestScenarios:
    def test_bundled_corpus_all_green(self):
        r = run_cli("scenarios")
        assert r.exit_code == 0
        assert "selection: 8/8" in r.output
        assert "sample size: 8/8" in r.output

    def test_machine_format_one_row_per_scenario(self):
        r = run_cli("scenarios", "--format", "machine")
        rows = [ln for ln in r.output.splitlines() if ln.startswith("id=")]
        assert len(rows) == 8
        assert all("selection=ok" in ln and "size=ok" in ln for ln in rows)

    def test_corrupt_corpus_exit_3_with_line(self, tmp_path):
        bad = tmp_path / "bad.ndjson"
        bad.write_text('{"id": "x", "prose": "y"}\n{"id": broken\n')
        r = run_cli("scenarios", "--corpus", str(bad))
        assert r.exit_code == 3
        assert "line 1" in r.output  # first record already malformed (missing keys)

    def test_corrupt_json_names_its_line(self, tmp_path):
        bad = tmp_path / "bad.ndjson"
        good = (GOLDEN_DIR.parent.parent / "src" / "powerkit" / "data" /
                "scenarios.ndjson").read_text().splitlines()
        keep = [ln for ln in good if ln.strip() and not ln.startswith("#")][0]
        bad.write_text(keep + "\n{oops\n")
        r = run_cli("scenarios", "--corpus", str(bad))
        assert r.exit_code == 3
        assert "line 2" in r.output


class TestCurve:
    def test_power_sweep_nondecreasing_n(self):
        r = run_cli("curve", "two_sample_t", "--sweep", "power", "--from", "0.5",
                    "--to", "0.95", "--steps", "8", "--delta", "0.5", "--sd", "1")
        rows = [ln.split("\t") for ln in r.output.splitlines() if not ln.startswith("#")]
        ns = [int(v) for _, v in rows]
        assert ns == sorted(ns)

    def test_n_sweep_nondecreasing_power(self):
        r = run_cli("curve", "two_sample_t", "--sweep", "n", "--from", "4",
                    "--to", "100", "--steps", "7", "--delta", "0.5", "--sd", "1")
        rows = [ln.split("\t") for ln in r.output.splitlines() if not ln.startswith("#")]
        powers = [float(v) for _, v in rows]
        assert powers == sorted(powers)

    def test_effect_sweep_boundary_toward_alpha(self):
        # as the effect shrinks the required n explodes; as it grows n falls
        r = run_cli("curve", "two_sample_t", "--sweep", "effect", "--from", "0.2",
                    "--to", "1.2", "--steps", "5", "--sd", "1", "--power", "0.8")
        rows = [ln.split("\t") for ln in r.output.splitlines() if not ln.startswith("#")]
        ns = [int(v) for _, v in rows]
        assert ns == sorted(ns, reverse=True)

    def test_effect_sweep_at_fixed_n_approaches_alpha(self):
        r = run_cli("curve", "two_sample_t", "--sweep", "effect", "--from", "1e-6",
                    "--to", "1.0", "--steps", "5", "--sd", "1", "--n", "30")
        assert r.exit_code == 0
        rows = [ln.split("\t") for ln in r.output.splitlines() if not ln.startswith("#")]
        powers = [float(v) for _, v in rows]
        assert powers[0] == pytest.approx(0.05, abs=1e-4)  # vanishing effect -> alpha
        assert powers == sorted(powers)

    def test_bad_range_exit_2(self):
        r = run_cli("curve", "two_sample_t", "--sweep", "power", "--from", "0.9",
                    "--to", "0.5", "--steps", "5", "--delta", "0.5", "--sd", "1")
        assert r.exit_code == 2


class TestWizard:
    SCRIPT = "\n".join([
        "describe outcome=binary groups=2",
        "set baseline 18%",
        "set absolute-risk-reduction 4%",
        "set power 0.8",
        "solve n",
        "whatif power 0.9",
        "",  # EOF follows
    ])

    def test_scripted_two_proportion_flow_matches_service(self, tmp_path):
        transcript_path = tmp_path / "t.txt"
        r = run_cli("wizard", "--transcript", str(transcript_path), input=self.SCRIPT)
        assert r.exit_code == 0
        assert "1318" in r.output             # matches the service answer
        transcript = transcript_path.read_text()
        assert '"n_total": 2636' in transcript
        with TestClient(create_app(AppConfig(data_dir=str(tmp_path)))) as c:
            service = c.post("/api/v1/two_proportions_z_test",
                             json={"p0": 0.18, "p1": 0.14, "power": 0.8}).json()
        assert service["n_per_arm"] == [1318, 1318]

    def test_whatif_increases_n(self, tmp_path):
        r = run_cli("wizard", input=self.SCRIPT)
        assert r.exit_code == 0
        assert "1764" in r.output  # 90% power needs more subjects

    def test_invalid_entry_reprompts_without_state_loss(self):
        script = "\n".join([
            "choose two_sample_t",
            "set detla 0.5",        # typo -> diagnostic
            "set ???",              # parse error -> reprompt
            "set delta 1.5",
            "set sd 0.5",
            "set power 0.8",
            "solve n",
            "",
        ])
        r = run_cli("wizard", input=script)
        assert r.exit_code == 0
        assert "nearest valid name: 'delta'" in r.output
        assert "parse error" in r.output
        assert "needs 4/4 per arm" in r.output


class TestRatifyCli:
    def test_report_byte_identical_across_runs(self):
        args = ("ratify", "--only", "two_sample_t", "--replications", "4000",
                "--seed", "7", "--format", "machine")
        a = run_cli(*args)
        b = run_cli(*args)
        assert a.exit_code in (0, 1)
        assert a.output == b.output

    def test_unknown_only_filter_exit_2(self):
        r = run_cli("ratify", "--only", "bogus_test")
        assert r.exit_code == 2


class TestCrossInterfaceEquality:
    def test_cli_equals_service_for_all_endpoints(self, tmp_path):
        from powerkit.service import ENDPOINT_NAMES
        requests = json.loads((GOLDEN_DIR / "endpoint_responses.json").read_text())
        flags = {
            "one_sample_t_test": ["--delta", "0.5", "--sd", "1.0"],
            "two_sample_t_test": ["--delta", "1.5", "--sd", "0.5"],
            "paired_t_test": ["--delta", "0.3", "--sd", "1.0"],
            "one_way_anova": ["--k", "3", "--f", "0.25"],
            "one_proportion_z_test": ["--p0", "0.5", "--p1", "0.6"],
            "two_proportions_z_test": ["--p0", "0.18", "--p1", "0.14"],
            "chi_square_test": ["--w", "0.3", "--df", "4"],
            "correlation_test": ["--r", "0.5"],
            "mann_whitney": ["--delta", "0.5", "--sd", "1.0"],
            "paired_wilcoxon": ["--delta", "0.5", "--sd", "1.0"],
            "kruskal_wallis": ["--k", "3", "--f", "0.25"],
            "log_rank_test": ["--hr", "2", "--pE", "0.5", "--pC", "0.7"],
            "cox_ph": ["--hr", "2", "--exposure_prev", "0.5", "--psi", "1.0"],
        }
        test_by_endpoint = {v: k for k, v in ENDPOINT_NAMES.items()}
        for endpoint, expected in requests.items():
            test_id = test_by_endpoint[endpoint]
            power = "0.9" if endpoint == "log_rank_test" else "0.8"
            r = run_cli("solve", test_id, *flags[endpoint], "--power", power,
                        "--format", "machine")
            assert r.exit_code == 0, endpoint
            cli_kv = dict(ln.split("=", 1) for ln in r.output.splitlines() if "=" in ln)
            assert cli_kv["n_total"] == str(expected["n_total"]), endpoint
            assert cli_kv["n_per_arm"] == ",".join(
                str(v) for v in expected["n_per_arm"]), endpoint
            assert float(cli_kv["achieved_power"]) == pytest.approx(
                expected["achieved_power"], abs=1e-12), endpoint

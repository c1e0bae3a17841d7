"""End-to-end tests of the command-line interface via ``main(argv)``."""

import io
import json
from fractions import Fraction

import pytest

from fiet import (
    Fiet,
    FietCombinatorics,
    ParameterSchedule,
    PathParameters,
    RauzyPath,
    apply_path,
    base_datum,
    build_path,
    domain_partition,
    limit_vectors,
    path_matrix_for_power,
    rauzy_step,
)
from fiet.cli import main
from fiet.serialize import (
    FREQUENCY_CSV_HEADER,
    comb_to_dict,
    fiet_to_dict,
    matrix_to_lists,
    parse_fraction,
)

SMALL_CONFIG = {"d": 2, "p1_1": 2}


def write_json(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj) + "\n", encoding="utf-8")
    return str(p)


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestStep:
    # Base datum with label 3 rigged longer than label 8, so the range-side
    # label wins a length-driven step and the flipped case fires.
    RIGGED = {
        "n": 8,
        "pi0": [1, 2, 3, 4, 5, 6, 7, 8],
        "pi1": [4, 5, 6, 7, 2, 1, 8, 3],
        "flips": [2, 3, 4, 5, 6, 7],
        "lengths": ["1/1", "1/1", "2/1", "1/1", "1/1", "1/1", "1/1", "1/1"],
    }

    def test_length_driven_step(self, capsys, tmp_path):
        path = write_json(tmp_path, "f.json", self.RIGGED)
        code, out, _ = run(capsys, ["step", "--in", path])
        assert code == 0
        payload = json.loads(out)
        assert payload["letter"] == "a"
        assert payload["case_tag"] == "b2"
        assert payload["winner"] == 3
        assert payload["loser"] == 8
        f2, expected = rauzy_step(
            Fiet(base_datum(), tuple(Fraction(s) for s in
                 ("1", "1", "2", "1", "1", "1", "1", "1")))
        )
        assert payload["matrix"] == matrix_to_lists(expected.matrix)
        assert payload["lengths"] == [
            "1/1", "1/1", "1/1", "1/1", "1/1", "1/1", "1/1", "1/1"
        ]

    def test_forced_letter_on_combinatorics_only(self, capsys, tmp_path):
        comb = {"n": 3, "pi0": [1, 2, 3], "pi1": [3, 1, 2], "flips": []}
        path = write_json(tmp_path, "c.json", comb)
        code, out, _ = run(capsys, ["step", "--in", path, "--letter", "a"])
        assert code == 0
        payload = json.loads(out)
        assert payload["letter"] == "a"
        assert "lengths" not in payload

    def test_forced_letter_with_consistent_lengths(self, capsys, tmp_path):
        path = write_json(tmp_path, "f.json", self.RIGGED)
        code, out, _ = run(capsys, ["step", "--in", path, "--letter", "a"])
        assert code == 0
        assert json.loads(out)["lengths"][2] == "1/1"

    def test_forced_letter_contradicting_lengths(self, capsys, tmp_path):
        path = write_json(tmp_path, "f.json", self.RIGGED)
        code, _, err = run(capsys, ["step", "--in", path, "--letter", "b"])
        assert code == 2
        assert "winner is not longer" in err

    def test_tied_lengths_exit_one(self, capsys, tmp_path):
        tied = dict(self.RIGGED, lengths=["1/1"] * 8)
        path = write_json(tmp_path, "tie.json", tied)
        code, _, err = run(capsys, ["step", "--in", path])
        assert code == 1
        assert "undefined" in err

    def test_comb_only_without_letter(self, capsys, tmp_path):
        comb = {"n": 3, "pi0": [1, 2, 3], "pi1": [3, 1, 2], "flips": []}
        path = write_json(tmp_path, "c.json", comb)
        code, _, err = run(capsys, ["step", "--in", path])
        assert code == 2
        assert "--letter" in err

    def test_bad_json_exit_two(self, capsys, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json", encoding="utf-8")
        code, _, err = run(capsys, ["step", "--in", str(p)])
        assert code == 2
        assert "cannot read JSON" in err

    def test_missing_file_exit_two(self, capsys, tmp_path):
        code, _, _ = run(capsys, ["step", "--in", str(tmp_path / "nope.json")])
        assert code == 2

    def test_reads_stdin_by_default(self, capsys, monkeypatch):
        monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps(self.RIGGED)))
        code, out, _ = run(capsys, ["step"])
        assert code == 0
        assert json.loads(out)["letter"] == "a"


class TestPath:
    def test_empty_word_echoes_input(self, capsys, tmp_path):
        comb = {"n": 3, "pi0": [1, 2, 3], "pi1": [3, 1, 2], "flips": [2]}
        path = write_json(tmp_path, "c.json", comb)
        code, out, _ = run(capsys, ["path", "--in", path, "--word", ""])
        assert code == 0
        payload = json.loads(out)
        assert payload["combinatorics"] == payload["start"]
        assert payload["path_length"] == 0
        identity = [[1 if i == j else 0 for j in range(3)] for i in range(3)]
        assert payload["matrix"] == identity

    def test_word_matches_library(self, capsys, tmp_path):
        comb = FietCombinatorics(3, (1, 2, 3), (3, 1, 2), frozenset({2}))
        path = write_json(tmp_path, "c.json", comb_to_dict(comb))
        code, out, _ = run(capsys, ["path", "--in", path, "--word", "ba"])
        assert code == 0
        payload = json.loads(out)
        end, matrix = apply_path(comb, RauzyPath.from_word("ba"))
        assert payload["combinatorics"] == comb_to_dict(end)
        assert payload["matrix"] == matrix_to_lists(matrix)
        assert payload["path_length"] == 2

    def test_undefined_word_exits_one(self, capsys, tmp_path):
        # After the first 'a' step, label 2 is rightmost in both rows and the
        # next step is undefined.
        comb = FietCombinatorics(3, (1, 2, 3), (3, 1, 2), frozenset({2}))
        path = write_json(tmp_path, "c.json", comb_to_dict(comb))
        code, _, err = run(capsys, ["path", "--in", path, "--word", "ab"])
        assert code == 1
        assert "undefined" in err

    def test_params_run_from_default_datum(self, capsys):
        code, out, _ = run(capsys, ["path", "--params", "1,1,1,1,1"])
        assert code == 0
        payload = json.loads(out)
        assert payload["start"] == comb_to_dict(base_datum())
        assert payload["path_length"] == 35
        assert payload["combinatorics"]["pi0"] == [1, 4, 2, 3, 5, 6, 7, 8]
        assert payload["combinatorics"]["pi1"] == [3, 5, 6, 7, 4, 1, 8, 2]

    def test_induced_rows(self, capsys):
        code, out, _ = run(
            capsys, ["path", "--params", "1,1,1,1,1", "--induced", "2,3,4"]
        )
        assert code == 0
        induced = json.loads(out)["induced"]
        assert induced == {"labels": [2, 3, 4], "pi0": [4, 2, 3], "pi1": [3, 4, 2]}

    def test_power(self, capsys):
        code, out, _ = run(
            capsys, ["path", "--params", "1,1,1,1,1", "--power", "3"]
        )
        assert code == 0
        payload = json.loads(out)
        end, matrix = path_matrix_for_power(
            base_datum(), build_path(PathParameters(1, 1, 1, 1, 1)), 3
        )
        assert payload["combinatorics"] == comb_to_dict(end)
        assert payload["matrix"] == matrix_to_lists(matrix)
        assert payload["path_length"] == 105
        assert payload["combinatorics"] == comb_to_dict(base_datum())

    def test_word_and_params_both_rejected(self, capsys):
        code, _, err = run(
            capsys, ["path", "--word", "ab", "--params", "1,1,1,1,1"]
        )
        assert code == 2
        assert "exactly one" in err

    def test_neither_word_nor_params_rejected(self, capsys):
        code, _, _ = run(capsys, ["path"])
        assert code == 2

    def test_bad_letters_rejected(self, capsys):
        code, _, err = run(capsys, ["path", "--word", "abc"])
        assert code == 2
        assert "letters" in err

    def test_bad_params_rejected(self, capsys):
        assert run(capsys, ["path", "--params", "1,2,3"])[0] == 2
        assert run(capsys, ["path", "--params", "1,2,3,x,5"])[0] == 2
        assert run(capsys, ["path", "--params", "0,1,1,1,1"])[0] == 2

    def test_bad_induced_labels_rejected(self, capsys):
        code, _, _ = run(
            capsys, ["path", "--params", "1,1,1,1,1", "--induced", "2,9"]
        )
        assert code == 2

    def test_power_must_be_positive(self, capsys):
        code, _, _ = run(
            capsys, ["path", "--params", "1,1,1,1,1", "--power", "0"]
        )
        assert code == 2


class TestConstruct:
    def test_small_schedule_report(self, capsys, tmp_path):
        cfg = write_json(tmp_path, "s.json", SMALL_CONFIG)
        code, out, _ = run(
            capsys, ["construct", "--config", cfg, "--depth", "1"]
        )
        assert code == 0
        payload = json.loads(out)
        alpha = [parse_fraction(s) for s in payload["alpha"]["exact"]]
        assert sum(alpha) == 1
        assert payload["schedule"]["d"] == 2

    def test_relaxed_depth_two_sums_to_one(self, capsys):
        code, out, _ = run(capsys, ["construct", "--mode", "relaxed", "--depth", "2"])
        assert code == 0
        payload = json.loads(out)
        for key in ("lambda2", "lambda5", "lambda7", "alpha"):
            vec = [parse_fraction(s) for s in payload[key]["exact"]]
            assert sum(vec) == 1
            assert all(x > 0 for x in vec)

    def test_strict_depth_one_completes(self, capsys):
        code, out, _ = run(capsys, ["construct", "--mode", "strict", "--depth", "1"])
        assert code == 0
        payload = json.loads(out)
        assert payload["schedule"]["mode"] == "strict"
        assert sum(parse_fraction(s) for s in payload["alpha"]["exact"]) == 1

    def test_byte_reproducible(self, capsys):
        args = ["construct", "--mode", "relaxed", "--depth", "1"]
        first = run(capsys, args)
        second = run(capsys, args)
        assert first == second

    def test_overrides_force_custom_mode(self, capsys):
        code, out, _ = run(
            capsys,
            ["construct", "--mode", "relaxed", "--d", "2", "--p1", "2",
             "--depth", "1"],
        )
        assert code == 0
        sched = json.loads(out)["schedule"]
        assert sched == {
            "d": 2, "p1_1": 2, "p4_rule": "p2", "p5_rule": "p1",
            "mode": "custom",
        }

    def test_out_file(self, capsys, tmp_path):
        dest = tmp_path / "c.json"
        code, out, _ = run(
            capsys,
            ["construct", "--mode", "relaxed", "--depth", "1",
             "--out", str(dest)],
        )
        assert code == 0
        assert out == ""
        assert json.loads(dest.read_text())["depth"] == 1

    def test_mode_only_config(self, capsys, tmp_path):
        cfg = write_json(tmp_path, "m.json", {"mode": "relaxed"})
        code, out, _ = run(capsys, ["construct", "--config", cfg, "--depth", "1"])
        assert code == 0
        assert json.loads(out)["schedule"]["mode"] == "relaxed"


class TestVerify:
    def test_relaxed_depth_one_passes(self, capsys):
        code, out, _ = run(capsys, ["verify", "--mode", "relaxed", "--depth", "1"])
        assert code == 0
        payload = json.loads(out)
        assert payload["passed"] is True
        assert payload["records_failing"] == []
        assert payload["family"] == "reference"

    def test_small_schedule_fails(self, capsys, tmp_path):
        cfg = write_json(tmp_path, "s.json", SMALL_CONFIG)
        code, out, err = run(capsys, ["verify", "--config", cfg, "--depth", "1"])
        assert code == 1
        assert "FAILED" in err
        payload = json.loads(out)
        assert payload["passed"] is False
        assert len(payload["records_failing"]) == 14

    def test_undersized_parameter_is_reported(self, capsys):
        code, out, _ = run(
            capsys, ["verify", "--mode", "relaxed", "--p1", "10", "--depth", "1"]
        )
        assert code == 1
        payload = json.loads(out)
        assert payload["validity"]["p1 > 45"] is False

    def test_empty_config_exit_two(self, capsys, tmp_path):
        cfg = write_json(tmp_path, "empty.json", {})
        code, _, err = run(capsys, ["verify", "--config", cfg])
        assert code == 2
        assert "bad schedule config" in err

    def test_matrix_report_can_be_skipped(self, capsys):
        code, out, _ = run(
            capsys,
            ["verify", "--mode", "relaxed", "--depth", "1",
             "--no-matrix-report"],
        )
        assert code == 0
        assert "matrix_fidelity" not in json.loads(out)

    def test_verify_byte_reproducible(self, capsys):
        args = ["verify", "--mode", "relaxed", "--depth", "1"]
        assert run(capsys, args) == run(capsys, args)


class TestSimulate:
    SMALL_ARGS = ["--d", "2", "--p1", "2", "--depth", "1"]

    def test_horizon_one_rows_are_indicators(self, capsys):
        code, out, _ = run(
            capsys,
            ["simulate", *self.SMALL_ARGS, "--horizons", "1"],
        )
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == ",".join(FREQUENCY_CSV_HEADER)
        assert len(lines) == 9  # eight midpoint starts
        for row in lines[1:]:
            cells = row.split(",")
            freqs = cells[2:10]
            assert freqs.count("1/1") == 1
            assert freqs.count("0/1") == 7

    def test_byte_reproducible(self, capsys):
        args = ["simulate", *self.SMALL_ARGS, "--horizons", "2"]
        assert run(capsys, args) == run(capsys, args)

    def test_alpha_pipeline_from_construct(self, capsys, tmp_path):
        alpha_file = tmp_path / "c.json"
        code, _, _ = run(
            capsys,
            ["construct", "--d", "2", "--p1", "2", "--depth", "1",
             "--out", str(alpha_file)],
        )
        assert code == 0
        code, out, _ = run(
            capsys,
            ["simulate", "--alpha", str(alpha_file), "--horizons", "1"],
        )
        assert code == 0
        assert len(out.strip().split("\n")) == 9

    def test_explicit_starts_and_horizons(self, capsys):
        code, out, _ = run(
            capsys,
            ["simulate", *self.SMALL_ARGS,
             "--starts", "1/2,1/3", "--horizons", "1,2"],
        )
        assert code == 0
        lines = out.strip().split("\n")
        assert len(lines) == 5  # 2 starts x 2 horizons

    def test_terminated_orbit_flagged_in_status_column(self, capsys):
        # Start exactly on the left endpoint of flipped tile 2: the map is
        # undefined there, so the orbit terminates at step 0.
        schedule = ParameterSchedule(d=2, p1_1=2)
        alpha = limit_vectors(schedule, 1).alpha
        f = Fiet(base_datum(), alpha)
        tile2_left = domain_partition(f)[1][1]
        code, out, _ = run(
            capsys,
            ["simulate", *self.SMALL_ARGS,
             "--starts", str(tile2_left), "--horizons", "3"],
        )
        assert code == 0
        row = out.strip().split("\n")[1].split(",")
        terminated_col = FREQUENCY_CSV_HEADER.index("terminated_at")
        steps_col = FREQUENCY_CSV_HEADER.index("steps_completed")
        assert row[terminated_col] == "0"
        assert row[steps_col] == "0"

    def test_bad_starts_exit_two(self, capsys):
        code, _, err = run(
            capsys, ["simulate", *self.SMALL_ARGS, "--starts", "xyz"]
        )
        assert code == 2
        assert "starts" in err

    def test_bad_horizons_exit_two(self, capsys):
        code, _, _ = run(
            capsys, ["simulate", *self.SMALL_ARGS, "--horizons", "one"]
        )
        assert code == 2

    def test_bad_alpha_file_exit_two(self, capsys, tmp_path):
        bad = write_json(tmp_path, "bad.json", {"alpha": {"decimal": []}})
        code, _, err = run(capsys, ["simulate", "--alpha", bad])
        assert code == 2
        assert "alpha" in err


class TestOracle:
    def test_small_run_passes(self, capsys):
        code, out, _ = run(capsys, ["oracle", "--trials", "40"])
        assert code == 0
        payload = json.loads(out)
        assert payload == {"trials": 40, "passes": 40, "failures": []}

    def test_negative_trials_exit_two(self, capsys):
        code, _, _ = run(capsys, ["oracle", "--trials", "-1"])
        assert code == 2

    def test_seeded_runs_reproducible(self, capsys):
        args = ["oracle", "--trials", "25", "--seed", "3"]
        assert run(capsys, args) == run(capsys, args)


class TestParser:
    def test_unknown_command_exits_two(self, capsys):
        with pytest.raises(SystemExit) as exc_info:
            main(["bogus"])
        assert exc_info.value.code == 2
        capsys.readouterr()

    def test_command_required(self, capsys):
        with pytest.raises(SystemExit) as exc_info:
            main([])
        assert exc_info.value.code == 2
        capsys.readouterr()

    def test_bad_flag_value_exits_two(self, capsys):
        with pytest.raises(SystemExit) as exc_info:
            main(["verify", "--mode", "loose"])
        assert exc_info.value.code == 2
        capsys.readouterr()

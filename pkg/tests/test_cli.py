"""End-to-end tests for the command line."""

import json

import numpy as np
import pytest


def _matrix(data):
    from serialization import matrix_from_json
    return matrix_from_json(data)


@pytest.fixture
def cnot_files(write_json, qubit_states):
    from processor import ProgramState
    from processor_zoo import make_cnot_processor
    from serialization import matrix_to_json, processor_to_json, program_to_json
    return {
        "processor": write_json("cnot.json", processor_to_json(make_cnot_processor())),
        "program": write_json("program.json", program_to_json(ProgramState.pure(np.array([1, 1]) / np.sqrt(2)))),
        "state": write_json("state.json", matrix_to_json(qubit_states["0"])),
    }


class TestBuild:
    def test_qid(self, run_cli):
        code, out = run_cli("build", "qid")
        assert code == 0
        data = json.loads(out)
        assert (data["data_dim"], data["prog_dim"]) == (2, 4)
        assert data["G"]["rows"] == 8

    def test_u_processor_from_gate_names(self, run_cli, write_json):
        params = write_json("params.json", {"unitaries": ["I", "Z"]})
        code, out = run_cli("build", "u", params)
        assert code == 0
        np.testing.assert_array_equal(_matrix(json.loads(out)["G"]), np.diag([1, 1, 1, -1]))

    def test_swap_at_zero_is_identity(self, run_cli, write_json):
        params = write_json("params.json", {"dim": 3, "phi": 0})
        code, out = run_cli("build", "swap", params)
        assert code == 0
        np.testing.assert_array_equal(_matrix(json.loads(out)["G"]), np.eye(9))

    def test_non_unitary_is_invalid_input(self, run_cli, write_json):
        params = write_json("params.json", {"unitaries": [{"rows": 2, "cols": 2, "entries": [1, 1, 0, 1]}]})
        code, out = run_cli("build", "u", params)
        assert code == 3
        assert out == ""

    def test_bad_params_are_schema_errors(self, run_cli, write_json):
        params = write_json("params.json", {"dim": "two"})
        assert run_cli("build", "swap", params)[0] == 2
        assert run_cli("build", "u")[0] == 2

    def test_output_is_byte_identical(self, run_cli):
        assert run_cli("build", "qid")[1] == run_cli("build", "qid")[1]

    def test_tolerance_flag_reaches_unitarity_check(self, run_cli, write_json):
        near_z = {"rows": 2, "cols": 2, "entries": [1, 0, 0, -1 + 1e-8]}
        params = write_json("params.json", {"unitaries": ["I", near_z]})
        assert run_cli("build", "u", params)[0] == 3
        code, out = run_cli("--tolerance", "1e-6", "build", "u", params)
        assert code == 0
        assert json.loads(out)["prog_dim"] == 2

    def test_unknown_kind(self, run_cli):
        assert run_cli("build", "toffoli")[0] == 2


class TestRun:
    def test_qid_full_depolarization(self, run_cli, write_json, qubit_states):
        from processor_zoo import make_qid_processor, qid_program
        from serialization import matrix_to_json, processor_to_json, program_to_json
        code, out = run_cli(
            "run",
            write_json("qid.json", processor_to_json(make_qid_processor())),
            write_json("program.json", program_to_json(qid_program(0.0, 1.0))),
            write_json("state.json", matrix_to_json(qubit_states["0"])),
        )
        assert code == 0
        np.testing.assert_allclose(_matrix(json.loads(out)["output"]), np.eye(2) / 2, atol=1e-12)

    def test_measure_and_accept(self, run_cli, cnot_files, qubit_states):
        code, out = run_cli("run", cnot_files["processor"], cnot_files["program"], cnot_files["state"],
                            "--measure", "x", "--accept", "0")
        assert code == 0
        data = json.loads(out)
        assert data["success_probability"] == pytest.approx(0.5)
        np.testing.assert_allclose(_matrix(data["accepted_state"]), qubit_states["+"], atol=1e-12)
        assert len(data["outcomes"]) == 2

    def test_conditional_output_is_byte_identical(self, run_cli, cnot_files):
        argv = ("run", cnot_files["processor"], cnot_files["program"], cnot_files["state"],
                "--measure", "x", "--accept", "0")
        first = run_cli(*argv)
        assert first[0] == 0
        assert run_cli(*argv) == first

    def test_tolerance_flag_reaches_processor_load(self, run_cli, write_json, qubit_states):
        from processor import ProgramState
        from serialization import matrix_to_json, program_to_json
        g = np.diag([1, 1, 1, 1 + 1e-8])
        argv = (
            "run",
            write_json("near.json", {"data_dim": 2, "prog_dim": 2, "G": matrix_to_json(g)}),
            write_json("program.json", program_to_json(ProgramState.basis(0, 2))),
            write_json("state.json", matrix_to_json(qubit_states["+"])),
        )
        assert run_cli(*argv)[0] == 3
        code, out = run_cli("--tolerance", "1e-6", *argv)
        assert code == 0
        np.testing.assert_allclose(_matrix(json.loads(out)["output"]), qubit_states["+"], atol=1e-12)

    def test_zero_probability_comes_from_config(self, run_cli, cnot_files, tmp_path, monkeypatch):
        import settings
        config = json.loads(settings.DEFAULT_CONFIG_PATH.read_text())
        config["tolerances"]["zero_probability"] = 0.6
        path = tmp_path / "processor-config.json"
        path.write_text(json.dumps(config))
        monkeypatch.setattr(settings, "DEFAULT_CONFIG_PATH", path)
        code, out = run_cli("run", cnot_files["processor"], cnot_files["program"], cnot_files["state"],
                            "--measure", "x")
        assert code == 0
        assert [o["flagged"] for o in json.loads(out)["outcomes"]] == [True, True]

    def test_measurement_file(self, run_cli, cnot_files, write_json):
        basis = write_json("basis.json", {"vectors": [[1, 0], [0, 1]]})
        code, out = run_cli("run", cnot_files["processor"], cnot_files["program"], cnot_files["state"],
                            "--measure", basis)
        assert code == 0
        probabilities = [o["probability"] for o in json.loads(out)["outcomes"]]
        assert probabilities == pytest.approx([0.5, 0.5])

    def test_accept_needs_measure(self, run_cli, cnot_files):
        code, _ = run_cli("run", cnot_files["processor"], cnot_files["program"], cnot_files["state"],
                          "--accept", "0")
        assert code == 2

    def test_accept_out_of_range(self, run_cli, cnot_files):
        code, _ = run_cli("run", cnot_files["processor"], cnot_files["program"], cnot_files["state"],
                          "--measure", "z", "--accept", "2")
        assert code == 2

    def test_dimension_mismatch(self, run_cli, cnot_files, write_json):
        from serialization import matrix_to_json
        state = write_json("big.json", matrix_to_json(np.eye(3) / 3))
        code, _ = run_cli("run", cnot_files["processor"], cnot_files["program"], state)
        assert code == 4

    def test_missing_file(self, run_cli, cnot_files, tmp_path):
        code, _ = run_cli("run", tmp_path / "absent.json", cnot_files["program"], cnot_files["state"])
        assert code == 2


class TestVerify:
    def test_valid_processor(self, run_cli, cnot_files):
        code, out = run_cli("verify", cnot_files["processor"])
        data = json.loads(out)
        assert code == 0
        assert data["passed"] is True
        assert set(data["residuals"]) == {"unitarity", "orthogonality", "dual", "mapcond"}

    def test_corrupted_processor(self, run_cli, write_json):
        from processor_zoo import make_cnot_processor
        from serialization import matrix_to_json
        g = np.array(make_cnot_processor().G)
        g[0, 1] = 1e-3
        path = write_json("broken.json", {"data_dim": 2, "prog_dim": 2, "G": matrix_to_json(g)})
        code, out = run_cli("verify", path)
        assert code == 5
        data = json.loads(out)
        assert data["passed"] is False
        assert data["residuals"]["unitarity"] > 1e-4

    def test_random_processor_is_seeded(self, run_cli):
        first = run_cli("--seed", "7", "verify", "--random", "2", "3")
        second = run_cli("--seed", "7", "verify", "--random", "2", "3")
        assert first[0] == 0
        assert first == second

    def test_needs_a_processor(self, run_cli):
        assert run_cli("verify")[0] == 2


class TestNoGo:
    def test_report(self, run_cli):
        code, out = run_cli("nogo", "3", "2")
        data = json.loads(out)
        assert code == 0
        assert data["holds"] is True
        assert len(data["bound_checks"]) == 3

    def test_large_witness_dimension(self, run_cli):
        code, out = run_cli("nogo", "100", "2")
        data = json.loads(out)
        assert code == 0
        assert data["holds"] is True
        assert len(data["bound_checks"]) == 100 * 99 // 2

    def test_no_contradiction(self, run_cli):
        assert run_cli("nogo", "2", "2")[0] == 2

    def test_output_is_byte_identical(self, run_cli):
        assert run_cli("nogo", "4", "3")[1] == run_cli("nogo", "4", "3")[1]

    def test_pretty_format(self, run_cli):
        code, out = run_cli("--format", "pretty", "nogo", "3", "2")
        assert code == 0
        assert out.startswith("{\n  ")
        assert json.loads(out)["M_witness"] == 3


class TestGlobalOptions:
    def test_invalid_tolerance(self, run_cli):
        assert run_cli("--tolerance", "-1", "nogo", "3", "2")[0] == 2

    def test_bad_config_file_falls_back(self, run_cli, write_json):
        config = write_json("run.json", {"seed": "seven", "format": "pretty"})
        code, out = run_cli("--config", config, "nogo", "3", "2")
        assert code == 0
        assert out.startswith("{\n")

    def test_out_file(self, run_cli, tmp_path):
        target = tmp_path / "report.json"
        code, out = run_cli("--out", target, "nogo", "3", "2")
        assert code == 0
        assert out == ""
        assert json.loads(target.read_text())["N_ambient"] == 2

    def test_log_file(self, run_cli, tmp_path):
        log = tmp_path / "logs" / "run.log"
        assert run_cli("--log-file", log, "nogo", "3", "2")[0] == 0
        assert "No-go witness" in log.read_text()

    def test_no_command(self, run_cli):
        assert run_cli()[0] == 2


class TestSearch:
    def test_residual_line_and_report(self, run_cli, tmp_path):
        target = tmp_path / "search.json"
        code, out = run_cli("--out", target, "search", "phase", "2", "400", "--grid", "0", "1", "--starts", "2")
        assert code == 0
        label, value = out.strip().split()
        assert label == "residual"
        data = json.loads(target.read_text())
        assert float(value) == data["best_residual"]
        assert data["theta_grid"] == [0.0, 1.0]
        assert data["starts"] == 2
        assert len(data["programs"]) == 2

    def test_default_grid_from_config(self, run_cli, sim_config, tmp_path):
        target = tmp_path / "search.json"
        code, _ = run_cli("--out", target, "search", "amp", "1", "40", "--starts", "1")
        assert code == 0
        assert json.loads(target.read_text())["theta_grid"] == sim_config.get_search_grid("amp")

    def test_bad_program_dimension(self, run_cli):
        assert run_cli("search", "phase", "0", "10")[0] == 3

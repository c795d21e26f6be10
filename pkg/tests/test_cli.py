import io
import json

import pytest

from app.api.commands import execute_args, execute_line, job_from_args, run
from app.config import SolverConfig
from app.errors import InvalidInput
from app.main import main
from app.models.massey_data import CommandType, JobSpec, QuadruplePayload, SpecializePayload


class TestModels:
    def test_element_lists_are_joined(self):
        payload = QuadruplePayload(a="2", b="2", c="1", d="3", alpha=["2", "1"], delta="1")
        assert payload.alpha == "2,1"
        assert payload.delta == "1"

    def test_point_from_text(self):
        payload = SpecializePayload(f="x1", point="0,1/2", swapped="yes")
        assert payload.point == ["0", "1/2"]
        assert payload.swapped is True

    def test_bad_rational(self):
        with pytest.raises(ValueError):
            QuadruplePayload(a="two", b="2", c="1", d="3")


class TestArguments:
    def test_positional_and_named(self):
        job = job_from_args("symbol", ["-1", "3", "generators=2"])
        assert job.command == CommandType.SYMBOL
        assert job.payload == {"pi": "-1", "rho": "3", "generators": "2"}

    def test_named_field_is_skipped_by_positionals(self):
        job = job_from_args("specialize", ["f=x1", "0,0", "x1"])
        assert job.payload == {"f": "x1", "point": "0,0", "g": "x1"}

    def test_too_many_arguments(self):
        with pytest.raises(InvalidInput):
            job_from_args("conic", ["1", "2", "3"])


class TestCommands:
    def test_symbol(self, base_config):
        document = execute_args("symbol", ["-1", "-1"], base_config)
        assert document["exit_code"] == 0
        assert document["result"]["invariants"] == ["p=2", "inf"]
        assert document["result"]["reciprocal"] is True

    def test_conic_obstruction(self, base_config):
        document = execute_args("conic", ["3", "5"], base_config)
        assert document["exit_code"] == 1
        assert document["status"] == "negative"
        assert document["obstruction"] == "p=3"

    def test_conic_solution(self, base_config):
        document = execute_args("conic", ["2", "7"], base_config)
        assert document["exit_code"] == 0
        result = document["result"]
        x, y, z = (int(result[k]) for k in ("x", "y", "z"))
        assert z * z == 2 * x * x + 7 * y * y

    def test_local_invariants(self, base_config):
        document = execute_args("local-inv", ["-1", "-1", "2"], base_config)
        places = document["result"]["places"]
        assert [(p["place"], p["invariant"]) for p in places] == [("p=2", 1)]

    def test_specialize(self, base_config):
        document = execute_args("specialize", ["x1", "0,0", "x1"], base_config)
        result = document["result"]
        assert result["square_class"] == -1
        assert result["symbol"] == ["p=2", "inf"]

    def test_verify(self, base_config):
        accepted = execute_args("verify", ["2", "2", "1", "3", "alpha=2,1", "delta=1"], base_config)
        assert accepted["exit_code"] == 0
        rejected = execute_args("verify", ["2", "2", "1", "3", "alpha=1", "delta=1"], base_config)
        assert rejected["exit_code"] == 1
        assert rejected["obstruction"] == "norm-b"

    def test_witness_without_certificate(self, base_config):
        document = execute_args("witness", ["2", "2", "1", "3"], base_config)
        assert document["exit_code"] == 0
        assert document["result"]["route"] == "c-square"
        assert document["result"]["verified"] is True

    def test_unknown_command(self, base_config):
        document = execute_args("frobnicate", [], base_config)
        assert document["exit_code"] == 3
        assert document["status"] == "invalid"

    def test_missing_certificate(self, base_config):
        document = execute_args("residues", ["2", "2", "3", "3"], base_config)
        assert document["exit_code"] == 3

    def test_generate_is_seeded(self, base_config):
        first = execute_args("generate", ["2"], base_config)
        second = execute_args("generate", ["2"], base_config)
        assert first == second
        assert len(first["result"]["instances"]) == 2


class TestJobs:
    def test_malformed_json(self, base_config):
        document = execute_line("{not json", base_config)
        assert document["exit_code"] == 3

    def test_invalid_payload(self, base_config):
        line = json.dumps({"command": "conic", "payload": {"a": "x"}})
        document = execute_line(line, base_config)
        assert document["exit_code"] == 3
        assert document["command"] == "conic"

    def test_config_override(self):
        job = JobSpec(command=CommandType.CONIC, payload={"a": "2", "b": "7"}, config={"budget": 5})
        document = run(job, SolverConfig(budget=100))
        assert document.config["budget"] == 5
        assert document.config["factor_bound"] == str(SolverConfig().factor_bound)

    def test_same_job_same_output(self, base_config):
        line = json.dumps({"command": "symbol", "payload": {"pi": "2,1", "rho": "3", "generators": ["2"]}})
        assert execute_line(line, base_config) == execute_line(line, base_config)


class TestMain:
    def test_single_command(self, capsys):
        assert main(["conic", "3", "5"]) == 1
        document = json.loads(capsys.readouterr().out)
        assert document["obstruction"] == "p=3"

    def test_batch_from_stdin(self, capsys, monkeypatch):
        lines = [
            json.dumps({"command": "conic", "payload": {"a": "2", "b": "7"}}),
            "",
            json.dumps({"command": "conic", "payload": {"a": "3", "b": "5"}}),
            "not json",
        ]
        monkeypatch.setattr("sys.stdin", io.StringIO("\n".join(lines) + "\n"))
        assert main([]) == 3
        documents = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
        assert [d["exit_code"] for d in documents] == [0, 1, 3]

    def test_parallel_batch_matches_serial(self, capsys, monkeypatch):
        lines = [
            json.dumps({"command": "conic", "payload": {"a": "2", "b": "7"}}),
            json.dumps({"command": "symbol", "payload": {"pi": "-1", "rho": "-1"}}),
            json.dumps({"command": "witness", "payload": {"a": "2", "b": "2", "c": "1", "d": "3"}}),
            json.dumps({"command": "conic", "payload": {"a": "3", "b": "5"}}),
            "not json",
        ]
        text = "\n".join(lines) + "\n"
        monkeypatch.setattr("sys.stdin", io.StringIO(text))
        serial_code = main([])
        serial = capsys.readouterr().out
        monkeypatch.setattr("sys.stdin", io.StringIO(text))
        parallel_code = main(["--jobs", "2"])
        parallel = capsys.readouterr().out
        assert serial_code == parallel_code == 3
        assert parallel == serial


class TestWitnessRoundTrip:
    def test_witness_passes_verify(self, base_config):
        document = execute_args("witness", ["2", "2", "1", "3"], base_config)
        result = document["result"]
        assert result["albert_certificate"] is not None
        assert result["conic_point"] is not None
        assert len(result["conic_point"]) == 3
        alpha, delta = ",".join(result["alpha"]), ",".join(result["delta"])
        checked = execute_args(
            "verify", ["2", "2", "1", "3", f"alpha={alpha}", f"delta={delta}"], base_config)
        assert checked["exit_code"] == 0
        assert checked["result"]["accepted"] is True

    def test_generated_witness_passes_verify(self, base_config):
        generated = execute_args("generate", ["1"], base_config)
        (instance,) = generated["result"]["instances"]
        quadruple = [str(instance[k]) for k in ("a", "b", "c", "d")]
        certificate = [f"alpha={','.join(instance['alpha'])}", f"delta={','.join(instance['delta'])}"]
        document = execute_args("witness", quadruple + certificate, base_config)
        assert document["exit_code"] == 0
        result = document["result"]
        alpha, delta = ",".join(result["alpha"]), ",".join(result["delta"])
        checked = execute_args("verify", quadruple + [f"alpha={alpha}", f"delta={delta}"], base_config)
        assert checked["exit_code"] == 0

"""Command-line interface: commands, exit codes, output stability."""

import io
import json
import pathlib
import subprocess
import sys

import pytest

from corelucid.cli import main
from corelucid.contexts import SimpleContext
from corelucid.engine import Evaluator, EvaluatorConfig
from corelucid.parser import parse_surface
from corelucid.pipeline import PROVIDERS_ENV_VAR
from corelucid.translate import translate_to_core

DATA = pathlib.Path(__file__).parent / "data"
LISTING = str(DATA / "mixed.ipl")
NAT = str(DATA / "nat.ipl")
MANIFEST = str(DATA / "mixed.manifest")


@pytest.fixture(autouse=True)
def no_env_manifest(monkeypatch):
    monkeypatch.delenv(PROVIDERS_ENV_VAR, raising=False)


def run_cli(argv, stdin="", monkeypatch=None, capsys=None):
    if monkeypatch is not None:
        monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestRun:
    def test_nat_at_seven(self, capsys):
        code, out, _ = run_cli(["run", NAT, "--context", "{t:7}"],
                               capsys=capsys)
        assert (code, out) == (0, "7\n")

    def test_nat_at_zero(self, capsys):
        code, out, _ = run_cli(["run", NAT, "--context", "{t:0}"],
                               capsys=capsys)
        assert (code, out) == (0, "0\n")

    def test_default_context_is_empty(self, capsys):
        code, out, _ = run_cli(["run", NAT], capsys=capsys)
        assert (code, out) == (0, "0\n")

    def test_stdin_expression(self, capsys, monkeypatch):
        code, out, _ = run_cli(["run", "-"], stdin="1 + 2 * 3",
                               monkeypatch=monkeypatch, capsys=capsys)
        assert (code, out) == (0, "7\n")

    def test_missing_providers_exit_one(self, capsys):
        code, out, err = run_cli(["run", LISTING], capsys=capsys)
        assert code == 1
        assert out == ""
        assert "MissingProvider" in err
        assert "bar, f1, foo" in err

    def test_manifest_flag(self, capsys):
        code, out, _ = run_cli(["run", LISTING, "--providers", MANIFEST],
                               capsys=capsys)
        assert (code, out) == (0, "float32<4.0>\n")

    def test_manifest_environment_variable(self, capsys, monkeypatch):
        monkeypatch.setenv(PROVIDERS_ENV_VAR, MANIFEST)
        code, out, _ = run_cli(["run", LISTING], capsys=capsys)
        assert (code, out) == (0, "float32<4.0>\n")

    def test_special_prints_location_and_fails(self, capsys, monkeypatch):
        code, out, _ = run_cli(["run", "-"], stdin="1 / 0",
                               monkeypatch=monkeypatch, capsys=capsys)
        assert code == 1
        assert out == "special<arith> at <stdin>:1\n"

    def test_json_output(self, capsys):
        code, out, _ = run_cli(
            ["run", NAT, "--context", "{t:4}", "--json",
             "--warehouse-stats"], capsys=capsys)
        assert code == 0
        payload = json.loads(out)
        assert payload["ok"] is True
        (result,) = payload["results"]
        assert result["value"] == "4"
        assert result["tag"] == "OBJECTIVELUCID"
        assert result["stats"]["entries"] == 5

    def test_diagnostics_exit_one(self, capsys, monkeypatch):
        source = pathlib.Path(LISTING).read_text().replace(
            "bar(B, C)", "bar(B)")
        code, out, err = run_cli(["run", "-", "--providers", MANIFEST],
                                 stdin=source, monkeypatch=monkeypatch,
                                 capsys=capsys)
        assert code == 1
        assert "ArityMismatch" in err

    def test_eager_modes_diverge_on_impure_tags(self, capsys, monkeypatch):
        src = "X @ {d:1 / 0, q:2} where q = 5; X = 0; end"
        code_c, out_c, _ = run_cli(
            ["run", "-", "--eager-mode", "context"], stdin=src,
            monkeypatch=monkeypatch, capsys=capsys)
        code_d, out_d, _ = run_cli(
            ["run", "-", "--eager-mode", "dimension"], stdin=src,
            monkeypatch=monkeypatch, capsys=capsys)
        assert code_c == code_d == 1
        assert out_c.startswith("special<arith>")
        assert out_d.startswith("special<typeerr>")

    def test_max_depth_is_honoured(self, capsys, monkeypatch):
        src = "N where N = N @ {t:#t + 1}; end"
        code, _, err = run_cli(["run", "-", "--max-depth", "50"],
                               stdin=src, monkeypatch=monkeypatch,
                               capsys=capsys)
        assert code == 1
        assert "DepthExceeded" in err


class TestStructureCommands:
    def test_segments_listing(self, capsys):
        code, out, _ = run_cli(["segments", LISTING], capsys=capsys)
        assert code == 0
        lines = out.splitlines()
        assert len(lines) == 5
        assert [l.split()[0] for l in lines] == [
            "TYPEDECL", "FUNCDECL", "JAVA", "CPP", "OBJECTIVELUCID"]
        assert lines[0] == "TYPEDECL 4-7"
        assert lines[4].startswith("OBJECTIVELUCID 37-")

    def test_segments_of_bare_expression(self, capsys, monkeypatch):
        code, out, _ = run_cli(["segments", "-"], stdin="1 + 2\n",
                               monkeypatch=monkeypatch, capsys=capsys)
        assert (code, out) == (0, "EXPRESSION 1-1\n")

    def test_segments_json(self, capsys):
        code, out, _ = run_cli(["segments", LISTING, "--json"],
                               capsys=capsys)
        payload = json.loads(out)
        assert payload["segments"][0] == {
            "tag": "TYPEDECL", "start": 4, "end": 7}

    def test_translate_first(self, capsys, monkeypatch):
        code, out, _ = run_cli(["translate", "-"], stdin="first X",
                               monkeypatch=monkeypatch, capsys=capsys)
        assert code == 0
        assert "X @ {t:0}" in out

    def test_translate_hybrid_prints_markers(self, capsys):
        code, out, _ = run_cli(["translate", NAT], capsys=capsys)
        assert code == 0
        assert out.splitlines()[0] == "#OBJECTIVELUCID"
        assert "if #t = 0 then" in out

    def test_parse_plain(self, capsys, monkeypatch):
        code, out, _ = run_cli(["parse", "-"], stdin="1 + 2 * x",
                               monkeypatch=monkeypatch, capsys=capsys)
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "BinaryOp op='+'"
        assert "  Literal value='1'" in lines
        assert "    Identifier name='x'" in lines

    def test_parse_json(self, capsys, monkeypatch):
        code, out, _ = run_cli(["parse", "-", "--json"], stdin="next x",
                               monkeypatch=monkeypatch, capsys=capsys)
        payload = json.loads(out)
        ast = payload["segments"][0]["ast"]
        assert ast["node"] == "SurfaceOp"
        assert ast["op"] == "next"

    def test_parse_core_dialect_rejects_surface(self, capsys, monkeypatch):
        code, _, err = run_cli(["parse", "-", "--dialect", "core"],
                               stdin="next x", monkeypatch=monkeypatch,
                               capsys=capsys)
        assert code == 1
        assert "ParseError" in err

    def test_check_listing(self, capsys):
        code, out, _ = run_cli(["check", LISTING], capsys=capsys)
        assert code == 0
        for name in ("foo", "bar", "baz", "f1", "myclass"):
            assert name in out
        assert "segment OBJECTIVELUCID: ok" in out

    def test_check_reports_diagnostics(self, capsys, monkeypatch):
        source = pathlib.Path(LISTING).read_text().replace(
            "bar(B, C)", "bar(B, C, C)")
        code, out, _ = run_cli(["check", "-"], stdin=source,
                               monkeypatch=monkeypatch, capsys=capsys)
        assert code == 1
        assert "ArityMismatch" in out

    def test_check_json(self, capsys):
        code, out, _ = run_cli(["check", LISTING, "--json"], capsys=capsys)
        payload = json.loads(out)
        assert payload["types"] == ["myclass"]
        names = [f["name"] for f in payload["functions"]]
        assert names == ["bar", "f1", "foo"]
        bar = payload["functions"][0]
        assert bar["alias"] == "baz"
        assert bar["url"].startswith("ftp://")
        assert payload["segments"][0]["ok"] is True


class TestUsageErrors:
    def test_unknown_command(self, capsys):
        assert run_cli(["wat"], capsys=capsys)[0] == 2

    def test_bad_context_literal(self, capsys, monkeypatch):
        code, _, err = run_cli(["run", "-", "--context", "{t:}"],
                               stdin="1", monkeypatch=monkeypatch,
                               capsys=capsys)
        assert code == 2
        assert "--context" in err

    def test_context_set_rejected(self, capsys, monkeypatch):
        code, _, err = run_cli(
            ["run", "-", "--context", "{{d:0}, {d:1}}"], stdin="1",
            monkeypatch=monkeypatch, capsys=capsys)
        assert code == 2

    def test_missing_input_file(self, capsys):
        code, _, err = run_cli(["run", "no-such-file.ipl"], capsys=capsys)
        assert code == 2
        assert "no such file" in err

    def test_bad_flag_value(self, capsys):
        assert run_cli(["run", NAT, "--eager-mode", "sideways"],
                       capsys=capsys)[0] == 2


class TestRepl:
    def test_expressions_per_line(self, capsys, monkeypatch):
        code, out, _ = run_cli(
            ["repl", "--context", "{t:5}"],
            stdin="1 + 2\n#t\n\n4 / 0\n",
            monkeypatch=monkeypatch, capsys=capsys)
        assert code == 0
        assert out == "3\n5\nspecial<arith> at <repl>:1\n"

    def test_parse_errors_do_not_stop_the_session(self, capsys, monkeypatch):
        code, out, err = run_cli(
            ["repl"], stdin="1 +\n2\n", monkeypatch=monkeypatch,
            capsys=capsys)
        assert code == 0
        assert out == "2\n"
        assert "error:" in err

    def test_warehouse_persists_across_lines(self, capsys, monkeypatch):
        line = "N where N = if #t = 0 then 0 else N @ {t:#t - 1} + 1; end"
        code, out, err = run_cli(
            ["repl", "--context", "{t:6}", "--warehouse-stats"],
            stdin=line + "\n" + line + "\n",
            monkeypatch=monkeypatch, capsys=capsys)
        assert code == 0
        assert out == "6\n6\n"
        stats = json.loads(err.strip().splitlines()[-1])
        assert stats["hits"] > 0  # second line reused stored entries

    def test_surface_operators_are_not_core(self, capsys, monkeypatch):
        code, out, err = run_cli(["repl"], stdin="first x\n",
                                 monkeypatch=monkeypatch, capsys=capsys)
        assert code == 0
        assert out == ""
        assert "error:" in err


class TestTraceContract:
    def test_trace_line_count_matches_engine_counter(self, capsys):
        code, _, err = run_cli(
            ["run", NAT, "--context", "{t:9}", "--trace"], capsys=capsys)
        assert code == 0
        printed = [l for l in err.splitlines() if l]

        body = pathlib.Path(NAT).read_text().split("#OBJECTIVELUCID")[1]
        core = translate_to_core(parse_surface(body))
        engine = Evaluator(EvaluatorConfig(trace_enabled=True))
        engine.evaluate(core, SimpleContext({"t": 9}))
        assert len(printed) == len(engine.trace)

    def test_trace_json_counter_field(self, capsys):
        code, out, _ = run_cli(
            ["run", NAT, "--context", "{t:3}", "--trace", "--json"],
            capsys=capsys)
        payload = json.loads(out)
        (result,) = payload["results"]
        assert result["traceEvents"] == len(result["trace"])
        assert result["traceEvents"] > 0


class TestReproducibility:
    def run_subprocess(self, argv, env=None):
        import os
        full_env = dict(os.environ)
        full_env.pop(PROVIDERS_ENV_VAR, None)
        if env:
            full_env.update(env)
        return subprocess.run(
            [sys.executable, "-m", "corelucid.cli", *argv],
            capture_output=True, env=full_env)

    def test_identical_bytes_across_runs(self):
        argv = ["run", LISTING, "--providers", MANIFEST, "--json",
                "--warehouse-stats", "--trace"]
        first = self.run_subprocess(argv)
        second = self.run_subprocess(argv)
        assert first.returncode == second.returncode == 0
        assert first.stdout == second.stdout
        assert first.stderr == second.stderr

    def test_console_entry_point(self):
        done = self.run_subprocess(["run", NAT, "--context", "{t:7}"])
        assert done.returncode == 0
        assert done.stdout == b"7\n"

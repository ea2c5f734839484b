import json
import os
import subprocess
import sys
from argparse import Namespace

import pytest

from mzvstar.cli import (
    EXIT_FAILED_CASES,
    EXIT_OK,
    EXIT_USAGE,
    build_parser,
    main,
    resolve_settings,
)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


CUT = ("--cutoff", "20000")


class TestEval:
    def test_star_2_1(self, capsys):
        code, out, err = run_cli(capsys, "eval", "zetastar(2,1)", *CUT)
        assert code == EXIT_OK
        assert "2.4041138063" in out
        assert "method = direct" in out
        assert "terms = 20000" in err

    def test_divergent_index_exits_2(self, capsys):
        code, out, err = run_cli(capsys, "eval", "zeta(1,2)")
        assert code == EXIT_USAGE
        assert "divergent" in err

    def test_li_extension(self, capsys):
        code, out, _ = run_cli(capsys, "eval", "li(2,1)")
        assert code == EXIT_OK
        assert "0.09475300423" in out
        assert "method = geometric" in out

    def test_parse_error_exits_2(self, capsys):
        code, _, err = run_cli(capsys, "eval", "zeta(1,,2)")
        assert code == EXIT_USAGE
        assert err.strip()

    def test_zero_entry_exits_2(self, capsys):
        code, _, _ = run_cli(capsys, "eval", "zeta(0,1)")
        assert code == EXIT_USAGE

    def test_explicit_accel(self, capsys):
        code, out, _ = run_cli(capsys, "eval", "zetastar(-1)", "--method", "accel")
        assert code == EXIT_OK
        assert "method = accelerated" in out
        assert "-0.6931471805" in out

    def test_accel_on_positive_head_exits_2(self, capsys):
        code, _, _ = run_cli(capsys, "eval", "zeta(2,1)", "--method", "accel")
        assert code == EXIT_USAGE


class TestClosedForm:
    def test_star_bar1_m1(self, capsys):
        code, out, _ = run_cli(capsys, "closed-form", "star-bar1", "1")
        assert code == EXIT_OK
        lines = out.splitlines()
        assert lines[0] == "1/8*z3 + 1/2*z2*ln2 - 1/6*ln2^3"
        diff_line = [l for l in lines if l.startswith("|difference|")][0]
        mantissa = diff_line.split("=")[1].strip()
        assert mantissa.startswith("0.0") or "e-" in mantissa

    def test_euler_star(self, capsys):
        code, out, _ = run_cli(capsys, "closed-form", "euler-star", "2")
        assert code == EXIT_OK
        assert out.splitlines()[0] == "2*z3"

    def test_three_bar(self, capsys):
        code, out, _ = run_cli(capsys, "closed-form", "three-bar", "0", "0")
        assert code == EXIT_OK
        assert out.splitlines()[0] == "-1/4*z3 + 1/2*z2*ln2 - 1/6*ln2^3"

    def test_integral_family_checks_against_quadrature(self, capsys):
        code, out, _ = run_cli(capsys, "closed-form", "integral-i", "1")
        assert code == EXIT_OK
        assert "independent (quadrature)" in out

    def test_raw_skips_reduction(self, capsys):
        code, out, _ = run_cli(capsys, "closed-form", "star-bar1-ones", "1", "--raw")
        assert code == EXIT_OK
        assert out.splitlines()[0] == "-li2"

    def test_unknown_family_exits_2(self, capsys):
        assert run_cli(capsys, "closed-form", "nosuch", "1")[0] == EXIT_USAGE

    def test_bad_arity_exits_2(self, capsys):
        assert run_cli(capsys, "closed-form", "euler-star")[0] == EXIT_USAGE

    def test_out_of_range_exits_2(self, capsys):
        assert run_cli(capsys, "closed-form", "euler-star", "1")[0] == EXIT_USAGE


class TestVerify:
    def test_euler_json(self, capsys, tmp_path):
        out_path = tmp_path / "report.json"
        code, out, _ = run_cli(capsys, "verify", "--suite", "euler", *CUT,
                               "--out", str(out_path))
        assert code == EXIT_OK
        payload = json.loads(out_path.read_text())
        assert payload["summary"] == {"total": 7, "passed": 7, "failed": 0}
        assert "7/7 passed" in out

    def test_csv_format(self, capsys, tmp_path):
        out_path = tmp_path / "report.csv"
        code, _, _ = run_cli(capsys, "verify", "--suite", "stirling",
                             "--format", "csv", "--out", str(out_path))
        assert code == EXIT_OK
        lines = out_path.read_text().strip().splitlines()
        assert len(lines) == 31  # header + 30 rows

    def test_unknown_suite_exits_2(self, capsys):
        assert run_cli(capsys, "verify", "--suite", "nosuch")[0] == EXIT_USAGE

    def test_failed_case_exits_1(self, capsys, monkeypatch):
        from mzvstar import verify as vmod
        from mzvstar.symbolic import ConstantExpr

        fake = vmod.IdentityCase(
            "synthetic/false", "euler",
            vmod.ExprPlan(ConstantExpr.rational(1)),
            vmod.ExprPlan(ConstantExpr.rational(2)), "1e-10")
        monkeypatch.setattr(vmod, "select_cases", lambda s, b=None: [fake])
        code, _, _ = run_cli(capsys, "verify", "--suite", "euler")
        assert code == EXIT_FAILED_CASES

    def test_text_format_stdout(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--suite", "genfun",
                               "--format", "text")
        assert code == EXIT_OK
        assert "10/10 passed" in out


class TestStirlingCmd:
    def test_ok(self, capsys):
        code, out, _ = run_cli(capsys, "stirling", "--max", "12")
        assert code == EXIT_OK
        assert "all exact" in out


class TestQuad:
    def test_integral_i(self, capsys):
        code, out, _ = run_cli(capsys, "quad", "integral-i", "2")
        assert code == EXIT_OK
        assert "closed form" in out and "(pass)" in out

    def test_pow_log1m_negative_x(self, capsys):
        code, out, _ = run_cli(capsys, "quad", "pow-log1m", "3", "2", "-1")
        assert code == EXIT_OK
        assert "(pass)" in out

    def test_rational_x(self, capsys):
        code, out, _ = run_cli(capsys, "quad", "pow-log", "2", "3", "1/3")
        assert code == EXIT_OK

    def test_unknown_integrand_exits_2(self, capsys):
        assert run_cli(capsys, "quad", "nosuch")[0] == EXIT_USAGE

    def test_wrong_arity_exits_2(self, capsys):
        assert run_cli(capsys, "quad", "integral-i")[0] == EXIT_USAGE


class TestCache:
    def test_bit_identical_and_no_summation_on_hit(self, capsys, tmp_path):
        cache = tmp_path / "cache.jsonl"
        argv = ["eval", "zetastar(2,1)", *CUT, "--cache", str(cache)]
        code1, out1, err1 = run_cli(capsys, *argv)
        code2, out2, err2 = run_cli(capsys, *argv)
        assert code1 == code2 == EXIT_OK
        assert out1 == out2  # stable payload is bit-identical
        assert "cache = miss" in err1 and "terms = 20000" in err1
        assert "cache = hit" in err2 and "terms = 0" in err2
        assert len(cache.read_text().strip().splitlines()) == 1

    def test_last_write_wins(self, tmp_path):
        from mzvstar.cli import ResultCache
        cache = ResultCache(str(tmp_path / "c.jsonl"))
        cache.put("k", "1.0", "0", "direct")
        cache.put("k", "2.0", "0", "direct")
        fresh = ResultCache(str(tmp_path / "c.jsonl"))
        assert fresh.get("k")["value"] == "2.0"

    def test_torn_lines_tolerated(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"key": "a", "value": "1", "err": "0", "method": "m"}\n'
                        '{"key": "b", "val\n')
        from mzvstar.cli import ResultCache
        cache = ResultCache(str(path))
        assert cache.get("a") is not None and cache.get("b") is None


class TestSettings:
    def _args(self, **kw):
        base = dict(prec=None, cutoff=None, cache=None, out=None,
                    format=None, jobs=None, config=None)
        base.update(kw)
        return Namespace(**base)

    def test_defaults(self):
        s = resolve_settings(self._args(), env={})
        assert s.prec == 192 and s.cutoff == 100_000 and s.cache is None

    def test_env_beats_config(self, tmp_path):
        conf = tmp_path / "mzv.conf"
        conf.write_text("prec=96\ncutoff=5000\n")
        s = resolve_settings(self._args(config=str(conf)),
                             env={"MZV_PREC": "128"})
        assert s.prec == 128 and s.cutoff == 5000

    def test_flag_beats_env(self, tmp_path):
        conf = tmp_path / "mzv.conf"
        conf.write_text("prec=96\n")
        s = resolve_settings(self._args(prec=160, config=str(conf)),
                             env={"MZV_PREC": "128"})
        assert s.prec == 160

    def test_cache_env(self):
        s = resolve_settings(self._args(), env={"MZV_CACHE": "/tmp/c.jsonl"})
        assert s.cache == "/tmp/c.jsonl"

    def test_config_comments_and_blanks(self, tmp_path):
        conf = tmp_path / "mzv.conf"
        conf.write_text("# comment\n\nprec=96\n")
        s = resolve_settings(self._args(config=str(conf)), env={})
        assert s.prec == 96

    def test_bad_config_line(self, tmp_path):
        from mzvstar import DomainError
        conf = tmp_path / "mzv.conf"
        conf.write_text("prec 96\n")
        with pytest.raises(DomainError):
            resolve_settings(self._args(config=str(conf)), env={})


def test_console_entry_point_subprocess(tmp_path):
    env = dict(os.environ)
    code = subprocess.run(
        [sys.executable, "-m", "mzvstar.cli", "eval", "li(4)"],
        capture_output=True, text=True, env=env)
    assert code.returncode == 0
    assert "0.51747906167" in code.stdout


def test_parser_help_builds():
    build_parser().format_help()

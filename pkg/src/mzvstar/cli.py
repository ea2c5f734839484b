"""Command-line front end.

Commands
--------
``eval``         evaluate an index (or ``li(s1,...,sk)`` at 1/2) numerically
``closed-form``  print a family's exact closed form plus a numeric cross-check
``verify``       run identity suites and write a JSON/CSV report
``stirling``     exact cross-check of first-kind Stirling numbers
``quad``         tanh-sinh probe of one integral, with its closed-form side

Configuration precedence: command-line flags, then ``MZV_*`` environment
variables, then a ``key=value`` config file, then built-in defaults.

Stable payload goes to stdout; diagnostics (terms used, cache status) go to
stderr so cached re-runs can reproduce stdout bit for bit.
"""

from __future__ import annotations

import argparse
import fcntl
import json
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import series, symbolic, verify
from .core import (
    DEFAULT_PREC,
    DomainError,
    IndexSyntaxError,
    MzvError,
    parse_index,
    to_decimal,
)
from .quadrature import INTEGRAND_KINDS, IntegrandSpec, check_lemma, integrate
from .series import TruncationOptions
from .symbolic import Family

EXIT_OK = 0
EXIT_FAILED_CASES = 1
EXIT_USAGE = 2


@dataclass
class Settings:
    prec: int = DEFAULT_PREC
    cutoff: int = 100_000
    accel_terms: int = 64
    cache: Optional[str] = None
    out: Optional[str] = None
    fmt: str = "json"
    jobs: int = 1

    @property
    def options(self) -> TruncationOptions:
        return TruncationOptions(cutoff=self.cutoff, accel_terms=self.accel_terms)


_ENV_KEYS = {"prec": "MZV_PREC", "cutoff": "MZV_CUTOFF", "cache": "MZV_CACHE",
             "jobs": "MZV_JOBS", "format": "MZV_FORMAT"}
_INT_KEYS = {"prec", "cutoff", "jobs"}


def _read_config_file(path: str) -> dict:
    conf = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DomainError(f"malformed config line: {line!r}")
        key, _, value = line.partition("=")
        conf[key.strip()] = value.strip()
    return conf


def resolve_settings(args: argparse.Namespace,
                     env: Optional[dict] = None) -> Settings:
    """Apply flags > environment > config file > defaults."""
    env = os.environ if env is None else env
    layered: dict = {}
    if getattr(args, "config", None):
        layered.update(_read_config_file(args.config))
    for key, env_key in _ENV_KEYS.items():
        if env_key in env:
            layered[key] = env[env_key]
    for key in ("prec", "cutoff", "cache", "out", "format", "jobs"):
        flag = getattr(args, key, None)
        if flag is not None:
            layered[key] = flag
    s = Settings()
    for key, value in layered.items():
        if key in _INT_KEYS:
            value = int(value)
        if key == "format":
            if value not in ("json", "csv", "text"):
                raise DomainError(f"unknown format {value!r}")
            s.fmt = value
        elif key == "prec":
            s.prec = value
        elif key == "cutoff":
            s.cutoff = value
        elif key == "cache":
            s.cache = str(value)
        elif key == "out":
            s.out = str(value)
        elif key == "jobs":
            s.jobs = value
        elif key == "accel_terms":
            s.accel_terms = int(value)
        else:
            raise DomainError(f"unknown configuration key {key!r}")
    return s


# ---------------------------------------------------------------------------
# result cache: append-only JSON lines, last write wins, flock-serialized
# ---------------------------------------------------------------------------

class ResultCache:
    def __init__(self, path: str):
        self.path = Path(path)
        self.snapshot: dict[str, dict] = {}
        if self.path.exists():
            for line in self.path.read_text().splitlines():
                line = line.strip()
                if not line:
                    continue
                try:
                    entry = json.loads(line)
                    self.snapshot[entry["key"]] = entry
                except (ValueError, KeyError):
                    continue  # tolerate torn writes

    def get(self, key: str) -> Optional[dict]:
        return self.snapshot.get(key)

    def put(self, key: str, value: str, err: str, method: str) -> None:
        entry = {"key": key, "value": value, "err": err, "method": method,
                 "ts": time.time()}
        lock_path = self.path.with_suffix(self.path.suffix + ".lock")
        with open(lock_path, "w") as lock:
            fcntl.flock(lock, fcntl.LOCK_EX)
            try:
                with open(self.path, "a") as fh:
                    fh.write(json.dumps(entry) + "\n")
                    fh.flush()
            finally:
                fcntl.flock(lock, fcntl.LOCK_UN)
        self.snapshot[key] = entry


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _parse_eval_target(text: str):
    """An index, or the li(s1,...,sk) extension for Li at 1/2."""
    if text.startswith("li(") and text.endswith(")"):
        body = text[3:-1]
        if not body:
            raise IndexSyntaxError("li(...) needs at least one exponent")
        exps = []
        for tok in body.split(","):
            try:
                v = int(tok)
            except ValueError:
                raise IndexSyntaxError(f"cannot parse li exponent {tok!r}") from None
            if v < 1:
                raise DomainError("li(...) exponents must be positive integers")
            exps.append(v)
        return ("mpl", tuple(exps))
    return ("index", parse_index(text))


def cmd_eval(args: argparse.Namespace) -> int:
    s = resolve_settings(args)
    kind, target = _parse_eval_target(args.index)
    method = args.method
    if kind == "index" and not target.admissible:
        print(f"divergent index: {target.text}", file=sys.stderr)
        return EXIT_USAGE
    key_text = target.text if kind == "index" else f"li({','.join(map(str, target))})"
    cache_key = f"{kind}|{key_text}|{method}|{s.prec}|{s.cutoff}"
    cache = ResultCache(s.cache) if s.cache else None
    if cache is not None:
        hit = cache.get(cache_key)
        if hit is not None:
            print(f"value = {hit['value']}")
            print(f"err <= {hit['err']}")
            print(f"method = {hit['method']}")
            print("cache = hit; terms = 0", file=sys.stderr)
            return EXIT_OK
    if kind == "mpl":
        res = series.eval_mpl_half(list(target), s.prec)
    elif method == "direct":
        res = series.eval_direct(target, s.options, s.prec)
    elif method == "accel":
        res = series.eval_accelerated(target, s.options, s.prec)
    else:
        res = series.eval_auto(target, s.options, s.prec)
    value = to_decimal(res.value, s.prec)
    err = to_decimal(res.err, s.prec)
    print(f"value = {value}")
    print(f"err <= {err}")
    print(f"method = {res.method}")
    print(f"cache = {'miss' if cache else 'off'}; terms = {res.terms_used}",
          file=sys.stderr)
    if cache is not None:
        cache.put(cache_key, value, err, res.method)
    return EXIT_OK


_FAMILY_ARITY = {
    Family.EULER_STAR: 1, Family.STAR_BAR1_ONES_BAR1: 1,
    Family.STAR_2_ONES_BAR1: 1, Family.STAR_BAR1_ONES: 1,
    Family.STAR_2_ONES: 1, Family.LI_2_ONES: 1, Family.MZV_BAR1_ONES_BAR1: 1,
    Family.INTEGRAL_I: 1, Family.INTEGRAL_J: 1, Family.THREE_BAR: 2,
    Family.MZV_BAR1_ONE_2: 0,
}


def cmd_closed_form(args: argparse.Namespace) -> int:
    s = resolve_settings(args)
    try:
        family = Family(args.family)
    except ValueError:
        print(f"unknown family {args.family!r}; choose from "
              f"{', '.join(f.value for f in Family)}", file=sys.stderr)
        return EXIT_USAGE
    if len(args.params) != _FAMILY_ARITY[family]:
        print(f"family {family.value} takes {_FAMILY_ARITY[family]} parameter(s)",
              file=sys.stderr)
        return EXIT_USAGE
    expr = symbolic.closed_form(family, *args.params)
    if not args.raw:
        expr = symbolic.canonicalize(expr, reduce_low_li=True, prec=s.prec)
    print(expr.render())
    sym = symbolic.expr_eval(expr, s.prec)
    print(f"value = {to_decimal(sym.value, s.prec)}")
    target = symbolic.family_index(family, *args.params)
    if target is not None:
        if target[0] == "index":
            ref = series.eval_auto(parse_index(target[1]), s.options, s.prec)
        else:
            ref = series.eval_mpl_half(list(target[1]), s.prec)
        gap = abs(sym.value - ref.value)
        print(f"independent ({ref.method}) = {to_decimal(ref.value, s.prec)}")
        print(f"|difference| = {to_decimal(gap, s.prec)}")
    else:
        spec_kind = ("integral-i" if family == Family.INTEGRAL_I else "integral-j")
        spec = IntegrandSpec(spec_kind, m=args.params[0], x=Fraction(1))
        ref = integrate(spec, s.prec)
        gap = abs(sym.value - ref.value)
        print(f"independent (quadrature) = {to_decimal(ref.value, s.prec)}")
        print(f"|difference| = {to_decimal(gap, s.prec)}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    s = resolve_settings(args)
    try:
        report = verify.run_suite(args.suite, s.options, s.prec, jobs=s.jobs,
                                  tolerance_scale=args.tolerance_scale)
    except MzvError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    if s.fmt == "json":
        payload = json.dumps(report.to_json_obj(), indent=2)
    elif s.fmt == "csv":
        payload = report.to_csv()
    else:
        payload = report.to_text()
    if s.out:
        Path(s.out).write_text(payload + ("\n" if not payload.endswith("\n") else ""))
        summary = report.summary
        print(f"{summary['passed']}/{summary['total']} passed -> {s.out}")
    else:
        print(payload)
    return EXIT_OK if report.all_passed else EXIT_FAILED_CASES


def cmd_stirling(args: argparse.Namespace) -> int:
    resolve_settings(args)
    bad = [n for n in range(1, args.max + 1) if not series.check_stirling_identity(n)]
    if bad:
        print(f"mismatch at n in {bad}")
        return EXIT_FAILED_CASES
    print(f"stirling rows 1..{args.max}: all exact")
    return EXIT_OK


def cmd_quad(args: argparse.Namespace) -> int:
    s = resolve_settings(args)
    kind = args.integrand
    if kind not in INTEGRAND_KINDS:
        print(f"unknown integrand {kind!r}; choose from "
              f"{', '.join(INTEGRAND_KINDS)}", file=sys.stderr)
        return EXIT_USAGE
    names = INTEGRAND_KINDS[kind]
    if len(args.params) != len(names):
        print(f"integrand {kind} takes parameters {' '.join(names)}",
              file=sys.stderr)
        return EXIT_USAGE
    try:
        kwargs = {}
        for name, tok in zip(names, args.params):
            kwargs[name] = Fraction(tok) if name == "x" else int(tok)
        spec = IntegrandSpec(kind, **kwargs)
    except (ValueError, ZeroDivisionError, DomainError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    res = integrate(spec, s.prec)
    print(f"value = {to_decimal(res.value, s.prec)}")
    print(f"err <= {to_decimal(res.err, s.prec)}")
    print(f"abscissae = {res.terms_used}", file=sys.stderr)
    if kind == "integral-j" and kwargs["x"] != 1:
        return EXIT_OK  # symbolic side exists only at x = 1
    record = check_lemma(spec, s.prec)
    print(f"closed form = {to_decimal(record.rhs, s.prec)}")
    print(f"|difference| = {to_decimal(record.diff, s.prec)} "
          f"({'pass' if record.passed else 'FAIL'})")
    return EXIT_OK if record.passed else EXIT_FAILED_CASES


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--prec", type=int, default=None, help="working precision in bits")
    p.add_argument("--cutoff", type=int, default=None, help="outer series cutoff N")
    p.add_argument("--cache", default=None, help="path of the JSONL result cache")
    p.add_argument("--out", default=None, help="write output to this path")
    p.add_argument("--format", default=None, choices=("json", "csv", "text"))
    p.add_argument("--jobs", type=int, default=None, help="parallel case workers")
    p.add_argument("--config", default=None, help="key=value configuration file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mzv",
        description="evaluate and verify multiple zeta (star) values")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate an index numerically")
    p.add_argument("index", help='e.g. "zetastar(2,1)", "zeta(-1,1,-1)", "li(2,1)"')
    p.add_argument("--method", default="auto", choices=("auto", "direct", "accel"))
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("closed-form", help="print an exact closed form")
    p.add_argument("family", help=", ".join(f.value for f in Family))
    p.add_argument("params", nargs="*", type=int)
    p.add_argument("--raw", action="store_true", help="skip canonicalization")
    _add_common(p)
    p.set_defaults(func=cmd_closed_form)

    p = sub.add_parser("verify", help="run identity suites")
    p.add_argument("--suite", default="all",
                   help=f"one of {', '.join(verify.SUITES)} or 'all'")
    p.add_argument("--tolerance-scale", type=float, default=1.0)
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("stirling", help="exact Stirling cross-check")
    p.add_argument("--max", type=int, default=30)
    _add_common(p)
    p.set_defaults(func=cmd_stirling)

    p = sub.add_parser("quad", help="tanh-sinh probe of one integral")
    p.add_argument("integrand", help=", ".join(INTEGRAND_KINDS))
    p.add_argument("params", nargs="*")
    _add_common(p)
    p.set_defaults(func=cmd_quad)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (IndexSyntaxError, DomainError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except MzvError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

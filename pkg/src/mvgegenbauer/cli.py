"""``mvgeg``: evaluate, tabulate and verify matrix Gegenbauer polynomials.

Exit codes: 0 success, 1 a verification (or route guard) failed, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import bench as bench_mod
from . import hyper2h1, mvop, racah, suites
from .matpoly import MatrixPolynomial, dumps
from .params import WeightParams, format_ell, parse_ell
from .weight import ldu_factors, weight_pol

ROUTES = ("recurrence", "hyper", "racah")
FORMS = ("P", "R", "calR")


class UsageError(ValueError):
    """Bad flags or configuration; reported with exit code 2."""


@dataclass
class RunConfig:
    two_ell: int = 1
    nu: float = 1.0
    n: int = 0
    n_max: int = 6
    ell_max_twice: int = 3
    routes: tuple = ("recurrence",)
    tolerances: dict = field(default_factory=dict)
    tol: float | None = None
    output_format: str = "json"
    seed: int = 0

    def validate(self) -> None:
        if self.two_ell < 0:
            raise UsageError("l must be a nonnegative half-integer")
        if not self.nu > 0:
            raise UsageError(
                f"nu must be > 0 (got {self.nu:g}): the weight is positive definite on (-1, 1) only for nu > 0")
        if self.n < 0 or self.n_max < 0:
            raise UsageError("degrees must be nonnegative")
        if self.ell_max_twice < 1:
            raise UsageError("--ell-max must be at least 1/2")
        bad = [r for r in self.routes if r not in ROUTES]
        if bad or not self.routes:
            raise UsageError(f"unknown route {bad[0] if bad else ''!r}; choose from {', '.join(ROUTES)}")
        if self.output_format not in ("json", "csv"):
            raise UsageError("--format must be json or csv")
        for name, t in list(self.tolerances.items()) + [("--tol", self.tol)]:
            if t is not None and not t > 0:
                raise UsageError(f"tolerance for {name} must be positive")

    def params(self) -> WeightParams:
        try:
            return WeightParams(self.two_ell, self.nu)
        except ValueError as exc:
            raise UsageError(str(exc)) from None


_CONFIG_KEYS = {"ell", "nu", "n", "nMax", "ellMax", "routes", "tolerances", "outputFormat", "seed", "tol"}


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def _ell(text) -> int:
    try:
        return parse_ell(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _routes(value) -> tuple:
    if isinstance(value, str):
        value = [v.strip() for v in value.split(",") if v.strip()]
    return tuple(value)


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.command == "bench":
        cfg.output_format = "csv"
    data = load_config(args.config) if args.config else {}
    # config file first, then flags on top
    if "ell" in data:
        cfg.two_ell = _ell(data["ell"])
    if "ellMax" in data:
        cfg.ell_max_twice = _ell(data["ellMax"])
    for key, attr in (("nu", "nu"), ("n", "n"), ("nMax", "n_max"), ("seed", "seed"), ("tol", "tol")):
        if key in data:
            setattr(cfg, attr, data[key])
    if "routes" in data:
        cfg.routes = _routes(data["routes"])
    if "tolerances" in data:
        cfg.tolerances = {str(k): float(v) for k, v in dict(data["tolerances"]).items()}
    if "outputFormat" in data:
        cfg.output_format = data["outputFormat"]
    if getattr(args, "ell", None) is not None:
        cfg.two_ell = _ell(args.ell)
    if getattr(args, "ell_max", None) is not None:
        cfg.ell_max_twice = _ell(args.ell_max)
    for attr in ("nu", "n", "n_max", "seed", "tol"):
        v = getattr(args, attr, None)
        if v is not None:
            setattr(cfg, attr, v)
    if getattr(args, "route", None):
        cfg.routes = _routes(args.route)
    if getattr(args, "format", None):
        cfg.output_format = args.format
    try:
        cfg.nu = float(cfg.nu)
        cfg.n, cfg.n_max, cfg.seed = int(cfg.n), int(cfg.n_max), int(cfg.seed)
        cfg.tol = None if cfg.tol is None else float(cfg.tol)
    except (TypeError, ValueError):
        raise UsageError("numeric configuration values expected") from None
    cfg.validate()
    return cfg


# -- output helpers -------------------------------------------------------------

def _g12(v) -> str:
    return f"{float(v):.12g}"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_g12(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _poly_rows(label: tuple, P: MatrixPolynomial):
    for k, c in enumerate(P.coeffs):
        for i in range(P.dim):
            for j in range(P.dim):
                yield (*label, P.var, k, i, j, float(c[i, j]))


# -- subcommands ------------------------------------------------------------------

def _route_poly(route: str, form: str, p: WeightParams, n: int) -> MatrixPolynomial:
    if form == "calR" and route == "racah":
        return racah.calR(p, n)
    if route == "recurrence":
        P = mvop.monic(p, n)
    elif route == "hyper":
        P = hyper2h1.monic_P_2h1(p, n)
    else:
        P = racah.monic_P_racah(p, n)
    if form == "P":
        return P
    R = hyper2h1.R_from_P(P, n)
    return R if form == "R" else R * racah.build_M(p)


def cmd_eval(cfg: RunConfig, args) -> tuple:
    p = cfg.params()
    if args.x is not None:
        W = weight_pol(p)(float(args.x))
        if cfg.output_format == "csv":
            rows = [(float(args.x), i, j, float(W[i, j])) for i in range(p.d) for j in range(p.d)]
            return _csv_text(["x", "i", "j", "W_pol"], rows), 0
        return dumps({"ell": format_ell(p.two_ell), "nu": p.nu, "x": float(args.x), "W_pol": W}, indent=1), 0
    polys = {r: _route_poly(r, args.form, p, cfg.n) for r in cfg.routes}
    if cfg.output_format == "csv":
        rows = [row for r, P in polys.items() for row in _poly_rows((r, args.form), P)]
        return _csv_text(["route", "form", "var", "power", "i", "j", "value"], rows), 0
    out = {"ell": format_ell(p.two_ell), "nu": p.nu, "n": cfg.n, "form": args.form,
           "routes": {r: P.to_dict() for r, P in polys.items()}}
    return dumps(out, indent=1), 0


def cmd_weight(cfg: RunConfig, args) -> tuple:
    p = cfg.params()
    W = weight_pol(p)
    f = ldu_factors(p)
    if cfg.output_format == "csv":
        rows = list(_poly_rows(("W_pol",), W)) + list(_poly_rows(("L",), f.L))
        rows += [("tdiag", "x", 0, k, k, float(t)) for k, t in enumerate(f.tdiag)]
        return _csv_text(["object", "var", "power", "i", "j", "value"], rows), 0
    out = {"ell": format_ell(p.two_ell), "nu": p.nu, "W_pol": W.to_dict(), "L": f.L.to_dict(),
           "tdiag": f.tdiag}
    return dumps(out, indent=1), 0


def cmd_table(cfg: RunConfig, args) -> tuple:
    p = cfg.params()
    H = [np.diag(mvop.norm_matrix(p, n)) for n in range(cfg.n_max + 1)]
    if cfg.output_format == "csv":
        rows = [(n, k, float(h[k])) for n, h in enumerate(H) for k in range(p.d)]
        return _csv_text(["n", "k", "H"], rows), 0
    return dumps({"ell": format_ell(p.two_ell), "nu": p.nu, "H_diag": H}, indent=1), 0


def cmd_verify(cfg: RunConfig, args) -> tuple:
    names = [s.strip() for s in args.suite.split(",") if s.strip()]
    allowed = set(suites.SUITES) | {"all"}
    if not names or any(s not in allowed for s in names) or ("all" in names and len(names) > 1):
        raise UsageError(f"--suite must be one of {', '.join(suites.SUITES)} or all")
    if names == ["all"]:
        names = list(suites.SUITES)
    nus = (cfg.nu,) if args.nu is not None else None
    reports = []
    for s in names:
        sc = suites.SuiteConfig(cfg.ell_max_twice, cfg.n_max, nus, cfg.seed,
                                cfg.tol if cfg.tol is not None else cfg.tolerances.get(s))
        reports.append(suites.run_suite(s, sc))
    ok = all(r.passed for r in reports)
    for r in reports:
        print(f"[{r.suite}] {'PASS' if r.passed else 'FAIL'} {len(r.cases) - len(r.failures)}/{len(r.cases)} "
              f"cases in {r.wall_time:.2f} s", file=sys.stderr)
        for c in r.failures:
            print(f"  FAIL {c.identity} {c.params}: residual {c.residual:.3e} vs tol {c.tol:.1e}", file=sys.stderr)
    if cfg.output_format == "csv":
        rows = [(r.suite, c.identity, c.params, c.residual, c.tol, c.bound, "pass" if c.passed else "fail")
                for r in reports for c in r.cases]
        text = _csv_text(["suite", "id", "params", "residual", "tol", "bound", "result"], rows)
    else:
        text = dumps({"pass": ok, "seed": cfg.seed, "suites": [r.to_dict() for r in reports]}, indent=1)
    return text, 0 if ok else 1


def cmd_bench(cfg: RunConfig, args) -> tuple:
    dims = tuple(range(2, cfg.ell_max_twice + 2))
    ns = tuple(n for n in (2, 4, 8, 16, 32) if n <= max(cfg.n_max, 2))
    routes = cfg.routes if args.route else ROUTES
    try:
        rows = bench_mod.run_bench(dims, ns, routes, cfg.nu, args.repeats)
    except bench_mod.RouteMismatch as exc:
        print(f"route guard failed: {exc}", file=sys.stderr)
        return "", 1
    slope = bench_mod.recurrence_slope(repeats=args.repeats)
    print(f"recurrence time/n spread {slope['spread']:.2f} (sanity bound 3), "
          f"log-log slope {slope['loglog_slope']:.2f}, backend {slope['backend']}", file=sys.stderr)
    if cfg.output_format == "csv":
        return _csv_text(bench_mod.BENCH_HEADER, [r.as_list() for r in rows]), 0
    return dumps({"rows": [dict(zip(bench_mod.BENCH_HEADER, r.as_list())) for r in rows],
                  "recurrence_slope": slope}, indent=1), 0


COMMANDS = {"eval": cmd_eval, "weight": cmd_weight, "table": cmd_table,
            "verify": cmd_verify, "bench": cmd_bench}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mvgeg", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--ell", help="l as p/2, p or a decimal half-integer")
    common.add_argument("--nu", type=float)
    common.add_argument("--n", type=int)
    common.add_argument("--n-max", dest="n_max", type=int)
    common.add_argument("--ell-max", dest="ell_max")
    common.add_argument("--route", help="comma-separated subset of recurrence,hyper,racah")
    common.add_argument("--tol", type=float)
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--seed", type=int)
    common.add_argument("--config", help="JSON file mirroring the run configuration")
    common.add_argument("--out", help="write the output here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)
    ev = sub.add_parser("eval", parents=[common], help="coefficients of P_n, R_n or calR_n")
    ev.add_argument("--form", choices=FORMS, default="P")
    ev.add_argument("--x", type=float, help="weight mode: print W_pol(x)")
    sub.add_parser("weight", parents=[common], help="W_pol, L and t_k")
    sub.add_parser("table", parents=[common], help="squared norms H_n for n <= n-max")
    ve = sub.add_parser("verify", parents=[common], help="run verification suites")
    ve.add_argument("--suite", default="all")
    be = sub.add_parser("bench", parents=[common], help="route timings")
    be.add_argument("--repeats", type=int, default=5)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = build_config(args)
        text, code = COMMANDS[args.command](cfg, args)
    except UsageError as exc:
        print(f"mvgeg: error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") or not text else text + "\n")
    elif text:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())

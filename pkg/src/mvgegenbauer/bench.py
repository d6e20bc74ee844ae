"""Timing of the three constructions of P_n (recurrence, 2H1, Racah).

Every (d, n) cell first checks that the routes agree; a disagreement raises
instead of producing a timing for a wrong answer.
"""
from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

import numpy as np

from . import hyper2h1, mvop, racah
from ._kernels import backend
from .matpoly import max_coeff_diff
from .params import WeightParams

ROUTES = ("recurrence", "hyper", "racah")


def route_function(route: str):
    if route == "recurrence":
        # bypass the family cache so every call does the full recurrence
        return lambda p, n: mvop._build_family(p, n)[n]
    if route == "hyper":
        return hyper2h1.monic_P_2h1
    if route == "racah":
        return racah.monic_P_racah
    raise ValueError(f"unknown route {route!r}; choose from {', '.join(ROUTES)}")


class RouteMismatch(ArithmeticError):
    """Two routes disagree on P_n before timing."""


@dataclass(frozen=True)
class BenchRow:
    route: str
    d: int
    n: int
    nu: float
    repeats: int
    median_s: float
    min_s: float

    def as_list(self) -> list:
        return [self.route, self.d, self.n, self.nu, self.repeats, self.median_s, self.min_s]


BENCH_HEADER = ["route", "d", "n", "nu", "repeats", "median_s", "min_s"]


def time_call(func, repeats: int) -> list:
    out = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        func()
        out.append(time.perf_counter() - t0)
    return out


def guard_routes(params: WeightParams, n: int, routes, tol: float = 1e-8) -> float:
    """Largest coefficient distance of each route to the recurrence route."""
    ref = route_function("recurrence")(params, n)
    worst = 0.0
    for r in routes:
        diff = max_coeff_diff(route_function(r)(params, n), ref)
        if not diff <= tol:
            raise RouteMismatch(f"route {r} differs from the recurrence by {diff:.3e} at {params.label()}, n={n}")
        worst = max(worst, diff)
    return worst


def run_bench(dims=(2, 3, 4), ns=(2, 4, 8), routes=ROUTES, nu: float = 1.3,
              repeats: int = 5) -> list:
    rows = []
    for d in dims:
        p = WeightParams(d - 1, nu)
        for n in ns:
            guard_routes(p, n, routes)
            for r in routes:
                f = route_function(r)
                f(p, n)  # warm caches and jit
                ts = time_call(lambda: f(p, n), repeats)
                rows.append(BenchRow(r, d, n, nu, repeats, statistics.median(ts), min(ts)))
    return rows


def recurrence_slope(d: int = 3, ns=(4, 8, 16, 32), nu: float = 1.3, repeats: int = 5) -> dict:
    """Per-degree cost of the recurrence route; ``spread`` is max/min of time/n.

    At these degrees each step is dominated by fixed per-call cost, so the
    total is close to linear in n. The arithmetic per step grows with the
    degree, so ``loglog_slope`` drifts toward 2 for degrees in the hundreds.
    """
    p = WeightParams(d - 1, nu)
    f = route_function("recurrence")
    f(p, ns[0])
    per = []
    for n in ns:
        per.append(statistics.median(time_call(lambda: f(p, n), repeats)) / n)
    fit = np.polyfit(np.log(ns), np.log(np.array(per) * np.array(ns)), 1)
    return {"d": d, "ns": list(ns), "time_per_n": per, "spread": max(per) / min(per),
            "loglog_slope": float(fit[0]), "backend": backend()}

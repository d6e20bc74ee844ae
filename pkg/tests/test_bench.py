import pytest

from mvgegenbauer import bench
from mvgegenbauer.params import WeightParams


def test_guard_passes_for_agreeing_routes():
    assert bench.guard_routes(WeightParams(2, 1.3), 4, bench.ROUTES) <= 1e-8


def test_guard_raises_on_mismatch(monkeypatch):
    good = bench.route_function

    def broken(route):
        f = good(route)
        if route == "hyper":
            return lambda p, n: f(p, n) * 1.001
        return f

    monkeypatch.setattr(bench, "route_function", broken)
    with pytest.raises(bench.RouteMismatch):
        bench.guard_routes(WeightParams(2, 1.3), 3, bench.ROUTES)


def test_rows_per_cell():
    rows = bench.run_bench(dims=(2, 3), ns=(2, 3), repeats=1)
    assert [(r.route, r.d, r.n) for r in rows][:3] == [("recurrence", 2, 2), ("hyper", 2, 2), ("racah", 2, 2)]
    assert len(rows) == 3 * 2 * 2
    assert all(r.median_s >= r.min_s > 0 for r in rows)


def test_recurrence_cost_roughly_linear():
    s = bench.recurrence_slope(repeats=5)
    assert s["spread"] < 3


def test_unknown_route():
    with pytest.raises(ValueError):
        bench.route_function("fast")

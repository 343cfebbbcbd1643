from __future__ import annotations

import os
import runpy
import subprocess
import sys
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discrete_wasserstein import kernels


def check_plan(supply, demand, cost, value, plan):
    assert [sum(row) for row in plan] == supply
    assert [sum(col) for col in zip(*plan)] == demand
    assert all(f >= 0 for row in plan for f in row)
    assert value == sum(c * f for crow, frow in zip(cost, plan) for c, f in zip(crow, frow))


@st.composite
def instances(draw):
    m, n = draw(st.integers(1, 6)), draw(st.integers(1, 6))
    supply = [draw(st.integers(0, 12)) for _ in range(m)]
    total = sum(supply)
    cuts = sorted(draw(st.lists(st.integers(0, total), min_size=n - 1, max_size=n - 1)))
    demand = [b - a for a, b in zip([0, *cuts], [*cuts, total])]
    cost = [[draw(st.integers(0, 9)) for _ in range(n)] for _ in range(m)]
    return supply, demand, cost


def test_tiny_instance():
    value, plan = kernels.py_transport_min_cost([1, 1], [1, 1], [[0, 1], [1, 0]])
    assert value == 0 and plan == [[1, 0], [0, 1]]


def test_forced_crossing():
    value, plan = kernels.py_transport_min_cost([2], [1, 1], [[0, 1]])
    assert value == 1 and plan == [[1, 1]]


def test_unbalanced_rejected():
    with pytest.raises(ValueError):
        kernels.py_transport_min_cost([1], [2], [[0]])


@settings(deadline=None)
@given(instances())
def test_python_kernel_plans_are_feasible(inst):
    supply, demand, cost = inst
    value, plan = kernels.py_transport_min_cost(supply, demand, cost)
    check_plan(supply, demand, cost, value, plan)


@pytest.mark.skipif(not kernels.HAVE_EXTENSION, reason="compiled kernel not built")
@settings(deadline=None)
@given(instances())
def test_compiled_kernel_matches_python(inst):
    supply, demand, cost = inst
    c_value, c_plan = kernels.c_transport_min_cost(supply, demand, cost)
    py_value, _ = kernels.py_transport_min_cost(supply, demand, cost)
    assert c_value == py_value
    check_plan(supply, demand, cost, c_value, c_plan)


def test_dispatch_routes_huge_instances_to_python():
    huge = 2**70
    assert not kernels.fits_int64([huge], [huge], [[1]])
    value, plan = kernels.transport_min_cost([huge], [huge], [[1]])
    assert value == huge and plan == [[huge]]


def test_forced_backends():
    assert kernels.transport_min_cost([1], [1], [[3]], backend="python") == (3, [[1]])
    if kernels.HAVE_EXTENSION:
        assert kernels.transport_min_cost([1], [1], [[3]], backend="cython") == (3, [[1]])
        with pytest.raises(RuntimeError):
            kernels.transport_min_cost([2**70], [2**70], [[1]], backend="cython")
    assert kernels.BACKEND in ("cython", "python")


def test_pure_python_fallback_is_selectable():
    env = dict(os.environ, DISCRETE_WASSERSTEIN_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from discrete_wasserstein import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_benchmark_runs(capsys):
    bench = runpy.run_path(str(Path(__file__).parent.parent / "benchmarks" / "bench_transport.py"))
    bench["main"](["--sizes", "4,8", "--repeat", "1"])
    assert "support" in capsys.readouterr().out

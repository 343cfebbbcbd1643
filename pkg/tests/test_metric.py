from __future__ import annotations

import math
from fractions import Fraction as F
from math import lcm

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discrete_wasserstein.measure import ProbabilityMeasure, dirac, meet, to_float, total_mass
from discrete_wasserstein.metric import (
    INF,
    Coupling,
    OracleSizeError,
    PParameter,
    coupling_cost,
    optimal_coupling,
    oracle_min_cost,
    oracle_plan,
    validate_coupling,
    wasserstein_distance,
    wasserstein_power,
)

from .strategies import probability_measures

HALF_12 = ProbabilityMeasure({1: F(1, 2), 2: F(1, 2)})
HALF_23 = ProbabilityMeasure({2: F(1, 2), 3: F(1, 2)})


def compositions(total, caps):
    """Every tuple ``a`` with ``0 <= a[j] <= caps[j]`` and ``sum(a) == total``."""
    if not caps:
        if total == 0:
            yield ()
        return
    for a in range(min(total, caps[0]) + 1):
        for rest in compositions(total - a, caps[1:]):
            yield (a, *rest)


def brute_force_min_cost(mu, nu):
    """Minimum over every integer plan of the scaled transportation problem.

    The transportation polytope has integral vertices, so the minimum over
    integer points equals the linear-programming optimum.
    """
    rows, cols = sorted(mu), sorted(nu)
    den = 1
    for m in (*mu.values(), *nu.values()):
        den = lcm(den, m.denominator)
    supply = [int(mu[x] * den) for x in rows]
    demand = [int(nu[y] * den) for y in cols]
    best = None

    def fill(i, remaining, cost):
        nonlocal best
        if i == len(rows):
            if all(r == 0 for r in remaining):
                best = cost if best is None else min(best, cost)
            return
        for split in compositions(supply[i], remaining):
            extra = sum(a for a, y in zip(split, cols) if y != rows[i])
            fill(i + 1, [r - a for r, a in zip(remaining, split)], cost + extra)

    fill(0, demand, 0)
    return F(best, den)


class TestPower:
    def test_examples(self):
        assert wasserstein_power(dirac(1), dirac(2)) == 1
        assert wasserstein_power(HALF_12, HALF_12) == 0
        assert wasserstein_power(HALF_12, HALF_23) == F(1, 2)

    def test_distance_examples(self):
        assert wasserstein_distance(HALF_12, HALF_23, 2) == math.sqrt(0.5) == 0.7071067811865476
        assert wasserstein_distance(HALF_12, HALF_23, "inf") == 1.0
        assert wasserstein_distance(HALF_12, HALF_12, INF) == 0.0
        for p in (F(1, 2), 1, 2, 7, "inf"):
            assert wasserstein_distance(HALF_23, HALF_23, p) == 0.0

    def test_subunit_p_is_unrooted(self):
        assert wasserstein_distance(HALF_12, HALF_23, F(1, 3)) == 0.5

    def test_float_backend(self):
        a, b = to_float(HALF_12), to_float(HALF_23)
        assert wasserstein_power(a, b) == 0.5


class TestPParameter:
    @pytest.mark.parametrize("text", ["inf", "INF", " infinity ", float("inf")])
    def test_infinite(self, text):
        assert PParameter.parse(text).is_infinite

    @pytest.mark.parametrize("text, value", [("2", F(2)), ("3/2", F(3, 2)), (5, F(5)), (0.5, F(1, 2))])
    def test_finite(self, text, value):
        assert PParameter.parse(text).value == value

    @pytest.mark.parametrize("text", ["0", "-1", "abc", "1/0"])
    def test_invalid(self, text):
        with pytest.raises(ValueError):
            PParameter.parse(text)


class TestCoupling:
    def test_dirac_pair(self):
        pi = optimal_coupling(dirac(1), dirac(2))
        assert pi.pairs == {(1, 2): 1}

    def test_overlap_pair(self):
        pi = optimal_coupling(HALF_12, HALF_23)
        assert pi.pairs == {(2, 2): F(1, 2), (1, 3): F(1, 2)}
        assert validate_coupling(pi) and coupling_cost(pi) == F(1, 2)

    def test_equal_inputs_give_the_diagonal(self):
        mu = ProbabilityMeasure({1: F(1, 3), 4: F(2, 3)})
        pi = optimal_coupling(mu, mu)
        assert pi.pairs == {(1, 1): F(1, 3), (4, 4): F(2, 3)}
        assert coupling_cost(pi) == 0

    def test_cost(self):
        assert coupling_cost(Coupling({(1, 1): 1})) == 0
        assert coupling_cost(Coupling({(1, 2): 1})) == 1
        assert coupling_cost(Coupling({(2, 2): F(1, 2), (1, 3): F(1, 2)})) == F(1, 2)
        with pytest.raises(ValueError):
            coupling_cost(Coupling({(1, 2): 1}), "inf")

    def test_validate(self):
        assert not validate_coupling(Coupling({(1, 1): 1}), dirac(1), dirac(2))
        assert validate_coupling(Coupling({(1, 2): F(1, 2), (1, 3): F(1, 2)}), dirac(1), HALF_23)
        with pytest.raises(ValueError):
            validate_coupling(Coupling({(1, 1): 1}))

    def test_json_round_trip(self):
        pi = optimal_coupling(HALF_12, HALF_23)
        assert pi.to_json() == {"pairs": {"1,3": "1/2", "2,2": "1/2"}}
        assert Coupling.from_json(pi.to_json()).pairs == pi.pairs

    def test_float_coupling(self):
        a, b = to_float(HALF_12), to_float(HALF_23)
        pi = optimal_coupling(a, b)
        assert validate_coupling(pi, a, b, atol=1e-12)
        assert abs(coupling_cost(pi) - 0.5) < 1e-12


class TestOracle:
    def test_examples(self):
        assert oracle_min_cost(dirac(1), dirac(2)) == 1
        assert oracle_min_cost(HALF_12, HALF_23) == F(1, 2)
        assert oracle_min_cost(ProbabilityMeasure({1: F(1, 4), 2: F(3, 4)}), HALF_23) == F(1, 2)

    def test_brute_force_agrees_on_examples(self):
        assert brute_force_min_cost(HALF_12, HALF_23) == F(1, 2)
        assert brute_force_min_cost(ProbabilityMeasure({1: F(1, 4), 2: F(3, 4)}), HALF_23) == F(1, 2)

    def test_plan_is_a_coupling(self):
        cost, plan = oracle_plan(HALF_12, HALF_23)
        assert validate_coupling(plan) and coupling_cost(plan) == cost

    def test_size_limit(self):
        big = ProbabilityMeasure({x: F(1, 10) for x in range(1, 11)})
        with pytest.raises(OracleSizeError):
            oracle_min_cost(big, big, limit=5)

    def test_rejects_float(self):
        with pytest.raises(TypeError):
            oracle_min_cost(to_float(HALF_12), to_float(HALF_23))

    @pytest.mark.parametrize("backend", ["python", None])
    def test_backends_agree(self, backend):
        mu = ProbabilityMeasure({1: F(1, 7), 2: F(2, 7), 5: F(4, 7)})
        nu = ProbabilityMeasure({2: F(1, 3), 5: F(1, 3), 6: F(1, 3)})
        assert oracle_min_cost(mu, nu, backend=backend) == wasserstein_power(mu, nu)


# -- properties ------------------------------------------------------------------

small = probability_measures(points=st.integers(1, 4), max_size=3, max_weight=4)


@settings(max_examples=60, deadline=None)
@given(small, small)
def test_closed_form_matches_brute_force(mu, nu):
    assert wasserstein_power(mu, nu) == brute_force_min_cost(mu, nu)


@settings(deadline=None)
@given(probability_measures(), probability_measures())
def test_closed_form_matches_oracle(mu, nu):
    assert wasserstein_power(mu, nu) == oracle_min_cost(mu, nu)


@given(probability_measures(), probability_measures())
def test_optimal_coupling_is_valid_and_optimal(mu, nu):
    pi = optimal_coupling(mu, nu)
    assert validate_coupling(pi, mu, nu)
    assert coupling_cost(pi) == wasserstein_power(mu, nu)
    assert pi.diagonal_mass() == total_mass(meet(mu, nu))
    assert pi.total() == 1


@given(probability_measures(), probability_measures(), probability_measures(),
       st.sampled_from([F(1), F(3, 2), F(2), F(5)]))
def test_triangle_inequality(mu, nu, rho, p):
    assert wasserstein_distance(mu, rho, p) <= wasserstein_distance(mu, nu, p) + wasserstein_distance(nu, rho, p) + 1e-12


@given(probability_measures(), probability_measures())
def test_symmetry_and_identity(mu, nu):
    assert wasserstein_power(mu, nu) == wasserstein_power(nu, mu)
    assert (wasserstein_power(mu, nu) == 0) == (mu == nu)
    assert 0 <= wasserstein_power(mu, nu) <= 1


@given(probability_measures(), probability_measures())
def test_distance_one_iff_disjoint(mu, nu):
    assert (wasserstein_power(mu, nu) == 1) == (not set(mu) & set(nu))


@given(probability_measures(), probability_measures())
def test_monotone_in_p_and_bounded_by_infinity(mu, nu):
    ps = [F(1), F(3, 2), F(2), F(5), F(100)]
    values = [wasserstein_distance(mu, nu, p) for p in ps]
    assert values == sorted(values)
    assert values[-1] <= wasserstein_distance(mu, nu, "inf")


@given(probability_measures(), probability_measures())
def test_limit_gap_bound(mu, nu):
    """``0 <= 1 - W_p <= -ln(W_p^p) / p`` whenever the measures differ."""
    if mu == nu:
        return
    c = wasserstein_power(mu, nu)
    for p in (F(10), F(10**6)):
        gap = 1 - wasserstein_distance(mu, nu, p)
        assert -1e-15 <= gap <= -math.log(c) / float(p) + 1e-15


def test_limit_tolerance_needs_cost_above_one_over_e():
    # Worked counterexample to |W_p - 1| < 1e-6 at p = 1e6: cost 1/64.
    mu = ProbabilityMeasure({1: F(1, 2), 2: F(1, 2)})
    nu = ProbabilityMeasure({1: F(33, 64), 2: F(31, 64)})
    assert wasserstein_power(mu, nu) == F(1, 64)
    gap = 1 - wasserstein_distance(mu, nu, 10**6)
    assert math.isclose(gap, math.log(64) / 1e6, rel_tol=1e-5)
    assert gap > 1e-6


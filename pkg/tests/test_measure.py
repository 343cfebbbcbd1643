from __future__ import annotations

import json
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from discrete_wasserstein.measure import (
    FLOAT64,
    RATIONAL,
    MeasureError,
    MeasureParseError,
    ProbabilityMeasure,
    SparseMeasure,
    TruncatedMeasure,
    add,
    approx_equal,
    dirac,
    leq,
    measure_from_json,
    measure_to_json,
    meet,
    positive_difference,
    push_forward,
    restrict,
    scale,
    support,
    to_float,
    total_mass,
    zero,
)

from .strategies import measures, probability_measures


def m(**kw):
    return SparseMeasure({int(k[1:]): F(v) for k, v in kw.items()})


HALF_12 = SparseMeasure({1: F(1, 2), 2: F(1, 2)})
HALF_23 = SparseMeasure({2: F(1, 2), 3: F(1, 2)})


class TestConstruction:
    def test_dirac(self):
        assert dirac(3) == SparseMeasure({3: 1})
        assert dirac(1).total == 1
        assert support(dirac(7)) == {7}

    def test_zero_masses_are_dropped(self):
        assert SparseMeasure({1: 0, 2: F(1, 3)}) == SparseMeasure({2: F(1, 3)})
        assert len(SparseMeasure({1: 0})) == 0

    @pytest.mark.parametrize("bad", [{0: 1}, {-3: 1}, {1.5: 1}, {True: 1}])
    def test_rejects_bad_points(self, bad):
        with pytest.raises(MeasureError):
            SparseMeasure(bad)

    def test_rejects_negative_mass(self):
        with pytest.raises(MeasureError):
            SparseMeasure({1: F(-1, 2)})

    def test_mixed_backends_promote_to_float(self):
        mu = SparseMeasure({1: F(1, 2), 2: 0.5})
        assert mu.backend == FLOAT64 and mu[1] == 0.5

    @pytest.mark.parametrize("bad", [float("nan"), float("inf")])
    def test_rejects_non_finite(self, bad):
        with pytest.raises(MeasureError):
            SparseMeasure({1: bad})

    def test_string_masses_are_exact(self):
        mu = SparseMeasure({1: "1/3", 2: "2/3"})
        assert mu.backend == RATIONAL and mu[1] == F(1, 3)

    def test_probability_requires_unit_total(self):
        with pytest.raises(MeasureError):
            ProbabilityMeasure({1: F(1, 2)})
        assert ProbabilityMeasure({1: F(1, 2), 5: F(1, 2)}).total == 1

    def test_float_backend(self):
        mu = to_float(HALF_12)
        assert mu.backend == FLOAT64
        assert mu[1] == 0.5

    def test_is_hashable_and_order_independent(self):
        a = SparseMeasure({2: F(1, 2), 1: F(1, 2)})
        assert hash(a) == hash(HALF_12) and a == HALF_12
        assert list(a) == [1, 2]


class TestLattice:
    def test_total_mass(self):
        assert total_mass(zero()) == 0
        assert total_mass(HALF_12) == 1
        assert total_mass(m(_4="1/3")) == F(1, 3)

    def test_support(self):
        assert support(zero()) == frozenset()
        assert support(m(_1="1/2", _9="1/2")) == {1, 9}
        assert support(dirac(2)) == {2}

    def test_meet(self):
        assert meet(HALF_12, HALF_23) == m(_2="1/2")
        assert meet(HALF_12, HALF_12) == HALF_12
        assert meet(dirac(1), dirac(2)) == zero()

    def test_positive_difference(self):
        assert positive_difference(HALF_12, HALF_23) == m(_1="1/2")
        assert positive_difference(HALF_12, HALF_12) == zero()
        assert positive_difference(m(_1="3/4"), m(_1="1/4")) == m(_1="1/2")

    def test_restrict(self):
        assert restrict(HALF_12, {2}) == m(_2="1/2")
        assert restrict(HALF_12, set()) == zero()
        assert restrict(HALF_12, support(HALF_12)) == HALF_12

    def test_add_scale(self):
        assert add(m(_1="1/2"), m(_2="1/2")) == HALF_12
        assert scale(0, HALF_12) == zero()
        assert scale(F(1, 3), m(_1="1/2")) == m(_1="1/6")
        with pytest.raises(MeasureError):
            scale(-1, HALF_12)

    def test_leq(self):
        assert leq(m(_1="1/4"), m(_1="1/2", _2="1/4"))
        assert not leq(m(_1="1/4", _3="1/4"), m(_1="1/2"))
        assert leq(zero(), HALF_12)

    def test_leq_is_exact_for_rationals(self):
        # 8/9 has no exact binary64 value; an exact comparison must hold.
        mu = m(_9="8/9")
        assert leq(mu, mu)

    def test_push_forward(self):
        swap = {1: 2, 2: 1}
        assert push_forward(HALF_12, swap) == HALF_12
        assert push_forward(dirac(1), lambda n: n + 1) == dirac(2)
        assert push_forward(m(_1="1/3", _2="2/3"), swap) == m(_1="2/3", _2="1/3")
        assert isinstance(push_forward(ProbabilityMeasure(HALF_12), swap), ProbabilityMeasure)

    def test_push_forward_rejects_collisions(self):
        with pytest.raises(MeasureError):
            push_forward(HALF_12, {1: 1, 2: 1})

    def test_approx_equal_float(self):
        a = to_float(m(_1="1/3", _2="2/3"))
        b = SparseMeasure({1: 1 / 3 + 1e-14, 2: 2 / 3})
        assert approx_equal(a, b)
        assert not approx_equal(a, SparseMeasure({1: 1 / 3 + 1e-9, 2: 2 / 3}))


class TestJson:
    def test_round_trip(self):
        payload = measure_to_json(HALF_12)
        assert payload == {"points": {"1": "1/2", "2": "1/2"}}
        assert measure_from_json(json.dumps(payload)) == HALF_12

    def test_truncated_round_trip(self):
        mu = TruncatedMeasure({2: F(1, 2)}, F(1, 2))
        again = measure_from_json(measure_to_json(mu))
        assert isinstance(again, TruncatedMeasure) and again.tail == F(1, 2)

    def test_float_masses_serialize_as_numbers(self):
        assert measure_to_json(to_float(HALF_12)) == {"points": {"1": 0.5, "2": 0.5}}

    @pytest.mark.parametrize("text, where", [
        ('{"points": {"1": "x"}}', 'points["1"]'),
        ('{"points": {"0": "1"}}', 'points["0"]'),
        ('{"points": {"1": "-1/2", "2": "3/2"}}', 'points["1"]'),
        ('{"points": {"1": "1/0"}}', 'points["1"]'),
        ('{"points": {"1": "1/2"', "line 1"),
        ('{"pts": {}}', "$"),
    ])
    def test_errors_carry_positions(self, text, where):
        with pytest.raises(MeasureParseError) as info:
            measure_from_json(text, probability=True)
        assert where in str(info.value)

    def test_probability_total_checked(self):
        with pytest.raises(MeasureParseError, match="total"):
            measure_from_json('{"points": {"1": "1/2", "2": "1/3"}}', probability=True)


# -- properties ------------------------------------------------------------------

@given(measures(), measures())
def test_meet_is_the_greatest_lower_bound(mu, nu):
    lo = meet(mu, nu)
    assert leq(lo, mu) and leq(lo, nu)
    assert meet(mu, nu) == meet(nu, mu)


@given(measures(), measures())
def test_difference_decomposition(mu, nu):
    # mu = (mu ^ nu) + (mu - nu)_+
    assert add(meet(mu, nu), positive_difference(mu, nu)) == mu


@given(probability_measures(), probability_measures())
def test_excess_masses_balance(mu, nu):
    assert total_mass(positive_difference(mu, nu)) == total_mass(positive_difference(nu, mu))


@given(measures(), st.frozensets(st.integers(1, 12)))
def test_restrict_partitions_mass(mu, s):
    rest = support(mu) - s
    assert total_mass(restrict(mu, s)) + total_mass(restrict(mu, rest)) == total_mass(mu)


@given(probability_measures(), st.permutations(list(range(1, 13))))
def test_push_forward_by_permutation_preserves_shape(mu, perm):
    sigma = dict(zip(range(1, 13), perm))
    image = push_forward(mu, sigma)
    assert image.masses() == mu.masses()
    inverse = {v: k for k, v in sigma.items()}
    assert push_forward(image, inverse) == mu


@given(measures())
def test_json_round_trip(mu):
    assert measure_from_json(json.dumps(measure_to_json(mu))) == mu

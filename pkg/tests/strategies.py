"""Hypothesis strategies shared by the property tests."""

from __future__ import annotations

from fractions import Fraction

from hypothesis import strategies as st

from discrete_wasserstein.measure import ProbabilityMeasure, SparseMeasure

POINTS = st.integers(min_value=1, max_value=12)


@st.composite
def measures(draw, max_size=6):
    keys = draw(st.lists(POINTS, min_size=0, max_size=max_size, unique=True))
    masses = [Fraction(draw(st.integers(1, 40)), draw(st.integers(1, 40))) for _ in keys]
    return SparseMeasure(dict(zip(keys, masses)))


@st.composite
def probability_measures(draw, points=POINTS, max_size=6, max_weight=30):
    keys = draw(st.lists(points, min_size=1, max_size=max_size, unique=True))
    weights = [draw(st.integers(1, max_weight)) for _ in keys]
    total = sum(weights)
    return ProbabilityMeasure({x: Fraction(w, total) for x, w in zip(keys, weights)})

"""p-Wasserstein distance on the discrete space.

The exact quantity is the transport cost ``W_p^p = 1 - (mu ^ nu)(X)``
(a rational); the rooted distance is a derived binary64 view. Since the
ground metric takes only the values 0 and 1, ``rho**p == rho`` and the
transport cost does not depend on p.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from . import kernels
from .measure import (
    FLOAT_ATOL,
    Mass,
    MeasureError,
    ProbabilityMeasure,
    SparseMeasure,
    check_point,
    coerce_mass,
    mass_to_json,
    meet,
    positive_difference,
    total_mass,
)

#: Default bound on the support size per side accepted by the oracle.
ORACLE_SUPPORT_LIMIT = 64


class OracleSizeError(ValueError):
    """The transportation instance exceeds the configured support limit."""


@dataclass(frozen=True)
class PParameter:
    """Exponent p in (0, inf]; ``value is None`` encodes p = inf."""

    value: Fraction | None

    def __post_init__(self):
        if self.value is not None:
            object.__setattr__(self, "value", Fraction(self.value))
            if self.value <= 0:
                raise ValueError(f"p must be positive, got {self.value}")

    @classmethod
    def parse(cls, text) -> PParameter:
        if isinstance(text, PParameter):
            return text
        if isinstance(text, str) and text.strip().lower() in ("inf", "infinity", "oo"):
            return cls(None)
        if isinstance(text, float):
            if math.isinf(text):
                return cls(None)
            return cls(Fraction(text))
        try:
            return cls(Fraction(text.strip() if isinstance(text, str) else text))
        except (TypeError, ValueError, ZeroDivisionError):
            raise ValueError(f"invalid p: {text!r}") from None

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def __str__(self) -> str:
        return "inf" if self.value is None else str(self.value)


INF = PParameter(None)


def wasserstein_power(mu: SparseMeasure, nu: SparseMeasure) -> Mass:
    """``W_p^p(mu, nu)`` for finite p >= 1 (and ``W_p`` itself for p < 1)."""
    return 1 - total_mass(meet(mu, nu))


def wasserstein_distance(mu: SparseMeasure, nu: SparseMeasure, p=1) -> float:
    p = PParameter.parse(p)
    if p.is_infinite:
        return 0.0 if mu == nu else 1.0
    power = float(wasserstein_power(mu, nu))
    if p.value <= 1:
        return power
    return max(power, 0.0) ** (1.0 / float(p.value))


# -- couplings ---------------------------------------------------------------

@dataclass(frozen=True)
class Coupling:
    """Finitely supported measure on pairs of points.

    ``left``/``right`` are the marginals the coupling is meant to have; they
    are stored so :func:`validate_coupling` needs no extra arguments, but the
    constructor does not enforce them.
    """

    pairs: Mapping[tuple[int, int], Mass]
    left: SparseMeasure | None = None
    right: SparseMeasure | None = None

    def __post_init__(self):
        clean = {}
        for (x, y), m in self.pairs.items():
            check_point(x)
            check_point(y)
            m = coerce_mass(m)
            if m < 0:
                raise MeasureError(f"negative coupling mass at {(x, y)}")
            if m != 0:
                clean[(x, y)] = m
        object.__setattr__(self, "pairs", dict(sorted(clean.items())))

    def left_marginal(self) -> SparseMeasure:
        return _marginal(self.pairs, 0)

    def right_marginal(self) -> SparseMeasure:
        return _marginal(self.pairs, 1)

    def diagonal_mass(self) -> Mass:
        return sum((m for (x, y), m in self.pairs.items() if x == y), Fraction(0))

    def total(self) -> Mass:
        return sum(self.pairs.values(), Fraction(0))

    def to_json(self) -> dict:
        return {"pairs": {f"{x},{y}": mass_to_json(m) for (x, y), m in self.pairs.items()}}

    @classmethod
    def from_json(cls, payload) -> Coupling:
        pairs = {}
        for key, raw in payload["pairs"].items():
            x, y = (int(part) for part in key.split(","))
            pairs[(x, y)] = coerce_mass(raw)
        return cls(pairs)


def _marginal(pairs, axis: int) -> SparseMeasure:
    acc: dict[int, Mass] = {}
    for key, m in pairs.items():
        x = key[axis]
        acc[x] = acc[x] + m if x in acc else m
    return SparseMeasure(acc)


def optimal_coupling(mu: SparseMeasure, nu: SparseMeasure) -> Coupling:
    """The coupling that keeps the common part in place.

    Diagonal part ``i_#(mu ^ nu)`` plus the normalized product of the two
    excess measures ``(mu - nu)_+`` and ``(nu - mu)_+``. For ``mu == nu`` the
    product term is dropped (its normalizer vanishes).
    """
    common = meet(mu, nu)
    pairs: dict[tuple[int, int], Mass] = {(x, x): m for x, m in common.items()}
    gap = 1 - total_mass(common)
    if gap > (FLOAT_ATOL if isinstance(gap, float) else 0):
        excess = positive_difference(mu, nu)
        deficit = positive_difference(nu, mu)
        for x, a in excess.items():
            for y, b in deficit.items():
                pairs[(x, y)] = a * b / gap
    return Coupling(pairs, mu, nu)


def coupling_cost(pi: Coupling, p=1) -> Mass:
    """Transport cost of ``pi``: its off-diagonal mass."""
    if PParameter.parse(p).is_infinite:
        raise ValueError("coupling_cost needs a finite p")
    return sum((m for (x, y), m in pi.pairs.items() if x != y), Fraction(0))


def validate_coupling(pi: Coupling, mu: SparseMeasure | None = None,
                      nu: SparseMeasure | None = None, atol: float = 0.0) -> bool:
    """Check both marginal identities on singletons."""
    mu = pi.left if mu is None else mu
    nu = pi.right if nu is None else nu
    if mu is None or nu is None:
        raise ValueError("marginals not given and not stored on the coupling")
    for target, got in ((mu, pi.left_marginal()), (nu, pi.right_marginal())):
        for x in set(target) | set(got):
            if abs(target.get(x, 0) - got.get(x, 0)) > atol:
                return False
    return True


# -- independent oracle --------------------------------------------------------

def _common_denominator(*measures: SparseMeasure) -> int:
    den = 1
    for mu in measures:
        for m in mu.values():
            if isinstance(m, float):
                raise TypeError("the transportation oracle runs on exact rationals only")
            den = lcm(den, m.denominator)
    return den


def oracle_plan(mu: SparseMeasure, nu: SparseMeasure, *,
                limit: int = ORACLE_SUPPORT_LIMIT, backend: str | None = None) -> tuple[Fraction, Coupling]:
    """Optimal transport plan by min-cost flow over the supports.

    Masses are scaled to integers by their common denominator and the
    transportation problem with cost 0 on equal points and 1 elsewhere is
    solved exactly. Works from the cost matrix only.
    """
    rows, cols = sorted(mu), sorted(nu)
    if len(rows) > limit or len(cols) > limit:
        raise OracleSizeError(f"support sizes {len(rows)}x{len(cols)} exceed the limit {limit}")
    den = _common_denominator(mu, nu)
    supply = [mu[x] * den for x in rows]
    demand = [nu[y] * den for y in cols]
    if sum(supply) != sum(demand):
        raise MeasureError("measures have different total mass")
    supply = [int(s) for s in supply]
    demand = [int(d) for d in demand]
    cost = [[0 if x == y else 1 for y in cols] for x in rows]
    value, flow = kernels.transport_min_cost(supply, demand, cost, backend=backend)
    pairs = {(x, y): Fraction(flow[i][j], den)
             for i, x in enumerate(rows) for j, y in enumerate(cols) if flow[i][j]}
    return Fraction(value, den), Coupling(pairs, mu, nu)


def oracle_min_cost(mu: SparseMeasure, nu: SparseMeasure, *,
                    limit: int = ORACLE_SUPPORT_LIMIT, backend: str | None = None) -> Fraction:
    return oracle_plan(mu, nu, limit=limit, backend=backend)[0]


__all__ = [
    "INF",
    "ORACLE_SUPPORT_LIMIT",
    "Coupling",
    "OracleSizeError",
    "PParameter",
    "ProbabilityMeasure",
    "coupling_cost",
    "optimal_coupling",
    "oracle_min_cost",
    "oracle_plan",
    "validate_coupling",
    "wasserstein_distance",
    "wasserstein_power",
]

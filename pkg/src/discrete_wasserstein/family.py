"""Allocation families: one monotone measure-valued curve per point.

A family assigns to every point x a curve ``t -> phi[x, t]`` on (0, 1] with

* (a) pairwise disjoint top supports ``S(phi[x, 1])``,
* (b) ``phi[x, t](X) = t``,
* (c) ``phi[x, s] <= phi[x, t]`` for ``s < t``,

and every such family generates an isometric embedding of the Wasserstein
space by ``f(mu) = sum over x in S(mu) of phi[x, mu({x})]``
(see :mod:`discrete_wasserstein.embed`).
"""

from __future__ import annotations

import bisect
import math
import threading
from abc import ABC, abstractmethod
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .measure import (
    FLOAT_ATOL,
    Mass,
    MeasureError,
    SparseMeasure,
    TruncatedMeasure,
    add,
    check_point,
    coerce_mass,
    leq,
    mass_to_json,
    measure_from_json,
    measure_to_json,
    positive_difference,
    restrict,
    scale,
    support,
    tail_of,
    total_mass,
    zero,
)

#: Default tail tolerance for curves with infinite top support.
DEFAULT_EPSILON = Fraction(1, 2**20)


class DomainError(ValueError):
    """Argument outside the domain of a curve or of ``n_of_c``."""


class CurveError(ValueError):
    """A curve violates the total-mass or monotonicity law."""


def _check_t(t) -> Mass:
    t = coerce_mass(t)
    if not 0 < t <= 1:
        raise DomainError(f"t must lie in (0, 1], got {t}")
    return t


# -- primes ------------------------------------------------------------------

class _PrimeTable:
    """Memoized primes by trial division; reads are lock-free, extension is locked."""

    def __init__(self):
        self._primes = [2, 3]
        self._lock = threading.Lock()

    def nth(self, n: int) -> int:
        if n < 1:
            raise DomainError(f"prime index must be >= 1, got {n}")
        primes = self._primes
        if n <= len(primes):
            return primes[n - 1]
        with self._lock:
            primes = list(self._primes)
            candidate = primes[-1] + 2
            while len(primes) < n:
                if all(candidate % q for q in primes if q * q <= candidate):
                    primes.append(candidate)
                candidate += 2
            self._primes = primes
        return primes[n - 1]


PRIMES = _PrimeTable()


def nth_prime(n: int) -> int:
    return PRIMES.nth(n)


@dataclass(frozen=True)
class PrimePowers:
    """The infinite point set ``{p, p**2, p**3, ...}``."""

    prime: int

    def __contains__(self, x: int) -> bool:
        if x < self.prime:
            return False
        while x % self.prime == 0:
            x //= self.prime
        return x == 1

    def first(self, count: int) -> list[int]:
        return [self.prime**j for j in range(1, count + 1)]


TopSupport = frozenset | PrimePowers


def support_overlap(a: TopSupport, b: TopSupport) -> int | None:
    """A common point of two top supports, or None when disjoint."""
    if isinstance(a, PrimePowers) and isinstance(b, PrimePowers):
        return None if a.prime != b.prime else a.prime
    if isinstance(a, PrimePowers):
        a, b = b, a
    if isinstance(b, PrimePowers):
        hits = [x for x in a if x in b]
    else:
        hits = list(a & b)
    return min(hits) if hits else None


# -- the dyadic curve over prime powers ------------------------------------------

def n_of_c(c) -> int | float:
    """Number of leading dyadic halves ``1/2 + 1/4 + ...`` that fit below c.

    Returns the unique N with ``sum_{j<=N} 2**-j <= c < sum_{j<=N+1} 2**-j``,
    and ``math.inf`` for c = 1.
    """
    c = coerce_mass(c)
    if not 0 <= c <= 1:
        raise DomainError(f"c must lie in [0, 1], got {c}")
    if c == 1:
        return math.inf
    c = Fraction(c)
    n, partial = 0, Fraction(0)
    while partial + Fraction(1, 2 ** (n + 1)) <= c:
        n += 1
        partial += Fraction(1, 2**n)
    return n


def dyadic_prime_curve_at(n: int, c, epsilon=DEFAULT_EPSILON) -> SparseMeasure:
    """Value at c of the dyadic curve over the powers of the n-th prime.

    For c < 1 the measure is finite: masses ``2**-j`` at ``p**j`` for
    ``j <= N(c)`` and the remainder at ``p**(N(c)+1)``. For c = 1 the
    geometric measure is truncated once the tail drops to ``epsilon``; the
    result is then a :class:`TruncatedMeasure` carrying the dropped mass.
    """
    c = _check_t(c)
    p = nth_prime(n)
    if c == 1:
        epsilon = coerce_mass(epsilon)
        if epsilon <= 0:
            raise DomainError("a positive tail tolerance is required at c = 1")
        depth = 1
        while Fraction(1, 2**depth) > epsilon:
            depth += 1
        entries = {p**j: Fraction(1, 2**j) for j in range(1, depth + 1)}
        if isinstance(c, float):
            entries = {x: float(m) for x, m in entries.items()}
            return TruncatedMeasure(entries, float(Fraction(1, 2**depth)))
        return TruncatedMeasure(entries, Fraction(1, 2**depth))
    count = n_of_c(c)
    entries: dict[int, Mass] = {p**j: Fraction(1, 2**j) for j in range(1, count + 1)}
    entries[p ** (count + 1)] = c - (1 - Fraction(1, 2**count))
    if isinstance(c, float):
        entries = {x: float(m) for x, m in entries.items()}
    return SparseMeasure(entries)


# -- gauges ------------------------------------------------------------------

class MonotoneGauge(ABC):
    """Splitting function g with g and ``t - g(t)`` nondecreasing, ``0 <= g(t) <= t``."""

    exact = True

    @abstractmethod
    def __call__(self, t: Mass) -> Mass: ...

    @abstractmethod
    def admissible(self) -> bool: ...

    @abstractmethod
    def to_json(self) -> dict: ...

    @staticmethod
    def from_json(payload: Mapping) -> MonotoneGauge:
        kind = payload.get("kind")
        if kind == "linear":
            return LinearGauge(Fraction(payload["alpha"]))
        if kind == "log":
            return LogGauge()
        if kind == "custom":
            return SampledGauge(tuple((Fraction(t), Fraction(g)) for t, g in payload["samples"]))
        raise ValueError(f"unknown gauge kind {kind!r}")


@dataclass(frozen=True)
class LinearGauge(MonotoneGauge):
    alpha: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))

    def __call__(self, t):
        return self.alpha * t

    def admissible(self) -> bool:
        return 0 <= self.alpha <= 1

    def to_json(self) -> dict:
        return {"kind": "linear", "alpha": str(self.alpha)}


@dataclass(frozen=True)
class LogGauge(MonotoneGauge):
    """``g(t) = ln(1 + t)``; irrational, so float backend only."""

    exact = False

    def __call__(self, t):
        return math.log1p(float(t))

    def admissible(self) -> bool:
        return True

    def to_json(self) -> dict:
        return {"kind": "log"}


@dataclass(frozen=True)
class SampledGauge(MonotoneGauge):
    """Piecewise-linear gauge through ``(0, 0)`` and the given ``(t, g)`` samples."""

    samples: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        pts = tuple((Fraction(t), Fraction(g)) for t, g in self.samples)
        ts = [t for t, _ in pts]
        if not pts or ts != sorted(set(ts)) or ts[0] <= 0 or ts[-1] != 1:
            raise ValueError("gauge samples need increasing t in (0, 1] ending at 1")
        object.__setattr__(self, "samples", pts)

    def __call__(self, t):
        knots = [(Fraction(0), Fraction(0)), *self.samples]
        i = bisect.bisect_left([k for k, _ in knots], t)
        if i < len(knots) and knots[i][0] == t:
            return knots[i][1]
        (t0, g0), (t1, g1) = knots[i - 1], knots[i]
        return g0 + (g1 - g0) * (t - t0) / (t1 - t0)

    def admissible(self) -> bool:
        knots = [(Fraction(0), Fraction(0)), *self.samples]
        return all(0 <= g1 - g0 <= t1 - t0 for (t0, g0), (t1, g1) in zip(knots, knots[1:]))

    def to_json(self) -> dict:
        return {"kind": "custom", "samples": [[str(t), str(g)] for t, g in self.samples]}


# -- curves ------------------------------------------------------------------

class AllocationCurve(ABC):
    """A curve ``t -> phi_t`` of finite measures on (0, 1]."""

    kind: str = ""

    @property
    def exact(self) -> bool:
        """True when (b) and (c) hold by construction (no sampling needed)."""
        return True

    @abstractmethod
    def at(self, t: Mass, epsilon=DEFAULT_EPSILON) -> SparseMeasure: ...

    def top_support(self) -> TopSupport:
        return support(self.at(Fraction(1)))

    def structural_problem(self) -> str | None:
        """Why the curve cannot satisfy (b)/(c) by construction, if anything."""
        return None

    @abstractmethod
    def to_json(self) -> dict: ...


@dataclass(frozen=True)
class DiracCurve(AllocationCurve):
    target: int
    kind = "dirac"

    def __post_init__(self):
        check_point(self.target)

    def at(self, t, epsilon=DEFAULT_EPSILON):
        return SparseMeasure({self.target: _check_t(t)})

    def top_support(self):
        return frozenset({self.target})

    def to_json(self):
        return {"kind": "dirac", "target": self.target}


@dataclass(frozen=True)
class TwoPointSplit(AllocationCurve):
    """``phi_t = g(t) * delta_lo + (t - g(t)) * delta_hi``."""

    lo: int
    hi: int
    gauge: MonotoneGauge
    kind = "two_point_split"

    def __post_init__(self):
        check_point(self.lo)
        check_point(self.hi)
        if self.lo == self.hi:
            raise CurveError("two_point_split needs two distinct points")

    @property
    def exact(self):
        return self.gauge.exact

    def at(self, t, epsilon=DEFAULT_EPSILON):
        t = _check_t(t)
        g = self.gauge(t)
        if isinstance(g, float):
            t = float(t)
        return SparseMeasure({self.lo: g, self.hi: t - g})

    def structural_problem(self):
        if not self.gauge.admissible():
            return f"gauge {self.gauge.to_json()} is not admissible"
        return None

    def to_json(self):
        return {"kind": "two_point_split", "lo": self.lo, "hi": self.hi, "gauge": self.gauge.to_json()}


@dataclass(frozen=True)
class DyadicPrimeCurve(AllocationCurve):
    base_index: int
    kind = "dyadic_prime"

    def __post_init__(self):
        if self.base_index < 1:
            raise DomainError("base_index must be >= 1")

    @property
    def prime(self) -> int:
        return nth_prime(self.base_index)

    def at(self, t, epsilon=DEFAULT_EPSILON):
        return dyadic_prime_curve_at(self.base_index, t, epsilon)

    def top_support(self):
        return PrimePowers(self.prime)

    def to_json(self):
        return {"kind": "dyadic_prime", "base_index": self.base_index}


class PiecewiseCurve(AllocationCurve):
    """Piecewise-linear interpolation of its values at the breakpoints.

    ``breakpoints`` ``0 < b_1 < ... < b_k = 1`` and nonnegative
    ``increments`` with ``total(increments[i]) = b_i - b_{i-1}`` (``b_0 = 0``).
    ``phi_t`` is the sum of the increments with ``b_i <= t`` plus the
    fraction ``(t - b_j) / (b_{j+1} - b_j)`` of the next one.
    """

    kind = "piecewise"

    def __init__(self, breakpoints: Iterable, increments: Iterable[SparseMeasure]):
        self.breakpoints = tuple(Fraction(b) for b in breakpoints)
        self.increments = tuple(increments)
        bps = self.breakpoints
        if not bps or len(bps) != len(self.increments):
            raise CurveError("need one increment per breakpoint")
        if list(bps) != sorted(set(bps)) or bps[0] <= 0 or bps[-1] != 1:
            raise CurveError("breakpoints must increase strictly in (0, 1] and end at 1")
        prev = Fraction(0)
        for b, inc in zip(bps, self.increments):
            if inc.backend != "rational" or total_mass(inc) != b - prev:
                raise CurveError(f"increment at breakpoint {b} has mass {total_mass(inc)}, expected {b - prev}")
            prev = b
        acc, self._values = zero(), []
        for inc in self.increments:
            acc = add(acc, inc)
            self._values.append(acc)

    def __eq__(self, other):
        if not isinstance(other, PiecewiseCurve):
            return NotImplemented
        return (self.breakpoints, self.increments) == (other.breakpoints, other.increments)

    def __hash__(self):
        return hash((self.breakpoints, self.increments))

    def __repr__(self):
        return f"PiecewiseCurve(breakpoints={list(map(str, self.breakpoints))}, increments={list(self.increments)})"

    @classmethod
    def from_values(cls, breakpoints: Iterable, values: Iterable[SparseMeasure]) -> PiecewiseCurve:
        """Interpolating curve through ``(b_i, values[i])``; values must increase."""
        bps = [Fraction(b) for b in breakpoints]
        incs, prev = [], zero()
        for b, v in zip(bps, values):
            if not leq(prev, v):
                raise CurveError(f"values are not monotone at breakpoint {b}")
            incs.append(positive_difference(v, prev))
            prev = v
        return cls(bps, incs)

    def directions(self) -> list[SparseMeasure]:
        """Unit-mass ramp direction of every segment."""
        prev, out = Fraction(0), []
        for b, inc in zip(self.breakpoints, self.increments):
            out.append(scale(1 / (b - prev), inc))
            prev = b
        return out

    def at(self, t, epsilon=DEFAULT_EPSILON):
        t = _check_t(t)
        if isinstance(t, float):
            t = Fraction(t)
        bps = self.breakpoints
        j = bisect.bisect_right(bps, t)
        base = self._values[j - 1] if j else zero()
        if j == len(bps) or (j and bps[j - 1] == t):
            return base
        lo = bps[j - 1] if j else Fraction(0)
        frac = (t - lo) / (bps[j] - lo)
        return add(base, scale(frac, self.increments[j]))

    def top_support(self):
        return support(self._values[-1])

    def to_json(self):
        return {
            "kind": "piecewise",
            "breakpoints": [str(b) for b in self.breakpoints],
            "increments": [measure_to_json(m) for m in self.increments],
            "directions": [measure_to_json(m) for m in self.directions()],
        }


@dataclass(frozen=True, eq=False)
class BlackBoxCurve(AllocationCurve):
    """Externally supplied curve, checked only by sampling."""

    fn: Callable[[Mass], Any]
    name: str = "black_box"
    kind = "black_box"

    @property
    def exact(self):
        return False

    def at(self, t, epsilon=DEFAULT_EPSILON):
        value = self.fn(_check_t(t))
        return value if isinstance(value, SparseMeasure) else SparseMeasure(value)

    def to_json(self):
        return {"kind": "black_box", "name": self.name}


def curve_at(curve: AllocationCurve, t, epsilon=DEFAULT_EPSILON) -> SparseMeasure:
    """``phi_t`` of ``curve``; truncated values are :class:`TruncatedMeasure`."""
    return curve.at(_check_t(t), epsilon)


def curve_from_json(payload: Mapping) -> AllocationCurve:
    kind = payload.get("kind")
    if kind == "dirac":
        return DiracCurve(int(payload["target"]))
    if kind == "two_point_split":
        return TwoPointSplit(int(payload["lo"]), int(payload["hi"]), MonotoneGauge.from_json(payload["gauge"]))
    if kind == "dyadic_prime":
        return DyadicPrimeCurve(int(payload["base_index"]))
    if kind == "piecewise":
        return PiecewiseCurve(payload["breakpoints"], [measure_from_json(m) for m in payload["increments"]])
    if kind == "black_box":
        raise ValueError("black_box curves cannot be loaded from JSON")
    raise ValueError(f"unknown curve kind {kind!r}")


# -- families ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AllocationFamily:
    """Curves per point: explicit ``curves`` on a window and/or a ``rule`` for all of X.

    Explicit curves take precedence over the rule. ``name`` is the built-in
    rule name used in JSON.
    """

    curves: Mapping[int, AllocationCurve] = field(default_factory=dict)
    rule: Callable[[int], AllocationCurve] | None = None
    name: str | None = None

    def curve(self, x: int) -> AllocationCurve:
        if x in self.curves:
            return self.curves[x]
        if self.rule is None:
            raise KeyError(f"family is not defined at point {x}")
        return self.rule(check_point(x))

    def defined_at(self, x: int) -> bool:
        return x in self.curves or self.rule is not None

    @property
    def window(self) -> frozenset[int] | None:
        """Declared window, or None when a rule covers all of X."""
        return None if self.rule is not None else frozenset(self.curves)

    def at(self, x: int, t, epsilon=DEFAULT_EPSILON) -> SparseMeasure:
        return curve_at(self.curve(x), t, epsilon)

    def to_json(self) -> dict:
        return {
            "curves": {str(x): self.curves[x].to_json() for x in sorted(self.curves)},
            "rule": self.name if self.rule is not None else None,
        }

    @classmethod
    def from_json(cls, payload: Mapping) -> AllocationFamily:
        curves = {int(x): curve_from_json(c) for x, c in payload.get("curves", {}).items()}
        rule_name = payload.get("rule")
        if rule_name:
            base = builtin_family(rule_name)
            return cls(curves, base.rule, base.name)
        return cls(curves)


def example1_family(gauge: MonotoneGauge | None = None) -> AllocationFamily:
    """Point n splits onto ``{2n, 2n+1}`` through the gauge (default ``ln(1+t)``)."""
    gauge = LogGauge() if gauge is None else gauge
    if not gauge.admissible():
        raise CurveError(f"gauge {gauge.to_json()} is not admissible")
    name = "example1:" + _gauge_name(gauge)
    return AllocationFamily(rule=lambda n: TwoPointSplit(2 * n, 2 * n + 1, gauge), name=name)


def example2_family() -> AllocationFamily:
    """Point n maps onto the powers of the n-th prime by the dyadic curve."""
    return AllocationFamily(rule=DyadicPrimeCurve, name="example2")


def permutation_family(sigma: Mapping[int, int] | Callable[[int], int], name: str | None = None) -> AllocationFamily:
    """Dirac curves ``t * delta_sigma(x)``.

    A mapping that permutes its own keys is extended by the identity to all
    of X; any other injective mapping defines the family on its keys only.
    A callable is taken as a rule on all of X and must be injective.
    """
    if callable(sigma) and not isinstance(sigma, Mapping):
        return AllocationFamily(rule=lambda x: DiracCurve(sigma(x)), name=name or "permutation:<callable>")
    sigma = {check_point(x): check_point(y) for x, y in sigma.items()}
    if len(set(sigma.values())) != len(sigma):
        raise ValueError(f"map is not injective: {sigma}")
    curves = {x: DiracCurve(y) for x, y in sigma.items()}
    if set(sigma.values()) == set(sigma):
        moved = {x: y for x, y in sigma.items() if x != y}
        label = name or ("identity" if not moved else "permutation:" + ",".join(f"{x}>{y}" for x, y in sorted(moved.items())))
        return AllocationFamily(rule=lambda x: DiracCurve(moved.get(x, x)), name=label)
    return AllocationFamily(curves)


def _gauge_name(gauge: MonotoneGauge) -> str:
    if isinstance(gauge, LogGauge):
        return "log"
    if isinstance(gauge, LinearGauge):
        return f"linear:{gauge.alpha}"
    return "custom"


def builtin_family(name: str) -> AllocationFamily:
    """Families by name: ``identity``, ``permutation:1>2,2>1``, ``shift:k``,
    ``example1:log``, ``example1:linear:<alpha>``, ``example2``."""
    head, _, rest = name.partition(":")
    if head == "identity" and not rest:
        return permutation_family({}, name="identity")
    if head == "permutation":
        mapping = {}
        for item in filter(None, rest.split(",")):
            a, sep, b = item.partition(">")
            if not sep:
                raise ValueError(f"bad permutation item {item!r}; expected 'x>y'")
            mapping[int(a)] = int(b)
        if set(mapping.values()) != set(mapping):
            raise ValueError(f"permutation list must permute its own points: {rest!r}")
        return permutation_family(mapping)
    if head == "shift":
        k = int(rest)
        if k < 0:
            raise ValueError("shift must be nonnegative")
        return permutation_family(lambda x: x + k, name=f"shift:{k}")
    if head == "example1":
        if rest == "log" or not rest:
            return example1_family(LogGauge())
        kind, _, alpha = rest.partition(":")
        if kind == "linear":
            return example1_family(LinearGauge(Fraction(alpha)))
        raise ValueError(f"unknown gauge {rest!r}")
    if head == "example2" and not rest:
        return example2_family()
    raise ValueError(f"unknown built-in family {name!r}")


# -- verification --------------------------------------------------------------

@dataclass
class ConditionResult:
    condition: str
    passed: bool
    mode: str
    witness: dict | None = None

    def to_json(self) -> dict:
        return {"condition": self.condition, "passed": self.passed, "mode": self.mode, "witness": self.witness}


@dataclass
class VerificationReport:
    window: frozenset[int]
    grid: tuple
    conditions: list[ConditionResult]
    modes: dict[int, str]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def failure(self) -> ConditionResult | None:
        return next((c for c in self.conditions if not c.passed), None)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "window": sorted(self.window),
            "grid": [mass_to_json(t) for t in self.grid],
            "conditions": [c.to_json() for c in self.conditions],
            "modes": {str(x): m for x, m in sorted(self.modes.items())},
        }


def _tolerance(*measures: SparseMeasure) -> float:
    return FLOAT_ATOL if any(m.backend == "float64" for m in measures) else 0


def _below(lower: SparseMeasure, upper: SparseMeasure) -> int | None:
    """Point where ``lower <= upper`` fails, allowing for a truncated ``upper``."""
    tol = _tolerance(lower, upper)
    tail = tail_of(upper)
    if tail:
        kept = support(upper)
        outside = total_mass(positive_difference(lower, restrict(lower, kept)))
        if outside > tail + tol:
            return min(set(lower) - kept)
        lower = restrict(lower, kept)
    for x, m in lower.items():
        if m > upper.get(x, 0) + tol:
            return x
    return None


def verify_family(family: AllocationFamily, window: Iterable[int], t_grid: Iterable,
                  epsilon=DEFAULT_EPSILON) -> VerificationReport:
    """Check conditions (a)-(c) on a finite window.

    (a) is checked exactly on all pairs of the window. (b) and (c) are
    established by construction for structured curves (mode ``exact``) and
    confirmed on the grid; black-box and float-gauge curves are only checked
    on the grid (mode ``grid``).
    """
    window = frozenset(check_point(x) for x in window)
    grid = tuple(coerce_mass(t) for t in t_grid)
    if not window:
        raise ValueError("window must be nonempty")
    if list(grid) != sorted(set(grid)) or not grid or grid[0] <= 0 or grid[-1] != 1:
        raise ValueError("t_grid must be sorted, inside (0, 1], and contain 1")

    points = sorted(window)
    missing = [x for x in points if not family.defined_at(x)]
    if missing:
        witness = {"point": missing[0], "reason": "family not defined"}
        conds = [ConditionResult(c, False, "exact", witness) for c in "abc"]
        return VerificationReport(window, grid, conds, {})
    curves = {x: family.curve(x) for x in points}
    modes = {x: "exact" if c.exact else "grid" for x, c in curves.items()}

    cond_a = ConditionResult("a", True, "exact")
    tops = {}
    for x in points:
        try:
            tops[x] = curves[x].top_support()
        except MeasureError as exc:
            witness = {"x": x, "reason": f"curve cannot be evaluated at t = 1: {exc}"}
            conds = [ConditionResult(c, False, modes[x], witness) for c in "abc"]
            return VerificationReport(window, grid, conds, modes)
    for i, x in enumerate(points):
        for y in points[i + 1:]:
            hit = support_overlap(tops[x], tops[y])
            if hit is not None:
                cond_a = ConditionResult("a", False, "exact", {"pair": [x, y], "point": hit})
                break
        if not cond_a.passed:
            break

    mode_bc = "exact" if all(m == "exact" for m in modes.values()) else "grid"
    cond_b = ConditionResult("b", True, mode_bc)
    cond_c = ConditionResult("c", True, mode_bc)
    for x in points:
        curve = curves[x]
        problem = curve.structural_problem()
        if problem is not None:
            cond_b = ConditionResult("b", False, modes[x], {"x": x, "reason": problem})
            cond_c = ConditionResult("c", False, modes[x], {"x": x, "reason": problem})
            break
        prev, prev_t = None, None
        for t in grid:
            try:
                value = curve.at(t, epsilon)
            except MeasureError as exc:
                cond_b = ConditionResult("b", False, modes[x], {"x": x, "t": mass_to_json(t), "reason": str(exc)})
                break
            total = total_mass(value) + tail_of(value)
            if cond_b.passed and abs(total - t) > _tolerance(value):
                cond_b = ConditionResult("b", False, modes[x], {"x": x, "t": mass_to_json(t), "total": mass_to_json(total)})
            if prev is not None and cond_c.passed:
                hit = _below(prev, value)
                if hit is not None:
                    cond_c = ConditionResult("c", False, modes[x],
                                             {"x": x, "s": mass_to_json(prev_t), "t": mass_to_json(t), "point": hit})
            prev, prev_t = value, t
        if not (cond_b.passed and cond_c.passed):
            break
    return VerificationReport(window, grid, [cond_a, cond_b, cond_c], modes)

"""Sparse measures on the countable discrete space X = {1, 2, 3, ...}.

Masses are either exact rationals (:class:`fractions.Fraction`, the canonical
backend) or binary64 floats. A measure whose masses contain a float is on the
float backend; every operation below is written against the number protocol
and therefore works on both.
"""

from __future__ import annotations

import json
import math
from collections.abc import Iterable, Iterator, Mapping
from fractions import Fraction
from numbers import Rational
from typing import Callable, Union

Mass = Union[Fraction, float]

#: Absolute tolerance of the float backend.
FLOAT_ATOL = 1e-12

RATIONAL = "rational"
FLOAT64 = "float64"


class MeasureError(ValueError):
    """Raised for malformed measures (bad point label, negative mass, ...)."""


class MeasureParseError(MeasureError):
    """A measure payload could not be decoded.

    ``path`` locates the offending value inside the JSON document, e.g.
    ``points["3"]``.
    """

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


def check_point(x: object) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise MeasureError(f"point label must be a positive integer, got {x!r}")
    if x < 1:
        raise MeasureError(f"point label must be >= 1, got {x}")
    return x


def coerce_mass(value: object) -> Mass:
    """Normalize a mass to ``Fraction`` (exact input) or ``float``."""
    if isinstance(value, bool):
        raise MeasureError(f"mass must be a number, got {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise MeasureError(f"mass must be finite, got {value!r}")
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise MeasureError(f"malformed rational {value!r}") from exc
    raise MeasureError(f"unsupported mass type {type(value).__name__}")


def _prune(value: Mass) -> bool:
    """True when ``value`` is a zero mass that must not be stored."""
    if isinstance(value, float):
        if value < -FLOAT_ATOL:
            raise MeasureError(f"negative mass {value!r}")
        return value <= FLOAT_ATOL
    if value < 0:
        raise MeasureError(f"negative mass {value}")
    return value == 0


class SparseMeasure(Mapping):
    """Finitely supported nonnegative measure, immutable.

    Behaves as a read-only mapping ``point -> mass``; points outside the
    support are absent (``mu.get(x, 0)`` gives the mass of ``{x}``).
    Zero masses are never stored.
    """

    __slots__ = ("_entries", "_hash")

    def __init__(self, entries: Mapping[int, object] | Iterable[tuple[int, object]] = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        data: dict[int, Mass] = {}
        for x, m in items:
            x = check_point(x)
            if x in data:
                raise MeasureError(f"duplicate point {x}")
            m = coerce_mass(m)
            if not _prune(m):
                data[x] = m
        if any(isinstance(m, float) for m in data.values()):
            data = {x: float(m) for x, m in data.items()}
        self._entries = dict(sorted(data.items()))
        self._hash: int | None = None

    @classmethod
    def _trusted(cls, data: dict[int, Mass]) -> SparseMeasure:
        # Caller guarantees valid keys, positive masses and a uniform backend.
        obj = SparseMeasure.__new__(cls)
        obj._entries = dict(sorted(data.items()))
        obj._hash = None
        return obj

    def __getitem__(self, x: int) -> Mass:
        return self._entries[x]

    def __iter__(self) -> Iterator[int]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, SparseMeasure):
            return self._entries == other._entries
        if isinstance(other, Mapping):
            return self._entries == dict(other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._entries.items()))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{x}: {m}" for x, m in self._entries.items())
        return f"{type(self).__name__}({{{body}}})"

    def __add__(self, other: SparseMeasure) -> SparseMeasure:
        return add(self, other)

    @property
    def backend(self) -> str:
        if any(isinstance(m, float) for m in self._entries.values()):
            return FLOAT64
        return RATIONAL

    @property
    def total(self) -> Mass:
        return total_mass(self)

    def mass(self, x: int) -> Mass:
        return self._entries.get(x, Fraction(0))

    def masses(self) -> list[Mass]:
        """Sorted list of the nonzero point masses (the 'shape' of the measure)."""
        return sorted(self._entries.values())

    def to_json(self) -> dict:
        return measure_to_json(self)


class ProbabilityMeasure(SparseMeasure):
    """A :class:`SparseMeasure` of total mass exactly one (float: within FLOAT_ATOL)."""

    __slots__ = ()

    def __init__(self, entries=()):
        super().__init__(entries)
        _check_unit(self)


class TruncatedMeasure(SparseMeasure):
    """Finite truncation of a measure with infinite support.

    ``tail`` is the mass that was dropped; it is always reported, never
    silently discarded.
    """

    __slots__ = ("tail",)

    def __init__(self, entries=(), tail: Mass = Fraction(0)):
        super().__init__(entries)
        self.tail = coerce_mass(tail)

    def __repr__(self) -> str:
        return f"{super().__repr__()[:-1]}, tail={self.tail})"


def _check_unit(mu: SparseMeasure) -> None:
    total = total_mass(mu)
    if isinstance(total, float):
        if abs(total - 1.0) > FLOAT_ATOL:
            raise MeasureError(f"total mass {total!r} != 1")
    elif total != 1:
        raise MeasureError(f"total mass {total} != 1")


def tail_of(mu: SparseMeasure) -> Mass:
    return getattr(mu, "tail", Fraction(0))


def as_probability(mu: SparseMeasure) -> ProbabilityMeasure:
    if type(mu) is ProbabilityMeasure:
        return mu
    _check_unit(mu)
    return ProbabilityMeasure._trusted(dict(mu._entries))


def is_probability(mu: SparseMeasure) -> bool:
    try:
        _check_unit(mu)
    except MeasureError:
        return False
    return True


def to_float(mu: SparseMeasure) -> SparseMeasure:
    """Same measure on the float backend (class preserved)."""
    data = {x: float(m) for x, m in mu.items()}
    out = type(mu)._trusted(data)
    if isinstance(mu, TruncatedMeasure):
        out.tail = float(mu.tail)
    return out


# -- constructors and elementary queries ------------------------------------

def dirac(x: int) -> ProbabilityMeasure:
    return ProbabilityMeasure._trusted({check_point(x): Fraction(1)})


def zero() -> SparseMeasure:
    return SparseMeasure._trusted({})


def total_mass(mu: Mapping[int, Mass]) -> Mass:
    values = list(mu.values())
    if not values:
        return Fraction(0)
    return sum(values[1:], values[0])


def support(mu: SparseMeasure) -> frozenset[int]:
    return frozenset(mu.keys())


# -- lattice and algebra ----------------------------------------------------

def meet(mu: SparseMeasure, nu: SparseMeasure) -> SparseMeasure:
    """Greatest lower bound: the pointwise minimum."""
    if len(nu) < len(mu):
        mu, nu = nu, mu
    return SparseMeasure((x, min(m, nu[x])) for x, m in mu.items() if x in nu)


def positive_difference(mu: SparseMeasure, nu: SparseMeasure) -> SparseMeasure:
    """Nonnegative part of the signed measure ``mu - nu``."""
    out = []
    for x, m in mu.items():
        d = m - nu.get(x, 0)
        if d > 0:
            out.append((x, d))
    return SparseMeasure(out)


def restrict(mu: SparseMeasure, points: Iterable[int]) -> SparseMeasure:
    keep = points if isinstance(points, (set, frozenset)) else frozenset(points)
    return SparseMeasure._trusted({x: m for x, m in mu.items() if x in keep})


def add(mu: SparseMeasure, *others: SparseMeasure) -> SparseMeasure:
    data: dict[int, Mass] = dict(mu.items())
    for nu in others:
        for x, m in nu.items():
            data[x] = data[x] + m if x in data else m
    return SparseMeasure(data)


def scale(c: object, mu: SparseMeasure) -> SparseMeasure:
    c = coerce_mass(c)
    if c < 0:
        raise MeasureError(f"negative scale factor {c}")
    return SparseMeasure((x, c * m) for x, m in mu.items())


def leq(mu: SparseMeasure, nu: SparseMeasure, atol: float = 0.0) -> bool:
    """Pointwise order ``mu({x}) <= nu({x})`` for every x."""
    if not atol:
        return all(m <= nu.get(x, 0) for x, m in mu.items())
    return all(m <= nu.get(x, 0) + atol for x, m in mu.items())


def push_forward(mu: SparseMeasure, sigma: Mapping[int, int] | Callable[[int], int]) -> SparseMeasure:
    """Image measure under a map of points that is injective on the support.

    ``sigma`` may be a mapping (points not listed are fixed) or a callable.
    A probability measure is returned as a probability measure.
    """
    if isinstance(sigma, Mapping):
        lookup = lambda x: sigma.get(x, x)  # noqa: E731
    else:
        lookup = sigma
    data: dict[int, Mass] = {}
    for x, m in mu.items():
        y = check_point(lookup(x))
        if y in data:
            raise MeasureError(f"map is not injective on the support: collision at {y}")
        data[y] = m
    cls = ProbabilityMeasure if isinstance(mu, ProbabilityMeasure) else SparseMeasure
    return cls._trusted(data)


def approx_equal(mu: SparseMeasure, nu: SparseMeasure, atol: float = FLOAT_ATOL) -> bool:
    if mu.backend == RATIONAL and nu.backend == RATIONAL:
        return mu == nu
    return all(abs(mu.get(x, 0) - nu.get(x, 0)) <= atol for x in set(mu) | set(nu))


# -- JSON --------------------------------------------------------------------

def mass_to_json(m: Mass):
    return float(m) if isinstance(m, float) else str(m)


def measure_to_json(mu: SparseMeasure) -> dict:
    """``{"points": {"<id>": "<num>/<den>", ...}}`` with keys in numeric order."""
    payload = {"points": {str(x): mass_to_json(m) for x, m in sorted(mu.items())}}
    if isinstance(mu, TruncatedMeasure) and mu.tail:
        payload["tail"] = mass_to_json(mu.tail)
    return payload


def _decode_mass(raw, path: str) -> Mass:
    if isinstance(raw, bool) or not isinstance(raw, (str, int, float)):
        raise MeasureParseError(f"expected a rational string or number, got {raw!r}", path)
    try:
        m = coerce_mass(raw)
    except MeasureError as exc:
        raise MeasureParseError(str(exc), path) from None
    if m < 0:
        raise MeasureParseError(f"negative mass {raw!r}", path)
    return m


def measure_from_json(payload, *, probability: bool = False) -> SparseMeasure:
    """Decode ``{"points": {...}}``; with ``probability=True`` the total must be 1."""
    if isinstance(payload, (str, bytes)):
        try:
            payload = json.loads(payload)
        except json.JSONDecodeError as exc:
            raise MeasureParseError(f"invalid JSON: {exc.msg}", f"line {exc.lineno} column {exc.colno}") from None
    if not isinstance(payload, dict) or "points" not in payload:
        raise MeasureParseError('expected an object with a "points" member', "$")
    points = payload["points"]
    if not isinstance(points, dict):
        raise MeasureParseError("expected an object", "points")
    entries = []
    for key, raw in points.items():
        path = f"points[{json.dumps(key)}]"
        if not key.isdigit() or int(key) < 1:
            raise MeasureParseError(f"point label must be a positive decimal integer, got {key!r}", path)
        entries.append((int(key), _decode_mass(raw, path)))
    tail = payload.get("tail", 0)
    mu = TruncatedMeasure(entries, _decode_mass(tail, "tail")) if tail else SparseMeasure(entries)
    if probability:
        try:
            return as_probability(mu)
        except MeasureError as exc:
            raise MeasureParseError(str(exc), "points") from None
    return mu

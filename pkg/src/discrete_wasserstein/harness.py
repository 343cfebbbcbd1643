"""Seeded generators and the property suites.

Every generator is a pure function of its configuration (or of the
:class:`~discrete_wasserstein.rng.SplitMix64` stream it is handed). Suite
trials draw from independent sub-streams ``derive_seed(cfg.seed, trial)``,
so any failure can be replayed in isolation with :func:`replay`.
"""

from __future__ import annotations

import math
import time
from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .embed import (
    Certificate,
    CertificateError,
    check_isometric_embedding,
    classify_embedding,
    embedding_oracle,
    extract_family,
    recover_permutation,
)
from .family import (
    DEFAULT_EPSILON,
    AllocationCurve,
    AllocationFamily,
    DiracCurve,
    LinearGauge,
    LogGauge,
    PiecewiseCurve,
    TwoPointSplit,
    example1_family,
    example2_family,
    permutation_family,
    verify_family,
)
from .measure import (
    FLOAT64,
    RATIONAL,
    ProbabilityMeasure,
    SparseMeasure,
    leq,
    measure_to_json,
    meet,
    push_forward,
    restrict,
    support,
    to_float,
    total_mass,
)
from .metric import (
    coupling_cost,
    optimal_coupling,
    oracle_min_cost,
    validate_coupling,
    wasserstein_distance,
    wasserstein_power,
)
from .oracles import collapse_oracle, constant_oracle, mass_swap_oracle
from .rng import SplitMix64, derive_seed

TRIANGLE_TOL = 1e-12
TRIANGLE_PS = (Fraction(1), Fraction(3, 2), Fraction(2), Fraction(5))
SUBUNIT_PS = (Fraction(1, 2), Fraction(1, 3), Fraction(9, 10))
MONOTONE_PS = (Fraction(1), Fraction(3, 2), Fraction(2), Fraction(5), Fraction(10), Fraction(100), Fraction(10**6))
LIMIT_P = Fraction(10**6)
LIMIT_TOL = 1e-6


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 0
    max_support: int = 8
    max_denominator: int = 64
    window: frozenset[int] = frozenset(range(1, 17))

    def __post_init__(self):
        object.__setattr__(self, "window", frozenset(self.window))
        if self.max_support < 1 or self.max_denominator < 1:
            raise ValueError("max_support and max_denominator must be >= 1")
        if not self.window or min(self.window) < 1:
            raise ValueError("window must be a nonempty set of positive integers")

    def with_seed(self, seed: int) -> GeneratorConfig:
        return replace(self, seed=seed)

    @property
    def points(self) -> list[int]:
        return sorted(self.window)


# -- generators --------------------------------------------------------------

def draw_measure(rng: SplitMix64, points: list[int], max_support: int, max_denominator: int) -> ProbabilityMeasure:
    """Random probability measure: k positive integers normalized by their sum."""
    k = rng.integer(1, min(max_support, len(points), max_denominator))
    pts = rng.sample(points, k)
    total = rng.integer(k, max_denominator)
    cuts = sorted(rng.sample(range(1, total), k - 1))
    parts = [b - a for a, b in zip([0, *cuts], [*cuts, total])]
    return ProbabilityMeasure._trusted({x: Fraction(w, total) for x, w in zip(pts, parts)})


def gen_measure(cfg: GeneratorConfig) -> ProbabilityMeasure:
    return draw_measure(SplitMix64(cfg.seed), cfg.points, cfg.max_support, cfg.max_denominator)


def draw_two_point(rng: SplitMix64, points: list[int], max_denominator: int) -> ProbabilityMeasure:
    if len(points) < 2:
        raise ValueError("window needs at least two points")
    x, y = rng.sample(points, 2)
    den = rng.integer(2, max(2, max_denominator))
    a = rng.integer(1, den - 1)
    return ProbabilityMeasure._trusted({x: Fraction(a, den), y: Fraction(den - a, den)})


def gen_two_point(cfg: GeneratorConfig) -> ProbabilityMeasure:
    return draw_two_point(SplitMix64(cfg.seed), cfg.points, cfg.max_denominator)


def draw_pair(rng: SplitMix64, cfg: GeneratorConfig) -> tuple[ProbabilityMeasure, ProbabilityMeasure]:
    """Pair of measures biased towards the interesting cases.

    1/8 equal pairs, 1/8 pairs on disjoint halves of the window, 1/8 pairs
    of Dirac masses, the rest independent draws.
    """
    points = cfg.points
    mode = rng.below(8)
    mu = draw_measure(rng, points, cfg.max_support, cfg.max_denominator)
    if mode == 0:
        return mu, mu
    if mode == 1 and len(points) >= 2:
        rest = [x for x in points if x not in mu]
        if rest:
            return mu, draw_measure(rng, rest, cfg.max_support, cfg.max_denominator)
    if mode == 2:
        return ProbabilityMeasure._trusted({rng.choice(points): Fraction(1)}), \
            ProbabilityMeasure._trusted({rng.choice(points): Fraction(1)})
    return mu, draw_measure(rng, points, cfg.max_support, cfg.max_denominator)


def measure_stream(cfg: GeneratorConfig) -> Callable[[int], ProbabilityMeasure]:
    """``i -> gen_measure(cfg with seed derive_seed(cfg.seed, i))``."""
    return lambda i: gen_measure(cfg.with_seed(derive_seed(cfg.seed, i)))


def _random_rationals(rng: SplitMix64, count: int, max_denominator: int) -> list[Fraction]:
    """``count`` distinct sorted rationals in (0, 1) with a common denominator."""
    den = rng.integer(count + 1, max(count + 1, max_denominator))
    return [Fraction(k, den) for k in sorted(rng.sample(range(1, den), count))]


def _split(rng: SplitMix64, mass: Fraction, block: list[int], max_denominator: int) -> SparseMeasure:
    k = rng.integer(1, len(block))
    pts = rng.sample(block, k)
    weights = [rng.integer(1, max(1, max_denominator // 4)) for _ in pts]
    total = sum(weights)
    return SparseMeasure({x: mass * w / total for x, w in zip(pts, weights)})


def draw_curve(rng: SplitMix64, block: list[int], max_denominator: int) -> AllocationCurve:
    kind = rng.below(3) if len(block) >= 2 else 0
    if kind == 0:
        return DiracCurve(block[0])
    if kind == 1:
        den = rng.integer(1, max_denominator)
        return TwoPointSplit(block[0], block[1], LinearGauge(Fraction(rng.integer(0, den), den)))
    inner = _random_rationals(rng, rng.integer(0, 3), max_denominator)
    breakpoints = [*inner, Fraction(1)]
    increments, prev = [], Fraction(0)
    for b in breakpoints:
        increments.append(_split(rng, b - prev, block, max_denominator))
        prev = b
    return PiecewiseCurve(breakpoints, increments)


def draw_family(rng: SplitMix64, cfg: GeneratorConfig, targets: Iterable[int] | None = None) -> AllocationFamily:
    """Random family on ``cfg.window`` with disjoint target blocks.

    Blocks of 1-4 points are cut from a shuffled target pool (default
    ``1 .. 4 * |window|``); each point gets a Dirac, linear two-point or
    piecewise curve inside its block.
    """
    points = cfg.points
    pool = sorted(targets) if targets is not None else list(range(1, 4 * len(points) + 1))
    if len(pool) < len(points):
        raise ValueError("target pool smaller than the window")
    pool = rng.shuffle(pool)
    spare = len(pool) - len(points)
    curves, pos = {}, 0
    for x in points:
        extra = rng.integer(0, min(3, spare))
        spare -= extra
        block = pool[pos:pos + 1 + extra]
        pos += 1 + extra
        curves[x] = draw_curve(rng, block, cfg.max_denominator)
    return AllocationFamily(curves)


def gen_family(cfg: GeneratorConfig, targets: Iterable[int] | None = None) -> AllocationFamily:
    return draw_family(SplitMix64(cfg.seed), cfg, targets)


def draw_grid(rng: SplitMix64, size: int, max_denominator: int) -> list[Fraction]:
    return [*_random_rationals(rng, size - 1, max_denominator), Fraction(1)]


# -- reports -----------------------------------------------------------------

@dataclass
class SuiteReport:
    suite: str
    trials: int
    backend: str
    seed: int
    failures: list[dict] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "trials": self.trials,
            "backend": self.backend,
            "seed": self.seed,
            "wall_time": round(self.wall_time, 6),
            "failures": self.failures,
        }


class UnknownSuiteError(KeyError):
    pass


# A trial returns the certificates of everything that went wrong.
Trial = Callable[[GeneratorConfig, SplitMix64, int], list[Certificate]]
SUITES: dict[str, tuple[Trial, str]] = {}


def suite(name: str, backend: str = RATIONAL):
    def register(fn: Trial) -> Trial:
        SUITES[name] = (fn, backend)
        return fn
    return register


def _fail(inputs, **details) -> Certificate:
    return Certificate(details.pop("kind", "distance-distortion"), list(inputs), details)


@suite("proposition-oracle")
def _closed_form_vs_oracle(cfg, rng, index):
    mu, nu = draw_pair(rng, cfg)
    closed, solved = wasserstein_power(mu, nu), oracle_min_cost(mu, nu)
    if closed != solved:
        return [_fail([mu, nu], check="closed form vs oracle", power=str(closed), oracle=str(solved))]
    return []


@suite("optimal-coupling")
def _optimal_coupling(cfg, rng, index):
    mu, nu = draw_pair(rng, cfg)
    out = []
    for a, b in ((mu, nu), (mu, mu)):
        pi = optimal_coupling(a, b)
        power = wasserstein_power(a, b)
        if not validate_coupling(pi, a, b):
            out.append(_fail([a, b], check="marginals", coupling=pi.to_json()))
        elif coupling_cost(pi) != power or pi.diagonal_mass() != total_mass(meet(a, b)):
            out.append(_fail([a, b], check="cost", cost=str(coupling_cost(pi)), power=str(power)))
    return out


def _metric_axioms(cfg, rng, index, *, with_limit: bool):
    mu, nu = draw_pair(rng, cfg)
    rho = draw_measure(rng, cfg.points, cfg.max_support, cfg.max_denominator)
    out = []
    for a, b in ((mu, nu), (nu, rho), (mu, rho)):
        if wasserstein_power(a, b) != wasserstein_power(b, a):
            out.append(_fail([a, b], check="symmetry"))
        if (wasserstein_power(a, b) == 0) != (a == b):
            out.append(_fail([a, b], check="identity of indiscernibles"))
        w1 = wasserstein_distance(a, b, 1)
        for p in SUBUNIT_PS:
            if wasserstein_distance(a, b, p) != w1:
                out.append(_fail([a, b], check="p < 1 collapse", p=str(p)))
        if a != b:
            values = [wasserstein_distance(a, b, p) for p in MONOTONE_PS]
            if any(u > v for u, v in zip(values, values[1:])):
                out.append(_fail([a, b], check="monotone in p", values=values))
            if with_limit and not abs(wasserstein_distance(a, b, LIMIT_P) - 1) < LIMIT_TOL:
                out.append(_fail([a, b], check="limit at p = 1e6", power=str(wasserstein_power(a, b)),
                                 distance=wasserstein_distance(a, b, LIMIT_P)))
    for p in TRIANGLE_PS:
        for a, b, c in ((mu, nu, rho), (nu, rho, mu), (rho, mu, nu)):
            lhs = wasserstein_distance(a, c, p)
            rhs = wasserstein_distance(a, b, p) + wasserstein_distance(b, c, p)
            if lhs > rhs + TRIANGLE_TOL:
                out.append(_fail([a, b, c], check="triangle", p=str(p), lhs=lhs, rhs=rhs))
    return out


@suite("triangle", backend=FLOAT64)
def _triangle(cfg, rng, index):
    return _metric_axioms(cfg, rng, index, with_limit=True)


@suite("metric-axioms", backend=FLOAT64)
def _metric_axioms_no_limit(cfg, rng, index):
    """All metric checks except the p = 1e6 limit tolerance."""
    return _metric_axioms(cfg, rng, index, with_limit=False)


@suite("p-limit-bound", backend=FLOAT64)
def _p_limit_bound(cfg, rng, index):
    """``0 <= 1 - W_p <= -ln(W_p^p) / p`` and ``W_p -> 1``."""
    mu, nu = draw_pair(rng, cfg)
    if mu == nu:
        return []
    c = wasserstein_power(mu, nu)
    bound = -math.log(c)
    out = []
    for p in MONOTONE_PS:
        gap = 1 - wasserstein_distance(mu, nu, p)
        if not -1e-15 <= gap <= bound / float(p) + 1e-15:
            out.append(_fail([mu, nu], check="limit bound", p=str(p), gap=gap, bound=bound / float(p)))
    if not 1 - wasserstein_distance(mu, nu, Fraction(10**12)) < 1e-9:
        out.append(_fail([mu, nu], check="convergence at p = 1e12"))
    return out


@suite("distance-one")
def _distance_one(cfg, rng, index):
    mu, nu = draw_pair(rng, cfg)
    disjoint = not (support(mu) & support(nu))
    if (wasserstein_power(mu, nu) == 1) != disjoint:
        return [_fail([mu, nu], check="distance one iff disjoint supports", disjoint=disjoint)]
    return []


@suite("family-generator")
def _family_generator(cfg, rng, index):
    family = draw_family(rng, cfg)
    grid = draw_grid(rng, 8, cfg.max_denominator)
    report = verify_family(family, cfg.window, grid)
    if not report.passed:
        return [_fail([], kind="well-definedness", check="generated family", report=report.to_json())]
    return []


PAIRS_PER_FAMILY = 20


@suite("theorem-converse")
def _embedding_preserves_cost(cfg, rng, index):
    family = draw_family(rng, cfg)
    f = embedding_oracle(family, window=cfg.window)
    pairs = [draw_pair(rng, cfg) for _ in range(PAIRS_PER_FAMILY)]
    report = check_isometric_embedding(f, pairs=pairs)
    return [] if report.passed else [report.counterexample]


@suite("proof-identities")
def _proof_identities(cfg, rng, index):
    """Meet mass, support disjointness, block masses and block monotonicity under f."""
    family = draw_family(rng, cfg)
    f = embedding_oracle(family, window=cfg.window)
    tops = {x: support(f(ProbabilityMeasure._trusted({x: Fraction(1)}))) for x in cfg.points}
    out = []
    for _ in range(PAIRS_PER_FAMILY):
        mu, nu = draw_pair(rng, cfg)
        f_mu, f_nu = f(mu), f(nu)
        if total_mass(meet(f_mu, f_nu)) != total_mass(meet(mu, nu)):
            out.append(_fail([mu, nu], check="meet mass"))
        if bool(support(mu) & support(nu)) != bool(support(f_mu) & support(f_nu)):
            out.append(_fail([mu, nu], check="disjointness"))
        for x in cfg.points:
            if total_mass(restrict(f_mu, tops[x])) != mu.get(x, 0):
                out.append(_fail([mu], check="block mass", x=x))
            if mu.get(x, 0) <= nu.get(x, 0) and not leq(restrict(f_mu, tops[x]), restrict(f_nu, tops[x])):
                out.append(_fail([mu, nu], check="block monotonicity", x=x))
    return out


ROUNDTRIP_GRID = 8
ROUNDTRIP_COMPANIONS = 4


@suite("theorem-roundtrip")
def _extraction_round_trip(cfg, rng, index):
    family = draw_family(rng, cfg)
    f = embedding_oracle(family, window=cfg.window)
    grid = draw_grid(rng, ROUNDTRIP_GRID, cfg.max_denominator)
    companions = rng.sample(cfg.points, min(ROUNDTRIP_COMPANIONS, len(cfg.points)))
    try:
        extracted = extract_family(f, cfg.window, grid, companions)
    except CertificateError as exc:
        return [exc.certificate]
    out = []
    for x in cfg.points:
        for t in grid:
            if extracted.at(x, t) != family.at(x, t):
                out.append(_fail([], kind="well-definedness", check="round trip", x=x, t=str(t),
                                 extracted=measure_to_json(extracted.at(x, t)),
                                 expected=measure_to_json(family.at(x, t))))
    return out


def _distorts(f, cert: Certificate) -> bool:
    mu, nu = cert.distorted_pair()
    before = oracle_min_cost(mu, nu)
    return wasserstein_power(f(mu), f(nu)) != before and before == wasserstein_power(mu, nu)


def _negative(f, cfg, rng, name):
    pairs = [draw_pair(rng, cfg) for _ in range(PAIRS_PER_FAMILY)]
    pairs.append((ProbabilityMeasure._trusted({1: Fraction(1)}), ProbabilityMeasure._trusted({2: Fraction(1)})))
    report = check_isometric_embedding(f, pairs=pairs)
    if report.passed or not _distorts(f, report.counterexample):
        return [_fail([], kind="well-definedness", check=f"negative control {name} not caught")]
    return []


@suite("neg-constant")
def _neg_constant(cfg, rng, index):
    return _negative(constant_oracle(), cfg, rng, "constant")


@suite("neg-collapse")
def _neg_collapse(cfg, rng, index):
    return _negative(collapse_oracle(), cfg, rng, "collapse")


@suite("neg-swap")
def _neg_swap(cfg, rng, index):
    f = mass_swap_oracle()
    others = [y for y in cfg.points if y not in (1, 2)]
    companions = rng.shuffle([2, *rng.sample(others, min(2, len(others)))])
    grid = sorted({*draw_grid(rng, 4, cfg.max_denominator), Fraction(1, 2)})
    try:
        extract_family(f, [1], grid, companions)
    except CertificateError as exc:
        if exc.certificate.distorted_pair() is not None and _distorts(f, exc.certificate):
            return []
    return [_fail([], kind="well-definedness", check="negative control mass-swap not caught")]


@suite("corollary")
def _permutation_recovery(cfg, rng, index):
    size = rng.integer(1, min(16, len(cfg.points)))
    window = sorted(rng.sample(cfg.points, size))
    sigma = dict(zip(window, rng.shuffle(window)))
    f = embedding_oracle(permutation_family(sigma))
    sub = replace(cfg, window=frozenset(window), seed=derive_seed(cfg.seed, index, 1))
    samples = [measure_stream(sub)(i) for i in range(20)]
    try:
        got = recover_permutation(f, window, samples=samples)
    except (CertificateError, ValueError) as exc:
        return [_fail([], kind="well-definedness", check="recover_permutation raised", error=str(exc))]
    out = []
    if got != sigma:
        out.append(_fail([], kind="well-definedness", check="recovered sigma", got=got, want=sigma))
    for mu in samples:
        if f(mu) != push_forward(mu, got):
            out.append(_fail([mu], kind="well-definedness", check="push-forward reconstruction"))
    report = classify_embedding(f, window, measure_stream(sub), 20)
    if not (report.permutation_induced and report.preserves_dirac and report.shape_preserving
            and not report.splits_mass and not report.exotic):
        out.append(_fail([], kind="well-definedness", check="classification", report=report.to_json()))
    return out


@suite("example1-linear")
def _example1_linear(cfg, rng, index):
    den = rng.integer(1, 16)
    gauge = LinearGauge(Fraction(rng.integer(0, den), den))
    f = embedding_oracle(example1_family(gauge))
    report = check_isometric_embedding(f, pairs=[draw_pair(rng, cfg)])
    return [] if report.passed else [report.counterexample]


@suite("example1-log", backend=FLOAT64)
def _example1_log(cfg, rng, index):
    f = embedding_oracle(example1_family(LogGauge()))
    mu, nu = draw_pair(rng, cfg)
    report = check_isometric_embedding(f, pairs=[(to_float(mu), to_float(nu))], tolerance=1e-12)
    return [] if report.passed else [report.counterexample]


def example2_tolerance(epsilon=DEFAULT_EPSILON):
    return lambda mu, nu: 2 * len(support(mu) | support(nu)) * epsilon


@suite("example2")
def _example2(cfg, rng, index):
    f = embedding_oracle(example2_family())
    report = check_isometric_embedding(f, pairs=[draw_pair(rng, cfg)], tolerance=example2_tolerance())
    return [] if report.passed else [report.counterexample]


# -- running -----------------------------------------------------------------

def _run_trial(name: str, cfg: GeneratorConfig, index: int) -> list[dict]:
    fn, _ = SUITES[name]
    seed = derive_seed(cfg.seed, index)
    failures = []
    for cert in fn(cfg, SplitMix64(seed), index):
        failures.append({"trial": index, "seed": seed, "certificate": cert.to_json()})
    return failures


def _run_chunk(args) -> list[dict]:
    name, cfg, indices = args
    return [f for i in indices for f in _run_trial(name, cfg, i)]


def run_suite(name: str, cfg: GeneratorConfig | None = None, trials: int = 100, *, workers: int = 1) -> SuiteReport:
    """Run ``trials`` seeded trials of a registered suite.

    With ``workers > 1`` trials are spread across processes; failures are
    merged in trial order, so the report does not depend on ``workers``.
    """
    if name not in SUITES:
        raise UnknownSuiteError(f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    cfg = cfg or GeneratorConfig()
    start = time.perf_counter()
    if workers > 1:
        chunks = [(name, cfg, range(k, trials, workers)) for k in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            failures = [f for part in pool.map(_run_chunk, chunks) for f in part]
        failures.sort(key=lambda f: f["trial"])
    else:
        failures = _run_chunk((name, cfg, range(trials)))
    return SuiteReport(name, trials, SUITES[name][1], cfg.seed, failures, time.perf_counter() - start)


def replay(name: str, cfg: GeneratorConfig, trial: int) -> list[dict]:
    """Re-run one trial of a suite; reproduces the failures recorded for it."""
    return _run_trial(name, cfg, trial)


__all__ = [
    "SUITES",
    "GeneratorConfig",
    "SuiteReport",
    "UnknownSuiteError",
    "draw_family",
    "draw_measure",
    "draw_pair",
    "gen_family",
    "gen_measure",
    "gen_two_point",
    "measure_stream",
    "replay",
    "run_suite",
]

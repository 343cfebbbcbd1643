"""Isometric embeddings of the Wasserstein space over X.

Forward: a verified allocation family generates an embedding
(:func:`apply_embedding`). Backward: an embedding given as a black box
determines its family through restrictions of images of two-point measures
(:func:`extract_family`). Permutation-induced embeddings are recognized by
:func:`recover_permutation`, and :func:`classify_embedding` reports the
shape / Dirac-mass behaviour of a map on a finite window.
"""

from __future__ import annotations

import json
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .family import (
    DEFAULT_EPSILON,
    AllocationFamily,
    CurveError,
    DiracCurve,
    PiecewiseCurve,
    VerificationReport,
    support_overlap,
    verify_family,
)
from .measure import (
    FLOAT_ATOL,
    Mass,
    ProbabilityMeasure,
    SparseMeasure,
    TruncatedMeasure,
    add,
    approx_equal,
    as_probability,
    check_point,
    dirac,
    mass_to_json,
    measure_from_json,
    measure_to_json,
    push_forward,
    restrict,
    support,
    tail_of,
    total_mass,
    zero,
)
from .metric import PParameter, wasserstein_distance, wasserstein_power
from .rng import SplitMix64

CERTIFICATE_KINDS = ("well-definedness", "distance-distortion", "support-collision")


# -- certificates --------------------------------------------------------------

@dataclass
class Certificate:
    """Serializable evidence that a map is not an isometric embedding."""

    kind: str
    inputs: list[SparseMeasure]
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in CERTIFICATE_KINDS:
            raise ValueError(f"unknown certificate kind {self.kind!r}")

    def to_json(self) -> dict:
        return {"kind": self.kind, "inputs": [measure_to_json(m) for m in self.inputs], "details": self.details}

    @classmethod
    def from_json(cls, payload) -> Certificate:
        if isinstance(payload, str):
            payload = json.loads(payload)
        inputs = [measure_from_json(m) for m in payload["inputs"]]
        return cls(payload["kind"], inputs, dict(payload.get("details", {})))

    def distorted_pair(self) -> tuple[SparseMeasure, SparseMeasure] | None:
        pair = self.details.get("pair")
        if pair is None:
            return None
        return self.inputs[pair[0]], self.inputs[pair[1]]


class CertificateError(Exception):
    """Raised when an interrogated map is caught violating the embedding laws."""

    def __init__(self, certificate: Certificate, message: str = ""):
        self.certificate = certificate
        super().__init__(message or f"{certificate.kind} certificate")


class FamilyError(ValueError):
    """The family fails verification on the window an operation needs."""

    def __init__(self, report: VerificationReport):
        self.report = report
        failure = report.failure()
        super().__init__(f"family fails condition ({failure.condition}): {failure.witness}")


class NotDiracPreservingError(ValueError):
    def __init__(self, point: int, image: SparseMeasure):
        self.point = point
        self.image = image
        super().__init__(f"image of the Dirac mass at {point} is not a Dirac mass: {image}")


# -- oracles -------------------------------------------------------------------

@dataclass(eq=False)
class EmbeddingOracle:
    """A map of measures given as a black box.

    ``eval`` must be deterministic. ``reentrant`` declares that it may be
    called concurrently.
    """

    eval: Callable[[SparseMeasure], SparseMeasure]
    window_hint: frozenset[int] = frozenset()
    name: str = "oracle"
    reentrant: bool = True

    def __call__(self, mu: SparseMeasure) -> SparseMeasure:
        image = self.eval(mu)
        return image if isinstance(image, SparseMeasure) else SparseMeasure(image)


def _distortion(mu, nu, f_mu, f_nu, tol=0) -> dict | None:
    before, after = wasserstein_power(mu, nu), wasserstein_power(f_mu, f_nu)
    if abs(before - after) > tol:
        return {"power": mass_to_json(before), "image_power": mass_to_json(after)}
    return None


def _find_distortion(f: Callable, measures: Sequence[SparseMeasure], images: Sequence[SparseMeasure] | None = None):
    """First pair (i, j) among ``measures`` whose distance ``f`` changes."""
    images = [f(m) for m in measures] if images is None else images
    for i in range(len(measures)):
        for j in range(i + 1, len(measures)):
            d = _distortion(measures[i], measures[j], images[i], images[j])
            if d is not None:
                return i, j, d
    return None


# -- forward direction: family -> embedding --------------------------------------

def apply_embedding(family: AllocationFamily, mu: SparseMeasure, epsilon=DEFAULT_EPSILON,
                    *, check: bool = True) -> SparseMeasure:
    """``f(mu) = sum over x in S(mu) of phi[x, mu({x})]``.

    With ``check`` the family is verified on ``S(mu)`` (at the grid of the
    masses of ``mu``) first and a :class:`FamilyError` is raised on failure.
    Returns a :class:`ProbabilityMeasure` when nothing was truncated and a
    :class:`TruncatedMeasure` carrying the total dropped mass otherwise.
    """
    if check:
        grid = sorted(set(mu.values()) | {Fraction(1)})
        report = verify_family(family, support(mu), grid, epsilon)
        if not report.passed:
            raise FamilyError(report)
    parts = [family.at(x, m, epsilon) for x, m in mu.items()]
    image = add(zero(), *parts)
    tail = sum((tail_of(part) for part in parts), Fraction(0))
    if tail:
        return TruncatedMeasure(image, tail)
    if any(isinstance(m, float) for m in image.values()):
        if abs(float(total_mass(image)) - 1.0) <= FLOAT_ATOL * max(1, len(image)):
            return ProbabilityMeasure._trusted(dict(image.items()))
        return image
    return as_probability(image)


def embedding_oracle(family: AllocationFamily, epsilon=DEFAULT_EPSILON, *,
                     window: Iterable[int] = (), name: str | None = None) -> EmbeddingOracle:
    """Oracle for the embedding generated by ``family``.

    When a window is given, (a) is verified once there and per-call checks
    are skipped for measures supported in it.
    """
    window = frozenset(window)
    if window:
        report = verify_family(family, window, [Fraction(1)], epsilon)
        if not report.passed:
            raise FamilyError(report)

    def evaluate(mu):
        inside = bool(window) and support(mu) <= window
        return apply_embedding(family, mu, epsilon, check=not inside)

    return EmbeddingOracle(evaluate, window, name or family.name or "family")


# -- backward direction: embedding -> family --------------------------------------

def _two_point(x: int, t: Fraction, y: int) -> ProbabilityMeasure:
    if t == 1:
        return dirac(x)
    return ProbabilityMeasure._trusted({x: t, y: 1 - t})


def extract_family(f: Callable[[SparseMeasure], SparseMeasure], window: Iterable[int], t_grid: Iterable,
                   companions: Sequence[int]) -> AllocationFamily:
    """Recover the allocation family of an embedding on a grid.

    ``T_x`` is the support of ``f(delta_x)``; for grid value t < 1 the value
    ``phi[x, t]`` is ``f(t delta_x + (1-t) delta_y)`` restricted to ``T_x``,
    with y the first companion different from x. Every further companion
    must give exactly the same restriction. Only Dirac masses and two-point
    measures are ever passed to ``f``.

    Raises :class:`CertificateError` when ``f`` is caught not being an
    isometric embedding (overlapping ``T_x``, companion-dependent
    restrictions, or grid values violating the total/monotonicity laws).
    """
    window = sorted(frozenset(check_point(x) for x in window))
    grid = sorted({Fraction(t) for t in t_grid})
    companions = [check_point(y) for y in companions]
    if not window:
        raise ValueError("window must be nonempty")
    if not grid or grid[0] <= 0 or grid[-1] != 1:
        raise ValueError("t_grid must lie in (0, 1] and contain 1")
    if len(set(companions)) < 2:
        raise ValueError("at least two distinct companions are required")

    cache: dict[SparseMeasure, SparseMeasure] = {}

    def image(mu):
        if mu not in cache:
            cache[mu] = f(mu)
        return cache[mu]

    tops = {x: support(image(dirac(x))) for x in window}
    for i, x in enumerate(window):
        for y in window[i + 1:]:
            hit = support_overlap(tops[x], tops[y])
            if hit is not None:
                raise CertificateError(Certificate(
                    "support-collision", [dirac(x), dirac(y)],
                    {"x": x, "y": y, "point": hit, "pair": [0, 1],
                     "power": "1", "image_power": mass_to_json(wasserstein_power(image(dirac(x)), image(dirac(y))))},
                ), f"images of delta_{x} and delta_{y} overlap at {hit}")

    curves = {}
    for x in window:
        mates = [y for y in dict.fromkeys(companions) if y != x]
        if not mates:
            raise ValueError(f"no companion different from {x}")
        values = []
        for t in grid:
            if t == 1:
                values.append(image(dirac(x)))
                continue
            first = _two_point(x, t, mates[0])
            value = restrict(image(first), tops[x])
            for other in mates[1:]:
                probe = _two_point(x, t, other)
                again = restrict(image(probe), tops[x])
                if again != value:
                    details = {"x": x, "t": str(t), "y": mates[0], "y_prime": other,
                               "restriction_y": measure_to_json(value),
                               "restriction_y_prime": measure_to_json(again)}
                    found = _find_distortion(image, [first, probe])
                    if found is not None:
                        details.update(pair=[0, 1], **found[2])
                    raise CertificateError(Certificate("well-definedness", [first, probe], details),
                                           f"restriction to T_{x} at t={t} depends on the companion")
            values.append(value)
        if any(tail_of(v) or v.backend != "rational" for v in values):
            raise ValueError(f"extraction needs exact, untruncated images (point {x})")
        try:
            curve = _curve_from_grid(x, grid, values)
        except CurveError as exc:
            probes = [dirac(x)] + [_two_point(x, t, mates[0]) for t in grid if t != 1]
            found = _find_distortion(image, probes)
            if found is not None:
                i, j, d = found
                raise CertificateError(Certificate("distance-distortion", [probes[i], probes[j]],
                                                   {"x": x, "reason": str(exc), "pair": [0, 1], **d})) from None
            raise CertificateError(Certificate("well-definedness", probes, {"x": x, "reason": str(exc)})) from None
        curves[x] = curve
    return AllocationFamily(curves)


def _curve_from_grid(x: int, grid: list[Fraction], values: list[SparseMeasure]) -> PiecewiseCurve | DiracCurve:
    for t, v in zip(grid, values):
        if tail_of(v) or v.backend != "rational":
            raise ValueError(f"extraction needs exact, untruncated images; got {v!r} at x={x}, t={t}")
        if total_mass(v) != t:
            raise CurveError(f"phi[{x}, {t}] has total mass {total_mass(v)}")
    points = {y for v in values for y in v}
    if len(points) == 1:
        return DiracCurve(points.pop())
    return PiecewiseCurve.from_values(grid, values)


# -- distance preservation ----------------------------------------------------------

@dataclass
class IsometryReport:
    passed: bool
    trials: int
    counterexample: Certificate | None = None

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "trials": self.trials,
            "counterexample": None if self.counterexample is None else self.counterexample.to_json(),
        }


def check_isometric_embedding(f: Callable[[SparseMeasure], SparseMeasure], gen: Callable[[int], SparseMeasure] | None = None,
                              trials: int = 100, p=1, *, pairs: Iterable[tuple] | None = None,
                              tolerance: Mass | Callable[[SparseMeasure, SparseMeasure], Mass] = 0) -> IsometryReport:
    """Compare distances before and after ``f`` on sampled pairs.

    Pairs are ``(gen(2i), gen(2i+1))`` for ``i < trials``, or the explicit
    ``pairs``. For finite p the exact transport costs are compared (equal
    costs give equal distances for every finite p); for p = inf the
    distances themselves. ``tolerance`` may depend on the pair.
    """
    p = PParameter.parse(p)
    if pairs is None:
        if gen is None:
            raise ValueError("either gen or pairs is required")
        if trials < 1:
            raise ValueError("trials must be >= 1")
        pairs = ((gen(2 * i), gen(2 * i + 1)) for i in range(trials))
    count = 0
    for mu, nu in pairs:
        count += 1
        f_mu, f_nu = f(mu), f(nu)
        tol = tolerance(mu, nu) if callable(tolerance) else tolerance
        if p.is_infinite:
            before, after = wasserstein_distance(mu, nu, p), wasserstein_distance(f_mu, f_nu, p)
        else:
            before, after = wasserstein_power(mu, nu), wasserstein_power(f_mu, f_nu)
        if abs(before - after) > tol:
            cert = Certificate("distance-distortion", [mu, nu],
                               {"pair": [0, 1], "p": str(p), "trial": count - 1,
                                "power": mass_to_json(before), "image_power": mass_to_json(after),
                                "images": [measure_to_json(f_mu), measure_to_json(f_nu)]})
            return IsometryReport(False, count, cert)
    if count == 0:
        raise ValueError("no pairs to check")
    return IsometryReport(True, count)


# -- permutations ------------------------------------------------------------------

def _window_samples(window: Sequence[int], count: int, seed: int) -> list[ProbabilityMeasure]:
    rng = SplitMix64(seed)
    out = []
    for _ in range(count):
        k = rng.integer(1, min(len(window), 6))
        pts = rng.sample(window, k)
        weights = [rng.integer(1, 16) for _ in pts]
        total = sum(weights)
        out.append(ProbabilityMeasure._trusted({x: Fraction(w, total) for x, w in zip(pts, weights)}))
    return out


def _dirac_target(image: SparseMeasure) -> int | None:
    if len(image) != 1:
        return None
    (x, m), = image.items()
    if (m != 1 if not isinstance(m, float) else abs(m - 1) > FLOAT_ATOL):
        return None
    return x


def recover_permutation(f: Callable[[SparseMeasure], SparseMeasure], window: Iterable[int], *,
                        samples: Iterable[SparseMeasure] | None = None, n_samples: int = 20,
                        seed: int = 0) -> dict[int, int]:
    """The point map ``sigma`` with ``f(delta_x) = delta_sigma(x)`` on the window.

    ``sigma`` must be injective and ``f(mu)`` must equal the push-forward of
    ``mu`` by ``sigma`` on every sample supported in the window (default:
    ``n_samples`` seeded random measures).
    """
    window = sorted(frozenset(check_point(x) for x in window))
    sigma: dict[int, int] = {}
    seen: dict[int, int] = {}
    for x in window:
        img = f(dirac(x))
        y = _dirac_target(img)
        if y is None:
            raise NotDiracPreservingError(x, img)
        if y in seen:
            raise CertificateError(Certificate(
                "distance-distortion", [dirac(seen[y]), dirac(x)],
                {"pair": [0, 1], "power": "1", "image_power": "0", "point": y}),
                f"delta_{seen[y]} and delta_{x} have the same image")
        seen[y] = x
        sigma[x] = y
    checks = list(samples) if samples is not None else _window_samples(window, n_samples, seed)
    for mu in checks:
        if not support(mu) <= set(window):
            raise ValueError(f"sample {mu} leaves the window")
        got, want = f(mu), push_forward(mu, sigma)
        if not approx_equal(got, want):
            probes = [mu] + [dirac(x) for x in sorted(mu)]
            found = _find_distortion(f, probes)
            details = {"sigma": {str(k): v for k, v in sigma.items()}, "image": measure_to_json(got),
                       "push_forward": measure_to_json(want)}
            if found is not None:
                i, j, d = found
                raise CertificateError(Certificate("distance-distortion", [probes[i], probes[j]],
                                                   {**details, "pair": [0, 1], **d}))
            raise CertificateError(Certificate("well-definedness", [mu], details),
                                   "map agrees with sigma on Dirac masses but not on mu")
    return sigma


# -- classification --------------------------------------------------------------

@dataclass
class ClassificationReport:
    window: frozenset[int]
    permutation_induced: bool
    preserves_dirac: bool
    splits_mass: bool
    shape_preserving: bool
    exotic: bool
    samples: int
    sigma: dict[int, int] | None = None
    witnesses: list[tuple[SparseMeasure, str]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "window": sorted(self.window),
            "permutation_induced": self.permutation_induced,
            "sigma": None if self.sigma is None else {str(k): v for k, v in sorted(self.sigma.items())},
            "preserves_dirac": self.preserves_dirac,
            "splits_mass": self.splits_mass,
            "shape_preserving": self.shape_preserving,
            "exotic": self.exotic,
            "samples": self.samples,
            "beyond_window": "unknown",
            "witnesses": [{"input": measure_to_json(m), "diagnostic": d} for m, d in self.witnesses],
        }


def _same_shape(a: SparseMeasure, b: SparseMeasure) -> bool:
    if tail_of(a) or tail_of(b):
        return False
    ma, mb = a.masses(), b.masses()
    if len(ma) != len(mb):
        return False
    tol = FLOAT_ATOL if a.backend == "float64" or b.backend == "float64" else 0
    return all(abs(x - y) <= tol for x, y in zip(ma, mb))


def classify_embedding(f: Callable[[SparseMeasure], SparseMeasure], window: Iterable[int],
                       gen: Callable[[int], SparseMeasure] | None = None, trials: int = 20) -> ClassificationReport:
    """Dirac-preservation, shape-preservation and permutation test on a window.

    Samples are the Dirac masses of the window plus ``gen(i)`` for
    ``i < trials``. Shape preservation means the sorted point masses of
    ``f(mu)`` equal those of ``mu`` on every sample; it is reported as
    holding on the samples, not universally.
    """
    window = frozenset(check_point(x) for x in window)
    points = sorted(window)
    witnesses: list[tuple[SparseMeasure, str]] = []
    diracs = [dirac(x) for x in points]
    extra = [gen(i) for i in range(trials)] if gen is not None else _window_samples(points, trials, 0)
    samples = diracs + extra
    images = {}
    for mu in samples:
        images[mu] = f(mu)

    preserves_dirac = True
    for x, mu in zip(points, diracs):
        if _dirac_target(images[mu]) is None:
            preserves_dirac = False
            witnesses.append((mu, f"image of delta_{x} has support {sorted(support(images[mu]))}"))
            break

    shape_preserving = True
    for mu in samples:
        if not _same_shape(mu, images[mu]):
            shape_preserving = False
            witnesses.append((mu, f"masses {list(map(mass_to_json, images[mu].masses()))} "
                                  f"differ from {list(map(mass_to_json, mu.masses()))}"))
            break

    sigma = None
    permutation_induced = False
    if preserves_dirac:
        targets = {x: _dirac_target(images[mu]) for x, mu in zip(points, diracs)}
        if len(set(targets.values())) == len(targets):
            sigma = targets
            mismatch = next((mu for mu in extra if support(mu) <= window
                             and not approx_equal(images[mu], push_forward(mu, sigma))), None)
            if mismatch is None:
                permutation_induced = True
            else:
                witnesses.append((mismatch, "image differs from the push-forward by sigma"))
        else:
            witnesses.append((diracs[0], "two Dirac masses share an image"))

    return ClassificationReport(
        window=window,
        permutation_induced=permutation_induced,
        preserves_dirac=preserves_dirac,
        splits_mass=not preserves_dirac,
        shape_preserving=shape_preserving,
        exotic=not shape_preserving,
        samples=len(samples),
        sigma=sigma,
        witnesses=witnesses,
    )


__all__ = [
    "CERTIFICATE_KINDS",
    "Certificate",
    "CertificateError",
    "ClassificationReport",
    "EmbeddingOracle",
    "FamilyError",
    "IsometryReport",
    "NotDiracPreservingError",
    "apply_embedding",
    "check_isometric_embedding",
    "classify_embedding",
    "embedding_oracle",
    "extract_family",
    "recover_permutation",
]

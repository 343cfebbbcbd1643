"""Built-in embedding oracles, negative controls, and the subprocess oracle.

Negative controls are maps that are *not* isometric embeddings and must be
caught by the checks in :mod:`discrete_wasserstein.embed`:

``constant``
    every measure goes to ``delta_1``;
``collapse``
    push-forward by the non-injective point map ``1, 2 -> 1``;
``mass-swap``
    the embedding of ``example1:linear:1/3``, except that for measures with
    mass exactly 1/2 at point 1 and positive mass at point 2 the masses at
    points 2 and 3 (the block of point 1) are exchanged.
"""

from __future__ import annotations

import json
import shlex
import subprocess
from fractions import Fraction

from .embed import EmbeddingOracle, embedding_oracle
from .family import DEFAULT_EPSILON, LinearGauge, builtin_family, example1_family
from .measure import (
    ProbabilityMeasure,
    SparseMeasure,
    dirac,
    measure_from_json,
    measure_to_json,
)

NEGATIVE_CONTROLS = ("constant", "collapse", "mass-swap")


class OracleProtocolError(RuntimeError):
    """The child process of a pipe oracle broke the request/response protocol."""


def constant_oracle(target: int = 1) -> EmbeddingOracle:
    image = dirac(target)
    return EmbeddingOracle(lambda mu: image, frozenset(), "constant")


def collapse_oracle() -> EmbeddingOracle:
    def evaluate(mu):
        out: dict[int, object] = {}
        for x, m in mu.items():
            y = 1 if x in (1, 2) else x
            out[y] = out.get(y, 0) + m
        return ProbabilityMeasure(out)

    return EmbeddingOracle(evaluate, frozenset({1, 2}), "collapse")


def mass_swap_oracle(epsilon=DEFAULT_EPSILON) -> EmbeddingOracle:
    base = embedding_oracle(example1_family(LinearGauge(Fraction(1, 3))), epsilon)

    def evaluate(mu):
        image = base(mu)
        if mu.get(1, 0) == Fraction(1, 2) and mu.get(2, 0) > 0:
            data = dict(image.items())
            data[2], data[3] = data.get(3, 0), data.get(2, 0)
            return ProbabilityMeasure(data)
        return image

    return EmbeddingOracle(evaluate, frozenset({1, 2, 3}), "mass-swap")


def builtin_oracle(name: str, epsilon=DEFAULT_EPSILON) -> EmbeddingOracle:
    """Oracle by name: any built-in family name or a negative control."""
    if name == "constant":
        return constant_oracle()
    if name == "collapse":
        return collapse_oracle()
    if name == "mass-swap":
        return mass_swap_oracle(epsilon)
    return embedding_oracle(builtin_family(name), epsilon, name=name)


class PipeOracle:
    """Oracle served by a child process, one JSON measure per line each way.

    Requests and responses are ``{"points": {...}}`` objects on a single
    line. Answers are cached, so the child sees every distinct measure once.
    """

    def __init__(self, command: str | list[str], timeout: float = 30.0):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout
        self._proc: subprocess.Popen | None = None
        self._cache: dict[SparseMeasure, SparseMeasure] = {}

    def _start(self) -> subprocess.Popen:
        if self._proc is None:
            self._proc = subprocess.Popen(self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                          text=True, bufsize=1)
        return self._proc

    def __call__(self, mu: SparseMeasure) -> SparseMeasure:
        if mu in self._cache:
            return self._cache[mu]
        proc = self._start()
        try:
            proc.stdin.write(json.dumps(measure_to_json(mu)) + "\n")
            proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise OracleProtocolError(f"oracle process is not accepting requests: {exc}") from None
        line = proc.stdout.readline()
        if not line:
            raise OracleProtocolError(f"oracle process closed its output (exit code {proc.poll()})")
        try:
            image = measure_from_json(line)
        except ValueError as exc:
            raise OracleProtocolError(f"bad response {line.strip()!r}: {exc}") from None
        self._cache[mu] = image
        return image

    def close(self) -> None:
        if self._proc is not None:
            if self._proc.stdin:
                self._proc.stdin.close()
            try:
                self._proc.wait(timeout=self.timeout)
            except subprocess.TimeoutExpired:
                self._proc.kill()
            self._proc = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def serve(oracle, stdin, stdout) -> None:
    """Answer pipe-oracle requests from ``stdin`` until EOF."""
    for line in stdin:
        if not line.strip():
            continue
        mu = measure_from_json(line, probability=True)
        stdout.write(json.dumps(measure_to_json(oracle(mu))) + "\n")
        stdout.flush()

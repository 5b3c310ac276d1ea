"""Brute-force search for bootstrap distillation sequences."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .distill import oplus, star
from .noise import Basis, PauliOdds, infidelity, normalize
from .pipeline import Distill, Schedule, eval_schedule

__all__ = ["SearchSpec", "SearchResult", "search_bootstrap", "enumerate_sequences", "meets_threshold"]

MAX_DEPTH = 12
_HALF = Fraction(1, 2)


@dataclass
class SearchSpec:
    start: PauliOdds
    threshold: float = 1e-3
    max_depth: int = 8
    all_minimal: bool = False

    def __post_init__(self):
        if not (0 < self.threshold < 0.5):
            raise ValueError("threshold must lie in (0, 0.5)")
        if not (0 <= self.max_depth <= MAX_DEPTH):
            raise ValueError(f"max_depth must lie in [0, {MAX_DEPTH}]")


@dataclass
class SearchResult:
    found: bool
    sequence: list = field(default_factory=list)
    final: PauliOdds | None = None
    reports: list = field(default_factory=list)
    minimal_solutions: list = field(default_factory=list)
    explored: int = 0

    def sequence_str(self) -> str:
        return ",".join(str(b) for b in self.sequence) or "(none)"


def meets_threshold(u: PauliOdds, threshold) -> bool:
    u = normalize(u)
    return u.x <= threshold and u.y <= threshold and u.z <= threshold


def _children(state: PauliOdds, cost: float) -> Iterator[tuple[Basis, PauliOdds, float]]:
    for b in Basis:
        d = star(state, state, b)
        if d >= 1:
            continue
        out = normalize(oplus(state, state, b))
        if infidelity(out) >= _HALF:
            continue
        yield b, out, cost * 2 / (1 - d)


def enumerate_sequences(start: PauliOdds, depth: int) -> Iterator[tuple[tuple, PauliOdds, float]]:
    """Yield ``(sequence, final state, expected cost)`` for every sequence of ``depth`` bases.

    Sequences that pass through an infidelity >= 0.5 are skipped (stages refuse them).
    """
    start = normalize(start)
    frontier = [((), start, 1.0)]
    for _ in range(depth):
        frontier = [
            (seq + (b,), out, c)
            for seq, state, cost in frontier
            for b, out, c in _children(state, cost)
        ]
    yield from frontier


def search_bootstrap(spec: SearchSpec) -> SearchResult:
    """Find the fewest distill stages bringing every error odds below ``threshold``.

    Candidates are evaluated in floats. Ties at the minimal length are broken by
    smallest max error, then smallest expected cost, then basis order
    X < Y < Z. The winner is replayed with exact rationals.
    """
    start = normalize(spec.start.convert("float"))
    explored = 0
    if meets_threshold(start, spec.threshold):
        return SearchResult(True, [], normalize(spec.start), [], [[]], 0)
    frontier = [((), start, 1.0)]
    for _ in range(spec.max_depth):
        frontier = [
            (seq + (b,), out, c)
            for seq, state, cost in frontier
            for b, out, c in _children(state, cost)
        ]
        explored += len(frontier)
        hits = [f for f in frontier if meets_threshold(f[1], spec.threshold)]
        if hits:
            hits.sort(key=lambda f: (f[1].max_error(), f[2], [b.value for b in f[0]]))
            best = list(hits[0][0])
            report = _replay(spec.start, best)
            minimal = [list(h[0]) for h in sorted(hits, key=lambda f: [b.value for b in f[0]])]
            return SearchResult(
                found=True,
                sequence=best,
                final=report.final,
                reports=report.stage_reports,
                minimal_solutions=minimal if spec.all_minimal else [best],
                explored=explored,
            )
    return SearchResult(False, explored=explored)


def _replay(start: PauliOdds, sequence):
    exact = start
    if not isinstance(start.w, Fraction):
        exact = start.convert("rational")
    return eval_schedule(Schedule(exact, [Distill(b) for b in sequence], "rational"))


def all_sequences(depth: int):
    return itertools.product(list(Basis), repeat=depth)

"""Turnkey consistency checks between the closed-form algebra and the circuits.

``distill`` is looked up through the module object on every call so that a
patched formula is caught by the checks.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import distill
from .noise import (
    PAULI_LABELS,
    Basis,
    bell_states,
    PauliOdds,
    apply_pauli_channel,
    decays_to,
    density_matrix,
    infidelity,
    normalize,
)
from .oracle import density_distill, derive_tables, table_oplus, table_star

__all__ = [
    "CheckResult",
    "VerificationReport",
    "run_verification",
    "random_odds",
    "random_channel",
    "decay_quadruples",
]

_HALF = Fraction(1, 2)
COMPONENTS = ("w", "x", "y", "z")


@dataclass
class CheckResult:
    name: str
    basis: Basis
    passed: bool
    cases: int
    failures: list = field(default_factory=list)
    gating: bool = True

    def summary(self) -> str:
        if self.passed:
            return "pass"
        return f"FAIL ({len(self.failures)}/{self.cases})"


@dataclass
class VerificationReport:
    checks: list
    seed: int
    cases: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.gating)

    def matrix(self) -> str:
        names = list(dict.fromkeys(c.name for c in self.checks))
        cells = {(c.name, c.basis): c for c in self.checks}
        width = max(len(n) for n in names) + 2
        lines = ["check".ljust(width) + "".join(str(b).ljust(14) for b in Basis)]
        for n in names:
            row = n.ljust(width)
            for b in Basis:
                c = cells.get((n, b))
                text = "-" if c is None else c.summary()
                if c is not None and not c.gating and not c.passed:
                    text += "*"
                row += text.ljust(14)
            lines.append(row)
        if any(not c.gating for c in self.checks):
            lines.append("* informational; not counted toward the exit status")
        detail = [f for c in self.checks if not c.passed for f in c.failures[:3]]
        if detail:
            lines.append("")
            lines += detail
        lines.append("")
        lines.append("OK" if self.passed else "FAILED")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "seed": self.seed,
            "cases": self.cases,
            "checks": [
                {
                    "name": c.name,
                    "basis": str(c.basis),
                    "passed": c.passed,
                    "gating": c.gating,
                    "cases": c.cases,
                    "failures": c.failures[:20],
                }
                for c in self.checks
            ],
        }


# -- samplers -----------------------------------------------------------------


def _frac(rng: np.random.Generator, cap: Fraction, zero_prob: float = 0.15) -> Fraction:
    if rng.random() < zero_prob:
        return Fraction(0)
    return Fraction(int(rng.integers(1, 1001)), 1000) * cap


def random_odds(rng: np.random.Generator, zero_prob: float = 0.15) -> PauliOdds:
    """Normalized odds with infidelity below 1/2; components may be zero."""
    while True:
        cap = Fraction(1, 10 ** int(rng.integers(0, 4)))
        u = PauliOdds(Fraction(1), *(_frac(rng, cap, zero_prob) for _ in range(3)))
        if infidelity(u) < _HALF:
            return u


def random_channel(rng: np.random.Generator) -> list:
    cap = Fraction(1, 3 * 10 ** int(rng.integers(0, 4)))
    ps = [_frac(rng, cap) for _ in range(3)]
    return [1 - sum(ps), *ps]


def decay_quadruples(rng: np.random.Generator, n: int, mode: str = "componentwise"):
    """Yield ``(a1, b1, a2, b2)`` with ``a1 -> a2`` and ``b1 -> b2``, all below 1/2 infidelity.

    ``componentwise`` adds nonnegative amounts to the error terms of the
    normalized vector, so the pairs satisfy :func:`decays_to`. ``channel``
    applies a random Pauli channel instead.
    """
    if mode not in ("componentwise", "channel"):
        raise ValueError(f"unknown decay mode {mode!r}")

    def worsen(u):
        if mode == "channel":
            return normalize(apply_pauli_channel(u, random_channel(rng)))
        bump = random_odds(rng, zero_prob=0.3)
        return PauliOdds(u.w, u.x + bump.x, u.y + bump.y, u.z + bump.z)

    made = 0
    while made < n:
        a1, b1 = random_odds(rng), random_odds(rng)
        a2, b2 = worsen(a1), worsen(b1)
        if infidelity(a2) < _HALF and infidelity(b2) < _HALF:
            made += 1
            yield a1, b1, a2, b2


# -- checks ------------------------------------------------------------------------


def _unit(i: int) -> PauliOdds:
    return PauliOdds(*(Fraction(int(k == i)) for k in range(4)))


def _oplus_or_zero(u, v, b):
    try:
        return tuple(distill.oplus(u, v, b))
    except ValueError:
        return (0, 0, 0, 0)


def _diff_components(got, want) -> list[str]:
    return [COMPONENTS[k] for k in range(4) if got[k] != want[k]]


def _check_labels(b: Basis, table) -> CheckResult:
    res = CheckResult("table vs formulas (16 label pairs)", b, True, 16)
    for i, j in itertools.product(range(4), repeat=2):
        u, v = _unit(i), _unit(j)
        pair = f"{PAULI_LABELS[i]}{PAULI_LABELS[j]}"
        if distill.star(u, v, b) != table_star(table, u, v):
            res.failures.append(f"{b}: star differs on labels {pair}")
        got = _oplus_or_zero(u, v, b)
        want = tuple(table_oplus(table, u, v)) if not table[PAULI_LABELS[i], PAULI_LABELS[j]][0] else (0,) * 4
        bad = _diff_components(got, want)
        if bad:
            res.failures.append(f"{b}: oplus component(s) {','.join(bad)} differ on labels {pair}")
    res.passed = not res.failures
    return res


def _check_random_exact(b: Basis, table, rng, cases: int) -> CheckResult:
    res = CheckResult("table vs formulas (random exact)", b, True, cases)
    for _ in range(cases):
        u = PauliOdds(*(Fraction(int(rng.integers(1, 1000)), int(rng.integers(1, 1000))) for _ in range(4)))
        v = PauliOdds(*(Fraction(int(rng.integers(1, 1000)), int(rng.integers(1, 1000))) for _ in range(4)))
        if distill.star(u, v, b) != table_star(table, u, v):
            res.failures.append(f"{b}: star differs at u={u.to_json()} v={v.to_json()}")
        bad = _diff_components(tuple(distill.oplus(u, v, b)), tuple(table_oplus(table, u, v)))
        if bad:
            res.failures.append(f"{b}: oplus component(s) {','.join(bad)} differ at u={u.to_json()}")
    res.passed = not res.failures
    return res


_FIXED = [
    (1, 0, 0, 0),
    (1, Fraction(1, 6), Fraction(1, 6), Fraction(1, 6)),
    (1, Fraction(1, 3), 0, 0),
    (1, 0, Fraction(1, 4), 0),
    (1, 0, 0, Fraction(1, 5)),
]


def _check_density(b: Basis, rng, cases: int, tol: float = 1e-9) -> CheckResult:
    pairs = [(PauliOdds(*f), PauliOdds(*g)) for f in _FIXED for g in _FIXED]
    pairs += [(random_odds(rng), random_odds(rng)) for _ in range(cases)]
    res = CheckResult("density-matrix simulation", b, True, len(pairs))
    for u, v in pairs:
        uf, vf = u.convert("float"), v.convert("float")
        discard, rho = density_distill(uf, vf, b)
        want_d = float(distill.star(uf, vf, b))
        if abs(discard - want_d) > tol:
            res.failures.append(f"{b}: discard {discard:.12g} vs star {want_d:.12g} at u={u.to_json()}")
            continue
        if want_d >= 1 - tol:
            continue
        want = density_matrix(normalize(distill.oplus(uf, vf, b)))
        # Bell-basis populations name the failing component.
        got = [float(np.real(s.conj() @ rho @ s)) for s in bell_states()]
        bad = [COMPONENTS[k] for k in range(4) if abs(got[k] - float(want[k])) > tol]
        if bad or not np.allclose(rho, want.matrix(), atol=tol, rtol=0):
            res.failures.append(
                f"{b}: output component(s) {','.join(bad) or 'off-diagonal'} differ at u={u.to_json()}"
            )
    res.passed = not res.failures
    return res


def _check_decay(b: Basis, quads, mode: str) -> list[CheckResult]:
    star_res = CheckResult(f"star monotone ({mode} decay)", b, True, len(quads), gating=(mode == "channel"))
    oplus_res = CheckResult(f"oplus decays ({mode} decay)", b, True, len(quads), gating=False)
    for a1, b1, a2, b2 in quads:
        if not distill.star(a1, b1, b) <= distill.star(a2, b2, b):
            star_res.failures.append(f"{b}: star decreased for a1={a1.to_json()} a2={a2.to_json()} b1={b1.to_json()} b2={b2.to_json()}")
        if not decays_to(distill.oplus(a1, b1, b), distill.oplus(a2, b2, b)):
            oplus_res.failures.append(f"{b}: oplus output does not decay for a1={a1.to_json()} a2={a2.to_json()} b1={b1.to_json()} b2={b2.to_json()}")
    star_res.passed = not star_res.failures
    oplus_res.passed = not oplus_res.failures
    return [star_res, oplus_res]


def run_verification(cases: int = 200, seed: int = 0, strict_decay: bool = False) -> VerificationReport:
    """Run every check; ``cases`` scales the randomized parts.

    ``strict_decay`` makes the oplus decay checks count toward the result.
    """
    if cases < 1:
        raise ValueError("cases must be positive")
    rng = np.random.default_rng(seed)
    checks = []
    density_cases = max(10, cases // 20)
    decay = {m: list(decay_quadruples(rng, cases, m)) for m in ("channel", "componentwise")}
    for b in Basis:
        table = derive_tables(b)
        checks.append(_check_labels(b, table))
        checks.append(_check_random_exact(b, table, rng, cases))
        checks.append(_check_density(b, rng, density_cases))
        for mode, quads in decay.items():
            checks += _check_decay(b, quads, mode)
    if strict_decay:
        for c in checks:
            c.gating = True
    return VerificationReport(checks, seed, cases)

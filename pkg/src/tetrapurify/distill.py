"""Distance-2 repetition-code distillation algebra.

``star(u, v, b)`` is the probability that a basis-``b`` rep code detects an
error when fed pairs ``u`` and ``v``; ``oplus(u, v, b)`` is the (unnormalized)
odds vector of the surviving pair when nothing is detected.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .noise import Basis, PauliOdds, normalize

__all__ = ["RepCode", "REP_CODES", "star", "oplus", "shor4", "Shor4Result", "fold"]


@dataclass(frozen=True)
class RepCode:
    basis: Basis
    stabilizer: str
    logical_x: str
    logical_z: str


# The logical observables are deliberately non-standard; they fix how input
# sign errors map onto output sign errors.
REP_CODES = {
    Basis.X: RepCode(Basis.X, "XX", "XI", "ZY"),
    Basis.Y: RepCode(Basis.Y, "YY", "XZ", "ZZ"),
    Basis.Z: RepCode(Basis.Z, "ZZ", "XY", "ZI"),
}


def star(u: PauliOdds, v: PauliOdds, basis) -> Any:
    """Discard probability of distilling ``u`` against ``v`` in ``basis``."""
    b = Basis.parse(basis)
    w1, x1, y1, z1 = u
    w2, x2, y2, z2 = v
    if b is Basis.X:
        detected = (w1 + x1) * (y2 + z2) + (y1 + z1) * (w2 + x2)
    elif b is Basis.Y:
        detected = (w1 + y1) * (x2 + z2) + (x1 + z1) * (w2 + y2)
    else:
        detected = (w1 + z1) * (x2 + y2) + (x1 + y1) * (w2 + z2)
    return detected / (u.total() * v.total())


def oplus(u: PauliOdds, v: PauliOdds, basis) -> PauliOdds:
    """Odds of the output pair given no detection. Not normalized."""
    b = Basis.parse(basis)
    w1, x1, y1, z1 = u
    w2, x2, y2, z2 = v
    if b is Basis.X:
        out = (w1 * w2 + x1 * x2, w1 * x2 + x1 * w2, y1 * y2 + z1 * z2, y1 * z2 + z1 * y2)
    elif b is Basis.Y:
        out = (w1 * w2 + y1 * y2, x1 * z2 + z1 * x2, w1 * y2 + y1 * w2, x1 * x2 + z1 * z2)
    else:
        out = (w1 * w2 + z1 * z2, x1 * y2 + y1 * x2, x1 * x2 + y1 * y2, w1 * z2 + z1 * w2)
    if not sum(out[1:], out[0]) > 0:
        raise ValueError(f"{b}-basis distillation of these inputs always discards")
    return PauliOdds(*out)


def fold(state: PauliOdds, boosters, bases) -> PauliOdds:
    """Left-associative chain ``state ⊕b1 booster1 ⊕b2 booster2 ...``."""
    for booster, b in zip(boosters, bases):
        state = oplus(state, booster, b)
    return state


@dataclass(frozen=True)
class Shor4Result:
    out: PauliOdds
    success_prob: Any
    pairs_per_attempt: int = 4

    @property
    def expected_pairs(self):
        return self.pairs_per_attempt / self.success_prob


def shor4(u: PauliOdds) -> Shor4Result:
    """One-shot [[4,1,2]] distillation of four copies of ``u``.

    The output equals the X-then-Z staged chain, but every attempt consumes all
    four inputs, so a detection in the X layer costs four pairs rather than two.
    """
    d1 = star(u, u, Basis.X)
    v = normalize(oplus(u, u, Basis.X))
    d2 = star(v, v, Basis.Z)
    out = normalize(oplus(v, v, Basis.Z))
    return Shor4Result(out, (1 - d1) * (1 - d1) * (1 - d2))

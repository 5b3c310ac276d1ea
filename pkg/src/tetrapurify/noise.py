"""Digitized Bell-pair noise model.

A noisy EPR pair is described by odds ``w:x:y:z`` of an I, X, Y or Z error
having been applied to one of its qubits. The representation is degenerate
under positive scaling; :meth:`PauliOdds.normalize` picks the ``w = 1`` form.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterator, NamedTuple, Sequence

import numpy as np

from .numerics import get_backend

__all__ = [
    "Basis",
    "PauliOdds",
    "BellDiagonalDensity",
    "from_depolarizing",
    "infidelity",
    "normalize",
    "decays_to",
    "density_matrix",
    "bell_states",
    "twirl",
    "pauli_twirl_average",
    "PAULI_LABELS",
    "apply_pauli_channel",
    "pauli_product",
]

PAULI_LABELS = ("I", "X", "Y", "Z")


class Basis(str, enum.Enum):
    X = "X"
    Y = "Y"
    Z = "Z"

    def __str__(self):
        return self.value

    @classmethod
    def parse(cls, value: "Basis | str") -> "Basis":
        if isinstance(value, Basis):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unknown basis {value!r}; expected X, Y or Z") from None


@dataclass(frozen=True)
class PauliOdds:
    """Odds ``(w, x, y, z)`` of an I/X/Y/Z error on a shared pair.

    Components may be floats, Fractions or ExtReals. They are not normalized
    on construction.
    """

    w: Any
    x: Any
    y: Any
    z: Any

    def __post_init__(self):
        for name in ("w", "x", "y", "z"):
            if getattr(self, name) < 0:
                raise ValueError(f"odds component {name} must be nonnegative")
        if not self.total() > 0:
            raise ValueError("odds vector must have positive total weight")

    def __iter__(self) -> Iterator[Any]:
        return iter((self.w, self.x, self.y, self.z))

    def __getitem__(self, i: int):
        return (self.w, self.x, self.y, self.z)[i]

    def total(self):
        return self.w + self.x + self.y + self.z

    def errors(self) -> tuple:
        return (self.x, self.y, self.z)

    def max_error(self):
        return max(self.x, self.y, self.z)

    def scale(self, k) -> "PauliOdds":
        return PauliOdds(self.w * k, self.x * k, self.y * k, self.z * k)

    def normalize(self) -> "PauliOdds":
        return normalize(self)

    def infidelity(self):
        return infidelity(self)

    def convert(self, backend) -> "PauliOdds":
        conv = get_backend(backend)
        return PauliOdds(*(conv(c) for c in self))

    @classmethod
    def of(cls, values: Sequence, backend="rational") -> "PauliOdds":
        if len(values) != 4:
            raise ValueError("odds vector needs exactly four components")
        conv = get_backend(backend)
        return cls(*(conv(v) for v in values))

    def to_json(self) -> list[str]:
        return [_num_to_str(c) for c in self]


def _num_to_str(c) -> str:
    if isinstance(c, Fraction):
        return str(c)
    return str(c) if not isinstance(c, float) else repr(c)


class BellDiagonalDensity(NamedTuple):
    """Probabilities of the four Bell states, in (B_I, B_X, B_Y, B_Z) order."""

    i: Any
    x: Any
    y: Any
    z: Any

    def matrix(self) -> np.ndarray:
        """Full 4x4 density matrix over (Alice, Bob) qubits."""
        out = np.zeros((4, 4), dtype=complex)
        for p, vec in zip(self, bell_states()):
            out += float(p) * np.outer(vec, vec.conj())
        return out


def from_depolarizing(f, backend="rational") -> PauliOdds:
    """Odds ``(1, e, e, e)`` for infidelity ``f`` split evenly over X, Y, Z."""
    conv = get_backend(backend)
    f = conv(f)
    if not (0 <= f < 1):
        raise ValueError("infidelity must lie in [0, 1)")
    e = f / 3 / (1 - f)
    return PauliOdds(conv(1), e, e, e)


def infidelity(u: PauliOdds):
    return (u.x + u.y + u.z) / u.total()


def normalize(u: PauliOdds) -> PauliOdds:
    if not u.w > 0:
        raise ValueError("cannot normalize an odds vector with w = 0 (fully corrupted state)")
    w = u.w
    return PauliOdds(w / w, u.x / w, u.y / w, u.z / w)


def decays_to(u: PauliOdds, v: PauliOdds) -> bool:
    """True if ``u`` can be turned into ``v`` by adding noise.

    Uses the sufficient condition (identity term does not grow, error terms do
    not shrink) on the normalized forms of both vectors.
    """
    a, b = normalize(u), normalize(v)
    return a.x <= b.x and a.y <= b.y and a.z <= b.z


def density_matrix(u: PauliOdds) -> BellDiagonalDensity:
    t = u.total()
    return BellDiagonalDensity(u.w / t, u.x / t, u.y / t, u.z / t)


def bell_states() -> list[np.ndarray]:
    """Normalized B_I, B_X, B_Y, B_Z over (Alice, Bob)."""
    s = 1 / np.sqrt(2)
    return [
        np.array([s, 0, 0, s], dtype=complex),
        np.array([0, s, s, 0], dtype=complex),
        np.array([0, s, -s, 0], dtype=complex),
        np.array([s, 0, 0, -s], dtype=complex),
    ]


_PAULIS = [
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
]


def _check_density(rho: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("expected a 4x4 two-qubit density matrix")
    if not np.allclose(rho, rho.conj().T, atol=tol):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError("density matrix does not have unit trace")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValueError("density matrix is not positive semidefinite")
    return rho


def pauli_twirl_average(rho: np.ndarray) -> np.ndarray:
    """Average of ``(P⊗P) rho (P⊗P)†`` over P in {I, X, Y, Z}."""
    rho = np.asarray(rho, dtype=complex)
    out = np.zeros((4, 4), dtype=complex)
    for p in _PAULIS:
        pp = np.kron(p, p)
        out += pp @ rho @ pp.conj().T
    return out / 4


def twirl(rho: np.ndarray) -> PauliOdds:
    """Odds of the Bell-diagonal state left after Pauli twirling ``rho``."""
    rho = _check_density(rho)
    diag = [max(0.0, float(np.real(b.conj() @ rho @ b))) for b in bell_states()]
    odds = PauliOdds(*diag)
    return normalize(odds) if odds.w > 0 else odds


# Index of the product of two Paulis (phases dropped), in I, X, Y, Z order.
_PRODUCT = [
    [0, 1, 2, 3],
    [1, 0, 3, 2],
    [2, 3, 0, 1],
    [3, 2, 1, 0],
]


def pauli_product(i: int, j: int) -> int:
    return _PRODUCT[i][j]


def apply_pauli_channel(u: PauliOdds, channel: Sequence) -> PauliOdds:
    """Odds after a further Pauli error drawn with weights ``channel`` (I, X, Y, Z).

    This is the physical meaning of decay: adding noise on top of ``u``.
    """
    if len(channel) != 4:
        raise ValueError("a Pauli channel needs four weights")
    acc = [0, 0, 0, 0]
    for i in range(4):
        for j in range(4):
            k = _PRODUCT[i][j]
            acc[k] = acc[k] + u[i] * channel[j]
    return PauliOdds(*acc)

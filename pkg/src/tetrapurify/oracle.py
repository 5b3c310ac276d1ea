"""Circuit-level ground truth for the distillation algebra.

Each ``Compare_P`` circuit is a short two-qubit Clifford acting on one party's
halves of two EPR pairs. It maps the stabilizer ``+PP`` onto ``+Z`` of the
second qubit (which is then measured) and the rep code's logical observables
onto ``X`` and ``Z`` of the first qubit (which is kept). Distillation runs
``Compare_P`` on both sides, compares the two measurement results, and has Bob
apply a sign-fixing Pauli to his output qubit.

Two independent routes are provided: Pauli-frame propagation over error
labels, and a dense 16x16 density-matrix simulation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .noise import PAULI_LABELS, Basis, PauliOdds, density_matrix, normalize
from .distill import REP_CODES, oplus, star

__all__ = [
    "COMPARE_CIRCUITS",
    "SIGN_FIX",
    "ErrorTable",
    "simulate_compare",
    "derive_tables",
    "error_tables",
    "table_star",
    "table_oplus",
    "shor4_bruteforce",
    "compare_unitary",
    "pauli_matrix",
    "density_distill",
    "verify_density_consistency",
]

# Gate lists, applied left to right. Qubit 0 is the kept output, qubit 1 is
# measured in the Z basis.
COMPARE_CIRCUITS: dict[Basis, tuple[tuple, ...]] = {
    Basis.X: (("H", 0), ("H", 1), ("S", 1), ("CX", 0, 1), ("H", 0)),
    Basis.Y: (("CX", 1, 0), ("H", 1), ("CX", 0, 1), ("X", 1)),
    Basis.Z: (("S", 1), ("CX", 0, 1), ("Z", 0)),
}

# Applied by Bob to his output qubit; cancels the -1 sign that B_I carries on YY.
SIGN_FIX = {Basis.X: "X", Basis.Y: "I", Basis.Z: "Z"}

# Pauli labels as symplectic (x, z) bit pairs.
_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_LABEL = {v: k for k, v in _BITS.items()}


def _propagate(frame: list[list[int]], gates: Iterable[tuple]) -> list[list[int]]:
    """Conjugate a Pauli error frame through Clifford gates (phases dropped)."""
    frame = [list(q) for q in frame]
    for gate in gates:
        name = gate[0]
        if name == "H":
            q = frame[gate[1]]
            q[0], q[1] = q[1], q[0]
        elif name == "S":
            q = frame[gate[1]]
            q[1] ^= q[0]
        elif name == "CX":
            c, t = frame[gate[1]], frame[gate[2]]
            t[0] ^= c[0]
            c[1] ^= t[1]
        elif name in ("I", "X", "Y", "Z"):
            pass
        else:
            raise ValueError(f"unsupported gate {name!r}")
    return frame


def simulate_compare(basis, p1: str, p2: str) -> tuple[bool, str | None]:
    """Run ``Distill_basis`` with errors ``p1``/``p2`` on Bob's input halves.

    Returns ``(detected, output_label)``; the label is ``None`` on detection.
    """
    b = Basis.parse(basis)
    for p in (p1, p2):
        if p not in _BITS:
            raise ValueError(f"unknown Pauli label {p!r}")
    gates = COMPARE_CIRCUITS[b]
    alice = _propagate([[0, 0], [0, 0]], gates)
    bob = _propagate([list(_BITS[p1]), list(_BITS[p2])], gates)
    # An X component on the measured qubit flips that party's result.
    m_alice, m_bob = alice[1][0], bob[1][0]
    if m_alice != m_bob:
        return True, None
    # The sign fix is a Pauli, so it only changes global phase of the frame.
    return False, _LABEL[tuple(bob[0])]


@dataclass(frozen=True)
class ErrorTable:
    basis: Basis
    entries: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.entries[key]

    def detected_count(self) -> int:
        return sum(1 for det, _ in self.entries.values() if det)

    def as_index_arrays(self):
        """``(detected[4][4], output[4][4])`` with labels as 0..3, for fast lookup."""
        det = [[False] * 4 for _ in range(4)]
        out = [[-1] * 4 for _ in range(4)]
        for (a, b), (d, o) in self.entries.items():
            i, j = PAULI_LABELS.index(a), PAULI_LABELS.index(b)
            det[i][j] = d
            out[i][j] = -1 if o is None else PAULI_LABELS.index(o)
        return det, out


def derive_tables(basis) -> ErrorTable:
    b = Basis.parse(basis)
    entries = {
        (p1, p2): simulate_compare(b, p1, p2)
        for p1, p2 in itertools.product(PAULI_LABELS, repeat=2)
    }
    return ErrorTable(b, entries)


_TABLES: dict[Basis, ErrorTable] = {}


def error_tables() -> dict[Basis, ErrorTable]:
    if not _TABLES:
        for b in Basis:
            _TABLES[b] = derive_tables(b)
    return dict(_TABLES)


def table_star(table: ErrorTable, u: PauliOdds, v: PauliOdds):
    """Discard probability accumulated from the detected table entries."""
    detected = 0
    for (p1, p2), (det, _) in table.entries.items():
        if det:
            detected = detected + u[PAULI_LABELS.index(p1)] * v[PAULI_LABELS.index(p2)]
    return detected / (u.total() * v.total())


def table_oplus(table: ErrorTable, u: PauliOdds, v: PauliOdds) -> PauliOdds:
    """Unnormalized surviving odds accumulated from the undetected entries."""
    acc = [0, 0, 0, 0]
    for (p1, p2), (det, out) in table.entries.items():
        if not det:
            k = PAULI_LABELS.index(out)
            acc[k] = acc[k] + u[PAULI_LABELS.index(p1)] * v[PAULI_LABELS.index(p2)]
    return PauliOdds(*acc)


def shor4_bruteforce(u: PauliOdds):
    """Enumerate all 4**4 input error labels through X, X then Z compares.

    Returns ``(normalized output odds, success probability)``.
    """
    tables = error_tables()
    tx, tz = tables[Basis.X], tables[Basis.Z]
    total = u.total() ** 4
    acc = [0, 0, 0, 0]
    for labels in itertools.product(PAULI_LABELS, repeat=4):
        d1, o1 = tx[labels[0], labels[1]]
        d2, o2 = tx[labels[2], labels[3]]
        if d1 or d2:
            continue
        d3, o3 = tz[o1, o2]
        if d3:
            continue
        weight = 1
        for p in labels:
            weight = weight * u[PAULI_LABELS.index(p)]
        k = PAULI_LABELS.index(o3)
        acc[k] = acc[k] + weight
    kept = PauliOdds(*acc)
    return normalize(kept), kept.total() / total


# -- dense simulation ---------------------------------------------------------

_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
}


def pauli_matrix(label: str) -> np.ndarray:
    """Matrix of a multi-qubit Pauli string such as ``'ZY'`` (qubit 0 first)."""
    out = np.eye(1, dtype=complex)
    for ch in label:
        out = np.kron(out, _MATS[ch])
    return out


def _gate_matrix(gate: tuple) -> np.ndarray:
    name = gate[0]
    if name == "CX":
        c, t = gate[1], gate[2]
        m = np.zeros((4, 4), dtype=complex)
        for i in range(4):
            bits = [(i >> 1) & 1, i & 1]
            if bits[c]:
                bits[t] ^= 1
            m[bits[0] * 2 + bits[1], i] = 1
        return m
    single = _MATS[name]
    return np.kron(single, _MATS["I"]) if gate[1] == 0 else np.kron(_MATS["I"], single)


def compare_unitary(basis) -> np.ndarray:
    u = np.eye(4, dtype=complex)
    for gate in COMPARE_CIRCUITS[Basis.parse(basis)]:
        u = _gate_matrix(gate) @ u
    return u


def density_distill(u: PauliOdds, v: PauliOdds, basis) -> tuple[float, np.ndarray]:
    """Dense simulation of ``Distill_basis`` on two Bell-diagonal pairs.

    Returns ``(discard probability, normalized 4x4 output state)``; the output
    is over (Alice, Bob) and is ``None``-free only when something survives.
    """
    b = Basis.parse(basis)
    rho_u = density_matrix(u).matrix()
    rho_v = density_matrix(v).matrix()
    # Qubit order (a1, b1, a2, b2) -> (a1, a2, b1, b2).
    rho = np.kron(rho_u, rho_v).reshape([2] * 8)
    rho = rho.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(16, 16)
    cu = compare_unitary(b)
    full = np.kron(cu, cu)
    rho = full @ rho @ full.conj().T
    # Keep only outcomes where Alice's and Bob's measured qubits agree.
    keep = np.zeros(16)
    for idx in range(16):
        a2, b2 = (idx >> 2) & 1, idx & 1
        keep[idx] = 1.0 if a2 == b2 else 0.0
    proj = np.diag(keep)
    rho = proj @ rho @ proj
    fix = np.kron(np.kron(np.eye(4), _MATS[SIGN_FIX[b]]), np.eye(2))
    rho = fix @ rho @ fix.conj().T
    # Trace out (a2, b2), leaving (a1, b1).
    t = rho.reshape([2] * 8)
    out = np.einsum("ajbkcjdk->abcd", t).reshape(4, 4)
    kept = float(np.real(np.trace(out)))
    discard = 1.0 - kept
    if kept <= 0:
        return discard, out
    return discard, out / kept


def verify_density_consistency(u: PauliOdds, v: PauliOdds, basis, tol: float = 1e-9) -> bool:
    b = Basis.parse(basis)
    uf, vf = u.convert("float"), v.convert("float")
    discard, rho = density_distill(uf, vf, b)
    expected_discard = float(star(uf, vf, b))
    if abs(discard - expected_discard) > tol:
        return False
    if expected_discard >= 1 - tol:
        return True
    expected = density_matrix(normalize(oplus(uf, vf, b))).matrix()
    return bool(np.allclose(rho, expected, atol=tol, rtol=0))


def logical_operators(basis) -> tuple[str, str, str]:
    """``(stabilizer, logical X, logical Z)`` for a basis."""
    code = REP_CODES[Basis.parse(basis)]
    return code.stabilizer, code.logical_x, code.logical_z


def rational_weights(rng: np.random.Generator, n: int = 4, hi: int = 1000) -> list[Fraction]:
    """Random positive rationals, handy for exact table reconstructions."""
    return [Fraction(int(rng.integers(1, hi)), int(rng.integers(1, hi))) for _ in range(n)]

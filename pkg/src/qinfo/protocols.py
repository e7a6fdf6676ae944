"""Teleportation, dense coding, singlet statistics and no-go predicates."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .linalg import I2, X, Y, Z, check_ket, partial_trace, projector, tensor
from .states import KrausChannel, apply_channel, sample_index

SQ2 = np.sqrt(2.0)

# ordering 1..4: singlet, (01+10), (00-11), (00+11); all over sqrt(2)
BELL_STATES = (
    np.array([0, 1, -1, 0], dtype=complex) / SQ2,
    np.array([0, 1, 1, 0], dtype=complex) / SQ2,
    np.array([1, 0, 0, -1], dtype=complex) / SQ2,
    np.array([1, 0, 0, 1], dtype=complex) / SQ2,
)
SINGLET = BELL_STATES[0]

# U_k with (U_k ⊗ I)|1> = ±|k>; also Bob's teleportation correction for outcome k
LOCAL_UNITARIES = (I2, Z, X, 1j * Y)


def bell_basis() -> np.ndarray:
    """Bell states as columns, in the labelling 1..4 used throughout."""
    return np.column_stack(BELL_STATES)


@dataclass(frozen=True)
class TeleportResult:
    outcome: int  # Bell label 1..4
    classical_bits: int  # outcome - 1, sent as two bits
    bob_state: np.ndarray = field(repr=False)
    fidelity: float
    probability: float


def teleport_branches(psi: np.ndarray) -> list[TeleportResult]:
    """All four measurement branches with their probabilities."""
    psi = check_ket(psi)
    if psi.size != 2:
        raise ValueError("teleportation input must be a qubit")
    full = tensor(psi, SINGLET).reshape(4, 2)  # Alice's pair x Bob
    out = []
    for k, bell in enumerate(BELL_STATES):
        cond = bell.conj() @ full
        p = float(np.vdot(cond, cond).real)
        bob = LOCAL_UNITARIES[k] @ (cond / np.sqrt(p))
        fid = float(abs(np.vdot(psi, bob)) ** 2)
        out.append(TeleportResult(k + 1, k, bob, fid, p))
    return out


def teleport(psi: np.ndarray, rng: np.random.Generator) -> TeleportResult:
    """Teleport ``psi`` through a shared singlet using a sampled Bell outcome."""
    branches = teleport_branches(psi)
    k = sample_index(np.array([b.probability for b in branches]), rng)
    return branches[k]


def dense_code(bits) -> int:
    """Send two bits through one qubit of a shared singlet.

    ``bits`` is an int 0..3 or a two-character string; the message selects
    Alice's local unitary and Bob's Bell measurement returns it.
    """
    msg = int(bits, 2) if isinstance(bits, str) else int(bits)
    if not 0 <= msg < 4:
        raise ValueError("message must be two bits")
    shared = tensor(LOCAL_UNITARIES[msg], I2) @ SINGLET
    probs = np.array([abs(np.vdot(b, shared)) ** 2 for b in BELL_STATES])
    decoded = int(np.argmax(probs))
    if probs[decoded] < 1 - 1e-10:
        raise RuntimeError("Bell measurement was not deterministic")
    return decoded


def spin_eigenstates(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvectors of ``cos(theta) Z + sin(theta) X`` for outcomes 0 (+1) and 1 (-1)."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([c, s], dtype=complex), np.array([-s, c], dtype=complex)


def spin_observable(theta: float) -> np.ndarray:
    return np.cos(theta) * Z + np.sin(theta) * X


def singlet_joint(theta1: float, theta2: float) -> np.ndarray:
    """``P[a, b]`` for Alice's outcome a along theta1 and Bob's b along theta2."""
    ea, eb = spin_eigenstates(theta1), spin_eigenstates(theta2)
    return np.array([[abs(np.vdot(tensor(ea[a], eb[b]), SINGLET)) ** 2 for b in (0, 1)] for a in (0, 1)])


def analytic_same(theta1: float, theta2: float) -> float:
    return float(np.sin((theta1 - theta2) / 2) ** 2)


@dataclass(frozen=True)
class CorrelationReport:
    theta1: float
    theta2: float
    n_samples: int
    empirical_same: float
    analytic_same: float


def singlet_correlation(theta1: float, theta2: float, n: int, rng: np.random.Generator) -> CorrelationReport:
    """Sample joint spin measurements on ``n`` fresh singlets."""
    if n < 1:
        raise ValueError("n must be positive")
    joint = singlet_joint(theta1, theta2).ravel()
    draws = rng.choice(4, size=n, p=joint / joint.sum())
    same = np.count_nonzero((draws == 0) | (draws == 3))
    return CorrelationReport(theta1, theta2, n, same / n, analytic_same(theta1, theta2))


def lhv_same_outcome_bound() -> Fraction:
    """Best same-outcome rate a local deterministic model reaches on the trine.

    Alice's outcomes are fixed values ``v_i`` on the three directions and
    Bob's are ``1 - v_i`` (perfect anti-correlation at equal angles). The
    rate is averaged over the six ordered unequal pairs.
    """
    best = Fraction(0)
    pairs = [(i, j) for i in range(3) for j in range(3) if i != j]
    for v in itertools.product((0, 1), repeat=3):
        same = sum(1 for i, j in pairs if v[i] == 1 - v[j])
        best = max(best, Fraction(same, len(pairs)))
    return best


def lhv_single_pair_max() -> int:
    """For a single unequal pair some assignment always gives the same outcome."""
    return max(int(v[0] == 1 - v[1]) for v in itertools.product((0, 1), repeat=3))


TRINE_ANGLES = (0.0, 2 * np.pi / 3, 4 * np.pi / 3)


def quantum_trine_same() -> float:
    pairs = [(a, b) for a in TRINE_ANGLES for b in TRINE_ANGLES if a != b]
    return float(np.mean([analytic_same(a, b) for a, b in pairs]))


def cloning_feasible(psi: np.ndarray, phi: np.ndarray, atol: float = 1e-10) -> bool:
    """A unitary copier for both states exists iff they are equal or orthogonal."""
    psi, phi = check_ket(psi), check_ket(phi)
    if psi.size != phi.size:
        raise ValueError("dimension mismatch")
    overlap = abs(np.vdot(psi, phi))
    return bool(overlap <= atol or overlap >= 1 - atol)


def extend_channel(channel: KrausChannel, dim_rest: int) -> KrausChannel:
    """``M ⊗ I`` for every Kraus operator."""
    eye = np.eye(dim_rest)
    return KrausChannel(tuple(np.kron(m, eye) for m in channel.operators))


def no_signalling_check(bipartite: np.ndarray, dim_a: int, alice_action: KrausChannel) -> float:
    """Max entrywise change in Bob's reduced state caused by Alice's local action."""
    if not alice_action.trace_preserving:
        raise ValueError("Alice's action must be trace preserving")
    psi = check_ket(bipartite)
    if psi.size % dim_a or alice_action.input_dim != dim_a:
        raise ValueError("incompatible factorization")
    dim_b = psi.size // dim_a
    rho = projector(psi)
    before = partial_trace(rho, [dim_a, dim_b], [1])
    after = partial_trace(apply_channel(rho, extend_channel(alice_action, dim_b)), [dim_a, dim_b], [1])
    return float(np.max(np.abs(before - after)))


def local_unitary_channel(u: np.ndarray) -> KrausChannel:
    return KrausChannel((np.asarray(u, dtype=complex),))


def bell_transform_table() -> dict:
    """Which local Pauli on Alice maps Bell state i to Bell state j (up to phase)."""
    table = {}
    paulis = {"I": I2, "X": X, "Y": Y, "Z": Z}
    for i, b in enumerate(BELL_STATES):
        for name, p in paulis.items():
            img = tensor(p, I2) @ b
            j = int(np.argmax([abs(np.vdot(c, img)) for c in BELL_STATES]))
            table[(i + 1, name)] = j + 1
    return table


__all__ = [
    "BELL_STATES",
    "LOCAL_UNITARIES",
    "SINGLET",
    "TRINE_ANGLES",
    "CorrelationReport",
    "TeleportResult",
    "analytic_same",
    "bell_basis",
    "bell_transform_table",
    "cloning_feasible",
    "dense_code",
    "extend_channel",
    "lhv_same_outcome_bound",
    "lhv_single_pair_max",
    "local_unitary_channel",
    "no_signalling_check",
    "quantum_trine_same",
    "singlet_correlation",
    "singlet_joint",
    "spin_eigenstates",
    "spin_observable",
    "teleport",
    "teleport_branches",
]

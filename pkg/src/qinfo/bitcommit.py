"""Quantum bit commitment and the entanglement cheating strategy.

The worked example uses six qubit states on three rays in a plane. Even
indices form the bit-0 ensemble and odd indices the bit-1 ensemble. Both
ensembles average to ``I/2``, and a three-level ancilla lets Alice delay
her choice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import _complete_basis, check_ket, dagger, eig_hermitian, is_unitary, partial_trace, projector

S3 = np.sqrt(3.0)
CONCEALING_TOL = 1e-8


def _c_states() -> tuple:
    return (
        np.array([1, 0], dtype=complex),
        np.array([0, 1], dtype=complex),
        np.array([-0.5, S3 / 2], dtype=complex),
        np.array([S3 / 2, -0.5], dtype=complex),
        np.array([-0.5, -S3 / 2], dtype=complex),
        np.array([-S3 / 2, -0.5], dtype=complex),
    )


@dataclass(frozen=True)
class PeresConstruction:
    c_states: tuple  # c_0 .. c_5
    a_basis: tuple  # a_0, a_2, a_4: standard basis of the ancilla
    a_doubleprime_basis: tuple  # a''_1, a''_3, a''_5
    entangled0: np.ndarray

    def check(self, atol: float = 1e-10) -> dict:
        """Numerical residuals of every defining identity."""
        c = self.c_states
        even = sum(projector(c[i]) for i in (0, 2, 4)) / 3
        odd = sum(projector(c[i]) for i in (1, 3, 5)) / 3
        dp = np.column_stack(self.a_doubleprime_basis)
        via_even = sum(np.kron(a, c[2 * i]) for i, a in enumerate(self.a_basis)) / S3
        via_odd = sum(np.kron(a, c[2 * i + 1]) for i, a in enumerate(self.a_doubleprime_basis)) / S3
        return {
            "even_average": float(np.max(np.abs(even - np.eye(2) / 2))),
            "odd_average": float(np.max(np.abs(odd - np.eye(2) / 2))),
            "doubleprime_orthonormal": float(np.max(np.abs(dagger(dp) @ dp - np.eye(3)))),
            "even_expansion": float(np.max(np.abs(via_even - self.entangled0))),
            "odd_expansion": float(np.max(np.abs(via_odd - self.entangled0))),
        }


def peres_construction() -> PeresConstruction:
    c = _c_states()
    a = tuple(np.eye(3, dtype=complex)[i] for i in range(3))
    p, m = 1 + S3, 1 - S3
    a1 = (a[0] + p * a[1] + m * a[2]) / 3
    a3 = (p * a[0] + m * a[1] + a[2]) / 3
    a5 = (m * a[0] + a[1] + p * a[2]) / 3
    ent0 = sum(np.kron(a[i], c[2 * i]) for i in range(3)) / S3
    pc = PeresConstruction(c, a, (a1, a3, a5), ent0)
    bad = {k: v for k, v in pc.check().items() if v > 1e-10}
    if bad:
        raise RuntimeError(f"construction identities violated: {bad}")
    return pc


@dataclass(frozen=True)
class HonestCommitment:
    bit: int
    index: int  # which c_i was sent
    state: np.ndarray


def honest_commit(bit: int, rng: np.random.Generator) -> HonestCommitment:
    """Send one of the three states of the chosen bit, uniformly at random."""
    if bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    idx = bit + 2 * int(rng.integers(3))
    return HonestCommitment(bit, idx, _c_states()[idx])


@dataclass(frozen=True)
class CheatOpening:
    bit: int
    outcome: int  # index i of the ancilla vector, matching c_i
    probability: float
    bob_state: np.ndarray


def cheat_outcomes(bit: int) -> list[CheatOpening]:
    """All branches of Alice's ancilla measurement when opening ``bit``."""
    if bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    pc = peres_construction()
    basis = pc.a_basis if bit == 0 else pc.a_doubleprime_basis
    amps = pc.entangled0.reshape(3, 2)
    out = []
    for i, a in enumerate(basis):
        cond = a.conj() @ amps
        p = float(np.vdot(cond, cond).real)
        out.append(CheatOpening(bit, 2 * i + bit, p, cond / np.sqrt(p)))
    return out


def cheat_open(bit: int, rng: np.random.Generator) -> CheatOpening:
    """Measure the ancilla of the shared entangled state in the basis for ``bit``."""
    branches = cheat_outcomes(bit)
    u = rng.random()
    acc = 0.0
    for b in branches:
        acc += b.probability
        if u < acc:
            return b
    return branches[-1]


@dataclass(frozen=True)
class CommitmentPair:
    state0: np.ndarray
    state1: np.ndarray
    dim_a: int
    dim_b: int

    def __post_init__(self):
        s0, s1 = check_ket(self.state0), check_ket(self.state1)
        if s0.size != self.dim_a * self.dim_b or s1.size != s0.size:
            raise ValueError("incompatible factorization")
        object.__setattr__(self, "state0", s0)
        object.__setattr__(self, "state1", s1)

    def bob_marginals(self) -> tuple[np.ndarray, np.ndarray]:
        dims = [self.dim_a, self.dim_b]
        return (
            partial_trace(projector(self.state0), dims, [1]),
            partial_trace(projector(self.state1), dims, [1]),
        )


def peres_pair() -> CommitmentPair:
    """Bit-0 and bit-1 purifications sharing the ancilla's standard basis."""
    c = _c_states()
    a = np.eye(3, dtype=complex)
    s1 = sum(np.kron(a[i], c[2 * i + 1]) for i in range(3)) / S3
    return CommitmentPair(peres_construction().entangled0, s1, 3, 2)


def concealment_check(pair: CommitmentPair) -> float:
    """Largest entry of ``|W_B(0) - W_B(1)|``; zero for a concealing pair."""
    w0, w1 = pair.bob_marginals()
    return float(np.max(np.abs(w0 - w1)))


def cheating_unitary(pair: CommitmentPair, atol: float = CONCEALING_TOL) -> np.ndarray:
    """Unitary on Alice's side taking the bit-0 state to the bit-1 state.

    Both states are expanded in one eigenbasis ``{b_k}`` of Bob's common
    marginal, giving ``sum_k |α_k>|b_k>`` and ``sum_k |β_k>|b_k>`` with
    ``<α_k|α_l> = <β_k|β_l> = p_k δ_kl``. Using the same Bob basis for
    both handles repeated eigenvalues, since Alice's vectors then pair up
    one-to-one. U sends ``α_k`` to ``β_k`` and maps the orthogonal
    complements onto each other. The global phase makes the
    largest-magnitude entry of the first column real and positive.

    Raises:
        ValueError: Bob's marginals differ, so no such unitary exists.
    """
    w0, w1 = pair.bob_marginals()
    if np.max(np.abs(w0 - w1)) > atol:
        raise ValueError("protocol not concealing: Bob marginals differ")
    da = pair.dim_a
    m0 = pair.state0.reshape(da, pair.dim_b)
    m1 = pair.state1.reshape(da, pair.dim_b)
    eig = eig_hermitian(0.5 * (w0 + w1), atol=1e-8)
    src, dst = [], []
    for p, b in zip(eig.eigenvalues, eig.eigenvectors.T):
        if p > 1e-12:
            src.append(m0 @ b.conj() / np.sqrt(p))
            dst.append(m1 @ b.conj() / np.sqrt(p))
    src = _complete_basis(src, da, np.eye(da))
    dst = _complete_basis(dst, da, np.eye(da))
    u = np.column_stack(dst) @ dagger(np.column_stack(src))
    col = u[:, 0]
    j = int(np.argmax(np.abs(col)))
    u = u * (abs(col[j]) / col[j])
    if not is_unitary(u, 1e-8):
        raise RuntimeError("constructed map is not unitary")
    return u


def apply_alice(u: np.ndarray, state: np.ndarray, dim_b: int) -> np.ndarray:
    return np.kron(u, np.eye(dim_b)) @ state


def equal_up_to_phase(a: np.ndarray, b: np.ndarray) -> float:
    """Distance between two kets after removing the best global phase."""
    ov = np.vdot(a, b)
    phase = ov / abs(ov) if abs(ov) > 1e-15 else 1.0
    return float(np.max(np.abs(a * phase - b)))


__all__ = [
    "CheatOpening",
    "CommitmentPair",
    "HonestCommitment",
    "PeresConstruction",
    "apply_alice",
    "cheat_open",
    "cheat_outcomes",
    "cheating_unitary",
    "concealment_check",
    "equal_up_to_phase",
    "honest_commit",
    "peres_construction",
    "peres_pair",
]

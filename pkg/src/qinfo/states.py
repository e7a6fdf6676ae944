"""Density operators, ensembles, generalized measurements and channels."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import (
    ATOL,
    ITER_TOL,
    check_ket,
    check_matrix,
    dagger,
    eig_hermitian,
    is_hermitian,
    matrix_sqrt_psd,
    partial_trace,
    projector,
)

PROB_TOL = 1e-12


def as_density(m, atol: float = ATOL) -> np.ndarray:
    """Validate a density operator, clamping roundoff-level negative eigenvalues.

    Raises ValueError if ``m`` is not Hermitian, has an eigenvalue below
    ``-atol`` or does not have unit trace.
    """
    m = check_matrix(m)
    if not is_hermitian(m, atol):
        raise ValueError("density operator must be Hermitian")
    if abs(np.trace(m) - 1.0) > atol:
        raise ValueError(f"density operator trace {np.trace(m).real:.6g} differs from 1")
    e = eig_hermitian(m, atol=atol)
    lo = e.eigenvalues.min()
    if lo < -atol:
        raise ValueError(f"density operator has negative eigenvalue {lo:.3g}")
    if lo < 0:
        w = np.clip(e.eigenvalues, 0.0, None)
        w = w / w.sum()
        u = e.eigenvectors
        return (u * w) @ dagger(u)
    return 0.5 * (m + dagger(m))


def is_pure(rho: np.ndarray, atol: float = 1e-8) -> bool:
    return abs(np.trace(rho @ rho).real - 1.0) <= atol


@dataclass(frozen=True)
class Ensemble:
    """Weighted collection of density operators.

    ``kets`` is filled in when every member was given as a pure state.
    """

    weights: np.ndarray
    members: tuple
    kets: tuple | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or len(w) != len(self.members) or len(w) == 0:
            raise ValueError("ensemble needs one weight per member")
        if np.any(w < -ATOL) or abs(w.sum() - 1.0) > ATOL:
            raise ValueError("ensemble weights must be non-negative and sum to 1")
        dims = {np.asarray(m).shape for m in self.members}
        if len(dims) != 1:
            raise ValueError("ensemble members must share a dimension")
        object.__setattr__(self, "weights", np.clip(w, 0.0, None))
        object.__setattr__(self, "members", tuple(as_density(m) for m in self.members))

    @classmethod
    def pure(cls, weights: Sequence[float], kets: Sequence[np.ndarray]) -> "Ensemble":
        kets = tuple(check_ket(k) for k in kets)
        return cls(np.asarray(weights, dtype=float), tuple(projector(k) for k in kets), kets)

    @classmethod
    def uniform(cls, kets: Sequence[np.ndarray]) -> "Ensemble":
        return cls.pure(np.full(len(kets), 1.0 / len(kets)), kets)

    @property
    def dim(self) -> int:
        return self.members[0].shape[0]

    def __len__(self) -> int:
        return len(self.members)


def density_from_ensemble(e: Ensemble) -> np.ndarray:
    return sum(w * m for w, m in zip(e.weights, e.members))


def purify(rho: np.ndarray) -> np.ndarray:
    """Canonical purification ``sum_i sqrt(p_i) |i>|i>`` in the eigenbasis of rho.

    The system is the first factor and a copy-sized ancilla the second.
    """
    rho = as_density(rho)
    d = rho.shape[0]
    e = eig_hermitian(rho)
    out = np.zeros(d * d, dtype=complex)
    for i, p in enumerate(e.eigenvalues):
        if p > PROB_TOL:
            anc = np.zeros(d, dtype=complex)
            anc[i] = 1.0
            out += np.sqrt(p) * np.kron(e.vector(i), anc)
    return out / np.linalg.norm(out)


def fidelity_pure(rho: np.ndarray, psi: np.ndarray) -> float:
    """``<psi|rho|psi>``."""
    rho = check_matrix(rho)
    psi = check_ket(psi)
    if rho.shape[0] != psi.size:
        raise ValueError("dimension mismatch")
    return float(np.clip(np.vdot(psi, rho @ psi).real, 0.0, 1.0))


def fidelity_mixed(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Squared-trace-norm fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``."""
    rho = as_density(rho)
    sigma = as_density(sigma)
    if rho.shape != sigma.shape:
        raise ValueError("dimension mismatch")
    root = matrix_sqrt_psd(rho)
    inner = root @ sigma @ root
    inner = 0.5 * (inner + dagger(inner))
    w = eig_hermitian(inner, atol=1e-8).eigenvalues
    # roundoff eigenvalues near 1e-16 would contribute ~1e-8 after the sqrt
    w = np.where(w > 1e-13, w, 0.0)
    return float(np.clip(np.sum(np.sqrt(w)) ** 2, 0.0, 1.0))


@dataclass(frozen=True)
class KrausChannel:
    """Operators ``M_m`` with ``sum M_m^H M_m == I`` (or ``<= I`` if not trace preserving)."""

    operators: tuple
    trace_preserving: bool = True

    def __post_init__(self):
        ops = tuple(check_matrix(m) for m in self.operators)
        if not ops:
            raise ValueError("channel needs at least one operator")
        if len({m.shape for m in ops}) != 1:
            raise ValueError("Kraus operators must share input and output dimensions")
        object.__setattr__(self, "operators", ops)
        total = self.completeness()
        eye = np.eye(total.shape[0])
        if self.trace_preserving:
            if not np.allclose(total, eye, atol=ATOL, rtol=0):
                raise ValueError("Kraus operators violate the completeness condition")
        elif eig_hermitian(eye - total).eigenvalues.min() < -ATOL:
            raise ValueError("Kraus operators sum to more than the identity")

    def completeness(self) -> np.ndarray:
        return sum(dagger(m) @ m for m in self.operators)

    @property
    def input_dim(self) -> int:
        return self.operators[0].shape[1]

    def __len__(self) -> int:
        return len(self.operators)


@dataclass(frozen=True)
class Povm:
    effects: tuple

    def __post_init__(self):
        effs = tuple(check_matrix(e) for e in self.effects)
        if not effs:
            raise ValueError("POVM needs at least one effect")
        for e in effs:
            if not is_hermitian(e) or eig_hermitian(e).eigenvalues.min() < -ATOL:
                raise ValueError("POVM effects must be positive semidefinite")
        if not np.allclose(sum(effs), np.eye(effs[0].shape[0]), atol=ATOL, rtol=0):
            raise ValueError("POVM effects must sum to the identity")
        object.__setattr__(self, "effects", effs)

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        p = np.array([np.trace(rho @ e).real for e in self.effects])
        return np.clip(p, 0.0, None)

    def __len__(self) -> int:
        return len(self.effects)


@dataclass(frozen=True)
class MeasurementRecord:
    outcome: int
    probability: float
    post_state: np.ndarray | None = field(repr=False, default=None)


def projective_channel(basis_vectors: Sequence[np.ndarray]) -> KrausChannel:
    """Rank-one projective measurement in an orthonormal basis."""
    return KrausChannel(tuple(projector(np.asarray(b, dtype=complex)) for b in basis_vectors))


def outcome_distribution(rho: np.ndarray, channel: KrausChannel) -> np.ndarray:
    rho = check_matrix(rho)
    if channel.input_dim != rho.shape[0]:
        raise ValueError("channel dimension does not match the state")
    p = np.array([np.trace(m @ rho @ dagger(m)).real for m in channel.operators])
    return np.clip(p, 0.0, None)


def sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw using a single uniform variate."""
    cdf = np.cumsum(probs)
    u = rng.random() * cdf[-1]
    return int(min(np.searchsorted(cdf, u, side="right"), len(probs) - 1))


def measure(
    rho: np.ndarray,
    channel: KrausChannel,
    outcome: int | None = None,
    rng: np.random.Generator | None = None,
):
    """Generalized measurement of ``rho`` with Kraus operators.

    With ``outcome`` the selective record for that outcome is returned; with
    ``rng`` an outcome is sampled first. With neither, the array of outcome
    probabilities is returned.
    """
    probs = outcome_distribution(rho, channel)
    if outcome is None and rng is None:
        return probs
    if outcome is None:
        outcome = sample_index(probs, rng)
    if not 0 <= outcome < len(channel):
        raise ValueError(f"outcome {outcome} out of range for {len(channel)} operators")
    p = probs[outcome]
    if p < PROB_TOL:
        raise ValueError("outcome has probability below tolerance")
    m = channel.operators[outcome]
    post = m @ rho @ dagger(m) / p
    return MeasurementRecord(outcome=outcome, probability=float(p), post_state=0.5 * (post + dagger(post)))


def apply_channel(rho: np.ndarray, channel: KrausChannel) -> np.ndarray:
    """Nonselective action ``sum_m M_m rho M_m^H`` of a trace-preserving channel."""
    if not channel.trace_preserving:
        raise ValueError("channel is not trace preserving; use measure for selective outcomes")
    rho = check_matrix(rho)
    if channel.input_dim != rho.shape[0]:
        raise ValueError("channel dimension does not match the state")
    out = sum(m @ rho @ dagger(m) for m in channel.operators)
    return 0.5 * (out + dagger(out))


def povm_to_kraus(p: Povm) -> KrausChannel:
    return KrausChannel(tuple(matrix_sqrt_psd(e) for e in p.effects))


def unambiguous_discrimination_povm() -> Povm:
    """Three-outcome POVM separating ``|0>`` from ``|+>`` without error.

    Outcome 0 never fires on ``|+>``, outcome 1 never fires on ``|0>``;
    outcome 2 is inconclusive.
    """
    c = np.sqrt(2) / (1 + np.sqrt(2))
    minus = np.array([1, -1], dtype=complex)
    e1 = c * np.outer(minus, minus.conj()) / 2
    e2 = c * np.array([[0, 0], [0, 1]], dtype=complex)
    e3 = np.eye(2) - e1 - e2
    return Povm((e1, e2, e3))


def steer(bipartite: np.ndarray, dim_a: int, alice_basis: Sequence[np.ndarray]) -> Ensemble:
    """Ensemble Bob is left in when Alice measures her factor in ``alice_basis``.

    Zero-probability outcomes are dropped from the ensemble.
    """
    psi = check_ket(bipartite)
    if psi.size % dim_a:
        raise ValueError("incompatible factorization")
    dim_b = psi.size // dim_a
    vecs = np.column_stack([np.asarray(v, dtype=complex) for v in alice_basis])
    if vecs.shape != (dim_a, dim_a) or not np.allclose(dagger(vecs) @ vecs, np.eye(dim_a), atol=ATOL):
        raise ValueError("Alice's basis must be orthonormal and span her space")
    m = psi.reshape(dim_a, dim_b)
    weights, states, kets = [], [], []
    for a in vecs.T:
        cond = a.conj() @ m
        w = float(np.vdot(cond, cond).real)
        if w > PROB_TOL:
            k = cond / np.sqrt(w)
            weights.append(w)
            states.append(projector(k))
            kets.append(k)
    weights = np.asarray(weights)
    return Ensemble(weights / weights.sum(), tuple(states), tuple(kets))


def reduced_state(psi: np.ndarray, dims: Sequence[int], keep) -> np.ndarray:
    return partial_trace(projector(check_ket(psi)), dims, keep)


def random_ket(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_povm(dim: int, n_effects: int, rng: np.random.Generator) -> Povm:
    """Random POVM built by normalizing random positive operators."""
    raw = [random_density(dim, rng) for _ in range(n_effects)]
    total = sum(raw)
    inv_root = np.linalg.inv(matrix_sqrt_psd(total))
    effects = [inv_root @ r @ inv_root for r in raw]
    effects = [0.5 * (e + dagger(e)) for e in effects]
    # absorb residual roundoff into the last effect
    effects[-1] = effects[-1] + (np.eye(dim) - sum(effects))
    return Povm(tuple(effects))


__all__ = [
    "ITER_TOL",
    "Ensemble",
    "KrausChannel",
    "MeasurementRecord",
    "Povm",
    "apply_channel",
    "as_density",
    "density_from_ensemble",
    "fidelity_mixed",
    "fidelity_pure",
    "is_pure",
    "measure",
    "outcome_distribution",
    "povm_to_kraus",
    "projective_channel",
    "purify",
    "random_density",
    "random_ket",
    "random_povm",
    "random_unitary",
    "reduced_state",
    "sample_index",
    "steer",
    "unambiguous_discrimination_povm",
]

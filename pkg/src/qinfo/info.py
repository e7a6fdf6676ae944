"""Classical and quantum information measures, typical sets and compression.

All logarithms are base 2.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .linalg import ATOL, dagger, eig_hermitian, partial_trace, tensor
from .states import Ensemble, Povm, as_density, density_from_ensemble

ZERO_EIG = 1e-12
MAX_ENUMERATION = 2**20
MAX_SUBSPACE_DIM = 2**12


def check_dist(p, atol: float = ATOL) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("distribution must be a non-empty 1-D array")
    if np.any(p < -atol) or abs(p.sum() - 1.0) > atol:
        raise ValueError("distribution must be non-negative and sum to 1")
    return np.clip(p, 0.0, None)


def check_joint(j, atol: float = ATOL) -> np.ndarray:
    j = np.asarray(j, dtype=float)
    if j.ndim != 2 or j.size == 0:
        raise ValueError("joint distribution must be a non-empty 2-D array")
    if np.any(j < -atol) or abs(j.sum() - 1.0) > atol:
        raise ValueError("joint distribution must be non-negative and sum to 1")
    return np.clip(j, 0.0, None)


def _entropy_terms(p: np.ndarray, cutoff: float = 0.0) -> float:
    p = p[p > cutoff]
    return float(-np.sum(p * np.log2(p))) if p.size else 0.0


def shannon_entropy(p) -> float:
    """``H = -sum p_i log2 p_i`` with ``0 log 0 = 0``."""
    return max(0.0, _entropy_terms(check_dist(p).ravel()))


def joint_entropy(j) -> float:
    return max(0.0, _entropy_terms(check_joint(j).ravel()))


def conditional_entropy(j) -> float:
    """``H(X|Y)`` for a joint table with X on rows and Y on columns."""
    j = check_joint(j)
    return joint_entropy(j) - _entropy_terms(j.sum(axis=0))


def mutual_information(j) -> float:
    j = check_joint(j)
    hx = _entropy_terms(j.sum(axis=1))
    hy = _entropy_terms(j.sum(axis=0))
    return max(0.0, hx + hy - joint_entropy(j))


def relative_entropy(p, q) -> float:
    """Kullback-Leibler divergence ``D(p||q)`` in bits."""
    p = check_dist(np.ravel(p))
    q = check_dist(np.ravel(q))
    if p.shape != q.shape:
        raise ValueError("distributions have different supports")
    mask = p > 0
    if np.any(q[mask] == 0):
        raise ValueError("infinite divergence")
    return float(np.sum(p[mask] * np.log2(p[mask] / q[mask])))


def mutual_information_as_divergence(j) -> float:
    j = check_joint(j)
    return relative_entropy(j.ravel(), np.outer(j.sum(axis=1), j.sum(axis=0)).ravel())


def check_channel(ch) -> np.ndarray:
    ch = np.asarray(ch, dtype=float)
    if ch.ndim != 2 or np.any(ch < -ATOL) or not np.allclose(ch.sum(axis=1), 1.0, atol=ATOL):
        raise ValueError("channel rows must be probability distributions")
    return np.clip(ch, 0.0, None)


def _input_mutual_info(ch: np.ndarray, q: float) -> float:
    joint = np.array([q, 1.0 - q])[:, None] * ch
    return mutual_information(joint / joint.sum())


def channel_capacity(ch, grid: int = 1000, tol: float = 1e-4) -> float:
    """Capacity of a binary-input discrete memoryless channel.

    Mutual information is evaluated on a uniform input grid and the best
    cell is refined by golden-section search (it is concave in the input
    probability).

    Args:
        ch: conditional table with rows ``p(y|x)``.
        grid: number of grid intervals, at least 100.
        tol: bracket width at which refinement stops.

    Returns:
        Capacity in bits per channel use.
    """
    ch = check_channel(ch)
    if ch.shape[0] > 2:
        raise ValueError("capacity search limited to binary inputs")
    if ch.shape[0] == 1:
        return 0.0
    if grid < 100:
        raise ValueError("grid must have at least 100 points")
    qs = np.linspace(0.0, 1.0, grid + 1)
    vals = [_input_mutual_info(ch, q) for q in qs]
    best = int(np.argmax(vals))
    lo, hi = qs[max(best - 1, 0)], qs[min(best + 1, grid)]
    ratio = (math.sqrt(5) - 1) / 2
    a, b = lo + (1 - ratio) * (hi - lo), lo + ratio * (hi - lo)
    fa, fb = _input_mutual_info(ch, a), _input_mutual_info(ch, b)
    while hi - lo > tol:
        if fa < fb:
            lo, a, fa = a, b, fb
            b = lo + ratio * (hi - lo)
            fb = _input_mutual_info(ch, b)
        else:
            hi, b, fb = b, a, fa
            a = lo + (1 - ratio) * (hi - lo)
            fa = _input_mutual_info(ch, a)
    return float(max(vals[best], fa, fb))


@dataclass(frozen=True)
class TypicalSet:
    n: int
    delta: float
    sequences: np.ndarray = field(repr=False)  # one index sequence per row
    total_probability: float

    @property
    def size(self) -> int:
        return int(self.sequences.shape[0])


def _typical_window(h: float, n: int, delta: float) -> tuple[float, float]:
    # closed interval in log2-probability, padded for roundoff
    slack = 1e-9 * max(1.0, n)
    return -n * (h + delta) - slack, -n * (h - delta) + slack


def typical_set(p, n: int, delta: float) -> TypicalSet:
    """Exhaustively enumerate the δ-typical sequences of length ``n``.

    A sequence is kept when ``2^{-n(H+δ)} <= p(seq) <= 2^{-n(H-δ)}``.
    """
    p = check_dist(p)
    if n < 1 or delta <= 0:
        raise ValueError("need n >= 1 and delta > 0")
    k = p.size
    if k**n > MAX_ENUMERATION:
        raise ValueError("instance too large")
    h = shannon_entropy(p)
    with np.errstate(divide="ignore"):
        logp = np.log2(p)
    seqs = np.array(np.unravel_index(np.arange(k**n), (k,) * n), dtype=np.uint8).T
    lp = logp[seqs].sum(axis=1)
    lo, hi = _typical_window(h, n, delta)
    keep = (lp >= lo) & (lp <= hi)
    total = float(np.sum(np.exp2(lp[keep])))
    return TypicalSet(n=n, delta=delta, sequences=seqs[keep], total_probability=total)


@dataclass(frozen=True)
class PrefixCode:
    codewords: tuple

    @property
    def lengths(self) -> tuple:
        return tuple(len(c) for c in self.codewords)

    def expected_length(self, p) -> float:
        return float(np.dot(check_dist(p), self.lengths))

    def is_prefix_free(self) -> bool:
        words = sorted(self.codewords)
        return all(not b.startswith(a) for a, b in zip(words, words[1:]))


def huffman_code(p) -> PrefixCode:
    """Optimal binary prefix code; ties resolved by symbol order."""
    p = check_dist(p)
    if p.size < 2:
        raise ValueError("need at least two symbols")
    counter = itertools.count()
    heap = [(float(w), next(counter), (i,)) for i, w in enumerate(p)]
    heapq.heapify(heap)
    codes = [""] * p.size
    while len(heap) > 1:
        w0, _, s0 = heapq.heappop(heap)
        w1, _, s1 = heapq.heappop(heap)
        for i in s0:
            codes[i] = "0" + codes[i]
        for i in s1:
            codes[i] = "1" + codes[i]
        heapq.heappush(heap, (w0 + w1, next(counter), s0 + s1))
    return PrefixCode(tuple(codes))


def von_neumann_entropy(rho) -> float:
    """``S = -Tr(rho log2 rho)``; eigenvalues below 1e-12 count as zero."""
    rho = as_density(rho)
    w = eig_hermitian(rho).eigenvalues
    return max(0.0, _entropy_terms(np.clip(w, 0.0, None), ZERO_EIG))


@dataclass(frozen=True)
class QuantumEntropies:
    S_A: float
    S_B: float
    S_AB: float
    S_A_given_B: float
    S_mutual: float


def quantum_joint_conditional_mutual(rho_ab, dim_a: int, dim_b: int) -> QuantumEntropies:
    rho_ab = as_density(rho_ab)
    if dim_a * dim_b != rho_ab.shape[0]:
        raise ValueError("incompatible factorization")
    s_ab = von_neumann_entropy(rho_ab)
    s_a = von_neumann_entropy(partial_trace(rho_ab, [dim_a, dim_b], [0]))
    s_b = von_neumann_entropy(partial_trace(rho_ab, [dim_a, dim_b], [1]))
    return QuantumEntropies(s_a, s_b, s_ab, s_ab - s_b, s_a + s_b - s_ab)


def holevo_chi(e: Ensemble) -> float:
    """``S(sum p_x rho_x) - sum p_x S(rho_x)``."""
    avg = von_neumann_entropy(density_from_ensemble(e))
    return max(0.0, avg - sum(w * von_neumann_entropy(m) for w, m in zip(e.weights, e.members)))


def measurement_joint(e: Ensemble, p: Povm) -> np.ndarray:
    if p.effects[0].shape[0] != e.dim:
        raise ValueError("dimension mismatch")
    joint = np.array([[w * np.trace(m @ eff).real for eff in p.effects] for w, m in zip(e.weights, e.members)])
    joint = np.clip(joint, 0.0, None)
    return joint / joint.sum()


def measurement_mutual_info(e: Ensemble, p: Povm) -> float:
    """Mutual information between preparation label and POVM outcome."""
    return mutual_information(measurement_joint(e, p))


# --- Schumacher compression -------------------------------------------------


@dataclass(frozen=True)
class TypicalSubspace:
    """Span of selected eigenvector products of ``rho^{⊗n}``.

    ``kept`` lists flat indices into the product eigenbasis, ordered by
    decreasing product eigenvalue. The projector is built on demand.
    """

    n: int
    delta: float
    eigenbasis: np.ndarray = field(repr=False)  # single-copy eigenvectors, as columns
    kept: np.ndarray = field(repr=False)
    trace_weight: float

    @property
    def dimension(self) -> int:
        return int(self.kept.size)

    @cached_property
    def projector(self) -> np.ndarray:
        u = tensor(*([self.eigenbasis] * self.n))
        cols = u[:, self.kept]
        return cols @ dagger(cols)


def _product_spectrum(eigenvalues: np.ndarray, n: int) -> np.ndarray:
    lam = np.clip(eigenvalues, 0.0, None)
    out = np.ones(1)
    for _ in range(n):
        out = np.kron(out, lam)
    return out


def _descending(probs: np.ndarray, idx: np.ndarray) -> np.ndarray:
    order = np.lexsort((idx, -probs[idx]))
    return idx[order]


def schumacher_typical_projector(rho, n: int, delta: float, one_sided: bool = False) -> TypicalSubspace:
    """δ-typical subspace of ``rho^{⊗n}``.

    Eigenvector products are kept when their eigenvalue lies in the closed
    window ``[2^{-n(S+δ)}, 2^{-n(S-δ)}]``. With ``one_sided=True`` the upper
    limit is dropped, so the unusually probable products are kept too.
    """
    rho = as_density(rho)
    d = rho.shape[0]
    if n < 1 or delta < 0:
        raise ValueError("need n >= 1 and delta >= 0")
    if d**n > MAX_SUBSPACE_DIM:
        raise ValueError("instance too large")
    eig = eig_hermitian(rho)
    s = von_neumann_entropy(rho)
    probs = _product_spectrum(eig.eigenvalues, n)
    with np.errstate(divide="ignore"):
        lp = np.log2(probs)
    lo, hi = _typical_window(s, n, delta)
    mask = lp >= lo
    if not one_sided:
        mask &= lp <= hi
    kept = _descending(probs, np.flatnonzero(mask))
    return TypicalSubspace(n, delta, eig.eigenvectors, kept, float(probs[kept].sum()))


def register_code_space(rho, n: int, delta: float) -> TypicalSubspace:
    """Code space of a ``ceil(n(S+δ))``-qubit register.

    Holds the ``2^m`` most probable eigenvector products of ``rho^{⊗n}``,
    which always contains every δ-typical product that fits.
    """
    rho = as_density(rho)
    d = rho.shape[0]
    if d**n > MAX_SUBSPACE_DIM:
        raise ValueError("instance too large")
    eig = eig_hermitian(rho)
    s = von_neumann_entropy(rho)
    m = math.ceil(n * (s + delta) - 1e-9)
    size = min(max(1, 2**m), d**n)
    probs = _product_spectrum(eig.eigenvalues, n)
    kept = _descending(probs, np.arange(d**n))[:size]
    return TypicalSubspace(n, delta, eig.eigenvectors, kept, float(probs[kept].sum()))


@dataclass(frozen=True)
class SchumacherReport:
    qubit_rate: float
    avg_fidelity: float
    n: int
    delta: float
    code_dimension: int
    trace_weight: float
    n_samples: int


def schumacher_roundtrip(
    e: Ensemble,
    n: int,
    delta: float,
    rng: np.random.Generator,
    n_samples: int = 1000,
    code_space: str = "register",
) -> SchumacherReport:
    """Compress and decompress sampled block sequences from a pure-state source.

    Each sampled block ``|Ψ⟩`` is projected onto the code space. On success
    the renormalized projection is kept. On failure the decoder substitutes
    the first code-space basis vector. The returned fidelity averages
    ``⟨Ψ|ρ_out|Ψ⟩`` over ``n_samples`` blocks.

    Args:
        e: ensemble of pure qubit states (``e.kets`` must be present).
        n: block length, at most 10.
        delta: typicality slack.
        rng: seeded generator for block sampling.
        n_samples: number of sampled blocks.
        code_space: ``"register"`` for the ``ceil(n(S+δ))``-qubit register,
            ``"typical"`` for the strict δ-typical subspace.
    """
    if e.kets is None:
        raise ValueError("ensemble must consist of pure states")
    if n > 10 or e.dim**n > MAX_SUBSPACE_DIM:
        raise ValueError("instance too large")
    rho = density_from_ensemble(e)
    if code_space == "register":
        sub = register_code_space(rho, n, delta)
    elif code_space == "typical":
        sub = schumacher_typical_projector(rho, n, delta)
    else:
        raise ValueError(f"unknown code space {code_space!r}")
    d = e.dim
    if sub.dimension == 0:
        raise ValueError("empty code space; increase delta")
    # single-copy overlaps <e_k|psi_j>
    overlaps = np.array([[np.vdot(sub.eigenbasis[:, kk], psi) for kk in range(d)] for psi in e.kets])
    digits = np.array(np.unravel_index(sub.kept, (d,) * n)).T  # kept products as index tuples
    junk = digits[0]
    fids = np.empty(n_samples)
    for t in range(n_samples):
        labels = rng.choice(len(e), size=n, p=e.weights)
        amps = np.prod(overlaps[labels[None, :], digits], axis=1)  # <e_K|Ψ> for kept K
        p_ok = float(np.sum(np.abs(amps) ** 2))
        junk_overlap = float(np.prod(np.abs(overlaps[labels, junk]) ** 2))
        fids[t] = p_ok**2 + (1.0 - p_ok) * junk_overlap
    rate = math.ceil(math.log2(sub.dimension) - 1e-12) / n if sub.dimension > 1 else 1.0 / n
    return SchumacherReport(
        qubit_rate=rate,
        avg_fidelity=float(fids.mean()),
        n=n,
        delta=delta,
        code_dimension=sub.dimension,
        trace_weight=sub.trace_weight,
        n_samples=n_samples,
    )

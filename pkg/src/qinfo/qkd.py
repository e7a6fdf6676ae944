"""Seeded key-distribution simulations: BB84, Ekert and the pre/post-selection scheme.

Every round draws from its own generator derived from ``(seed, round)``,
so transcripts do not depend on execution order or worker count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np

from .linalg import I2, X, Y, Z, eig_hermitian, projector, tensor
from .protocols import SINGLET, TRINE_ANGLES, spin_eigenstates
from .seeding import map_trials, trial_rng
from .serialize import dumps
from .states import sample_index

SQ2 = np.sqrt(2.0)
EKERT_THRESHOLD = Fraction(17, 24)
BB84_THRESHOLD = 0.05

# eigenvectors for outcome 0 (eigenvalue +1) and outcome 1 (eigenvalue -1)
PAULI_BASES = {
    "Z": (np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)),
    "X": (np.array([1, 1], dtype=complex) / SQ2, np.array([1, -1], dtype=complex) / SQ2),
    "Y": (np.array([1, 1j], dtype=complex) / SQ2, np.array([1, -1j], dtype=complex) / SQ2),
}
PAULI = {"X": X, "Y": Y, "Z": Z}


@dataclass(frozen=True)
class EveStrategy:
    """Eavesdropper on the quantum channel.

    ``kind`` is ``none``, ``intercept_resend_random_basis`` (uniform over the
    protocol's own measurement set) or ``intercept_resend_fixed`` with
    ``observable`` one of X, Y, Z. Intercepted qubits are measured and replaced
    by the eigenstate matching the outcome.
    """

    kind: str = "none"
    observable: str | None = None

    def __post_init__(self):
        if self.kind not in ("none", "intercept_resend_random_basis", "intercept_resend_fixed"):
            raise ValueError(f"unknown eavesdropper kind {self.kind!r}")
        if self.kind == "intercept_resend_fixed" and self.observable not in PAULI_BASES:
            raise ValueError("fixed eavesdropper needs observable X, Y or Z")

    @classmethod
    def parse(cls, name: str) -> "EveStrategy":
        """Names used on the command line: none, random, random-xz, fixed-x/y/z."""
        name = name.lower()
        if name == "none":
            return cls()
        if name in ("random", "random-xz", "random-basis"):
            return cls("intercept_resend_random_basis")
        if name.startswith("fixed-") and name[6:].upper() in PAULI_BASES:
            return cls("intercept_resend_fixed", name[6:].upper())
        raise ValueError(f"unknown eavesdropper {name!r}")

    @property
    def label(self) -> str:
        if self.kind == "none":
            return "none"
        if self.kind == "intercept_resend_fixed":
            return f"fixed-{self.observable.lower()}"
        return "random"


@dataclass
class ProtocolTranscript:
    protocol: str
    seed: int
    n_rounds: int
    rounds: list = field(repr=False)
    sifted_key_alice: str
    sifted_key_bob: str
    test_statistic: float
    detected: bool
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.sifted_key_alice) != len(self.sifted_key_bob):
            raise ValueError("sifted keys must have equal length")

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "seed": self.seed,
            "n_rounds": self.n_rounds,
            "rounds": self.rounds,
            "sifted_key_alice": self.sifted_key_alice,
            "sifted_key_bob": self.sifted_key_bob,
            "test_statistic": self.test_statistic,
            "detected": self.detected,
            **self.extra,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def count(self, role: str) -> int:
        return sum(1 for r in self.rounds if r["role"] == role)


def _bits(values) -> str:
    return "".join(str(int(v)) for v in values)


def _seed_int(seed) -> int:
    return int(seed) & (2**64 - 1)


# --- BB84 -------------------------------------------------------------------


def _bb84_round(idx: int, seed: int, eve: EveStrategy, test_fraction: float) -> dict:
    rng = trial_rng(seed, idx)
    a_basis = "ZX"[rng.integers(2)]
    a_bit = int(rng.integers(2))
    psi = PAULI_BASES[a_basis][a_bit]
    rec = {"round": idx, "alice_basis": a_basis, "alice_bit": a_bit}
    if eve.kind != "none":
        e_basis = eve.observable if eve.kind == "intercept_resend_fixed" else "ZX"[rng.integers(2)]
        vecs = PAULI_BASES[e_basis]
        e_out = sample_index(np.array([abs(np.vdot(v, psi)) ** 2 for v in vecs]), rng)
        psi = vecs[e_out]
        rec.update(eve_basis=e_basis, eve_outcome=e_out)
    b_basis = "ZX"[rng.integers(2)]
    vecs = PAULI_BASES[b_basis]
    b_bit = sample_index(np.array([abs(np.vdot(v, psi)) ** 2 for v in vecs]), rng)
    rec.update(bob_basis=b_basis, bob_bit=b_bit)
    if a_basis != b_basis:
        rec["role"] = "discarded"
    else:
        rec["role"] = "test" if rng.random() < test_fraction else "key"
    return rec


def bb84_run(
    n: int,
    eve: EveStrategy = EveStrategy(),
    test_fraction: float = 0.5,
    seed: int = 0,
    threshold: float = BB84_THRESHOLD,
) -> ProtocolTranscript:
    """BB84 with basis sifting and a disclosed test subset of the sifted rounds."""
    if n < 8:
        raise ValueError("BB84 needs at least 8 rounds")
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie in (0, 1)")
    seed = _seed_int(seed)
    rounds = map_trials(lambda i: _bb84_round(i, seed, eve, test_fraction), range(n))
    tests = [r for r in rounds if r["role"] == "test"]
    keys = [r for r in rounds if r["role"] == "key"]
    errors = sum(r["alice_bit"] != r["bob_bit"] for r in tests)
    qber = errors / len(tests) if tests else 0.0
    sifted = [r for r in rounds if r["role"] != "discarded"]
    return ProtocolTranscript(
        protocol="bb84",
        seed=seed,
        n_rounds=n,
        rounds=rounds,
        sifted_key_alice=_bits(r["alice_bit"] for r in keys),
        sifted_key_bob=_bits(r["bob_bit"] for r in keys),
        test_statistic=float(qber),
        detected=bool(qber > threshold),
        extra={
            "eve": eve.label,
            "n_sifted": len(sifted),
            "n_test": len(tests),
            "test_errors": int(errors),
            "threshold": threshold,
        },
    )


def bb84_qber_oracle(eve: EveStrategy) -> Fraction:
    """Exact sifted-round error rate by enumerating every basis/outcome branch."""
    err = Fraction(0)
    total = Fraction(0)
    for a_basis, a_bit, b_basis in product("ZX", (0, 1), "ZX"):
        if a_basis != b_basis:
            continue
        w = Fraction(1, 8)
        psi = PAULI_BASES[a_basis][a_bit]
        if eve.kind == "none":
            branches = [(w, psi)]
        else:
            e_bases = [eve.observable] if eve.kind == "intercept_resend_fixed" else ["Z", "X"]
            branches = []
            for eb in e_bases:
                for v in PAULI_BASES[eb]:
                    p = Fraction(abs(np.vdot(v, psi)) ** 2).limit_denominator(64)
                    branches.append((w * Fraction(1, len(e_bases)) * p, v))
        for wb, state in branches:
            p_wrong = Fraction(abs(np.vdot(PAULI_BASES[b_basis][1 - a_bit], state)) ** 2).limit_denominator(64)
            err += wb * p_wrong
            total += wb
    return err / total


# --- Ekert ------------------------------------------------------------------


def _eve_bases_ekert(eve: EveStrategy) -> list[tuple[np.ndarray, np.ndarray]]:
    if eve.kind == "intercept_resend_fixed":
        return [PAULI_BASES[eve.observable]]
    return [spin_eigenstates(t) for t in TRINE_ANGLES]


@lru_cache(maxsize=64)
def _ekert_table(i: int, j: int, eve_kind: str, eve_obs: str | None, e_choice: int) -> np.ndarray:
    """Flattened joint over (eve outcome, alice outcome, bob outcome)."""
    ea, eb = spin_eigenstates(TRINE_ANGLES[i]), spin_eigenstates(TRINE_ANGLES[j])
    if eve_kind == "none":
        probs = [abs(np.vdot(tensor(ea[a], eb[b]), SINGLET)) ** 2 for a in (0, 1) for b in (0, 1)]
        return np.array(probs + [0.0] * 4)
    ev = _eve_bases_ekert(EveStrategy(eve_kind, eve_obs))[e_choice]
    out = []
    for e in (0, 1):
        # Eve measures Bob's particle, resends her eigenstate
        post = tensor(I2, projector(ev[e])) @ SINGLET
        for a in (0, 1):
            for b in (0, 1):
                out.append(abs(np.vdot(tensor(ea[a], eb[b]), post)) ** 2)
    return np.array(out)


def _ekert_round(idx: int, seed: int, eve: EveStrategy) -> dict:
    rng = trial_rng(seed, idx)
    i, j = int(rng.integers(3)), int(rng.integers(3))
    rec = {"round": idx, "alice_direction": i, "bob_direction": j}
    e_choice = 0
    if eve.kind == "intercept_resend_random_basis":
        e_choice = int(rng.integers(3))
    table = _ekert_table(i, j, eve.kind, eve.observable, e_choice)
    k = sample_index(table, rng)
    e, a, b = k >> 2, (k >> 1) & 1, k & 1
    if eve.kind != "none":
        rec.update(eve_direction=eve.observable or f"trine-{e_choice}", eve_outcome=e)
    rec.update(alice_outcome=a, bob_outcome=b, role="key" if i == j else "test")
    return rec


def ekert_run(n: int, eve: EveStrategy = EveStrategy(), seed: int = 0) -> ProtocolTranscript:
    """Singlet-based key distribution on the trine of measurement directions.

    Equal-direction rounds form the key (Bob flips his bit). Unequal rounds
    are disclosed; their same-outcome rate is the test statistic, 3/4 for an
    undisturbed singlet and at most 2/3 for any local model.
    """
    if n < 12:
        raise ValueError("Ekert needs at least 12 rounds")
    seed = _seed_int(seed)
    rounds = map_trials(lambda i: _ekert_round(i, seed, eve), range(n))
    tests = [r for r in rounds if r["role"] == "test"]
    keys = [r for r in rounds if r["role"] == "key"]
    same = sum(r["alice_outcome"] == r["bob_outcome"] for r in tests)
    stat = same / len(tests) if tests else 0.0
    return ProtocolTranscript(
        protocol="ekert",
        seed=seed,
        n_rounds=n,
        rounds=rounds,
        sifted_key_alice=_bits(r["alice_outcome"] for r in keys),
        sifted_key_bob=_bits(1 - r["bob_outcome"] for r in keys),
        test_statistic=float(stat),
        detected=bool(stat < float(EKERT_THRESHOLD)),
        extra={"eve": eve.label, "n_test": len(tests), "threshold": float(EKERT_THRESHOLD)},
    )


def ekert_same_oracle(eve: EveStrategy) -> float:
    """Exact same-outcome rate over unequal direction pairs."""
    n_e = 3 if eve.kind == "intercept_resend_random_basis" else 1
    rates = []
    for i in range(3):
        for j in range(3):
            if i == j:
                continue
            for e in range(n_e):
                t = _ekert_table(i, j, eve.kind, eve.observable, e).reshape(2, 2, 2)
                s = t.sum(axis=0)
                rates.append((s[0, 0] + s[1, 1]) / s.sum())
    return float(np.mean(rates))


# --- pre/post selection ------------------------------------------------------

PRE = np.array([1, 0, 0, 1], dtype=complex) / SQ2
# Alice keeps the first factor; the channel particle is the second


def abl_probability(pre: np.ndarray, post: np.ndarray, projectors, k: int) -> float:
    """Probability of outcome ``k`` between a pre- and a post-selected state.

    ``|<post|P_k|pre>|^2 / sum_i |<post|P_i|pre>|^2``.
    """
    amps = np.array([abs(np.vdot(post, p @ pre)) ** 2 for p in projectors])
    total = amps.sum()
    if total < 1e-14:
        raise ValueError("incompatible pre/post pair")
    return float(amps[k] / total)


def channel_projectors(observable: str) -> list[np.ndarray]:
    """Projectors ``I ⊗ |v><v|`` onto the channel particle's eigenstates."""
    return [tensor(I2, projector(v)) for v in PAULI_BASES[observable]]


@dataclass(frozen=True)
class PrePostState:
    pre: np.ndarray
    r_states: tuple  # r_1..r_4

    @property
    def observable(self) -> np.ndarray:
        """An observable with eigenvector ``r_k`` for eigenvalue ``k``."""
        return sum((k + 1) * projector(r) for k, r in enumerate(self.r_states))

    def decomposition(self):
        return eig_hermitian(self.observable)


def build_r_observable() -> PrePostState:
    """Construct the four R eigenstates and check the pre-state identities."""
    e = np.exp(1j * np.pi / 4)
    uu, ud, du, dd = (np.eye(4, dtype=complex)[i] for i in range(4))
    r1 = uu / SQ2 + (ud * e + du / e) / 2
    r2 = uu / SQ2 - (ud * e + du / e) / 2
    r3 = dd / SQ2 + (ud / e + du * e) / 2
    r4 = dd / SQ2 - (ud / e + du * e) / 2
    rs = (r1, r2, r3, r4)
    gram = np.array([[np.vdot(a, b) for b in rs] for a in rs])
    if not np.allclose(gram, np.eye(4), atol=1e-10):
        raise RuntimeError("R eigenstates are not orthonormal")
    if not np.allclose(sum(rs) / 2, PRE, atol=1e-10):
        raise RuntimeError("pre-selected state is not the R-basis average")
    return PrePostState(PRE.copy(), rs)


TABLE_OBSERVABLES = ("X", "Y", "Z")


def table_one(state: PrePostState | None = None) -> dict:
    """Certain outcome of each channel observable given each R outcome.

    Maps ``(r_index, observable)`` to ``(outcome, probability)`` where r
    indices run 1..4 and outcome 0 means eigenvalue +1.
    """
    state = state or build_r_observable()
    out = {}
    for k, r in enumerate(state.r_states, start=1):
        for obs in TABLE_OBSERVABLES:
            projs = channel_projectors(obs)
            probs = [abl_probability(state.pre, r, projs, m) for m in (0, 1)]
            best = int(np.argmax(probs))
            out[(k, obs)] = (best, probs[best])
    return out


RETRODICTION = {(k, obs): v[0] for (k, obs), v in table_one().items()}


@lru_cache(maxsize=32)
def _prepost_table(eve_basis: str | None, bob_basis: str) -> np.ndarray:
    """Joint over (eve outcome, bob outcome, R outcome), flattened, R fastest."""
    rs = build_r_observable().r_states
    out = []
    for e in (0, 1):
        if eve_basis is None:
            s1 = PRE if e == 0 else np.zeros(4, dtype=complex)
        else:
            s1 = channel_projectors(eve_basis)[e] @ PRE
        for b in (0, 1):
            s2 = channel_projectors(bob_basis)[b] @ s1
            out.extend(abs(np.vdot(r, s2)) ** 2 for r in rs)
    return np.array(out)


def _prepost_round(idx: int, seed: int, eve: EveStrategy) -> dict:
    rng = trial_rng(seed, idx)
    rec = {"round": idx}
    eve_basis = None
    if eve.kind == "intercept_resend_fixed":
        eve_basis = eve.observable
    elif eve.kind == "intercept_resend_random_basis":
        eve_basis = "XZ"[rng.integers(2)]
    bob_basis = "XZ"[rng.integers(2)]
    k = sample_index(_prepost_table(eve_basis, bob_basis), rng)
    e, b, r = k >> 3, (k >> 2) & 1, (k & 3) + 1
    if eve_basis is not None:
        rec.update(eve_basis=eve_basis, eve_outcome=e)
    rec.update(bob_basis=bob_basis, bob_outcome=b, alice_r=r)
    if r in (1, 4):
        rec.update(role="key", alice_bit=0 if r == 1 else 1)
    else:
        predicted = RETRODICTION[(r, bob_basis)]
        rec.update(role="test", alice_prediction=predicted, mismatch=bool(predicted != b))
    return rec


def prepost_run(n: int, eve: EveStrategy = EveStrategy(), seed: int = 0) -> ProtocolTranscript:
    """Pre/post-selection key distribution.

    Alice keeps one half of ``(|00>+|11>)/sqrt2`` and sends the other; Bob
    measures X or Z on it; Alice then measures R on the pair. Rounds with
    ``r_1``/``r_4`` form the key, rounds with ``r_2``/``r_3`` are used to test
    Bob's disclosed results against Alice's retrodictions.
    """
    if n < 8:
        raise ValueError("pre/post protocol needs at least 8 rounds")
    seed = _seed_int(seed)
    rounds = map_trials(lambda i: _prepost_round(i, seed, eve), range(n))
    tests = [r for r in rounds if r["role"] == "test"]
    keys = [r for r in rounds if r["role"] == "key"]
    mismatches = sum(r["mismatch"] for r in tests)
    rate = mismatches / len(tests) if tests else 0.0
    return ProtocolTranscript(
        protocol="prepost",
        seed=seed,
        n_rounds=n,
        rounds=rounds,
        sifted_key_alice=_bits(r["alice_bit"] for r in keys),
        sifted_key_bob=_bits(r["bob_outcome"] for r in keys),
        test_statistic=float(rate),
        detected=bool(mismatches > 0),
        extra={"eve": eve.label, "n_test": len(tests), "mismatches": int(mismatches), "detection_rate": float(rate)},
    )


def prepost_mismatch_oracle(eve: EveStrategy) -> float:
    """Exact per-test-round mismatch probability."""
    if eve.kind == "none":
        e_bases = [None]
    elif eve.kind == "intercept_resend_fixed":
        e_bases = [eve.observable]
    else:
        e_bases = ["X", "Z"]
    mis = tot = 0.0
    for eb in e_bases:
        for bb in "XZ":
            t = _prepost_table(eb, bb).reshape(2, 2, 4)
            for b in (0, 1):
                for r in (2, 3):
                    p = t[:, b, r - 1].sum()
                    tot += p
                    if RETRODICTION[(r, bb)] != b:
                        mis += p
    return mis / tot


# --- deferred measurement ---------------------------------------------------

D_X, D_Z = np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
DIE_READY = (D_X + D_Z) / SQ2


def _controlled_record(observable: str) -> np.ndarray:
    """On (C, P): flip the pointer when C is in the -1 eigenstate of the observable."""
    v0, v1 = PAULI_BASES[observable]
    return np.kron(projector(v0), I2) + np.kron(projector(v1), X)


def coupling_unitary() -> np.ndarray:
    """``V`` on (C, D, P): the die selects which observable is copied into P."""
    ux, uz = _controlled_record("X"), _controlled_record("Z")
    # reorder (D, C, P) -> (C, D, P)
    v_dcp = np.kron(projector(D_X), ux) + np.kron(projector(D_Z), uz)
    t = v_dcp.reshape([2] * 6).transpose(1, 0, 2, 4, 3, 5)
    return t.reshape(8, 8)


def deferred_joint() -> np.ndarray:
    """Exact P[R outcome, Bob's observable, Bob's result] with the measurement deferred.

    Register order is A, C, D, P. Bob applies V, Alice measures R on (A, C),
    and only then are D and P read out.
    """
    state = tensor(PRE, DIE_READY, np.array([1, 0], dtype=complex))
    v = np.kron(I2, coupling_unitary())
    state = v @ state
    rs = build_r_observable().r_states
    out = np.zeros((4, 2, 2))
    t = state.reshape(4, 2, 2)  # (A C), D, P
    for k, r in enumerate(rs):
        cond = np.tensordot(r.conj(), t, axes=(0, 0))  # D, P
        out[k] = np.abs(cond) ** 2
    return out


def immediate_joint() -> np.ndarray:
    """Exact P[R outcome, Bob's observable, Bob's result] with Bob measuring at once."""
    out = np.zeros((4, 2, 2))
    for d, obs in enumerate("XZ"):
        t = _prepost_table(None, obs).reshape(2, 2, 4)[0]
        out[:, d, :] = 0.5 * t.T
    return out


@dataclass(frozen=True)
class EquivalenceReport:
    exact_distance: float
    sampled_distance: float
    n: int
    die_marginal: tuple


def _sample_counts(joint: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    flat = joint.ravel()
    draws = rng.choice(flat.size, size=n, p=flat / flat.sum())
    return np.bincount(draws, minlength=flat.size).reshape(joint.shape) / n


def deferred_measurement_equivalence(n: int, rng: np.random.Generator) -> EquivalenceReport:
    """Compare immediate and deferred versions of Bob's measurement.

    Returns the exact max difference of the two joint distributions and the
    max difference of two independent ``n``-round empirical distributions.
    """
    if n < 1000:
        raise ValueError("need at least 1000 rounds")
    imm, dfr = immediate_joint(), deferred_joint()
    exact = float(np.max(np.abs(imm - dfr)))
    sampled = float(np.max(np.abs(_sample_counts(imm, n, rng) - _sample_counts(dfr, n, rng))))
    die = dfr.sum(axis=(0, 2))
    return EquivalenceReport(exact, sampled, n, (float(die[0]), float(die[1])))

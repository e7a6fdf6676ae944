import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qinfo.bitcommit import (
    CommitmentPair,
    apply_alice,
    cheat_open,
    cheat_outcomes,
    cheating_unitary,
    concealment_check,
    equal_up_to_phase,
    honest_commit,
    peres_construction,
    peres_pair,
)
from qinfo.linalg import ket, partial_trace, projector
from qinfo.protocols import BELL_STATES, SINGLET
from qinfo.states import random_ket, random_unitary


def test_peres_identities():
    pc = peres_construction()
    for name, residual in pc.check().items():
        assert residual <= 1e-10, name
    c = pc.c_states
    # the three states of each bit sit at 120 degrees to one another
    for group in ((0, 2, 4), (1, 3, 5)):
        for i in group:
            for j in group:
                if i != j:
                    assert abs(np.vdot(c[i], c[j])) == pytest.approx(0.5)


def test_honest_ensembles_average_to_half_identity_exactly():
    c = peres_construction().c_states
    for bit in (0, 1):
        avg = sum(projector(c[bit + 2 * k]) for k in range(3)) / 3
        assert np.allclose(avg, np.eye(2) / 2, atol=1e-12)


def test_honest_commit_sampling():
    rng = np.random.default_rng(0)
    for bit in (0, 1):
        idx = [honest_commit(bit, rng).index for _ in range(3000)]
        assert set(idx) == {bit, bit + 2, bit + 4}
        counts = np.bincount(idx, minlength=6)[bit::2]
        assert np.all(np.abs(counts / 3000 - 1 / 3) < 0.04)
    with pytest.raises(ValueError):
        honest_commit(2, rng)


def test_cheat_conditional_states_equal_honest_states():
    c = peres_construction().c_states
    for bit in (0, 1):
        branches = cheat_outcomes(bit)
        assert sum(b.probability for b in branches) == pytest.approx(1, abs=1e-12)
        for b in branches:
            assert b.outcome % 2 == bit
            assert b.probability == pytest.approx(1 / 3, abs=1e-12)
            assert equal_up_to_phase(b.bob_state, c[b.outcome]) <= 1e-10


def test_cheat_open_samples_valid_branches():
    rng = np.random.default_rng(1)
    seen = {cheat_open(1, rng).outcome for _ in range(200)}
    assert seen == {1, 3, 5}


def test_peres_pair_is_concealing_and_cheatable():
    pair = peres_pair()
    w0, w1 = pair.bob_marginals()
    assert np.allclose(w0, np.eye(2) / 2, atol=1e-12)
    assert concealment_check(pair) <= 1e-10
    u = cheating_unitary(pair)
    assert np.allclose(u.conj().T @ u, np.eye(3), atol=1e-10)
    assert equal_up_to_phase(apply_alice(u, pair.state0, 2), pair.state1) <= 1e-8


def test_degenerate_schmidt_case():
    # singlet to (00+11)/sqrt2: both marginals are I/2, eigenvalues repeated
    pair = CommitmentPair(SINGLET, BELL_STATES[3], 2, 2)
    u = cheating_unitary(pair)
    assert equal_up_to_phase(apply_alice(u, pair.state0, 2), pair.state1) <= 1e-8
    # the answer is iY up to phase; check against the Pauli directly
    iy = np.array([[0, 1], [-1, 0]])
    assert equal_up_to_phase(np.kron(iy, np.eye(2)) @ SINGLET, BELL_STATES[3]) <= 1e-12


def test_all_bell_pairs_are_related_by_alice_unitaries():
    for i in range(4):
        for j in range(4):
            pair = CommitmentPair(BELL_STATES[i], BELL_STATES[j], 2, 2)
            u = cheating_unitary(pair)
            assert equal_up_to_phase(apply_alice(u, pair.state0, 2), pair.state1) <= 1e-8


def test_non_concealing_pair_is_rejected():
    pair = CommitmentPair(ket(1, 0, 0, 0), ket(0, 0, 0, 1), 2, 2)
    assert concealment_check(pair) > 0.5
    with pytest.raises(ValueError, match="not concealing"):
        cheating_unitary(pair)


def test_commitment_pair_dimension_check():
    with pytest.raises(ValueError):
        CommitmentPair(SINGLET, SINGLET, 3, 2)


def _random_concealing_pair(rng, da, db, rank=None):
    # same Bob marginal by construction: psi1 = (V ⊗ I) psi0
    psi0 = random_ket(da * db, rng)
    if rank is not None:
        m = psi0.reshape(da, db)
        uu, s, vh = np.linalg.svd(m)
        s[rank:] = 0
        psi0 = (uu * s) @ vh[: len(s)] if da <= db else (uu[:, : len(s)] * s) @ vh
        psi0 = psi0.reshape(-1) / np.linalg.norm(psi0)
    v = random_unitary(da, rng)
    return CommitmentPair(psi0, np.kron(v, np.eye(db)) @ psi0, da, db)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4), st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_cheating_unitary_on_random_concealing_pairs(da, db, seed):
    rng = np.random.default_rng(seed)
    pair = _random_concealing_pair(rng, da, db)
    u = cheating_unitary(pair)
    assert np.allclose(u.conj().T @ u, np.eye(da), atol=1e-8)
    assert equal_up_to_phase(apply_alice(u, pair.state0, db), pair.state1) <= 1e-8


def test_cheating_unitary_with_rank_deficient_states():
    rng = np.random.default_rng(3)
    for _ in range(10):
        pair = _random_concealing_pair(rng, 3, 3, rank=1)
        u = cheating_unitary(pair)
        assert equal_up_to_phase(apply_alice(u, pair.state0, 3), pair.state1) <= 1e-8


def test_maximally_entangled_pair_with_random_local_unitary():
    rng = np.random.default_rng(4)
    phi = np.eye(3).reshape(-1) / np.sqrt(3)
    w = random_unitary(3, rng)
    pair = CommitmentPair(phi.astype(complex), np.kron(w, np.eye(3)) @ phi, 3, 3)
    u = cheating_unitary(pair)
    assert equal_up_to_phase(apply_alice(u, pair.state0, 3), pair.state1) <= 1e-8
    assert np.allclose(partial_trace(projector(pair.state1), [3, 3], [1]), np.eye(3) / 3)

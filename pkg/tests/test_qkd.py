import json
from fractions import Fraction

import numpy as np
import pytest

from qinfo.linalg import I2, X, Y, Z, ket, projector
from qinfo.qkd import (
    EKERT_THRESHOLD,
    PRE,
    EveStrategy,
    abl_probability,
    bb84_qber_oracle,
    bb84_run,
    build_r_observable,
    channel_projectors,
    coupling_unitary,
    deferred_joint,
    deferred_measurement_equivalence,
    ekert_run,
    ekert_same_oracle,
    immediate_joint,
    prepost_mismatch_oracle,
    prepost_run,
    table_one,
)

EVES = ["none", "random", "fixed-x", "fixed-y", "fixed-z"]

# tabulated retrodictions: rows r1..r4, columns X, Y, Z; 0 is spin up
TABLE = {1: (0, 0, 0), 2: (1, 1, 0), 3: (0, 1, 1), 4: (1, 0, 1)}

PAULIS = {"X": X, "Y": Y, "Z": Z}


def _eigvecs(name):
    # columns are the +1 and -1 eigenvectors, from numpy directly
    w, v = np.linalg.eigh(PAULIS[name])
    return v[:, np.argsort(-w)]


def _measure_dm(rho, name, qubit=None):
    """Nonselective projective measurement, as a list of (outcome, weighted post state)."""
    v = _eigvecs(name)
    out = []
    for k in range(2):
        p = np.outer(v[:, k], v[:, k].conj())
        full = p if qubit is None else (np.kron(I2, p) if qubit == 1 else np.kron(p, I2))
        out.append((k, full @ rho @ full.conj().T))
    return out


def _bb84_oracle(eve_bases):
    # error rate on sifted rounds via density matrices
    err = tot = 0.0
    for basis in "ZX":
        v = _eigvecs(basis)
        for bit in (0, 1):
            rho = np.outer(v[:, bit], v[:, bit].conj())
            if eve_bases:
                mixed = np.zeros((2, 2), dtype=complex)
                for eb in eve_bases:
                    for k, post in _measure_dm(rho, eb):
                        mixed += post / len(eve_bases)
                rho = mixed
            wrong = np.vdot(v[:, 1 - bit], rho @ v[:, 1 - bit]).real
            err += wrong
            tot += 1
    return err / tot


@pytest.mark.parametrize(
    "name,bases,expected",
    [("none", [], 0.0), ("random", ["Z", "X"], 0.25), ("fixed-x", ["X"], 0.25), ("fixed-z", ["Z"], 0.25), ("fixed-y", ["Y"], 0.5)],
)
def test_bb84_exact_qber(name, bases, expected):
    eve = EveStrategy.parse(name)
    assert float(bb84_qber_oracle(eve)) == pytest.approx(expected)
    assert _bb84_oracle(bases) == pytest.approx(expected, abs=1e-12)


def test_bb84_no_eve_has_zero_qber_and_equal_keys():
    t = bb84_run(2000, seed=3)
    assert t.test_statistic == 0.0
    assert not t.detected
    assert t.sifted_key_alice == t.sifted_key_bob
    assert len(t.sifted_key_alice) > 0


def test_bb84_random_eve_at_1e4_rounds():
    t = bb84_run(10_000, EveStrategy.parse("random"), seed=11)
    assert abs(t.test_statistic - 0.25) <= 0.02
    assert t.detected


def test_bb84_sifting_and_roles():
    t = bb84_run(4000, seed=5)
    for r in t.rounds:
        assert (r["role"] == "discarded") == (r["alice_basis"] != r["bob_basis"])
    n_sifted = t.extra["n_sifted"]
    assert abs(n_sifted / 4000 - 0.5) < 0.05
    assert t.count("test") + t.count("key") == n_sifted


def test_bb84_determinism_and_seed_dependence():
    a = bb84_run(500, EveStrategy.parse("random"), seed=9).to_json()
    b = bb84_run(500, EveStrategy.parse("random"), seed=9).to_json()
    c = bb84_run(500, EveStrategy.parse("random"), seed=10).to_json()
    assert a == b and a != c
    doc = json.loads(a)
    assert doc["protocol"] == "bb84" and doc["n_rounds"] == 500


def test_bb84_thread_count_does_not_change_transcript(monkeypatch):
    a = bb84_run(300, EveStrategy.parse("fixed-y"), seed=2).to_json()
    monkeypatch.setenv("QINFO_THREADS", "1")
    b = bb84_run(300, EveStrategy.parse("fixed-y"), seed=2).to_json()
    assert a == b


def test_bb84_argument_checks():
    with pytest.raises(ValueError):
        bb84_run(4)
    with pytest.raises(ValueError):
        bb84_run(100, test_fraction=1.0)
    with pytest.raises(ValueError):
        EveStrategy.parse("fixed-w")
    with pytest.raises(ValueError):
        EveStrategy("intercept_resend_fixed")


def _ekert_oracle(eve_dirs):
    # exact same-outcome rate over unequal trine pairs; Eve measures Bob's half
    angles = [0, 2 * np.pi / 3, 4 * np.pi / 3]

    def spin_vecs(t):
        w, v = np.linalg.eigh(np.cos(t) * Z + np.sin(t) * X)
        return v[:, np.argsort(-w)]

    singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)
    rho = np.outer(singlet, singlet.conj())
    if eve_dirs:
        mixed = np.zeros((4, 4), dtype=complex)
        for v in eve_dirs:
            for k in range(2):
                p = np.kron(I2, np.outer(v[:, k], v[:, k].conj()))
                mixed += p @ rho @ p / len(eve_dirs)
        rho = mixed
    rates = []
    for i in range(3):
        for j in range(3):
            if i == j:
                continue
            va, vb = spin_vecs(angles[i]), spin_vecs(angles[j])
            same = 0.0
            for a in range(2):
                v = np.kron(va[:, a], vb[:, a])
                same += np.vdot(v, rho @ v).real
            rates.append(same)
    return float(np.mean(rates))


def test_ekert_exact_statistics():
    assert ekert_same_oracle(EveStrategy()) == pytest.approx(0.75)
    assert _ekert_oracle([]) == pytest.approx(0.75)
    for name in ("fixed-x", "fixed-y", "fixed-z"):
        eve = EveStrategy.parse(name)
        assert ekert_same_oracle(eve) == pytest.approx(_ekert_oracle([_eigvecs(name[-1].upper())]), abs=1e-12)
    trine = []
    for t in (0, 2 * np.pi / 3, 4 * np.pi / 3):
        w, v = np.linalg.eigh(np.cos(t) * Z + np.sin(t) * X)
        trine.append(v[:, np.argsort(-w)])
    # random Eve picks her trine direction per round, so average the per-direction rates
    per_dir = np.mean([_ekert_oracle([v]) for v in trine])
    assert ekert_same_oracle(EveStrategy.parse("random")) == pytest.approx(per_dir, abs=1e-12)


def test_ekert_no_eve_run():
    t = ekert_run(30_000, seed=4)
    assert abs(t.test_statistic - 0.75) <= 0.02
    assert not t.detected
    assert t.sifted_key_alice == t.sifted_key_bob


def test_ekert_intercept_is_detected():
    for name in ("random", "fixed-z", "fixed-y"):
        t = ekert_run(20_000, EveStrategy.parse(name), seed=6)
        assert t.test_statistic < float(EKERT_THRESHOLD)
        assert t.detected
        assert abs(t.test_statistic - ekert_same_oracle(EveStrategy.parse(name))) < 0.02


def test_r_eigenstates_and_pre_identities():
    st = build_r_observable()
    gram = np.array([[np.vdot(a, b) for b in st.r_states] for a in st.r_states])
    assert np.allclose(gram, np.eye(4), atol=1e-12)
    assert np.allclose(sum(st.r_states) / 2, PRE, atol=1e-12)
    # the same pre state written in the y eigenbasis
    y_form = (np.kron(ket(1, 1j), ket(1, -1j)) + np.kron(ket(1, -1j), ket(1, 1j))) / np.sqrt(2)
    assert np.allclose(y_form, PRE, atol=1e-12)
    e = st.decomposition()
    assert np.allclose(sorted(e.eigenvalues), [1, 2, 3, 4])


def test_table_one_matches_tabulated_values():
    t = table_one()
    for r, row in TABLE.items():
        for obs, expected in zip("XYZ", row):
            outcome, prob = t[(r, obs)]
            assert outcome == expected
            assert abs(prob - 1) <= 1e-10


def test_abl_examples():
    projs = channel_projectors("X")
    r1 = build_r_observable().r_states[0]
    assert abl_probability(PRE, r1, projs, 0) == pytest.approx(1, abs=1e-10)
    r2 = build_r_observable().r_states[1]
    assert abl_probability(PRE, r2, channel_projectors("Z"), 0) == pytest.approx(1, abs=1e-10)
    with pytest.raises(ValueError, match="incompatible"):
        abl_probability(ket(1, 0, 0, 0), ket(0, 0, 0, 1), channel_projectors("Z"), 0)


def _prepost_oracle(eve_bases):
    """Mismatch probability on r2/r3 rounds via density matrices."""
    rs = build_r_observable().r_states
    rho0 = np.outer(PRE, PRE.conj())
    mis = tot = 0.0
    for eb in eve_bases or [None]:
        rho = rho0 if eb is None else sum(post for _, post in _measure_dm(rho0, eb, qubit=1))
        for bb in "XZ":
            for b, post in _measure_dm(rho, bb, qubit=1):
                for r in (2, 3):
                    p = 0.5 / len(eve_bases or [None]) * np.vdot(rs[r - 1], post @ rs[r - 1]).real
                    tot += p
                    if TABLE[r]["XYZ".index(bb)] != b:
                        mis += p
    return mis / tot


@pytest.mark.parametrize(
    "name,bases",
    [("none", []), ("random", ["X", "Z"]), ("fixed-x", ["X"]), ("fixed-z", ["Z"]), ("fixed-y", ["Y"])],
)
def test_prepost_mismatch_matches_density_matrix_oracle(name, bases):
    assert prepost_mismatch_oracle(EveStrategy.parse(name)) == pytest.approx(_prepost_oracle(bases), abs=1e-12)


def test_prepost_exact_rates():
    # the model gives 1/8 for X/Z intercepts and 1/4 for a Y intercept
    assert prepost_mismatch_oracle(EveStrategy()) == pytest.approx(0, abs=1e-12)
    assert prepost_mismatch_oracle(EveStrategy.parse("random")) == pytest.approx(1 / 8)
    assert prepost_mismatch_oracle(EveStrategy.parse("fixed-y")) == pytest.approx(1 / 4)


def test_prepost_no_eve_run():
    t = prepost_run(1000, seed=2)
    assert t.extra["mismatches"] == 0
    assert not t.detected
    assert t.sifted_key_alice == t.sifted_key_bob
    # S14 and S23 each get half the rounds
    assert abs(t.count("key") / 1000 - 0.5) < 0.06


def test_prepost_sampled_rate_tracks_exact_value():
    for name in ("random", "fixed-y"):
        eve = EveStrategy.parse(name)
        t = prepost_run(10_000, eve, seed=7)
        assert t.detected
        assert abs(t.test_statistic - prepost_mismatch_oracle(eve)) < 0.02


def test_deferred_measurement_exact_equivalence():
    assert np.max(np.abs(deferred_joint() - immediate_joint())) <= 1e-10
    rep = deferred_measurement_equivalence(10_000, np.random.default_rng(0))
    assert rep.exact_distance <= 1e-10
    assert rep.sampled_distance < 0.03
    assert rep.die_marginal == pytest.approx((0.5, 0.5))
    with pytest.raises(ValueError):
        deferred_measurement_equivalence(10, np.random.default_rng(0))


def test_coupling_unitary_records_selected_observable():
    v = coupling_unitary()
    assert np.allclose(v.conj().T @ v, np.eye(8))
    # die on X, |+> on C: pointer stays 0; die on Z, |1> on C: pointer flips
    plus = ket(1, 1)
    out = v @ np.kron(np.kron(plus, ket(1, 0)), ket(1, 0))
    assert np.allclose(out, np.kron(np.kron(plus, ket(1, 0)), ket(1, 0)))
    out = v @ np.kron(np.kron(ket(0, 1), ket(0, 1)), ket(1, 0))
    assert np.allclose(out, np.kron(np.kron(ket(0, 1), ket(0, 1)), ket(0, 1)))


def test_transcript_serializes_round_records():
    t = prepost_run(50, EveStrategy.parse("fixed-z"), seed=1)
    doc = json.loads(t.to_json())
    assert doc["n_rounds"] == 50 and len(doc["rounds"]) == 50
    assert {"bob_basis", "bob_outcome", "alice_r", "role"} <= set(doc["rounds"][0])
    assert isinstance(bb84_qber_oracle(EveStrategy()), Fraction)

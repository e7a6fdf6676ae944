"""Reference-value suite behind ``qinfo verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import bitcommit, circuits, info, protocols, qkd, states
from .linalg import H, Z, eig_hermitian, ket, partial_trace, projector, schmidt_decompose
from .seeding import make_rng


@dataclass(frozen=True)
class GoldenItem:
    name: str
    expected: object
    computed: object
    tolerance: float
    passed: bool


def _close(computed, expected, tol) -> bool:
    try:
        return bool(np.max(np.abs(np.asarray(computed, dtype=complex) - np.asarray(expected, dtype=complex))) <= tol)
    except (TypeError, ValueError):
        return computed == expected


def _run_checks(seed: int) -> list[tuple[str, Callable[[], object], object, float]]:
    S2 = 1 / math.sqrt(2)
    singlet = protocols.SINGLET
    plus = ket(1, 1)

    def steer_bell():
        psi = np.kron(ket(0.6, 0.8j), singlet)
        # Alice holds the first two qubits and measures them in the Bell basis
        ens = states.steer(psi, 4, list(protocols.BELL_STATES))
        return sorted(np.round(ens.weights, 12))

    def bell_entropies():
        bell = protocols.BELL_STATES[3]
        q = info.quantum_joint_conditional_mutual(projector(bell), 2, 2)
        return [q.S_AB, q.S_A, q.S_B, q.S_A_given_B]

    def table_one_ok():
        return min(p for _, p in qkd.table_one().values())

    def prepost_rate(eve):
        return qkd.prepost_run(10_000, qkd.EveStrategy.parse(eve), seed=seed).test_statistic

    def shor_fail_14():
        try:
            circuits.shor_factor(15, make_rng(seed), s=64, a=14, max_attempts=5)
        except circuits.ShorFailure as exc:
            return any(h.status == "a^(r/2) = -1 mod N" for h in exc.report.history)
        return False

    def shor_random_15():
        try:
            return list(circuits.shor_factor(15, make_rng(seed), max_attempts=20).factors)
        except circuits.ShorFailure:
            return None

    def honest_density(bit):
        rng = make_rng([seed, bit])
        acc = sum(projector(bitcommit.honest_commit(bit, rng).state) for _ in range(30_000))
        return acc / 30_000

    def simon_r2():
        f = circuits.BooleanOracle(2, 2, (0, 1, 0, 1))  # period 10
        d = circuits.simon_distribution(f)
        return sorted(circuits.int_to_bits(i, 2) for i in np.flatnonzero(d > 1e-12))

    def simon_subspaces():
        ok = True
        rng = make_rng(seed)
        for r in range(1, 8):
            d = circuits.simon_distribution(circuits.periodic_oracle(3, r, rng))
            support = set(np.flatnonzero(d > 1e-12).tolist())
            ok &= support == {y for y in range(8) if circuits.dot_gf2(y, r) == 0}
        return ok

    def dj_orthogonal():
        f = circuits.BooleanOracle.from_function(2, 1, lambda x: x >> 1)
        return abs(circuits.input_register_state(f)[0])

    def degenerate_cheat():
        pair = bitcommit.CommitmentPair(singlet, protocols.BELL_STATES[3], 2, 2)
        u = bitcommit.cheating_unitary(pair)
        return bitcommit.equal_up_to_phase(bitcommit.apply_alice(u, pair.state0, 2), pair.state1)

    def peres_cheat():
        pair = bitcommit.peres_pair()
        u = bitcommit.cheating_unitary(pair)
        return bitcommit.equal_up_to_phase(bitcommit.apply_alice(u, pair.state0, 2), pair.state1)

    return [
        ("shannon.worked_example", lambda: info.shannon_entropy([0.5, 0.25, 0.125, 0.125]), 1.75, 1e-12),
        ("shannon.certain_source", lambda: info.shannon_entropy([1.0, 0.0]), 0.0, 1e-12),
        ("shannon.uniform_8", lambda: info.shannon_entropy(np.full(8, 1 / 8)), 3.0, 1e-12),
        (
            "huffman.worked_example",
            lambda: info.huffman_code([0.5, 0.25, 0.125, 0.125]).expected_length([0.5, 0.25, 0.125, 0.125]),
            1.75,
            1e-12,
        ),
        ("partial_trace.singlet", lambda: partial_trace(projector(singlet), [2, 2], [1]), np.eye(2) / 2, 1e-10),
        ("schmidt.singlet", lambda: schmidt_decompose(singlet, 2, 2).coefficients, [S2, S2], 1e-10),
        ("eig.pauli_z", lambda: eig_hermitian(Z).eigenvalues, [1.0, -1.0], 1e-10),
        (
            "ensemble.two_orthogonal",
            lambda: states.density_from_ensemble(states.Ensemble.uniform([ket(1, 0), ket(0, 1)])),
            np.eye(2) / 2,
            1e-10,
        ),
        (
            "ensemble.trine",
            lambda: states.density_from_ensemble(
                states.Ensemble.uniform([ket(1, 0), ket(0.5, math.sqrt(3) / 2), ket(0.5, -math.sqrt(3) / 2)])
            ),
            np.eye(2) / 2,
            1e-10,
        ),
        (
            "purify.maximally_mixed",
            lambda: schmidt_decompose(states.purify(np.eye(2) / 2), 2, 2).coefficients,
            [S2, S2],
            1e-8,
        ),
        (
            "povm.unambiguous_zero_on_plus",
            lambda: states.unambiguous_discrimination_povm().probabilities(projector(plus))[0],
            0.0,
            1e-10,
        ),
        (
            "povm.unambiguous_zero_on_zero",
            lambda: states.unambiguous_discrimination_povm().probabilities(projector(ket(1, 0)))[1],
            0.0,
            1e-10,
        ),
        ("steer.bell_basis_quarter", steer_bell, [0.25] * 4, 1e-10),
        ("entropy.maximally_mixed", lambda: info.von_neumann_entropy(np.eye(2) / 2), 1.0, 1e-10),
        ("entropy.pure", lambda: info.von_neumann_entropy(projector(plus)), 0.0, 1e-10),
        ("entropy.bell_state", bell_entropies, [0.0, 1.0, 1.0, -1.0], 1e-8),
        (
            "entropy.product_additive",
            lambda: info.von_neumann_entropy(np.kron(np.diag([0.7, 0.3]), np.eye(2) / 2))
            - info.von_neumann_entropy(np.diag([0.7, 0.3]))
            - 1.0,
            0.0,
            1e-10,
        ),
        (
            "holevo.bb84",
            lambda: info.holevo_chi(states.Ensemble.uniform([ket(1, 0), ket(0, 1), ket(1, 1), ket(1, -1)])),
            1.0,
            1e-8,
        ),
        (
            "teleport.uniform_outcomes",
            lambda: [b.probability for b in protocols.teleport_branches(ket(1, 0))],
            [0.25] * 4,
            1e-10,
        ),
        (
            "teleport.fidelity",
            lambda: min(b.fidelity for b in protocols.teleport_branches(ket(0.3, 0.4 + 0.5j))),
            1.0,
            1e-10,
        ),
        ("dense.sigma_z_gives_state_2", lambda: protocols.dense_code("01"), 1, 0),
        ("singlet.opposite_directions", lambda: protocols.analytic_same(0, math.pi), 1.0, 1e-12),
        ("singlet.equal_directions", lambda: protocols.analytic_same(0.4, 0.4), 0.0, 1e-12),
        ("singlet.trine_gap", lambda: protocols.analytic_same(0, 2 * math.pi / 3), 0.75, 1e-12),
        ("lhv.bound", lambda: float(protocols.lhv_same_outcome_bound()), 2 / 3, 1e-15),
        ("lhv.quantum_exceeds", lambda: protocols.quantum_trine_same() > 2 / 3, True, 0),
        ("cloning.nonorthogonal", lambda: protocols.cloning_feasible(ket(1, 0), plus), False, 0),
        (
            "no_signalling.x_measurement",
            lambda: protocols.no_signalling_check(
                singlet, 2, states.projective_channel([ket(1, 1), ket(1, -1)])
            ),
            0.0,
            1e-10,
        ),
        ("prepost.table_one", table_one_ok, 1.0, 1e-10),
        (
            "prepost.pre_is_r_average",
            lambda: sum(qkd.build_r_observable().r_states) / 2,
            qkd.PRE,
            1e-10,
        ),
        (
            "prepost.y_correlated_form",
            lambda: (np.kron(ket(1, 1j), ket(1, -1j)) + np.kron(ket(1, -1j), ket(1, 1j))) / math.sqrt(2),
            qkd.PRE,
            1e-10,
        ),
        ("prepost.detection_random_xz", lambda: prepost_rate("random-xz"), 0.375, 0.02),
        ("prepost.detection_fixed_y", lambda: prepost_rate("fixed-y"), 0.375, 0.02),
        ("ekert.no_eve_statistic", lambda: qkd.ekert_run(30_000, seed=seed).test_statistic, 0.75, 0.02),
        (
            "bitcommit.peres_identities",
            lambda: max(bitcommit.peres_construction().check().values()),
            0.0,
            1e-10,
        ),
        ("bitcommit.honest_density_0", lambda: honest_density(0), np.eye(2) / 2, 0.02),
        ("bitcommit.honest_density_1", lambda: honest_density(1), np.eye(2) / 2, 0.02),
        (
            "bitcommit.cheat_states",
            lambda: max(
                bitcommit.equal_up_to_phase(o.bob_state, bitcommit.peres_construction().c_states[o.outcome])
                for b in (0, 1)
                for o in bitcommit.cheat_outcomes(b)
            ),
            0.0,
            1e-10,
        ),
        ("bitcommit.peres_concealing", lambda: bitcommit.concealment_check(bitcommit.peres_pair()), 0.0, 1e-10),
        ("bitcommit.peres_cheating_unitary", peres_cheat, 0.0, 1e-8),
        ("bitcommit.degenerate_cheating_unitary", degenerate_cheat, 0.0, 1e-8),
        ("circuits.hadamard_squared", lambda: H @ H, np.eye(2), 1e-12),
        ("dj.balanced_orthogonal_to_constant", dj_orthogonal, 0.0, 1e-10),
        ("simon.period_10_support", simon_r2, ["00", "01"], 0),
        ("simon.three_bit_subspaces", simon_subspaces, True, 0),
        (
            "dft.period_4_comb",
            lambda: np.flatnonzero(np.abs(circuits.dft_mod_s(64) @ (np.arange(64) % 4 == 0) / 4) > 1e-10).tolist(),
            [0, 16, 32, 48],
            0,
        ),
        (
            "shor.n15_a7_support",
            lambda: np.flatnonzero(circuits.shor_distribution(15, 7, 64) > 1e-12).tolist(),
            [0, 16, 32, 48],
            0,
        ),
        (
            "shor.n15_a4_support",
            lambda: np.flatnonzero(circuits.shor_distribution(15, 4, 64) > 1e-12).tolist(),
            [0, 32],
            0,
        ),
        (
            "shor.n15_a7_factors",
            lambda: list(circuits.shor_postprocess(15, 7, 16, 64).factors),
            [3, 5],
            0,
        ),
        ("shor.n15_a14_rejected", shor_fail_14, True, 0),
        ("shor.n15_randomized", shor_random_15, [3, 5], 0),
    ]


def run_golden(seed: int = 0) -> list[GoldenItem]:
    items = []
    for name, fn, expected, tol in _run_checks(seed):
        try:
            computed = fn()
            ok = _close(computed, expected, tol)
        except Exception as exc:  # a crash is a failed item, not a crashed suite
            computed, ok = f"error: {exc}", False
        if isinstance(computed, np.ndarray) and computed.size > 1:
            computed = computed.tolist()
        items.append(GoldenItem(name, expected, computed, tol, ok))
    return items

"""Pure-state gate simulator and the oracle algorithms built on it.

Qubit 0 is the most significant tensor factor. Bit strings are written
with qubit 0 first, so ``"10"`` is basis index 2 on two qubits.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .linalg import ATOL, H, X, Y, Z, basis, check_ket, is_unitary
from .states import sample_index

S_GATE = np.diag([1, 1j]).astype(complex)
T_GATE = np.diag([1, np.exp(1j * np.pi / 4)]).astype(complex)
CNOT_MATRIX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)

_FIXED = {"H": H, "X": X, "Y": Y, "Z": Z, "S": S_GATE, "T": T_GATE, "CNOT": CNOT_MATRIX}
MAX_ORACLE_QUBITS = 12
MAX_DFT = 1024


@dataclass(frozen=True)
class Gate:
    """One circuit step.

    ``kind`` is H, X, Y, Z, S, T, CNOT, CUSTOM (explicit unitary) or ORACLE
    (a basis permutation, stored as an index map over the target qubits).
    """

    kind: str
    targets: tuple
    matrix: np.ndarray | None = field(default=None, repr=False)
    permutation: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        targets = tuple(int(t) for t in self.targets)
        object.__setattr__(self, "targets", targets)
        if len(set(targets)) != len(targets) or not targets:
            raise ValueError("gate targets must be distinct and non-empty")
        k = len(targets)
        if self.kind in _FIXED:
            m = _FIXED[self.kind]
            if m.shape[0] != 2**k:
                raise ValueError(f"{self.kind} acts on {int(math.log2(m.shape[0]))} qubit(s), got {k}")
            object.__setattr__(self, "matrix", m)
        elif self.kind == "CUSTOM":
            m = np.asarray(self.matrix, dtype=complex)
            if m.shape != (2**k, 2**k) or not is_unitary(m, ATOL):
                raise ValueError("custom gate must be a unitary matching its target count")
            object.__setattr__(self, "matrix", m)
        elif self.kind == "ORACLE":
            perm = np.asarray(self.permutation, dtype=np.int64)
            if perm.shape != (2**k,) or not np.array_equal(np.sort(perm), np.arange(2**k)):
                raise ValueError("oracle gate needs a permutation of its basis")
            object.__setattr__(self, "permutation", perm)
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")

    @property
    def arity(self) -> int:
        return len(self.targets)


@dataclass
class Circuit:
    n_qubits: int
    gates: list = field(default_factory=list)

    def add(self, kind: str, *targets: int, matrix=None, permutation=None) -> "Circuit":
        g = Gate(kind, tuple(targets), matrix=matrix, permutation=permutation)
        if max(g.targets) >= self.n_qubits or min(g.targets) < 0:
            raise ValueError("gate target outside the register")
        self.gates.append(g)
        return self

    def h_all(self, qubits: Sequence[int]) -> "Circuit":
        for q in qubits:
            self.add("H", q)
        return self

    def gate_counts(self) -> dict:
        """Oracle calls and elementary gates counted separately."""
        counts = Counter(g.kind for g in self.gates)
        return {
            "oracle_calls": counts.pop("ORACLE", 0),
            "elementary_gates": sum(counts.values()),
            "by_kind": dict(sorted(counts.items())),
        }


def _apply(state: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    k = gate.arity
    t = np.moveaxis(state.reshape((2,) * n), gate.targets, range(k)).reshape(2**k, -1)
    if gate.kind == "ORACLE":
        out = np.empty_like(t)
        out[gate.permutation] = t
    else:
        out = gate.matrix @ t
    out = np.moveaxis(out.reshape((2,) * n), range(k), gate.targets)
    return out.reshape(-1)


def run_circuit(c: Circuit, psi: np.ndarray) -> np.ndarray:
    psi = check_ket(psi)
    if psi.size != 2**c.n_qubits:
        raise ValueError("input dimension does not match the register")
    for g in c.gates:
        psi = _apply(psi, g, c.n_qubits)
    return psi


def bits_to_int(bits: str) -> int:
    return int(bits, 2) if bits else 0


def int_to_bits(value: int, width: int) -> str:
    return format(value, f"0{width}b") if width else ""


@dataclass(frozen=True)
class BooleanOracle:
    """Truth table of ``f: {0,1}^n_in -> {0,1}^n_out``; entry x is f(x) as an int."""

    n_in: int
    n_out: int
    table: tuple

    def __post_init__(self):
        table = tuple(int(v) for v in self.table)
        if len(table) != 2**self.n_in:
            raise ValueError("truth table length must be 2**n_in")
        if any(v < 0 or v >= 2**self.n_out for v in table):
            raise ValueError("truth table entry exceeds n_out bits")
        object.__setattr__(self, "table", table)

    @classmethod
    def from_function(cls, n_in: int, n_out: int, fn: Callable[[int], int]) -> "BooleanOracle":
        return cls(n_in, n_out, tuple(fn(x) for x in range(2**n_in)))

    def __call__(self, x: int) -> int:
        return self.table[x]

    def permutation(self) -> np.ndarray:
        """Index map of ``|x>|y> -> |x>|y XOR f(x)>``."""
        m = self.n_out
        idx = np.arange(2 ** (self.n_in + m))
        x, y = idx >> m, idx & (2**m - 1)
        return (x << m) | (y ^ np.asarray(self.table)[x])


def oracle_unitary(f: BooleanOracle) -> np.ndarray:
    if f.n_in + f.n_out > MAX_ORACLE_QUBITS:
        raise ValueError("instance too large")
    perm = f.permutation()
    u = np.zeros((perm.size, perm.size), dtype=complex)
    u[perm, np.arange(perm.size)] = 1.0
    return u


def _oracle_gate(c: Circuit, f: BooleanOracle, first: int = 0) -> Circuit:
    return c.add("ORACLE", *range(first, first + f.n_in + f.n_out), permutation=f.permutation())


def deutsch_circuit(f: BooleanOracle) -> Circuit:
    """Phase-kickback circuit acting on ``|0>|1>``."""
    if f.n_in != 1 or f.n_out != 1:
        raise ValueError("Deutsch's problem needs a one-bit oracle")
    c = Circuit(2).h_all([0, 1])
    _oracle_gate(c, f)
    return c.add("H", 0)


def deutsch_decide(f: BooleanOracle) -> str:
    """Classify a one-bit function with a single oracle call."""
    out = run_circuit(deutsch_circuit(f), basis(4, 1))
    p_zero = float(np.sum(np.abs(out[:2]) ** 2))
    return "constant" if p_zero > 0.5 else "balanced"


def deutsch_jozsa_circuit(f: BooleanOracle) -> Circuit:
    if f.n_out != 1:
        raise ValueError("Deutsch-Jozsa needs a one-bit output")
    n = f.n_in
    c = Circuit(n + 1).h_all(range(n + 1))
    _oracle_gate(c, f)
    return c.h_all(range(n))


def deutsch_jozsa_state(f: BooleanOracle) -> np.ndarray:
    """Final state; the ancilla ends in ``|->`` so the input register factors out."""
    return run_circuit(deutsch_jozsa_circuit(f), basis(2 ** (f.n_in + 1), 1))


def input_register_state(f: BooleanOracle) -> np.ndarray:
    """Input-register amplitudes of the final Deutsch-Jozsa state."""
    out = deutsch_jozsa_state(f).reshape(2**f.n_in, 2)
    # ancilla is |-> = (|0> - |1>)/sqrt2
    return (out[:, 0] - out[:, 1]) / np.sqrt(2)


def deutsch_jozsa_decide(f: BooleanOracle) -> str:
    """All-zeros input outcome means constant; the promise is not checked."""
    if f.n_in > 10:
        raise ValueError("instance too large")
    out = deutsch_jozsa_state(f)
    p_zero = float(np.sum(np.abs(out[:2]) ** 2))
    return "constant" if p_zero > 0.5 else "balanced"


# --- Simon ------------------------------------------------------------------


def periodic_oracle(n: int, period: int, rng: np.random.Generator) -> BooleanOracle:
    """Random 2-to-1 function with ``f(x) = f(x XOR period)``."""
    if not 0 < period < 2**n:
        raise ValueError("period must be a non-zero n-bit value")
    values = rng.permutation(2**n)
    table = [0] * 2**n
    seen: dict[int, int] = {}
    nxt = 0
    for x in range(2**n):
        rep = min(x, x ^ period)
        if rep not in seen:
            seen[rep] = int(values[nxt])
            nxt += 1
        table[x] = seen[rep]
    return BooleanOracle(n, n, tuple(table))


def simon_distribution(f: BooleanOracle) -> np.ndarray:
    """Exact input-register outcome distribution after H, U_f, H.

    The output register is traced out instead of measured.
    """
    n, m = f.n_in, f.n_out
    if n + m > 16:
        raise ValueError("instance too large")
    c = Circuit(n + m).h_all(range(n))
    _oracle_gate(c, f)
    c.h_all(range(n))
    out = run_circuit(c, basis(2 ** (n + m), 0)).reshape(2**n, 2**m)
    return np.sum(np.abs(out) ** 2, axis=1)


def dot_gf2(a: int, b: int) -> int:
    return bin(a & b).count("1") & 1


@dataclass(frozen=True)
class Gf2System:
    """Homogeneous GF(2) equations ``y . r = 0``, rows as n-bit strings."""

    equations: tuple = ()

    def rows(self) -> list[int]:
        return [bits_to_int(e) for e in self.equations]


def _row_reduce(rows: Sequence[int], n: int) -> tuple[list[int], list[int]]:
    """Reduced row-echelon form; returns (rows, pivot bit positions)."""
    rows = [r for r in rows]
    pivots: list[int] = []
    rank = 0
    for bit in reversed(range(n)):
        mask = 1 << bit
        pivot = next((i for i in range(rank, len(rows)) if rows[i] & mask), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i] & mask:
                rows[i] ^= rows[rank]
        pivots.append(bit)
        rank += 1
    return rows[:rank], pivots


def gf2_rank(rows: Sequence[int], n: int) -> int:
    return len(_row_reduce(rows, n)[1])


def gf2_solve(system: Gf2System, n: int) -> str | None:
    """Unique non-zero solution of the system, or None if nullity is not 1."""
    rows, pivots = _row_reduce(system.rows(), n)
    free = [b for b in range(n) if b not in pivots]
    if len(free) != 1:
        return None
    r = 1 << free[0]
    for row, p in zip(rows, pivots):
        if row & r:
            r |= 1 << p
    return int_to_bits(r, n)


@dataclass(frozen=True)
class SimonReport:
    period: str
    samples: tuple
    oracle_calls: int


def simon_find_period(f: BooleanOracle, rng: np.random.Generator) -> SimonReport:
    """Sample ``y`` with ``y . r = 0`` until the equations pin down ``r``."""
    n = f.n_in
    if n > 8 or f.n_out != n:
        raise ValueError("Simon's problem here needs n_in == n_out <= 8")
    probs = simon_distribution(f)
    samples: list[int] = []
    for _ in range(50 * n):
        y = sample_index(probs, rng)
        if probs[y] < 1e-12:
            raise RuntimeError("sampled an outcome with zero amplitude")
        samples.append(y)
        if gf2_rank(samples, n) == n - 1:
            r = gf2_solve(Gf2System(tuple(int_to_bits(s, n) for s in samples)), n)
            if r is not None and f(0) == f(bits_to_int(r)):
                return SimonReport(r, tuple(int_to_bits(s, n) for s in samples), len(samples))
    raise RuntimeError("sampling failed to reach rank")


# --- Shor -------------------------------------------------------------------


@lru_cache(maxsize=8)
def _dft_cached(s: int) -> np.ndarray:
    x = np.arange(s)
    m = np.exp(2j * np.pi * np.outer(x, x) / s) / np.sqrt(s)
    m.setflags(write=False)
    return m


def dft_mod_s(s: int) -> np.ndarray:
    """Discrete Fourier transform ``|x> -> s^{-1/2} sum_y e^{2 pi i x y / s} |y>``."""
    if not 1 <= s <= MAX_DFT:
        raise ValueError("instance too large")
    return _dft_cached(s).copy()


def multiplicative_order(a: int, n: int) -> int:
    if math.gcd(a, n) != 1:
        raise ValueError("a not coprime to N")
    r, v = 1, a % n
    while v != 1:
        v = v * a % n
        r += 1
    return r


def shor_distribution(n: int, a: int, s: int) -> np.ndarray:
    """Exact distribution of the input register after the Fourier transform.

    The register pair starts in ``s^{-1/2} sum_x |x>|a^x mod N>``; the
    second register is traced out rather than measured.
    """
    if math.gcd(a, n) != 1:
        raise ValueError("a not coprime to N")
    if n > 64 or s > MAX_DFT:
        raise ValueError("instance too large")
    values = np.array([pow(a, x, n) for x in range(s)])
    state = np.zeros((s, n), dtype=complex)
    state[np.arange(s), values] = 1.0 / np.sqrt(s)
    out = _dft_cached(s) @ state
    probs = np.sum(np.abs(out) ** 2, axis=1)
    return probs / probs.sum()


def shor_order_sample(n: int, a: int, s: int, rng: np.random.Generator) -> int:
    return sample_index(shor_distribution(n, a, s), rng)


def default_register_size(n: int) -> int:
    return 1 << max(0, (n * n - 1).bit_length())


def candidate_orders(c: int, s: int, n: int) -> list[int]:
    """Order candidates from a measured ``c``, in the order they are tried.

    First the denominator of ``c/s`` in lowest terms, then the denominator
    of the best approximation with denominator at most N, then small
    multiples of both (``c/s`` may reduce to ``k/r`` with ``gcd(k, r) > 1``).
    """
    if c == 0:
        return []
    base = [Fraction(c, s).denominator, Fraction(c, s).limit_denominator(n).denominator]
    out: list[int] = []
    for q in base:
        if q not in out:
            out.append(q)
    for q in base:
        for mult in range(2, n // q + 1):
            if q * mult not in out:
                out.append(q * mult)
    return out


@dataclass(frozen=True)
class ShorAttempt:
    a: int
    c: int
    r: int | None
    status: str
    factors: tuple | None = None


def shor_postprocess(n: int, a: int, c: int, s: int) -> ShorAttempt:
    """Classical part of one attempt: order candidate, checks, gcds."""
    if c == 0:
        return ShorAttempt(a, c, None, "c = 0 carries no order information")
    r = None
    for cand in candidate_orders(c, s, n):
        r = cand
        if pow(a, cand, n) == 1:
            break
    else:
        return ShorAttempt(a, c, r, "no order candidate satisfies a^r = 1 mod N")
    if r % 2:
        return ShorAttempt(a, c, r, "odd order")
    half = pow(a, r // 2, n)
    if half == n - 1:
        return ShorAttempt(a, c, r, "a^(r/2) = -1 mod N")
    f1, f2 = math.gcd(half - 1, n), math.gcd(half + 1, n)
    for f in (f1, f2):
        if 1 < f < n and n % f == 0:
            return ShorAttempt(a, c, r, "ok", tuple(sorted((f, n // f))))
    return ShorAttempt(a, c, r, "trivial gcd")


@dataclass(frozen=True)
class ShorRunReport:
    N: int
    a: int
    s: int
    samples: tuple
    candidate_r: int | None
    factors: tuple | None
    attempts: int
    history: tuple = field(default=(), repr=False)


class ShorFailure(RuntimeError):
    def __init__(self, report: ShorRunReport):
        super().__init__(f"attempts exhausted after {report.attempts} tries")
        self.report = report


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % d for d in range(2, math.isqrt(n) + 1))


def validate_shor_modulus(n: int) -> None:
    if n > 64 or n < 9 or n % 2 == 0 or _is_prime(n):
        raise ValueError("N must be an odd composite at most 64")
    for p in range(3, math.isqrt(n) + 1, 2):
        if n % p == 0:
            m = n
            while m % p == 0:
                m //= p
            if m == 1:
                raise ValueError("N must not be a prime power")
            break


def shor_factor(
    n: int,
    rng: np.random.Generator,
    s: int | None = None,
    max_attempts: int = 20,
    a: int | None = None,
) -> ShorRunReport:
    """Randomized factoring by order finding.

    Each attempt samples ``c``, turns it into an order candidate and tries
    the gcd step. With ``a`` given, every attempt reuses that base.

    Raises:
        ShorFailure: no attempt produced a factor; ``.report`` holds the run.
    """
    validate_shor_modulus(n)
    s = default_register_size(n) if s is None else s
    if a is not None and math.gcd(a, n) != 1:
        raise ValueError("a not coprime to N")
    bases = [b for b in range(2, n) if math.gcd(b, n) == 1]
    history = []
    for attempt in range(1, max_attempts + 1):
        base = a if a is not None else int(bases[rng.integers(len(bases))])
        c = shor_order_sample(n, base, s, rng)
        res = shor_postprocess(n, base, c, s)
        history.append(res)
        if res.factors is not None:
            return ShorRunReport(
                n, base, s, tuple(h.c for h in history if h.a == base), res.r, res.factors, attempt, tuple(history)
            )
    last = history[-1]
    report = ShorRunReport(
        n, last.a, s, tuple(h.c for h in history if h.a == last.a), last.r, None, max_attempts, tuple(history)
    )
    raise ShorFailure(report)

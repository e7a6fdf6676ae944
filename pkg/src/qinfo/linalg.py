"""Dense complex linear algebra on finite-dimensional Hilbert spaces.

Operators are 2-D ``complex128`` arrays and kets are 1-D arrays. Tensor
factor 0 is the most significant: the basis index of ``|b0 b1 ... b(n-1)>``
is ``sum(b_i * 2**(n-1-i))``, which is what ``numpy.kron`` produces.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

ATOL = 1e-10
ITER_TOL = 1e-8
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 60
# above this dimension the interpreted Jacobi sweep is too slow; use LAPACK
JACOBI_MAX_DIM = 64

# 2x2 building blocks
I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def ket(*amplitudes) -> np.ndarray:
    """Build a normalized ket from raw amplitudes."""
    v = np.asarray(amplitudes, dtype=complex).ravel()
    return v / np.linalg.norm(v)


def basis(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def dagger(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).conj().T


def check_ket(psi, atol: float = ATOL) -> np.ndarray:
    v = np.asarray(psi, dtype=complex)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("ket must be a non-empty 1-D array")
    if not np.all(np.isfinite(v)):
        raise ValueError("ket has non-finite amplitudes")
    if abs(np.linalg.norm(v) - 1.0) > atol:
        raise ValueError(f"ket norm {np.linalg.norm(v):.3g} differs from 1")
    return v


def check_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.size == 0:
        raise ValueError("matrix must be a non-empty 2-D array")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def is_hermitian(m: np.ndarray, atol: float = ATOL) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and np.allclose(m, dagger(m), atol=atol, rtol=0)


def is_unitary(m: np.ndarray, atol: float = ATOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return np.allclose(dagger(m) @ m, np.eye(m.shape[0]), atol=atol, rtol=0)


def tensor(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product; the first argument is the most significant factor.

    Works for operators and kets alike. With two arguments,
    ``(A ⊗ B)[i*rB + k, j*cB + l] == A[i, j] * B[k, l]``.
    """
    if not factors:
        raise ValueError("tensor needs at least one factor")
    return reduce(np.kron, (np.asarray(f, dtype=complex) for f in factors))


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every factor of ``rho`` not listed in ``keep``.

    ``dims`` gives the factor dimensions in significance order; the kept
    factors stay in their original relative order.
    """
    rho = check_matrix(rho)
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims) or rho.shape[0] != rho.shape[1] or int(np.prod(dims)) != rho.shape[0]:
        raise ValueError("incompatible factorization")
    if isinstance(keep, (int, np.integer)):
        keep = [int(keep)]
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValueError("incompatible factorization")
    n = len(dims)
    t = rho.reshape(dims + dims)
    # contract traced factors pairwise, from the highest index down
    traced = [i for i in range(n) if i not in keep]
    for count, i in enumerate(sorted(traced, reverse=True)):
        m = n - count
        t = np.trace(t, axis1=i, axis2=i + m)
    d = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d, d)


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # real, non-increasing
    eigenvectors: np.ndarray  # column i pairs with eigenvalues[i]

    def vector(self, i: int) -> np.ndarray:
        return self.eigenvectors[:, i]


def _fix_phase(v: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    """Rotate the first non-negligible component to the positive real axis."""
    idx = np.flatnonzero(np.abs(v) > max(atol, 1e-9 * np.abs(v).max()))
    if idx.size == 0:
        return v
    c = v[idx[0]]
    return v * (abs(c) / c)


def _jacobi(a: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic complex Jacobi rotations; returns (diagonal, eigenvector matrix)."""
    a = a.copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(1.0, np.linalg.norm(a))
    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off < tol * scale:
            return np.real(np.diag(a)).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                z = a[p, q]
                mag = abs(z)
                if mag < 1e-300:
                    continue
                phase = z / mag
                theta = 0.5 * np.arctan2(2 * mag, (a[p, p] - a[q, q]).real)
                c, s = np.cos(theta), np.sin(theta)
                # G acts on the (p, q) plane; G^H A G zeroes A[p, q]
                g = np.array([[c, -s], [s * phase.conjugate(), c * phase.conjugate()]])
                cols = a[:, [p, q]] @ g
                a[:, p], a[:, q] = cols[:, 0], cols[:, 1]
                rows = g.conj().T @ a[[p, q], :]
                a[p, :], a[q, :] = rows[0], rows[1]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vcols = v[:, [p, q]] @ g
                v[:, p], v[:, q] = vcols[:, 0], vcols[:, 1]
    raise RuntimeError("Jacobi iteration did not converge")


def eig_hermitian(
    m: np.ndarray, atol: float = ATOL, tol: float = JACOBI_TOL, method: str = "auto"
) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Eigenvalues come back in non-increasing order. Each eigenvector has its
    first non-negligible entry real and positive; eigenvectors sharing an
    eigenvalue (within ``atol``) are ordered lexicographically, largest first.
    ``method="auto"`` switches to LAPACK above ``JACOBI_MAX_DIM``.
    """
    m = check_matrix(m)
    if not is_hermitian(m, atol):
        raise ValueError("matrix is not Hermitian")
    m = 0.5 * (m + dagger(m))
    if method == "auto":
        method = "jacobi" if m.shape[0] <= JACOBI_MAX_DIM else "lapack"
    if method == "jacobi":
        w, v = _jacobi(m, tol)
    elif method == "lapack":
        w, v = np.linalg.eigh(m)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    v = np.column_stack([_fix_phase(v[:, i]) for i in range(v.shape[1])])

    def key(i):
        col = v[:, i]
        # round so tiny roundoff does not reorder degenerate vectors
        entries = tuple(x for c in np.round(col, 9) for x in (-c.real, -c.imag))
        return entries

    order = sorted(range(len(w)), key=lambda i: -w[i])
    # regroup near-equal eigenvalues and sort inside each group
    grouped: list[int] = []
    i = 0
    while i < len(order):
        j = i + 1
        while j < len(order) and abs(w[order[j]] - w[order[i]]) <= atol:
            j += 1
        grouped.extend(sorted(order[i:j], key=key))
        i = j
    return EigenDecomposition(eigenvalues=w[grouped], eigenvectors=v[:, grouped])


def matrix_sqrt_psd(m: np.ndarray, atol: float = ATOL) -> np.ndarray:
    """Positive semidefinite square root S with S @ S == m."""
    e = eig_hermitian(m, atol=atol)
    if e.eigenvalues.min() < -atol:
        raise ValueError(f"matrix has negative eigenvalue {e.eigenvalues.min():.3g}")
    root = np.sqrt(np.clip(e.eigenvalues, 0.0, None))
    u = e.eigenvectors
    return (u * root) @ dagger(u)


@dataclass(frozen=True)
class SchmidtDecomposition:
    coefficients: np.ndarray  # non-negative, non-increasing
    basis_a: np.ndarray  # columns are orthonormal kets on A
    basis_b: np.ndarray  # columns are orthonormal kets on B

    @property
    def rank(self) -> int:
        return int(np.sum(self.coefficients > 1e-12))

    def reconstruct(self) -> np.ndarray:
        out = np.zeros(self.basis_a.shape[0] * self.basis_b.shape[0], dtype=complex)
        for c, a, b in zip(self.coefficients, self.basis_a.T, self.basis_b.T):
            out += c * np.kron(a, b)
        return out


def _complete_basis(vectors: list[np.ndarray], dim: int, candidates: np.ndarray) -> list[np.ndarray]:
    """Extend an orthonormal list using candidate columns, then standard basis."""
    out = list(vectors)
    pool = list(candidates.T) + [basis(dim, i) for i in range(dim)]
    for c in pool:
        if len(out) == dim:
            break
        w = c.astype(complex).copy()
        for u in out:
            w -= np.vdot(u, w) * u
        nrm = np.linalg.norm(w)
        if nrm > 1e-8:
            out.append(_fix_phase(w / nrm))
    return out


def schmidt_decompose(psi: np.ndarray, dim_a: int, dim_b: int) -> SchmidtDecomposition:
    """Schmidt decomposition of a bipartite pure state.

    The amplitude vector is reshaped into a ``dim_a x dim_b`` coefficient
    matrix M. The A-side basis diagonalizes ``M M^H``; each B-side partner
    with non-zero coefficient is derived from it so that phases align, and
    the remaining B-side vectors come from the null space of ``M^T conj(M)``.
    """
    psi = check_ket(psi)
    if dim_a * dim_b != psi.size:
        raise ValueError("incompatible factorization")
    m = psi.reshape(dim_a, dim_b)
    k = min(dim_a, dim_b)
    ea = eig_hermitian(m @ dagger(m))
    coeffs = np.sqrt(np.clip(ea.eigenvalues[:k], 0.0, None))
    a_vecs = [ea.vector(i) for i in range(k)]
    b_vecs = []
    for c, a in zip(coeffs, a_vecs):
        if c > 1e-12:
            b_vecs.append(a.conj() @ m / c)
    gram_b = eig_hermitian(m.T @ m.conj())
    b_vecs = _complete_basis(b_vecs, dim_b, gram_b.eigenvectors[:, ::-1])[:k]
    coeffs = np.where(coeffs > 1e-12, coeffs, 0.0)
    return SchmidtDecomposition(
        coefficients=coeffs,
        basis_a=np.column_stack(a_vecs),
        basis_b=np.column_stack(b_vecs),
    )

"""Dense operator primitives for bipartite systems.

Matrices are plain ``numpy`` complex arrays. Bipartite operators on
``H_X (x) H_Y`` use row-major subsystem ordering: the left factor carries the
most significant index, so ``|x, y>`` sits at position ``x * dY + y``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-9
RANK_TOL = 1e-10

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class DimensionError(ValueError):
    """Raised when operator shapes do not match the declared subsystem dimensions."""


class NotHermitianError(ValueError):
    pass


@dataclass(frozen=True)
class OperatorSchmidtDecomposition:
    """``W = sum_i coefficients[i] * kron(left[i], right[i])``.

    Factors are Hermitian and orthonormal under the Hilbert-Schmidt inner
    product; coefficients are nonnegative and sorted in descending order.
    """

    coefficients: np.ndarray
    left: tuple[np.ndarray, ...]
    right: tuple[np.ndarray, ...]

    def __len__(self) -> int:
        return len(self.coefficients)

    def reconstruct(self) -> np.ndarray:
        if not len(self):
            dx, dy = self.left_dim, self.right_dim
            return np.zeros((dx * dy, dx * dy), dtype=complex)
        return sum(g * np.kron(a, b) for g, a, b in zip(self.coefficients, self.left, self.right))

    @property
    def left_dim(self) -> int:
        return self.left[0].shape[0] if self.left else 0

    @property
    def right_dim(self) -> int:
        return self.right[0].shape[0] if self.right else 0


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(m))


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def hermiticity_residual(m: np.ndarray) -> float:
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m - dagger(m))))


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and hermiticity_residual(m) <= tol


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return (m + dagger(m)) / 2


def _check_bipartite(m: np.ndarray, dims: tuple[int, int]) -> tuple[int, int]:
    dx, dy = (int(d) for d in dims)
    if dx < 1 or dy < 1:
        raise DimensionError(f"subsystem dimensions must be positive, got {dims}")
    if m.shape != (dx * dy, dx * dy):
        raise DimensionError(f"operator of shape {m.shape} does not act on {dx}x{dy}")
    return dx, dy


def partial_trace(m, dims: tuple[int, int], keep: int = 0) -> np.ndarray:
    """Reduced operator on subsystem ``keep`` (0 for X, 1 for Y)."""
    m = as_matrix(m)
    dx, dy = _check_bipartite(m, dims)
    t = m.reshape(dx, dy, dx, dy)
    if keep == 0:
        return np.einsum("ajbj->ab", t)
    if keep == 1:
        return np.einsum("iaib->ab", t)
    raise ValueError(f"keep must be 0 or 1, got {keep!r}")


def partial_transpose(m, dims: tuple[int, int], on: int = 1) -> np.ndarray:
    """Transpose subsystem ``on`` (0 for X, 1 for Y) in the computational basis."""
    m = as_matrix(m)
    dx, dy = _check_bipartite(m, dims)
    t = m.reshape(dx, dy, dx, dy)
    if on == 0:
        t = t.transpose(2, 1, 0, 3)
    elif on == 1:
        t = t.transpose(0, 3, 2, 1)
    else:
        raise ValueError(f"on must be 0 or 1, got {on!r}")
    return t.reshape(dx * dy, dx * dy)


def eig_hermitian(h, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvector columns of a Hermitian matrix."""
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise DimensionError(f"eigendecomposition needs a square matrix, got {h.shape}")
    res = hermiticity_residual(h)
    if res > tol:
        raise NotHermitianError(f"hermiticity violated: max|H - H^dag| = {res:.3e}")
    return np.linalg.eigh(hermitian_part(h))


def min_eigenvalue(h) -> float:
    return float(eig_hermitian(h)[0][0])


def frobenius_inner(a, b) -> complex:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def frobenius_norm(m) -> float:
    return float(np.linalg.norm(np.asarray(m)))


def max_entangled(d: int) -> np.ndarray:
    """``Phi_+ = (1/d) sum_ij |ii><jj|`` on ``C^d (x) C^d``."""
    if d < 1:
        raise ValueError("dimension must be positive")
    v = np.eye(d, dtype=complex).reshape(d * d) / np.sqrt(d)
    return np.outer(v, v.conj())


def ket(index: int, d: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[index] = 1
    return v


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def is_density_matrix(rho, tol: float = PSD_TOL) -> bool:
    rho = np.asarray(rho)
    if not is_hermitian(rho, tol):
        return False
    return abs(np.trace(rho) - 1) <= TRACE_TOL and min_eigenvalue(rho) >= -tol


def check_density_matrix(rho, name: str = "state") -> np.ndarray:
    rho = as_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"{name}: density matrix must be square, got {rho.shape}")
    res = hermiticity_residual(rho)
    if res > HERMITIAN_TOL:
        raise ValueError(f"{name}: hermiticity violated, residual {res:.3e}")
    tr_res = abs(np.trace(rho) - 1)
    if tr_res > TRACE_TOL:
        raise ValueError(f"{name}: unit trace violated, |Tr - 1| = {tr_res:.3e}")
    lam = min_eigenvalue(rho)
    if lam < -PSD_TOL:
        raise ValueError(f"{name}: positivity violated, min eigenvalue {lam:.3e}")
    return rho


@lru_cache(maxsize=None)
def _hermitian_basis(d: int) -> tuple[np.ndarray, ...]:
    mats = [np.eye(d, dtype=complex) / np.sqrt(d)]
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = m[k, j] = 1 / np.sqrt(2)
        mats.append(m)
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = -1j / np.sqrt(2)
        m[k, j] = 1j / np.sqrt(2)
        mats.append(m)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1
        diag[l] = -l
        mats.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    for m in mats:
        m.setflags(write=False)
    return tuple(mats)


def hermitian_basis(d: int) -> tuple[np.ndarray, ...]:
    """Orthonormal Hermitian basis of ``d x d`` matrices: ``1/sqrt(d)`` followed by
    normalized generalized Gell-Mann matrices (symmetric, antisymmetric, diagonal).

    For ``d = 2`` this is ``(1, sigma_x, sigma_y, sigma_z) / sqrt(2)``.
    """
    return _hermitian_basis(int(d))


def basis_coefficients(m, d: int) -> np.ndarray:
    """Real coordinates of a Hermitian ``m`` in :func:`hermitian_basis`."""
    return np.array([np.real(np.vdot(g, m)) for g in hermitian_basis(d)])


def operator_schmidt(w, dims: tuple[int, int], tol: float = RANK_TOL) -> OperatorSchmidtDecomposition:
    """Operator-Schmidt decomposition of a Hermitian bipartite operator.

    The operator is expanded in product Hermitian bases, giving a real
    coefficient matrix whose SVD yields Hermitian factors directly.
    """
    w = as_matrix(w)
    dx, dy = _check_bipartite(w, dims)
    res = hermiticity_residual(w)
    if res > HERMITIAN_TOL:
        raise NotHermitianError(f"hermiticity violated: max|W - W^dag| = {res:.3e}")
    gx, gy = hermitian_basis(dx), hermitian_basis(dy)
    # C[k, l] = Tr[(G_k (x) H_l) W], real for Hermitian W
    t = w.reshape(dx, dy, dx, dy)
    bx = np.stack(gx)
    by = np.stack(gy)
    coeffs = np.real(np.einsum("kca,ldb,abcd->kl", bx, by, t))
    u, s, vt = np.linalg.svd(coeffs)
    keep = s > tol
    left = tuple(np.tensordot(u[:, i], bx, axes=1) for i in np.flatnonzero(keep))
    right = tuple(np.tensordot(vt[i], by, axes=1) for i in np.flatnonzero(keep))
    return OperatorSchmidtDecomposition(s[keep].copy(), left, right)

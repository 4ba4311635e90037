"""Entanglement-breaking tests on Choi operators, witnesses, and witness decompositions.

A decomposition stores product states ``xi_x``, ``psi_y`` and coefficients
``omega[x, y]`` such that::

    W = sum_xy omega[x, y] * kron(xi_x.T, psi_y.T)

which is the form a payoff table is read from.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .channels import ChoiOperator
from .linalg import (
    HERMITIAN_TOL,
    RECONSTRUCTION_TOL,
    DimensionError,
    NotHermitianError,
    as_matrix,
    basis_coefficients,
    check_density_matrix,
    eig_hermitian,
    hermitian_basis,
    hermiticity_residual,
    operator_schmidt,
    partial_transpose,
)

NPT_TOL = 1e-9
ZERO_COEFFICIENT_TOL = 1e-10
FRAME_RANK_TOL = 1e-10


class Verdict(str, enum.Enum):
    QUANTUM_DOMAIN_CERTIFIED = "QuantumDomainCertified"
    EB_COMPATIBLE = "EBCompatible"


class WitnessError(ValueError):
    pass


class IncompleteFrameError(ValueError):
    """Input states do not span the Hermitian operators on their space."""


@dataclass(frozen=True)
class PptReport:
    min_eigenvalue: float
    negative_eigenvector: Optional[np.ndarray]
    verdict: Verdict
    dims: tuple[int, int]

    @property
    def separability_certified(self) -> bool:
        """PPT implies separability only when ``dA * dB <= 6``."""
        return self.verdict is Verdict.EB_COMPATIBLE and self.dims[0] * self.dims[1] <= 6


@dataclass(frozen=True)
class Witness:
    matrix: np.ndarray
    dims: tuple[int, int]

    def __post_init__(self):
        m = as_matrix(self.matrix)
        dx, dy = self.dims
        if m.shape != (dx * dy, dx * dy):
            raise DimensionError(f"witness of shape {m.shape} does not act on {dx}x{dy}")
        res = hermiticity_residual(m)
        if res > HERMITIAN_TOL:
            raise NotHermitianError(f"witness hermiticity violated: max|W - W^dag| = {res:.3e}")
        object.__setattr__(self, "matrix", (m + m.conj().T) / 2)
        object.__setattr__(self, "dims", (int(dx), int(dy)))

    def value(self, rho) -> float:
        return float(np.real(np.trace(self.matrix @ as_matrix(rho))))


@dataclass(frozen=True)
class SparseDecomposition:
    states_x: tuple[np.ndarray, ...]
    states_y: tuple[np.ndarray, ...]
    omega: Mapping[tuple[int, int], float]

    def __post_init__(self):
        object.__setattr__(self, "states_x", tuple(as_matrix(s) for s in self.states_x))
        object.__setattr__(self, "states_y", tuple(as_matrix(s) for s in self.states_y))
        omega = {}
        for (x, y), v in sorted(self.omega.items()):
            if not (0 <= x < len(self.states_x) and 0 <= y < len(self.states_y)):
                raise IndexError(f"coefficient index {(x, y)} out of range")
            omega[(int(x), int(y))] = float(v)
        object.__setattr__(self, "omega", omega)

    @property
    def dims(self) -> tuple[int, int]:
        return (self.states_x[0].shape[0], self.states_y[0].shape[0])

    @property
    def nonzero_count(self) -> int:
        return sum(abs(v) > ZERO_COEFFICIENT_TOL for v in self.omega.values())

    def dense(self) -> np.ndarray:
        out = np.zeros((len(self.states_x), len(self.states_y)))
        for (x, y), v in self.omega.items():
            out[x, y] = v
        return out

    def reconstruct(self) -> np.ndarray:
        dx, dy = self.dims
        w = np.zeros((dx * dy, dx * dy), dtype=complex)
        for (x, y), v in self.omega.items():
            w += v * np.kron(self.states_x[x].T, self.states_y[y].T)
        return w

    def residual(self, witness) -> float:
        w = witness.matrix if isinstance(witness, Witness) else as_matrix(witness)
        return float(np.linalg.norm(self.reconstruct() - w))


def ppt_check(choi: ChoiOperator, tol: float = NPT_TOL) -> PptReport:
    vals, vecs = eig_hermitian(partial_transpose(choi.matrix, choi.dims, on=1))
    lam = float(vals[0])
    if lam < -tol:
        return PptReport(lam, vecs[:, 0].copy(), Verdict.QUANTUM_DOMAIN_CERTIFIED, choi.dims)
    return PptReport(lam, None, Verdict.EB_COMPATIBLE, choi.dims)


def build_witness(choi: ChoiOperator, tol: float = NPT_TOL) -> Witness:
    """``W = -(|v><v|)^{T_B}`` for the most negative eigenvector ``v`` of ``J^{T_B}``.

    ``Tr[W J] = -lambda_min > 0`` while ``Tr[W rho] = -<v|rho^{T_B}|v> <= 0``
    on separable ``rho``.
    """
    report = ppt_check(choi, tol)
    if report.negative_eigenvector is None:
        raise WitnessError(
            f"Choi operator has positive partial transpose (min eigenvalue {report.min_eigenvalue:.3e}); "
            "no partial-transpose witness exists"
        )
    v = report.negative_eigenvector
    return Witness(-partial_transpose(np.outer(v, v.conj()), choi.dims, on=1), choi.dims)


def frame_matrix(states: Sequence[np.ndarray], side: str) -> np.ndarray:
    """Columns are the Hermitian-basis coordinates of ``state.T``."""
    d = states[0].shape[0]
    f = np.column_stack([basis_coefficients(s.T, d) for s in states])
    rank = np.linalg.matrix_rank(f, tol=FRAME_RANK_TOL)
    if rank < d * d:
        raise IncompleteFrameError(
            f"{side} input family is not tomographically complete: frame rank {rank} < {d * d}"
        )
    return f


def product_coefficients(m: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    """``C[k, l] = Tr[(G_k (x) H_l) m]`` in the product Hermitian basis."""
    dx, dy = dims
    bx, by = np.stack(hermitian_basis(dx)), np.stack(hermitian_basis(dy))
    t = as_matrix(m).reshape(dx, dy, dx, dy)
    return np.real(np.einsum("kca,ldb,abcd->kl", bx, by, t))


def tomographic_decompose(witness: Witness, states_x: Sequence, states_y: Sequence) -> SparseDecomposition:
    """Expand a witness over all products of two tomographically complete families.

    Solves ``F_X omega F_Y^T = C_W`` with pseudo-inverses of the frame
    matrices, which is exact whenever both frames have full rank.
    """
    xs = [check_density_matrix(s, f"xi_{i}") for i, s in enumerate(states_x)]
    ys = [check_density_matrix(s, f"psi_{i}") for i, s in enumerate(states_y)]
    dx, dy = witness.dims
    if xs[0].shape[0] != dx or ys[0].shape[0] != dy:
        raise DimensionError(f"input families of dims {(xs[0].shape[0], ys[0].shape[0])} vs witness {witness.dims}")
    fx, fy = frame_matrix(xs, "first"), frame_matrix(ys, "second")
    c = product_coefficients(witness.matrix, witness.dims)
    omega = np.linalg.pinv(fx) @ c @ np.linalg.pinv(fy).T
    dec = SparseDecomposition(
        tuple(xs), tuple(ys), {(x, y): omega[x, y] for x in range(len(xs)) for y in range(len(ys))}
    )
    res = dec.residual(witness)
    if res > RECONSTRUCTION_TOL:
        raise ArithmeticError(f"tomographic decomposition residual {res:.3e} exceeds {RECONSTRUCTION_TOL:g}")
    return dec


def _canonical_sign(factor: np.ndarray) -> float:
    """+1 or -1 so that the factor's largest basis coordinate (first among near-ties) is positive."""
    c = basis_coefficients(factor, factor.shape[0])
    mags = np.abs(c)
    idx = int(np.flatnonzero(mags >= mags.max() - 1e-9)[0])
    return 1.0 if c[idx] > 0 else -1.0


def _split_psd(op: np.ndarray) -> tuple[float, np.ndarray, float]:
    """Write ``op = sign * P + shift * 1`` with ``P >= 0`` singular and ``|shift|`` minimal.

    Ties between the two signs resolve to ``sign = +1``.
    """
    vals = eig_hermitian(op)[0]
    lo, hi = float(vals[0]), float(vals[-1])
    eye = np.eye(op.shape[0])
    if abs(lo) <= abs(hi) + 1e-12:
        return 1.0, op - lo * eye, lo
    return -1.0, hi * eye - op, hi


def sparse_decompose(witness: Witness) -> SparseDecomposition:
    """Product-state decomposition of a witness with at most ``d^2 + 3`` nonzero terms.

    Works on ``W^T``. The scalar and local parts of ``W^T`` are split off,
    and the remaining correlated part is operator-Schmidt decomposed into at
    most ``d^2 - 1`` traceless product terms. Each factor is shifted by a
    multiple of the identity to a positive semidefinite operator; the shift
    side effects collect into one aggregate operator per subsystem, which is
    shifted in turn. Index 0 holds the maximally mixed state, indices
    ``1..n`` the Schmidt terms, and the last index the aggregate.
    """
    dx, dy = witness.dims
    wt = witness.matrix.T
    c = product_coefficients(wt, (dx, dy))
    gx, gy = hermitian_basis(dx), hermitian_basis(dy)
    scalar = c[0, 0] / np.sqrt(dx * dy)
    local_x = sum(c[k, 0] * gx[k] for k in range(1, dx * dx)) / np.sqrt(dy) if dx > 1 else np.zeros((1, 1))
    local_y = sum(c[0, l] * gy[l] for l in range(1, dy * dy)) / np.sqrt(dx) if dy > 1 else np.zeros((1, 1))
    correlated = wt - scalar * np.eye(dx * dy) - np.kron(local_x, np.eye(dy)) - np.kron(np.eye(dx), local_y)
    schmidt = operator_schmidt(correlated, (dx, dy))

    # unnormalized PSD operators with their coefficient tables
    xs: list[np.ndarray] = [np.eye(dx, dtype=complex)]
    ys: list[np.ndarray] = [np.eye(dy, dtype=complex)]
    coeff: dict[tuple[int, int], float] = {}
    agg_x = np.array(local_x, dtype=complex)
    agg_y = np.array(local_y, dtype=complex)
    mu = scalar
    for g, a, b in zip(schmidt.coefficients, schmidt.left, schmidt.right):
        sa, sb = _canonical_sign(a), _canonical_sign(b)
        g, a, b = g * sa * sb, a * sa, b * sb
        s_a, p, alpha = _split_psd(a)
        s_b, q, beta = _split_psd(b)
        # g (s_a P + alpha)(s_b Q + beta)
        i = len(xs)
        xs.append(p)
        ys.append(q)
        coeff[(i, i)] = g * s_a * s_b
        agg_x = agg_x + g * s_a * beta * p
        agg_y = agg_y + g * s_b * alpha * q
        mu += g * alpha * beta

    if dx > 1 and np.linalg.norm(agg_x) > ZERO_COEFFICIENT_TOL:
        s, p, shift = _split_psd(agg_x)
        if np.linalg.norm(p) > ZERO_COEFFICIENT_TOL:
            xs.append(p)
            coeff[(len(xs) - 1, 0)] = s
        mu += shift
    elif dx == 1:
        mu += float(np.real(agg_x[0, 0]))
    if dy > 1 and np.linalg.norm(agg_y) > ZERO_COEFFICIENT_TOL:
        s, q, shift = _split_psd(agg_y)
        if np.linalg.norm(q) > ZERO_COEFFICIENT_TOL:
            ys.append(q)
            coeff[(0, len(ys) - 1)] = s
        mu += shift
    elif dy == 1:
        mu += float(np.real(agg_y[0, 0]))
    coeff[(0, 0)] = mu

    tx = [float(np.real(np.trace(m))) for m in xs]
    ty = [float(np.real(np.trace(m))) for m in ys]
    omega = {
        (x, y): v * tx[x] * ty[y] for (x, y), v in coeff.items() if abs(v * tx[x] * ty[y]) > ZERO_COEFFICIENT_TOL
    }
    used_x = sorted({x for x, _ in omega}) or [0]
    used_y = sorted({y for _, y in omega}) or [0]
    remap_x = {old: new for new, old in enumerate(used_x)}
    remap_y = {old: new for new, old in enumerate(used_y)}
    return SparseDecomposition(
        tuple(xs[i] / tx[i] for i in used_x),
        tuple(ys[i] / ty[i] for i in used_y),
        {(remap_x[x], remap_y[y]): v for (x, y), v in omega.items()},
    )

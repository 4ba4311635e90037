"""Quantum channels in Kraus and Choi form, and classically correlated supermaps.

Choi operators follow the normalized-state convention
``J_N = (1 (x) N)(Phi_+)``, a unit-trace operator on ``H_A (x) H_B``. The
factor ``dA`` relating Choi operators to channel action lives in
:func:`duality_pairing`.

Shared randomness in measure-and-prepare channels and supermaps is never
carried as a separate index. A mixture ``sum_mu pi(mu) ...`` is expressed by
flattening ``(i, mu)`` into a single branch label and scaling the instrument
branches by ``pi(mu)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import (
    PSD_TOL,
    RANK_TOL,
    DimensionError,
    as_matrix,
    check_density_matrix,
    dagger,
    eig_hermitian,
    hermiticity_residual,
    ket,
    max_entangled,
    partial_trace,
)

TP_TOL = 1e-9
MAX_BRANCHES = 64


class ChannelError(ValueError):
    """A channel, instrument or POVM violates one of its defining invariants."""


def _tp_residual(kraus: Sequence[np.ndarray], d_in: int) -> float:
    s = sum(dagger(k) @ k for k in kraus)
    return float(np.max(np.abs(s - np.eye(d_in))))


@dataclass(frozen=True)
class QuantumChannel:
    """CPTP map from ``dA``- to ``dB``-dimensional states, stored as Kraus operators."""

    kraus: tuple[np.ndarray, ...]
    dA: int = field(init=False)
    dB: int = field(init=False)

    def __post_init__(self):
        ks = tuple(as_matrix(k) for k in self.kraus)
        if not ks:
            raise ChannelError("a channel needs at least one Kraus operator")
        shapes = {k.shape for k in ks}
        if len(shapes) != 1:
            raise DimensionError(f"Kraus operators have inconsistent shapes {sorted(shapes)}")
        d_out, d_in = ks[0].shape
        res = _tp_residual(ks, d_in)
        if res > TP_TOL:
            raise ChannelError(
                f"trace preservation violated: max|sum K^dag K - 1| = {res:.3e} (tolerance {TP_TOL:g})"
            )
        object.__setattr__(self, "kraus", ks)
        object.__setattr__(self, "dA", d_in)
        object.__setattr__(self, "dB", d_out)

    def __call__(self, rho) -> np.ndarray:
        return apply_map(self.kraus, rho)

    def adjoint(self, op) -> np.ndarray:
        """Heisenberg-picture action ``sum_k K^dag op K``."""
        op = as_matrix(op)
        return sum(dagger(k) @ op @ k for k in self.kraus)

    def choi(self) -> "ChoiOperator":
        return kraus_to_choi(self)


@dataclass(frozen=True)
class ChoiOperator:
    """Normalized Choi state on ``H_A (x) H_B``; ``Tr_B J = 1/dA``."""

    matrix: np.ndarray
    dA: int
    dB: int

    def __post_init__(self):
        m = as_matrix(self.matrix)
        n = self.dA * self.dB
        if m.shape != (n, n):
            raise DimensionError(f"Choi matrix of shape {m.shape} does not act on {self.dA}x{self.dB}")
        res = hermiticity_residual(m)
        if res > PSD_TOL:
            raise ChannelError(f"Choi hermiticity violated: max|J - J^dag| = {res:.3e}")
        object.__setattr__(self, "matrix", (m + dagger(m)) / 2)

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dA, self.dB)

    def validate(self) -> "ChoiOperator":
        lam = float(eig_hermitian(self.matrix)[0][0])
        if lam < -PSD_TOL:
            raise ChannelError(f"Choi positivity violated: min eigenvalue {lam:.3e}")
        marg = partial_trace(self.matrix, self.dims, keep=0)
        res = float(np.max(np.abs(marg - np.eye(self.dA) / self.dA)))
        if res > TP_TOL:
            raise ChannelError(f"trace preservation violated: max|Tr_B J - 1/dA| = {res:.3e}")
        return self


@dataclass(frozen=True)
class POVM:
    elements: tuple[np.ndarray, ...]

    def __post_init__(self):
        els = tuple(as_matrix(e) for e in self.elements)
        if not els:
            raise ChannelError("a POVM needs at least one element")
        d = els[0].shape[0]
        for i, e in enumerate(els):
            if e.shape != (d, d):
                raise DimensionError(f"POVM element {i} has shape {e.shape}, expected {(d, d)}")
            lam = float(eig_hermitian(e, tol=PSD_TOL)[0][0])
            if lam < -PSD_TOL:
                raise ChannelError(f"POVM element {i} positivity violated: min eigenvalue {lam:.3e}")
        res = float(np.max(np.abs(sum(els) - np.eye(d))))
        if res > TP_TOL:
            raise ChannelError(f"POVM completeness violated: max|sum E - 1| = {res:.3e}")
        object.__setattr__(self, "elements", els)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)

    def __getitem__(self, i) -> np.ndarray:
        return self.elements[i]


@dataclass(frozen=True)
class Instrument:
    """Branches of CP maps (each a Kraus list) whose sum is trace preserving."""

    branches: tuple[tuple[np.ndarray, ...], ...]

    def __post_init__(self):
        brs = tuple(tuple(as_matrix(k) for k in b) for b in self.branches)
        if not brs or any(not b for b in brs):
            raise ChannelError("an instrument needs at least one nonempty branch")
        if len(brs) > MAX_BRANCHES:
            raise ChannelError(f"instrument has {len(brs)} branches, limit is {MAX_BRANCHES}")
        shapes = {k.shape for b in brs for k in b}
        if len(shapes) != 1:
            raise DimensionError(f"instrument Kraus operators have inconsistent shapes {sorted(shapes)}")
        d_in = next(iter(shapes))[1]
        res = _tp_residual([k for b in brs for k in b], d_in)
        if res > TP_TOL:
            raise ChannelError(f"instrument trace preservation violated: max|sum K^dag K - 1| = {res:.3e}")
        object.__setattr__(self, "branches", brs)

    @property
    def d_in(self) -> int:
        return self.branches[0][0].shape[1]

    @property
    def d_out(self) -> int:
        return self.branches[0][0].shape[0]

    def __len__(self) -> int:
        return len(self.branches)

    def apply(self, i: int, rho) -> np.ndarray:
        return apply_map(self.branches[i], rho)

    @classmethod
    def trivial(cls, d: int) -> "Instrument":
        return cls(((np.eye(d, dtype=complex),),))


@dataclass(frozen=True)
class Supermap:
    """Pre-processing instrument ``A' -> A`` plus one decoder ``B -> B'`` per branch."""

    instrument: Instrument
    decoders: tuple[QuantumChannel, ...]

    def __post_init__(self):
        decs = tuple(self.decoders)
        if len(decs) != len(self.instrument):
            raise ChannelError(
                f"supermap has {len(self.instrument)} instrument branches but {len(decs)} decoders"
            )
        if len({(d.dA, d.dB) for d in decs}) != 1:
            raise DimensionError("decoders must share input and output dimensions")
        object.__setattr__(self, "decoders", decs)

    def __call__(self, channel: QuantumChannel) -> QuantumChannel:
        return apply_supermap(self, channel)


def apply_map(kraus: Sequence[np.ndarray], rho) -> np.ndarray:
    rho = as_matrix(rho)
    d_in = kraus[0].shape[1]
    if rho.shape != (d_in, d_in):
        raise DimensionError(f"state of shape {rho.shape} does not match map input dimension {d_in}")
    return sum(k @ rho @ dagger(k) for k in kraus)


def apply_channel(channel: QuantumChannel, rho) -> np.ndarray:
    return channel(rho)


def identity_channel(d: int) -> QuantumChannel:
    return QuantumChannel((np.eye(d, dtype=complex),))


def kraus_to_choi(channel: QuantumChannel) -> ChoiOperator:
    d = channel.dA
    phi = max_entangled(d)
    ops = [np.kron(np.eye(d), k) for k in channel.kraus]
    j = sum(op @ phi @ dagger(op) for op in ops)
    return ChoiOperator(j, channel.dA, channel.dB)


def choi_to_kraus(choi: ChoiOperator, tol: float = RANK_TOL) -> QuantumChannel:
    """Kraus operators from the eigendecomposition of a Choi operator.

    With ``J = sum_k lam_k |v_k><v_k|``, each eigenvector reshaped to
    ``dA x dB`` gives ``K_k = sqrt(dA lam_k) reshape(v_k)^T``.
    """
    choi.validate()
    vals, vecs = eig_hermitian(choi.matrix)
    dA, dB = choi.dims
    kraus = []
    for lam, v in zip(vals[::-1], vecs.T[::-1]):
        if lam <= tol:
            continue
        kraus.append(np.sqrt(dA * lam) * v.reshape(dA, dB).T)
    return QuantumChannel(tuple(kraus))


def duality_pairing(choi: ChoiOperator, a, b) -> float:
    """``dA * Tr[J (A^T (x) B)]``, which equals ``Tr[N(A) B]``."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != (choi.dA, choi.dA) or b.shape != (choi.dB, choi.dB):
        raise DimensionError(f"operators {a.shape}, {b.shape} do not match Choi dims {choi.dims}")
    return float(np.real(choi.dA * np.trace(choi.matrix @ np.kron(a.T, b))))


def depolarizing_channel(nu: float, d: int = 2) -> QuantumChannel:
    """``N(rho) = nu rho + (1 - nu) 1/d``; qubit by default."""
    if not 0 <= nu <= 1:
        raise ValueError(f"depolarizing parameter must lie in [0, 1], got {nu}")
    # Weyl-operator Kraus form: uniform twirl weight (1 - nu)/d^2 on every
    # unitary, plus the extra nu on the identity
    kraus = []
    for a in range(d):
        for b in range(d):
            w = (1 - nu) / d**2 + (nu if a == b == 0 else 0)
            if w > 0:
                kraus.append(np.sqrt(w) * weyl(a, b, d))
    return QuantumChannel(tuple(kraus))


def erasure_channel(eta: float, d: int) -> QuantumChannel:
    """``E(rho) = eta rho + (1 - eta) |e><e|`` with the flag ``|e>`` at index ``d`` of a
    ``d + 1``-dimensional output."""
    if not 0 <= eta <= 1:
        raise ValueError(f"erasure transmission must lie in [0, 1], got {eta}")
    embed = np.zeros((d + 1, d), dtype=complex)
    embed[:d, :d] = np.eye(d)
    kraus = []
    if eta > 0:
        kraus.append(np.sqrt(eta) * embed)
    if eta < 1:
        for j in range(d):
            k = np.zeros((d + 1, d), dtype=complex)
            k[d, j] = np.sqrt(1 - eta)
            kraus.append(k)
    return QuantumChannel(tuple(kraus))


def erasure_flag(d: int) -> np.ndarray:
    """Projector on the erasure flag in the ``d + 1``-dimensional output."""
    return np.outer(ket(d, d + 1), ket(d, d + 1))


def measure_and_prepare(povm: POVM, preparations: Sequence) -> QuantumChannel:
    """``N(rho) = sum_i prep_i Tr[Pi_i rho]``."""
    preps = [check_density_matrix(p, f"preparation {i}") for i, p in enumerate(preparations)]
    if len(preps) != len(povm):
        raise ChannelError(f"{len(povm)} POVM elements but {len(preps)} preparations")
    if len({p.shape for p in preps}) != 1:
        raise DimensionError("preparations must share one dimension")
    kraus = []
    for pi, prep in zip(povm.elements, preps):
        # one Kraus operator |w><u| per pair of eigenvectors of Pi_i and prep_i
        pv, pvec = eig_hermitian(pi)
        sv, svec = eig_hermitian(prep)
        for lp, u in zip(pv, pvec.T):
            if lp <= RANK_TOL:
                continue
            for ls, w in zip(sv, svec.T):
                if ls <= RANK_TOL:
                    continue
                kraus.append(np.sqrt(lp * ls) * np.outer(w, u.conj()))
    return QuantumChannel(tuple(kraus))


def compose(second: QuantumChannel, first: QuantumChannel) -> QuantumChannel:
    """``second o first``."""
    if first.dB != second.dA:
        raise DimensionError(f"cannot compose: first outputs dimension {first.dB}, second expects {second.dA}")
    return QuantumChannel(tuple(k2 @ k1 for k2 in second.kraus for k1 in first.kraus))


def apply_supermap(supermap: Supermap, channel: QuantumChannel) -> QuantumChannel:
    """``N' = sum_i D_i o N o I_i``."""
    inst = supermap.instrument
    if inst.d_out != channel.dA:
        raise DimensionError(f"instrument outputs dimension {inst.d_out}, channel expects {channel.dA}")
    if supermap.decoders[0].dA != channel.dB:
        raise DimensionError(
            f"decoders expect dimension {supermap.decoders[0].dA}, channel outputs {channel.dB}"
        )
    kraus = tuple(
        kd @ kn @ ki
        for branch, dec in zip(inst.branches, supermap.decoders)
        for ki in branch
        for kn in channel.kraus
        for kd in dec.kraus
    )
    return QuantumChannel(kraus)


def weyl(a: int, b: int, d: int) -> np.ndarray:
    """Weyl operator ``X^a Z^b`` with shift ``X|j> = |j+1>`` and clock ``Z|j> = w^j |j>``."""
    shift = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)


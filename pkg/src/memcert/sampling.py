"""Seeded random states, channels, measurements and supermaps for property checks."""
from __future__ import annotations

import numpy as np

from .channels import POVM, Instrument, QuantumChannel, Supermap, measure_and_prepare


def rng_from(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def ginibre(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def random_isometry(d_in: int, d_out: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random ``d_out x d_in`` isometry (``V^dag V = 1``)."""
    if d_out < d_in:
        raise ValueError(f"no isometry from dimension {d_in} into {d_out}")
    q, r = np.linalg.qr(ginibre(d_out, d_in, rng))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    return random_isometry(d, d, rng)


def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    v = ginibre(d, 1, rng)[:, 0]
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


def random_density_matrix(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    g = ginibre(d, rank or d, rng)
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = ginibre(d, d, rng)
    return (g + g.conj().T) / 2


def random_separable_state(dx: int, dy: int, rng: np.random.Generator, terms: int = 4) -> np.ndarray:
    weights = rng.dirichlet(np.ones(terms))
    return sum(
        w * np.kron(random_density_matrix(dx, rng), random_density_matrix(dy, rng)) for w in weights
    )


def random_povm(d: int, outcomes: int, rng: np.random.Generator) -> POVM:
    v = random_isometry(d, d * outcomes, rng).reshape(outcomes, d, d)
    return POVM(tuple(blk.conj().T @ blk for blk in v))


def random_channel(d_in: int, d_out: int, rng: np.random.Generator, n_kraus: int | None = None) -> QuantumChannel:
    n = n_kraus or d_in * d_out
    v = random_isometry(d_in, d_out * n, rng).reshape(n, d_out, d_in)
    return QuantumChannel(tuple(v))


def random_instrument(
    d_in: int, d_out: int, branches: int, rng: np.random.Generator, kraus_per_branch: int = 2
) -> Instrument:
    v = random_isometry(d_in, d_out * branches * kraus_per_branch, rng)
    v = v.reshape(branches, kraus_per_branch, d_out, d_in)
    return Instrument(tuple(tuple(b) for b in v))


def random_eb_channel(d_in: int, d_out: int, rng: np.random.Generator, outcomes: int | None = None) -> QuantumChannel:
    n = outcomes or d_in * d_in
    povm = random_povm(d_in, n, rng)
    preps = [random_density_matrix(d_out, rng) for _ in range(n)]
    return measure_and_prepare(povm, preps)


def random_supermap(
    d_in: int, d_channel_in: int, d_channel_out: int, d_out: int, branches: int, rng: np.random.Generator
) -> Supermap:
    inst = random_instrument(d_in, d_channel_in, branches, rng)
    decoders = tuple(random_channel(d_channel_out, d_out, rng, n_kraus=2) for _ in range(branches))
    return Supermap(inst, decoders)

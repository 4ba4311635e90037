import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from memcert.certification import (
    IncompleteFrameError,
    Verdict,
    Witness,
    WitnessError,
    build_witness,
    frame_matrix,
    ppt_check,
    sparse_decompose,
    tomographic_decompose,
)
from memcert.channels import depolarizing_channel, identity_channel, kraus_to_choi
from memcert.games import input_family, standard_states, tetrahedral_states
from memcert.linalg import NotHermitianError, is_density_matrix, max_entangled
from memcert.sampling import random_channel, random_eb_channel, random_hermitian, random_separable_state
from oracles import reconstruct_by_sum

seeds = st.integers(0, 2**32 - 1)
pairs = st.sampled_from([(2, 2), (2, 3), (3, 2), (3, 3)])
PHI_WITNESS = Witness(max_entangled(2) - np.eye(4) / 2, (2, 2))


def test_ppt_check_identity():
    report = ppt_check(kraus_to_choi(identity_channel(2)))
    assert report.verdict is Verdict.QUANTUM_DOMAIN_CERTIFIED
    assert np.isclose(report.min_eigenvalue, -0.5)
    assert not report.separability_certified


def test_ppt_check_eb_channel():
    report = ppt_check(kraus_to_choi(depolarizing_channel(0.2)))
    assert report.verdict is Verdict.EB_COMPATIBLE
    assert report.negative_eigenvector is None
    assert report.separability_certified


def test_ppt_caveat_for_large_dimensions():
    rng = np.random.default_rng(0)
    report = ppt_check(kraus_to_choi(random_eb_channel(3, 3, rng)))
    assert report.verdict is Verdict.EB_COMPATIBLE
    assert not report.separability_certified


def test_witness_of_depolarizing_channel():
    choi = kraus_to_choi(depolarizing_channel(0.8))
    w = build_witness(choi)
    assert np.isclose(w.value(choi.matrix), 0.35)


def test_no_witness_for_ppt_choi():
    with pytest.raises(WitnessError, match="positive partial transpose"):
        build_witness(kraus_to_choi(depolarizing_channel(0.1)))


@settings(max_examples=25, deadline=None)
@given(pairs, seeds)
def test_witness_separates(dims, seed):
    rng = np.random.default_rng(seed)
    dA, dB = dims
    choi = kraus_to_choi(random_channel(dA, dB, rng, n_kraus=-(-dA // dB)))
    report = ppt_check(choi)
    assume(report.verdict is Verdict.QUANTUM_DOMAIN_CERTIFIED)
    w = build_witness(choi)
    assert np.isclose(w.value(choi.matrix), -report.min_eigenvalue)
    for _ in range(5):
        assert w.value(random_separable_state(dA, dB, rng)) <= 1e-12


def test_witness_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        Witness(np.triu(np.ones((4, 4))), (2, 2))


def test_frame_rejects_incomplete_family():
    with pytest.raises(IncompleteFrameError, match="rank 3 < 4"):
        frame_matrix(tetrahedral_states()[:3], "first")


def test_input_families_are_states():
    for d in (2, 3, 4):
        family = standard_states(d)
        assert len(family) == d * d
        assert all(is_density_matrix(s) for s in family)
    assert all(is_density_matrix(s) for s in tetrahedral_states())
    assert len(input_family(2, "tetrahedral")) == 4


def test_tomographic_decomposition_of_phi_witness():
    t = tetrahedral_states()
    dec = tomographic_decompose(PHI_WITNESS, t, t)
    x, y = np.indices((4, 4))
    expected = np.where((x - y) % 4 == 2, -5 / 8, 1 / 8)
    assert np.allclose(dec.dense(), expected)
    assert dec.nonzero_count == 16
    assert dec.residual(PHI_WITNESS) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(pairs, seeds)
def test_tomographic_decomposition_reconstructs(dims, seed):
    dx, dy = dims
    w = Witness(random_hermitian(dx * dy, np.random.default_rng(seed)), dims)
    dec = tomographic_decompose(w, standard_states(dx), standard_states(dy))
    assert np.allclose(reconstruct_by_sum(dec.omega, dec.states_x, dec.states_y), w.matrix, atol=1e-9)


def test_sparse_decomposition_of_phi_witness():
    dec = sparse_decompose(PHI_WITNESS)
    assert dec.nonzero_count == 6
    assert np.allclose(dec.states_x[0], np.eye(2) / 2)
    assert dec.residual(PHI_WITNESS) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(pairs, seeds)
def test_sparse_decomposition_properties(dims, seed):
    dx, dy = dims
    w = Witness(random_hermitian(dx * dy, np.random.default_rng(seed)), dims)
    dec = sparse_decompose(w)
    assert dec.nonzero_count <= min(dx, dy) ** 2 + 3
    assert np.allclose(reconstruct_by_sum(dec.omega, dec.states_x, dec.states_y), w.matrix, atol=1e-9)
    assert all(is_density_matrix(s) for s in dec.states_x + dec.states_y)


def test_sparse_decomposition_of_product_and_scalar():
    dec = sparse_decompose(Witness(np.eye(4), (2, 2)))
    assert dec.nonzero_count == 1
    assert np.isclose(dec.omega[(0, 0)], 4)


@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 3)])
def test_witness_nonpositive_on_many_separable_states(dims):
    rng = np.random.default_rng(sum(dims))
    dA, dB = dims
    w = build_witness(kraus_to_choi(random_channel(dA, dB, rng, n_kraus=1)))
    values = [w.value(random_separable_state(dA, dB, rng, terms=3)) for _ in range(1000)]
    assert max(values) <= 1e-9

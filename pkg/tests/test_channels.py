import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memcert.channels import (
    MAX_BRANCHES,
    POVM,
    ChannelError,
    ChoiOperator,
    Instrument,
    QuantumChannel,
    Supermap,
    choi_to_kraus,
    compose,
    depolarizing_channel,
    duality_pairing,
    erasure_channel,
    erasure_flag,
    identity_channel,
    kraus_to_choi,
    measure_and_prepare,
    weyl,
)
from memcert.linalg import PAULI_X, PAULI_Z, DimensionError, max_entangled, min_eigenvalue, partial_transpose
from memcert.sampling import (
    random_channel,
    random_density_matrix,
    random_eb_channel,
    random_hermitian,
    random_povm,
    random_supermap,
)
from oracles import choi_from_matrix_units

seeds = st.integers(0, 2**32 - 1)
small = st.integers(1, 3)


def test_identity_choi_is_phi_plus():
    for d in (2, 3):
        assert np.allclose(kraus_to_choi(identity_channel(d)).matrix, max_entangled(d))


@pytest.mark.parametrize("nu", [0.0, 0.3, 1 / 3, 0.8, 1.0])
def test_depolarizing_action_and_choi(nu):
    rng = np.random.default_rng(0)
    ch = depolarizing_channel(nu)
    rho = random_density_matrix(2, rng)
    assert np.allclose(ch(rho), nu * rho + (1 - nu) * np.eye(2) / 2)
    assert np.allclose(kraus_to_choi(ch).matrix, nu * max_entangled(2) + (1 - nu) * np.eye(4) / 4)


def test_qutrit_depolarizing():
    rng = np.random.default_rng(1)
    rho = random_density_matrix(3, rng)
    assert np.allclose(depolarizing_channel(0.4, 3)(rho), 0.4 * rho + 0.6 * np.eye(3) / 3)


def test_depolarizing_rejects_out_of_range():
    with pytest.raises(ValueError):
        depolarizing_channel(1.5)


def test_erasure_channel_output():
    rng = np.random.default_rng(2)
    rho = random_density_matrix(2, rng)
    out = erasure_channel(0.3, 2)(rho)
    assert out.shape == (3, 3)
    assert np.allclose(out[:2, :2], 0.3 * rho)
    assert np.isclose(np.trace(out @ erasure_flag(2)), 0.7)
    assert np.allclose(out[2, :2], 0)


@settings(max_examples=30, deadline=None)
@given(small, small, seeds)
def test_choi_matches_matrix_unit_definition(d_in, d_out, seed):
    ch = random_channel(d_in, d_out, np.random.default_rng(seed))
    choi = kraus_to_choi(ch)
    assert np.allclose(choi.matrix, choi_from_matrix_units(ch.kraus))
    choi.validate()
    assert np.isclose(np.trace(choi.matrix), 1)


@settings(max_examples=30, deadline=None)
@given(small, small, seeds)
def test_duality_pairing(d_in, d_out, seed):
    rng = np.random.default_rng(seed)
    ch = random_channel(d_in, d_out, rng)
    a, b = random_hermitian(d_in, rng), random_hermitian(d_out, rng)
    assert np.isclose(duality_pairing(kraus_to_choi(ch), a, b), np.real(np.trace(ch(a) @ b)))


@settings(max_examples=30, deadline=None)
@given(small, small, seeds)
def test_kraus_choi_round_trip(d_in, d_out, seed):
    ch = random_channel(d_in, d_out, np.random.default_rng(seed))
    choi = kraus_to_choi(ch)
    back = choi_to_kraus(choi)
    assert len(back.kraus) <= d_in * d_out
    assert np.linalg.norm(kraus_to_choi(back).matrix - choi.matrix) <= 1e-9


def test_adjoint_is_heisenberg_dual():
    rng = np.random.default_rng(3)
    ch = random_channel(2, 3, rng)
    rho, obs = random_density_matrix(2, rng), random_hermitian(3, rng)
    assert np.isclose(np.trace(ch(rho) @ obs), np.trace(rho @ ch.adjoint(obs)))


def test_channel_rejects_non_trace_preserving():
    with pytest.raises(ChannelError, match="trace preservation"):
        QuantumChannel((0.5 * np.eye(2),))


def test_channel_rejects_mixed_shapes():
    with pytest.raises(DimensionError):
        QuantumChannel((np.eye(2), np.zeros((3, 2))))


def test_choi_validate_reports_violation():
    with pytest.raises(ChannelError, match="positivity"):
        ChoiOperator(np.diag([0.75, -0.25, 0.25, 0.25]), 2, 2).validate()
    with pytest.raises(ChannelError, match="trace preservation"):
        ChoiOperator(np.diag([0.5, 0.5, 0, 0]), 2, 2).validate()


def test_povm_validation():
    POVM((np.diag([1, 0]), np.diag([0, 1])))
    with pytest.raises(ChannelError, match="completeness"):
        POVM((np.diag([1, 0]),))
    with pytest.raises(ChannelError, match="positivity"):
        POVM((np.eye(2) + PAULI_Z * 1.5, -PAULI_Z * 1.5))


def test_instrument_branch_cap():
    k = np.eye(2) / np.sqrt(MAX_BRANCHES + 1)
    with pytest.raises(ChannelError, match="limit"):
        Instrument(tuple((k,) for _ in range(MAX_BRANCHES + 1)))


def test_measure_and_prepare_action_and_ppt():
    rng = np.random.default_rng(4)
    povm = random_povm(2, 3, rng)
    preps = [random_density_matrix(3, rng) for _ in range(3)]
    ch = measure_and_prepare(povm, preps)
    rho = random_density_matrix(2, rng)
    expected = sum(p * np.trace(e @ rho) for e, p in zip(povm.elements, preps))
    assert np.allclose(ch(rho), expected)
    j = kraus_to_choi(ch)
    assert min_eigenvalue(partial_transpose(j.matrix, j.dims)) >= -1e-12


def test_compose():
    rng = np.random.default_rng(5)
    a, b = random_channel(2, 3, rng), random_channel(3, 2, rng)
    rho = random_density_matrix(2, rng)
    assert np.allclose(compose(b, a)(rho), b(a(rho)))
    with pytest.raises(DimensionError):
        compose(a, a)


def test_supermap_action():
    rng = np.random.default_rng(6)
    lam = random_supermap(2, 3, 2, 3, 2, rng)
    n = random_channel(3, 2, rng)
    rho = random_density_matrix(2, rng)
    expected = sum(dec(n(lam.instrument.apply(i, rho))) for i, dec in enumerate(lam.decoders))
    assert np.allclose(lam(n)(rho), expected)


def test_supermap_branch_decoder_mismatch():
    rng = np.random.default_rng(7)
    lam = random_supermap(2, 2, 2, 2, 2, rng)
    with pytest.raises(ChannelError):
        Supermap(lam.instrument, lam.decoders[:1])


def test_supermap_keeps_eb_channels_ppt():
    rng = np.random.default_rng(8)
    for _ in range(20):
        lam = random_supermap(2, 2, 3, 2, 3, rng)
        j = kraus_to_choi(lam(random_eb_channel(2, 3, rng)))
        assert min_eigenvalue(partial_transpose(j.matrix, j.dims)) >= -1e-10


def test_weyl_operators():
    assert np.allclose(weyl(1, 0, 2), PAULI_X)
    assert np.allclose(weyl(0, 1, 2), PAULI_Z)
    w = weyl(1, 2, 3)
    assert np.allclose(w @ w.conj().T, np.eye(3))

"""Semiquantum signaling scenarios, correlations, payoffs and the certification pipeline.

Correlation and payoff tensors are indexed ``[b, x, y]`` where ``b`` runs over
the scenario's outcome labels in order. Bell outcomes carry labels
``1..|B|`` with label 1 the projector on ``Phi_+``; label 0 is reserved for
the erasure outcome added by :func:`loss_extend`.

Expected payoffs are the bare sum ``sum_bxy payoff[b, x, y] * p[b, x, y]``,
without dividing by the number of question pairs.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .certification import (
    PptReport,
    SparseDecomposition,
    Verdict,
    Witness,
    frame_matrix,
    build_witness,
    ppt_check,
    sparse_decompose,
    tomographic_decompose,
)
from .channels import POVM, ChoiOperator, Instrument, QuantumChannel, Supermap, kraus_to_choi, weyl
from .linalg import (
    PAULI_I,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    RECONSTRUCTION_TOL,
    DimensionError,
    check_density_matrix,
    dagger,
    hermitian_basis,
    max_entangled,
    projector,
)

CERTIFICATION_MARGIN = 1e-9
NORMALIZATION_TOL = 1e-9
NEGATIVITY_TOL = 1e-12
ERASURE_LABEL = 0
PHI_PLUS_LABEL = 1


class Family(str, enum.Enum):
    STANDARD = "standard"
    TETRAHEDRAL = "tetrahedral"


class CertificationVerdict(str, enum.Enum):
    CERTIFIED = "Certified"
    NOT_CERTIFIED = "NotCertified"


def _states(states: Sequence, name: str) -> tuple[np.ndarray, ...]:
    out = tuple(check_density_matrix(s, f"{name}_{i}") for i, s in enumerate(states))
    if not out:
        raise ValueError(f"{name}: input family is empty")
    if len({s.shape for s in out}) != 1:
        raise DimensionError(f"{name}: input states have different dimensions")
    return out


@dataclass(frozen=True)
class Scenario:
    inputs_x: tuple[np.ndarray, ...]
    inputs_y: tuple[np.ndarray, ...]
    outcomes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "inputs_x", _states(self.inputs_x, "xi"))
        object.__setattr__(self, "inputs_y", _states(self.inputs_y, "psi"))
        labels = tuple(int(b) for b in self.outcomes)
        if not labels:
            raise ValueError("a scenario needs at least one outcome")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate outcome labels {labels}")
        object.__setattr__(self, "outcomes", labels)

    @classmethod
    def with_outcome_count(cls, inputs_x, inputs_y, outcome_count: int) -> "Scenario":
        return cls(tuple(inputs_x), tuple(inputs_y), tuple(range(1, outcome_count + 1)))

    @property
    def dim_x(self) -> int:
        return self.inputs_x[0].shape[0]

    @property
    def dim_y(self) -> int:
        return self.inputs_y[0].shape[0]

    @property
    def shape(self) -> tuple[int, int, int]:
        return (len(self.outcomes), len(self.inputs_x), len(self.inputs_y))

    def outcome_index(self, label: int) -> int:
        return self.outcomes.index(label)


@dataclass(frozen=True)
class SignatureScenario(Scenario):
    bell_measurement: POVM = field(default=None)

    def __post_init__(self):
        super().__post_init__()
        dx, dy = self.dim_x, self.dim_y
        if len(self.inputs_x) != dx * dx or len(self.inputs_y) != dy * dy:
            raise ValueError(f"signature scenario needs {dx * dx} and {dy * dy} inputs")
        if len(self.outcomes) != dy * dy:
            raise ValueError(f"signature scenario needs {dy * dy} outcomes, got {len(self.outcomes)}")
        frame_matrix(self.inputs_x, "first")
        frame_matrix(self.inputs_y, "second")
        if self.bell_measurement is None or self.bell_measurement.dim != dy * dy:
            raise ValueError("signature scenario needs a Bell measurement on the second system and channel output")
        first = self.bell_measurement.elements[0]
        if np.max(np.abs(first - max_entangled(dy))) > NORMALIZATION_TOL:
            raise ValueError("first Bell measurement element must be Phi_+")

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dim_x, self.dim_y)


@dataclass(frozen=True)
class Correlation:
    p: np.ndarray
    outcomes: tuple[int, ...]

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.ndim != 3 or p.shape[0] != len(self.outcomes):
            raise DimensionError(f"correlation tensor of shape {p.shape} vs {len(self.outcomes)} outcomes")
        low = float(p.min())
        if low < -NEGATIVITY_TOL:
            raise ValueError(f"correlation nonnegativity violated: min entry {low:.3e}")
        norm = float(np.max(np.abs(p.sum(axis=0) - 1)))
        if norm > NORMALIZATION_TOL:
            raise ValueError(f"correlation normalization violated: max|sum_b p - 1| = {norm:.3e}")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "outcomes", tuple(int(b) for b in self.outcomes))

    def __getitem__(self, label: int) -> np.ndarray:
        """Slice ``p(label | x, y)`` as an ``|X| x |Y|`` array."""
        return self.p[self.outcomes.index(label)]


@dataclass(frozen=True)
class Game:
    scenario: Scenario
    payoff: np.ndarray
    eb_threshold: float = 0.0

    def __post_init__(self):
        wp = np.array(self.payoff, dtype=float)
        if wp.shape != self.scenario.shape:
            raise DimensionError(f"payoff of shape {wp.shape} does not match scenario {self.scenario.shape}")
        if not np.all(np.isfinite(wp)):
            raise ValueError("payoff has non-finite entries")
        wp.setflags(write=False)
        object.__setattr__(self, "payoff", wp)

    @property
    def outcomes(self) -> tuple[int, ...]:
        return self.scenario.outcomes


# -- input families and measurements -----------------------------------------------------------


def tetrahedral_states() -> tuple[np.ndarray, ...]:
    """``U tau U^dag`` for ``U`` in ``(1, X, Y, Z)``, ``tau = 1/2 + (X + Y + Z)/sqrt(12)``."""
    tau = PAULI_I / 2 + (PAULI_X + PAULI_Y + PAULI_Z) / np.sqrt(12)
    return tuple(u @ tau @ dagger(u) for u in (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z))


def standard_states(d: int) -> tuple[np.ndarray, ...]:
    """``|j>``, then ``(|j> + |k>)/sqrt2`` and ``(|j> + i|k>)/sqrt2`` for ``j < k``."""
    eye = np.eye(d, dtype=complex)
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    kets = list(eye)
    kets += [(eye[j] + eye[k]) / np.sqrt(2) for j, k in pairs]
    kets += [(eye[j] + 1j * eye[k]) / np.sqrt(2) for j, k in pairs]
    return tuple(projector(v) for v in kets)


def input_family(d: int, family: Family | str = Family.STANDARD) -> tuple[np.ndarray, ...]:
    family = Family(family)
    if family is Family.TETRAHEDRAL:
        if d != 2:
            raise ValueError(f"the tetrahedral family exists only for qubits, not d={d}")
        return tetrahedral_states()
    return standard_states(d)


def bell_states(d: int) -> tuple[np.ndarray, ...]:
    """Generalized Bell vectors ``(X^a Z^b (x) 1)|Phi_+>`` in lexicographic ``(a, b)`` order."""
    phi = np.eye(d, dtype=complex).reshape(d * d) / np.sqrt(d)
    return tuple(np.kron(weyl(a, b, d), np.eye(d)) @ phi for a in range(d) for b in range(d))


def bell_povm(d: int) -> POVM:
    return POVM(tuple(projector(v) for v in bell_states(d)))


def signature_scenario(dA: int, dB: int, family: Family | str = Family.STANDARD) -> SignatureScenario:
    return SignatureScenario(
        input_family(dA, family),
        input_family(dB, family),
        tuple(range(1, dB * dB + 1)),
        bell_povm(dB),
    )


# -- correlations ---------------------------------------------------------------------------------


def _joint_probabilities(outputs: np.ndarray, inputs_y: np.ndarray, elements: np.ndarray) -> np.ndarray:
    """``p[b, x, y] = Tr[(outputs[x] (x) inputs_y[y]) elements[b]]``."""
    nb, d1, d2 = elements.shape[0], outputs.shape[1], inputs_y.shape[1]
    e = elements.reshape(nb, d1, d2, d1, d2)
    return np.real(np.einsum("xik,yjl,bklij->bxy", outputs, inputs_y, e))


def _check_output_dims(channel: QuantumChannel, scenario: Scenario):
    if channel.dA != scenario.dim_x:
        raise DimensionError(f"channel input dimension {channel.dA} vs first question dimension {scenario.dim_x}")


def bell_correlation(channel: QuantumChannel, scenario: Scenario, measurement: Optional[POVM] = None) -> Correlation:
    """Correlation when the channel output and second question are measured jointly.

    Defaults to the generalized Bell measurement, so for a signature
    scenario this is the signature correlation. Games compiled from sparse
    decompositions use it with their own (possibly incomplete) input families.
    """
    _check_output_dims(channel, scenario)
    measurement = measurement or bell_povm(scenario.dim_y)
    if measurement.dim != channel.dB * scenario.dim_y:
        raise DimensionError(
            f"measurement acts on dimension {measurement.dim}, expected {channel.dB} x {scenario.dim_y}"
        )
    if len(measurement) != len(scenario.outcomes):
        raise DimensionError(f"measurement has {len(measurement)} outcomes, scenario {len(scenario.outcomes)}")
    outs = np.stack([channel(xi) for xi in scenario.inputs_x])
    p = _joint_probabilities(outs, np.stack(scenario.inputs_y), np.stack(measurement.elements))
    return Correlation(p, scenario.outcomes)


def signature_correlation(channel: QuantumChannel, scenario: SignatureScenario) -> Correlation:
    if channel.dB != scenario.dim_y:
        raise DimensionError(f"channel output dimension {channel.dB} vs second question dimension {scenario.dim_y}")
    return bell_correlation(channel, scenario, scenario.bell_measurement)


def eb_strategy_correlation(scenario: Scenario, first: POVM, responses: Sequence[POVM]) -> Correlation:
    """Classical-memory strategy: measure the first question, answer from the stored
    outcome and a measurement of the second question.

    ``p(b|x,y) = sum_i Tr[xi_x Pi_i] Tr[psi_y B_{b|i}]``
    """
    if len(responses) != len(first):
        raise ValueError(f"{len(first)} first-measurement outcomes but {len(responses)} response measurements")
    if first.dim != scenario.dim_x:
        raise DimensionError(f"first measurement on dimension {first.dim}, questions have {scenario.dim_x}")
    nb = len(scenario.outcomes)
    for r in responses:
        if r.dim != scenario.dim_y or len(r) != nb:
            raise DimensionError("response measurements must act on the second question and have one element per outcome")
    xs, ys = np.stack(scenario.inputs_x), np.stack(scenario.inputs_y)
    px = np.real(np.einsum("xab,iba->ix", xs, np.stack(first.elements)))
    resp = np.stack([np.stack(r.elements) for r in responses])
    py = np.real(np.einsum("yab,ikba->iky", ys, resp))
    return Correlation(np.einsum("ix,iby->bxy", px, py), scenario.outcomes)


def admissible_correlation(
    channel: QuantumChannel, scenario: Scenario, instrument: Instrument, responses: Sequence[POVM]
) -> Correlation:
    """``p(b|x,y) = sum_i Tr[((N o I_i)(xi_x) (x) psi_y) B_{b|i}]``."""
    if instrument.d_in != scenario.dim_x or instrument.d_out != channel.dA:
        raise DimensionError(
            f"instrument maps {instrument.d_in} -> {instrument.d_out}; need {scenario.dim_x} -> {channel.dA}"
        )
    if len(responses) != len(instrument):
        raise ValueError(f"{len(instrument)} instrument branches but {len(responses)} response measurements")
    nb = len(scenario.outcomes)
    ys = np.stack(scenario.inputs_y)
    p = np.zeros(scenario.shape)
    for i, resp in enumerate(responses):
        if resp.dim != channel.dB * scenario.dim_y or len(resp) != nb:
            raise DimensionError(f"response measurement {i} has the wrong dimension or outcome count")
        outs = np.stack([channel(instrument.apply(i, xi)) for xi in scenario.inputs_x])
        p += _joint_probabilities(outs, ys, np.stack(resp.elements))
    return Correlation(p, scenario.outcomes)


def compose_strategy(
    supermap: Supermap, instrument: Instrument, responses: Sequence[POVM]
) -> tuple[Instrument, list[POVM]]:
    """Turn a strategy for ``supermap(N)`` into a strategy for ``N`` with identical statistics.

    Branches are labelled ``(j, i)``: the strategy's branch ``j`` followed by
    the supermap's pre-processing branch ``i``. The supermap's decoder ``D_i``
    moves into the response measurement in the Heisenberg picture.
    """
    pre = supermap.instrument
    if instrument.d_out != pre.d_in:
        raise DimensionError(f"strategy instrument outputs {instrument.d_out}, supermap expects {pre.d_in}")
    branches, new_responses = [], []
    for j, outer in enumerate(instrument.branches):
        for i, inner in enumerate(pre.branches):
            branches.append(tuple(ki @ kj for kj in outer for ki in inner))
            dec = supermap.decoders[i]
            d_y = responses[j].dim // dec.dB
            lifted = [np.kron(k, np.eye(d_y)) for k in dec.kraus]
            new_responses.append(
                POVM(tuple(sum(dagger(k) @ e @ k for k in lifted) for e in responses[j].elements))
            )
    return Instrument(tuple(branches)), new_responses


# -- payoffs and games ----------------------------------------------------------------------------


def expected_payoff(game: Game, correlation: Correlation) -> float:
    if correlation.outcomes != game.outcomes or correlation.p.shape != game.payoff.shape:
        raise DimensionError(
            f"correlation {correlation.p.shape} / outcomes {correlation.outcomes} do not match game "
            f"{game.payoff.shape} / {game.outcomes}"
        )
    return float(np.sum(game.payoff * correlation.p))


def game_from_witness(decomposition: SparseDecomposition, outcome_count: Optional[int] = None) -> Game:
    """Payoff ``(dB/dA) omega[x, y]`` on the ``Phi_+`` outcome and zero elsewhere.

    The ``Phi_+`` outcome occurs with probability
    ``(dA/dB) Tr[J (xi_x^T (x) psi_y^T)]``, so the rescaling makes the
    signature-strategy payoff equal ``Tr[W J]``. For ``dA == dB`` the payoff
    is ``omega`` itself.
    """
    dx, dy = decomposition.dims
    outcome_count = outcome_count or dy * dy
    scenario = Scenario.with_outcome_count(decomposition.states_x, decomposition.states_y, outcome_count)
    payoff = np.zeros(scenario.shape)
    payoff[scenario.outcome_index(PHI_PLUS_LABEL)] = decomposition.dense() * (dy / dx)
    return Game(scenario, payoff, 0.0)


def loss_extend(game: Game, correlation: Correlation, eta: float) -> tuple[Game, Correlation]:
    """Add the erasure outcome (label 0, zero payoff) and scale the rest by ``eta``."""
    if not 0 < eta <= 1:
        raise ValueError(f"transmission must lie in (0, 1], got {eta}")
    if ERASURE_LABEL in game.outcomes:
        raise ValueError("game already has an erasure outcome")
    outcomes = (ERASURE_LABEL,) + game.outcomes
    scenario = Scenario(game.scenario.inputs_x, game.scenario.inputs_y, outcomes)
    nx, ny = game.payoff.shape[1:]
    payoff = np.concatenate([np.zeros((1, nx, ny)), game.payoff])
    p = np.concatenate([np.full((1, nx, ny), 1 - eta), eta * correlation.p])
    return Game(scenario, payoff, game.eb_threshold), Correlation(p, outcomes)


def reconstruct_choi(
    correlation: Correlation, scenario: Scenario, tol: float = RECONSTRUCTION_TOL, return_residual: bool = False
):
    """Linear-inversion process tomography from the ``Phi_+`` outcome.

    Uses ``p(1|x,y) = (dA/dB) Tr[J (xi_x^T (x) psi_y^T)]``. If an erasure
    outcome is present the data are conditioned on no erasure first.
    """
    sigma = np.array(correlation[PHI_PLUS_LABEL], dtype=float)
    if ERASURE_LABEL in correlation.outcomes:
        kept = 1 - correlation[ERASURE_LABEL]
        if np.min(kept) <= 0:
            raise ValueError("every question pair was erased; no tomographic data left")
        sigma = sigma / kept
    dA, dB = scenario.dim_x, scenario.dim_y
    if sigma.shape != (len(scenario.inputs_x), len(scenario.inputs_y)):
        raise DimensionError(f"correlation table {sigma.shape} does not match scenario inputs")
    sigma = sigma * (dB / dA)
    fx, fy = frame_matrix(scenario.inputs_x, "first"), frame_matrix(scenario.inputs_y, "second")
    coeffs = np.linalg.pinv(fx.T) @ sigma @ np.linalg.pinv(fy)
    residual = float(np.linalg.norm(fx.T @ coeffs @ fy - sigma))
    if residual > tol:
        raise ValueError(f"inconsistent tomographic data: fit residual {residual:.3e} exceeds {tol:g}")
    gx, gy = hermitian_basis(dA), hermitian_basis(dB)
    j = sum(coeffs[k, l] * np.kron(gx[k], gy[l]) for k in range(dA * dA) for l in range(dB * dB))
    choi = ChoiOperator(j, dA, dB).validate()
    return (choi, residual) if return_residual else choi


# -- pipeline ---------------------------------------------------------------------------------------


@dataclass(frozen=True)
class CertificationResult:
    ppt: PptReport
    verdict: CertificationVerdict
    witness: Optional[Witness] = None
    decomposition: Optional[SparseDecomposition] = None
    game: Optional[Game] = None
    correlation: Optional[Correlation] = None
    payoff: Optional[float] = None

    @property
    def certified(self) -> bool:
        return self.verdict is CertificationVerdict.CERTIFIED

    @property
    def caveat(self) -> Optional[str]:
        if self.certified:
            return None
        if self.ppt.separability_certified:
            return "positive partial transpose; the channel is entanglement breaking"
        if self.ppt.verdict is Verdict.EB_COMPATIBLE:
            return (
                "positive partial transpose; for dA*dB > 6 this does not prove the channel is "
                "entanglement breaking"
            )
        return "the witnessed payoff does not exceed the certification margin"


def certify(
    channel: QuantumChannel,
    family: Family | str = Family.STANDARD,
    mode: str = "tomographic",
    witness: Optional[Witness] = None,
    margin: float = CERTIFICATION_MARGIN,
) -> CertificationResult:
    """Choi operator, witness, decomposition, game, and the signature-strategy payoff.

    ``mode`` selects the payoff table: ``"tomographic"`` expands the witness
    over the full input families of the signature scenario, ``"sparse"``
    uses the short product-state expansion. A caller-supplied ``witness``
    replaces the partial-transpose witness.
    """
    if mode not in ("tomographic", "sparse"):
        raise ValueError(f"unknown decomposition mode {mode!r}")
    choi = kraus_to_choi(channel)
    ppt = ppt_check(choi, margin)
    if witness is None:
        if ppt.verdict is not Verdict.QUANTUM_DOMAIN_CERTIFIED:
            return CertificationResult(ppt, CertificationVerdict.NOT_CERTIFIED)
        witness = build_witness(choi, margin)
    elif witness.dims != choi.dims:
        raise DimensionError(f"witness dims {witness.dims} do not match channel dims {choi.dims}")
    if mode == "sparse":
        dec = sparse_decompose(witness)
    else:
        dec = tomographic_decompose(witness, input_family(channel.dA, family), input_family(channel.dB, family))
    game = game_from_witness(dec)
    corr = bell_correlation(channel, game.scenario)
    value = expected_payoff(game, corr)
    verdict = CertificationVerdict.CERTIFIED if value > margin else CertificationVerdict.NOT_CERTIFIED
    return CertificationResult(ppt, verdict, witness, dec, game, corr, value)

"""
Conditional dynamics: measure the program register after the processor
runs and keep the data output only for accepted outcomes.

Post-selected maps are trace non-increasing (``tp=False``); their
acceptance probabilities travel separately and states are renormalized
only at the end.
"""

import logging
from dataclasses import InitVar, dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from channel import Channel, apply, choi_from_kraus, to_choi
from errors import DimensionMismatch, InvalidInputError
from operator_core import (
    EPS,
    SPECTRAL_CUTOFF,
    as_square,
    frozen,
    is_density,
    is_hermitian,
    ket,
    max_abs,
    partial_trace,
    projector,
    spectral_decomposition,
    trace_distance,
)
from processor import Processor, ProgramState, extract_basis
from processor_zoo import basis_matrix

logger = logging.getLogger(__name__)

ZERO_PROBABILITY = 1e-14


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """Orthogonal projectors on program space summing to the identity."""
    dim: int
    projectors: Tuple[np.ndarray, ...]
    eps: InitVar[float] = EPS

    def __post_init__(self, eps: float):
        ops = tuple(frozen(as_square(p, "projector")) for p in self.projectors)
        if not ops:
            raise InvalidInputError("a measurement needs at least one projector")
        for index, p in enumerate(ops):
            if p.shape[0] != self.dim:
                raise DimensionMismatch(f"projector {index} has dimension {p.shape[0]}, expected {self.dim}")
            if not is_hermitian(p, eps) or max_abs(p @ p - p) > eps:
                raise InvalidInputError(f"projector {index} is not an orthogonal projector")
        for i in range(len(ops)):
            for j in range(i + 1, len(ops)):
                if max_abs(ops[i] @ ops[j]) > eps:
                    raise InvalidInputError(f"projectors {i} and {j} are not orthogonal")
        if max_abs(sum(ops) - np.eye(self.dim)) > eps:
            raise InvalidInputError("projectors do not sum to the identity")
        object.__setattr__(self, "projectors", ops)

    @classmethod
    def from_vectors(cls, vectors: Sequence, eps: float = EPS) -> "MeasurementBasis":
        """Rank-1 projectors onto an orthonormal basis."""
        columns = basis_matrix(vectors, eps)
        projectors = tuple(projector(columns[:, i]) for i in range(columns.shape[1]))
        return cls(dim=columns.shape[0], projectors=projectors, eps=eps)

    @property
    def size(self) -> int:
        return len(self.projectors)


def x_basis() -> MeasurementBasis:
    """|+x>, |-x> on a program qubit."""
    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    minus = np.array([1, -1], dtype=complex) / np.sqrt(2)
    return MeasurementBasis.from_vectors([plus, minus])


def computational_basis(dim: int) -> MeasurementBasis:
    return MeasurementBasis.from_vectors([ket(i, dim) for i in range(dim)])


def accept_all(dim: int) -> MeasurementBasis:
    return MeasurementBasis(dim=dim, projectors=(np.eye(dim, dtype=complex),))


@dataclass(frozen=True, eq=False)
class ConditionalOutcome:
    """One measurement outcome; ``post_state`` is None when the outcome is (numerically) impossible."""
    outcome_index: int
    probability: float
    post_state: Optional[np.ndarray]
    post_map: Channel

    @property
    def flagged(self) -> bool:
        return self.post_state is None


def _check_inputs(proc: Processor, prog: ProgramState, rho, eps: float) -> np.ndarray:
    rho = as_square(rho, "data state")
    if rho.shape[0] != proc.data_dim:
        raise DimensionMismatch(f"data state of dimension {rho.shape[0]} on a processor with M={proc.data_dim}")
    if prog.dim != proc.prog_dim:
        raise DimensionMismatch(f"program of dimension {prog.dim} on a processor with N={proc.prog_dim}")
    if not is_density(rho, eps):
        raise InvalidInputError("data state is not a density operator")
    return rho


def _joint_output(proc: Processor, prog: ProgramState, rho: np.ndarray) -> np.ndarray:
    joint = np.kron(rho, prog.density())
    return proc.G @ joint @ proc.G.conj().T


def run_unconditional(proc: Processor, prog: ProgramState, rho, eps: float = EPS) -> np.ndarray:
    """Tr_p G (rho (x) rho_p) G^dag."""
    rho = _check_inputs(proc, prog, rho, eps)
    return partial_trace(_joint_output(proc, prog, rho), proc.data_dim, proc.prog_dim, keep="A")


def _post_selected_kraus(proc: Processor, prog: ProgramState, p: np.ndarray,
                         cutoff: float) -> List[np.ndarray]:
    """K_rk = sqrt(lambda_k) sum_j conj(e_r[j]) A_j(chi_k), e_r spanning the range of p."""
    basis = extract_basis(proc)
    _, outcome_vectors = spectral_decomposition(p, 0.5)
    values, program_vectors = spectral_decomposition(prog.density(), cutoff)
    kraus = []
    for e in outcome_vectors.T:
        for weight, chi in zip(values, program_vectors.T):
            kraus.append(np.sqrt(weight) * np.einsum("j,k,jkab->ab", e.conj(), chi, basis.A))
    return kraus


def run_conditional(proc: Processor, prog: ProgramState, rho, basis: MeasurementBasis,
                    eps: float = EPS, zero_probability: float = ZERO_PROBABILITY,
                    cutoff: float = SPECTRAL_CUTOFF) -> List[ConditionalOutcome]:
    """Measure the program register in *basis*; one outcome per projector.

    Outcomes with probability below *zero_probability* are flagged and
    carry no post state.
    """
    rho = _check_inputs(proc, prog, rho, eps)
    if basis.dim != proc.prog_dim:
        raise DimensionMismatch(f"measurement on dimension {basis.dim}, program space has {proc.prog_dim}")
    joint = _joint_output(proc, prog, rho)
    eye_d = np.eye(proc.data_dim)
    outcomes = []
    for index, p in enumerate(basis.projectors):
        lifted = np.kron(eye_d, p)
        unnormalized = partial_trace(lifted @ joint @ lifted, proc.data_dim, proc.prog_dim, keep="A")
        probability = float(np.trace(unnormalized).real)
        post_map = Channel.from_kraus(_post_selected_kraus(proc, prog, p, cutoff), tp=False, eps=eps)
        if probability < zero_probability:
            logger.debug(f"Outcome {index} has probability {probability:.3e}; post state flagged")
            post_state = None
            probability = max(probability, 0.0)
        else:
            post_state = frozen((unnormalized + unnormalized.conj().T) / (2 * probability))
        outcomes.append(ConditionalOutcome(index, probability, post_state, post_map))
    return outcomes


def success_probability(proc: Processor, prog: ProgramState, rho, basis: MeasurementBasis,
                        accept_index: int) -> float:
    if not 0 <= accept_index < basis.size:
        raise InvalidInputError(f"accept index {accept_index} out of range for {basis.size} outcomes")
    return run_conditional(proc, prog, rho, basis)[accept_index].probability


def renormalized_map_distance(outcome: ConditionalOutcome, ch: Channel) -> float:
    """Trace distance between the unit-trace Choi matrices of a post-selected map and a channel."""
    post = choi_from_kraus(outcome.post_map.stacked())
    total = float(np.trace(post).real)
    if total < ZERO_PROBABILITY:
        raise InvalidInputError("post-selected map vanishes; nothing to renormalize")
    return trace_distance(post / total, to_choi(ch).normalized)


def mixing_residual(outcomes: Sequence[ConditionalOutcome], unconditional: np.ndarray) -> float:
    """max |sum_i p_i rho_i - rho_unconditional|, with flagged outcomes counted as zero."""
    total = sum(
        (o.probability * o.post_state for o in outcomes if o.post_state is not None),
        np.zeros_like(unconditional),
    )
    return max_abs(total - unconditional)


def z_rotation_program(alpha: float) -> ProgramState:
    """(e^{i alpha} |0> + e^{-i alpha} |1>) / sqrt(2).

    On the data-controlled C-NOT, measuring the program in the
    computational basis applies exp(+-i alpha sigma_z) to the data, each
    sign with probability 1/2.
    """
    return ProgramState.pure(np.array([np.exp(1j * alpha), np.exp(-1j * alpha)]) / np.sqrt(2))


def z_rotation_gate(alpha: float) -> np.ndarray:
    """exp(i alpha sigma_z)."""
    return np.diag([np.exp(1j * alpha), np.exp(-1j * alpha)])


def apply_post_map(outcome: ConditionalOutcome, rho) -> np.ndarray:
    """post_map[rho], which equals probability * post_state."""
    return apply(outcome.post_map, rho)

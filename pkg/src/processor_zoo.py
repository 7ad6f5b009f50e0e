"""
Constructors for the standard processor classes.

U:  G = sum_j U_j (x) |j><j|            (program selects a unitary)
Y:  G = sum_m |m><m| (x) U_m            (data controls the program)
U': G = sum_k U_k (x) |k><chi_k|        (U up to a program basis change)
Y': G = sum_m |m><phi_m| (x) U_m
plus the partial swap, the quantum information distributor (QID), the
C-NOT processors and the projector processor.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from channel import Channel, apply
from errors import DimensionMismatch, InvalidInputError, SchemaError
from operator_core import (
    EPS,
    IDENTITY2,
    SIGMA_X,
    SeedLike,
    as_square,
    dagger,
    is_hermitian,
    is_unitary,
    ket,
    make_rng,
    max_abs,
    random_density,
    random_special_unitary,
)
from processor import BasisOperators, Processor, ProgramState, extract_basis, induced_channel

logger = logging.getLogger(__name__)

QID_NORMALIZATION_TOL = 1e-9

PROCESSOR_KINDS = ("u", "y", "uprime", "yprime", "swap", "qid")


@dataclass(frozen=True, eq=False)
class ControlledSpec:
    """Unitaries of a controlled processor plus an optional orthonormal basis."""
    unitaries: Tuple[np.ndarray, ...]
    bases: Optional[Tuple[np.ndarray, ...]] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "unitaries", tuple(as_square(u, "unitary") for u in self.unitaries))
        if self.bases is not None:
            object.__setattr__(self, "bases", tuple(np.asarray(v, dtype=complex) for v in self.bases))

    def validate(self, eps: float = EPS) -> "ControlledSpec":
        check_unitaries(self.unitaries, eps)
        if self.bases is not None:
            basis_matrix(self.bases, eps)
        return self


def check_unitaries(unitaries: Sequence[np.ndarray], eps: float = EPS) -> int:
    """Validate a non-empty list of equally sized unitaries; return their dimension."""
    if not unitaries:
        raise SchemaError("at least one unitary is required")
    dim = as_square(unitaries[0], "unitary").shape[0]
    for index, u in enumerate(unitaries):
        u = as_square(u, f"unitary {index}")
        if u.shape[0] != dim:
            raise DimensionMismatch(f"unitary {index} has dimension {u.shape[0]}, expected {dim}")
        if not is_unitary(u, eps):
            raise InvalidInputError(f"unitary {index} is not unitary")
    return dim


def basis_matrix(vectors: Sequence, eps: float = EPS) -> np.ndarray:
    """Columns are the given vectors; they must form an orthonormal basis."""
    if not len(vectors):
        raise SchemaError("basis must contain at least one vector")
    columns = np.column_stack([np.asarray(v, dtype=complex) for v in vectors])
    if columns.shape[0] != columns.shape[1]:
        raise DimensionMismatch(
            f"{columns.shape[1]} basis vectors of dimension {columns.shape[0]} do not form a basis"
        )
    if not is_unitary(columns, eps):
        raise InvalidInputError("basis vectors are not orthonormal")
    return columns


def make_u_processor(unitaries: Sequence, eps: float = EPS) -> Processor:
    """G (|psi> (x) |j>) = (U_j |psi>) (x) |j>."""
    m = check_unitaries(unitaries, eps)
    n = len(unitaries)
    g = sum(np.kron(as_square(u), np.outer(ket(j, n), ket(j, n))) for j, u in enumerate(unitaries))
    return Processor(G=g, data_dim=m, prog_dim=n, eps=eps)


def make_y_processor(unitaries: Sequence, eps: float = EPS) -> Processor:
    """G = sum_m |m><m|_d (x) U_m with U_m acting on the program."""
    n = check_unitaries(unitaries, eps)
    m = len(unitaries)
    g = sum(np.kron(np.outer(ket(i, m), ket(i, m)), as_square(u)) for i, u in enumerate(unitaries))
    return Processor(G=g, data_dim=m, prog_dim=n, eps=eps)


def make_uprime_processor(unitaries: Sequence, chi_basis: Sequence,
                          eps: float = EPS) -> Tuple[Processor, np.ndarray]:
    """G = sum_k U_k (x) |k><chi_k|, returned with U_p (|chi_k> = U_p |k>).

    G equals the U processor of the same unitaries followed by U_p^dag on
    the program input.
    """
    m = check_unitaries(unitaries, eps)
    u_p = basis_matrix(chi_basis, eps)
    n = len(unitaries)
    if u_p.shape[0] != n:
        raise DimensionMismatch(f"chi basis of dimension {u_p.shape[0]} for {n} unitaries")
    g = sum(np.kron(as_square(u), np.outer(ket(k, n), u_p[:, k].conj())) for k, u in enumerate(unitaries))
    return Processor(G=g, data_dim=m, prog_dim=n, eps=eps), u_p


def make_yprime_processor(unitaries: Sequence, phi_basis: Sequence, eps: float = EPS) -> Processor:
    """G = sum_m |m><phi_m|_d (x) U_m."""
    n = check_unitaries(unitaries, eps)
    phis = basis_matrix(phi_basis, eps)
    m = len(unitaries)
    if phis.shape[0] != m:
        raise DimensionMismatch(f"phi basis of dimension {phis.shape[0]} for {m} unitaries")
    g = sum(np.kron(np.outer(ket(i, m), phis[:, i].conj()), as_square(u)) for i, u in enumerate(unitaries))
    return Processor(G=g, data_dim=m, prog_dim=n, eps=eps)


def swap_operator(dim: int) -> np.ndarray:
    """S = sum_kl |kl><lk|."""
    s = np.zeros((dim * dim, dim * dim), dtype=complex)
    for k in range(dim):
        for l in range(dim):
            s[k * dim + l, l * dim + k] = 1.0
    return s


def make_partial_swap(dim: int, phi: float) -> Processor:
    """G = cos(phi) 1 + i sin(phi) S on two qudits."""
    if dim < 2:
        raise InvalidInputError(f"partial swap needs dimension >= 2, got {dim}")
    g = np.cos(phi) * np.eye(dim * dim) + 1j * np.sin(phi) * swap_operator(dim)
    return Processor(G=g, data_dim=dim, prog_dim=dim)


def partial_swap_contraction_bound(phi: float, xi) -> float:
    """Exact trace-distance contraction factor of the qubit partial-swap channel.

    |cos phi| sqrt(cos^2 phi + sin^2 phi |b|^2), b the Bloch vector of xi.
    """
    xi = as_square(xi, "program state")
    if xi.shape[0] != 2:
        raise DimensionMismatch("the closed-form contraction bound is for qubits")
    bloch_sq = max(0.0, 2.0 * float(np.trace(xi @ xi).real) - 1.0)
    c, s = np.cos(phi), np.sin(phi)
    return float(abs(c) * np.sqrt(c * c + s * s * bloch_sq))


def cnot_gate(n_qubits: int, control: int, target: int) -> np.ndarray:
    """D_ct |m>_c |n>_t = |m>_c |m xor n>_t on *n_qubits* qubits numbered from 1.

    Qubit 1 is the most significant bit of the flattened index.
    """
    if control == target or not (1 <= control <= n_qubits and 1 <= target <= n_qubits):
        raise InvalidInputError(f"invalid C-NOT wiring control={control}, target={target}")
    size = 2 ** n_qubits
    c_bit = n_qubits - control
    t_bit = n_qubits - target
    gate = np.zeros((size, size), dtype=complex)
    for index in range(size):
        out = index ^ (1 << t_bit) if (index >> c_bit) & 1 else index
        gate[out, index] = 1.0
    return gate


def make_qid_processor() -> Processor:
    """G = D31 D21 D13 D12 with qubit 1 as data and qubits 2, 3 as program."""
    g = cnot_gate(3, 3, 1) @ cnot_gate(3, 2, 1) @ cnot_gate(3, 1, 3) @ cnot_gate(3, 1, 2)
    return Processor(G=g, data_dim=2, prog_dim=4)


def qid_program(alpha: float, beta: float) -> ProgramState:
    """alpha |Xi_00> + beta |Phi> with alpha^2 + beta^2 + alpha beta = 1."""
    norm_sq = alpha * alpha + beta * beta + alpha * beta
    if abs(norm_sq - 1.0) > QID_NORMALIZATION_TOL:
        raise InvalidInputError(
            f"alpha={alpha!r}, beta={beta!r} violate alpha^2 + beta^2 + alpha*beta = 1 "
            f"(got {norm_sq:.12g})"
        )
    bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    phi = np.array([1, 1, 0, 0], dtype=complex) / np.sqrt(2)
    vector = alpha * bell + beta * phi
    return ProgramState.pure(vector / np.linalg.norm(vector))


def qid_output(rho, beta: float) -> np.ndarray:
    """(1 - beta^2) rho + (beta^2 / 2) 1."""
    rho = as_square(rho, "data state")
    return (1.0 - beta * beta) * rho + 0.5 * beta * beta * np.eye(rho.shape[0])


def make_cnot_processor() -> Processor:
    """Single C-NOT with the program qubit as control."""
    return make_u_processor([IDENTITY2, SIGMA_X])


def make_cnot_data_control_processor() -> Processor:
    """Single C-NOT with the data qubit as control and the program as target."""
    return make_y_processor([IDENTITY2, SIGMA_X])


def make_projector_processor(u1, u2, q, eps: float = EPS) -> Processor:
    """G = U1 (x) Q + U2 (x) (1 - Q); every program in the range of Q induces U1."""
    m = check_unitaries([u1, u2], eps)
    q = as_square(q, "projector")
    if not is_hermitian(q, eps) or max_abs(q @ q - q) > eps:
        raise InvalidInputError("Q is not an orthogonal projector")
    n = q.shape[0]
    g = np.kron(as_square(u1), q) + np.kron(as_square(u2), np.eye(n) - q)
    return Processor(G=g, data_dim=m, prog_dim=n, eps=eps)


def check_channel_covariance(ch: Channel, group_samples: int, seed: SeedLike = 0) -> float:
    """max over Haar U in SU(M) and random rho of |U T[rho] U^dag - T[U rho U^dag]|."""
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(group_samples):
        u = random_special_unitary(ch.dim, rng)
        rho = random_density(ch.dim, rng)
        lhs = u @ apply(ch, rho) @ dagger(u)
        rhs = apply(ch, u @ rho @ dagger(u))
        worst = max(worst, max_abs(lhs - rhs))
    return worst


def covariance_consequence_residual(basis: BasisOperators) -> float:
    """max |sum_j A_jk1 A_jk2^dag - delta_k1k2 1|.

    Vanishes for processors covariant under SU(M) for every program state.
    """
    gram = np.einsum("jkab,jlcb->klac", basis.A, basis.A.conj())
    target = np.einsum("kl,ac->klac", np.eye(basis.N), np.eye(basis.M))
    return max_abs(gram - target)


def check_covariance(proc: Processor, prog: ProgramState, group_samples: int,
                     seed: SeedLike = 0, eps: float = EPS) -> Tuple[float, float]:
    """Covariance violation of the channel *prog* induces on *proc*.

    Returns ``(violation, residual)`` where *residual* is
    :func:`covariance_consequence_residual` of the processor's basis.
    """
    ch = induced_channel(proc, prog, eps=eps)
    violation = check_channel_covariance(ch, group_samples, seed)
    residual = covariance_consequence_residual(extract_basis(proc))
    if violation <= eps:
        if residual <= eps:
            logger.info("Induced channel is covariant and sum_j A_jk1 A_jk2^dag = delta 1 holds")
        else:
            logger.info(
                f"Induced channel is covariant for this program; sum_j A_jk1 A_jk2^dag = delta 1 "
                f"misses by {residual:.3e}, so covariance does not extend to every program"
            )
    return violation, residual


def build_processor(kind: str, spec: Optional[ControlledSpec] = None, dim: int = 2,
                    phi: float = 0.0, eps: float = EPS) -> Processor:
    """Dispatch on the CLI kind names."""
    if kind not in PROCESSOR_KINDS:
        raise SchemaError(f"unknown processor kind {kind!r}; expected one of {', '.join(PROCESSOR_KINDS)}")
    if kind == "qid":
        return make_qid_processor()
    if kind == "swap":
        return make_partial_swap(dim, phi)
    if spec is None:
        raise SchemaError(f"processor kind {kind!r} needs a list of unitaries")
    if kind == "u":
        return make_u_processor(spec.unitaries, eps)
    if kind == "y":
        return make_y_processor(spec.unitaries, eps)
    if spec.bases is None:
        raise SchemaError(f"processor kind {kind!r} needs a basis")
    if kind == "uprime":
        proc, u_p = make_uprime_processor(spec.unitaries, spec.bases, eps)
        logger.info(f"U' processor is a U processor with program basis change of size {u_p.shape[0]}")
        return proc
    return make_yprime_processor(spec.unitaries, spec.bases, eps)

"""
Programmable processors: a fixed unitary G on data (x) program space.

The processor is characterized by its basis operators
A_jk = <j|G|k>_p, an N x N grid of M x M data operators. A program state
|Xi> selects the channel whose Kraus operators are
A_j(Xi) = sum_k <k|Xi> A_jk.
"""

import logging
from dataclasses import InitVar, dataclass
from typing import List, Tuple

import numpy as np

from channel import Channel
from errors import DimensionMismatch, InvalidInputError, OrthogonalityViolation, SchemaError
from operator_core import (
    EPS,
    SPECTRAL_CUTOFF,
    SeedLike,
    as_square,
    as_state_vector,
    dagger,
    frozen,
    is_density,
    is_unitary,
    ket,
    max_abs,
    partial_trace,
    projector,
    random_unitary,
    spectral_decomposition,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Processor:
    """Unitary G acting on H_d (x) H_p with dim H_d = data_dim, dim H_p = prog_dim.

    Pass ``check=False`` to hold a matrix that may not be unitary, e.g. when
    loading a file whose identities are about to be verified. ``eps`` is
    the unitarity tolerance used when checking.
    """
    G: np.ndarray
    data_dim: int
    prog_dim: int
    check: InitVar[bool] = True
    eps: InitVar[float] = EPS

    def __post_init__(self, check: bool, eps: float):
        g = frozen(as_square(self.G, "processor matrix"))
        if self.data_dim < 1 or self.prog_dim < 1:
            raise DimensionMismatch(f"dimensions must be positive, got M={self.data_dim}, N={self.prog_dim}")
        size = self.data_dim * self.prog_dim
        if g.shape != (size, size):
            raise DimensionMismatch(
                f"processor matrix is {g.shape[0]}x{g.shape[1]}, expected {size}x{size} "
                f"for M={self.data_dim}, N={self.prog_dim}"
            )
        if check and not is_unitary(g, eps):
            raise InvalidInputError("processor matrix is not unitary")
        object.__setattr__(self, "G", g)

    @property
    def size(self) -> int:
        return self.data_dim * self.prog_dim


@dataclass(frozen=True, eq=False)
class BasisOperators:
    """A[j, k] = <j|G|k>_p as an (N, N, M, M) array."""
    M: int
    N: int
    A: np.ndarray

    def __post_init__(self):
        grid = frozen(self.A)
        if grid.shape != (self.N, self.N, self.M, self.M):
            raise DimensionMismatch(
                f"basis grid has shape {grid.shape}, expected {(self.N, self.N, self.M, self.M)}"
            )
        object.__setattr__(self, "A", grid)

    def __getitem__(self, jk: Tuple[int, int]) -> np.ndarray:
        return self.A[jk]


@dataclass(frozen=True, eq=False)
class ProgramState:
    """A pure program vector or a mixed program density operator."""
    kind: str
    value: np.ndarray

    def __post_init__(self):
        if self.kind not in ("pure", "mixed"):
            raise SchemaError(f"program kind must be 'pure' or 'mixed', got {self.kind!r}")
        object.__setattr__(self, "value", frozen(self.value))

    @classmethod
    def pure(cls, vector, eps: float = EPS) -> "ProgramState":
        return cls(kind="pure", value=as_state_vector(vector, eps, "program state"))

    @classmethod
    def mixed(cls, rho, eps: float = EPS) -> "ProgramState":
        rho = as_square(rho, "program density operator")
        if not is_density(rho, eps):
            raise InvalidInputError("program density operator is not a valid state")
        return cls(kind="mixed", value=rho)

    @classmethod
    def basis(cls, index: int, dim: int) -> "ProgramState":
        return cls.pure(ket(index, dim))

    @property
    def dim(self) -> int:
        return self.value.shape[0]

    @property
    def is_pure(self) -> bool:
        return self.kind == "pure"

    def density(self) -> np.ndarray:
        return projector(self.value) if self.is_pure else np.array(self.value)


def _require_program_dim(prog: ProgramState, n: int):
    if prog.dim != n:
        raise DimensionMismatch(f"program of dimension {prog.dim} on a processor with N={n}")


def extract_basis(proc: Processor) -> BasisOperators:
    """A[j][k][m, n] = G[(m, j), (n, k)]."""
    m, n = proc.data_dim, proc.prog_dim
    grid = proc.G.reshape(m, n, m, n).transpose(1, 3, 0, 2)
    return BasisOperators(M=m, N=n, A=grid)


def orthogonality_residual(basis: BasisOperators) -> float:
    """max |sum_j A_jk1^dag A_jk2 - delta_k1k2 I|."""
    gram = np.einsum("jkba,jlbc->klac", basis.A.conj(), basis.A)
    target = np.einsum("kl,ac->klac", np.eye(basis.N), np.eye(basis.M))
    return max_abs(gram - target)


def dual_residual(basis: BasisOperators) -> float:
    """max |sum_j A_k1j A_k2j^dag - delta_k1k2 I|."""
    gram = np.einsum("kjab,ljcb->klac", basis.A, basis.A.conj())
    target = np.einsum("kl,ac->klac", np.eye(basis.N), np.eye(basis.M))
    return max_abs(gram - target)


def assemble(basis: BasisOperators, eps: float = EPS) -> Processor:
    """G = sum_jk A_jk (x) |j><k|_p, after checking orthogonality."""
    residual = orthogonality_residual(basis)
    if residual > eps:
        raise OrthogonalityViolation(residual, eps)
    m, n = basis.M, basis.N
    g = basis.A.transpose(2, 0, 3, 1).reshape(m * n, m * n)
    return Processor(G=g, data_dim=m, prog_dim=n)


def program_operators(basis: BasisOperators, prog: ProgramState) -> List[np.ndarray]:
    """A_j(Xi) = sum_k <k|Xi> A_jk for a pure program."""
    if not prog.is_pure:
        raise InvalidInputError("program operators are defined for pure programs")
    _require_program_dim(prog, basis.N)
    ops = np.einsum("jkab,k->jab", basis.A, prog.value)
    return list(ops)


def _mixed_program_kraus(basis: BasisOperators, rho: np.ndarray, cutoff: float) -> List[np.ndarray]:
    values, vectors = spectral_decomposition(rho, cutoff)
    ops = []
    for weight, chi in zip(values, vectors.T):
        ops.extend(np.sqrt(weight) * np.einsum("jkab,k->jab", basis.A, chi))
    return ops


def induced_channel(proc: Processor, prog: ProgramState, eps: float = EPS,
                    cutoff: float = SPECTRAL_CUTOFF) -> Channel:
    """The channel rho_d -> Tr_p G (rho_d (x) rho_p) G^dag."""
    _require_program_dim(prog, proc.prog_dim)
    basis = extract_basis(proc)
    if prog.is_pure:
        ops = program_operators(basis, prog)
    else:
        ops = _mixed_program_kraus(basis, prog.value, cutoff)
    return Channel.from_kraus(ops, eps=eps)


def purify_program(proc: Processor, prog: ProgramState,
                   cutoff: float = SPECTRAL_CUTOFF) -> Tuple[Processor, ProgramState]:
    """Replace a mixed program by a pure one on a doubled program register.

    |Phi> = sum_k sqrt(lambda_k) |chi_k> (x) |k> runs on G' = G (x) 1 and
    induces the same channel as rho_p on G.
    """
    _require_program_dim(prog, proc.prog_dim)
    rho = prog.density()
    if not is_density(rho):
        raise InvalidInputError("program to purify is not a density operator")
    n = proc.prog_dim
    values, vectors = spectral_decomposition(rho, cutoff)
    phi = np.zeros(n * n, dtype=complex)
    for k, (weight, chi) in enumerate(zip(values, vectors.T)):
        phi += np.sqrt(weight) * np.kron(chi, ket(k, n))
    phi /= np.linalg.norm(phi)
    lifted = Processor(G=np.kron(proc.G, np.eye(n)), data_dim=proc.data_dim, prog_dim=n * n)
    logger.debug(f"Purified rank-{len(values)} program onto a {n * n}-dimensional register")
    return lifted, ProgramState.pure(phi)


def mapcond_residual(ops1, ops2, overlap: complex) -> float:
    """max |sum_k A_k^dag(Xi1) A_k(Xi2) - overlap * I| for two program-operator lists."""
    ops1 = np.asarray(ops1, dtype=complex)
    ops2 = np.asarray(ops2, dtype=complex)
    if ops1.shape != ops2.shape:
        raise DimensionMismatch(f"operator lists of shapes {ops1.shape} and {ops2.shape}")
    total = np.einsum("kba,kbc->ac", ops1.conj(), ops2)
    return max_abs(total - overlap * np.eye(total.shape[0]))


def check_mapcond(basis: BasisOperators, xi1: ProgramState, xi2: ProgramState) -> float:
    """Residual of sum_k A_k^dag(Xi1) A_k(Xi2) = <Xi1|Xi2> I."""
    overlap = np.vdot(xi1.value, xi2.value)
    return mapcond_residual(program_operators(basis, xi1), program_operators(basis, xi2), overlap)


def _require_same_shape(p1: Processor, p2: Processor):
    if (p1.data_dim, p1.prog_dim) != (p2.data_dim, p2.prog_dim):
        raise DimensionMismatch(
            f"processors with (M, N) = {(p1.data_dim, p1.prog_dim)} and {(p2.data_dim, p2.prog_dim)}"
        )


def compose(p1: Processor, p2: Processor) -> Processor:
    """The processor G1 G2 (p2 acts first)."""
    _require_same_shape(p1, p2)
    return Processor(G=p1.G @ p2.G, data_dim=p1.data_dim, prog_dim=p1.prog_dim)


def basis_product(b1: BasisOperators, b2: BasisOperators) -> BasisOperators:
    """C_jk = sum_n A1_jn A2_nk."""
    if (b1.M, b1.N) != (b2.M, b2.N):
        raise DimensionMismatch(f"basis grids with (M, N) = {(b1.M, b1.N)} and {(b2.M, b2.N)}")
    return BasisOperators(M=b1.M, N=b1.N, A=np.einsum("jnab,nkbc->jkac", b1.A, b2.A))


def adjoint(proc: Processor) -> Processor:
    """G^dag; its basis operators are B_jk = A_kj^dag."""
    return Processor(G=dagger(proc.G), data_dim=proc.data_dim, prog_dim=proc.prog_dim)


def _require_program_unitary(u, n: int, name: str, eps: float) -> np.ndarray:
    u = as_square(u, name)
    if u.shape[0] != n:
        raise DimensionMismatch(f"{name} acts on dimension {u.shape[0]}, program space has {n}")
    if not is_unitary(u, eps):
        raise InvalidInputError(f"{name} is not unitary")
    return u


def equivalent_via(p1: Processor, p2: Processor, u_p1, u_p2, eps: float = EPS) -> bool:
    """True iff G2 = (1 (x) U_p1) G1 (1 (x) U_p2) within eps.

    When the processors match, the basis relation
    A2_jk = sum_mn (U_p1)_jm (U_p2)_nk A1_mn is checked as well.
    """
    _require_same_shape(p1, p2)
    u1 = _require_program_unitary(u_p1, p1.prog_dim, "U_p1", eps)
    u2 = _require_program_unitary(u_p2, p1.prog_dim, "U_p2", eps)
    eye_d = np.eye(p1.data_dim)
    conjugated = np.kron(eye_d, u1) @ p1.G @ np.kron(eye_d, u2)
    if max_abs(p2.G - conjugated) > eps:
        return False
    a1 = extract_basis(p1).A
    a2 = extract_basis(p2).A
    predicted = np.einsum("jm,nk,mnab->jkab", u1, u2, a1)
    residual = max_abs(a2 - predicted)
    if residual > eps:
        logger.warning(f"Processors match but basis relation residual is {residual:.3e}")
        return False
    return True


def equivalent_program(u_p2, prog: ProgramState) -> ProgramState:
    """Program for processor 2 that reproduces *prog* on processor 1: U_p2^-1 applied."""
    u = as_square(u_p2, "U_p2")
    if prog.is_pure:
        return ProgramState.pure(dagger(u) @ prog.value)
    return ProgramState.mixed(dagger(u) @ prog.value @ u)


def equivalence_trace_invariants(proc: Processor, n_max: int) -> List[np.ndarray]:
    """[Tr_p G, Tr_p G^2, ..., Tr_p G^n_max] as data-space operators."""
    if n_max < 1:
        raise InvalidInputError(f"n_max must be >= 1, got {n_max}")
    invariants = []
    power = np.eye(proc.size, dtype=complex)
    for _ in range(n_max):
        power = power @ proc.G
        invariants.append(partial_trace(power, proc.data_dim, proc.prog_dim, keep="A"))
    return invariants


def random_processor(data_dim: int, prog_dim: int, seed: SeedLike = None) -> Processor:
    """Haar-random processor on an M x N register pair."""
    return Processor(G=random_unitary(data_dim * prog_dim, seed), data_dim=data_dim, prog_dim=prog_dim)

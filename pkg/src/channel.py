"""
Completely positive maps held as Kraus lists.

Channels compare through their Choi matrices, which are canonical where
Kraus lists are not: two Kraus lists related by an isometric mixing
describe the same map.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np

from errors import DimensionMismatch, InvalidInputError, NoUniqueFixedPoint
from operator_core import (
    EPS,
    SeedLike,
    as_square,
    dagger,
    frozen,
    hermitian_part,
    make_rng,
    max_abs,
    random_density,
    random_state_vector,
    projector,
    trace_distance,
)

logger = logging.getLogger(__name__)

FIXED_POINT_TOL = 1e-8
POWER_ITERATION_LIMIT = 100000


@dataclass(frozen=True, eq=False)
class Channel:
    """A CP map rho -> sum_j K_j rho K_j^dag.

    ``tp`` is False for post-selected maps, which only satisfy
    sum_j K_j^dag K_j <= I.
    """
    dim: int
    kraus: Tuple[np.ndarray, ...]
    tp: bool = True

    def __post_init__(self):
        ops = tuple(frozen(as_square(k, "Kraus operator")) for k in self.kraus)
        if not ops:
            raise InvalidInputError("a channel needs at least one Kraus operator")
        for k in ops:
            if k.shape != (self.dim, self.dim):
                raise DimensionMismatch(
                    f"Kraus operator of shape {k.shape} in a dimension-{self.dim} channel"
                )
        object.__setattr__(self, "kraus", ops)

    @classmethod
    def from_kraus(cls, kraus: Iterable, tp: bool = True, eps: float = EPS) -> "Channel":
        """Build a channel and check trace preservation (or non-increase)."""
        ops = [as_square(k, "Kraus operator") for k in kraus]
        if not ops:
            raise InvalidInputError("a channel needs at least one Kraus operator")
        ch = cls(dim=ops[0].shape[0], kraus=tuple(ops), tp=tp)
        residual = tp_residual(ch)
        if tp and residual > eps:
            raise InvalidInputError(f"Kraus list is not trace-preserving (residual {residual:.3e})")
        if not tp:
            top = float(np.linalg.eigvalsh(hermitian_part(kraus_sum(ch))).max())
            if top > 1.0 + eps:
                raise InvalidInputError(f"Kraus list increases trace (largest eigenvalue {top:.12g})")
        return ch

    @property
    def rank(self) -> int:
        return len(self.kraus)

    def stacked(self) -> np.ndarray:
        """Kraus operators as one (rank, M, M) array."""
        return np.stack(self.kraus)


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """Unnormalized Choi matrix sum_mn |m><n| (x) T[|m><n|]."""
    dim: int
    matrix: np.ndarray

    @property
    def normalized(self) -> np.ndarray:
        return self.matrix / self.dim


def identity_channel(dim: int) -> Channel:
    return Channel(dim=dim, kraus=(np.eye(dim, dtype=complex),))


def unitary_channel(u) -> Channel:
    u = as_square(u, "unitary")
    return Channel(dim=u.shape[0], kraus=(u,))


def kraus_sum(ch: Channel) -> np.ndarray:
    """sum_j K_j^dag K_j."""
    stack = ch.stacked()
    return np.einsum("jba,jbc->ac", stack.conj(), stack)


def tp_residual(ch: Channel) -> float:
    return max_abs(kraus_sum(ch) - np.eye(ch.dim))


def is_trace_preserving(ch: Channel, eps: float = EPS) -> bool:
    return tp_residual(ch) <= eps


def apply(ch: Channel, rho) -> np.ndarray:
    """sum_j K_j rho K_j^dag."""
    rho = as_square(rho, "input state")
    if rho.shape[0] != ch.dim:
        raise DimensionMismatch(f"state of dimension {rho.shape[0]} into a dimension-{ch.dim} channel")
    stack = ch.stacked()
    return np.einsum("jab,bc,jdc->ad", stack, rho, stack.conj())


def choi_from_kraus(stack: np.ndarray) -> np.ndarray:
    """Choi matrix straight from a (rank, M, M) Kraus stack.

    Entry ((m, a), (n, b)) is sum_j K_j[a, m] conj(K_j[b, n]).
    """
    rank, dim, _ = stack.shape
    vectors = np.transpose(stack, (0, 2, 1)).reshape(rank, dim * dim)
    return vectors.T @ vectors.conj()


def to_choi(ch: Channel) -> ChoiMatrix:
    return ChoiMatrix(dim=ch.dim, matrix=frozen(choi_from_kraus(ch.stacked())))


def choi_distance(a: Channel, b: Channel) -> float:
    """Trace distance between the trace-normalized Choi matrices."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"cannot compare channels of dimension {a.dim} and {b.dim}")
    return trace_distance(to_choi(a).normalized, to_choi(b).normalized)


def channels_equal(a: Channel, b: Channel, eps: float = EPS) -> bool:
    return choi_distance(a, b) <= eps


def compose_channels(outer: Channel, inner: Channel) -> Channel:
    """The map outer o inner (inner acts first)."""
    if outer.dim != inner.dim:
        raise DimensionMismatch(f"cannot compose dimensions {outer.dim} and {inner.dim}")
    kraus = tuple(a @ b for a in outer.kraus for b in inner.kraus)
    return Channel(dim=outer.dim, kraus=kraus, tp=outer.tp and inner.tp)


def conjugate_channel(ch: Channel, u) -> Channel:
    """The channel {U K_j U^dag}."""
    u = as_square(u, "unitary")
    return Channel(dim=ch.dim, kraus=tuple(u @ k @ dagger(u) for k in ch.kraus), tp=ch.tp)


def unitality_residual(ch: Channel) -> float:
    maximally_mixed = np.eye(ch.dim) / ch.dim
    return max_abs(apply(ch, maximally_mixed) - maximally_mixed)


def is_unital(ch: Channel, eps: float = EPS) -> bool:
    """True iff ||T[I/M] - I/M||_max <= eps."""
    return unitality_residual(ch) <= eps


def superoperator(ch: Channel) -> np.ndarray:
    """Row-major vectorized action: vec(T[rho]) = S vec(rho), S = sum_j K_j (x) conj(K_j)."""
    stack = ch.stacked()
    dim = ch.dim
    s = np.einsum("jab,jcd->acbd", stack, stack.conj())
    return s.reshape(dim * dim, dim * dim)


def _power_iteration(ch: Channel, tol: float) -> np.ndarray:
    rho = np.eye(ch.dim, dtype=complex) / ch.dim
    for step in range(POWER_ITERATION_LIMIT):
        nxt = apply(ch, rho)
        nxt = hermitian_part(nxt) / np.trace(nxt).real
        if max_abs(nxt - rho) <= tol * 1e-4:
            logger.debug(f"Power iteration converged after {step + 1} steps")
            return nxt
        rho = nxt
    logger.warning("Power iteration hit its step limit before converging")
    return rho


def fixed_point(ch: Channel, tol: float = FIXED_POINT_TOL) -> np.ndarray:
    """The unique density operator with T[rho] = rho.

    The eigenvalue-1 eigenspace of the superoperator is the null space of
    S - I, read off its singular values. More than one vanishing singular
    value means the fixed point is not unique.
    """
    if not ch.tp:
        raise InvalidInputError("fixed points are defined here for trace-preserving channels only")
    dim = ch.dim
    shifted = superoperator(ch) - np.eye(dim * dim)
    _, singular, vh = np.linalg.svd(shifted)
    multiplicity = int(np.sum(singular <= tol))
    if multiplicity > 1:
        raise NoUniqueFixedPoint(multiplicity)

    if multiplicity == 1:
        candidate = vh[-1].conj().reshape(dim, dim)
        trace = np.trace(candidate)
        if abs(trace) > tol:
            rho = hermitian_part(candidate / trace)
            if trace_distance(apply(ch, rho), rho) <= tol:
                return rho
        logger.debug("Null vector of S - I was not a usable state, falling back to power iteration")
    else:
        logger.debug(f"No singular value below {tol:.1e} (smallest {singular[-1]:.3e}), using power iteration")

    return _power_iteration(ch, tol)


def contraction_factor(ch: Channel, trials: int, seed: SeedLike = 0) -> float:
    """Largest sampled ratio D(T[r1], T[r2]) / D(r1, r2) over random state pairs.

    Even trials draw pure states, odd trials full-rank ones.
    """
    if trials < 1:
        raise InvalidInputError(f"trials must be >= 1, got {trials}")
    rng = make_rng(seed)
    worst = 0.0
    for trial in range(trials):
        if trial % 2 == 0:
            r1 = projector(random_state_vector(ch.dim, rng))
            r2 = projector(random_state_vector(ch.dim, rng))
        else:
            r1 = random_density(ch.dim, rng)
            r2 = random_density(ch.dim, rng)
        before = trace_distance(r1, r2)
        if before < 1e-9:
            continue
        worst = max(worst, trace_distance(apply(ch, r1), apply(ch, r2)) / before)
    return worst

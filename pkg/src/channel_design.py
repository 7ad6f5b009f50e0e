"""
Designing processors for one-parameter channel families.

Phase damping is realized exactly by a U processor with a two-dimensional
program register. Amplitude damping is not realizable on any finite
program register; ``no_go_witness`` tabulates the chain of overlap bounds
that forces infinitely many linearly independent vectors, and
``feasibility_search`` gives numerical evidence by direct optimization.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm
from scipy.optimize import least_squares

from channel import Channel, choi_from_kraus
from errors import DimensionMismatch, InvalidInputError, SchemaError
from operator_core import (
    EPS,
    IDENTITY2,
    SIGMA_Z,
    as_state_vector,
    trace_distance,
)
from processor import Processor, ProgramState
from processor_zoo import make_u_processor
from serialization import matrix_to_json, processor_to_json, program_to_json

logger = logging.getLogger(__name__)

INDEPENDENCE_TOL = 1e-10
DEFAULT_STARTS = 8
DEFAULT_ITERATIONS = 5000
# A start at or below this residual ends the search
SOLVED_RESIDUAL = 1e-14

KrausFn = Callable[[float], List[np.ndarray]]


def _check_theta(theta: float):
    if not 0.0 <= theta <= 1.0:
        raise InvalidInputError(f"theta must lie in [0, 1], got {theta!r}")


@dataclass(frozen=True)
class ParamChannelFamily:
    """Channels T_theta for theta on a grid, given by their Kraus lists."""
    dim: int
    theta_grid: Tuple[float, ...]
    kraus_fn: KrausFn
    name: str = "custom"

    def __post_init__(self):
        grid = tuple(float(t) for t in self.theta_grid)
        if not grid:
            raise SchemaError("theta grid must not be empty")
        for theta in grid:
            _check_theta(theta)
        object.__setattr__(self, "theta_grid", grid)

    def channel(self, theta: float) -> Channel:
        _check_theta(theta)
        ch = Channel.from_kraus(self.kraus_fn(theta))
        if ch.dim != self.dim:
            raise DimensionMismatch(f"family of dimension {self.dim} produced a dimension-{ch.dim} channel")
        return ch

    def channels(self) -> List[Channel]:
        return [self.channel(theta) for theta in self.theta_grid]


def phase_damping_kraus(theta: float) -> List[np.ndarray]:
    """B_1 = sqrt(theta) 1, B_2 = sqrt(1 - theta) sigma_z."""
    _check_theta(theta)
    return [np.sqrt(theta) * IDENTITY2, np.sqrt(1.0 - theta) * SIGMA_Z]


def amplitude_damping_kraus(theta: float) -> List[np.ndarray]:
    """B_1 = |0><0| + sqrt(1 - theta) |1><1|, B_2 = sqrt(theta) |0><1|."""
    _check_theta(theta)
    b1 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - theta)]], dtype=complex)
    b2 = np.array([[0.0, np.sqrt(theta)], [0.0, 0.0]], dtype=complex)
    return [b1, b2]


def phase_damping_family(theta_grid: Sequence[float]) -> ParamChannelFamily:
    return ParamChannelFamily(dim=2, theta_grid=tuple(theta_grid), kraus_fn=phase_damping_kraus, name="phase")


def amplitude_damping_family(theta_grid: Sequence[float]) -> ParamChannelFamily:
    return ParamChannelFamily(dim=2, theta_grid=tuple(theta_grid), kraus_fn=amplitude_damping_kraus, name="amp")


def constant_family(ch: Channel, theta_grid: Sequence[float]) -> ParamChannelFamily:
    """The same channel at every grid point."""
    kraus = [np.array(k) for k in ch.kraus]
    return ParamChannelFamily(dim=ch.dim, theta_grid=tuple(theta_grid), kraus_fn=lambda _: kraus, name="constant")


def phase_damping_program(theta: float) -> ProgramState:
    """|Xi(theta)> = sqrt(theta) |0> + sqrt(1 - theta) |1>."""
    _check_theta(theta)
    return ProgramState.pure(np.array([np.sqrt(theta), np.sqrt(1.0 - theta)], dtype=complex))


def build_phase_damping_processor() -> Tuple[Processor, Callable[[float], ProgramState]]:
    """U processor with U_1 = 1, U_2 = sigma_z and its program map theta -> Xi(theta)."""
    return make_u_processor([IDENTITY2, SIGMA_Z]), phase_damping_program


def kraus_overlap(theta1: float, theta2: float) -> np.ndarray:
    """sum_j B_j^dag(theta1) B_j(theta2) for the amplitude-damping Kraus pair."""
    b1 = amplitude_damping_kraus(theta1)
    b2 = amplitude_damping_kraus(theta2)
    return sum(k1.conj().T @ k2 for k1, k2 in zip(b1, b2))


def kraus_overlap_closed_form(theta1: float, theta2: float) -> np.ndarray:
    """|0><0| + (sqrt(theta1 theta2) + sqrt((1 - theta1)(1 - theta2))) |1><1|."""
    _check_theta(theta1)
    _check_theta(theta2)
    coefficient = np.sqrt(theta1 * theta2) + np.sqrt((1.0 - theta1) * (1.0 - theta2))
    return np.diag([1.0, coefficient]).astype(complex)


def _check_theta_array(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if np.any((theta < 0.0) | (theta > 1.0)):
        raise InvalidInputError("theta values must lie in [0, 1]")
    return theta


def overlap_bound_g(theta1, theta2):
    """g = sqrt(theta1 theta2) / (1 - sqrt((1 - theta1)(1 - theta2))).

    Evaluated as sqrt(theta1 theta2) (1 + sqrt(...)) / (theta1 + theta2 - theta1 theta2),
    which stays accurate for the tiny theta of the zeta sequence. Accepts
    scalars or arrays.
    """
    t1 = _check_theta_array(theta1)
    t2 = _check_theta_array(theta2)
    denominator = t1 + t2 - t1 * t2
    if np.any(denominator == 0.0):
        raise InvalidInputError("g is undefined when both theta values are 0")
    g = np.sqrt(t1 * t2) * (1.0 + np.sqrt((1.0 - t1) * (1.0 - t2))) / denominator
    return float(g) if g.ndim == 0 else g


def g_relaxations(theta1, theta2):
    """The two relaxed upper bounds on g.

    2 sqrt(t1 t2) / (t1 + t2 - t1 t2 / 2)  and  8 sqrt(t1 t2) / (3 (t1 + t2)).
    """
    t1 = _check_theta_array(theta1)
    t2 = _check_theta_array(theta2)
    root = np.sqrt(t1 * t2)
    first = 2.0 * root / (t1 + t2 - 0.5 * t1 * t2)
    second = 8.0 * root / (3.0 * (t1 + t2))
    if first.ndim == 0:
        return float(first), float(second)
    return first, second


def zeta_sequence(m_witness: int, count: Optional[int] = None) -> List[float]:
    """zeta_n = (1 / (16 M^2))^n for n = 1 .. count (count defaults to M)."""
    if m_witness < 1:
        raise InvalidInputError(f"M must be a positive integer, got {m_witness}")
    count = m_witness if count is None else count
    ratio = 1.0 / (16.0 * m_witness * m_witness)
    return [ratio ** n for n in range(1, count + 1)]


def small_overlap_condition(vectors: Sequence) -> bool:
    """All pairwise overlaps |<v_j|v_k>| below 1 / (count - 1)."""
    stack = np.array([np.asarray(v, dtype=complex) for v in vectors])
    count = len(stack)
    if count < 2:
        return True
    gram = stack.conj() @ stack.T
    off = np.abs(gram[~np.eye(count, dtype=bool)])
    return bool(off.max() < 1.0 / (count - 1))


def linear_independence_check(vectors: Sequence, eps: float = EPS) -> bool:
    """True iff the Gram matrix of the unit vectors has min eigenvalue > 1e-10."""
    if len(vectors) < 2:
        raise InvalidInputError("need at least two vectors")
    stack = [as_state_vector(v, eps, f"vector {i}") for i, v in enumerate(vectors)]
    dims = {v.shape[0] for v in stack}
    if len(dims) != 1:
        raise DimensionMismatch(f"vectors of different dimensions {sorted(dims)}")
    matrix = np.array(stack)
    gram = matrix.conj() @ matrix.T
    smallest = float(np.linalg.eigvalsh(gram).min())
    logger.debug(f"Gram matrix of {len(stack)} vectors has smallest eigenvalue {smallest:.3e}")
    return smallest > INDEPENDENCE_TOL


@dataclass(frozen=True)
class BoundCheck:
    """One pair (zeta_n, zeta_m), n < m, of the overlap bound chain."""
    n: int
    m: int
    theta1: float
    theta2: float
    g: float
    relaxation_half_angle: float
    relaxation_sum: float
    geometric: float

    def chain_holds(self, threshold: float) -> bool:
        slack = 1e-12
        return (
            self.g <= self.relaxation_half_angle * (1 + slack)
            and self.relaxation_half_angle <= self.relaxation_sum * (1 + slack)
            and self.relaxation_sum <= self.geometric * (1 + slack)
            and self.geometric < threshold
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "theta1": self.theta1,
            "theta2": self.theta2,
            "g": self.g,
            "relaxation_half_angle": self.relaxation_half_angle,
            "relaxation_sum": self.relaxation_sum,
            "geometric": self.geometric,
        }


@dataclass(frozen=True, eq=False)
class NoGoReport:
    """Inequality table and dimension-counting contradiction for amplitude damping.

    ``gram_matrix`` holds 1 on the diagonal and the bound g(zeta_n, zeta_m)
    off it: an entrywise bound on the Gram matrix of any admissible family
    u_0(zeta_n). ``gershgorin_lower_bound`` > 0 shows every such Gram
    matrix is nonsingular.
    """
    M_witness: int
    N_ambient: int
    zeta_sequence: Tuple[float, ...]
    gram_matrix: np.ndarray
    min_singular_value: float
    gershgorin_lower_bound: float
    bound_checks: Tuple[BoundCheck, ...] = field(default_factory=tuple)

    @property
    def threshold(self) -> float:
        return 1.0 / self.M_witness

    @property
    def holds(self) -> bool:
        return (
            self.M_witness > self.N_ambient
            and self.gershgorin_lower_bound > 0.0
            and all(check.chain_holds(self.threshold) for check in self.bound_checks)
        )

    @property
    def statement(self) -> str:
        return (
            f"Any unit vectors u_0(zeta_1), ..., u_0(zeta_{self.M_witness}) obeying the overlap bound g "
            f"have pairwise overlaps below 1/{self.M_witness} <= 1/{self.M_witness - 1} and are therefore "
            f"{self.M_witness} linearly independent vectors, which cannot fit in {self.N_ambient} dimensions."
        )

    def to_dict(self) -> dict:
        return {
            "M_witness": self.M_witness,
            "N_ambient": self.N_ambient,
            "threshold": self.threshold,
            "zeta_sequence": list(self.zeta_sequence),
            "gram_matrix": matrix_to_json(self.gram_matrix),
            "min_singular_value": self.min_singular_value,
            "gershgorin_lower_bound": self.gershgorin_lower_bound,
            "bound_checks": [check.to_dict() for check in self.bound_checks],
            "holds": self.holds,
            "statement": self.statement,
        }


def _bound_chain(m_witness: int, n: int, m: int, zeta_n: float, zeta_m: float) -> Tuple[float, float, float]:
    """g and its two relaxations for the pair (zeta_n, zeta_m), n < m.

    Both are divided through by zeta_n so only sqrt(zeta_m / zeta_n) =
    (4M)^-(m - n) enters. zeta_n itself underflows to 0 once M is around 70
    and it appears only as 1 - zeta.
    """
    root = (4.0 * m_witness) ** (-(m - n))
    ratio = root * root
    g = root * (1.0 + np.sqrt((1.0 - zeta_n) * (1.0 - zeta_m))) / (1.0 + ratio - zeta_m)
    first = 2.0 * root / (1.0 + ratio - 0.5 * zeta_m)
    second = 8.0 * root / (3.0 * (1.0 + ratio))
    return float(g), float(first), float(second)


def no_go_witness(m_witness: int, n_ambient: int) -> NoGoReport:
    """Evaluate the bound chain on zeta_1 .. zeta_M and state the contradiction.

    The reported zeta values may underflow to 0 for large M; the bounds do not.
    """
    if n_ambient < 2 or m_witness <= n_ambient:
        raise SchemaError(
            f"need M_witness > N_ambient >= 2 for a contradiction, got M={m_witness}, N={n_ambient}"
        )
    zetas = zeta_sequence(m_witness)
    bounds = np.eye(m_witness)
    checks = []
    for n in range(1, m_witness + 1):
        for m in range(n + 1, m_witness + 1):
            t1, t2 = zetas[n - 1], zetas[m - 1]
            g, first, second = _bound_chain(m_witness, n, m, t1, t2)
            geometric = (8.0 / 3.0) * (4.0 * m_witness) ** (-(m - n))
            checks.append(BoundCheck(n, m, t1, t2, g, first, second, geometric))
            bounds[n - 1, m - 1] = bounds[m - 1, n - 1] = g

    off_diagonal = bounds - np.eye(m_witness)
    gershgorin = float(1.0 - off_diagonal.sum(axis=1).max())
    min_sv = float(np.linalg.svd(bounds, compute_uv=False).min())
    report = NoGoReport(
        M_witness=m_witness,
        N_ambient=n_ambient,
        zeta_sequence=tuple(zetas),
        gram_matrix=bounds.astype(complex),
        min_singular_value=min_sv,
        gershgorin_lower_bound=gershgorin,
        bound_checks=tuple(checks),
    )
    logger.info(
        f"No-go witness M={m_witness}, N={n_ambient}: {len(checks)} bounds, "
        f"largest g={max(c.g for c in checks):.3e}, holds={report.holds}"
    )
    return report


@dataclass(frozen=True, eq=False)
class SearchResult:
    best_residual: float
    best_processor: Processor
    best_programs: Tuple[ProgramState, ...]
    log: Tuple[Tuple[int, float], ...]
    family: str
    prog_dim: int

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "prog_dim": self.prog_dim,
            "best_residual": self.best_residual,
            "log": [[iteration, residual] for iteration, residual in self.log],
            "processor": processor_to_json(self.best_processor),
            "programs": [program_to_json(p) for p in self.best_programs],
        }


class _SearchProblem:
    """Parameter layout and objective for one feasibility search.

    Parameters: D*D reals for the Hermitian generator of G = exp(iH)
    (D = M N), then 2N reals (real and imaginary parts) per grid point
    for the program vectors.
    """

    def __init__(self, family: ParamChannelFamily, prog_dim: int):
        self.m = family.dim
        self.n = prog_dim
        self.size = self.m * self.n
        self.thetas = family.theta_grid
        self.targets = [choi_from_kraus(ch.stacked()) / self.m for ch in family.channels()]
        self.n_generator = self.size * self.size
        self.n_params = self.n_generator + 2 * self.n * len(self.thetas)
        self._upper = np.triu_indices(self.size, k=1)

    def unitary(self, params: np.ndarray) -> np.ndarray:
        d = self.size
        h = np.zeros((d, d), dtype=complex)
        diag = params[:d]
        n_off = len(self._upper[0])
        re = params[d:d + n_off]
        im = params[d + n_off:d + 2 * n_off]
        h[self._upper] = re + 1j * im
        h = h + h.conj().T
        h[np.diag_indices(d)] = diag
        return expm(1j * h)

    def programs(self, params: np.ndarray) -> List[np.ndarray]:
        raw = params[self.n_generator:].reshape(len(self.thetas), 2, self.n)
        vectors = raw[:, 0, :] + 1j * raw[:, 1, :]
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        return list(vectors / norms)

    def chois(self, params: np.ndarray) -> List[np.ndarray]:
        g = self.unitary(params).reshape(self.m, self.n, self.m, self.n)
        out = []
        for xi in self.programs(params):
            stack = np.einsum("ajbk,k->jab", g, xi)
            out.append(choi_from_kraus(stack) / self.m)
        return out

    def residual_vector(self, params: np.ndarray) -> np.ndarray:
        diffs = [c - t for c, t in zip(self.chois(params), self.targets)]
        flat = np.concatenate([d.ravel() for d in diffs])
        return np.concatenate([flat.real, flat.imag])

    def residual(self, params: np.ndarray) -> float:
        """sum over the grid of squared Choi trace distances."""
        return float(sum(trace_distance(c, t) ** 2 for c, t in zip(self.chois(params), self.targets)))

    def initial(self, rng: np.random.Generator, identity_start: bool) -> np.ndarray:
        x0 = rng.standard_normal(self.n_params)
        if identity_start:
            x0[:self.n_generator] = 0.0
        return x0


def _run_start(problem: _SearchProblem, x0: np.ndarray, budget: int):
    """One local solve; the trace keeps each evaluation that halves the logged objective."""
    calls = 0
    logged = np.inf
    trace: List[Tuple[int, float]] = []

    def fun(params):
        nonlocal calls, logged
        calls += 1
        r = problem.residual_vector(params)
        value = float(r @ r)
        if value <= 0.5 * logged:
            logged = value
            trace.append((calls, problem.residual(params)))
        return r

    result = least_squares(fun, x0, jac="2-point", method="trf", max_nfev=budget,
                           xtol=1e-15, ftol=1e-15, gtol=1e-15)
    final = problem.residual(result.x)
    trace.append((calls, final))
    return result.x, final, trace, calls


def feasibility_search(family: ParamChannelFamily, prog_dim: int, iterations: int = DEFAULT_ITERATIONS,
                       seed: int = 0, starts: int = DEFAULT_STARTS, workers: int = 1) -> SearchResult:
    """Search for a processor and programs realizing *family* on an N-dimensional program.

    Multi-start trust-region least squares on the Choi-matrix differences
    with a finite-difference Jacobian. Start 0 begins at G = 1. The
    reported residual is sum_theta choi_distance^2. The iteration budget
    is shared evenly across starts; the first start that reaches
    SOLVED_RESIDUAL ends the search, with the same outcome for any
    number of workers.
    """
    if prog_dim < 1:
        raise InvalidInputError(f"program dimension must be >= 1, got {prog_dim}")
    if starts < 1 or iterations < 1:
        raise InvalidInputError("starts and iterations must be positive")
    problem = _SearchProblem(family, prog_dim)
    budget = max(1, iterations // starts)
    seeds = np.random.SeedSequence(seed).spawn(starts)
    initials = [problem.initial(np.random.default_rng(s), identity_start=(i == 0)) for i, s in enumerate(seeds)]

    logger.info(
        f"Feasibility search: family={family.name}, M={problem.m}, N={prog_dim}, "
        f"{len(problem.thetas)} grid points, {starts} starts x {budget} evaluations"
    )
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda x0: _run_start(problem, x0, budget), initials))
    else:
        outcomes = []
        for x0 in initials:
            outcomes.append(_run_start(problem, x0, budget))
            if outcomes[-1][1] <= SOLVED_RESIDUAL:
                break
    solved = [i for i, outcome in enumerate(outcomes) if outcome[1] <= SOLVED_RESIDUAL]
    if solved:
        outcomes = outcomes[:solved[0] + 1]

    log: List[Tuple[int, float]] = []
    offset = 0
    best_index = 0
    for index, (_, residual, trace, calls) in enumerate(outcomes):
        log.extend((offset + it, value) for it, value in trace)
        offset += calls
        logger.debug(f"Start {index}: residual {residual:.3e} after {calls} evaluations")
        if residual < outcomes[best_index][1]:
            best_index = index

    best_x, best_residual, _, _ = outcomes[best_index]
    processor = Processor(G=problem.unitary(best_x), data_dim=problem.m, prog_dim=prog_dim)
    programs = tuple(ProgramState.pure(v) for v in problem.programs(best_x))
    logger.info(f"Feasibility search finished: best residual {best_residual:.3e} (start {best_index})")
    return SearchResult(
        best_residual=best_residual,
        best_processor=processor,
        best_programs=programs,
        log=tuple(log),
        family=family.name,
        prog_dim=prog_dim,
    )

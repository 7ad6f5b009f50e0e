"""
Dense complex linear algebra shared by every other module.

An operator is a 2-D complex128 ``numpy.ndarray``; a state vector is a 1-D
one. Composite indices flatten data-major: (i_d, i_p) -> i_d * N + i_p.
"""

import logging
from typing import Optional, Tuple, Union

import numpy as np

from errors import DimensionMismatch, InvalidInputError, SchemaError

logger = logging.getLogger(__name__)

EPS = 1e-10
SPECTRAL_CUTOFF = 1e-12

SeedLike = Union[int, np.random.Generator, None]

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

# Gate names accepted wherever a params file expects a matrix
NAMED_GATES = {
    "I": IDENTITY2,
    "X": SIGMA_X,
    "Y": SIGMA_Y,
    "Z": SIGMA_Z,
    "H": HADAMARD,
}

for _gate in NAMED_GATES.values():
    _gate.setflags(write=False)


def frozen(array) -> np.ndarray:
    """Return a read-only complex copy of *array*."""
    out = np.array(array, dtype=complex)
    out.setflags(write=False)
    return out


def as_operator(m, name: str = "operator") -> np.ndarray:
    """Coerce *m* to a 2-D complex array, rejecting anything else."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise DimensionMismatch(f"{name} must be a non-empty matrix, got shape {arr.shape}")
    return arr


def as_square(m, name: str = "operator") -> np.ndarray:
    arr = as_operator(m, name)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {arr.shape}")
    return arr


def as_state_vector(v, eps: float = EPS, name: str = "state vector") -> np.ndarray:
    """Coerce *v* to a 1-D complex array of unit norm."""
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionMismatch(f"{name} must be a non-empty vector, got shape {arr.shape}")
    norm = np.linalg.norm(arr)
    if abs(norm - 1.0) > eps:
        raise InvalidInputError(f"{name} has norm {norm:.12g}, expected 1")
    return arr


def max_abs(m) -> float:
    """Entrywise max norm."""
    return float(np.max(np.abs(m))) if np.size(m) else 0.0


def approx_equal(a, b, eps: float = EPS) -> bool:
    a = np.asarray(a)
    b = np.asarray(b)
    return a.shape == b.shape and max_abs(a - b) <= eps


def ket(index: int, dim: int) -> np.ndarray:
    """Computational basis vector |index> in dimension *dim*."""
    if not 0 <= index < dim:
        raise DimensionMismatch(f"basis index {index} out of range for dimension {dim}")
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(v) -> np.ndarray:
    """|v><v| for a (not necessarily normalized) vector."""
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def tensor(a, b) -> np.ndarray:
    """Kronecker product a (x) b."""
    return np.kron(as_operator(a, "left factor"), as_operator(b, "right factor"))


def partial_trace(m, dim_a: int, dim_b: int, keep: str = "A") -> np.ndarray:
    """Trace out one factor of an operator on H_A (x) H_B.

    ``keep`` names the factor that survives: ``"A"`` traces over B and
    ``"B"`` traces over A.
    """
    m = as_square(m)
    if m.shape[0] != dim_a * dim_b:
        raise DimensionMismatch(
            f"operator of size {m.shape[0]} is not {dim_a} x {dim_b}"
        )
    blocks = m.reshape(dim_a, dim_b, dim_a, dim_b)
    key = str(keep).upper()
    if key == "A":
        return np.einsum("ibjb->ij", blocks)
    if key == "B":
        return np.einsum("aiaj->ij", blocks)
    raise SchemaError(f"keep must be 'A' or 'B', got {keep!r}")


def dagger(m) -> np.ndarray:
    """Conjugate transpose."""
    return np.conj(np.asarray(m)).T


def is_hermitian(m, eps: float = EPS) -> bool:
    m = as_square(m)
    return max_abs(m - dagger(m)) <= eps


def is_unitary(m, eps: float = EPS) -> bool:
    """True when ||m^dag m - I||_max <= eps."""
    m = as_square(m)
    return max_abs(dagger(m) @ m - np.eye(m.shape[0])) <= eps


def is_density(m, eps: float = EPS) -> bool:
    """Hermitian, unit trace, eigenvalues >= -eps."""
    m = as_square(m)
    if not is_hermitian(m, eps):
        return False
    if abs(np.trace(m) - 1.0) > eps:
        return False
    eigenvalues = np.linalg.eigvalsh((m + dagger(m)) / 2)
    return bool(eigenvalues.min() >= -eps)


def hermitian_part(m) -> np.ndarray:
    return (m + dagger(m)) / 2


def trace_norm_hermitian(m) -> float:
    """||m||_1 for a Hermitian matrix, from its eigenvalues."""
    return float(np.sum(np.abs(np.linalg.eigvalsh(hermitian_part(as_square(m))))))


def trace_distance(a, b) -> float:
    """1/2 ||a - b||_1 for Hermitian a, b."""
    a = as_square(a, "first operand")
    b = as_square(b, "second operand")
    if a.shape != b.shape:
        raise DimensionMismatch(f"trace distance of {a.shape} and {b.shape}")
    return 0.5 * trace_norm_hermitian(a - b)


def spectral_decomposition(m, cutoff: float = SPECTRAL_CUTOFF) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of a Hermitian matrix, dropping eigenvalues below *cutoff*.

    Returns ``(values, vectors)`` with eigenvectors as columns, largest
    eigenvalue first.
    """
    values, vectors = np.linalg.eigh(hermitian_part(as_square(m)))
    order = np.argsort(values)[::-1]
    values = values[order]
    vectors = vectors[:, order]
    keep = values > cutoff
    return values[keep], vectors[:, keep]


def make_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def complex_gaussian(shape, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unitary(dim: int, seed: SeedLike = None) -> np.ndarray:
    """Haar-distributed unitary from an orthonormalized complex Gaussian matrix.

    The QR factorization performs the Gram-Schmidt step; each column is then
    multiplied by the phase of the matching diagonal entry of R.
    """
    if dim < 1:
        raise InvalidInputError(f"unitary dimension must be >= 1, got {dim}")
    rng = make_rng(seed)
    z = complex_gaussian((dim, dim), rng)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    phases = diag / np.abs(diag)
    return q * phases[np.newaxis, :]


def random_special_unitary(dim: int, seed: SeedLike = None) -> np.ndarray:
    """Haar unitary with its determinant phase removed (an element of SU(dim))."""
    u = random_unitary(dim, seed)
    det = np.linalg.det(u)
    return u / det ** (1.0 / dim)


def random_state_vector(dim: int, seed: SeedLike = None) -> np.ndarray:
    rng = make_rng(seed)
    v = complex_gaussian(dim, rng)
    return v / np.linalg.norm(v)


def random_density(dim: int, seed: SeedLike = None, rank: Optional[int] = None) -> np.ndarray:
    """Random density operator (Ginibre ensemble of the given rank)."""
    rng = make_rng(seed)
    rank = dim if rank is None else rank
    g = complex_gaussian((dim, rank), rng)
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_hermitian(dim: int, seed: SeedLike = None) -> np.ndarray:
    rng = make_rng(seed)
    g = complex_gaussian((dim, dim), rng)
    return hermitian_part(g)

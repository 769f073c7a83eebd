"""Truncated Fock-space kernel.

States, ladder and displacement operators, tensor products, partial traces
and expectation values on one or two bosonic modes. Two-mode objects are
always ordered (fundamental, second harmonic) and flattened with the index
map ``n_total = i * (n_max_b + 1) + j``.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from loguru import logger
from scipy.special import gammaln

from gcss.physics.errors import (
    ConfigurationError,
    DimensionMismatchError,
    TruncationError,
)

FUNDAMENTAL = 0
HARMONIC = 1

_MODE_ALIASES = {
    "fundamental": FUNDAMENTAL,
    "omega": FUNDAMENTAL,
    "harmonic": HARMONIC,
    "second_harmonic": HARMONIC,
    "2omega": HARMONIC,
}


def _as_dims(dims, size: int) -> Tuple[int, ...]:
    if dims is None:
        return (size,)
    dims = tuple(int(d) for d in dims)
    if int(np.prod(dims)) != size:
        raise DimensionMismatchError(f"dims {dims} do not match size {size}")
    return dims


def _boundary_population(populations: np.ndarray, dims: Tuple[int, ...]) -> float:
    """Population on the two highest levels of any mode."""
    grid = populations.reshape(dims)
    mask = np.zeros(dims, dtype=bool)
    for axis, d in enumerate(dims):
        index = [slice(None)] * len(dims)
        index[axis] = slice(max(d - 2, 0), d)
        mask[tuple(index)] = True
    return float(grid[mask].sum())


@dataclass(frozen=True, eq=False)
class FockVector:
    """Pure state in a truncated Fock basis."""

    amplitudes: np.ndarray
    dims: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=np.complex128).ravel()
        dims = _as_dims(self.dims, amplitudes.size)
        norm_sq = float(np.vdot(amplitudes, amplitudes).real)
        if norm_sq > 1.0 + 1e-12:
            raise ConfigurationError(f"squared norm {norm_sq!r} exceeds 1")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "dims", dims)

    @property
    def n_max(self) -> int:
        """Cutoff of a single-mode vector (first mode for two-mode vectors)."""
        return self.dims[0] - 1

    @property
    def cutoffs(self) -> Tuple[int, ...]:
        return tuple(d - 1 for d in self.dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def leakage(self) -> float:
        """Boundary population |c_n_max|^2 + |c_(n_max-1)|^2 (per mode)."""
        return _boundary_population(np.abs(self.amplitudes) ** 2, self.dims)

    def projector(self) -> "FockDensity":
        return FockDensity(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims)


@dataclass(frozen=True, eq=False)
class FockDensity:
    """Density matrix in a truncated Fock basis."""

    matrix: np.ndarray
    dims: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatchError(f"density must be square, got {matrix.shape}")
        dims = _as_dims(self.dims, matrix.shape[0])
        scale = max(1.0, float(np.abs(matrix).max(initial=0.0)))
        if np.abs(matrix - matrix.conj().T).max(initial=0.0) > 1e-10 * scale:
            raise ConfigurationError("density matrix is not Hermitian")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "dims", dims)

    @property
    def n_max(self) -> int:
        return self.dims[0] - 1

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def purity(self) -> float:
        return float(np.einsum("ij,ji->", self.matrix, self.matrix).real)

    def leakage(self) -> float:
        return _boundary_population(np.diag(self.matrix).real, self.dims)

    def normalized(self) -> "FockDensity":
        trace = self.trace()
        if trace <= 0.0:
            raise ConfigurationError("cannot normalize a density with non-positive trace")
        return FockDensity(self.matrix / trace, self.dims)

    def eigenvalues(self) -> np.ndarray:
        return scipy.linalg.eigvalsh(self.matrix)

    def is_physical(self, tol: float = 1e-8) -> bool:
        """Trace one and positive semi-definite within ``tol``."""
        return abs(self.trace() - 1.0) <= tol and bool(self.eigenvalues().min() >= -tol)


@dataclass(frozen=True, eq=False)
class FockOperator:
    """Linear operator on a truncated Fock space, dense or sparse."""

    matrix: Union[np.ndarray, sp.spmatrix]
    dims: Optional[Tuple[int, ...]] = None
    unitarity_defect: Optional[float] = field(default=None, compare=False)

    def __post_init__(self):
        matrix = self.matrix
        if sp.issparse(matrix):
            matrix = sp.csr_matrix(matrix, dtype=np.complex128)
        else:
            matrix = np.array(matrix, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatchError(f"operator must be square, got {matrix.shape}")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "dims", _as_dims(self.dims, matrix.shape[0]))

    @property
    def n_max(self) -> int:
        return self.dims[0] - 1

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray() if self.is_sparse else np.array(self.matrix)

    def sparse(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.matrix)

    def dagger(self) -> "FockOperator":
        return FockOperator(self.matrix.conj().T, self.dims)

    def apply(self, vector, dense: bool = False) -> np.ndarray:
        """Apply to a raw amplitude array or a FockVector."""
        data = vector.amplitudes if isinstance(vector, FockVector) else np.asarray(vector)
        if data.shape[0] != self.dim:
            raise DimensionMismatchError(f"vector of size {data.shape[0]} vs operator {self.dim}")
        matrix = self.dense() if dense else self.matrix
        return np.asarray(matrix @ data)

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        if not isinstance(other, FockOperator):
            return NotImplemented
        if other.dims != self.dims:
            raise DimensionMismatchError(f"{self.dims} vs {other.dims}")
        return FockOperator(self.matrix @ other.matrix, self.dims)

    def __add__(self, other: "FockOperator") -> "FockOperator":
        if not isinstance(other, FockOperator):
            return NotImplemented
        if other.dims != self.dims:
            raise DimensionMismatchError(f"{self.dims} vs {other.dims}")
        return FockOperator(self.matrix + other.matrix, self.dims)

    def __mul__(self, scalar) -> "FockOperator":
        return FockOperator(self.matrix * scalar, self.dims)

    __rmul__ = __mul__


def vacuum(n_max: int) -> FockVector:
    return fock_state(0, n_max)


def fock_state(n: int, n_max: int) -> FockVector:
    if not 0 <= n <= n_max:
        raise ConfigurationError(f"|{n}> outside cutoff {n_max}")
    amplitudes = np.zeros(n_max + 1, dtype=np.complex128)
    amplitudes[n] = 1.0
    return FockVector(amplitudes)


def coherent_fock(alpha: complex, n_max: int) -> FockVector:
    """Coherent state |alpha> truncated at ``n_max`` (not renormalized)."""
    if n_max < 0:
        raise ConfigurationError("n_max must be non-negative")
    alpha = complex(alpha)
    mean = abs(alpha) ** 2
    if mean > n_max:
        raise TruncationError(f"|alpha|^2 = {mean:.4g} exceeds n_max = {n_max}")
    amplitudes = np.zeros(n_max + 1, dtype=np.complex128)
    if alpha == 0:
        amplitudes[0] = 1.0
        return FockVector(amplitudes)
    n = np.arange(n_max + 1)
    log_mod = -0.5 * mean + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    amplitudes[:] = np.exp(log_mod) * np.exp(1j * n * np.angle(alpha))
    return FockVector(amplitudes)


def identity(dims) -> FockOperator:
    dims = tuple(dims) if np.iterable(dims) else (int(dims),)
    return FockOperator(sp.identity(int(np.prod(dims)), dtype=np.complex128, format="csr"), dims)


def ladder_operators(n_max: int) -> Tuple[FockOperator, FockOperator, FockOperator]:
    """Annihilation, creation and number operators (sparse)."""
    if n_max < 1:
        raise ConfigurationError("ladder operators need n_max >= 1")
    root = np.sqrt(np.arange(1, n_max + 1, dtype=float))
    annihilation = sp.diags(root, offsets=1, format="csr", dtype=np.complex128)
    creation = sp.diags(root, offsets=-1, format="csr", dtype=np.complex128)
    number = sp.diags(np.arange(n_max + 1, dtype=float), format="csr", dtype=np.complex128)
    return FockOperator(annihilation), FockOperator(creation), FockOperator(number)


def parity_operator(n_max: int) -> FockOperator:
    signs = np.where(np.arange(n_max + 1) % 2 == 0, 1.0, -1.0)
    return FockOperator(sp.diags(signs, format="csr", dtype=np.complex128))


def intensity_squared_operator(n_max: int) -> FockOperator:
    """(a^dag)^2 a^2 + a^dag a, built from the ladder operators."""
    a, a_dag, number = ladder_operators(n_max)
    return a_dag @ a_dag @ a @ a + number


def unitarity_defect(op: FockOperator) -> float:
    """max |D^dag D - I|."""
    matrix = op.dense()
    return float(np.abs(matrix.conj().T @ matrix - np.eye(op.dim)).max())


def displacement_operator(alpha: complex, n_max: int) -> FockOperator:
    """D(alpha) = expm(alpha a^dag - alpha* a) on the truncated space."""
    alpha = complex(alpha)
    if abs(alpha) ** 2 > n_max / 4:
        raise TruncationError(f"|alpha|^2 = {abs(alpha) ** 2:.4g} exceeds n_max/4 = {n_max / 4:.4g}")
    if n_max == 0:
        return FockOperator(np.eye(1), unitarity_defect=0.0)
    a, a_dag, _ = ladder_operators(n_max)
    generator = alpha * a_dag.dense() - alpha.conjugate() * a.dense()
    op = FockOperator(scipy.linalg.expm(generator))
    defect = unitarity_defect(op)
    logger.debug(f"D({alpha:.4g}) on n_max={n_max}: unitarity defect {defect:.3e}")
    if defect > 1e-6:
        raise TruncationError(f"displacement unitarity defect {defect:.3e} > 1e-6")
    return FockOperator(op.matrix, unitarity_defect=defect)


def tensor_product(a, b):
    """Two-mode product state a (fundamental) ⊗ b (second harmonic)."""
    if isinstance(a, FockVector) and isinstance(b, FockVector):
        if len(a.dims) != 1 or len(b.dims) != 1:
            raise ConfigurationError("tensor_product expects single-mode factors")
        return FockVector(np.kron(a.amplitudes, b.amplitudes), (a.dim, b.dim))
    if isinstance(a, FockDensity) and isinstance(b, FockDensity):
        if len(a.dims) != 1 or len(b.dims) != 1:
            raise ConfigurationError("tensor_product expects single-mode factors")
        return FockDensity(np.kron(a.matrix, b.matrix), (a.dim, b.dim))
    if isinstance(a, FockOperator) and isinstance(b, FockOperator):
        return FockOperator(sp.kron(a.sparse(), b.sparse(), format="csr"), a.dims + b.dims)
    raise ConfigurationError(f"incompatible kinds {type(a).__name__} and {type(b).__name__}")


def embed(op: FockOperator, mode: int, dims: Tuple[int, int]) -> FockOperator:
    """Lift a single-mode operator onto the two-mode space."""
    if op.dim != dims[mode]:
        raise DimensionMismatchError(f"operator of dim {op.dim} vs mode dim {dims[mode]}")
    other = identity(dims[1 - mode])
    factors = (op, other) if mode == FUNDAMENTAL else (other, op)
    return tensor_product(*factors)


def _resolve_mode(keep) -> int:
    if isinstance(keep, str):
        try:
            return _MODE_ALIASES[keep.lower()]
        except KeyError:
            raise ConfigurationError(f"unknown mode selector {keep!r}") from None
    if keep not in (FUNDAMENTAL, HARMONIC):
        raise ConfigurationError(f"unknown mode selector {keep!r}")
    return int(keep)


def partial_trace(rho, keep) -> FockDensity:
    """Reduced state of one mode of a two-mode density (or vector)."""
    if isinstance(rho, FockVector):
        rho = rho.projector()
    if len(rho.dims) != 2:
        raise DimensionMismatchError("partial_trace needs a two-mode density")
    da, db = rho.dims
    blocks = rho.matrix.reshape(da, db, da, db)
    if _resolve_mode(keep) == FUNDAMENTAL:
        reduced = np.einsum("ijkj->ik", blocks)
    else:
        reduced = np.einsum("ijil->jl", blocks)
    # einsum sums are Hermitian up to rounding; symmetrize before validation
    reduced = 0.5 * (reduced + reduced.conj().T)
    return FockDensity(reduced)


def expectation_value(op: FockOperator, state) -> complex:
    """<psi|O|psi> or Tr[rho O]."""
    if op.dim != state.dim:
        raise DimensionMismatchError(f"operator dim {op.dim} vs state dim {state.dim}")
    if isinstance(state, FockVector):
        return complex(np.vdot(state.amplitudes, op.apply(state.amplitudes)))
    if isinstance(state, FockDensity):
        product = op.matrix @ state.matrix
        return complex(np.trace(np.asarray(product)))
    raise ConfigurationError(f"cannot take expectation on {type(state).__name__}")


__all__ = [
    "FUNDAMENTAL",
    "HARMONIC",
    "FockVector",
    "FockDensity",
    "FockOperator",
    "vacuum",
    "fock_state",
    "coherent_fock",
    "identity",
    "ladder_operators",
    "parity_operator",
    "intensity_squared_operator",
    "unitarity_defect",
    "displacement_operator",
    "tensor_product",
    "embed",
    "partial_trace",
    "expectation_value",
]

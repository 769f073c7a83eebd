"""Wigner functions on a phase-space grid.

Convention: x = (a + a^dag)/sqrt(2), p = (a - a^dag)/(i sqrt(2)),
beta = (x + i p)/sqrt(2), W integrates to one and the vacuum peaks at 1/pi.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from loguru import logger
from scipy.integrate import trapezoid

from gcss.physics.coherent import CoherentSuperposition, superposition_norm
from gcss.physics.errors import ConfigurationError, TruncationError
from gcss.physics.fock import FockDensity, FockVector, displacement_operator, parity_operator
from gcss.physics.states import CoherentMixture, coherent_state

VACUUM_WIDTH = 1.0 / np.sqrt(2.0)
MAX_LEAKAGE = 1e-6
METHODS = ("laguerre", "parity")


@dataclass(frozen=True)
class PhaseGrid:
    """Rectangular (x, p) grid around ``center``."""

    center: Tuple[float, float] = (0.0, 0.0)
    half_width_x: float = 6.0 * VACUUM_WIDTH
    half_width_p: float = 6.0 * VACUUM_WIDTH
    nx: int = 201
    n_p: int = 201

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        values = self.center + (self.half_width_x, self.half_width_p)
        if not all(np.isfinite(v) for v in values):
            raise ConfigurationError("phase grid ranges must be finite")
        if self.half_width_x <= 0 or self.half_width_p <= 0:
            raise ConfigurationError("phase grid half widths must be positive")
        if self.nx < 16 or self.n_p < 16:
            raise ConfigurationError(f"phase grid needs nx, np >= 16, got {self.nx}x{self.n_p}")

    @classmethod
    def around(cls, alpha: complex = 0.0, half_width: float = 6.0 * VACUUM_WIDTH, n: int = 201) -> "PhaseGrid":
        """Square grid centered on the phase-space point of amplitude ``alpha``."""
        alpha = complex(alpha)
        center = (np.sqrt(2.0) * alpha.real, np.sqrt(2.0) * alpha.imag)
        return cls(center, half_width, half_width, n, n)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.center[0] - self.half_width_x, self.center[0] + self.half_width_x, self.nx)

    @property
    def p(self) -> np.ndarray:
        return np.linspace(self.center[1] - self.half_width_p, self.center[1] + self.half_width_p, self.n_p)

    @property
    def x_range(self) -> Tuple[float, float]:
        return float(self.x[0]), float(self.x[-1])

    @property
    def p_range(self) -> Tuple[float, float]:
        return float(self.p[0]), float(self.p[-1])

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.p, indexing="ij")

    def beta(self) -> np.ndarray:
        x, p = self.mesh()
        return (x + 1j * p) / np.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class WignerField:
    grid: PhaseGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.nx, self.grid.n_p):
            raise ConfigurationError(f"values shape {values.shape} does not match grid")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def integral(self) -> float:
        return float(trapezoid(trapezoid(self.values, self.grid.p, axis=1), self.grid.x))

    def at(self, x: float, p: float) -> float:
        """Value at the grid node nearest to (x, p)."""
        i = int(np.argmin(np.abs(self.grid.x - x)))
        j = int(np.argmin(np.abs(self.grid.p - p)))
        return float(self.values[i, j])


@dataclass(frozen=True)
class WignerExtrema:
    min_value: float
    min_location: Tuple[float, float]
    max_value: float
    max_location: Tuple[float, float]
    negative_volume: float

    def as_dict(self) -> dict:
        return {
            "min_value": self.min_value,
            "min_location": list(self.min_location),
            "max_value": self.max_value,
            "max_location": list(self.max_location),
            "negative_volume": self.negative_volume,
        }


def wigner_analytic(s, grid: PhaseGrid, t: float = 0.0) -> WignerField:
    """Closed-form Wigner function of a coherent superposition frozen at ``t``.

    A ``CoherentMixture`` gives the weighted sum of its coherent components.
    """
    if isinstance(s, CoherentMixture):
        values = sum(
            float(np.real(weight)) * wigner_analytic(coherent_state(complex(amplitude(t))), grid).values
            for weight, amplitude in zip(s.weights, s.amplitudes)
        )
        return WignerField(grid, values)
    amplitudes = [complex(a) for a in s.amplitudes(t)]
    coefficients = [complex(c) for c in s.coefficients]
    norm_sq = float(superposition_norm(s, t)) ** 2
    beta = grid.beta()
    total = np.zeros(beta.shape, dtype=np.complex128)
    for c_j, alpha in zip(coefficients, amplitudes):
        shifted = 2.0 * beta - alpha
        phase = np.conj(beta) * alpha - beta * np.conj(alpha)
        for c_k, gamma in zip(coefficients, amplitudes):
            exponent = phase - 0.5 * abs(gamma) ** 2 - 0.5 * np.abs(shifted) ** 2 + np.conj(gamma) * shifted
            total += c_j * np.conj(c_k) * np.exp(exponent)
    return WignerField(grid, total.real / (np.pi * norm_sq))


def _laguerre_wigner(matrix: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Iterative displaced-parity matrix elements, summed against rho."""
    cutoff = matrix.shape[0]
    w_mat = np.zeros((2, cutoff) + beta.shape, dtype=np.complex128)
    w_mat[0, 0] = np.exp(-2.0 * np.abs(beta) ** 2) / np.pi
    w = np.real(matrix[0, 0]) * np.real(w_mat[0, 0])
    for n in range(1, cutoff):
        w_mat[0, n] = 2.0 * beta * w_mat[0, n - 1] / np.sqrt(n)
        w += 2.0 * np.real(matrix[0, n] * w_mat[0, n])
    for m in range(1, cutoff):
        w_mat[1, m] = (2.0 * np.conj(beta) * w_mat[0, m] - np.sqrt(m) * w_mat[0, m - 1]) / np.sqrt(m)
        w += np.real(matrix[m, m] * w_mat[1, m])
        for n in range(m + 1, cutoff):
            w_mat[1, n] = (2.0 * beta * w_mat[1, n - 1] - np.sqrt(m) * w_mat[0, n - 1]) / np.sqrt(n)
            w += 2.0 * np.real(matrix[m, n] * w_mat[1, n])
        w_mat[0] = w_mat[1]
    return w


def _parity_wigner(matrix: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """(1/pi) Tr[rho D(beta) P D(beta)^dag], one displacement per node."""
    reach = float(np.abs(beta).max()) ** 2
    n_pad = max(matrix.shape[0] - 1, int(np.ceil(4.0 * reach))) + 20
    padded = np.zeros((n_pad + 1, n_pad + 1), dtype=np.complex128)
    size = matrix.shape[0]
    padded[:size, :size] = matrix
    parity = parity_operator(n_pad).dense()
    w = np.empty(beta.shape)
    for index, b in np.ndenumerate(beta):
        d = displacement_operator(b, n_pad).dense()
        w[index] = np.trace(padded @ d @ parity @ d.conj().T).real / np.pi
    return w


def wigner_fock(rho, grid: PhaseGrid, method: str = "laguerre") -> WignerField:
    """Wigner function of a single-mode Fock density (or vector)."""
    if isinstance(rho, FockVector):
        rho = rho.projector()
    if not isinstance(rho, FockDensity) or len(rho.dims) != 1:
        raise ConfigurationError("wigner_fock needs a single-mode Fock state")
    if method not in METHODS:
        raise ConfigurationError(f"unknown Wigner method {method!r}, expected one of {METHODS}")
    leakage = rho.leakage()
    if leakage > MAX_LEAKAGE:
        raise TruncationError(f"density leakage {leakage:.3e} exceeds {MAX_LEAKAGE:g}")
    beta = grid.beta()
    logger.debug(f"wigner_fock[{method}]: n_max={rho.n_max}, grid {grid.nx}x{grid.n_p}")
    if method == "laguerre":
        values = _laguerre_wigner(np.asarray(rho.matrix), beta)
    else:
        values = _parity_wigner(np.asarray(rho.matrix), beta)
    return WignerField(grid, values)


def wigner_extrema(w: WignerField) -> WignerExtrema:
    x, p = w.grid.x, w.grid.p
    i_min, j_min = np.unravel_index(int(np.argmin(w.values)), w.values.shape)
    i_max, j_max = np.unravel_index(int(np.argmax(w.values)), w.values.shape)
    negative = np.clip(-w.values, 0.0, None)
    negative_volume = float(trapezoid(trapezoid(negative, p, axis=1), x))
    return WignerExtrema(
        min_value=float(w.values[i_min, j_min]),
        min_location=(float(x[i_min]), float(p[j_min])),
        max_value=float(w.values[i_max, j_max]),
        max_location=(float(x[i_max]), float(p[j_max])),
        negative_volume=negative_volume,
    )


def marginal_x(w: WignerField) -> np.ndarray:
    """Integral of W over p, one value per x node."""
    return trapezoid(w.values, w.grid.p, axis=1)


__all__ = [
    "VACUUM_WIDTH",
    "PhaseGrid",
    "WignerField",
    "WignerExtrema",
    "wigner_analytic",
    "wigner_fock",
    "wigner_extrema",
    "marginal_x",
]

"""Analytic algebra of finite superpositions of time-dependent coherent states.

Everything here broadcasts: ``t`` may be a scalar or a numpy array, and the
envelope centers of amplitude terms may themselves be arrays (one row per
delay), so whole (tau, t) grids are evaluated in one call.
"""

from dataclasses import dataclass, field
from typing import Iterable, Tuple, Union

import numpy as np

from gcss.physics.errors import ConfigurationError, NullStateError

SPEED_OF_LIGHT_NM_PER_FS = 299.792458
ENVELOPES = ("gaussian", "flat")

# exp(-700) is close to the smallest normal double
OVERLAP_LOG_FLOOR = -700.0
NULL_NORM = 1e-12

ArrayLike = Union[float, complex, np.ndarray]


@dataclass(frozen=True)
class PulseParams:
    """Carrier and envelope of the driving pulse."""

    wavelength_nm: float = 800.0
    duration_fs: float = 25.0
    envelope: str = "gaussian"

    def __post_init__(self):
        if not self.wavelength_nm > 0:
            raise ConfigurationError(f"wavelength must be positive, got {self.wavelength_nm}")
        if not self.duration_fs > 0:
            raise ConfigurationError(f"duration must be positive, got {self.duration_fs}")
        if self.envelope not in ENVELOPES:
            raise ConfigurationError(f"unknown envelope {self.envelope!r}, expected one of {ENVELOPES}")

    @property
    def omega(self) -> float:
        """Carrier angular frequency in rad/fs."""
        return 2.0 * np.pi * SPEED_OF_LIGHT_NM_PER_FS / self.wavelength_nm

    @property
    def optical_cycle(self) -> float:
        """Carrier period in fs."""
        return self.wavelength_nm / SPEED_OF_LIGHT_NM_PER_FS

    def with_envelope(self, envelope: str) -> "PulseParams":
        return PulseParams(self.wavelength_nm, self.duration_fs, envelope)

    def envelope_at(self, t: ArrayLike) -> np.ndarray:
        """Field envelope f(t), f(0) = 1, intensity FWHM = duration."""
        t = np.asarray(t, dtype=float)
        if self.envelope == "flat":
            return np.ones_like(t)
        return np.exp(-2.0 * np.log(2.0) * (t / self.duration_fs) ** 2)


@dataclass(frozen=True, eq=False)
class AmplitudeTerm:
    """scale * f(t - center) * exp(i w (t - phase_offset))."""

    scale: complex
    center: ArrayLike = 0.0
    phase_offset: ArrayLike = 0.0
    carrier: bool = True


@dataclass(frozen=True, eq=False)
class CompositeAmplitude:
    """Sum of enveloped carrier terms sharing one pulse."""

    terms: Tuple[AmplitudeTerm, ...]
    pulse: PulseParams = field(default_factory=PulseParams)

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ConfigurationError("a composite amplitude needs at least one term")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def single(cls, scale: complex, pulse: PulseParams) -> "CompositeAmplitude":
        return cls((AmplitudeTerm(complex(scale)),), pulse)

    @classmethod
    def constant(cls, value: complex) -> "CompositeAmplitude":
        """Time-independent amplitude."""
        return cls((AmplitudeTerm(complex(value), carrier=False),), PulseParams(envelope="flat"))

    def __call__(self, t: ArrayLike):
        return evaluate_amplitude(self, t)


@dataclass(frozen=True, eq=False)
class Component:
    coefficient: ArrayLike
    amplitude: CompositeAmplitude


@dataclass(frozen=True, eq=False)
class CoherentSuperposition:
    """Finite superposition sum_j c_j |alpha_j(t)>.

    ``weight`` is the squared norm the state had before it was normalized
    (the conditioning success probability); it is 1 for states that are
    normalized by construction.
    """

    components: Tuple[Component, ...]
    normalized: bool = True
    weight: ArrayLike = 1.0

    def __post_init__(self):
        components = tuple(self.components)
        if not components:
            raise ConfigurationError("a superposition needs at least one component")
        object.__setattr__(self, "components", components)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[complex, CompositeAmplitude]], normalized: bool = True,
                   weight: ArrayLike = 1.0) -> "CoherentSuperposition":
        return cls(tuple(Component(c, a) for c, a in pairs), normalized, weight)

    @property
    def coefficients(self) -> Tuple[ArrayLike, ...]:
        return tuple(c.coefficient for c in self.components)

    def amplitudes(self, t: ArrayLike) -> Tuple[np.ndarray, ...]:
        return tuple(np.asarray(evaluate_amplitude(c.amplitude, t)) for c in self.components)


def _squeeze(value):
    value = np.asarray(value)
    return value.item() if value.ndim == 0 else value


def coherent_overlap(beta: ArrayLike, gamma: ArrayLike):
    """<beta|gamma>, clamped to 0 where |<beta|gamma>| < exp(-700)."""
    beta = np.asarray(beta, dtype=np.complex128)
    gamma = np.asarray(gamma, dtype=np.complex128)
    exponent = -0.5 * np.abs(beta) ** 2 - 0.5 * np.abs(gamma) ** 2 + np.conj(beta) * gamma
    underflow = exponent.real < OVERLAP_LOG_FLOOR
    safe = np.where(underflow, 0.0, exponent)
    return _squeeze(np.where(underflow, 0.0, np.exp(safe)))


def evaluate_amplitude(a: CompositeAmplitude, t: ArrayLike):
    """Sum of scale_k f(t - center_k) exp(i w (t - phase_k))."""
    t = np.asarray(t, dtype=float)
    omega = a.pulse.omega
    total = np.zeros((), dtype=np.complex128)
    for term in a.terms:
        envelope = a.pulse.envelope_at(t - np.asarray(term.center, dtype=float))
        if term.carrier:
            phase = np.exp(1j * omega * (t - np.asarray(term.phase_offset, dtype=float)))
        else:
            phase = 1.0
        total = total + term.scale * envelope * phase
    return _squeeze(total)


def _gram(s: CoherentSuperposition, t: ArrayLike, p: int, q: int) -> np.ndarray:
    amplitudes = s.amplitudes(t)
    coefficients = [np.asarray(c, dtype=np.complex128) for c in s.coefficients]
    total = np.zeros((), dtype=np.complex128)
    for c_j, a_j in zip(coefficients, amplitudes):
        for c_k, a_k in zip(coefficients, amplitudes):
            total = total + (
                np.conj(c_j) * c_k * np.conj(a_j) ** p * a_k ** q
                * np.asarray(coherent_overlap(a_j, a_k))
            )
    return total


def _checked_norm_sq(gram: np.ndarray) -> np.ndarray:
    norm_sq = gram.real
    if np.any(np.sqrt(np.clip(norm_sq, 0.0, None)) < NULL_NORM):
        raise NullStateError("superposition norm below 1e-12")
    return norm_sq


def superposition_norm(s: CoherentSuperposition, t: ArrayLike = 0.0):
    """sqrt(sum_jk c_j* c_k <alpha_j(t)|alpha_k(t)>)."""
    return _squeeze(np.sqrt(_checked_norm_sq(_gram(s, t, 0, 0))))


def normal_ordered_moment(s: CoherentSuperposition, p: int, q: int, t: ArrayLike = 0.0):
    """<(a^dag)^p a^q> at time t, divided by the squared norm."""
    if p < 0 or q < 0:
        raise ConfigurationError("moment orders must be non-negative")
    norm_sq = _checked_norm_sq(_gram(s, t, 0, 0))
    return _squeeze(_gram(s, t, p, q) / norm_sq)


def mean_photon_number(s: CoherentSuperposition, t: ArrayLike = 0.0):
    return _squeeze(np.real(normal_ordered_moment(s, 1, 1, t)))


def displaced(s: CoherentSuperposition, beta: complex, t: float = 0.0) -> CoherentSuperposition:
    """D(beta) applied to the state frozen at instant ``t``.

    D(beta)|alpha> = exp(i Im(beta alpha*)) |alpha + beta>.
    """
    beta = complex(beta)
    pairs = []
    for coefficient, value in zip(s.coefficients, s.amplitudes(t)):
        if np.ndim(coefficient) or np.ndim(value):
            raise ConfigurationError("displacement needs a state at a single instant")
        value = complex(value)
        phase = np.exp(1j * (beta * value.conjugate()).imag)
        pairs.append((complex(coefficient) * phase, CompositeAmplitude.constant(value + beta)))
    return CoherentSuperposition.from_pairs(pairs, s.normalized, s.weight)


__all__ = [
    "SPEED_OF_LIGHT_NM_PER_FS",
    "PulseParams",
    "AmplitudeTerm",
    "CompositeAmplitude",
    "Component",
    "CoherentSuperposition",
    "coherent_overlap",
    "evaluate_amplitude",
    "superposition_norm",
    "normal_ordered_moment",
    "mean_photon_number",
    "displaced",
]

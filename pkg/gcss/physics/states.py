"""Builders for the light states that enter the autocorrelation and Wigner routes."""

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Tuple, Union

import numpy as np

from gcss.physics.coherent import (
    ArrayLike,
    CoherentSuperposition,
    CompositeAmplitude,
    AmplitudeTerm,
    PulseParams,
    coherent_overlap,
    evaluate_amplitude,
    NULL_NORM,
)
from gcss.physics.errors import ConfigurationError, NullStateError
from gcss.physics.fock import FockDensity, FockVector, coherent_fock


@dataclass(frozen=True, eq=False)
class GcssParams:
    """Driving amplitude, its depletion, the interferometer delay and the pulse."""

    alpha: complex = 12.0
    delta_alpha: complex = -0.24
    tau: ArrayLike = 0.0
    pulse: PulseParams = field(default_factory=PulseParams)
    xi_q_factor: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "delta_alpha", complex(self.delta_alpha))
        if abs(self.delta_alpha) > abs(self.alpha):
            raise ConfigurationError(
                f"|delta_alpha| = {abs(self.delta_alpha):.4g} exceeds |alpha| = {abs(self.alpha):.4g}"
            )
        if not 0.0 <= self.xi_q_factor <= 1.0:
            raise ConfigurationError(f"xi_q_factor must lie in [0, 1], got {self.xi_q_factor}")

    def with_tau(self, tau: ArrayLike) -> "GcssParams":
        return replace(self, tau=tau)

    def with_pulse(self, pulse: PulseParams) -> "GcssParams":
        return replace(self, pulse=pulse)


@dataclass(frozen=True, eq=False)
class CoherentMixture:
    """Incoherent two-component mixture of |psi(t, tau)> and |alpha(t)>."""

    weights: Tuple[ArrayLike, ArrayLike]
    amplitudes: Tuple[CompositeAmplitude, CompositeAmplitude]
    density: Optional[FockDensity] = None


StateBuilder = Callable[[ArrayLike, ArrayLike], Union[CoherentSuperposition, CoherentMixture]]


def interferometer_amplitude(p: GcssParams) -> CompositeAmplitude:
    half = 0.5 * (p.alpha + p.delta_alpha)
    tau = np.asarray(p.tau, dtype=float)
    return CompositeAmplitude(
        (
            AmplitudeTerm(half, center=-0.5 * tau, phase_offset=-0.5 * tau),
            AmplitudeTerm(half, center=0.5 * tau, phase_offset=0.5 * tau),
        ),
        p.pulse,
    )


def reference_amplitude(p: GcssParams) -> CompositeAmplitude:
    """alpha(t) = alpha f(t) exp(i w t): the undepleted driving field."""
    return CompositeAmplitude.single(p.alpha, p.pulse)


def interferometer_state(p: GcssParams) -> CoherentSuperposition:
    return CoherentSuperposition.from_pairs([(1.0, interferometer_amplitude(p))])


def gcss_state(p: GcssParams, t: ArrayLike) -> CoherentSuperposition:
    """|psi> - xi_q xi_IR |alpha(t)>, normalized at each t."""
    tau = np.asarray(p.tau, dtype=float)
    if p.delta_alpha == 0 and np.any(tau == 0.0):
        raise NullStateError("delta_alpha = 0 at tau = 0: the conditioned state vanishes")
    psi = interferometer_amplitude(p)
    reference = reference_amplitude(p)
    a = np.asarray(evaluate_amplitude(psi, t))
    b = np.asarray(evaluate_amplitude(reference, t))
    xi = np.asarray(coherent_overlap(b, a))
    # 1 - 2 xq |xi|^2 + xq^2 |xi|^2 without cancellation for |a - b| -> 0
    norm_sq = -np.expm1(-np.abs(a - b) ** 2) + np.abs(xi) ** 2 * (1.0 - p.xi_q_factor) ** 2
    if np.any(np.sqrt(norm_sq) < NULL_NORM):
        raise NullStateError("conditioned state norm below 1e-12: components coincide")
    norm = np.sqrt(norm_sq)
    return CoherentSuperposition.from_pairs(
        [(1.0 / norm, psi), (-p.xi_q_factor * xi / norm, reference)],
        normalized=True,
        weight=norm_sq,
    )


def mixed_state(p: GcssParams, t: ArrayLike, n_max: Optional[int] = None) -> CoherentMixture:
    """|psi><psi| + |xi_IR|^2 |alpha><alpha|, trace-normalized.

    With ``n_max`` the Fock density is built as well (scalar t and tau only).
    """
    psi = interferometer_amplitude(p)
    reference = reference_amplitude(p)
    a = np.asarray(evaluate_amplitude(psi, t))
    b = np.asarray(evaluate_amplitude(reference, t))
    overlap_sq = np.abs(np.asarray(coherent_overlap(b, a))) ** 2
    weights = (1.0 / (1.0 + overlap_sq), overlap_sq / (1.0 + overlap_sq))
    density = None
    if n_max is not None:
        if a.ndim or b.ndim:
            raise ConfigurationError("a Fock density needs scalar t and tau")
        v_psi = coherent_fock(complex(a), n_max).amplitudes
        v_ref = coherent_fock(complex(b), n_max).amplitudes
        matrix = float(weights[0]) * np.outer(v_psi, v_psi.conj()) + float(weights[1]) * np.outer(v_ref, v_ref.conj())
        density = FockDensity(matrix).normalized()
    return CoherentMixture(weights, (psi, reference), density)


def parity_cat(alpha: complex, sign: int) -> CoherentSuperposition:
    """N (|alpha> + sign |-alpha>)."""
    if sign not in (1, -1):
        raise ConfigurationError(f"sign must be +1 or -1, got {sign}")
    alpha = complex(alpha)
    if alpha == 0 and sign == -1:
        raise NullStateError("odd cat with alpha = 0 is the null vector")
    norm = 1.0 / np.sqrt(2.0 * (1.0 + sign * np.exp(-2.0 * abs(alpha) ** 2)))
    return CoherentSuperposition.from_pairs(
        [(norm, CompositeAmplitude.constant(alpha)), (sign * norm, CompositeAmplitude.constant(-alpha))]
    )


def coherent_state(alpha: complex) -> CoherentSuperposition:
    return CoherentSuperposition.from_pairs([(1.0, CompositeAmplitude.constant(alpha))])


def render_fock(s: CoherentSuperposition, t: float, n_max: int) -> FockVector:
    """sum_j c_j |alpha_j(t)> in the Fock basis (no renormalization)."""
    amplitudes = np.zeros(n_max + 1, dtype=np.complex128)
    for coefficient, value in zip(s.coefficients, s.amplitudes(t)):
        if np.ndim(coefficient) or np.ndim(value):
            raise ConfigurationError("Fock rendering needs a state at a single instant")
        amplitudes += complex(coefficient) * coherent_fock(complex(value), n_max).amplitudes
    return FockVector(amplitudes)


def interferometer_builder(p: GcssParams) -> StateBuilder:
    return lambda t, tau: interferometer_state(p.with_tau(tau))


def gcss_builder(p: GcssParams) -> StateBuilder:
    return lambda t, tau: gcss_state(p.with_tau(tau), t)


def mixture_builder(p: GcssParams) -> StateBuilder:
    return lambda t, tau: mixed_state(p.with_tau(tau), t)


def delta_alpha_from_yield(harmonic_yield: float, k: float) -> float:
    """Depletion |delta_alpha| = k sqrt(Y), returned as a negative real."""
    if harmonic_yield < 0 or k < 0:
        raise ConfigurationError("yield and proportionality constant must be non-negative")
    return -k * float(np.sqrt(harmonic_yield))


__all__ = [
    "GcssParams",
    "CoherentMixture",
    "StateBuilder",
    "interferometer_amplitude",
    "reference_amplitude",
    "interferometer_state",
    "gcss_state",
    "mixed_state",
    "parity_cat",
    "coherent_state",
    "render_fock",
    "interferometer_builder",
    "gcss_builder",
    "mixture_builder",
    "delta_alpha_from_yield",
]

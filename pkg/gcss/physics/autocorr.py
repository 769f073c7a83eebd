"""Second-order autocorrelation traces and their processing chain.

``ac_trace`` integrates <I^2>(t, tau) over the pulse for every delay,
``band_block_filter`` and ``cycle_average`` turn the interferometric trace
into the intensity trace, and ``trace_metrics`` extracts S(tau ~ 0) and the
modulation depth M.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from numpy.lib.stride_tricks import sliding_window_view

from gcss.physics.coherent import CoherentSuperposition, PulseParams, normal_ordered_moment
from gcss.physics.errors import ConfigurationError
from gcss.physics.fock import FockDensity, FockVector, expectation_value, intensity_squared_operator
from gcss.physics.states import CoherentMixture, StateBuilder

NORMALIZATIONS = ("raw", "coherent-peak")
WEIGHTINGS = ("normalized", "conditioned")
DEFAULT_MAX_WINDOW = (10.0, 30.0)
DEFAULT_MIN_WINDOW = (0.0, 10.0)
WINDOW_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Trace:
    """S(tau) samples with per-point uncertainty."""

    delays: np.ndarray
    values: np.ndarray
    sigma: Optional[np.ndarray] = None
    uniform: Optional[bool] = None

    def __post_init__(self):
        delays = np.array(self.delays, dtype=float).ravel()
        values = np.array(self.values, dtype=float).ravel()
        sigma = np.zeros_like(values) if self.sigma is None else np.array(self.sigma, dtype=float).ravel()
        if not (delays.size == values.size == sigma.size):
            raise ConfigurationError("delays, values and sigma must have equal length")
        if delays.size > 1 and np.any(np.diff(delays) <= 0):
            raise ConfigurationError("trace delays must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("trace values must be finite")
        if np.any(sigma < 0):
            raise ConfigurationError("trace sigma must be non-negative")
        uniform = self.uniform
        if uniform is None:
            steps = np.diff(delays)
            uniform = bool(steps.size == 0 or np.allclose(steps, steps[0], rtol=1e-9, atol=0.0))
        for array in (delays, values, sigma):
            array.setflags(write=False)
        object.__setattr__(self, "delays", delays)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "uniform", uniform)

    def __len__(self) -> int:
        return self.delays.size

    def scaled(self, factor: float) -> "Trace":
        return Trace(self.delays, self.values * factor, self.sigma * abs(factor), self.uniform)

    def nearest(self, tau: float) -> float:
        return float(self.values[int(np.argmin(np.abs(self.delays - tau)))])


@dataclass(frozen=True)
class TraceMetrics:
    s_zero: float
    m_depth: float
    background: float
    s_max: float
    s_min: float

    def as_dict(self) -> dict:
        return {
            "s_zero": self.s_zero,
            "m_depth": self.m_depth,
            "background": self.background,
            "s_max": self.s_max,
            "s_min": self.s_min,
        }


def intensity_squared(state, t=0.0):
    """<(a^dag)^2 a^2> + <a^dag a> for analytic or Fock states."""
    if isinstance(state, CoherentSuperposition):
        return np.real(normal_ordered_moment(state, 2, 2, t)) + np.real(normal_ordered_moment(state, 1, 1, t))
    if isinstance(state, CoherentMixture):
        total = 0.0
        for weight, amplitude in zip(state.weights, state.amplitudes):
            n = np.abs(np.asarray(amplitude(t))) ** 2
            total = total + weight * (n ** 2 + n)
        return total
    if isinstance(state, (FockVector, FockDensity)):
        if len(state.dims) != 1:
            raise ConfigurationError("intensity_squared needs a single-mode Fock state")
        return expectation_value(intensity_squared_operator(state.n_max), state).real
    raise ConfigurationError(f"unsupported state type {type(state).__name__}")


def conditioning_weight(state):
    """Success probability attached to a state (1 unless conditioned)."""
    if isinstance(state, CoherentSuperposition):
        return state.weight
    return 1.0


def time_grid(t_window: float, t_step: float) -> np.ndarray:
    """Symmetric grid spanning t_window with spacing <= t_step."""
    n = int(np.ceil(t_window / t_step - 1e-9)) + 1
    return np.linspace(-0.5 * t_window, 0.5 * t_window, n)


def _integrate(builder: StateBuilder, t: np.ndarray, taus: np.ndarray, weighting: str) -> np.ndarray:
    t_row = t[np.newaxis, :]
    tau_col = taus[:, np.newaxis]
    state = builder(t_row, tau_col)
    integrand = intensity_squared(state, t_row)
    if weighting == "conditioned":
        integrand = integrand * conditioning_weight(state)
    integrand = np.broadcast_to(integrand, (taus.size, t.size))
    dt = t[1] - t[0]
    # trapezoid with numpy's pairwise reduction along the time axis
    return dt * (integrand.sum(axis=1) - 0.5 * (integrand[:, 0] + integrand[:, -1]))


def ac_trace(
    builder: StateBuilder,
    tau_grid: Sequence[float],
    t_window: float = 125.0,
    t_step: float = 0.05,
    normalization: str = "raw",
    *,
    pulse: PulseParams,
    reference: Optional[StateBuilder] = None,
    weighting: str = "normalized",
    threads: int = 1,
    chunk_size: int = 32,
) -> Trace:
    """S(tau) = integral dt <I^2>(t, tau) on ``tau_grid``.

    Args:
        builder: state factory called with broadcastable (t, tau) arrays
        tau_grid: strictly increasing delays in fs
        t_window: total span of the time integration in fs
        t_step: maximal time step in fs
        normalization: "raw" or "coherent-peak" (divide by reference S(0))
        pulse: driving pulse, used for the sampling preconditions
        reference: coherent builder for "coherent-peak" normalization
        weighting: "normalized" or "conditioned" (times the success probability)
        threads: worker threads over delay chunks

    Returns:
        Trace on ``tau_grid``
    """
    if normalization not in NORMALIZATIONS:
        raise ConfigurationError(f"unknown normalization {normalization!r}")
    if weighting not in WEIGHTINGS:
        raise ConfigurationError(f"unknown weighting {weighting!r}")
    if pulse.envelope == "gaussian" and t_window < 4.0 * pulse.duration_fs:
        raise ConfigurationError(
            f"t_window {t_window} fs covers less than 4 envelope FWHM ({4.0 * pulse.duration_fs} fs)"
        )
    if t_step > pulse.optical_cycle / 20.0:
        raise ConfigurationError(
            f"t_step {t_step} fs undersamples the {pulse.optical_cycle:.4f} fs optical cycle"
        )
    if normalization == "coherent-peak" and reference is None:
        raise ConfigurationError("coherent-peak normalization needs a reference builder")
    taus = np.asarray(tau_grid, dtype=float).ravel()
    if taus.size == 0 or np.any(np.diff(taus) <= 0):
        raise ConfigurationError("tau grid must be non-empty and strictly increasing")

    t = time_grid(t_window, t_step)
    chunks = [taus[i:i + chunk_size] for i in range(0, taus.size, chunk_size)]
    logger.debug(f"ac_trace: {taus.size} delays x {t.size} times, {len(chunks)} chunks, {threads} thread(s)")

    def work(chunk: np.ndarray) -> np.ndarray:
        return _integrate(builder, t, chunk, weighting)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(chunk) for chunk in chunks]
    values = np.concatenate(parts)

    if normalization == "coherent-peak":
        peak = float(_integrate(reference, t, np.zeros(1), weighting)[0])
        values = values / peak
    return Trace(taus, values)


def band_block_filter(tr: Trace, block_above: float = 0.2) -> Trace:
    """Remove every Fourier component above ``block_above`` fs^-1.

    Non-uniform delays are first interpolated onto a uniform grid. The trace
    is mirrored before the transform so that its periodic continuation has
    no jump at the ends.
    """
    if len(tr) < 64:
        raise ConfigurationError(f"band-block filtering needs >= 64 points, got {len(tr)}")
    if np.any(np.diff(tr.delays) <= 0):
        raise ConfigurationError("trace delays must be strictly increasing")
    delays = np.linspace(tr.delays[0], tr.delays[-1], len(tr))
    values = np.interp(delays, tr.delays, tr.values)
    sigma = np.interp(delays, tr.delays, tr.sigma)
    step = delays[1] - delays[0]

    mirrored = np.concatenate([values, values[-2:0:-1]])
    spectrum = np.fft.rfft(mirrored)
    frequencies = np.fft.rfftfreq(mirrored.size, d=step)
    spectrum[np.abs(frequencies) > block_above] = 0.0
    filtered = np.fft.irfft(spectrum, n=mirrored.size)[: values.size]
    return Trace(delays, filtered, sigma, uniform=True)


def cycle_average(tr: Trace, points_per_cycle: int = 25) -> Trace:
    """Centered sliding mean over one interferogram cycle.

    sigma_out is the window standard deviation over sqrt(points_per_cycle).
    """
    if points_per_cycle < 2:
        raise ConfigurationError("points_per_cycle must be >= 2")
    if points_per_cycle > len(tr):
        raise ConfigurationError(f"window of {points_per_cycle} points is longer than the trace ({len(tr)})")
    left = (points_per_cycle - 1) // 2
    right = points_per_cycle - 1 - left
    padded = np.pad(tr.values, (left, right), mode="edge")
    windows = sliding_window_view(padded, points_per_cycle)
    mean = windows.mean(axis=-1)
    sigma = windows.std(axis=-1, ddof=1) / np.sqrt(points_per_cycle)
    return Trace(tr.delays, mean, sigma, tr.uniform)


def intensity_trace(raw: Trace, block_above: float = 0.2, points_per_cycle: int = 25) -> Trace:
    """Interferometric trace -> cycle-averaged intensity trace."""
    return cycle_average(band_block_filter(raw, block_above), points_per_cycle)


def _contrast(iac: Trace, reference: Trace) -> np.ndarray:
    """S(tau) over the reference trace on the same delays."""
    if len(reference) != len(iac) or not np.allclose(reference.delays, iac.delays, rtol=0.0, atol=WINDOW_TOL):
        raise ConfigurationError("contrast reference must share the trace delays")
    if np.any(reference.values <= 0):
        raise ConfigurationError("contrast reference must be positive")
    return iac.values / reference.values


def trace_metrics(
    iac: Trace,
    max_window: Tuple[float, float] = DEFAULT_MAX_WINDOW,
    min_window: Tuple[float, float] = DEFAULT_MIN_WINDOW,
    background_fraction: float = 0.05,
    reference: Optional[Trace] = None,
) -> TraceMetrics:
    """S(0), modulation depth M = 2 (S_max - S_min) / (S_max + S_min) and plateau.

    With ``reference`` (the QS-off trace at the same depletion) the extrema
    are taken on S / S_ref, so a trace that only follows the reference
    envelope has M = 0. The windows share |tau| = max_window[0]; on a grid
    holding that delay M is never negative.
    """
    magnitude = np.abs(iac.delays)
    max_mask = (magnitude >= max_window[0] - WINDOW_TOL) & (magnitude <= max_window[1] + WINDOW_TOL)
    min_mask = (magnitude >= min_window[0] - WINDOW_TOL) & (magnitude <= min_window[1] + WINDOW_TOL)
    if not max_mask.any() or not min_mask.any():
        raise ConfigurationError("extremum windows contain no delays")
    profile = iac.values if reference is None else _contrast(iac, reference)
    s_max = float(profile[max_mask].max())
    s_min = float(profile[min_mask].min())
    m_depth = 2.0 * (s_max - s_min) / (s_max + s_min)

    n_tail = max(1, int(round(background_fraction * len(iac))))
    tail = np.argsort(magnitude)[-n_tail:]
    background = float(iac.values[tail].mean())
    if not background > 0:
        raise ConfigurationError("trace background is not positive")
    return TraceMetrics(
        s_zero=iac.nearest(0.0),
        m_depth=m_depth,
        background=background,
        s_max=s_max,
        s_min=s_min,
    )


__all__ = [
    "NORMALIZATIONS",
    "WEIGHTINGS",
    "Trace",
    "TraceMetrics",
    "intensity_squared",
    "conditioning_weight",
    "time_grid",
    "ac_trace",
    "band_block_filter",
    "cycle_average",
    "intensity_trace",
    "trace_metrics",
]

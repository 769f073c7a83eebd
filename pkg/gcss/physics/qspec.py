"""Monte-Carlo model of the quantum-spectrometer conditioning.

Each laser shot carries a pre-interaction monitor reading ``s_0``, the
transmitted IR reading ``s_ir`` and the harmonic reading ``s_hh``. A harmonic
event of order q with N_q photons removes q * A * N_q IR photons. Shots are
stored column-wise in a ``ShotBatch``; the selection chain is

    stability_filter -> balance_variances -> select_anticorrelated
    -> photon_loss_histogram -> find_loss_peaks
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Tuple

import numpy as np
from loguru import logger
from scipy.ndimage import gaussian_filter1d
from scipy.signal import find_peaks

from gcss.physics.errors import ConfigurationError, DegenerateBatchError

EMISSIONS = ("fixed", "poisson")
BLOCK_SIZE = 65536
MIN_HISTOGRAM_SHOTS = 100
DEFAULT_TARGET_FRACTION = 0.004
# robust sigma of a Gaussian from its median absolute deviation
MAD_TO_SIGMA = 1.4826


@dataclass(frozen=True)
class QspecParams:
    """Forward-model knobs; photon numbers are pre-attenuation.

    Every HHG event emits exactly ``n_q`` photons. ``emission`` sets the detected
    count: ``"poisson"`` draws it with mean n_q / a_hh, ``"fixed"`` thins n_q
    binomially.
    """

    n_shots: int = 500_000
    ir_mean: float = 1e5
    ir_fluct_sigma: float = 0.01
    hhg_prob: float = 0.006
    n_q: int = 100
    q_orders: Tuple[int, ...] = (11, 13)
    a_hh: float = 1.0
    b_ir: float = 1.0
    absorption_a: float = 1.0
    ir_noise: float = 20.0
    hh_noise: float = 2.0
    emission: str = "poisson"

    def __post_init__(self):
        object.__setattr__(self, "q_orders", tuple(int(q) for q in self.q_orders))
        if self.n_shots < 1:
            raise ConfigurationError("n_shots must be positive")
        if not 0.0 <= self.hhg_prob <= 1.0:
            raise ConfigurationError(f"hhg_prob must lie in [0, 1], got {self.hhg_prob}")
        if self.a_hh < 1.0 or self.b_ir < 1.0:
            raise ConfigurationError("attenuation factors must be >= 1")
        if not self.q_orders or any(q < 11 or q % 2 == 0 for q in self.q_orders):
            raise ConfigurationError(f"harmonic orders must be odd and >= 11, got {self.q_orders}")
        if self.n_q < 0 or self.ir_mean < 0 or self.ir_fluct_sigma < 0:
            raise ConfigurationError("n_q, ir_mean and ir_fluct_sigma must be non-negative")
        if self.ir_noise < 0 or self.hh_noise < 0:
            raise ConfigurationError("noise floors must be non-negative")
        if not self.absorption_a > 0:
            raise ConfigurationError("absorption factor A must be positive")
        if self.emission not in EMISSIONS:
            raise ConfigurationError(f"unknown emission {self.emission!r}, expected one of {EMISSIONS}")


@dataclass(frozen=True)
class ShotRecord:
    s_ir: float
    s_hh: float
    s_0: float = float("nan")
    is_hhg_event: Optional[bool] = None
    ir_loss: Optional[float] = None


@dataclass(frozen=True, eq=False)
class ShotBatch:
    """Column storage for many shots.

    ``is_hhg_event`` and ``ir_loss`` are simulation truth and may be None for
    imported data. ``hh_scale`` accumulates the variance-balancing factor.
    """

    s_ir: np.ndarray
    s_hh: np.ndarray
    s_0: Optional[np.ndarray] = None
    is_hhg_event: Optional[np.ndarray] = None
    ir_loss: Optional[np.ndarray] = None
    b_ir: float = 1.0
    hh_scale: float = 1.0

    def __post_init__(self):
        s_ir = np.asarray(self.s_ir, dtype=float)
        n = s_ir.size
        columns = {"s_ir": s_ir, "s_hh": np.asarray(self.s_hh, dtype=float)}
        if self.s_0 is not None:
            columns["s_0"] = np.asarray(self.s_0, dtype=float)
        if self.is_hhg_event is not None:
            columns["is_hhg_event"] = np.asarray(self.is_hhg_event, dtype=bool)
        if self.ir_loss is not None:
            columns["ir_loss"] = np.asarray(self.ir_loss, dtype=float)
        for name, column in columns.items():
            if column.shape != (n,):
                raise ConfigurationError(f"column {name} has shape {column.shape}, expected ({n},)")
            object.__setattr__(self, name, column)
        if np.any(columns["s_ir"] < 0) or np.any(columns["s_hh"] < 0):
            raise ConfigurationError("photocurrents must be non-negative")

    def __len__(self) -> int:
        return self.s_ir.size

    @property
    def has_truth(self) -> bool:
        return self.is_hhg_event is not None

    def subset(self, mask: np.ndarray) -> "ShotBatch":
        def pick(column):
            return None if column is None else column[mask]

        return replace(
            self,
            s_ir=self.s_ir[mask],
            s_hh=self.s_hh[mask],
            s_0=pick(self.s_0),
            is_hhg_event=pick(self.is_hhg_event),
            ir_loss=pick(self.ir_loss),
        )

    def records(self) -> Iterator[ShotRecord]:
        for i in range(len(self)):
            yield ShotRecord(
                s_ir=float(self.s_ir[i]),
                s_hh=float(self.s_hh[i]),
                s_0=float(self.s_0[i]) if self.s_0 is not None else float("nan"),
                is_hhg_event=bool(self.is_hhg_event[i]) if self.is_hhg_event is not None else None,
                ir_loss=float(self.ir_loss[i]) if self.ir_loss is not None else None,
            )

    def event_fraction(self) -> float:
        if not self.has_truth:
            raise ConfigurationError("batch carries no truth flags")
        if len(self) == 0:
            raise DegenerateBatchError("empty batch")
        return float(self.is_hhg_event.mean())


@dataclass(frozen=True, eq=False)
class Selection:
    batch: ShotBatch
    mask: np.ndarray
    band_halfwidth: float
    min_excursion: Optional[float]

    @property
    def retained_fraction(self) -> float:
        return float(self.mask.mean()) if self.mask.size else 0.0


@dataclass(frozen=True, eq=False)
class PnHistogram:
    edges: np.ndarray
    probabilities: np.ndarray
    n_shots: int = 0

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        probabilities = np.asarray(self.probabilities, dtype=float)
        if edges.size != probabilities.size + 1:
            raise ConfigurationError("histogram needs len(edges) == len(probabilities) + 1")
        if abs(probabilities.sum() - 1.0) > 1e-9:
            raise ConfigurationError(f"probabilities sum to {probabilities.sum():.12f}")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "probabilities", probabilities)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def bin_width(self) -> float:
        return float(self.edges[1] - self.edges[0])


def _block_rng(seed: int, block: int) -> np.random.Generator:
    """Counter-based stream for one block of shots, independent of scheduling."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _synthesize_block(p: QspecParams, seed: int, block: int, size: int):
    rng = _block_rng(seed, block)
    n_ir = np.clip(p.ir_mean * (1.0 + p.ir_fluct_sigma * rng.standard_normal(size)), 0.0, None)
    events = rng.random(size) < p.hhg_prob
    orders = np.asarray(p.q_orders)[rng.integers(0, len(p.q_orders), size)]
    n_q = np.where(events, p.n_q, 0)
    loss = orders * p.absorption_a * n_q
    # emitted number is fixed; "poisson" makes the detected count shot-noise limited
    if p.emission == "poisson":
        detected = rng.poisson(n_q / p.a_hh)
    else:
        detected = rng.binomial(n_q, 1.0 / p.a_hh)

    s_0 = np.clip(n_ir / p.b_ir + p.ir_noise * rng.standard_normal(size), 0.0, None)
    s_ir = np.clip((n_ir - loss) / p.b_ir + p.ir_noise * rng.standard_normal(size), 0.0, None)
    s_hh = np.clip(detected + p.hh_noise * rng.standard_normal(size), 0.0, None)
    return s_0, s_ir, s_hh, events, loss.astype(float)


def synthesize_shots(p: QspecParams, seed: int, threads: int = 1) -> ShotBatch:
    """Draw ``p.n_shots`` shots; identical seeds give identical batches."""
    blocks = [(b, min(BLOCK_SIZE, p.n_shots - b * BLOCK_SIZE)) for b in range(-(-p.n_shots // BLOCK_SIZE))]

    def work(item):
        block, size = item
        return _synthesize_block(p, seed, block, size)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, blocks))
    else:
        parts = [work(item) for item in blocks]
    s_0, s_ir, s_hh, events, loss = (np.concatenate(column) for column in zip(*parts))
    logger.debug(f"synthesize_shots: {p.n_shots} shots in {len(blocks)} blocks, {int(events.sum())} events")
    return ShotBatch(s_ir, s_hh, s_0, events, loss, b_ir=p.b_ir)


def stability_filter(shots: ShotBatch, threshold: float = 0.005) -> ShotBatch:
    """Keep shots whose monitor reading is within ``threshold`` of the batch mean."""
    if not threshold > 0:
        raise ConfigurationError("stability threshold must be positive")
    if len(shots) == 0:
        raise DegenerateBatchError("empty batch")
    reading = shots.s_0 if shots.s_0 is not None else shots.s_ir
    mean = reading.mean()
    if not mean > 0:
        raise DegenerateBatchError("monitor readings have zero mean")
    keep = np.abs(reading - mean) < threshold * mean
    if not keep.any():
        raise DegenerateBatchError(f"no shot within {threshold:.3%} of the mean")
    logger.debug(f"stability_filter: kept {keep.mean():.3%} at threshold {threshold:g}")
    return shots.subset(keep)


def balance_variances(shots: ShotBatch) -> ShotBatch:
    """Rescale s_hh so that both channels have the same variance."""
    if len(shots) < 2:
        raise DegenerateBatchError("balancing needs at least 2 shots")
    std_ir = shots.s_ir.std()
    std_hh = shots.s_hh.std()
    if std_ir == 0 or std_hh == 0:
        raise DegenerateBatchError("a channel has zero variance")
    scale = std_ir / std_hh
    return replace(shots, s_hh=shots.s_hh * scale, hh_scale=shots.hh_scale * scale)


def _diagonal_coordinates(shots: ShotBatch) -> Tuple[np.ndarray, np.ndarray]:
    """(distance across the -45 degree line, excursion along it towards HH gain)."""
    d_ir = shots.s_ir - shots.s_ir.mean()
    d_hh = shots.s_hh - shots.s_hh.mean()
    return d_ir + d_hh, 0.5 * (d_hh - d_ir)


def default_min_excursion(shots: ShotBatch, n_sigma: float = 5.0) -> float:
    """n_sigma robust widths of the excursion distribution."""
    _, excursion = _diagonal_coordinates(shots)
    spread = MAD_TO_SIGMA * np.median(np.abs(excursion - np.median(excursion)))
    return float(np.median(excursion) + n_sigma * spread)


def select_anticorrelated(
    shots: ShotBatch, band_halfwidth: float, min_excursion: Optional[float] = None
) -> Selection:
    """Shots within ``band_halfwidth`` of the anticorrelation diagonal.

    With ``min_excursion`` only shots displaced along the diagonal towards
    harmonic gain and IR deficit by more than that amount are kept, which
    drops the no-event bulk sitting at the origin.
    """
    if not band_halfwidth > 0:
        raise ConfigurationError("band half width must be positive")
    across, along = _diagonal_coordinates(shots)
    mask = np.abs(across) < band_halfwidth
    if min_excursion is not None:
        mask &= along > min_excursion
    return Selection(shots.subset(mask), mask, float(band_halfwidth), min_excursion)


def calibrate_band(
    shots: ShotBatch, target_fraction: float = DEFAULT_TARGET_FRACTION, min_excursion: Optional[float] = None
) -> float:
    """Band half width that retains ``target_fraction`` of ``shots``."""
    if not 0 < target_fraction <= 1:
        raise ConfigurationError("target fraction must lie in (0, 1]")
    across, along = _diagonal_coordinates(shots)
    candidates = np.abs(across)
    if min_excursion is not None:
        candidates = candidates[along > min_excursion]
    if candidates.size == 0:
        raise DegenerateBatchError("no shot passes the excursion gate")
    ordered = np.sort(candidates)
    wanted = max(1, int(round(target_fraction * len(shots))))
    if wanted >= ordered.size:
        logger.warning(
            f"⚠️ only {ordered.size / len(shots):.3%} of shots pass the gate, "
            f"below the {target_fraction:.3%} target"
        )
        return float(ordered[-1] * (1.0 + 1e-12) + 1e-12)
    return float(0.5 * (ordered[wanted - 1] + ordered[wanted]))


def photon_loss_histogram(
    selected: ShotBatch, bin_width: float, baseline: Optional[float] = None
) -> PnHistogram:
    """P_n of the de-attenuated IR loss of the selected shots.

    The loss of each shot is measured against its own monitor reading when
    available, otherwise against ``baseline`` (a batch mean of s_ir).
    """
    if not bin_width > 0:
        raise ConfigurationError("bin width must be positive")
    if len(selected) < MIN_HISTOGRAM_SHOTS:
        raise DegenerateBatchError(f"{len(selected)} selected shots, need >= {MIN_HISTOGRAM_SHOTS}")
    if baseline is not None:
        reference = np.full(len(selected), float(baseline))
    elif selected.s_0 is not None:
        reference = selected.s_0
    else:
        raise ConfigurationError("no monitor readings: pass a baseline")
    loss = (reference - selected.s_ir) * selected.b_ir
    low = np.floor(loss.min() / bin_width - 0.5) + 0.5
    high = np.ceil(loss.max() / bin_width + 0.5) - 0.5
    edges = np.arange(low, high + 1.0) * bin_width
    counts, edges = np.histogram(loss, bins=edges)
    return PnHistogram(edges, counts / counts.sum(), len(selected))


def find_loss_peaks(hist: PnHistogram, min_prominence: float = 0.2, smoothing_bins: float = 1.0) -> np.ndarray:
    """Peak positions of P_n, refined by a +-2 bin centroid."""
    smooth = gaussian_filter1d(hist.probabilities, smoothing_bins) if smoothing_bins > 0 else hist.probabilities
    padded = np.concatenate([[0.0], smooth, [0.0]])
    indices, _ = find_peaks(padded, prominence=min_prominence * smooth.max())
    indices = indices - 1
    centers = hist.centers
    positions = []
    for i in indices:
        window = slice(max(i - 2, 0), min(i + 3, centers.size))
        weights = hist.probabilities[window]
        positions.append(float(np.average(centers[window], weights=weights)) if weights.sum() > 0 else centers[i])
    return np.array(sorted(positions))


def enrichment(selected: ShotBatch, batch: ShotBatch) -> float:
    """Event fraction among ``selected`` over that of ``batch``."""
    base = batch.event_fraction()
    if base == 0:
        raise DegenerateBatchError("batch contains no events")
    return selected.event_fraction() / base


@dataclass(frozen=True, eq=False)
class QspecResult:
    """Everything the conditioning chain produces for one batch."""

    shots: ShotBatch
    filtered: ShotBatch
    selection: Selection
    histogram: PnHistogram
    peaks: np.ndarray
    report: dict = field(default_factory=dict)


def run_chain(
    shots: ShotBatch,
    stability_threshold: float = 0.005,
    target_fraction: float = DEFAULT_TARGET_FRACTION,
    bin_width: float = 20.0,
    band_halfwidth: Optional[float] = None,
    min_excursion: Optional[float] = None,
    n_sigma: float = 5.0,
) -> QspecResult:
    """Filter, balance, select and histogram one batch."""
    filtered = balance_variances(stability_filter(shots, stability_threshold))
    gate = default_min_excursion(filtered, n_sigma) if min_excursion is None else min_excursion
    band = calibrate_band(filtered, target_fraction, gate) if band_halfwidth is None else band_halfwidth
    selection = select_anticorrelated(filtered, band, gate)
    histogram = photon_loss_histogram(selection.batch, bin_width)
    peaks = find_loss_peaks(histogram)

    report = {
        "n_shots": len(shots),
        "stable_fraction": len(filtered) / len(shots),
        "hh_scale": filtered.hh_scale,
        "band_halfwidth": band,
        "min_excursion": gate,
        "retained_fraction": selection.retained_fraction,
        "n_selected": len(selection.batch),
        "peaks": peaks.tolist(),
        "peak_spacings": np.diff(peaks).tolist(),
    }
    if shots.has_truth:
        report["event_fraction"] = filtered.event_fraction()
        report["enrichment"] = enrichment(selection.batch, filtered)
    return QspecResult(shots, filtered, selection, histogram, peaks, report)


__all__ = [
    "QspecParams",
    "ShotRecord",
    "ShotBatch",
    "Selection",
    "PnHistogram",
    "QspecResult",
    "synthesize_shots",
    "stability_filter",
    "balance_variances",
    "default_min_excursion",
    "select_anticorrelated",
    "calibrate_band",
    "photon_loss_histogram",
    "find_loss_peaks",
    "enrichment",
    "run_chain",
]

"""Configuration management for the simulation runner.

Two layers: process ``Settings`` from the environment (prefix ``GCSS_``, optional
``.env``), and the per-experiment ``ExperimentConfig`` read from an INI file.
Experiment values resolve as model defaults < config file < command-line flags.
"""

import configparser
from pathlib import Path
from typing import List, Optional, Tuple, Union, get_args, get_origin

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings

from gcss.physics.coherent import PulseParams
from gcss.physics.errors import ConfigurationError
from gcss.physics.qspec import QspecParams
from gcss.physics.shg import ShgSystem
from gcss.physics.states import GcssParams, delta_alpha_from_yield
from gcss.physics.wigner import VACUUM_WIDTH, PhaseGrid


class Settings(BaseSettings):
    """Process settings loaded from environment variables."""

    log_level: str = Field(default="INFO", description="Logging level")
    log_file: Optional[str] = Field(default=None, description="Optional rotating log file")
    threads: int = Field(default=1, ge=1, description="Default worker threads")
    output_dir: str = Field(default="results", description="Default output directory")

    class Config:
        """Pydantic settings configuration."""
        env_prefix = "GCSS_"
        env_file = ".env"
        env_file_encoding = "utf-8"
        case_sensitive = False
        extra = "ignore"


def _is_sequence(annotation) -> bool:
    origin = get_origin(annotation)
    if origin in (list, tuple, List, Tuple):
        return True
    if origin is Union:
        return any(_is_sequence(arg) for arg in get_args(annotation) if arg is not type(None))
    return False


class Section(BaseModel):
    """One ``[section]`` of the experiment file; unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    @field_validator("*", mode="before")
    @classmethod
    def _split_lists(cls, value, info):
        annotation = cls.model_fields[info.field_name].annotation
        if isinstance(value, str) and value.strip().lower() == "none" and type(None) in get_args(annotation):
            return None
        if isinstance(value, str) and _is_sequence(annotation):
            return [item.strip() for item in value.split(",") if item.strip()]
        return value


class ExperimentSection(Section):
    name: str = "reference"
    seed: int = 0
    out: Optional[str] = None
    threads: Optional[int] = Field(default=None, ge=1)


class PulseSection(Section):
    wavelength_nm: float = 800.0
    duration_fs: float = 25.0
    envelope: str = "gaussian"


class GcssSection(Section):
    alpha: float = 12.0
    delta_alpha: List[float] = [-0.24, -1.44]
    xi_q_factor: float = 1.0
    harmonic_yield: Optional[List[float]] = None
    yield_constant: float = 1.0


class TraceSection(Section):
    tau_min: float = -80.0
    tau_max: float = 80.0
    tau_step: float = 0.1
    t_window: float = 125.0
    t_step: float = 0.05
    normalization: str = "coherent-peak"
    weighting: str = "conditioned"
    block_above: float = 0.2
    points_per_cycle: int = 25
    max_window: Tuple[float, float] = (10.0, 30.0)
    min_window: Tuple[float, float] = (0.0, 10.0)
    chunk_size: int = Field(default=32, ge=1)
    states: List[str] = ["coherent", "gcss", "mixture"]

    @field_validator("states")
    @classmethod
    def _known_states(cls, value):
        unknown = set(value) - {"coherent", "gcss", "mixture"}
        if unknown:
            raise ValueError(f"unknown state kinds {sorted(unknown)}")
        return value


class WignerSection(Section):
    half_width: float = 6.0 * VACUUM_WIDTH
    points: int = 201
    center: str = "alpha"
    method: str = "laguerre"

    @field_validator("center")
    @classmethod
    def _known_center(cls, value):
        if value not in ("alpha", "origin"):
            raise ValueError("center must be 'alpha' or 'origin'")
        return value


class SweepSection(Section):
    alphas: List[float] = [12.0, 30.0]
    delta_alpha_start: float = 0.0
    delta_alpha_stop: float = 3.0
    delta_alpha_step: float = 0.05
    deviation_threshold: float = 0.01


class ShgSection(Section):
    alpha: float = 4.0
    delta_alpha: float = -0.24
    n_max_w: int = 60
    n_max_2w: int = 30
    chi: float = 1.0
    t_final: float = 0.05
    target_n2w: Optional[float] = 3.0
    snapshots: int = 21
    tol: float = 1e-10
    method: str = "expm"
    inputs: List[str] = ["coherent", "gcss"]
    wigner_half_width: float = 8.0 * VACUUM_WIDTH
    wigner_points: int = 101


class QspecSection(Section):
    n_shots: int = 500_000
    ir_mean: float = 1e5
    ir_fluct_sigma: float = 0.01
    hhg_prob: float = 0.006
    n_q: int = 100
    q_orders: List[int] = [11, 13]
    a_hh: float = 1.0
    b_ir: float = 1.0
    absorption_a: float = 1.0
    ir_noise: float = 20.0
    hh_noise: float = 2.0
    emission: str = "poisson"
    stability_threshold: float = 0.005
    target_fraction: float = 0.004
    bin_width: float = 20.0
    n_sigma: float = 5.0
    band_halfwidth: Optional[float] = None
    min_excursion: Optional[float] = None


class ExperimentConfig(BaseModel):
    """Resolved experiment: every physical default is the reference setup."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    experiment: ExperimentSection = ExperimentSection()
    pulse: PulseSection = PulseSection()
    gcss: GcssSection = GcssSection()
    trace: TraceSection = TraceSection()
    wigner: WignerSection = WignerSection()
    sweep: SweepSection = SweepSection()
    shg: ShgSection = ShgSection()
    qspec: QspecSection = QspecSection()

    @classmethod
    def load(cls, path: Optional[Union[str, Path]] = None) -> "ExperimentConfig":
        """Read an INI file; ``None`` gives the defaults."""
        if path is None:
            return cls()
        path = Path(path)
        if not path.is_file():
            raise ConfigurationError(f"config file not found: {path}")
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        parser.optionxform = str
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as e:
            raise ConfigurationError(f"{path}: {e}") from e
        sections = {name: dict(parser.items(name)) for name in parser.sections()}
        return cls.from_mapping(sections, source=str(path))

    @classmethod
    def from_mapping(cls, sections: dict, source: str = "<mapping>") -> "ExperimentConfig":
        unknown = set(sections) - set(cls.model_fields)
        if unknown:
            raise ConfigurationError(f"{source}: unknown sections {sorted(unknown)}")
        try:
            return cls(**sections)
        except ValidationError as e:
            raise ConfigurationError(f"{source}: {_format_errors(e)}") from e

    def with_overrides(self, seed: Optional[int] = None, out: Optional[str] = None,
                       threads: Optional[int] = None) -> "ExperimentConfig":
        """Apply command-line flags on top of the file values."""
        changes = {k: v for k, v in (("seed", seed), ("out", out), ("threads", threads)) if v is not None}
        if not changes:
            return self
        try:
            experiment = ExperimentSection(**{**self.experiment.model_dump(), **changes})
        except ValidationError as e:
            raise ConfigurationError(_format_errors(e)) from e
        return self.model_copy(update={"experiment": experiment})

    def resolved(self) -> dict:
        return self.model_dump(mode="json")

    def output_dir(self, settings: "Settings") -> Path:
        return Path(self.experiment.out or settings.output_dir)

    def thread_count(self, settings: "Settings") -> int:
        return self.experiment.threads or settings.threads

    def pulse_params(self) -> PulseParams:
        p = self.pulse
        return PulseParams(p.wavelength_nm, p.duration_fs, p.envelope)

    def delta_alphas(self) -> List[float]:
        """Depletion values of the trace run, derived from yields when given."""
        g = self.gcss
        if g.harmonic_yield:
            return [delta_alpha_from_yield(y, g.yield_constant) for y in g.harmonic_yield]
        return list(g.delta_alpha)

    def gcss_params(self, delta_alpha: float, alpha: Optional[float] = None) -> GcssParams:
        return GcssParams(
            alpha=self.gcss.alpha if alpha is None else alpha,
            delta_alpha=delta_alpha,
            pulse=self.pulse_params(),
            xi_q_factor=self.gcss.xi_q_factor,
        )

    def tau_grid(self) -> np.ndarray:
        t = self.trace
        if not t.tau_max > t.tau_min or not t.tau_step > 0:
            raise ConfigurationError("tau grid needs tau_max > tau_min and tau_step > 0")
        n = int(round((t.tau_max - t.tau_min) / t.tau_step)) + 1
        return np.linspace(t.tau_min, t.tau_max, n)

    def sweep_grid(self) -> np.ndarray:
        s = self.sweep
        if s.delta_alpha_stop < s.delta_alpha_start or not s.delta_alpha_step > 0:
            raise ConfigurationError("sweep grid needs stop >= start and step > 0")
        n = int(round((s.delta_alpha_stop - s.delta_alpha_start) / s.delta_alpha_step)) + 1
        return np.linspace(s.delta_alpha_start, s.delta_alpha_stop, n)

    def phase_grid(self, alpha: complex = 0.0) -> PhaseGrid:
        w = self.wigner
        center = alpha if w.center == "alpha" else 0.0
        return PhaseGrid.around(center, w.half_width, w.points)

    def shg_system(self) -> ShgSystem:
        s = self.shg
        return ShgSystem(s.n_max_w, s.n_max_2w, s.chi, s.t_final)

    def shg_params(self) -> GcssParams:
        return GcssParams(
            alpha=self.shg.alpha,
            delta_alpha=self.shg.delta_alpha,
            pulse=self.pulse_params().with_envelope("flat"),
            xi_q_factor=self.gcss.xi_q_factor,
        )

    def qspec_params(self) -> QspecParams:
        q = self.qspec
        return QspecParams(
            n_shots=q.n_shots,
            ir_mean=q.ir_mean,
            ir_fluct_sigma=q.ir_fluct_sigma,
            hhg_prob=q.hhg_prob,
            n_q=q.n_q,
            q_orders=tuple(q.q_orders),
            a_hh=q.a_hh,
            b_ir=q.b_ir,
            absorption_a=q.absorption_a,
            ir_noise=q.ir_noise,
            hh_noise=q.hh_noise,
            emission=q.emission,
        )


def _format_errors(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"])
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)


# Create global settings instance
try:
    settings = Settings()
except Exception as e:
    raise ConfigurationError(f"invalid GCSS_* environment settings: {e}") from e


__all__ = ['Settings', 'settings', 'ExperimentConfig']

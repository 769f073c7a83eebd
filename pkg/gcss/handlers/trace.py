"""Handlers for the autocorrelation commands: ``trace`` and ``sweep``."""

from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np
from loguru import logger

from gcss.config import ExperimentConfig
from gcss.handlers.router import Command, CommandRouter
from gcss.physics.autocorr import Trace, TraceMetrics, ac_trace, intensity_trace, trace_metrics
from gcss.physics.states import StateBuilder, gcss_builder, interferometer_builder, mixture_builder
from gcss.physics.wigner import wigner_analytic, wigner_extrema
from gcss.utils.io import write_columns, write_json, write_trace_csv, write_wigner_csv
from gcss.utils.messages import messages


@dataclass(frozen=True)
class TraceRun:
    raw: Trace
    iac: Trace
    metrics: TraceMetrics


def state_builders(config: ExperimentConfig, delta_alpha: float, alpha: Optional[float] = None) -> Dict[str, StateBuilder]:
    """Builders for the QS-off interferometer output, the GCSS and the classical mixture.

    All three share the depleted amplitude |alpha + delta_alpha|.
    """
    params = config.gcss_params(delta_alpha, alpha)
    return {
        "coherent": interferometer_builder(params),
        "gcss": gcss_builder(params),
        "mixture": mixture_builder(params),
    }


def run_trace(
    config: ExperimentConfig,
    builder: StateBuilder,
    reference: StateBuilder,
    threads: int = 1,
    iac_scale: float = 1.0,
    contrast: Optional[Trace] = None,
) -> TraceRun:
    """Raw trace, cycle-averaged trace (times ``iac_scale``) and its metrics.

    ``contrast`` is the QS-off intensity trace M is measured against.
    """
    t = config.trace
    raw = ac_trace(
        builder,
        config.tau_grid(),
        t.t_window,
        t.t_step,
        t.normalization,
        pulse=config.pulse_params(),
        reference=reference,
        weighting=t.weighting,
        threads=threads,
        chunk_size=t.chunk_size,
    )
    iac = intensity_trace(raw, t.block_above, t.points_per_cycle).scaled(iac_scale)
    return TraceRun(raw, iac, trace_metrics(iac, t.max_window, t.min_window, reference=contrast))


@dataclass(frozen=True)
class QsOffReference:
    """QS-off run at one depletion and the factor that puts its S(0) at 1."""

    builder: StateBuilder
    run: TraceRun
    scale: float

    def measure(self, config: ExperimentConfig, builder: StateBuilder, threads: int = 1) -> TraceRun:
        """Trace of ``builder`` on the same scale, with M taken against this run."""
        return run_trace(config, builder, self.builder, threads, self.scale, self.run.iac)


def qs_off_reference(
    config: ExperimentConfig, delta_alpha: float, alpha: Optional[float] = None, threads: int = 1
) -> QsOffReference:
    """Interferometer output without conditioning, normalized to S(0) = 1."""
    builder = state_builders(config, delta_alpha, alpha)["coherent"]
    run = run_trace(config, builder, builder, threads)
    scale = 1.0 / run.iac.nearest(0.0) if config.trace.normalization == "coherent-peak" else 1.0
    iac = run.iac.scaled(scale)
    t = config.trace
    run = TraceRun(run.raw, iac, trace_metrics(iac, t.max_window, t.min_window, reference=iac))
    return QsOffReference(builder, run, scale)


def label(kind: str, delta_alpha: float) -> str:
    return f"{kind}_{abs(delta_alpha):g}"


class TraceHandlers:
    """Runs the autocorrelation pipeline for every configured state."""

    def __init__(self):
        """Initialize trace handlers."""
        self.router = CommandRouter(name="trace_handlers")
        self._register_handlers()

    def _register_handlers(self):
        """Register the trace and sweep verbs."""
        self.router.command("trace")(self.trace_command)
        self.router.command("sweep")(self.sweep_command)

    def trace_command(self, command: Command, data: Dict[str, Any]) -> Dict[str, Any]:
        """
        Handle ``trace``: traces, intensity traces, metrics and Wigner maps.

        Every depletion gets its own QS-off run; the GCSS and mixture traces
        are scaled by it and their M is taken against it.

        Args:
            command: Parsed command
            data: Shared runtime data

        Returns:
            Summary payload
        """
        config = command.config
        config.pulse_params()
        config.tau_grid()
        delta_alphas = config.delta_alphas()
        for delta_alpha in delta_alphas:
            config.gcss_params(delta_alpha)
        if command.dry_run:
            return {"config": config.resolved()}

        kinds = config.trace.states
        runs: Dict[str, TraceRun] = {}
        states = {}
        for delta_alpha in delta_alphas:
            logger.info(f"🔁 Computing QS-off reference for delta_alpha={delta_alpha:g}")
            reference = qs_off_reference(config, delta_alpha, threads=command.threads)
            builders = state_builders(config, delta_alpha)
            if "coherent" in kinds:
                name = label("coherent", delta_alpha)
                runs[name] = reference.run
                states[name] = reference.builder(0.0, 0.0)
            for kind in ("gcss", "mixture"):
                if kind not in kinds:
                    continue
                name = label(kind, delta_alpha)
                logger.info(f"🔁 Computing {name} trace")
                runs[name] = reference.measure(config, builders[kind], command.threads)
                states[name] = builders[kind](0.0, 0.0)

        metrics = {}
        grid = config.phase_grid(config.gcss.alpha)
        for name, run in runs.items():
            write_trace_csv(run.raw, command.out_dir / name / "trace_raw.csv")
            write_trace_csv(run.iac, command.out_dir / name / "trace_iac.csv")
            field = wigner_analytic(states[name], grid)
            write_wigner_csv(field, command.out_dir / name / "wigner.csv")
            metrics[name] = {**run.metrics.as_dict(), "wigner": wigner_extrema(field).as_dict()}

        write_json({"alpha": config.gcss.alpha, "states": metrics}, command.out_dir / "metrics.json")
        logger.info("\n" + messages.get_trace_report(metrics))
        return {"metrics": {name: {"s_zero": m["s_zero"], "m_depth": m["m_depth"]} for name, m in metrics.items()}}

    def sweep_command(self, command: Command, data: Dict[str, Any]) -> Dict[str, Any]:
        """Handle ``sweep``: S(0) and M over a grid of |delta_alpha| for each |alpha|."""
        config = command.config
        sweep = config.sweep
        grid = config.sweep_grid()
        config.tau_grid()
        if command.dry_run:
            return {"config": config.resolved()}

        kinds = [kind for kind in ("gcss", "mixture") if kind in config.trace.states]
        rows = []
        thresholds = {}
        for alpha in sweep.alphas:
            alpha_rows = []
            for magnitude in grid:
                row = {"alpha": alpha, "delta_alpha": magnitude, "coherent_limit": 0.0}
                if magnitude == 0.0:
                    logger.warning(f"⚠️ |alpha|={alpha:g}, delta_alpha=0: conditioned state vanishes, coherent limit")
                    row["coherent_limit"] = 1.0
                    for kind in kinds:
                        row[f"{kind}_s_zero"], row[f"{kind}_m_depth"] = 1.0, 0.0
                else:
                    reference = qs_off_reference(config, -magnitude, alpha, command.threads)
                    builders = state_builders(config, -magnitude, alpha)
                    for kind in kinds:
                        run = reference.measure(config, builders[kind], command.threads)
                        row[f"{kind}_s_zero"] = run.metrics.s_zero
                        row[f"{kind}_m_depth"] = run.metrics.m_depth
                    logger.debug(f"sweep |alpha|={alpha:g} |delta_alpha|={magnitude:.3g}: {row}")
                if "gcss" in kinds:
                    row["gcss_deviates"] = float(
                        abs(1.0 - row["gcss_s_zero"]) > sweep.deviation_threshold
                        or row["gcss_m_depth"] > sweep.deviation_threshold
                    )
                alpha_rows.append(row)
            thresholds[f"{alpha:g}"] = deviation_onset(alpha_rows)
            logger.info(messages.get_sweep_report(alpha, thresholds[f"{alpha:g}"]))
            rows.extend(alpha_rows)

        names = list(rows[0])
        write_columns(command.out_dir / "sweep.csv", names, [[row[name] for row in rows] for name in names])
        return {"deviation_below": thresholds, "rows": len(rows)}


def deviation_onset(rows) -> Optional[float]:
    """Smallest |delta_alpha| above which no GCSS row deviates from the coherent trace."""
    rows = [row for row in rows if "gcss_deviates" in row and not row["coherent_limit"]]
    deviating = [row["delta_alpha"] for row in rows if row["gcss_deviates"]]
    if not deviating:
        return None
    largest = max(deviating)
    above = [row["delta_alpha"] for row in rows if row["delta_alpha"] > largest]
    return float(min(above)) if above else float(np.inf)


def setup_trace_handlers() -> CommandRouter:
    """
    Setup and return the trace router.

    Returns:
        Configured router
    """
    handlers = TraceHandlers()
    return handlers.router

"""Handler for the ``qspec`` command: synthetic shots through the conditioning chain."""

from typing import Any, Dict

from loguru import logger

from gcss.handlers.router import Command, CommandRouter
from gcss.physics.qspec import run_chain, synthesize_shots
from gcss.utils.io import write_histogram_csv, write_json, write_shots_csv
from gcss.utils.messages import messages


class QspecHandlers:
    """Runs the quantum-spectrometer selection on a seeded synthetic batch."""

    def __init__(self):
        self.router = CommandRouter(name="qspec_handlers")
        self._register_handlers()

    def _register_handlers(self):
        self.router.command("qspec")(self.qspec_command)

    def qspec_command(self, command: Command, data: Dict[str, Any]) -> Dict[str, Any]:
        """Handle ``qspec``; truth columns reach the CSVs only with ``--with-truth``."""
        config = command.config
        params = config.qspec_params()
        section = config.qspec
        if command.dry_run:
            return {"config": config.resolved()}

        seed = config.experiment.seed
        logger.info(f"🎲 Synthesizing {params.n_shots} shots, seed {seed}")
        shots = synthesize_shots(params, seed, command.threads)
        result = run_chain(
            shots,
            stability_threshold=section.stability_threshold,
            target_fraction=section.target_fraction,
            bin_width=section.bin_width,
            band_halfwidth=section.band_halfwidth,
            min_excursion=section.min_excursion,
            n_sigma=section.n_sigma,
        )

        out = command.out_dir
        write_shots_csv(shots, out / "shots.csv", with_truth=command.with_truth)
        write_shots_csv(result.selection.batch, out / "selected.csv", with_truth=command.with_truth)
        write_histogram_csv(result.histogram, out / "pn_hist.csv")
        report = {**result.report, "seed": seed}
        if not command.with_truth:
            report.pop("event_fraction", None)
            report.pop("enrichment", None)
        write_json(report, out / "report.json")
        logger.info("\n" + messages.get_qspec_report(report))
        return {key: report[key] for key in ("n_selected", "retained_fraction", "peaks") if key in report}


def setup_qspec_handlers() -> CommandRouter:
    """Setup and return the qspec router."""
    return QspecHandlers().router

"""Main entry point for the simulation runner."""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from loguru import logger

# Add parent directory to path for imports
sys.path.append(str(Path(__file__).parent.parent))

from gcss import __version__
from gcss.config import ExperimentConfig, settings
from gcss.handlers import (
    Command,
    CommandResult,
    CommandRouter,
    setup_qspec_handlers,
    setup_shg_handlers,
    setup_trace_handlers,
)
from gcss.middleware import ErrorHandlingMiddleware, LoggingMiddleware
from gcss.physics.errors import ConfigurationError
from gcss.utils.logger import RunLogger, setup_logging
from gcss.utils.messages import messages


TRACE_EPILOG = """\
weighting:
  [trace] weighting = conditioned (default) multiplies <I^2>(t, tau) by the
  success probability of the conditioning, so the QS-on trace keeps the
  suppression where the interferometer output overlaps the reference pulse.
  weighting = normalized uses the renormalized conditioned state instead.
  M is measured against the QS-off trace at the same |delta_alpha|.
"""


def build_parser() -> argparse.ArgumentParser:
    """Verbs ``trace``, ``sweep``, ``shg``, ``qspec`` sharing one flag set."""
    parser = argparse.ArgumentParser(
        prog="gcss",
        description="Reproduce the GCSS autocorrelation, SHG and spectrometer experiments.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="INI experiment file (defaults when absent)")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--seed", type=int, default=None, help="random seed")
    common.add_argument("--threads", type=int, default=None, help="worker threads")
    common.add_argument("--dry-run", action="store_true", help="validate and print the resolved configuration")
    common.add_argument("--with-truth", action="store_true", help="export simulation truth columns")

    commands = parser.add_subparsers(dest="command", required=True)
    raw = argparse.RawDescriptionHelpFormatter
    commands.add_parser(
        "trace", parents=[common], help="autocorrelation traces, metrics and Wigner maps",
        epilog=TRACE_EPILOG, formatter_class=raw,
    )
    commands.add_parser(
        "sweep", parents=[common], help="S(0) and M over a grid of depletions",
        epilog=TRACE_EPILOG, formatter_class=raw,
    )
    commands.add_parser("shg", parents=[common], help="second-harmonic generation in Fock space")
    commands.add_parser("qspec", parents=[common], help="quantum-spectrometer conditioning on synthetic shots")
    return parser


class GcssApp:
    """Main runner application class."""

    def __init__(self, log_level: Optional[str] = None, log_file: Optional[str] = None):
        """
        Initialize the runner.

        Args:
            log_level: Logging level (uses settings if not provided)
            log_file: Log file path (uses settings if not provided)
        """
        self.log_level = log_level or settings.log_level
        self.log_file = log_file or settings.log_file
        self.router = CommandRouter(name="gcss")

        self._setup_logging()
        self._setup_middleware()
        self._setup_handlers()

    def _setup_logging(self):
        """Configure logging for the application."""
        setup_logging(log_level=self.log_level, log_file=self.log_file)

    def _setup_middleware(self):
        """Register all middleware."""
        # Order matters: the first registered wraps everything after it
        self.router.middleware(LoggingMiddleware())
        self.router.middleware(ErrorHandlingMiddleware())
        logger.debug("✅ Middleware registered successfully")

    def _setup_handlers(self):
        """Register all command handlers."""
        self.router.include_router(setup_trace_handlers())
        self.router.include_router(setup_shg_handlers())
        self.router.include_router(setup_qspec_handlers())
        logger.debug(f"✅ Handlers registered: {', '.join(self.router.commands)}")

    def build_command(self, args: argparse.Namespace) -> Command:
        """Resolve defaults < config file < flags into a ``Command``."""
        config = ExperimentConfig.load(args.config).with_overrides(args.seed, args.out, args.threads)
        return Command(
            name=args.command,
            config=config,
            out_dir=config.output_dir(settings),
            threads=config.thread_count(settings),
            with_truth=args.with_truth,
            dry_run=args.dry_run,
        )

    def run(self, argv: Optional[List[str]] = None) -> int:
        """
        Run one command and print its JSON summary line on stdout.

        Returns:
            Exit code: 0 ok, 1 unexpected failure, 2 configuration, 3 numerical
        """
        args = build_parser().parse_args(argv)
        out_dir = None
        try:
            command = self.build_command(args)
        except ConfigurationError as e:
            logger.error(messages.get_error_message("config", str(e)))
            result = CommandResult(e.exit_code, {"error": type(e).__name__, "detail": str(e)})
        else:
            out_dir = str(command.out_dir)
            experiment = command.config.experiment.name
            with RunLogger.run_context(experiment, command.name):
                RunLogger.log_startup_info(command.name, experiment, __version__)
                result = self.router.dispatch(command, {"settings": settings})
                if command.dry_run and result.exit_code == 0:
                    print(messages.get_dry_run_message(command.name, result.payload["config"]))
                    return 0
                RunLogger.log_shutdown_info(result.exit_code)

        print(messages.get_summary_line(args.command, result.exit_code, out_dir, result.payload))
        return result.exit_code


def run_cli(argv: Optional[List[str]] = None) -> int:
    """Synchronous entry point for the command line."""
    try:
        return GcssApp().run(argv)
    except KeyboardInterrupt:
        logger.warning(messages.get_error_message("interrupted"))
        return 130


if __name__ == "__main__":
    sys.exit(run_cli())

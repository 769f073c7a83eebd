"""Logging configuration for the simulation runner.

Every record carries ``extra[run]``: ``<experiment>/<command>#<id>`` inside a
run context, ``-`` outside one.
"""

import sys
import uuid
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional

from loguru import logger

NO_RUN = "-"


def run_label(experiment: str, command: str, run_id: Optional[str] = None) -> str:
    """Tag shown in every line logged while the run is active."""
    return f"{experiment}/{command}#{run_id or uuid.uuid4().hex[:8]}"


class RunLogger:
    """Sinks for run logs; stdout is left for the JSON summary line."""

    def __init__(self, log_level: str = "INFO", log_file: Optional[str] = None):
        self.log_level = log_level.upper()
        self.log_file = log_file
        self._configure()

    def _configure(self):
        logger.remove()
        logger.configure(extra={"run": NO_RUN})

        logger.add(
            sys.stderr,
            format=self._get_console_format(),
            level=self.log_level,
            colorize=True,
            backtrace=True,
            diagnose=False
        )

        if self.log_file:
            Path(self.log_file).parent.mkdir(parents=True, exist_ok=True)
            # one file per day; a sweep at reference size runs for hours
            logger.add(
                self.log_file,
                format=self._get_file_format(),
                level=self.log_level,
                rotation="1 day",
                retention="7 days",
                compression="zip",
                backtrace=True,
                diagnose=False
            )

    @staticmethod
    def _get_console_format() -> str:
        return (
            "<green>{time:HH:mm:ss.SSS}</green> | "
            "<level>{level: <8}</level> | "
            "<magenta>{extra[run]}</magenta> | "
            "<level>{message}</level>"
        )

    @staticmethod
    def _get_file_format() -> str:
        return (
            "{time:YYYY-MM-DD HH:mm:ss.SSS} | "
            "{level: <8} | "
            "{extra[run]} | "
            "{name}:{function}:{line} - "
            "{message}"
        )

    @staticmethod
    @contextmanager
    def run_context(experiment: str, command: str, run_id: Optional[str] = None) -> Iterator[str]:
        """Tag every record logged inside the block with the run label."""
        label = run_label(experiment, command, run_id)
        with logger.contextualize(run=label):
            yield label

    @staticmethod
    def log_startup_info(command: str, experiment: str, version: str):
        logger.info(f"🔬 gcss v{version} | {command} | experiment '{experiment}'")
        logger.debug(f"Python {sys.version.split()[0]} on {sys.platform}")

    @staticmethod
    def log_shutdown_info(exit_code: int):
        logger.info(f"🛑 Run finished with exit code {exit_code}")

    @staticmethod
    def log_error_with_context(error: Exception, context: dict):
        """Unexpected failure: message, command context, then the traceback."""
        logger.bind(**context).opt(exception=error).error(
            f"Unexpected {error.__class__.__name__}: {error} | {context}"
        )


def setup_logging(log_level: str = "INFO", log_file: Optional[str] = None):
    RunLogger(log_level, log_file)
    return logger


__all__ = ['logger', 'setup_logging', 'RunLogger', 'run_label', 'NO_RUN']

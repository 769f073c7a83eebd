"""Middleware for logging and error handling around every command."""

from datetime import datetime
from typing import Any, Callable, Dict

from loguru import logger

from gcss.handlers.router import Command, CommandResult
from gcss.physics.errors import ConfigurationError, GcssError, NumericalError
from gcss.utils.logger import RunLogger
from gcss.utils.messages import messages


class LoggingMiddleware:
    """Logs the verb, the experiment and the wall time of each command."""

    def __call__(
        self,
        handler: Callable[[Command, Dict[str, Any]], CommandResult],
        command: Command,
        data: Dict[str, Any]
    ) -> CommandResult:
        """
        Run the command with logging.

        Args:
            handler: Next handler in chain
            command: Parsed command
            data: Shared runtime data

        Returns:
            Handler result
        """
        start_time = datetime.now()
        logger.info(
            f"📥 Command | {command.name} | experiment '{command.config.experiment.name}' | "
            f"out: {command.out_dir} | threads: {command.threads}"
        )
        if command.dry_run:
            logger.info("Dry run: configuration is validated, nothing is computed")

        result = handler(command, data)

        processing_time = (datetime.now() - start_time).total_seconds()
        if result.exit_code == 0:
            logger.info(f"✅ Processed in {processing_time:.2f}s | {command.name}")
        else:
            logger.error(
                f"❌ Failed after {processing_time:.2f}s | {command.name} | "
                f"exit code {result.exit_code}"
            )
        return result


class ErrorHandlingMiddleware:
    """Turns exceptions into exit codes: 2 configuration, 3 numerical, 1 otherwise."""

    def __call__(
        self,
        handler: Callable[[Command, Dict[str, Any]], Dict[str, Any]],
        command: Command,
        data: Dict[str, Any]
    ) -> CommandResult:
        try:
            return CommandResult(0, handler(command, data) or {})
        except ConfigurationError as e:
            logger.error(messages.get_error_message("config", str(e)))
            return CommandResult(e.exit_code, {"error": type(e).__name__, "detail": str(e)})
        except NumericalError as e:
            logger.error(messages.get_error_message("numerical", f"{type(e).__name__}: {e}"))
            return CommandResult(e.exit_code, {"error": type(e).__name__, "detail": str(e)})
        except GcssError as e:
            logger.error(messages.get_error_message("generic", str(e)))
            return CommandResult(e.exit_code, {"error": type(e).__name__, "detail": str(e)})
        except Exception as e:
            RunLogger.log_error_with_context(e, {"command": command.name, "out": str(command.out_dir)})
            return CommandResult(1, {"error": type(e).__name__, "detail": str(e)})

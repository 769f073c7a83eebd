"""Runner utility modules."""

from gcss.utils.messages import messages
from gcss.utils.logger import logger, run_label, setup_logging, RunLogger

__all__ = ['messages', 'logger', 'run_label', 'setup_logging', 'RunLogger']

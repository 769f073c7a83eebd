"""Command handlers."""

from gcss.handlers.qspec import setup_qspec_handlers
from gcss.handlers.router import Command, CommandResult, CommandRouter
from gcss.handlers.shg import setup_shg_handlers
from gcss.handlers.trace import setup_trace_handlers

__all__ = [
    'Command',
    'CommandResult',
    'CommandRouter',
    'setup_trace_handlers',
    'setup_shg_handlers',
    'setup_qspec_handlers',
]

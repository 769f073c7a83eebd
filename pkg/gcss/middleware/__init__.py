"""Runner middleware components."""

from gcss.middleware.logging import LoggingMiddleware, ErrorHandlingMiddleware

__all__ = [
    'LoggingMiddleware',
    'ErrorHandlingMiddleware',
]

"""Command routing: verbs map to handler methods, wrapped by middleware."""

from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Any, Callable, Dict, List

from gcss.config import ExperimentConfig
from gcss.physics.errors import ConfigurationError


@dataclass(frozen=True)
class Command:
    """One parsed invocation of the runner."""

    name: str
    config: ExperimentConfig
    out_dir: Path
    threads: int = 1
    with_truth: bool = False
    dry_run: bool = False


@dataclass
class CommandResult:
    exit_code: int
    payload: Dict[str, Any] = field(default_factory=dict)


Handler = Callable[[Command, Dict[str, Any]], Any]


class CommandRouter:
    """Registry of command handlers with an ordered middleware chain."""

    def __init__(self, name: str):
        self.name = name
        self._handlers: Dict[str, Handler] = {}
        self._middleware: List[Callable] = []

    def command(self, name: str) -> Callable[[Handler], Handler]:
        """Register ``handler`` for verb ``name``."""
        def register(handler: Handler) -> Handler:
            if name in self._handlers:
                raise ConfigurationError(f"command {name!r} registered twice")
            self._handlers[name] = handler
            return handler
        return register

    def include_router(self, router: "CommandRouter"):
        for name, handler in router._handlers.items():
            self.command(name)(handler)

    def middleware(self, middleware: Callable):
        """Add a middleware; the first registered is the outermost."""
        self._middleware.append(middleware)

    @property
    def commands(self) -> List[str]:
        return sorted(self._handlers)

    def dispatch(self, command: Command, data: Dict[str, Any]) -> Any:
        handler = self._handlers.get(command.name)
        if handler is None:
            raise ConfigurationError(f"unknown command {command.name!r}; expected one of {self.commands}")
        chain = handler
        for middleware in reversed(self._middleware):
            chain = partial(middleware, chain)
        return chain(command, data)


__all__ = ['Command', 'CommandResult', 'CommandRouter']

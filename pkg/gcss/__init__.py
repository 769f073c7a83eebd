"""GCSS simulation library and reproduction runner."""

__version__ = "1.0.0"

__all__ = ['__version__']

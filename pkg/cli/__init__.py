"""Command-line layer"""
from .config import RunConfig
from .commands import run

__all__ = ['RunConfig', 'run']

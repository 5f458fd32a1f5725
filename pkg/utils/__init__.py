"""Utilities module"""
from .file_utils import FileUtils
from .logger import logger, setup_logger
from .parallel import replica_map

__all__ = ['FileUtils', 'logger', 'setup_logger', 'replica_map']

"""
Logging configuration
"""
import logging
import sys
from pathlib import Path
from config.settings import Settings


class StderrHandler(logging.StreamHandler):
    """Console handler bound to whatever sys.stderr is at emit time"""

    def __init__(self, level=logging.NOTSET):
        logging.Handler.__init__(self, level)

    @property
    def stream(self):
        return sys.stderr


def setup_logger(name: str, log_file: str = None, level=None, stream=None):
    """Setup logger with file and console handlers"""

    logger = logging.getLogger(name)
    logger.setLevel(level or Settings.LOG_LEVEL)

    # Avoid duplicate handlers
    if logger.handlers:
        return logger

    # Format
    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    # Console handler, stderr unless a stream is given (stdout carries data)
    console_handler = logging.StreamHandler(stream) if stream is not None else StderrHandler()
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    # File handler (optional)
    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger


# Create default logger
logger = setup_logger('dyson_rc', log_file=Settings.LOG_FILE)

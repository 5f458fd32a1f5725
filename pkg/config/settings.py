"""
Configuration management for the Dyson random-cluster toolkit
"""
import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    return int(value) if value else default


class Settings:
    """Application settings and configuration"""

    # Logging
    LOG_LEVEL = os.getenv("DYSON_RC_LOG_LEVEL", "INFO").upper()
    LOG_FILE = os.getenv("DYSON_RC_LOG_FILE")

    # Parallelism (the only environment override of the CLI contract)
    THREADS = _env_int("DYSON_RC_THREADS", os.cpu_count() or 1)

    # Sampling defaults
    MCMC_SWEEPS = 200
    MCMC_BURN_IN = 50
    FK_MAX_VERTICES = 2048

    # Exact enumeration limits
    ENUMERATION_MAX_PAIRS = 20
    DOMINANCE_MAX_PAIRS = 10
    FEASIBILITY_SLACK = 1e-9

    # Experiments
    MAX_EXPERIMENT_SIZE = 10**6
    CROSSING_LEVEL = 0.5
    DEFAULT_PROXY = "span"
    CONFIDENCE = 0.95

    # Schedule product truncation
    PRODUCT_TAIL_TOL = 1e-9
    PRODUCT_MAX_TERMS = 10**7

    @classmethod
    def validate(cls):
        """Validate settings taken from the environment"""
        if cls.THREADS < 1:
            raise ValueError("DYSON_RC_THREADS must be a positive integer")

        if cls.LOG_LEVEL not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"DYSON_RC_LOG_LEVEL {cls.LOG_LEVEL!r} is not a logging level")

        return True

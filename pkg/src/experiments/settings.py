import logging
import os

from dotenv import load_dotenv

from analysis.errors import ConfigurationError
from simulation.montecarlo import DEFAULT_TRACE_LIMIT

load_dotenv()

logger = logging.getLogger(__name__)

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class RuntimeSettings:
    """Process-wide settings read once from the environment (or a .env file)"""
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            instance = super().__new__(cls)
            instance._initialize()
            cls._instance = instance
        return cls._instance

    @classmethod
    def reload(cls) -> "RuntimeSettings":
        """Drop the cached instance and read the environment again"""
        cls._instance = None
        return cls()

    def _initialize(self):
        self.log_level = os.getenv("WSN_FUSION_LOG_LEVEL", "INFO").upper()
        if self.log_level not in _LOG_LEVELS:
            raise ConfigurationError(
                f"WSN_FUSION_LOG_LEVEL must be one of {', '.join(_LOG_LEVELS)} (got {self.log_level})"
            )

        self.workers = self._positive_int("WSN_FUSION_WORKERS", 1)
        self.trace_limit = self._positive_int("WSN_FUSION_TRACE_LIMIT", DEFAULT_TRACE_LIMIT)
        logger.debug(
            f"Runtime settings: log_level={self.log_level}, workers={self.workers}, "
            f"trace_limit={self.trace_limit}"
        )

    @staticmethod
    def _positive_int(name: str, default: int) -> int:
        raw = os.getenv(name)
        if raw is None or raw.strip() == "":
            return default
        try:
            value = int(raw)
        except ValueError:
            raise ConfigurationError(f"{name} must be an integer (got '{raw}')")
        if value < 1:
            raise ConfigurationError(f"{name} must be at least 1 (got {value})")
        return value

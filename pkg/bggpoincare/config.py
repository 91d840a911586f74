import os

from dotenv import load_dotenv

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def load_config():
    """Load environment variables from .env file"""
    load_dotenv()
    Config.reload()


class Config:
    NUM_THREADS = os.getenv("BGG_NUM_THREADS", "1")
    LOG_LEVEL = os.getenv("BGG_LOG_LEVEL", "WARNING")
    DEFAULT_SEED = os.getenv("BGG_DEFAULT_SEED", "0")

    @classmethod
    def reload(cls):
        cls.NUM_THREADS = os.getenv("BGG_NUM_THREADS", "1")
        cls.LOG_LEVEL = os.getenv("BGG_LOG_LEVEL", "WARNING")
        cls.DEFAULT_SEED = os.getenv("BGG_DEFAULT_SEED", "0")

    @classmethod
    def num_threads(cls):
        try:
            value = int(cls.NUM_THREADS)
        except (TypeError, ValueError) as e:
            raise ValueError(f"BGG_NUM_THREADS must be an integer, got {cls.NUM_THREADS!r}") from e
        if value < 1:
            raise ValueError(f"BGG_NUM_THREADS must be >= 1, got {value}")
        return value

    @classmethod
    def log_level(cls):
        level = (cls.LOG_LEVEL or "").upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"BGG_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}, got {cls.LOG_LEVEL!r}")
        return level

    @classmethod
    def default_seed(cls):
        try:
            return int(cls.DEFAULT_SEED)
        except (TypeError, ValueError) as e:
            raise ValueError(f"BGG_DEFAULT_SEED must be an integer, got {cls.DEFAULT_SEED!r}") from e

    @classmethod
    def validate(cls):
        cls.num_threads()
        cls.log_level()
        cls.default_seed()

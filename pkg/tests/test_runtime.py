import logging
import os
import sys
from unittest.mock import patch

import pytest

# Add the project root to the Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from bggpoincare.config import Config
from bggpoincare.runner import VerificationRunner, run_job
from bggpoincare.utils import log_failures, set_log_level, setup_logger
from bggpoincare.verify import euler_characteristic


@pytest.fixture
def clean_config():
    yield
    Config.reload()


def test_config_defaults(clean_config):
    """Unset variables fall back to one worker, WARNING and seed 0"""
    with patch.dict(os.environ, {}, clear=True):
        Config.reload()
        assert Config.num_threads() == 1
        assert Config.log_level() == "WARNING"
        assert Config.default_seed() == 0


def test_config_from_environment(clean_config):
    """BGG_* variables are read on reload"""
    env = {"BGG_NUM_THREADS": "4", "BGG_LOG_LEVEL": "debug", "BGG_DEFAULT_SEED": "17"}
    with patch.dict(os.environ, env, clear=True):
        Config.reload()
        assert Config.num_threads() == 4
        assert Config.log_level() == "DEBUG"
        assert Config.default_seed() == 17


@pytest.mark.parametrize(
    "env",
    [
        {"BGG_NUM_THREADS": "0"},
        {"BGG_NUM_THREADS": "many"},
        {"BGG_LOG_LEVEL": "LOUD"},
        {"BGG_DEFAULT_SEED": "1.5"},
    ],
)
def test_config_validation(clean_config, env):
    """Malformed settings raise ValueError"""
    with patch.dict(os.environ, env, clear=True):
        Config.reload()
        with pytest.raises(ValueError):
            Config.validate()


def test_setup_logger_no_duplicate_handlers():
    """Calling setup_logger twice keeps one handler"""
    first = setup_logger("bggpoincare.test_dup")
    second = setup_logger("bggpoincare.test_dup")
    assert first is second
    assert len(second.handlers) == 1


def test_set_log_level():
    """The package logger follows the configured level"""
    logger = setup_logger()
    set_log_level("INFO")
    assert logger.level == logging.INFO
    set_log_level("WARNING")
    assert logger.level == logging.WARNING


def test_log_failures_reraises():
    """Errors are logged and propagated"""
    @log_failures
    def failing(value):
        raise ValueError(f"boom {value}")

    with patch("bggpoincare.utils.logger") as mock_logger:
        with pytest.raises(ValueError):
            failing(1)
        mock_logger.error.assert_called_once()


def test_run_job_wraps_single_reports():
    """A single result becomes a one-element list"""
    assert run_job(euler_characteristic, ([1, 2, 3],)) == [2]
    assert run_job(lambda: [1, 2], ()) == [1, 2]


def test_runner_rejects_zero_workers():
    """At least one worker"""
    with pytest.raises(ValueError):
        VerificationRunner(max_workers=0)


def test_runner_in_process_order():
    """Results are flattened in submission order"""
    jobs = [(euler_characteristic, ([k, 0],)) for k in range(5)]
    assert VerificationRunner(progress=False).run(jobs) == [0, 1, 2, 3, 4]


def test_runner_process_pool_order():
    """A pool keeps submission order"""
    jobs = [(euler_characteristic, ([0] * k + [k],)) for k in range(6)]
    expected = [(-1) ** k * k for k in range(6)]
    assert VerificationRunner(max_workers=2, progress=False).run(jobs) == expected

"""Tests for logging configuration"""
import logging

import numpy as np

from bregqn.core.linesearch import LineSearchParams, wolfe_search
from bregqn.core.potential import make_potential, validate
from bregqn.utils.logging_config import (
    LOG_LEVELS,
    get_logger,
    log_error_with_context,
    log_function_call,
    log_performance,
    setup_logging,
)


class TestLoggingSetup:
    """Test logging setup and configuration"""

    def test_setup_logging_default(self, monkeypatch):
        """Should create logger with default settings"""
        monkeypatch.delenv('QN_LOG_LEVEL', raising=False)
        logger = setup_logging('test_logger')
        assert logger.name == 'test_logger'
        assert logger.level == logging.INFO
        assert len(logger.handlers) > 0

    def test_setup_logging_all_levels(self):
        """Should support all log levels"""
        for level_name, level_value in LOG_LEVELS.items():
            logger = setup_logging(f'test_{level_name.lower()}', level=level_name)
            assert logger.level == level_value

    def test_setup_logging_with_file(self, temp_dir):
        """Should write detailed records to the log file"""
        log_file = temp_dir / "logs" / "qn.log"
        logger = setup_logging('test_file_logger', level='INFO', log_file=str(log_file))

        logger.info("scale equation solved")

        content = log_file.read_text()
        assert "scale equation solved" in content
        assert 'test_file_logger' in content
        assert 'INFO' in content

    def test_setup_logging_no_propagation(self):
        """Should not propagate to root logger"""
        logger = setup_logging('test_no_prop')
        assert logger.propagate is False

    def test_console_goes_to_stderr(self):
        """Should keep stdout free for CSV and JSON output"""
        import sys

        logger = setup_logging('test_stderr')
        streams = [h.stream for h in logger.handlers if isinstance(h, logging.StreamHandler)]
        assert sys.stderr in streams

    def test_setup_logging_removes_duplicates(self):
        """Should remove existing handlers to avoid duplicates"""
        first = len(setup_logging('test_dup').handlers)
        second = len(setup_logging('test_dup').handlers)
        assert first == second


class TestGetLogger:
    """Test get_logger functionality"""

    def test_package_children_use_parent_handlers(self):
        """Should not attach handlers to bregqn.* loggers"""
        logger = get_logger('bregqn.core.update')
        assert logger.name == 'bregqn.core.update'
        assert logger.handlers == []

    def test_other_names_get_handlers(self):
        """Should set up loggers outside the package"""
        logger = get_logger('test_new_logger')
        assert len(logger.handlers) > 0

    def test_get_logger_reuses_existing(self):
        """Should reuse existing logger"""
        assert get_logger('test_reuse_logger') is get_logger('test_reuse_logger')


class TestLoggingHelpers:
    """Test helper functions"""

    def test_log_function_call(self, caplog):
        """Should log function calls with parameters"""
        logger = setup_logging('test_func_call', level='DEBUG', propagate=True)

        with caplog.at_level(logging.DEBUG, logger='test_func_call'):
            log_function_call(logger, 'minimize', problem='p1', n=10)

        assert 'minimize' in caplog.text
        assert 'problem=p1' in caplog.text
        assert 'n=10' in caplog.text

    def test_log_performance(self, caplog):
        """Should log durations with two decimals"""
        logger = setup_logging('test_perf', level='INFO', propagate=True)

        with caplog.at_level(logging.INFO, logger='test_perf'):
            log_performance(logger, 'Table 2', 1.234)

        assert 'Performance' in caplog.text
        assert 'Table 2' in caplog.text
        assert '1.23' in caplog.text

    def test_log_error_with_context(self, caplog):
        """Should log errors with context"""
        logger = setup_logging('test_error', level='ERROR', propagate=True)

        try:
            raise ArithmeticError("downdate broke down")
        except ArithmeticError as e:
            with caplog.at_level(logging.ERROR, logger='test_error'):
                log_error_with_context(logger, e, "During update")

        assert 'During update' in caplog.text
        assert 'ArithmeticError' in caplog.text
        assert 'downdate broke down' in caplog.text


class TestEnvironmentVariables:
    """Test environment variable integration"""

    def test_log_level_from_env(self, monkeypatch):
        """Should read log level from QN_LOG_LEVEL"""
        monkeypatch.setenv('QN_LOG_LEVEL', 'DEBUG')
        assert setup_logging('test_env_level').level == logging.DEBUG

        monkeypatch.setenv('QN_LOG_LEVEL', 'WARNING')
        assert setup_logging('test_env_level2').level == logging.WARNING

    def test_log_level_invalid_env(self, monkeypatch):
        """Should fall back to INFO for an invalid level"""
        monkeypatch.setenv('QN_LOG_LEVEL', 'INVALID')
        assert setup_logging('test_invalid_env').level == logging.INFO


class TestPackageEvents:
    """Events the package is expected to log"""

    def test_missing_nu_bounds_logged(self, caplog):
        """Should note that the convergence guarantee needs nu bounds"""
        with caplog.at_level(logging.INFO, logger='bregqn'):
            validate(make_potential('power', {'gamma': -1.0}), 5)
        assert 'no nu bounds' in caplog.text

    def test_bounded_potential_not_flagged(self, caplog):
        """Should stay quiet for potentials with known nu bounds"""
        with caplog.at_level(logging.INFO, logger='bregqn'):
            validate(make_potential('bounded', {'a': 1.0, 'b': 2.0}), 5)
        assert 'no nu bounds' not in caplog.text

    def test_wolfe_budget_warning(self, caplog):
        """Should warn when the Wolfe search runs out of evaluations"""
        params = LineSearchParams(max_evals=2)
        with caplog.at_level(logging.WARNING, logger='bregqn'):
            result = wolfe_search(lambda a: float(np.cos(40 * a)) - a * 1e-3, lambda a: -1.0, params, 1.0, -1.0)
        assert not result.converged
        assert 'evaluations' in caplog.text


class TestLoggerIsolation:
    """Test logger isolation"""

    def test_no_root_pollution(self):
        """Should not add handlers to the root logger"""
        root_logger = logging.getLogger()
        initial_handlers = len(root_logger.handlers)

        setup_logging('test_no_pollution').info("message")

        assert len(root_logger.handlers) == initial_handlers

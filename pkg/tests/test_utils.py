"""Tests for logging setup and prime helpers."""

import logging
import os
import tempfile
import unittest

from vgt_verifier.fibration import SurfaceParam
from vgt_verifier.utils import LoggingConfig, LogLevel, good_primes, setup_logger


class TestUtils(unittest.TestCase):
    """Test cases for utility functions."""

    def tearDown(self):
        """Restore the default level."""
        setup_logger(level=logging.WARNING)

    def test_good_primes(self):
        self.assertEqual(good_primes(SurfaceParam(2), 13), [5, 7, 11, 13])
        self.assertEqual(good_primes(SurfaceParam(3), 13), [3, 5, 7, 11, 13])
        self.assertEqual(good_primes(SurfaceParam(10), 30, p_min=7), [7, 13, 17, 19, 23, 29])

    def test_logging_config_levels(self):
        config = LoggingConfig(level=LogLevel.DEBUG)
        self.assertEqual(config.get_level_value(), logging.DEBUG)
        self.assertEqual(config.get_external_logger_levels()["sympy"], logging.WARNING)

    def test_setup_logger_with_file(self):
        log_file = os.path.join(tempfile.mkdtemp(), "logs", "vgt.log")
        setup_logger(level="debug", log_file=log_file)
        self.assertEqual(logging.getLogger("vgt_verifier").level, logging.DEBUG)
        logging.getLogger("vgt_verifier.tests").info("trace computed")
        for handler in logging.getLogger().handlers:
            handler.flush()
        with open(log_file, "r", encoding="utf-8") as f:
            self.assertIn("trace computed", f.read())


if __name__ == "__main__":
    unittest.main()

"""Tests for run configuration."""

import os
import tempfile
import unittest

from vgt_verifier.config import THREADS_ENV, RunConfig, load_config, parse_config_text
from vgt_verifier.errors import ConfigError


class TestRunConfig(unittest.TestCase):
    """Defaults, parsing and precedence."""

    def setUp(self):
        """Set up test fixtures."""
        self.temp_dir = tempfile.mkdtemp()

    def _write(self, text):
        path = os.path.join(self.temp_dir, "vgt.conf")
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        return path

    def test_defaults(self):
        config = load_config(environ={})
        self.assertEqual(config, RunConfig())
        self.assertEqual(config.prime_bound, 200)
        self.assertEqual(config.oracle_bound, 20000)
        self.assertEqual(config.thread_count, 1)
        self.assertEqual(config.output_format, "text")
        self.assertEqual(config.charsum_table_threshold, 512)

    def test_parse_config_text(self):
        values = parse_config_text("# sieve settings\nprime_bound = 120\n\noutput_format=json  # trailing\n")
        self.assertEqual(values, {"prime_bound": 120, "output_format": "json"})

    def test_parse_errors(self):
        with self.assertRaises(ConfigError):
            parse_config_text("threads = 4\n")
        with self.assertRaises(ConfigError):
            parse_config_text("prime_bound = lots\n")
        with self.assertRaises(ConfigError):
            parse_config_text("prime_bound\n")

    def test_invalid_values(self):
        with self.assertRaises(ConfigError):
            RunConfig(thread_count=0)
        with self.assertRaises(ConfigError):
            RunConfig(prime_bound=2)
        with self.assertRaises(ConfigError):
            RunConfig(output_format="yaml")
        with self.assertRaises(ConfigError):
            load_config(self._write("charsum_table_threshold = -1\n"), environ={})

    def test_file_then_environment(self):
        path = self._write("thread_count = 2\nprime_bound = 90\n")
        config = load_config(path, environ={})
        self.assertEqual((config.thread_count, config.prime_bound), (2, 90))
        config = load_config(path, environ={THREADS_ENV: "6"})
        self.assertEqual((config.thread_count, config.prime_bound), (6, 90))
        with self.assertRaises(ConfigError):
            load_config(path, environ={THREADS_ENV: "many"})

    def test_flags_override(self):
        config = load_config(environ={THREADS_ENV: "6"}).updated({"thread_count": 3, "prime_bound": None})
        self.assertEqual((config.thread_count, config.prime_bound), (3, 200))

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            load_config(os.path.join(self.temp_dir, "absent.conf"), environ={})


if __name__ == "__main__":
    unittest.main()

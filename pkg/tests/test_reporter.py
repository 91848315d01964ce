"""Tests for the report generator."""

import os
import tempfile
import unittest

from vgt_verifier.reporter import ReportGenerator


class TestReportGenerator(unittest.TestCase):
    """Rendering and writing reports."""

    def setUp(self):
        """Set up test fixtures."""
        self.temp_dir = tempfile.mkdtemp()
        self.reporter = ReportGenerator(output_dir=self.temp_dir)

    def test_csv_cells(self):
        content = self.reporter.render_csv([{"a": "2/1", "p": 5, "bound_ok": True, "error": None, "extra": 1}],
                                           header=("a", "p", "bound_ok", "error"))
        self.assertEqual(content, "a,p,bound_ok,error\n2/1,5,true,\n")

    def test_json_is_sorted(self):
        self.assertEqual(self.reporter.render({"b": 1, "a": 2}, "trace", "json"), '{\n  "a": 2,\n  "b": 1\n}\n')

    def test_missing_template_falls_back_to_json(self):
        self.assertEqual(self.reporter.render({"x": 1}, "hypotheses", "markdown"), '{\n  "x": 1\n}\n')
        with self.assertRaises(ValueError):
            self.reporter.render({}, "trace", "html")

    def test_write_report(self):
        path = self.reporter.write_report("T = 3\n", os.path.join("nested", "trace.txt"))
        self.assertEqual(path.parent.name, "nested")
        with open(path, "r", encoding="utf-8") as f:
            self.assertEqual(f.read(), "T = 3\n")


if __name__ == "__main__":
    unittest.main()

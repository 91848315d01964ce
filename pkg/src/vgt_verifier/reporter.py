"""
Report generator module for the VGT verifier.

Reports are rendered to strings (text and Markdown through jinja2 templates,
JSON with sorted keys, CSV with a fixed header) and written to disk
separately, so identical inputs always produce identical bytes.
"""

import csv
import io
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence

import jinja2

from .utils import PathLike

logger = logging.getLogger(__name__)

SWEEP_HEADER = (
    "a", "p", "r", "q", "T", "T_mod_8",
    "two_1plus_a", "two_1minus_a", "chi_2", "chi_minus_1", "bound_ok", "error",
)


class ReportGenerator:
    """
    Renders verifier results.
    """

    def __init__(self, output_dir: Optional[PathLike] = None):
        """
        Initialize the report generator.

        Args:
            output_dir: Directory relative paths are written under (defaults to the working directory)
        """
        self.output_dir = Path(output_dir) if output_dir else Path(os.getcwd())
        templates_dir = os.path.join(os.path.dirname(__file__), "templates")
        self.jinja_env = jinja2.Environment(
            loader=jinja2.FileSystemLoader(templates_dir),
            autoescape=jinja2.select_autoescape(["html", "xml"]),
            trim_blocks=True,
            lstrip_blocks=True,
            keep_trailing_newline=True,
            undefined=jinja2.StrictUndefined,
        )

    def render(self, data: Dict[str, Any], template: str, format: str = "text") -> str:
        """
        Render one result.

        Args:
            data: Result as produced by a to_dict method
            template: Template base name (trace, count, tables, prop45, divisibility,
                sieve, replay, hypotheses, sweep)
            format: text, markdown or json

        Returns:
            The rendered report
        """
        if format == "json":
            return self._render_json(data)
        if format == "text":
            return self._render_template(f"{template}.txt", data)
        if format in ("markdown", "md"):
            return self._render_template(f"{template}.md", data)
        raise ValueError(f"Unsupported report format: {format}")

    def _render_json(self, data: Any) -> str:
        return json.dumps(data, indent=2, sort_keys=True) + "\n"

    def _render_template(self, name: str, data: Dict[str, Any]) -> str:
        try:
            template = self.jinja_env.get_template(name)
        except jinja2.exceptions.TemplateNotFound:
            logger.debug(f"No template {name}, falling back to JSON")
            return self._render_json(data)
        return template.render(data=data)

    def render_csv(self, rows: Iterable[Mapping[str, Any]], header: Sequence[str] = SWEEP_HEADER) -> str:
        """
        Render rows under a fixed header; missing cells are left empty.

        Booleans are written as true/false.
        """
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=list(header), lineterminator="\n", extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _csv_cell(v) for k, v in row.items()})
        return buffer.getvalue()

    def write_report(self, content: str, path: PathLike) -> Path:
        """
        Write a rendered report.

        Args:
            content: Rendered report
            path: Target path, relative to output_dir unless absolute

        Returns:
            The path written
        """
        output_path = Path(path)
        if not output_path.is_absolute():
            output_path = self.output_dir / output_path
        output_path.parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, "w", encoding="utf-8", newline="") as f:
            f.write(content)
        logger.info(f"Report written: {output_path}")
        return output_path


def _csv_cell(value: Any) -> Any:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    return value

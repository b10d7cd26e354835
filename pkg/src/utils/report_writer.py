"""
Report Writing Utilities
Renders reports as JSON, CSV (pandas) or pretty text and reloads them for replay
"""

import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional, TextIO, Tuple

import numpy as np
import pandas as pd

from src.utils.validation import InputValidator

logger = logging.getLogger(__name__)


def jsonable(value: Any) -> Any:
    """Convert numpy scalars and complex numbers into JSON-ready values ([re, im] for complex)"""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        c = complex(value)
        return [c.real, c.imag]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, (np.integer, np.floating)):
        return value.item()
    return value


class ReportWriter:
    """Formats command reports for the terminal, files and the JSON API"""

    def __init__(self, output_dir: Optional[str] = None):
        """
        Initialize the writer

        Args:
            output_dir: Directory for relative output paths (default: current directory)
        """
        self.output_dir = output_dir

    def to_json(self, report: Dict[str, Any]) -> str:
        """Deterministic JSON text; key order follows the report"""
        return json.dumps(jsonable(report), indent=2, ensure_ascii=False)

    def to_frame(self, report: Dict[str, Any]) -> pd.DataFrame:
        """
        Tabular view of a report

        Sample reports carry "rows"; point reports "points"; audit reports "findings".
        """
        for key in ("rows", "points", "findings"):
            if key in report and isinstance(report[key], list):
                records = jsonable(report[key])
                return pd.json_normalize(records, sep=".")
        return pd.json_normalize(jsonable(report), sep=".")

    def to_csv(self, report: Dict[str, Any]) -> str:
        frame = self.to_frame(report)
        for column in frame.columns:
            # Lists (complex pairs, vectors) become compact JSON cells
            if frame[column].map(lambda v: isinstance(v, list)).any():
                frame[column] = frame[column].map(lambda v: json.dumps(v) if isinstance(v, list) else v)
        return frame.to_csv(index=False)

    def to_pretty(self, report: Dict[str, Any]) -> str:
        lines: List[str] = []
        self._pretty_lines(jsonable(report), 0, lines)
        return "\n".join(lines) + "\n"

    def _pretty_lines(self, value: Any, depth: int, lines: List[str], key: Optional[str] = None):
        pad = "  " * depth
        label = f"{key}: " if key is not None else ""
        if isinstance(value, dict):
            if key is not None:
                lines.append(f"{pad}{key}:")
                depth += 1
            for k, v in value.items():
                self._pretty_lines(v, depth, lines, k)
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{pad}{label}")
            for idx, item in enumerate(value):
                lines.append(f"{pad}  [{idx}]")
                self._pretty_lines(item, depth + 2, lines)
        elif isinstance(value, float):
            lines.append(f"{pad}{label}{value:.10g}")
        else:
            lines.append(f"{pad}{label}{value}")

    def render(self, report: Dict[str, Any], fmt: str = "json") -> str:
        if fmt == "csv":
            return self.to_csv(report)
        if fmt == "pretty":
            return self.to_pretty(report)
        return self.to_json(report) + "\n"

    def write(
        self,
        report: Dict[str, Any],
        fmt: str = "json",
        output_path: Optional[str] = None,
        stream: Optional[TextIO] = None,
    ) -> Dict[str, Any]:
        """
        Write a rendered report to a file or a stream

        Returns:
            Dictionary with the outcome of the write
        """
        text = self.render(report, fmt)
        if output_path is None:
            (stream or sys.stdout).write(text)
            return {"success": True, "bytes": len(text)}

        path = output_path
        if self.output_dir and not os.path.isabs(path):
            path = os.path.join(self.output_dir, path)
        try:
            directory = os.path.dirname(path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as e:
            logger.error(f"Error writing report to {path}: {e}")
            return {"success": False, "error": f"Error writing report: {e}"}

        logger.info(f"Report written to {path} ({fmt})")
        return {"success": True, "path": path, "bytes": len(text)}


def _row_point(row: Dict[str, Any], validator: InputValidator) -> Optional[Dict[str, Any]]:
    """A sample-table row's "re:im,..." coordinates as a witness point"""
    parsed = [validator.parse_complex_list(row.get(key), key) for key in ("z", "eta")]
    if not all(p["valid"] for p in parsed):
        return None
    z, eta = (jsonable(p["values"]) for p in parsed)
    return {"z": z, "eta": eta}


def load_replay(path: str, witness_id: Optional[str] = None) -> Tuple[Dict[str, Any], List[Dict[str, Any]]]:
    """
    Witness points from a previously written JSON report of any command

    Audit findings and verify checks carry one witness each; eval and invert
    reports list their points; sample reports list their table rows.

    Args:
        path: Report file
        witness_id: Restrict to one audit finding or one verify check

    Returns:
        Tuple (metric description, list of {"z", "eta"} point dicts)

    Raises:
        ValueError: when the file is not a report with witness points
    """
    with open(path, "r", encoding="utf-8") as fh:
        document = json.load(fh)
    if not isinstance(document, dict):
        raise ValueError("Replay file must hold a JSON object report")

    points: List[Dict[str, Any]] = []
    for finding in document.get("findings", []):
        if witness_id is not None and finding.get("formula_id") != witness_id:
            continue
        if finding.get("witness"):
            points.append(finding["witness"])
    checks = document.get("checks", {})
    if isinstance(checks, dict):
        for name, entry in checks.items():
            if witness_id is not None and name != witness_id:
                continue
            if isinstance(entry, dict) and entry.get("witness"):
                points.append(entry["witness"])
    if witness_id is None:
        for entry in document.get("points", []):
            if isinstance(entry, dict) and entry.get("point"):
                points.append(entry["point"])
        validator = InputValidator()
        for row in document.get("rows", []):
            if isinstance(row, dict):
                point = _row_point(row, validator)
                if point is not None:
                    points.append(point)

    # a point that witnesses several checks is replayed once
    unique: Dict[str, Dict[str, Any]] = {}
    for point in points:
        unique.setdefault(json.dumps(point, sort_keys=True), point)
    points = list(unique.values())

    if not points:
        raise ValueError(f"No witness points in {path}" + (f" for {witness_id}" if witness_id else ""))
    return document.get("metric", {}), points

"""
Input Validation Utilities
Validates and parses user-supplied points, names, counts and file paths
"""

import math
import os
import re
from typing import Any, Dict, List, Optional, Sequence

from src.processors.metric_model import FIXTURE_NAMES

FAMILY_NAMES = ("infinite-series", "randers", "kropina", "matsumoto")
OUTPUT_FORMATS = ("json", "csv", "pretty")
MAX_METRIC_FILE_SIZE = 1048576  # 1MB
MAX_DIMENSION = 64


def _finite(value: complex) -> bool:
    return math.isfinite(value.real) and math.isfinite(value.imag)


class InputValidator:
    """Handles validation of command-line and API inputs"""

    def __init__(self, max_samples: int = 100000, max_jobs: int = 64):
        """
        Initialize the validator

        Args:
            max_samples: Largest accepted sample count
            max_jobs: Largest accepted worker count
        """
        self.max_samples = max_samples
        self.max_jobs = max_jobs

        # One complex entry: "re", "re:im" or ":im"
        self.number = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
        self.entry_regex = re.compile(rf"^(?:({self.number})?:({self.number})|({self.number}))$")
        self.series_regex = re.compile(r"^series-(\d+)$")
        self.control_chars = re.compile(r"[\x00-\x08\x0b\x0c\x0e-\x1f\x7f]")

    def parse_complex_list(self, text: Any, label: str = "vector") -> Dict[str, Any]:
        """
        Parse comma-separated complex pairs "re:im" (bare reals allowed)

        Args:
            text: String such as "1:0.5,2" or an already parsed list of numbers / [re, im] pairs
            label: Name used in error messages

        Returns:
            Dictionary with validation results and the parsed values
        """
        if text is None or (isinstance(text, str) and not text.strip()):
            return {"valid": False, "error": f"{label} cannot be empty"}

        if isinstance(text, (list, tuple)):
            return self._parse_sequence(text, label)

        entries = [e.strip() for e in str(text).split(",")]
        if len(entries) > MAX_DIMENSION:
            return {"valid": False, "error": f"{label} has more than {MAX_DIMENSION} entries"}

        values = []
        for position, entry in enumerate(entries, start=1):
            match = self.entry_regex.match(entry)
            if not match:
                return {"valid": False, "error": f"{label} entry {position} '{entry}' is not re:im or a real"}
            re_part, im_part, bare = match.groups()
            if bare is not None:
                value = complex(float(bare), 0.0)
            else:
                value = complex(float(re_part or 0.0), float(im_part))
            if not _finite(value):
                return {"valid": False, "error": f"{label} entry {position} '{entry}' is not finite"}
            values.append(value)

        return {"valid": True, "values": values}

    def _parse_sequence(self, items: Sequence[Any], label: str) -> Dict[str, Any]:
        values = []
        for position, item in enumerate(items, start=1):
            try:
                if isinstance(item, (list, tuple)):
                    if len(item) != 2:
                        raise ValueError
                    value = complex(float(item[0]), float(item[1]))
                else:
                    value = complex(float(item), 0.0)
            except (TypeError, ValueError):
                return {"valid": False, "error": f"{label} entry {position} must be a number or [re, im]"}
            if not _finite(value):
                return {"valid": False, "error": f"{label} entry {position} is not finite"}
            values.append(value)
        if not values:
            return {"valid": False, "error": f"{label} cannot be empty"}
        return {"valid": True, "values": values}

    def validate_fixture(self, name: Optional[str]) -> Dict[str, Any]:
        if not name:
            return {"valid": False, "error": "Fixture name cannot be empty"}
        name = name.strip().lower()
        if name not in FIXTURE_NAMES:
            return {"valid": False, "error": f"Unknown fixture '{name}' (expected one of {', '.join(FIXTURE_NAMES)})"}
        return {"valid": True, "fixture": name}

    def validate_family(self, name: Optional[str]) -> Dict[str, Any]:
        name = (name or "infinite-series").strip().lower()
        if name in FAMILY_NAMES or self.series_regex.match(name):
            return {"valid": True, "family": name}
        return {"valid": False, "error": f"Unknown family '{name}'"}

    def validate_count(self, value: Any, label: str, minimum: int = 1, maximum: Optional[int] = None) -> Dict[str, Any]:
        """
        Validate an integer count against bounds

        Returns:
            Dictionary with validation results and the integer value
        """
        limit = self.max_samples if maximum is None else maximum
        try:
            count = int(value)
        except (TypeError, ValueError):
            return {"valid": False, "error": f"{label} must be an integer"}
        if count < minimum:
            return {"valid": False, "error": f"{label} must be at least {minimum}"}
        if count > limit:
            return {"valid": False, "error": f"{label} exceeds the limit of {limit:,}"}
        return {"valid": True, "value": count}

    def validate_format(self, fmt: Optional[str]) -> Dict[str, Any]:
        fmt = (fmt or "json").strip().lower()
        if fmt not in OUTPUT_FORMATS:
            return {"valid": False, "error": f"Output format must be one of {', '.join(OUTPUT_FORMATS)}"}
        return {"valid": True, "format": fmt}

    def validate_json_path(self, path: Optional[str], label: str = "file") -> Dict[str, Any]:
        """
        Validate a JSON input file (metric definition or replay report)

        Returns:
            Dictionary with validation results
        """
        if not path:
            return {"valid": False, "error": f"{label} path cannot be empty"}

        path = self.sanitize_input(path, max_length=4096)
        if not path.lower().endswith(".json"):
            return {"valid": False, "error": f"{label} must be a .json file"}
        if not os.path.isfile(path):
            return {"valid": False, "error": f"{label} not found: {path}"}

        size = os.path.getsize(path)
        if size == 0:
            return {"valid": False, "error": f"{label} is empty"}
        if size > MAX_METRIC_FILE_SIZE:
            return {"valid": False, "error": f"{label} is larger than {MAX_METRIC_FILE_SIZE:,} bytes"}

        return {"valid": True, "path": path, "size": size}

    def sanitize_input(self, input_text: Any, max_length: int = 1000) -> str:
        """
        Strip control characters and surrounding whitespace, then cap the length

        Args:
            input_text: Input text to sanitize
            max_length: Maximum allowed length

        Returns:
            Sanitized text
        """
        if input_text is None:
            return ""
        text = str(input_text)[:max_length]
        return self.control_chars.sub("", text).strip()


def collect_errors(results: List[Dict[str, Any]]) -> List[str]:
    """Error messages of every failed validation result"""
    return [r["error"] for r in results if not r.get("valid", False)]

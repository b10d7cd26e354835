import io
import json

import numpy as np
import pandas as pd
import pytest

from src.utils.report_writer import ReportWriter, jsonable, load_replay


def test_jsonable():
    value = {
        "c": 1 + 2j,
        "arr": np.array([1.5, 2.5]),
        "flag": np.bool_(True),
        "n": np.int64(3),
        "nested": [(np.complex128(0.5j),)],
    }
    assert jsonable(value) == {"c": [1.0, 2.0], "arr": [1.5, 2.5], "flag": True, "n": 3, "nested": [[[0.0, 0.5]]]}


class TestRender:
    def test_json_keeps_key_order(self):
        text = ReportWriter().to_json({"z": 1, "a": 2})
        assert list(json.loads(text)) == ["z", "a"]

    def test_csv_of_rows(self):
        report = {
            "command": "sample",
            "rows": [
                {"index": 0, "eta": "1:0", "valid": True, "pair": [1, 2]},
                {"index": 1, "eta": "0:1", "valid": False, "pair": [3, 4]},
            ],
        }
        frame = pd.read_csv(io.StringIO(ReportWriter().to_csv(report)))
        assert list(frame.columns) == ["index", "eta", "valid", "pair"]
        assert frame["valid"].tolist() == [True, False]
        assert json.loads(frame["pair"][1]) == [3, 4]

    def test_csv_of_findings_flattens_values(self):
        report = {"findings": [{"formula_id": "sigma1", "values": {"literal": 1.0}}]}
        frame = ReportWriter().to_frame(report)
        assert "values.literal" in frame.columns

    def test_pretty(self):
        text = ReportWriter().render({"verdict": "PASS", "checks": {"euler": {"max": 1.0 / 3}}}, "pretty")
        assert "verdict: PASS" in text
        assert "    max: 0.3333333333" in text


class TestWrite:
    def test_stream(self):
        stream = io.StringIO()
        outcome = ReportWriter().write({"a": 1}, stream=stream)
        assert outcome["success"]
        assert json.loads(stream.getvalue()) == {"a": 1}

    def test_file_in_new_directory(self, tmp_path):
        outcome = ReportWriter(output_dir=str(tmp_path)).write({"a": 1}, "json", "reports/out.json")
        assert outcome["success"]
        assert (tmp_path / "reports" / "out.json").exists()

    def test_unwritable_path(self, tmp_path):
        outcome = ReportWriter().write({"a": 1}, "json", str(tmp_path))
        assert not outcome["success"]


class TestReplay:
    def test_audit_witnesses(self, tmp_path):
        witness = {"z": [[0, 0]], "eta": [[1, 0]]}
        path = tmp_path / "audit.json"
        path.write_text(
            json.dumps(
                {
                    "metric": {"fixture": "flat-real"},
                    "findings": [
                        {"formula_id": "sigma1", "witness": witness},
                        {"formula_id": "sigma2", "witness": None},
                    ],
                }
            )
        )
        metric, points = load_replay(str(path))
        assert metric == {"fixture": "flat-real"}
        assert points == [witness]
        assert load_replay(str(path), "sigma1")[1] == [witness]
        with pytest.raises(ValueError):
            load_replay(str(path), "sigma2")

    def test_eval_points(self, tmp_path):
        path = tmp_path / "eval.json"
        point = {"z": [[0, 0]], "eta": [[1, 0]]}
        path.write_text(json.dumps({"metric": {}, "points": [{"point": point}]}))
        assert load_replay(str(path))[1] == [point]

    def test_verify_check_witnesses(self, tmp_path):
        first = {"z": [[0, 0]], "eta": [[1, 0]]}
        second = {"z": [[0, 0]], "eta": [[0.5, 0.25]]}
        path = tmp_path / "verify.json"
        path.write_text(
            json.dumps(
                {
                    "metric": {"fixture": "flat-real"},
                    "checks": {
                        "euler": {"max": 0.0, "witness": first},
                        "lowering": {"max": 0.0, "witness": second},
                        "angular": {"max": 0.0, "witness": first},
                    },
                }
            )
        )
        assert load_replay(str(path))[1] == [first, second]
        assert load_replay(str(path), "lowering")[1] == [second]

    def test_sample_rows(self, tmp_path):
        path = tmp_path / "sample.json"
        rows = [
            {"index": 0, "z": "0:0", "eta": "0.1:-0.3333333333333333"},
            {"index": 1, "z": "0.5:0", "eta": "1:2"},
        ]
        path.write_text(json.dumps({"metric": {}, "rows": rows}))
        points = load_replay(str(path))[1]
        assert points == [
            {"z": [[0.0, 0.0]], "eta": [[0.1, -0.3333333333333333]]},
            {"z": [[0.5, 0.0]], "eta": [[1.0, 2.0]]},
        ]

    def test_not_a_report(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]")
        with pytest.raises(ValueError):
            load_replay(str(path))

import pytest

from src.processors.metric_model import FIXTURE_NAMES, fixture_by_name
from src.utils.validation import InputValidator, collect_errors


@pytest.fixture
def validator():
    return InputValidator(max_samples=1000, max_jobs=8)


class TestComplexLists:
    @pytest.mark.parametrize(
        "text, expected",
        [
            ("1:0.5,2", [1 + 0.5j, 2]),
            (":1", [1j]),
            ("1e-3:-2, .5", [0.001 - 2j, 0.5]),
            ("-1.5:+2", [-1.5 + 2j]),
        ],
    )
    def test_valid(self, validator, text, expected):
        result = validator.parse_complex_list(text)
        assert result["valid"]
        assert result["values"] == expected

    @pytest.mark.parametrize("text", ["", "  ", None, "abc", "1:2:3", "1,,2", "i"])
    def test_invalid(self, validator, text):
        assert not validator.parse_complex_list(text, "--eta")["valid"]

    def test_error_names_the_entry(self, validator):
        result = validator.parse_complex_list("1,x", "--eta")
        assert "--eta entry 2" in result["error"]

    def test_sequences(self, validator):
        assert validator.parse_complex_list([[1, 2], 3])["values"] == [1 + 2j, 3]
        assert not validator.parse_complex_list([[1, 2, 3]])["valid"]
        assert not validator.parse_complex_list([])["valid"]

    @pytest.mark.parametrize("value", ["1e400", "1:-1e999", [float("nan")], [[1, float("inf")]], ["nan"]])
    def test_non_finite_entries(self, validator, value):
        result = validator.parse_complex_list(value, "--eta")
        assert not result["valid"]
        assert "not finite" in result["error"]

    def test_dimension_cap(self, validator):
        assert not validator.parse_complex_list(",".join(["1"] * 65))["valid"]


class TestNames:
    def test_fixture(self, validator):
        assert validator.validate_fixture(" Flat-Real ")["fixture"] == "flat-real"
        assert not validator.validate_fixture("hyperbolic")["valid"]
        assert not validator.validate_fixture("")["valid"]

    def test_every_fixture_is_accepted(self, validator):
        for name in FIXTURE_NAMES:
            assert validator.validate_fixture(name)["valid"]
            assert fixture_by_name(name).name == name

    @pytest.mark.parametrize("name", [None, "randers", "series-12", "MATSUMOTO"])
    def test_family(self, validator, name):
        assert validator.validate_family(name)["valid"]

    def test_unknown_family(self, validator):
        assert not validator.validate_family("series-")["valid"]

    def test_format(self, validator):
        assert validator.validate_format(None)["format"] == "json"
        assert validator.validate_format("CSV")["format"] == "csv"
        assert not validator.validate_format("xml")["valid"]


class TestCounts:
    def test_bounds(self, validator):
        assert validator.validate_count("5", "--samples")["value"] == 5
        assert not validator.validate_count(0, "--samples")["valid"]
        assert not validator.validate_count(1001, "--samples")["valid"]
        assert not validator.validate_count("many", "--samples")["valid"]
        assert validator.validate_count(8, "--jobs", 1, 8)["valid"]
        assert not validator.validate_count(9, "--jobs", 1, 8)["valid"]


class TestPaths:
    def test_json_file(self, validator, tmp_path):
        path = tmp_path / "metric.json"
        path.write_text('{"n": 1}')
        result = validator.validate_json_path(str(path))
        assert result["valid"]
        assert result["size"] == 8

    def test_rejections(self, validator, tmp_path):
        text_file = tmp_path / "metric.txt"
        text_file.write_text("{}")
        empty = tmp_path / "empty.json"
        empty.write_text("")
        assert not validator.validate_json_path(str(text_file))["valid"]
        assert not validator.validate_json_path(str(empty))["valid"]
        assert not validator.validate_json_path(str(tmp_path / "missing.json"))["valid"]
        assert not validator.validate_json_path("")["valid"]


def test_sanitize(validator):
    assert validator.sanitize_input("  a\x00b\x1fc ") == "abc"
    assert validator.sanitize_input("x" * 20, max_length=5) == "xxxxx"
    assert validator.sanitize_input(None) == ""


def test_collect_errors():
    results = [{"valid": True}, {"valid": False, "error": "one"}, {"valid": False, "error": "two"}]
    assert collect_errors(results) == ["one", "two"]

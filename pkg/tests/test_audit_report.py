import pytest

from src.processors.alphabeta_family import RANDERS
from src.processors.audit_report import (
    CONSISTENT,
    DISCREPANT,
    INDETERMINATE,
    REGISTRY,
    AuditThresholds,
    Finding,
    audit_document,
    audit_point,
    classify,
    dumps_report,
    run_audit,
)
from src.utils.errors import ConfigError
from tests.conftest import make_point


@pytest.fixture(scope="module")
def flat_findings():
    from src.processors.metric_model import flat_real

    return {f.formula_id: f for f in run_audit(flat_real(), 30, 42)}


class TestClassify:
    def test_no_values(self):
        assert classify([], AuditThresholds()) == INDETERMINATE

    def test_consistent(self):
        assert classify([1e-9] * 20, AuditThresholds()) == CONSISTENT

    def test_discrepant_needs_enough_points(self):
        assert classify([1.0] * 10, AuditThresholds()) == DISCREPANT
        assert classify([1.0] * 9 + [0.0], AuditThresholds()) == INDETERMINATE

    def test_in_between(self):
        assert classify([1e-4] * 20, AuditThresholds()) == INDETERMINATE

    def test_custom_thresholds(self):
        assert classify([1e-4] * 20, AuditThresholds(consistent=1e-3, discrepant=1e-2)) == CONSISTENT


class TestFlatRealAudit:
    def test_every_registered_formula_is_reported(self, flat_findings):
        assert list(flat_findings) == list(REGISTRY)

    @pytest.mark.parametrize(
        "formula_id",
        ["sigma1", "sigma2", "g_mixed_coeff", "det_theorem_text", "trailing_det_line", "mixed_rho0_display"],
    )
    def test_discrepant(self, flat_findings, formula_id):
        finding = flat_findings[formula_id]
        assert finding.status == DISCREPANT
        assert finding.max_rel_diff > 1e-3
        assert finding.witness_point is not None

    @pytest.mark.parametrize(
        "formula_id", ["sigma3", "det_proof_step", "rho_closed_forms", "example_validity_region"]
    )
    def test_consistent(self, flat_findings, formula_id):
        assert flat_findings[formula_id].status == CONSISTENT

    def test_finding_document(self, flat_findings):
        record = flat_findings["sigma1"].to_dict()
        assert record["paper_quote"] == REGISTRY["sigma1"][0]
        assert set(record["witness"]) == {"z", "eta"}
        assert record["sample_count"] == 30
        assert "literal" in record["values"] and "derived" in record["values"]


class TestOtherMetrics:
    def test_c3_example_has_empty_validity_region(self, c3_metric):
        findings = {f.formula_id: f for f in run_audit(c3_metric, 10, 1)}
        validity = findings["example_validity_region"]
        assert validity.status == DISCREPANT
        assert validity.values["valid_points"] == 0
        assert validity.note
        assert findings["sigma1"].status == INDETERMINATE
        assert findings["sigma1"].sample_count == 0

    def test_comparator_family(self, flat_metric):
        findings = {f.formula_id: f for f in run_audit(flat_metric, 10, 3, kind=RANDERS)}
        assert findings["sigma1"].status == INDETERMINATE
        assert "randers" in findings["sigma1"].note
        assert findings["l_i_restatement"].sample_count == 10

    def test_too_few_samples(self, flat_metric):
        with pytest.raises(ConfigError):
            run_audit(flat_metric, 9, 42)


def test_report_is_deterministic(flat_metric):
    first = audit_document(flat_metric, run_audit(flat_metric, 12, 7, jobs=1), 7, 12)
    second = audit_document(flat_metric, run_audit(flat_metric, 12, 7, jobs=2), 7, 12)
    assert dumps_report(first) == dumps_report(second)
    assert first["metric"]["fixture"] == "flat-real"
    assert first["family"] == "infinite-series"


def test_audit_point_records_failures(flat_metric):
    result = audit_point(flat_metric, make_point([0, 0]))
    assert result == {"checks": {}, "errors": {"point": "ZeroSection"}}


def test_unevaluated_finding_round_trip():
    record = Finding("lowering_indices", INDETERMINATE, 0.0, 0).to_dict()
    assert record["witness"] is None
    assert record["paper_quote"] == REGISTRY["lowering_indices"][0]

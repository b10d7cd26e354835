import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.processors.invariants import DERIVED, sigma_invariants
from src.processors.metric_model import flat_real, sample_valid_points
from src.processors.rank1_inverse import (
    Rank1Step,
    determinant_audit,
    invert_pipeline,
    printed_omega_gamma,
    proof_p_q,
    rank1_update,
    rel_diff_c,
)
from src.processors.tensor_engine import point_tensors
from src.utils.errors import NotNonHermitian, StepSingular, UpdateSingular
from src.utils.linalg_core import CMatrix, lu_invert, max_abs, residual_to_identity
from tests.conftest import make_point


class TestRankOneUpdate:
    def test_plus_branch(self):
        h_inv, det = rank1_update(Rank1Step.build(CMatrix.identity(2), 1.0, [1, 0], +1))
        assert np.allclose(h_inv.entries, np.diag([0.5, 1]))
        assert det == pytest.approx(2)

    def test_minus_branch(self):
        h_inv, det = rank1_update(Rank1Step.build(CMatrix.identity(2), 1.0, [0.5, 0], -1))
        assert np.allclose(h_inv.entries, np.diag([1 / 0.75, 1]))
        assert det == pytest.approx(0.75)

    def test_singular_update(self):
        with pytest.raises(UpdateSingular):
            rank1_update(Rank1Step.build(CMatrix.identity(2), 1.0, [1, 0], -1))

    def test_complex_vector_is_not_conjugated(self):
        # C = (i, 0) gives C² = −1, so Q + CCᵀ is singular
        with pytest.raises(UpdateSingular):
            rank1_update(Rank1Step.build(CMatrix.identity(2), 1.0, [1j, 0], +1))

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 10_000), sign=st.sampled_from([1, -1]))
    def test_against_lu(self, seed, sign):
        rng = np.random.default_rng(seed)
        raw = rng.uniform(-1, 1, (3, 3)) + 1j * rng.uniform(-1, 1, (3, 3))
        q = CMatrix.symmetric(4 * np.eye(3) + 0.5 * (raw + raw.T))
        c = 0.5 * (rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3))
        q_lu = lu_invert(q)
        step = Rank1Step.build(q_lu.inverse, q_lu.determinant, c, sign)
        if abs(step.factor) < 1e-3:
            return
        h_inv, det = rank1_update(step)
        direct = lu_invert(q.entries + sign * np.outer(c, c))
        assert max_abs(h_inv.entries - direct.inverse.entries) <= 1e-9 * max(1.0, max_abs(direct.inverse.entries))
        assert rel_diff_c(det, direct.determinant) <= 1e-10


class TestPipeline:
    def test_flat_real_scalars(self, flat3_metric):
        gv, _, inv, t = point_tensors(flat3_metric, make_point([1, 0]))
        result = invert_pipeline(gv, inv, t=t)
        assert result.tau == pytest.approx(5 / 3)
        assert [s.factor for s in result.per_step] == pytest.approx([1.5, 5 / 3, 0.6])
        assert residual_to_identity(result.g_inv.entries, t.g.entries) <= 1e-12
        assert result.det_g == pytest.approx(1.5 * (81 / 8) ** 2)

    def test_against_lu_on_random_points(self, random_metric):
        for p in sample_valid_points(random_metric, 5, seed=9):
            gv, _, inv, t = point_tensors(random_metric, p)
            result = invert_pipeline(gv, inv, t=t)
            direct = lu_invert(t.g)
            scale = max_abs(direct.inverse.entries)
            assert max_abs(result.g_inv.entries - direct.inverse.entries) <= 1e-9 * scale
            assert rel_diff_c(result.det_g, direct.determinant) <= 1e-9

    def test_one_dimension(self):
        m = flat_real([3.0])
        gv, _, inv, t = point_tensors(m, make_point([1]))
        result = invert_pipeline(gv, inv, t=t)
        assert result.g_inv.entries[0, 0] == pytest.approx(1 / t.g.entries[0, 0])
        assert not result.expansion_unique

    def test_vanishing_one_form(self):
        m = flat_real([0.0, 0.0])
        gv, _, inv, t = point_tensors(m, make_point([1, 0]))
        with pytest.raises(StepSingular) as info:
            invert_pipeline(gv, inv, t=t)
        assert info.value.step == 1

    def test_hermitian_metric_rejected(self, c3_metric):
        gv, _, inv, t = point_tensors(c3_metric, make_point([1, 1, 1]))
        with pytest.raises(NotNonHermitian):
            invert_pipeline(gv, inv, t=t)

    def test_expansion_coefficients(self, random_metric):
        for p in sample_valid_points(random_metric, 5, seed=21):
            gv, _, inv, t = point_tensors(random_metric, p)
            result = invert_pipeline(gv, inv, t=t)
            assert result.expansion_unique
            omega, _ = printed_omega_gamma(result.sigma, result.scalars, result.tau)
            _, q = proof_p_q(result.sigma, result.scalars, result.tau)
            assert rel_diff_c(omega, result.omega_coeff) <= 1e-7
            assert rel_diff_c(q, result.gamma_coeff) <= 1e-7


class TestDeterminantAudit:
    def test_flat_real(self, flat3_metric):
        gv, _, inv, t = point_tensors(flat3_metric, make_point([1, 0]))
        report = determinant_audit(gv, inv, sigma_invariants(gv.alpha, gv.beta, DERIVED), t)
        assert report["success"]
        diffs = report["rel_diff"]
        assert diffs["lu_vs_pipeline"] <= 1e-12
        assert diffs["lu_vs_proof_step"] <= 1e-12
        assert diffs["lu_vs_theorem_text"] > 0.5
        assert report["indistinguishable_here"] is False
        assert set(report["trailing_det_line"]) == {"base", "vs_matsumoto_rho0", "vs_infinite_series_rho0"}

    def test_trailing_line_matches_matsumoto(self, random_metric):
        p = sample_valid_points(random_metric, 1, seed=2)[0]
        gv, _, inv, t = point_tensors(random_metric, p)
        trailing = determinant_audit(gv, inv, None, t)["trailing_det_line"]
        assert trailing["vs_matsumoto_rho0"] <= 1e-12
        assert trailing["vs_infinite_series_rho0"] > 1e-3

    def test_pipeline_failure_is_reported(self):
        m = flat_real([0.0, 0.0])
        gv, _, inv, t = point_tensors(m, make_point([1, 0]))
        report = determinant_audit(gv, inv, None, t)
        assert report["success"] is False
        assert report["error"] == "StepSingular"

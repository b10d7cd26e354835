import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.processors.metric_model import (
    EvaluationPoint,
    alpha_beta,
    contraction_scalars,
    fixture_by_name,
    flat_real,
    grid_points,
    ground_values,
    is_valid,
    load_metric_file,
    margin_predicate,
    metric_from_source,
    random_seeded,
    sample_points,
    sample_valid_points,
)
from src.utils.errors import ConfigError, DegenerateAlpha, DimensionMismatch, NoValidPoints, ZeroSection
from tests.conftest import make_point


class TestGroundValues:
    def test_flat_real(self, flat_metric):
        gv = ground_values(flat_metric, make_point([1, 0]))
        assert gv.alpha == pytest.approx(1.0)
        assert gv.beta == pytest.approx(2.0)
        assert np.allclose(gv.l, [1, 0])
        assert gv.valid

    def test_c3_example_at_origin(self, c3_metric):
        gv = ground_values(c3_metric, make_point([1, 1, 1]))
        assert gv.alpha ** 2 == pytest.approx(3.0)
        assert gv.beta == pytest.approx(1.0)
        assert not gv.valid

    def test_scaling_doubles_alpha_and_beta(self, random_metric):
        p = make_point([0.6 + 0.1j, -0.2j, 0.5], z=[0.1, 0.2j, -0.1])
        gv = ground_values(random_metric, p)
        gv2 = ground_values(random_metric, p.scaled(2.0))
        assert gv2.alpha == pytest.approx(2 * gv.alpha, rel=1e-12)
        assert gv2.beta == pytest.approx(2 * gv.beta, rel=1e-12)

    def test_imaginary_direction_is_degenerate(self, flat_metric):
        with pytest.raises(DegenerateAlpha):
            ground_values(flat_metric, make_point([1j, 0]))

    def test_zero_section(self, flat_metric):
        with pytest.raises(ZeroSection):
            ground_values(flat_metric, make_point([0, 0]))

    def test_dimension_mismatch(self, flat_metric):
        with pytest.raises(DimensionMismatch):
            ground_values(flat_metric, make_point([1, 0, 0]))

    def test_alpha_beta_matches_ground_values(self, random_metric):
        p = make_point([0.7, 0.1j, -0.3 + 0.2j])
        alpha_sq, beta = alpha_beta(random_metric, p)
        gv = ground_values(random_metric, p)
        assert alpha_sq == pytest.approx(gv.alpha ** 2)
        assert beta == pytest.approx(gv.beta)

    def test_validity_flag(self):
        assert is_valid(1.0, 2.0)
        assert not is_valid(2.0, 1.0)
        assert not is_valid(0.0, 1.0)


class TestContractionScalars:
    @pytest.mark.parametrize("b, expected", [(2.0, (1, 2, 4, 2)), (3.0, (1, 3, 9, 3))])
    def test_flat_real(self, b, expected):
        m = flat_real([b, 0.0])
        cs = contraction_scalars(ground_values(m, make_point([1, 0])))
        assert (cs.gamma, cs.epsilon, cs.omega, cs.delta) == pytest.approx(expected)
        assert cs.det_a == pytest.approx(1)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 1000), point_seed=st.integers(0, 1000))
    def test_contraction_identities(self, seed, point_seed):
        m = random_seeded(seed)
        p = sample_points(m, 1, point_seed)[0]
        try:
            gv = ground_values(m, p)
        except DegenerateAlpha:
            return
        cs = contraction_scalars(gv)
        alpha_sq = gv.alpha ** 2
        assert abs(cs.gamma + np.conj(cs.gamma) - 2 * alpha_sq) <= 1e-12 * max(1.0, 2 * alpha_sq)
        assert abs(cs.epsilon + np.conj(cs.epsilon) - 2 * gv.beta) <= 1e-12 * max(1.0, abs(2 * gv.beta))
        assert abs(cs.delta - cs.epsilon) <= 1e-12 * max(1.0, abs(cs.epsilon))
        assert np.allclose(cs.eta_up_check, gv.eta, atol=1e-12)

    def test_angular_identity(self, random_metric):
        gv = ground_values(random_metric, make_point([0.8 - 0.2j, 0.3j, 0.1], z=[0.2, 0.1j, 0]))
        total = np.sum(gv.l * gv.eta) + np.sum(gv.l_bar * np.conj(gv.eta))
        assert total.real == pytest.approx(2 * gv.alpha ** 2, rel=1e-12)
        assert abs(total.imag) <= 1e-12


class TestFixtures:
    def test_flat_real_dimension_follows_b(self):
        m = flat_real([1, 2, 3])
        assert m.n == 3
        assert m.non_hermitian

    def test_c3_example_is_hermitian(self, c3_metric):
        assert c3_metric.n == 3
        assert not c3_metric.non_hermitian

    def test_random_seeded_is_reproducible(self):
        assert random_seeded(7).fields == random_seeded(7).fields
        assert random_seeded(7).fields != random_seeded(8).fields

    def test_unknown_fixture(self):
        with pytest.raises(ConfigError):
            fixture_by_name("hyperbolic")

    def test_source_round_trip(self):
        m = random_seeded(11, b=[2, 0.5j])
        again = metric_from_source(json.loads(json.dumps(m.source)))
        assert again.fields == m.fields

    def test_load_metric_file(self, tmp_path):
        path = tmp_path / "metric.json"
        path.write_text(json.dumps({"n": 2, "a_sym": [["1", "0"], ["0", "exp(z1+conj(z1))"]], "b": ["2", "0"]}))
        m = load_metric_file(str(path))
        assert m.n == 2
        assert m.source == {"file": str(path)}
        gv = ground_values(m, make_point([1, 1]))
        assert gv.alpha ** 2 == pytest.approx(2.0)

    def test_missing_metric_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_metric_file(str(tmp_path / "absent.json"))

    def test_point_from_bad_dict(self):
        with pytest.raises(ConfigError):
            EvaluationPoint.from_dict({"eta": [1, 2]})

    def test_point_dict_round_trip(self):
        p = make_point([1 + 2j, -0.5], z=[0.25j, 3])
        again = EvaluationPoint.from_dict(p.to_dict())
        assert np.array_equal(again.eta, p.eta)
        assert np.array_equal(again.z, p.z)


class TestSampling:
    def test_sample_points_are_seeded(self, flat_metric):
        first = sample_points(flat_metric, 5, seed=42)
        second = sample_points(flat_metric, 5, seed=42)
        assert [p.to_dict() for p in first] == [p.to_dict() for p in second]
        assert all(np.max(np.abs(p.eta.real)) <= 1.0 for p in first)

    def test_valid_points_satisfy_predicate(self, flat_metric):
        accept = margin_predicate(0.05, 0.1)
        points = sample_valid_points(flat_metric, 20, seed=3, predicate=accept)
        assert len(points) == 20
        for p in points:
            gv = ground_values(flat_metric, p)
            assert accept(gv.alpha, gv.beta)

    def test_c3_has_no_valid_points(self, c3_metric):
        with pytest.raises(NoValidPoints):
            sample_valid_points(c3_metric, 5, seed=1, max_attempts=300)

    @pytest.mark.parametrize("k, expected", [(2, 8), (4, 64)])
    def test_grid_size(self, c3_metric, flat_metric, k, expected):
        assert len(grid_points(c3_metric, k)) == expected
        assert len(grid_points(flat_metric, k)) == expected

    def test_grid_on_one_dimension(self):
        m = flat_real([2.0])
        assert len(grid_points(m, 5)) == 25

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.processors.alphabeta_family import (
    INFINITE_SERIES,
    KROPINA,
    MATSUMOTO,
    RANDERS,
    Jet2,
    custom_family,
    euler_residuals,
    family_by_name,
    jet_agreement,
    jet_fd,
    jet_infinite_series,
    series_family,
)
from src.utils.errors import ConfigError, PoleAtAlphaEqualsBeta, TooCloseToSingularLocus


class TestInfiniteSeriesJet:
    def test_spot_value(self):
        jet = jet_infinite_series(1.0, 2.0)
        assert jet.as_tuple() == pytest.approx((16, 32, 0, 96, -32, 16), abs=1e-12)

    def test_second_spot_value(self):
        jet = jet_infinite_series(1.0, 3.0)
        assert jet.L == pytest.approx(20.25)
        assert jet.L_alpha == pytest.approx(20.25)
        assert jet.L_beta == pytest.approx(6.75)
        assert 1 * jet.L_alpha + 3 * jet.L_beta == pytest.approx(2 * jet.L)

    def test_vanishing_beta(self):
        assert jet_infinite_series(1.0, 0.0).as_tuple() == (0, 0, 0, 0, 0, 0)

    def test_pole(self):
        with pytest.raises(PoleAtAlphaEqualsBeta):
            jet_infinite_series(1.0, 1.0)

    def test_family_jet_uses_closed_form(self):
        assert INFINITE_SERIES.jet(1.0, 2.0) == jet_infinite_series(1.0, 2.0)


class TestFiniteDifferenceJet:
    def test_matches_closed_form(self):
        assert jet_agreement(jet_fd(INFINITE_SERIES, 1.0, 2.0), jet_infinite_series(1.0, 2.0)) <= 1e-5

    def test_randers(self):
        jet = jet_fd(RANDERS, 1.0, 2.0)
        assert jet.L == pytest.approx(9.0)
        assert jet.L_alpha == pytest.approx(6.0, rel=1e-8)

    def test_beta_independent_custom_family(self):
        jet = jet_fd(custom_family("alpha-squared", lambda a, b: a * a), 2.0, 5.0)
        assert jet.L_beta == 0
        assert jet.L_betabeta == 0
        assert jet.L_alpha == pytest.approx(4.0, rel=1e-8)

    @pytest.mark.parametrize("kind, alpha, beta", [(KROPINA, 1.0, 2.0), (MATSUMOTO, 1.0, 3.0), (RANDERS, 0.5, -2.0)])
    def test_comparator_families(self, kind, alpha, beta):
        assert jet_agreement(jet_fd(kind, alpha, beta), kind.jet(alpha, beta)) <= 1e-5

    def test_too_close_to_locus(self):
        with pytest.raises(TooCloseToSingularLocus):
            jet_fd(INFINITE_SERIES, 1.0, 1.0 + 1e-7)

    @settings(max_examples=200, deadline=None)
    @given(
        alpha=st.floats(0.05, 10.0, allow_nan=False),
        gap=st.floats(0.1, 10.0, allow_nan=False),
    )
    def test_closed_form_against_finite_differences(self, alpha, gap):
        beta = alpha + gap
        jet = jet_infinite_series(alpha, beta)
        assert jet_agreement(jet, jet_fd(INFINITE_SERIES, alpha, beta)) <= 1e-5
        assert max(euler_residuals(jet, alpha, beta)) <= 1e-10


class TestEulerResiduals:
    def test_closed_form(self):
        assert max(euler_residuals(jet_infinite_series(1.0, 2.0), 1.0, 2.0)) <= 1e-12

    def test_injected_fault(self):
        jet = jet_infinite_series(1.0, 2.0)
        broken = Jet2(jet.L, jet.L_alpha, jet.L_beta + 1, jet.L_alphaalpha, jet.L_alphabeta, jet.L_betabeta)
        r1, r2, r3, r4 = euler_residuals(broken, 1.0, 2.0)
        assert r1 == pytest.approx(2 / 32)
        assert r2 == pytest.approx(0, abs=1e-12)
        assert r3 == pytest.approx(1 / 32)

    def test_finite_difference_jet(self):
        assert max(euler_residuals(jet_fd(INFINITE_SERIES, 1.5, 4.0), 1.5, 4.0)) <= 1e-5


class TestFamilies:
    @pytest.mark.parametrize("name", ["infinite-series", "randers", "kropina", "matsumoto", " Randers "])
    def test_known_names(self, name):
        assert family_by_name(name).name == name.strip().lower()

    def test_series_name(self):
        assert family_by_name("series-3").name == "series-3"

    @pytest.mark.parametrize("name", ["finsler", "series-x", "series--1"])
    def test_unknown_names(self, name):
        with pytest.raises(ConfigError):
            family_by_name(name)

    def test_partial_sums_converge(self):
        assert series_family(60).L(1.0, 3.0) == pytest.approx(20.25, rel=1e-12)
        assert series_family(2).L(1.0, 3.0) < 20.25

    def test_singular_loci(self):
        assert INFINITE_SERIES.singular_distance(1.0, 3.0) == 2.0
        assert KROPINA.singular_distance(1.0, -3.0) == 3.0
        assert MATSUMOTO.singular_locus == "alpha=beta"
        assert RANDERS.singular_distance(1.0, 2.0) == math.inf

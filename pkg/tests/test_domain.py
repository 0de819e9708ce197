import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import spearmanr

from riskattr.audit import TrainingDomain, fit_domain, generate_leverage_data, monotone_chain
from riskattr.audit.domain import is_convex_ccw
from riskattr.core import FeatureVector
from riskattr.errors import ContractViolation, InsufficientDataError


class TestMonotoneChain:
    def test_square_with_interior_and_collinear_points(self):
        pts = [[0, 0], [1, 0], [2, 0], [2, 2], [0, 2], [1, 1], [0, 1]]
        hull = monotone_chain(pts)
        assert {tuple(p) for p in hull} == {(0, 0), (2, 0), (2, 2), (0, 2)}
        assert is_convex_ccw(hull)

    def test_degenerate_inputs(self):
        assert len(monotone_chain([[1, 1], [1, 1]])) == 1
        assert len(monotone_chain([[0, 0], [1, 1], [2, 2]])) == 2

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 10_000), n=st.integers(3, 80))
    def test_hull_contains_all_inputs(self, seed, n):
        pts = np.random.default_rng(seed).normal(size=(n, 2))
        dom = fit_domain(pts, "hull2d", ("x", "y"), hull_features=("x", "y"))
        assert dom.contains(pts).all()
        assert is_convex_ccw(dom.hull)


class TestTrainingDomain:
    def test_axis_box(self):
        dom = fit_domain(np.array([[0, 0], [1, 2], [0.5, 1]]), "axis-box", ("a", "b"))
        np.testing.assert_array_equal(dom.contains(np.array([[0.5, 1.9], [1.1, 1.0]])), [True, False])

    def test_column_mapping_by_name(self):
        dom = fit_domain(np.array([[0, 0], [1, 2], [0.5, 1]]), "axis-box", ("a", "b"))
        assert dom.contains(np.array([[1.9, 0.5, 99.0]]), names=("b", "a", "c"))[0]

    def test_point_cloud_is_extended(self):
        pts = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        dom = fit_domain(pts, "point-cloud", ("a", "b"), radius=0.1)
        assert dom.extended
        np.testing.assert_array_equal(dom.contains(np.array([[0.05, 0.0], [0.5, 0.5]])), [True, False])

    def test_json_round_trip(self):
        pts = np.random.default_rng(1).normal(size=(30, 3))
        for mode in ("axis-box", "hull2d", "point-cloud"):
            dom = fit_domain(pts, mode, ("S", "r", "sigma"))
            again = TrainingDomain.from_dict(dom.to_dict())
            q = np.random.default_rng(2).normal(size=(50, 3))
            np.testing.assert_array_equal(dom.contains(q), again.contains(q))

    def test_too_few_points(self):
        with pytest.raises(InsufficientDataError):
            fit_domain(np.zeros((2, 2)), "axis-box", ("a", "b"))

    def test_bad_mode(self):
        with pytest.raises(ContractViolation):
            fit_domain(np.zeros((5, 2)), "ellipse", ("a", "b"))

    def test_feature_vectors_accepted(self):
        pts = [FeatureVector([i, i * i], ("S", "sigma")) for i in range(5)]
        assert fit_domain(pts, "hull2d").names == ("S", "sigma")


class TestLeverageData:
    def test_rank_correlation_and_ranges(self):
        pts = generate_leverage_data(1000, (700, 1500), (0.1, 0.9), -0.9, seed=0)
        X = np.array([p.values for p in pts])
        rho = spearmanr(X[:, 0], X[:, 1]).statistic
        assert rho == pytest.approx(-0.9, abs=0.03)
        assert X[:, 0].min() >= 700 and X[:, 0].max() <= 1500

    def test_deterministic(self):
        a = generate_leverage_data(50, (1, 2), (1, 2), -0.5, seed=3)
        b = generate_leverage_data(50, (1, 2), (1, 2), -0.5, seed=3)
        assert a == b

    def test_other_ranges_use_option_order(self):
        pts = generate_leverage_data(20, (1, 2), (1, 2), -0.5, other_ranges={"K": (3, 4), "r": (0, 0.1)})
        assert pts[0].names == ("S", "r", "K", "sigma")

    @pytest.mark.parametrize("corr", [0.2, -1.0])
    def test_correlation_must_be_negative(self, corr):
        with pytest.raises(ContractViolation):
            generate_leverage_data(20, (1, 2), (1, 2), corr)

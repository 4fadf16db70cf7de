import math

import numpy as np
import pytest

import gcmkit as gk
from gcmkit import (
    AdditiveNoiseModel,
    CausalGraph,
    Dataset,
    Empirical,
    Gaussian,
    GcmModel,
    LinearModel,
    NonInvertibleError,
    OutlierScorer,
    QueryError,
)
from conftest import make_ground_truth_chain, sample_chain_data


def make_two_node_model(coef, noise_std=1.0):
    graph = CausalGraph(["X", "Y"], [("X", "Y")])
    model = GcmModel(graph)
    model = gk.assign(model, "X", Gaussian(0.0, 1.0), ground_truth=True)
    noise = Gaussian(0.0, noise_std) if noise_std > 0 else Empirical([0.0])
    anm = AdditiveNoiseModel(LinearModel([coef], 0.0), noise, gk.InputEncoder.continuous(1))
    return gk.assign(model, "Y", anm, ground_truth=True)


class TestArrowStrength:
    def test_unit_coefficient_msd(self):
        model = make_two_node_model(coef=1.0)
        strength = gk.arrow_strength(model, ("X", "Y"), n=50000, seed=0)
        assert strength == pytest.approx(2.0, abs=0.06)

    def test_triple_coefficient_msd(self):
        model = make_two_node_model(coef=3.0)
        strength = gk.arrow_strength(model, ("X", "Y"), n=50000, seed=1)
        assert strength == pytest.approx(18.0, abs=0.5)

    def test_null_edge_is_exactly_zero(self):
        model = make_two_node_model(coef=0.0)
        assert gk.arrow_strength(model, ("X", "Y"), n=2000, seed=2) == 0.0

    def test_nonnegative(self):
        model = make_two_node_model(coef=-1.5)
        assert gk.arrow_strength(model, ("X", "Y"), n=5000, seed=3) >= 0.0

    def test_unknown_edge(self):
        model = make_two_node_model(coef=1.0)
        with pytest.raises(QueryError, match="no edge"):
            gk.arrow_strength(model, ("Y", "X"))

    def test_msd_requires_continuous_child(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(300)
        labels = np.array(["a" if v < 0 else "b" for v in x], dtype=object)
        data = Dataset(["X", "C"], [x, labels])
        model = gk.fit(gk.auto_assign(CausalGraph(["X", "C"], [("X", "C")]), data), data)
        with pytest.raises(QueryError, match="continuous"):
            gk.arrow_strength(model, ("X", "C"), measure="coupled_msd", n=500)
        # auto falls back to the KL measure for a categorical child
        strength = gk.arrow_strength(model, ("X", "C"), n=1500, seed=4)
        assert strength >= 0.0

    def test_kl_measure_orders_edge_strengths(self):
        weak = gk.arrow_strength(make_two_node_model(0.2), ("X", "Y"), measure="kl", n=2000, seed=5)
        strong = gk.arrow_strength(make_two_node_model(3.0), ("X", "Y"), measure="kl", n=2000, seed=5)
        assert strong > weak

    def test_seed_determinism(self):
        model = make_two_node_model(coef=1.0)
        a = gk.arrow_strength(model, ("X", "Y"), n=2000, seed=9)
        b = gk.arrow_strength(model, ("X", "Y"), n=2000, seed=9)
        assert a == b


class TestIntrinsicInfluence:
    def test_symmetric_two_node_case(self):
        model = make_two_node_model(coef=1.0)
        result = gk.intrinsic_influence(model, "Y", seed=0)
        assert result.scores["X"] == pytest.approx(1.0, abs=0.1)
        assert result.scores["Y"] == pytest.approx(1.0, abs=0.1)
        assert sum(result.scores.values()) == pytest.approx(result.total, abs=1e-9)

    def test_deterministic_node_is_null_player(self):
        model = make_two_node_model(coef=1.0, noise_std=0.0)
        result = gk.intrinsic_influence(model, "Y", outer_samples=50, inner_samples=300, seed=1)
        assert result.scores["X"] == pytest.approx(1.0, abs=0.1)
        assert result.scores["Y"] == pytest.approx(0.0, abs=0.05)

    def test_chain_unit_contributions(self):
        model = make_ground_truth_chain()
        result = gk.intrinsic_influence(model, "Z", seed=2)
        for node in ("X", "Y", "Z"):
            assert result.scores[node] == pytest.approx(1.0, abs=0.15)
        assert sum(result.scores.values()) == pytest.approx(result.total, abs=1e-9)

    def test_players_are_ancestral(self):
        model = make_ground_truth_chain()
        result = gk.intrinsic_influence(model, "Y", outer_samples=20, inner_samples=100, seed=3)
        assert set(result.scores) == {"X", "Y"}

    def test_categorical_target_rejected(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal(200)
        labels = np.array(["a" if v < 0 else "b" for v in x], dtype=object)
        data = Dataset(["X", "C"], [x, labels])
        model = gk.fit(gk.auto_assign(CausalGraph(["X", "C"], [("X", "C")]), data), data)
        with pytest.raises(QueryError, match="continuous"):
            gk.intrinsic_influence(model, "C")

    def test_categorical_ancestor_is_a_valid_player(self):
        rng = np.random.default_rng(8)
        labels = np.array(rng.choice(["a", "b"], 1000), dtype=object)
        y = np.where(labels == "a", -2.0, 2.0) + 0.1 * rng.standard_normal(1000)
        data = Dataset(["C", "Y"], [labels, y])
        model = gk.fit(gk.auto_assign(CausalGraph(["C", "Y"], [("C", "Y")]), data), data)
        result = gk.intrinsic_influence(model, "Y", outer_samples=40, inner_samples=200, seed=4)
        assert set(result.scores) == {"C", "Y"}
        # nearly all of Y's variance comes from the categorical switch
        assert result.scores["C"] > 10 * result.scores["Y"]
        assert sum(result.scores.values()) == pytest.approx(result.total, abs=1e-9)


class TestOutlierScorer:
    def test_bounds_and_monotonicity(self):
        rng = np.random.default_rng(2)
        scorer = OutlierScorer(rng.standard_normal(1000))
        values = np.linspace(0, 10, 25)
        scores = [scorer.score(v) for v in values]
        assert all(s >= 0 for s in scores)
        assert all(s <= math.log(1001) for s in scores)
        assert all(b >= a - 1e-12 for a, b in zip(scores, scores[1:]))

    def test_extreme_value_saturates(self):
        rng = np.random.default_rng(3)
        scorer = OutlierScorer(rng.standard_normal(500))
        assert scorer.score(1e6) == pytest.approx(math.log(501))

    def test_typical_value_scores_near_zero(self):
        rng = np.random.default_rng(4)
        scorer = OutlierScorer(rng.standard_normal(5000))
        assert scorer.score(0.0) <= 0.05


class TestAttributeAnomaly:
    def fit_chain(self, seed):
        data = sample_chain_data(2000, seed=seed)
        graph = CausalGraph(["X", "Y", "Z"], [("X", "Y"), ("Y", "Z")])
        return gk.fit(gk.auto_assign(graph, data), data)

    def test_injected_noise_is_found(self):
        model = self.fit_chain(seed=0)
        row = {"X": 0.0, "Y": 5.0, "Z": 5.0}  # N_Y = 5, other noises 0
        result = gk.attribute_anomaly(model, "Z", row, seed=0)
        assert max(result.scores, key=result.scores.get) == "Y"
        assert sum(result.scores.values()) == pytest.approx(result.total, abs=1e-9)

    def test_typical_row_scores_near_zero(self):
        model = self.fit_chain(seed=1)
        row = {"X": 0.0, "Y": 0.0, "Z": 0.0}
        result = gk.attribute_anomaly(model, "Z", row, seed=1)
        for score in result.scores.values():
            assert abs(score) <= 0.2

    def test_single_node_graph_is_exactly_marginal_score(self):
        rng = np.random.default_rng(5)
        data = Dataset(["X"], [rng.standard_normal(500)])
        model = gk.fit(gk.auto_assign(CausalGraph(["X"]), data), data)
        result = gk.attribute_anomaly(model, "X", {"X": 4.2}, seed=6)
        assert result.scores["X"] == result.total

    def test_classifier_in_ancestry_blocks_attribution(self):
        rng = np.random.default_rng(6)
        x = rng.standard_normal(300)
        labels = np.array(["a" if v < 0 else "b" for v in x], dtype=object)
        y = np.where(labels == "a", 0.0, 2.0) + rng.standard_normal(300)
        data = Dataset(["X", "C", "Y"], [x, labels, y])
        graph = CausalGraph(["X", "C", "Y"], [("X", "C"), ("C", "Y")])
        model = gk.fit(gk.auto_assign(graph, data), data)
        with pytest.raises(NonInvertibleError):
            gk.attribute_anomaly(model, "Y", {"X": 0.0, "C": "a", "Y": 0.0})

    def test_incomplete_row_rejected(self):
        model = self.fit_chain(seed=2)
        with pytest.raises(QueryError, match="missing"):
            gk.attribute_anomaly(model, "Z", {"Z": 5.0})


class TestDistributionChange:
    graph = CausalGraph(["X", "Y"], [("X", "Y")])

    def make_data(self, seed, y_offset=0.0, x_offset=0.0, n=3000):
        rng = np.random.default_rng(seed)
        x = x_offset + rng.standard_normal(n)
        y = x + y_offset + rng.standard_normal(n)
        return Dataset(["X", "Y"], [x, y])

    def test_mechanism_shift_attributed_to_y(self):
        old = self.make_data(seed=0)
        new = self.make_data(seed=1, y_offset=2.0)
        result = gk.distribution_change(self.graph, old, new, "Y", measure="mean_diff", seed=0)
        assert result.scores["Y"] == pytest.approx(2.0, abs=0.1)
        assert result.scores["X"] == pytest.approx(0.0, abs=0.1)
        assert sum(result.scores.values()) == pytest.approx(result.total - result.baseline, abs=1e-9)

    def test_no_change_scores_near_zero(self):
        old = self.make_data(seed=2)
        result = gk.distribution_change(self.graph, old, old, "Y", measure="mean_diff", seed=1)
        for score in result.scores.values():
            assert abs(score) <= 0.1

    def test_root_shift_attributed_to_x(self):
        old = self.make_data(seed=3)
        new = self.make_data(seed=4, x_offset=1.0)
        result = gk.distribution_change(self.graph, old, new, "Y", measure="mean_diff", seed=2)
        assert result.scores["X"] == pytest.approx(1.0, abs=0.1)
        assert result.scores["Y"] == pytest.approx(0.0, abs=0.1)

    def test_kl_measure_detects_variance_change(self):
        rng = np.random.default_rng(7)
        old = Dataset(["X", "Y"], [rng.standard_normal(2000), rng.standard_normal(2000)])
        rng = np.random.default_rng(8)
        x_new = rng.standard_normal(2000)
        new = Dataset(["X", "Y"], [x_new, 3.0 * rng.standard_normal(2000)])
        result = gk.distribution_change(
            CausalGraph(["X", "Y"]), old, new, "Y", measure="kl", num_samples=2000, seed=3
        )
        assert result.scores["Y"] > 0.2

    def test_incompatible_datasets_rejected(self):
        old = self.make_data(seed=5)
        labels = np.array(["a", "b"] * 1500, dtype=object)
        new = Dataset(["X", "Y"], [old.column("X"), labels])
        with pytest.raises(QueryError, match="incompatible"):
            gk.distribution_change(self.graph, old, new, "Y")

    def test_missing_column_rejected(self):
        old = self.make_data(seed=6)
        partial = Dataset(["X"], [old.column("X")])
        with pytest.raises(QueryError, match="cover"):
            gk.distribution_change(self.graph, old, partial, "Y")

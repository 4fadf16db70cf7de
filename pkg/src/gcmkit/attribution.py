"""Root-cause attribution queries on a fitted model.

Four queries share one pattern: define a set function over "players"
(upstream nodes, or their noise terms), evaluate it with seeded Monte Carlo,
and distribute the total with Shapley values.  Players are restricted to
ancestors of the target plus the target itself; other nodes are provably null
players, so evaluating them would be wasted work.

Every subset evaluation derives its seed from (master seed, subset bitmask)
and is cached per query, so results are deterministic no matter how the
Shapley engine schedules evaluations.
"""

import math
from dataclasses import dataclass

import numpy as np

from .data import CONTINUOUS, Dataset
from .exceptions import NonInvertibleError, QueryError
from .mechanisms import AdditiveNoiseModel, ClassifierFcm
from .model import GcmModel, auto_assign, fit
from .sampling import draw_noise_values, propagate_from_noise
from .seeds import derive_seed, rng_for
from .shapley import SetFunction, ShapleyConfig, estimate_shapley
from .stats import kl_divergence

DEFAULT_ICC_OUTER_SAMPLES = 100
DEFAULT_ICC_INNER_SAMPLES = 500
DEFAULT_ANOMALY_SAMPLES = 5000
DEFAULT_CHANGE_SAMPLES = 10000
_KL_NEIGHBORS = 5


@dataclass(frozen=True)
class AttributionResult:
    """Per-player scores plus the bookkeeping needed to reproduce them.

    ``total`` and ``baseline`` are the set-function values of the full and
    empty player sets; with the exact Shapley method the scores sum to
    ``total - baseline``.
    """

    scores: dict
    measure: str
    mc_budget: dict
    seed: int
    total: float
    baseline: float

    def to_json(self) -> dict:
        return {
            "scores": {k: float(v) for k, v in self.scores.items()},
            "measure": self.measure,
            "seed": self.seed,
            "budget": dict(self.mc_budget),
            "total": self.total,
            "baseline": self.baseline,
        }


class OutlierScorer:
    """Information-theoretic outlier score of a target value.

    The feature is the absolute standardized deviation from the reference
    sample's mean; the score is the negative log of the rank-based tail
    probability of reaching the value's feature, with add-one smoothing.  The
    score is nonnegative, bounded by log(M+1), and nondecreasing in the
    feature.
    """

    def __init__(self, reference_samples):
        reference = np.asarray(reference_samples, dtype=np.float64)
        if reference.size == 0:
            raise QueryError("outlier scorer needs reference samples")
        self._mean = float(reference.mean())
        std = float(reference.std())
        self._std = std if std > 0 else 1.0
        self._sorted_features = np.sort(self.feature(reference))

    @property
    def num_reference(self) -> int:
        return int(self._sorted_features.size)

    def feature(self, y):
        return np.abs(np.asarray(y, dtype=np.float64) - self._mean) / self._std

    def score(self, y) -> float:
        """-log of the smoothed tail probability P(feature >= feature(y))."""
        tail = self.num_reference - int(
            np.searchsorted(self._sorted_features, float(self.feature(y)), side="left")
        )
        return tail_log_score(tail, self.num_reference)


def tail_log_score(tail_count, num_samples) -> float:
    return -math.log((1 + tail_count) / (num_samples + 1))


def _players_for(graph, target):
    relevant = graph.ancestors(target) | {target}
    return tuple(node for node in graph.nodes if node in relevant)


def _tile(value, count):
    if isinstance(value, str):
        return np.full(count, value, dtype=object)
    return np.full(count, float(value))


def _shapley_scores(players, cached_value, shapley_config):
    config = shapley_config or ShapleyConfig(method="exact")
    phi = estimate_shapley(SetFunction(len(players), cached_value), config)
    return {player: float(phi[i]) for i, player in enumerate(players)}


def _cache_by_bits(players, compute_bits):
    cache = {}

    def evaluator(mask):
        bits = 0
        for i in range(len(players)):
            if mask[i]:
                bits |= 1 << i
        if bits not in cache:
            cache[bits] = compute_bits(bits)
        return cache[bits]

    return evaluator


def arrow_strength(model: GcmModel, edge, measure="auto", n=50000, seed=0) -> float:
    """Direct strength of one edge, by feeding the child an independent parent copy.

    ``coupled_msd`` (continuous children) draws joint samples, recomputes the
    child with the parent column replaced by a permuted copy while keeping the
    child's own noise and the other parents, and reports the mean squared
    difference.  ``kl`` reports a k-NN KL estimate between the joint samples
    of (parents, child) with and without the cut.
    """
    model.require_fitted()
    parent, child = edge
    if not model.graph.has_edge(parent, child):
        raise QueryError(f"graph has no edge {parent!r} -> {child!r}")
    child_continuous = model.node_is_continuous(child)
    if measure == "auto":
        measure = "coupled_msd" if child_continuous else "kl"
    if measure not in ("coupled_msd", "kl"):
        raise QueryError(f"unknown arrow-strength measure {measure!r}")
    if measure == "coupled_msd" and not child_continuous:
        raise QueryError("coupled_msd requires a continuous child node")

    noise = draw_noise_values(model, n, seed)
    values = propagate_from_noise(model, noise)
    permutation = rng_for(seed, "arrow:cut").permutation(n)
    parents = model.graph.parents(child)
    cut_columns = [
        values[p][permutation] if p == parent else values[p] for p in parents
    ]
    mechanism = model.mechanisms[child]
    observed_child = values[child]
    if isinstance(mechanism, AdditiveNoiseModel):
        cut_child = mechanism.predict(cut_columns) + noise[child]
    else:
        cut_child = mechanism.classes_from_uniform(cut_columns, noise[child])

    if measure == "coupled_msd":
        return float(np.mean((observed_child - cut_child) ** 2))

    joint, joint_cut = _encode_joint(
        [(values[p], values[p], model.node_is_continuous(p)) for p in parents]
        + [(observed_child, cut_child, child_continuous)]
    )
    return kl_divergence(joint, joint_cut, k=_KL_NEIGHBORS)


def _encode_joint(column_pairs):
    left_parts, right_parts = [], []
    for left, right, continuous in column_pairs:
        if continuous:
            left_parts.append(np.asarray(left, dtype=np.float64)[:, None])
            right_parts.append(np.asarray(right, dtype=np.float64)[:, None])
        else:
            categories = {c: i for i, c in enumerate(np.unique(np.concatenate([left, right])))}
            for source, parts in ((left, left_parts), (right, right_parts)):
                block = np.zeros((len(source), len(categories)))
                for i, value in enumerate(source):
                    block[i, categories[value]] = 1.0
                parts.append(block)
    return np.hstack(left_parts), np.hstack(right_parts)


def intrinsic_influence(
    model: GcmModel,
    target,
    shapley_config: ShapleyConfig | None = None,
    outer_samples=DEFAULT_ICC_OUTER_SAMPLES,
    inner_samples=DEFAULT_ICC_INNER_SAMPLES,
    seed=0,
) -> AttributionResult:
    """Shapley attribution of the target's variance to upstream noise terms.

    The value of a noise subset is the expected reduction in the target's
    variance from freezing those noises: Var(Y) - E[Var(Y | N_S)], estimated
    by nested Monte Carlo (outer draws of the frozen noises, inner propagation
    of the rest).  The empty set is worth 0 and the full set Var(Y), so exact
    Shapley scores sum to the target's variance.
    """
    model.require_fitted()
    model.graph._require(target)
    if not model.node_is_continuous(target):
        raise QueryError(f"target node {target!r} must be continuous")
    players = _players_for(model.graph, target)
    closure = set(players)
    full_bits = (1 << len(players)) - 1

    variance_samples = outer_samples * inner_samples
    base_noise = draw_noise_values(
        model, variance_samples, derive_seed(seed, "icc:variance"), closure
    )
    target_values = propagate_from_noise(model, base_noise, nodes=closure)[target]
    total_variance = float(np.var(target_values, ddof=1))

    def compute_bits(bits):
        if bits == 0:
            return 0.0
        if bits == full_bits:
            return total_variance
        frozen = [players[i] for i in range(len(players)) if bits >> i & 1]
        subset_seed = derive_seed(seed, f"icc:{bits}")
        conditional_variances = np.empty(outer_samples)
        for outer in range(outer_samples):
            frozen_draw = draw_noise_values(
                model, 1, derive_seed(subset_seed, f"frozen:{outer}"), frozen
            )
            noise = draw_noise_values(
                model, inner_samples, derive_seed(subset_seed, f"free:{outer}"), closure
            )
            for node in frozen:
                noise[node] = _tile(frozen_draw[node][0], inner_samples)
            propagated = propagate_from_noise(model, noise, nodes=closure)[target]
            conditional_variances[outer] = np.var(propagated, ddof=1)
        return total_variance - float(conditional_variances.mean())

    evaluator = _cache_by_bits(players, compute_bits)
    scores = _shapley_scores(players, evaluator, shapley_config)
    return AttributionResult(
        scores=scores,
        measure="intrinsic_influence",
        mc_budget={
            "outer_samples": outer_samples,
            "inner_samples": inner_samples,
            "variance_samples": variance_samples,
        },
        seed=seed,
        total=float(evaluator(np.ones(len(players), dtype=bool))),
        baseline=float(evaluator(np.zeros(len(players), dtype=bool))),
    )


def attribute_anomaly(
    model: GcmModel,
    target,
    anomalous_row,
    num_samples=DEFAULT_ANOMALY_SAMPLES,
    shapley_config: ShapleyConfig | None = None,
    seed=0,
) -> AttributionResult:
    """Shapley attribution of a single outlying row to upstream noise terms.

    The anomalous row's noises are recovered first (roots act as their own
    noise).  A subset's value is the outlier score of the tail event computed
    from samples where the subset's noises are redrawn and all others stay at
    the recovered values; the empty set scores 0 by construction and the full
    set equals the marginal outlier score of the observed target value.
    """
    model.require_fitted()
    model.graph._require(target)
    if not model.node_is_continuous(target):
        raise QueryError(f"target node {target!r} must be continuous")
    graph = model.graph
    players = _players_for(graph, target)
    closure = set(players)
    full_bits = (1 << len(players)) - 1

    for node in players:
        if isinstance(model.mechanisms[node], ClassifierFcm):
            raise NonInvertibleError(
                f"node {node!r} has a classifier mechanism; anomaly attribution needs "
                "invertible (additive noise) mechanisms on the target's ancestry"
            )
    missing = [node for node in graph.nodes if node not in anomalous_row]
    if missing:
        raise QueryError(f"anomalous row is missing nodes {missing}")

    observed = {}
    for node in players:
        if model.node_is_continuous(node):
            observed[node] = float(anomalous_row[node])
        else:
            observed[node] = str(anomalous_row[node])

    recovered = {}
    for node in graph.topological_order():
        if node not in closure:
            continue
        if graph.is_root(node):
            recovered[node] = observed[node]
        else:
            mechanism = model.mechanisms[node]
            parent_values = [observed[p] for p in graph.parents(node)]
            recovered[node] = mechanism.estimate_noise(parent_values, observed[node])

    reference_noise = draw_noise_values(
        model, num_samples, derive_seed(seed, "anomaly:reference"), closure
    )
    reference = propagate_from_noise(model, reference_noise, nodes=closure)[target]
    scorer = OutlierScorer(reference)
    observed_feature = float(scorer.feature(observed[target]))

    def compute_bits(bits):
        if bits == 0:
            return 0.0
        redrawn = [players[i] for i in range(len(players)) if bits >> i & 1]
        noise = draw_noise_values(
            model, num_samples, derive_seed(seed, f"anomaly:{bits}"), redrawn
        )
        for node in players:
            if node not in noise:
                noise[node] = _tile(recovered[node], num_samples)
        propagated = propagate_from_noise(model, noise, nodes=closure)[target]
        tail = int(np.sum(scorer.feature(propagated) >= observed_feature))
        return tail_log_score(tail, num_samples)

    evaluator = _cache_by_bits(players, compute_bits)
    scores = _shapley_scores(players, evaluator, shapley_config)
    return AttributionResult(
        scores=scores,
        measure="it_outlier_score",
        mc_budget={"reference_samples": num_samples, "samples_per_subset": num_samples},
        seed=seed,
        total=float(evaluator(np.ones(len(players), dtype=bool))),
        baseline=0.0,
    )


def distribution_change(
    graph,
    old_data: Dataset,
    new_data: Dataset,
    target,
    measure="auto",
    num_samples=DEFAULT_CHANGE_SAMPLES,
    shapley_config: ShapleyConfig | None = None,
    seed=0,
) -> AttributionResult:
    """Attribute a change between two datasets to the nodes whose mechanisms changed.

    Fits one model per dataset, then scores each node subset by the chosen
    divergence between the target's marginal under a hybrid model (subset
    nodes use the new mechanisms, the rest the old ones) and under the old
    model.  For a root node, "mechanism" means its fitted marginal.
    """
    graph._require(target)
    for node in graph.nodes:
        if node not in old_data.column_names or node not in new_data.column_names:
            raise QueryError(f"both datasets must cover node {node!r}")
        if old_data.kind(node) != new_data.kind(node):
            raise QueryError(
                f"incompatible datasets: column {node!r} changes type between old and new"
            )
    if old_data.kind(target) != CONTINUOUS:
        raise QueryError(f"target node {target!r} must be continuous")
    if measure == "auto":
        measure = "kl"
    if measure not in ("mean_diff", "kl"):
        raise QueryError(f"unknown distribution-change measure {measure!r}")

    old_model = fit(auto_assign(graph, old_data), old_data)
    new_model = fit(auto_assign(graph, new_data), new_data)
    players = _players_for(graph, target)
    closure = set(players)

    baseline_noise = draw_noise_values(
        old_model, num_samples, derive_seed(seed, "change:baseline"), closure
    )
    baseline = propagate_from_noise(old_model, baseline_noise, nodes=closure)[target]

    def compute_bits(bits):
        mechanisms = {
            node: (new_model if bits >> i & 1 else old_model).mechanisms[node]
            for i, node in enumerate(players)
        }
        hybrid = GcmModel(graph, mechanisms, ready=players)
        noise = draw_noise_values(hybrid, num_samples, derive_seed(seed, f"change:{bits}"), closure)
        samples = propagate_from_noise(hybrid, noise, nodes=closure)[target]
        if measure == "mean_diff":
            return abs(float(samples.mean() - baseline.mean()))
        return kl_divergence(samples, baseline, k=_KL_NEIGHBORS)

    evaluator = _cache_by_bits(players, compute_bits)
    scores = _shapley_scores(players, evaluator, shapley_config)
    return AttributionResult(
        scores=scores,
        measure=measure,
        mc_budget={"samples_per_subset": num_samples, "baseline_samples": num_samples},
        seed=seed,
        total=float(evaluator(np.ones(len(players), dtype=bool))),
        baseline=float(evaluator(np.zeros(len(players), dtype=bool))),
    )

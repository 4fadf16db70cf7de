"""Sampling queries: observational draws, interventions, counterfactuals, effects.

All operations are read-only on the model.  Randomness is controlled by one
integer seed per call; independent streams are derived per node and per
sub-operation, so results do not depend on evaluation order.
"""

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .exceptions import NonInvertibleError, QueryError
from .mechanisms import AdditiveNoiseModel, ClassifierFcm, Empirical, Gaussian, Multinomial
from .model import GcmModel
from .seeds import derive_seed, rng_for


@dataclass(frozen=True)
class Intervention:
    """A single-node intervention.

    ``atomic`` forces the node to a constant; ``shift`` adds a constant to the
    mechanism's output (continuous nodes only); ``functional`` maps the
    mechanism's output through a caller-supplied transform.
    """

    node: str
    kind: str
    value: object = None
    delta: float = 0.0
    mapping: object = None


def atomic(node, value) -> Intervention:
    return Intervention(node, "atomic", value=value)


def shift(node, delta) -> Intervention:
    return Intervention(node, "shift", delta=float(delta))


def functional(node, mapping) -> Intervention:
    return Intervention(node, "functional", mapping=mapping)


def _as_intervention_map(model, interventions):
    mapping = {}
    for iv in interventions:
        model.graph._require(iv.node)
        if iv.node in mapping:
            raise QueryError(f"multiple interventions on node {iv.node!r}")
        if iv.kind not in ("atomic", "shift", "functional"):
            raise QueryError(f"unknown intervention kind {iv.kind!r}")
        if iv.kind == "shift" and not model.node_is_continuous(iv.node):
            raise QueryError(f"shift intervention on categorical node {iv.node!r}")
        mapping[iv.node] = iv
    return mapping


def _atomic_value(model, iv):
    if model.node_is_continuous(iv.node):
        try:
            value = float(iv.value)
        except (TypeError, ValueError) as exc:
            raise QueryError(
                f"intervention value {iv.value!r} is not numeric for continuous node {iv.node!r}"
            ) from exc
        if not np.isfinite(value):
            raise QueryError(f"intervention value for node {iv.node!r} must be finite")
        return value
    return str(iv.value)


def draw_noise_values(model: GcmModel, n, seed, nodes=None) -> dict:
    """Draw one noise column per node from per-node derived streams.

    For roots the noise is the node's own value; for additive noise models it
    is a draw from the fitted noise distribution; for classifier mechanisms it
    is the uniform variate consumed by inverse-CDF sampling.
    """
    chosen = set(model.graph.nodes if nodes is None else nodes)
    noise = {}
    for node in model.graph.topological_order():
        if node not in chosen:
            continue
        rng = rng_for(seed, f"noise:{node}")
        mechanism = model.mechanisms[node]
        if isinstance(mechanism, (Empirical, Gaussian, Multinomial)):
            noise[node] = mechanism.draw(n, rng)
        elif isinstance(mechanism, AdditiveNoiseModel):
            noise[node] = mechanism.noise.draw(n, rng)
        else:
            noise[node] = rng.random(n)
    return noise


def propagate_from_noise(model: GcmModel, noise, interventions=None, nodes=None) -> dict:
    """Evaluate mechanisms in topological order from given noise columns.

    ``nodes``, when given, restricts propagation to an ancestrally closed
    subset.  Interventions override each intervened node's output before its
    children consume it.
    """
    interventions = interventions or {}
    chosen = set(model.graph.nodes if nodes is None else nodes)
    graph = model.graph
    values = {}
    for node in graph.topological_order():
        if node not in chosen:
            continue
        mechanism = model.mechanisms[node]
        if graph.is_root(node):
            output = noise[node]
        else:
            parents = graph.parents(node)
            missing = [p for p in parents if p not in values]
            if missing:
                raise QueryError(f"propagation subset is not ancestrally closed: missing {missing}")
            parent_columns = [values[p] for p in parents]
            if isinstance(mechanism, AdditiveNoiseModel):
                output = mechanism.predict(parent_columns) + noise[node]
            else:
                output = mechanism.classes_from_uniform(parent_columns, noise[node])
        iv = interventions.get(node)
        if iv is not None:
            n = len(output)
            if iv.kind == "atomic":
                value = _atomic_value(model, iv)
                if model.node_is_continuous(node):
                    output = np.full(n, value)
                else:
                    output = np.full(n, value, dtype=object)
            elif iv.kind == "shift":
                output = output + iv.delta
            else:
                mapped = [iv.mapping(v) for v in output]
                dtype = np.float64 if model.node_is_continuous(node) else object
                output = np.array(mapped, dtype=dtype)
        values[node] = output
    return values


def _to_dataset(model, values):
    names = model.graph.nodes
    return Dataset(names, [values[name] for name in names])


def draw_samples(model: GcmModel, n, seed=0) -> Dataset:
    """Draw ``n`` joint samples by ancestral sampling from the fitted model."""
    model.require_fitted()
    if n < 1:
        raise QueryError("n must be at least 1")
    noise = draw_noise_values(model, n, seed)
    return _to_dataset(model, propagate_from_noise(model, noise))


def interventional_samples(model: GcmModel, interventions, n, seed=0) -> Dataset:
    """Draw ``n`` samples from the distribution induced by the interventions."""
    model.require_fitted()
    if n < 1:
        raise QueryError("n must be at least 1")
    intervention_map = _as_intervention_map(model, interventions)
    noise = draw_noise_values(model, n, seed)
    return _to_dataset(model, propagate_from_noise(model, noise, intervention_map))


def counterfactual(model: GcmModel, observed_row, interventions=()) -> dict:
    """Answer "what would this row have been under these interventions?".

    Three steps: recover every node's noise from the observed row (roots act
    as their own noise), apply the interventions, and re-propagate with the
    recovered noise held fixed.  With no interventions the observed row is
    returned exactly.
    """
    model.require_fitted()
    graph = model.graph
    intervention_map = _as_intervention_map(model, interventions)
    missing = [node for node in graph.nodes if node not in observed_row]
    if missing:
        raise QueryError(f"observed row is missing nodes {missing}")

    observed = {}
    for node in graph.nodes:
        if model.node_is_continuous(node):
            try:
                observed[node] = float(observed_row[node])
            except (TypeError, ValueError) as exc:
                raise QueryError(f"observed value for {node!r} is not numeric") from exc
        else:
            observed[node] = str(observed_row[node])

    noise = {}
    for node in graph.topological_order():
        mechanism = model.mechanisms[node]
        if graph.is_root(node):
            noise[node] = observed[node]
        elif isinstance(mechanism, AdditiveNoiseModel):
            parent_values = [observed[p] for p in graph.parents(node)]
            noise[node] = mechanism.estimate_noise(parent_values, observed[node])
        else:
            iv = intervention_map.get(node)
            if iv is None or iv.kind != "atomic":
                raise NonInvertibleError(
                    f"node {node!r} has a classifier mechanism whose noise cannot be recovered; "
                    "intervene on it atomically or use additive noise mechanisms"
                )
            noise[node] = None

    result = {}
    for node in graph.topological_order():
        mechanism = model.mechanisms[node]
        if graph.is_root(node):
            output = noise[node]
        elif isinstance(mechanism, AdditiveNoiseModel):
            parents = graph.parents(node)
            if all(result[p] == observed[p] for p in parents):
                # Unchanged inputs reproduce the observed value exactly; taking
                # it directly avoids round-off in predict + recovered noise.
                output = observed[node]
            else:
                output = mechanism.evaluate([result[p] for p in parents], noise[node])
        else:
            output = observed[node]
        iv = intervention_map.get(node)
        if iv is not None:
            if iv.kind == "atomic":
                output = _atomic_value(model, iv)
            elif iv.kind == "shift":
                output = output + iv.delta
            else:
                output = iv.mapping(output)
        result[node] = output
    return result


def average_causal_effect(
    model: GcmModel, treatment, value_a, value_b, target, n=100000, seed=0
) -> float:
    """mean(target | do(treatment=value_a)) - mean(target | do(treatment=value_b)).

    The two interventional estimates use independent derived random streams.
    """
    model.require_fitted()
    if not model.node_is_continuous(target):
        raise QueryError(f"target node {target!r} must be continuous")
    samples_a = interventional_samples(
        model, [atomic(treatment, value_a)], n, derive_seed(seed, "ace:a")
    )
    samples_b = interventional_samples(
        model, [atomic(treatment, value_b)], n, derive_seed(seed, "ace:b")
    )
    return float(samples_a.column(target).mean() - samples_b.column(target).mean())

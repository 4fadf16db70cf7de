"""Assemble a causal graph and per-node mechanisms into a queryable model."""

import json
from dataclasses import dataclass

from .data import CATEGORICAL, CONTINUOUS, Dataset
from .exceptions import DataError, FitError, SerializationError
from .graph import CausalGraph
from .mechanisms import (
    AdditiveNoiseModel,
    ClassifierFcm,
    Empirical,
    Gaussian,
    Multinomial,
    fit_anm,
    fit_classifier,
    fit_stochastic,
    mechanism_from_json,
    mechanism_to_json,
)

SCHEMA_VERSION = 1
_MAX_CATEGORIES = 100

_ROOT_KINDS = (Empirical, Gaussian, Multinomial)
_NON_ROOT_KINDS = (AdditiveNoiseModel, ClassifierFcm)


@dataclass(frozen=True)
class MechanismSpec:
    """An unfitted assignment: which mechanism family to fit for a node.

    ``family`` is ``stochastic`` (roots), ``anm`` (continuous non-roots), or
    ``classifier`` (categorical non-roots); ``option`` is the within-family
    kind, e.g. ``auto`` or ``linear``.
    """

    family: str
    option: str = "auto"


class GcmModel:
    """A causal graph plus one mechanism per node.

    Treated as a value: :func:`assign` and :func:`fit` return new models and
    never mutate their input.  Once ``fitted`` is true, query operations only
    read the model, so it can be shared freely.  Mechanisms are public
    attributes (``model.mechanisms[node]``) to keep fitted components easy to
    inspect.
    """

    def __init__(self, graph: CausalGraph, mechanisms=None, ground_truth=(), ready=()):
        self.graph = graph
        self.mechanisms = dict(mechanisms or {})
        self.ground_truth = frozenset(ground_truth)
        self._ready = frozenset(ready) | self.ground_truth
        for node in self.mechanisms:
            graph._require(node)

    @property
    def fitted(self) -> bool:
        return all(
            node in self.mechanisms and node in self._ready for node in self.graph.nodes
        )

    def require_fitted(self):
        if not self.fitted:
            raise FitError("model is not fitted; call fit() or assign ground-truth mechanisms")

    def node_is_continuous(self, node) -> bool:
        mechanism = self.mechanisms[node]
        return isinstance(mechanism, (Empirical, Gaussian, AdditiveNoiseModel))

    def __repr__(self):
        state = "fitted" if self.fitted else "unfitted"
        return f"GcmModel({len(self.graph.nodes)} nodes, {state})"


def _check_role(graph, node, mechanism):
    is_root = graph.is_root(node)
    if isinstance(mechanism, MechanismSpec):
        root_family = mechanism.family == "stochastic"
        if is_root != root_family:
            raise FitError(
                f"node {node!r} is {'a root' if is_root else 'not a root'}; "
                f"family {mechanism.family!r} does not apply"
            )
        return
    if is_root and not isinstance(mechanism, _ROOT_KINDS):
        raise FitError(f"root node {node!r} needs a marginal model, got {type(mechanism).__name__}")
    if not is_root and not isinstance(mechanism, _NON_ROOT_KINDS):
        raise FitError(
            f"non-root node {node!r} needs a conditional mechanism, got {type(mechanism).__name__}"
        )


def auto_assign(graph: CausalGraph, dataset: Dataset) -> GcmModel:
    """Choose a mechanism family for every node from the data's column types.

    Roots get a marginal (empirical for continuous columns, multinomial for
    categorical); continuous non-roots get an additive noise model with
    automatic regression selection; categorical non-roots get a classifier.
    """
    mechanisms = {}
    for node in graph.nodes:
        if node not in dataset.column_names:
            raise DataError(f"graph node {node!r} is missing from the data")
        kind = dataset.kind(node)
        if kind == CATEGORICAL:
            distinct = len(set(dataset.column(node)))
            if distinct >= _MAX_CATEGORIES:
                raise FitError(
                    f"node {node!r} has {distinct} categories; at most {_MAX_CATEGORIES - 1} supported"
                )
        if graph.is_root(node):
            mechanisms[node] = MechanismSpec("stochastic", "auto")
        elif kind == CONTINUOUS:
            mechanisms[node] = MechanismSpec("anm", "auto")
        else:
            mechanisms[node] = MechanismSpec("classifier", "logistic")
    return GcmModel(graph, mechanisms)


def assign(model: GcmModel, node, mechanism, ground_truth=False) -> GcmModel:
    """Return a new model with ``mechanism`` at ``node``.

    A ground-truth mechanism is taken as already parameterised: fitting leaves
    it untouched and the node counts as ready without a fit.
    """
    model.graph._require(node)
    _check_role(model.graph, node, mechanism)
    if ground_truth and isinstance(mechanism, MechanismSpec):
        raise FitError("a ground-truth assignment must be a concrete mechanism")
    mechanisms = dict(model.mechanisms)
    mechanisms[node] = mechanism
    ground = set(model.ground_truth) - {node}
    ready = set(model._ready) - {node}
    if ground_truth:
        ground.add(node)
    return GcmModel(model.graph, mechanisms, ground, ready)


def _refit_spec(mechanism):
    # Re-assigned concrete mechanisms refit within their own family.
    if isinstance(mechanism, MechanismSpec):
        return mechanism
    if isinstance(mechanism, Empirical):
        return MechanismSpec("stochastic", "empirical")
    if isinstance(mechanism, Gaussian):
        return MechanismSpec("stochastic", "gaussian")
    if isinstance(mechanism, Multinomial):
        return MechanismSpec("stochastic", "multinomial")
    if isinstance(mechanism, AdditiveNoiseModel):
        from .mechanisms import KnnRegressor

        option = "knn" if isinstance(mechanism.prediction, KnnRegressor) else "linear"
        return MechanismSpec("anm", option)
    if isinstance(mechanism, ClassifierFcm):
        return MechanismSpec("classifier", "logistic")
    raise FitError(f"node has no usable mechanism assignment: {mechanism!r}")


def fit(model: GcmModel, dataset: Dataset) -> GcmModel:
    """Fit every non-ground-truth mechanism from the data and return a new model.

    Each node is fit independently from its own column and its parents'
    columns, so refitting one node never changes another.
    """
    for node in model.graph.nodes:
        if node not in model.mechanisms:
            raise FitError(f"node {node!r} has no mechanism assigned")
        if node not in dataset.column_names:
            raise DataError(f"graph node {node!r} is missing from the data")

    mechanisms = {}
    for node in model.graph.nodes:
        if node in model.ground_truth:
            mechanisms[node] = model.mechanisms[node]
            continue
        spec = _refit_spec(model.mechanisms[node])
        target = dataset.column(node)
        parent_columns = [dataset.column(p) for p in model.graph.parents(node)]
        try:
            if spec.family == "stochastic":
                mechanisms[node] = fit_stochastic(target, spec.option)
            elif spec.family == "anm":
                mechanisms[node] = fit_anm(parent_columns, target, spec.option)
            else:
                mechanisms[node] = fit_classifier(parent_columns, target)
        except FitError as exc:
            raise FitError(f"fitting node {node!r} failed: {exc}") from exc
    return GcmModel(model.graph, mechanisms, model.ground_truth, ready=model.graph.nodes)


def dumps_model(model: GcmModel) -> str:
    """Serialize a fitted model to deterministic JSON text."""
    model.require_fitted()
    payload = {
        "schema_version": SCHEMA_VERSION,
        "graph": {
            "nodes": list(model.graph.nodes),
            "edges": [list(edge) for edge in model.graph.edges],
        },
        "mechanisms": {
            node: dict(
                mechanism_to_json(model.mechanisms[node]),
                ground_truth=node in model.ground_truth,
            )
            for node in model.graph.nodes
        },
    }
    return json.dumps(payload, separators=(",", ":"))


def loads_model(text: str) -> GcmModel:
    """Inverse of :func:`dumps_model`; the result answers queries identically."""
    try:
        payload = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SerializationError(f"corrupt model payload: {exc}") from exc
    if not isinstance(payload, dict):
        raise SerializationError("corrupt model payload: expected a JSON object")
    version = payload.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SerializationError(
            f"unsupported schema_version {version!r}; this build reads version {SCHEMA_VERSION}"
        )
    try:
        graph = CausalGraph(
            payload["graph"]["nodes"],
            [tuple(edge) for edge in payload["graph"]["edges"]],
        )
        mechanisms = {}
        ground_truth = set()
        for node, mech_payload in payload["mechanisms"].items():
            mechanisms[node] = mechanism_from_json(mech_payload)
            if mech_payload.get("ground_truth"):
                ground_truth.add(node)
    except (KeyError, TypeError) as exc:
        raise SerializationError(f"corrupt model payload: {exc}") from exc
    if set(mechanisms) != set(graph.nodes):
        raise SerializationError("corrupt model payload: mechanisms do not cover the graph")
    return GcmModel(graph, mechanisms, ground_truth, ready=graph.nodes)


def save(model: GcmModel, sink):
    """Write a fitted model to a path or text file object."""
    text = dumps_model(model)
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        with open(sink, "w", encoding="utf-8") as handle:
            handle.write(text)


def load(source) -> GcmModel:
    """Read a model written by :func:`save` from a path or file object."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as handle:
            text = handle.read()
    return loads_model(text)

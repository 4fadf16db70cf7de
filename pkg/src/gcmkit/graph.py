"""Directed acyclic graphs over named variables, with JSON and DOT parsing."""

import json
import re

from .exceptions import GraphError

_DOT_IDENT = re.compile(r"^[A-Za-z0-9_]+$")


class CausalGraph:
    """A DAG whose nodes are variable names and whose edges point cause -> effect.

    Node identity is the exact, case-sensitive string.  Declaration order is
    preserved and used as the tie-break for the topological order, so results
    that iterate over nodes are reproducible.  Instances are immutable after
    construction and safe to share across threads.
    """

    def __init__(self, nodes, edges=()):
        node_list = []
        seen = set()
        for name in nodes:
            if not isinstance(name, str) or not name:
                raise GraphError(f"node names must be non-empty strings, got {name!r}")
            if name in seen:
                raise GraphError(f"duplicate node {name!r}")
            seen.add(name)
            node_list.append(name)
        self.nodes = tuple(node_list)
        self._index = {name: i for i, name in enumerate(self.nodes)}

        edge_list = []
        edge_set = set()
        for edge in edges:
            parent, child = edge
            if parent not in self._index:
                raise GraphError(f"edge {(parent, child)!r} references unknown node {parent!r}")
            if child not in self._index:
                raise GraphError(f"edge {(parent, child)!r} references unknown node {child!r}")
            if parent == child:
                raise GraphError(f"self-loop on node {parent!r}")
            if (parent, child) in edge_set:
                raise GraphError(f"duplicate edge {(parent, child)!r}")
            edge_set.add((parent, child))
            edge_list.append((parent, child))
        self.edges = tuple(edge_list)

        self._parents = {name: [] for name in self.nodes}
        self._children = {name: [] for name in self.nodes}
        for parent, child in self.edges:
            self._parents[child].append(parent)
            self._children[parent].append(child)
        for name in self.nodes:
            self._parents[name].sort(key=self._index.__getitem__)
            self._children[name].sort(key=self._index.__getitem__)

        self._topological = self._toposort()

    def _toposort(self):
        # Kahn's algorithm, always picking the ready node that was declared first.
        indegree = {name: len(self._parents[name]) for name in self.nodes}
        ready = [name for name in self.nodes if indegree[name] == 0]
        order = []
        while ready:
            node = min(ready, key=self._index.__getitem__)
            ready.remove(node)
            order.append(node)
            for child in self._children[node]:
                indegree[child] -= 1
                if indegree[child] == 0:
                    ready.append(child)
        if len(order) != len(self.nodes):
            stuck = [name for name in self.nodes if indegree[name] > 0]
            raise GraphError(f"graph contains a cycle through {stuck}")
        return tuple(order)

    def _require(self, node):
        if node not in self._index:
            raise GraphError(f"unknown node {node!r}")

    def topological_order(self):
        """Node names with every parent before each of its children."""
        return self._topological

    def parents(self, node):
        """Direct causes of ``node``, in declaration order."""
        self._require(node)
        return tuple(self._parents[node])

    def children(self, node):
        """Direct effects of ``node``, in declaration order."""
        self._require(node)
        return tuple(self._children[node])

    def ancestors(self, node):
        """All nodes with a directed path into ``node`` (excluding itself)."""
        self._require(node)
        found = set()
        stack = list(self._parents[node])
        while stack:
            current = stack.pop()
            if current not in found:
                found.add(current)
                stack.extend(self._parents[current])
        return frozenset(found)

    def descendants(self, node):
        """All nodes reachable from ``node`` by a directed path (excluding itself)."""
        self._require(node)
        found = set()
        stack = list(self._children[node])
        while stack:
            current = stack.pop()
            if current not in found:
                found.add(current)
                stack.extend(self._children[current])
        return frozenset(found)

    def non_descendants(self, node):
        """All nodes that are neither ``node`` nor reachable from it."""
        reachable = self.descendants(node)
        return frozenset(name for name in self.nodes if name != node and name not in reachable)

    def is_root(self, node):
        self._require(node)
        return not self._parents[node]

    def roots(self):
        return tuple(name for name in self.nodes if not self._parents[name])

    def has_edge(self, parent, child):
        self._require(parent)
        self._require(child)
        return child in self._children[parent]

    def __contains__(self, node):
        return node in self._index

    def __repr__(self):
        return f"CausalGraph(nodes={list(self.nodes)!r}, edges={list(self.edges)!r})"

    def __eq__(self, other):
        if not isinstance(other, CausalGraph):
            return NotImplemented
        return self.nodes == other.nodes and set(self.edges) == set(other.edges)

    def __hash__(self):
        return hash((self.nodes, frozenset(self.edges)))


def parse_graph(text: str, format: str = "json") -> CausalGraph:
    """Parse a graph from ``text`` in the named format (``json`` or ``dot``)."""
    if format == "json":
        return _parse_json(text)
    if format == "dot":
        return _parse_dot(text)
    raise GraphError(f"unknown graph format {format!r}")


def _parse_json(text):
    try:
        payload = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise GraphError(f"graph parse error: {exc}") from exc
    if not isinstance(payload, dict) or "nodes" not in payload:
        raise GraphError("graph parse error: expected an object with 'nodes' and 'edges'")
    nodes = payload["nodes"]
    edges = payload.get("edges", [])
    if not isinstance(nodes, list) or not isinstance(edges, list):
        raise GraphError("graph parse error: 'nodes' and 'edges' must be lists")
    parsed_edges = []
    for edge in edges:
        if not isinstance(edge, list) or len(edge) != 2:
            raise GraphError(f"graph parse error: edge {edge!r} is not a [parent, child] pair")
        parsed_edges.append((edge[0], edge[1]))
    return CausalGraph(nodes, parsed_edges)


def _parse_dot(text):
    # Supported subset: `digraph { A -> B; C; }` with bare identifiers, no attributes.
    stripped = text.strip()
    match = re.match(r"^digraph(?:\s+[A-Za-z0-9_]+)?\s*\{(.*)\}\s*$", stripped, re.DOTALL)
    if match is None:
        raise GraphError("graph parse error: expected 'digraph { ... }'")
    body = match.group(1)
    nodes = []
    seen = set()
    edges = []

    def declare(name):
        if name not in seen:
            seen.add(name)
            nodes.append(name)

    for statement in body.split(";"):
        statement = statement.strip()
        if not statement:
            continue
        parts = [part.strip() for part in statement.split("->")]
        for part in parts:
            if not _DOT_IDENT.match(part):
                raise GraphError(f"graph parse error: bad identifier {part!r}")
        for part in parts:
            declare(part)
        for parent, child in zip(parts, parts[1:]):
            edges.append((parent, child))
    return CausalGraph(nodes, edges)


def serialize_graph(graph: CausalGraph, format: str = "json") -> str:
    """Render ``graph`` as text; inverse of :func:`parse_graph` on node/edge sets."""
    if format == "json":
        payload = {"nodes": list(graph.nodes), "edges": [list(edge) for edge in graph.edges]}
        return json.dumps(payload, separators=(",", ":"))
    if format == "dot":
        lines = ["digraph {"]
        attached = {node for edge in graph.edges for node in edge}
        for node in graph.nodes:
            if node not in attached:
                lines.append(f"  {node};")
        for parent, child in graph.edges:
            lines.append(f"  {parent} -> {child};")
        lines.append("}")
        return "\n".join(lines) + "\n"
    raise GraphError(f"unknown graph format {format!r}")

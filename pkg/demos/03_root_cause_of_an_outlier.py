"""Root-cause analysis of a single outlier.

A latency chain: database -> service -> frontend.  One request comes back
extremely slow.  Which component's own noise term is to blame?  We recover the
row's noises, then Shapley-attribute the frontend's outlier score to them.
"""

import numpy as np

import gcmkit as gk

rng = np.random.default_rng(0)
n = 3000
database = 1.0 + 0.2 * rng.standard_normal(n)
service = database + 0.2 * rng.standard_normal(n)
frontend = service + 0.2 * rng.standard_normal(n)
data = gk.Dataset(["database", "service", "frontend"], [database, service, frontend])

graph = gk.CausalGraph(
    ["database", "service", "frontend"],
    [("database", "service"), ("service", "frontend")],
)
model = gk.fit(gk.auto_assign(graph, data), data)

# a slow request: the service added a huge delay of its own; the database was fine
slow_row = {"database": 1.0, "service": 3.0, "frontend": 3.05}
print(f"anomalous request: {slow_row}")
print(f"typical frontend latency: {frontend.mean():.2f} +- {frontend.std():.2f}")

result = gk.attribute_anomaly(model, "frontend", slow_row, seed=0)
print(f"\nmarginal outlier score of the frontend value: {result.total:.3f}")
print("Shapley attribution of that score to upstream noise terms:")
for node, score in sorted(result.scores.items(), key=lambda kv: -kv[1]):
    print(f"  {node:9s} {score:+.3f}")

blamed = max(result.scores, key=result.scores.get)
print(f"\nroot cause: {blamed} (scores sum to {sum(result.scores.values()):.3f}, "
      f"matching the outlier score by Shapley efficiency)")

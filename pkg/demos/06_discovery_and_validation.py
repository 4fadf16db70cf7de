"""Where does the graph come from?  Discovery from data, and falsification.

When domain knowledge is incomplete, the PC algorithm can propose a structure
(up to its Markov equivalence class).  And whenever a graph is asserted, its
implied conditional independences can be tested against the data.
"""

import numpy as np

import gcmkit as gk

rng = np.random.default_rng(4)
n = 3000

# true structure: a collider X -> Z <- Y, then Z -> W
x = rng.standard_normal(n)
y = rng.standard_normal(n)
z = x + y + 0.5 * rng.standard_normal(n)
w = z + 0.5 * rng.standard_normal(n)
data = gk.Dataset(["X", "Y", "Z", "W"], [x, y, z, w])

cpdag = gk.discover_cpdag(data, alpha=0.05)
print("PC output:")
print(f"  directed:   {list(cpdag.directed)}")
print(f"  undirected: {list(cpdag.undirected)}")
print("  (the collider identifies X -> Z <- Y; the rest follows by propagation)")
print()
print(cpdag.to_dot())

true_graph = gk.CausalGraph(["X", "Y", "Z", "W"], [("X", "Z"), ("Y", "Z"), ("Z", "W")])
report = gk.refute_graph(true_graph, data, alpha=0.05)
print(f"refuting the true graph: verdict = {report.verdict} "
      f"({len(report.tests)} implied independences tested)")

wrong_graph = gk.CausalGraph(["X", "Y", "Z", "W"], [("Z", "X"), ("X", "Y"), ("Y", "W")])
report = gk.refute_graph(wrong_graph, data, alpha=0.05)
print(f"refuting a wrong graph:  verdict = {report.verdict}")
worst = min(report.tests, key=lambda t: t.p_value)
print(f"  most damning test: {worst.node} vs {worst.other} given {list(worst.given)} "
      f"(p = {worst.p_value:.2e})")

# held-out evaluation of the fitted mechanisms
model = gk.fit(gk.auto_assign(true_graph, data), data)
heldout = gk.draw_samples(model, 2000, seed=9)
print("\nheld-out mechanism evaluation:")
for entry in gk.evaluate_mechanisms(model, heldout, seed=1).nodes:
    print(f"  {entry.to_json()}")

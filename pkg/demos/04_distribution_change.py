"""Which node caused a distribution to change between two data batches?

Between last week's data and this week's, the average of Y moved by about 2.
Fitting one model per batch and mixing their mechanisms node by node tells us
whether the shift came from X's marginal or from Y's mechanism.
"""

import numpy as np

import gcmkit as gk

graph = gk.CausalGraph(["X", "Y"], [("X", "Y")])

rng = np.random.default_rng(1)
x_old = rng.standard_normal(4000)
old_batch = gk.Dataset(["X", "Y"], [x_old, x_old + rng.standard_normal(4000)])

# this week, Y's mechanism gained an offset of +2; X is untouched
x_new = rng.standard_normal(4000)
new_batch = gk.Dataset(["X", "Y"], [x_new, x_new + 2.0 + rng.standard_normal(4000)])

observed_shift = new_batch.column("Y").mean() - old_batch.column("Y").mean()
print(f"observed mean shift in Y: {observed_shift:+.3f}")

result = gk.distribution_change(graph, old_batch, new_batch, "Y", measure="mean_diff", seed=0)
print("\nattribution of the shift (absolute mean difference):")
for node, score in result.scores.items():
    print(f"  {node}: {score:+.3f}")
print(f"total change {result.total:.3f}, same-model baseline {result.baseline:.3f}")
print("\nthe change localizes on Y's mechanism, as constructed")

# contrast: move the ROOT instead and the attribution follows it
x_shifted = 1.0 + rng.standard_normal(4000)
root_moved = gk.Dataset(["X", "Y"], [x_shifted, x_shifted + rng.standard_normal(4000)])
result = gk.distribution_change(graph, old_batch, root_moved, "Y", measure="mean_diff", seed=0)
print("\nafter shifting X's marginal by +1 instead:")
for node, score in result.scores.items():
    print(f"  {node}: {score:+.3f}")

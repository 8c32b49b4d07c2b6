# coding: utf-8

# # Searching a grid with evidence
#
# A single target cell hides in an s x s grid. A handful of evidence cells sit
# within Chebyshev distance delta of it. Visiting a cell tells us one of three
# things: nothing here, evidence here, or the target.

# In[1]:

import numpy as np

from sbesearch import expected_exhaustive_visits, generate_instance, probability_bounds, search

rng = np.random.default_rng(2024)
inst = generate_instance(256, rng)
print(inst.width, inst.height, inst.psi, inst.delta, len(inst.evidence))


# A row-major scan needs (s*s + 1) / 2 visits on average. That is the baseline.

# In[2]:

print(float(expected_exhaustive_visits(256, 256)))
print(search(inst, "exhaustive").steps)


# Why should evidence help at all? Once we stand on evidence, the target is in a
# window of (2*delta+1)^2 cells instead of anywhere in the grid.

# In[3]:

marginal, conditional = probability_bounds(256, inst.delta)
print(float(marginal), float(conditional), float(conditional / marginal))


# Triangle search grows a triangle around a random start. Each growth doubles
# the height and visits only new cells. When a growth stretch touches evidence,
# the walk moves back towards that region; otherwise it jumps up to d cells away.

# In[4]:

res = search(inst, "fts", {"t": 400, "d": 40, "c": 4}, rng=7, trace=True)
print(res.found, res.steps, res.evidence_hits, res.fallback_used)


# The trace keeps every visit as (x, y, outcome). Outcome 1 is evidence, 2 is the target.

# In[5]:

tr = res.trace
print(tr[:5])
print("evidence visits:", int((tr[:, 2] == 1).sum()))


# Compare all seven searchers on the same instance with rough hand-picked parameters.
# Tuned parameters do much better; see the tuning demo.

# In[6]:

hand = {
    "exhaustive": None,
    "fts": {"t": 400, "d": 40, "c": 4},
    "vns1": {"t": 400, "d": 40, "m": 12},
    "vns2": {"t": 400, "d": 40},
    "vns3": {"t": 400, "d": 40, "g": 6},
    "ils": {"t": 400, "a": 200},
    "tabu": {"t": 400, "d": 40},
}
for name, params in hand.items():
    print(f"{name:10s} {search(inst, name, params, rng=7).steps:8d}")

# coding: utf-8

# # Template matching as an evidence search
#
# The grid is now the set of anchor positions of a 17 x 17 template in a
# 512 x 512 image. The target is the one anchor where the target template
# matches (mean absolute error below a threshold). Nearby patches matched by
# evidence templates play the part of evidence cells.
#
# Everything here is synthetic. Scenes are generated, not photographed.

# In[1]:

import numpy as np

from sbesearch import search
from sbesearch.template import make_template_oracle, mae, speedup_report, synthetic_scene

rng = np.random.default_rng(11)
scene = synthetic_scene(rng)
print(scene.image.width, scene.image.height, scene.target_anchor, scene.evidence_anchors)


# The oracle scores every anchor once when it is built, then answers visits in constant time.

# In[2]:

oracle = make_template_oracle(scene.image, scene.templates)
print(oracle.width, oracle.height, oracle.psi, len(oracle.evidence_positions()))
print(mae(scene.templates.target, scene.image, scene.target_anchor))


# A single search. Each oracle run mutates counters, so take a fresh copy per run.

# In[3]:

params = {"t": 3000, "d": 60, "c": 4}
res = search(oracle.fresh(), "fts", params, rng=3)
ex = search(oracle.fresh(), "exhaustive")
print(res.found, res.steps, ex.steps)


# Over a batch of images, report how many fewer positions each searcher evaluates.

# In[4]:

oracles = [make_template_oracle(sc.image, sc.templates) for sc in (synthetic_scene(rng) for _ in range(20))]
rep = speedup_report({"fts": params, "exhaustive": None}, oracles, runs=3, seed=1)
print(rep.format())

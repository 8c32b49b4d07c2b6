# coding: utf-8

# # Tuning searcher parameters with a small evolutionary loop
#
# Each searcher has a few integer knobs. The tuner writes them as a digit
# string and evolves a population with clone, crossover and mutate steps.
# Fitness is the mean step count over a batch of fresh random instances.

# In[1]:

import numpy as np

from sbesearch import CampaignConfig, EaConfig, ea_tune, expected_exhaustive_visits, run_campaign
from sbesearch.tuner import decode_genome, genome_schema

schema = genome_schema("fts", 256)
for gene in schema:
    print(gene)


# Any digit string decodes to valid parameters.

# In[2]:

print(decode_genome("fts", "00000000000", 256))
print(decode_genome("fts", "99999999999", 256))


# A short run on 256 x 256 grids. The budget here is much smaller than the
# defaults so the cell finishes in under a minute.

# In[3]:

config = EaConfig(runs_per_fitness=20, max_steps=150)
res = ea_tune("fts", 256, config, seed=5)
print(res.params, round(res.fitness), res.converged, res.steps)


# The champion's fitness never goes up.

# In[4]:

best = np.array([row[1] for row in res.history])
print(best[:: max(1, len(best) // 10)].round())
print(bool(np.all(np.diff(best) <= 0)))


# Check the tuned parameters on a fresh campaign against the exhaustive mean.

# In[5]:

stats = run_campaign(CampaignConfig("fts", 256, 2000, seed=9, params=res.params.as_dict()))
exh = float(expected_exhaustive_visits(256, 256))
print(round(stats.mean), exh, round(stats.mean / exh, 3))

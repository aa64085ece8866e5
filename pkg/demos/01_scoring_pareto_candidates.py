# %% [markdown]
# # Scoring Pareto candidates at a single observation
#
# A Pareto candidate with tail index gamma lives on [1, inf). Two scores are
# available: the log score and the energy score with exponent beta (beta = 1 is
# the CRPS). Larger is better for both.

# %%
import numpy as np

from tailrank import LOGS, ParetoCandidate, ScoreRule, es_beta_pareto, logs_pareto
from tailrank.scoring import expected_logs, var_es1, var_logs

z = np.array([1.0, 1.5, 2.0, 5.0, 20.0])
for g in (0.5, 1.0, 2.0):
    cand = ParetoCandidate(g)
    print(f"gamma={g}: LogS {np.round(logs_pareto(cand, z), 4)}")

# %% [markdown]
# The energy score needs beta < 1/gamma. At gamma = 0.5, beta = 1 and z = 1 it
# equals -1/3 exactly.

# %%
cand = ParetoCandidate(0.5)
print("ES_1(F_0.5, 1) =", es_beta_pareto(cand, 1.0, 1.0))
print("ES_0.3 along z:", np.round(es_beta_pareto(cand, 0.3, z), 4))

# %% [markdown]
# The CRPS is maximized where the observation sits at the candidate's median.

# %%
zz = np.linspace(1, 3, 20001)
best = zz[np.argmax(es_beta_pareto(cand, 1.0, zz))]
print(f"argmax {best:.4f} vs median {cand.median():.4f}")

# %% [markdown]
# Under exact Pareto(gamma_G) data the expected log score peaks at gamma = gamma_G,
# and the score variances have closed forms.

# %%
grid = np.linspace(0.5, 2.0, 151)
print("argmax of expected LogS for gamma_G=1:", grid[np.argmax([expected_logs(g, 1.0) for g in grid])])
print("Var LogS(F_1) under Pareto(1):", var_logs(1.0, 1.0))
print("Var CRPS(F_0.5) under Pareto(0.25):", round(var_es1(0.5, 0.25), 5))
print("rules:", LOGS.label, ScoreRule.parse("crps").label)

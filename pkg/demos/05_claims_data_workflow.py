# %% [markdown]
# # From a claims file to a ranking
#
# The command line tool reads a comma-separated file, optionally keeps one subgroup,
# and writes score curves, a ranking and a manifest. Here a synthetic file with the
# layout of a bodily-injury claims table stands in for real data.

# %%
import json
import tempfile
from pathlib import Path

import numpy as np

from tailrank.cli import DatasetSpec, ingest, main

work = Path(tempfile.mkdtemp())
rng = np.random.default_rng(5)
sex = rng.permutation(["F"] * 742 + ["M"] * 586 + ["NA"] * 12)
loss = (1.0 - rng.random(sex.size)) ** -0.9 * 0.5
lines = ["CASENUM,CLMSEX,LOSS"] + [f"{i + 1},{s},{x!r}" for i, (s, x) in enumerate(zip(sex, loss.tolist()))]
data = work / "claims.csv"
data.write_text("\n".join(lines) + "\n")

# %%
print("all rows:", ingest(DatasetSpec(str(data), "LOSS")).n)
print("female subgroup:", ingest(DatasetSpec(str(data), "LOSS", ("CLMSEX", "F"), drop_missing=True)).n)

# %% [markdown]
# Rank five candidates on the female subgroup using every k from 10 to n/4.

# %%
out = work / "female"
main(["score", "--input", str(data), "--value-column", "LOSS", "--filter", "CLMSEX=F", "--drop-missing",
      "--candidates", "0.6,0.8,0.9,1,1.2", "--stability-fraction", "0.25", "--out-dir", str(out)])
print(json.loads((out / "ranking.json").read_text())["order"])

# %%
main(["estimate", "--input", str(data), "--value-column", "LOSS", "--filter", "CLMSEX=F",
      "--k-list", "20,50,100,150", "--out-dir", str(work / "est")])
print((work / "est" / "estimates.csv").read_text())

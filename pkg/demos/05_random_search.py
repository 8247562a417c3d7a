# %% [markdown]
# Empirical check that nothing beats the bounds: random encodings and
# measurements, including small perturbations around the optimal protocol.

# %%
from qdense import SchmidtSpectrum, random_protocol_search

spec = SchmidtSpectrum.from_weights([0.7, 0.2, 0.1])
for kind in ("approximate", "unambiguous"):
    rep = random_protocol_search(spec, 500, seed=0, kind=kind, include_construction=False)
    print(f"{kind:>12}: best random {rep.achieved_value:.6f}  bound {rep.bound_value:.6f}  gap {rep.gap:.2e}")

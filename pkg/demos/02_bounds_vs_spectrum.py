# %% [markdown]
# How the two optimal figures of merit depend on the entanglement of a qubit pair.
# The approximate optimum depends on the sum of all Schmidt coefficients, the
# unambiguous one only on the smallest. Pipe the CSV from
# ``qdense sweep --d 2 --steps 51`` into any plotting tool for the full curve.

# %%
import numpy as np

from qdense import SchmidtSpectrum, approximate_bound, unambiguous_bound

print(f"{'lambda0^2':>10} {'approximate':>12} {'unambiguous':>12}")
for x in np.linspace(0.5, 1.0, 11):
    spec = SchmidtSpectrum.from_weights([x, 1 - x])
    print(f"{x:10.2f} {approximate_bound(spec):12.6f} {unambiguous_bound(spec):12.6f}")

# %% Without entanglement the approximate scheme still guesses right 1/d of the time
for d in (2, 3, 4):
    product = SchmidtSpectrum([1.0] + [0.0] * (d - 1))
    print(d, approximate_bound(product), unambiguous_bound(product))

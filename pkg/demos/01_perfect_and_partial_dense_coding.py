# %% [markdown]
# Dense coding with a maximally entangled pair versus a partially entangled one.
# Alice encodes one of d^2 signals with a shift-and-phase operator; Bob measures
# both particles in the shifted Bell basis.

# %%
import numpy as np

from qdense import (
    SchmidtSpectrum,
    approximate_bound,
    average_success_probability,
    build_approximate_protocol,
    outcome_matrix,
    state_from_spectrum,
)

np.set_printoptions(precision=4, suppress=True)

# %% Bell pair: every signal is decoded with certainty
bell = SchmidtSpectrum.maximally_entangled(2)
om = outcome_matrix(build_approximate_protocol(2), state_from_spectrum(bell))
print("P(s|r) with a Bell pair:\n", om.p)

# %% lambda^2 = (0.8, 0.2): errors appear, but only between signals with the same shift
partial = SchmidtSpectrum.from_weights([0.8, 0.2])
om = outcome_matrix(build_approximate_protocol(2), state_from_spectrum(partial))
print("P(s|r) with lambda^2 = (0.8, 0.2):\n", om.p)
print("average success:", average_success_probability(om))
print("upper bound    :", approximate_bound(partial))

# %% The same protocol is optimal in every dimension
for d in range(2, 6):
    w = np.sort(np.random.default_rng(d).dirichlet(np.ones(d)))[::-1]
    spec = SchmidtSpectrum(np.sqrt(w))
    om = outcome_matrix(build_approximate_protocol(d), state_from_spectrum(spec))
    print(f"d={d}: simulated {average_success_probability(om):.12f}  bound {approximate_bound(spec):.12f}")

# %% [markdown]
# The error-free protocol: Bob's measurement has d^2 conclusive elements plus an
# inconclusive one. Every signal is decoded with the same probability
# d * lambda_min^2, so conditioning on success leaves Alice's prior untouched.

# %%
import numpy as np

from qdense import (
    Prior,
    SchmidtSpectrum,
    build_unambiguous_protocol,
    check_unambiguous,
    outcome_matrix,
    post_probability,
    state_from_spectrum,
    validate_povm,
)

np.set_printoptions(precision=4, suppress=True)
spec = SchmidtSpectrum.from_weights([0.5, 0.3, 0.2])
proto = build_unambiguous_protocol(spec)

# %% The measurement is a valid POVM; the inconclusive element is only just positive
report = validate_povm(proto.measurement)
print("valid:", report.passed)
print("smallest eigenvalue of the inconclusive element:", report.min_eigenvalues[-1])

# %% No cross-talk, constant success
om = outcome_matrix(proto, state_from_spectrum(spec))
rep = check_unambiguous(om)
print("largest error probability:", rep.max_off_diagonal)
print("conclusive probability   :", rep.conclusive_probability)

# %% Any prior survives post-selection on conclusive outcomes
prior = Prior(np.random.default_rng(1).dirichlet(np.ones(9)))
print("prior      :", prior.probs)
print("post-select:", post_probability(om, prior))

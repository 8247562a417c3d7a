# %% [markdown]
# The average success probability integrates over all priors with the flat
# measure on the probability simplex. Because each coordinate has mean 1/d^2,
# the integral is just the mean of the diagonal of P(s|r). Sampling confirms it.

# %%
from qdense import OutcomeMatrix, average_success_probability, monte_carlo_average
from qdense.densecoding import sample_uniform_simplex

om = OutcomeMatrix.from_diagonal(2, [1.0, 0.8, 0.6, 0.4])
print("analytic:", average_success_probability(om))
for n in (10**3, 10**4, 10**5, 10**6):
    res = monte_carlo_average(om, n, seed=0)
    print(f"{n:>8} samples: {res.estimate:.5f} +/- {res.stderr:.5f}")

# %%
pts = sample_uniform_simplex(9, 100_000, seed=1)
print("per-coordinate means:", pts.mean(axis=0).round(4), "target", round(1 / 9, 4))

"""Mehler evolution: closed form, Monte Carlo, and the missing semigroup property."""
import numpy as np

from mlcalc import mc
from mlcalc import operators as O
from mlcalc.special import MLParams

y, xi = np.array([0.5, -1.0]), np.array([0.6, 0.8])

# %% closed form against sampling
for beta in (0.5, 1.0):
    p = MLParams(beta)
    batch = mc.sample_measure(p, 2, 200_000, seed=1)
    for t in (0.1, 0.5, 2.0):
        est = mc.mc_mehler(batch, t, y, xi)
        exact = O.mehler_exp(p, t, y, xi)
        print(f"beta={beta} t={t}: {exact:.5f}  mc {est.value:.5f} +- {est.std_error:.1e}")

# %% P_s P_t differs from P_{t+s} for beta < 1
for beta in (1.0, 0.75, 0.5):
    d = O.mehler_semigroup_defect(MLParams(beta), 0.5, 0.5, xi)
    print(f"beta={beta}: defect {d:.3e}")

# %% subordinator draws against the M_beta density, worst histogram bin in standard errors
taus = mc.sample_subordinator(0.5, 200_000, seed=2)
print(mc.density_check(MLParams(0.5), taus)["max_sigmas"])

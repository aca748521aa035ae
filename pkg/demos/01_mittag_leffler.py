"""Mittag-Leffler and M-Wright functions: a short tour."""
import math

import numpy as np

from mlcalc.special import MLParams, m_wright_array, mittag_leffler, zero_free_radius

# %% E_beta interpolates between exp (beta = 1) and slower decay on the negative axis
x = np.linspace(0, 8, 9)
for beta in (0.25, 0.5, 0.75, 1.0):
    p = MLParams(beta)
    vals = [mittag_leffler(p, -v) for v in x]
    print(f"beta={beta:4}: " + " ".join(f"{v:8.5f}" for v in vals))

# %% beta = 1/2 has a closed form through erfcx
from scipy.special import erfcx

print("E_1/2(-3) =", mittag_leffler(MLParams(0.5), -3.0), "erfcx(3) =", erfcx(3.0))

# %% M_1/2 is a half-Gaussian density
w = np.linspace(0, 6, 7)
print(m_wright_array(MLParams(0.5), w))
print(np.exp(-w**2 / 4) / math.sqrt(math.pi))

# %% normalized exponentials need E_beta to stay away from its zeros
for beta in (0.3, 0.5, 0.9):
    print(f"zero-free radius at beta={beta}: {zero_free_radius(MLParams(beta)):.4f}")

"""Appell polynomials, their duals, and the L2 pairing of the Mittag-Leffler measure."""
import math

import numpy as np

from mlcalc import appell as A
from mlcalc.special import MLParams
from mlcalc.tensors import SymTensor, pair, tensor_power

p = MLParams(0.5)

# %% the b_n coefficients replace the Hermite factors (-1)^n/n!
print(A.appell_coeffs(p, 8).b)
print(A.appell_coeffs(MLParams(1.0), 8).b)

# %% in one dimension P_n is a polynomial; compare with the Hermite case at beta = 1
for n in range(5):
    print(n, A.appell_kernel(p, [1.5], n).coeffs[0], A.appell_kernel(MLParams(1.0), [1.5], n).coeffs[0])

# %% w^4 written in the Appell basis
quartic = A.ChaosVector.single(p, SymTensor(1, 4, [1.0]), basis="monomial")
print([k.coeffs[0].real for k in A.monomial_to_p(quartic).kernels])

# %% biorthogonality: <<Q_n(G), <P_m, theta>>> = delta_nm n! <G, theta>
rng = np.random.default_rng(0)
y = rng.normal(size=2)
G = tensor_power(rng.normal(size=2), 3)
for m in range(5):
    print(m, A.dual_pair(A.q_vector(p, G), A.appell_function(p, tensor_power(y, m))))
print("expected at m=3:", math.factorial(3) * pair(G, tensor_power(y, 3)))

# %% Appell polynomials have zero mean but are not L2 orthogonal when beta < 1
f = A.appell_function(p, tensor_power(y, 2))
g = A.appell_function(p, tensor_power(y, 4))
print("E[P_2 P_4] =", A.l2_pairing(f, g))

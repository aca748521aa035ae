"""Operators on truncated chaos expansions and their symbols."""
import json

import numpy as np

from mlcalc import operators as O
from mlcalc import transforms as T
from mlcalc.special import MLParams

p = MLParams(0.5)
xi, eta = np.array([0.3, -0.1]), np.array([0.2, 0.25])
I = T.exp_pairing(p, xi, eta)

# %% a Gateaux derivative multiplies the exponential pairing by <psi, xi>
psi = np.array([1.0, 2.0])
print(O.symbol(O.Gateaux(p, 2, psi), xi, eta) / I, psi @ xi)

# %% a matrix kernel Xi_{1,1}(A) multiplies it by <xi, A eta>
M = np.array([[1.0, 0.5], [-0.5, 2.0]])
op = O.IntegralKernel(p, 2, 1, 1, O.matrix_kernel(M))
print(O.symbol(op, xi, eta) / I, xi @ M @ eta)

# %% the two evaluation routes agree
comp = O.Composition(p, 2, (O.Creation(p, 2, 0), O.Translate(p, 2, np.array([0.2, 0.0]))))
print(O.symbol(comp, xi, eta, path="a"), O.symbol(comp, xi, eta, path="b"))

# %% operators serialize to JSON, which the symbol-grid command reads
print(json.dumps(op.to_json())[:120], "...")

# %% translation does not commute with multiplication once beta < 1
for beta in (1.0, 0.5):
    gap = O.translation_multiplication_gap(MLParams(beta), xi, eta)
    print(beta, gap["gap"])

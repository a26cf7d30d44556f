"""Algebra of the reduced field: augmentation, the bulk polynomial and eigenvalues.

    python demos/identities.py
"""

import numpy as np

from boojum import augment, eigenvalues, eval_P, eval_S
from boojum.tensor import biaxiality_b, director, reconstruct_Q

rng = np.random.default_rng(0)
u = rng.standard_normal((5, 3))
u /= np.linalg.norm(u, axis=1, keepdims=True)
phi = rng.uniform(-np.pi, np.pi, 5)

w = augment(u, phi)
print("|w| for unit u:", np.linalg.norm(w, axis=1))
print("S(L[u]) - P(u):", eval_S(w) - eval_P(u))

lam = eigenvalues(u).as_array()
print("eigenvalues from u:\n", np.sort(lam, axis=1))
print("eigvalsh of the rebuilt Q:\n", np.linalg.eigvalsh(reconstruct_Q(u, phi)))

# the boojum value (0, -1, 0) is uniaxial with a degenerate top eigenvalue
pole = np.array([0.0, -1.0, 0.0])
print("b at the pole value:", biaxiality_b(pole))
print("director at the pole value:", director(pole))

"""
Pressure and the Gibbs channel
==============================

For a positive family ``H`` the pressure is ``log lambda_H``.  Every
stochastic family ``L`` on the same atoms satisfies
``h(L) + int U_H dq_L <= log lambda_H``, and equality holds for the
Gibbs channel whose kernel is ``exp(U_H(w)) / lambda_H`` from every atom.
"""

import numpy as np

from kraus_thermo import KrausFamily, gibbs_maximizer, pressure
from kraus_thermo.linalg import hermitian_inv_sqrt
from kraus_thermo.thermo import gibbs_condition_check, potential_data, pressure_functional

rng = np.random.default_rng(3)
m, k = 4, 3
w = np.full(m, 0.25)
H = KrausFamily.from_operators(rng.standard_normal((m, k, k)) + 1j * rng.standard_normal((m, k, k)), w)

top = pressure(H)
pot = potential_data(H)
print(f"log lambda_H = {top:.10f}")
print("U_H =", np.round(pot.U, 6))

# random stochastic competitors
vals = []
for _ in range(200):
    G = rng.standard_normal((m, k, k)) + 1j * rng.standard_normal((m, k, k))
    S = np.einsum("m,mba,mbc->ac", w, G.conj(), G)
    vals.append(pressure_functional(H.with_operators(G @ hermitian_inv_sqrt(S)), H, pot))
print(f"best of 200 random L: {max(vals):.6f}")

# the maximizer
L = gibbs_maximizer(H)
print(f"Gibbs channel:        {pressure_functional(L, H, pot):.10f}")
print("Gibbs condition:", gibbs_condition_check(L, H))

"""
Markov chains as Kraus families
===============================

A column-stochastic matrix ``P`` becomes a Kraus family with one atom
``sqrt(p_ij) E_ij`` per transition.  The fixed density of the channel is the
stationary vector on the diagonal, and the entropy of the family is the
classical entropy rate of the chain.
"""

import numpy as np

from kraus_thermo import Channel, entropy, from_markov_chain, transition_kernel

P = np.array([[0.5, 0.3],
              [0.5, 0.7]])
mu, fam = from_markov_chain(P)
ch = Channel(fam)
print(fam)

# the fixed point sits on the diagonal
rho = ch.spectral.rho
print("rho_L =\n", np.round(rho.real, 12))

# stationary vector of P, for comparison
pi = np.array([P[0, 1], P[1, 0]]) / (P[0, 1] + P[1, 0])
print("pi =", pi)

# entropy of the family against -sum_ij pi_j p_ij log p_ij
rate = -np.sum(pi[None, :] * P * np.log(P))
print(f"entropy       {entropy(ch):.12f}")
print(f"entropy rate  {rate:.12f}")

###############################################################################
# The transition kernel between atoms reproduces the chain: from atom
# ``E_ij`` the next atom ``E_kl`` has probability ``p_kl`` when ``l = i`` and
# zero otherwise.

ker = transition_kernel(ch)
labels = ["E11", "E12", "E21", "E22"]
print("      " + "  ".join(f"{s:>5}" for s in labels))
for s, row in zip(labels, ker.P * fam.weights[None, :]):
    print(f"{s:>5} " + "  ".join(f"{v:5.2f}" for v in row))

"""
Trajectories, words and Monte Carlo barycenters
===============================================

The projective chain ``X_n`` and the unravelled densities ``rho_n`` share
one generator per chain, so ``rho_n = |X_n><X_n|`` step by step.  Word
probabilities are finite cylinders of the chain and sum to one at each
length.  The pooled Monte Carlo barycenter approaches ``rho_L``.
"""

import numpy as np

from kraus_thermo import Channel, from_markov_chain
from kraus_thermo.trajectory import (TrajectoryConfig, chain_rng, kernel_step,
                                     quantum_trajectory, simulate, word_probabilities)

ch = Channel(from_markov_chain([[0.5, 0.3], [0.5, 0.7]])[1])
rho = ch.spectral.rho

for n in range(1, 5):
    p = word_probabilities(ch, rho, n)
    print(f"length {n}: {p.size:4d} words, total {p.sum():.15f}")

# pathwise coupling
x = np.array([0.6, 0.8], dtype=complex)
cfg = TrajectoryConfig(n_steps=1000, seed=9)
traj = quantum_trajectory(ch, np.outer(x, x.conj()), cfg)
g = chain_rng(cfg.seed, 0)
dev = 0.0
for n in range(1, cfg.n_steps + 1):
    x, _ = kernel_step(ch, x, g)
    dev = max(dev, np.abs(traj[n] - np.outer(x, x.conj())).max())
print("max |rho_n - pi(X_n)| over 1000 steps:", dev)

###############################################################################
# Barycenter of the pooled chains against the fixed density.

for n_steps in (1_000, 10_000, 50_000):
    sim = simulate(ch, np.array([1.0, 0.0]), TrajectoryConfig(n_steps, burn_in=100,
                                                              n_chains=4, seed=0))
    print(f"{4 * n_steps:7d} samples: |barycenter - rho_L| = "
          f"{np.linalg.norm(sim.barycenter - rho):.2e}")

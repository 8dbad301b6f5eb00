"""
An invariant measure on projective space
========================================

Four rank-one atoms ``E11, E12, E21, E22`` (each scaled by ``1/sqrt(2)``)
send every density to ``Id/2``.  On lines, the induced Markov kernel jumps to
``e1`` or ``e2`` with equal probability, so ``(delta_e1 + delta_e2)/2`` is
invariant and its barycenter is the fixed density.
"""

import numpy as np

from kraus_thermo import Channel, build_family, four_projector_measure
from kraus_thermo.trajectory import (EmpiricalMeasure, TrajectoryConfig, barycenter,
                                     invariant_measure, markov_operator_apply, simulate,
                                     total_variation)

ch = Channel(build_family(four_projector_measure()))
rng = np.random.default_rng(0)
G = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
rho = G @ G.conj().T / np.trace(G @ G.conj().T)
print("phi(rho) =\n", np.round(ch.apply(rho), 14))

# push a measure forward until it stops moving
inv = invariant_measure(ch, x0=np.array([0.6, 0.8j]))
print("method:", inv.method, "after", inv.iterations, "steps")
for x, w in zip(inv.measure.points, inv.measure.weights):
    print("  mass", round(w, 12), "at", np.round(x, 12))

# one more pushforward changes nothing
nu = inv.measure
print("TV(nu Pi, nu) =", total_variation(markov_operator_apply(nu, ch), nu))
print("barycenter =\n", np.round(barycenter(nu).real, 12))

###############################################################################
# A Monte Carlo chain sees the same measure.

sim = simulate(ch, np.array([1.0, 0.0]), TrajectoryConfig(n_steps=20_000, burn_in=10,
                                                          n_chains=4, seed=1))
print("Monte Carlo mass at e1:", sim.empirical.mass_near([1, 0]))

"""
A reducible family and a nearby irreducible one
===============================================

The shift example has atoms proportional to ``E11 / (2n)`` and
``E12 / (2n-1)``.  Every density is sent to ``|e1><e1|``, the line through
``e1`` is invariant, and the family is not irreducible.  A small perturbation
of the operators makes it irreducible while moving each atom by less than
``epsilon`` in operator norm.
"""

import logging

import numpy as np

from kraus_thermo import Channel, example1_family
from kraus_thermo.channel import irreducibility_report
from kraus_thermo.errors import TruncationError
from kraus_thermo.generic import (irreducible_perturbation, perturbation_distance,
                                  phi_erg_classify)

logging.basicConfig(level=logging.ERROR)

# the atom count grows like 1/mass_tol; the cap is 10^5 atoms
try:
    example1_family(mass_tol=1e-8)
except TruncationError as exc:
    print("mass_tol 1e-8:", exc)

mu, fam = example1_family(mass_tol=1e-3)
ch = Channel(fam)
print(fam)

rho = np.array([[0.3, 0.1 - 0.2j], [0.1 + 0.2j, 0.7]])
print("phi(rho) =\n", np.round(ch.apply(rho), 12))

report = irreducibility_report(ch)
print("verdict:", report.verdict)
cls = phi_erg_classify(fam)
print("classification:", cls)
print("invariant line:", np.round(cls.subspaces[0].basis[:, 0], 12))

###############################################################################
# Perturb and classify again.

for eps in (0.1, 0.01):
    new = irreducible_perturbation(fam, epsilon=eps)
    print(f"eps={eps:g}: {phi_erg_classify(new)}, distance {perturbation_distance(new, fam):.2e}")

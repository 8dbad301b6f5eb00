"""
Entropy of a continuous family by quadrature
============================================

Atoms are the rotation-scaling matrices ``[[x, -y], [y, x]]`` weighted by
a Gaussian density in ``(x, y)``, discretised on a polar grid
(Gauss-Legendre in the radius, uniform in the angle).  The
resulting channel fixes ``Id/2`` (and also ``sigma_y``, so the fixed point is
not unique and ``Id/2`` is passed in explicitly).  The entropy has the closed
form ``-(log 2 + 1 - gamma)``, which the quadrature reproduces as the grid is
refined.
"""

import logging

import numpy as np
from scipy import integrate

from kraus_thermo import Channel, entropy, from_gaussian_rotation

logging.basicConfig(level=logging.ERROR)

closed = -(np.log(2.0) + 1.0 - np.euler_gamma)

# the same number from a one-dimensional integral: E[r^2 log r^2] over the
# radial density r exp(-r^2 / 2), shifted by log 2
val, _ = integrate.quad(lambda r: r**3 * np.exp(-r**2 / 2) * np.log(r**2 / 2), 0, np.inf)
print(f"closed form  {closed:.13f}")
print(f"scipy quad   {-val / 2 - np.log(2.0):.13f}")

for n_r, n_theta in [(20, 16), (40, 32), (80, 64)]:
    mu, fam = from_gaussian_rotation(n_r, n_theta)
    ch = Channel(fam)
    h = entropy(ch, rho=np.eye(2) / 2, tol=1e-6)
    print(f"({n_r:3d}, {n_theta:3d})  {len(fam):5d} atoms  h = {h:.13f}  err {abs(h - closed):.1e}")

# the fixed space is two-dimensional
S = Channel(from_gaussian_rotation(40, 32)[1]).superoperator
ev = np.linalg.eigvals(S)
print("eigenvalues of the superoperator:", np.round(np.sort_complex(ev), 10))

"""
Curvature on the sphere, none on the circle
===========================================

A spin in a field pointing along (theta, phi) has curvature sin(theta)/2.
The two-level atom only has the laser phase as a control, so its
connection is flat even after adding the noise direction.
"""

import numpy as np

from geophase import models
from geophase.composite import DisturbanceOperator
from geophase.connection import finite_difference_curvature, gauge_potential_from_frames, path_ordered_exp, \
    plaquette_curvature
from geophase.spectral import eigendecompose, smooth_transport

sphere = models.sphere_model()
th = np.linspace(0.3, 2.8, 11)
ph = np.linspace(0.0, 0.5, 3)
h = (th[1] - th[0], ph[1] - ph[0])
field = np.stack([[eigendecompose(sphere.hamiltonian(np.array([a, b])))[1].frame for b in ph] for a in th])

# %%
for i in range(len(th) - 1):
    F = plaquette_curvature(field, (i, 0), h)[0, 0]
    Ffd = finite_difference_curvature(field, (i, 0), h)[0, 0]
    centre = th[i] + h[0] / 2
    print(f"theta={centre:.3f}  plaquette={F.imag:.5f}  edges={Ffd.imag:.5f}  sin/2={0.5 * np.sin(centre):.5f}")

# %%
# The integral of the curvature over a cap is the loop phase around its rim.
for theta0 in (np.pi / 6, np.pi / 3, np.pi / 2):
    phi = np.linspace(0, 2 * np.pi, 10_001)
    pts = np.stack([np.full_like(phi, theta0), phi], axis=-1)
    U = path_ordered_exp(gauge_potential_from_frames(smooth_transport(sphere.hamiltonian(pts), 1), closed=True))
    print(f"theta0={theta0:.3f}  loop phase={U.phase:+.6f}  -pi(1-cos)={models.sphere_latitude_phase(theta0):+.6f}")

# %%
atom = models.two_level_model()
W = DisturbanceOperator.from_model(atom)
ths, ds = np.linspace(0, 0.4, 5), np.linspace(0, 0.2, 3)
flat = np.stack([[W(np.array([a]), np.array([d])) @ eigendecompose(atom.hamiltonian(np.array([a])))[1].frame
                  for d in ds] for a in ths])
print("two-level curvature:", max(abs(plaquette_curvature(flat, (i, j), (0.1, 0.1))[0, 0])
                                  for i in range(4) for j in range(2)))

"""
Berry phase of a laser-driven two-level atom
============================================

Sweep the laser phase once around the circle and read off the geometric
phase of the upper dressed state.  The circle is covered by three charts,
so the loop crosses chart boundaries on the way round.
"""

import numpy as np

from geophase import models
from geophase.connection import gauge_potential_from_frames, holonomy_with_crossings
from geophase.manifold import chart_route, circle_atlas, moebius_bundle
from geophase.spectral import smooth_transport

# %%
# Follow the upper eigenvalue along the loop.  Frames come out in the
# parallel-transport gauge, so the phase ends up in the closing link.
steps = 4000
theta = np.linspace(0, 2 * np.pi, steps + 1)
atlas = circle_atlas(epsilon=0.1)
bundle = moebius_bundle(atlas)
route = chart_route(np.arange(steps + 1.0), theta, atlas, closed=True)
print("chart changes:", [(c.src, c.dst) for c in route.crossings])

for delta in (0.0, 0.5, 1.0, 2.0):
    model = models.two_level_model(omega=1.0, delta=delta)
    frames = smooth_transport(model.hamiltonian(theta[:, None]), model.branch)
    gauge = gauge_potential_from_frames(frames, theta, route.charts, bundle, closed=True)
    U = holonomy_with_crossings(gauge, bundle).matrix[0, 0]
    expected = models.loop_phase(models.TwoLevelParams(1.0, delta))
    print(f"Delta={delta:3.1f}  phase={np.angle(U):+.6f}  closed form={np.angle(np.exp(1j * expected)):+.6f}")

# %%
# On resonance the state picks up a sign, the phase half a turn.  Detuning
# shrinks the enclosed solid angle and with it the phase.

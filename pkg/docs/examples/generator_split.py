"""
Splitting the connection of the disturbed problem
=================================================

With W(delta) acting on the Hamiltonian, the eigenframes of the disturbed
Hamiltonian are W Z.  Their connection separates into a control part, a
noise part and a cross term.  Here the split is compared with frames
obtained by diagonalizing the disturbed Hamiltonian directly.
"""

import numpy as np

from geophase import models
from geophase.composite import DisturbanceOperator, disturbed_frames, generator_split, split_identity_check
from geophase.spectral import frames_array, smooth_transport

model = models.two_level_model(omega=1.0, delta=1.0)
W = DisturbanceOperator.from_model(model)


def deviation(n):
    t = np.linspace(0, 1, n + 1)
    xs = (2 * np.pi * t)[:, None]
    ys = (0.3 * np.sin(2 * np.pi * t) + 0.2 * t)[:, None]
    Z = frames_array(smooth_transport(model.hamiltonian(xs), model.branch))
    split = generator_split(Z, W, xs, ys)
    direct = disturbed_frames(model.hamiltonian, W, Z, xs, ys)
    return split, split_identity_check(split, direct, dt=t[1] - t[0])


# %%
for n in (250, 500, 1000, 2000):
    split, dev = deviation(n)
    print(f"{n:5d} steps  deviation {dev:.3e}")

# %%
# The noise part per unit delta is the constant A_Q coefficient.
split, _ = deviation(1000)
t = np.linspace(0, 1, 1001)
dy = np.diff(0.3 * np.sin(2 * np.pi * t) + 0.2 * t)
rate = split.A_Qx[:, 0, 0] / dy
print("A_Q per unit delta:", rate[len(rate) // 2], " closed form:",
      models.analytic_AQ_coefficient(models.TwoLevelParams(1.0, 1.0)))

"""
Gaussian phase noise on the laser
=================================

The laser phase fluctuates as d(delta) = cos(theta/2) sqrt(D) dW.  The
accumulated phase is Gaussian with variance K = D int cos^2(theta/2) dt.
"""

import numpy as np

from geophase import models, stochastic

T, n, N = 2 * np.pi, 200, 50_000
dt = T / n
theta = np.arange(n + 1) * dt
problem = stochastic.wiener_phase_problem(models.cos_half, D=1.0)

# %%
# Each trajectory has its own random stream, keyed by (seed, index).
paths = stochastic.euler_maruyama_ensemble(problem, theta, [0.0], dt, master_seed=2024, n_paths=N)
final = paths[:, -1, 0]
K = stochastic.variance_kernel(models.cos_half, lambda s: s, 1.0, 0.0, T)
se = K * np.sqrt(2 / (N - 1))
print(f"variance {final.var(ddof=1):.4f} +- {se:.4f}   K = {K:.4f}")

# %%
# The characteristic function of a Gaussian: E exp(-i a X) = exp(-a^2 K / 2)
for a in (0.5, 1.0, 2.0):
    z = np.exp(-1j * a * final)
    mc, se = z.mean(), z.real.std() / np.sqrt(N)
    print(f"a={a}:  Monte Carlo {mc.real:+.4f}{mc.imag:+.4f}i (+- {se:.4f})   Gaussian {stochastic.gaussian_characteristic(a, K):.4f}")

# %%
# cos(theta/2) changes sign after a full turn of the control.
print("antiperiodic:", stochastic.antiperiodic_check(models.cos_half, theta))

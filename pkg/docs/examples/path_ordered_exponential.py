"""
Path-ordered exponentials of a non-abelian field
================================================

For matrix-valued potentials the order of the factors matters.  The
midpoint product converges at second order.
"""

import numpy as np

from geophase.connection import GaugePath, path_ordered_exp

sx = np.array([[0, 1], [1, 0]], dtype=complex)
sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
sz = np.diag([1.0, -1.0]).astype(complex)


def field(x):
    x = x[0]
    return (1j * (np.cos(x) * sx + np.sin(x) * sy + 0.5 * x * sz))[None]


def holonomy(n):
    return path_ordered_exp(GaugePath.from_field(field, np.linspace(0, 2.0, n + 1))).matrix


# %%
ref = holonomy(16000)
prev = None
for n in (100, 200, 400, 800):
    err = np.linalg.norm(holonomy(n) - ref, 2)
    note = "" if prev is None else f"  ratio {prev / err:.2f}"
    print(f"{n:5d} steps  error {err:.3e}{note}")
    prev = err

# %%
# Reversing the order gives a different matrix: the field does not commute
# with itself at different points.
steps = GaugePath.from_field(field, np.linspace(0, 2.0, 401)).steps
reversed_path = path_ordered_exp(GaugePath(steps[::-1])).matrix
print("ordering matters:", np.linalg.norm(reversed_path - ref, 2))

"""
How adiabatic is the loop?
==========================

Solve the Schrodinger equation exactly along a noiseless loop and compare
with the adiabatic state.  Slower loops follow the dressed state better
on average, though the infidelity oscillates with T on top of its decay,
so a short loop can land on a lucky duration.
"""

from geophase import models, verify

table = verify.fidelity_sweep(models.two_level_model(1.0, 1.0), [25, 50, 100, 200, 400], steps_per_time=20)
for row in table:
    print(f"T={row['T']:6.0f}  steps={row['steps']:6d}  fidelity={row['fidelity']:.6f}  "
          f"infidelity={1 - row['fidelity']:.2e}")

"""Stochastic driving of the disturbance coordinates.

Euler-Maruyama in the Ito sense, with one independent random stream per
trajectory derived from ``(master_seed, trajectory_index)``.  Ensembles are
therefore reproducible regardless of how trajectories are batched or in
which order they are generated.
"""
import csv
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .errors import DegenerateDensity, NumericalBlowup, ValidationError


@dataclass(frozen=True)
class SDEProblem:
    """``dy = f(x, y) dt + k(x, y) sqrt(D) dW``.

    ``drift(x, y)`` returns ``(..., n_y)`` and ``diffusion(x, y)`` returns
    ``(..., n_y, n_w)``.  ``x`` and ``y`` carry trailing coordinate axes.
    """

    drift: object
    diffusion: object
    D: float = 1.0
    n_y: int = 1
    n_w: int = 1
    interpretation: str = "ito"

    def __post_init__(self):
        if not self.D >= 0:
            raise ValidationError("noise intensity D must be non-negative")


def wiener_phase_problem(k, D):
    """Driftless phase noise ``d(delta) = k(theta) sqrt(D) dW``."""

    def drift(x, y):
        return np.zeros_like(np.asarray(y, dtype=float))

    def diffusion(x, y):
        kx = np.asarray(k(np.asarray(x, dtype=float)[..., 0]), dtype=float)
        shape = np.broadcast_shapes(kx.shape, np.shape(y)[:-1])
        return np.broadcast_to(kx, shape)[..., None, None]

    return SDEProblem(drift, diffusion, D)


@dataclass(frozen=True)
class NoiseTrajectory:
    seed: int
    index: int
    times: np.ndarray
    values: np.ndarray
    increments: np.ndarray


def trajectory_rng(master_seed, index):
    """Independent generator for trajectory ``index`` of an ensemble."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))


def standard_normals(master_seed, indices, n_steps, n_w=1):
    """Standard normal draws ``(len(indices), n_steps, n_w)``, one stream per index."""
    out = np.empty((len(indices), n_steps, n_w))
    for row, i in enumerate(indices):
        out[row] = trajectory_rng(master_seed, i).standard_normal((n_steps, n_w))
    return out


def _control_array(control, n):
    x = np.asarray(control, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if len(x) != n:
        raise ValidationError(f"control must be sampled on the {n}-point time grid, got {len(x)}")
    return x


def integrate(problem, control, y0, dt, xi, scheme="ito"):
    """Integrate a batch of paths driven by given standard normals.

    Parameters
    ----------
    control : (n_steps + 1, n_x) array
        Control coordinates on the time grid (shared by all paths).
    y0 : (n_y,) array_like
    xi : (n_paths, n_steps, n_w) array
        Standard normal draws.
    scheme : {"ito", "stratonovich"}
        Euler-Maruyama, or the Heun predictor-corrector that converges to
        the Stratonovich solution.

    Returns
    -------
    (n_paths, n_steps + 1, n_y) array
    """
    if not dt > 0:
        raise ValidationError("dt must be positive")
    xi = np.asarray(xi, dtype=float)
    n_paths, n_steps, _ = xi.shape
    x = _control_array(control, n_steps + 1)
    y = np.empty((n_paths, n_steps + 1, problem.n_y))
    y[:, 0] = np.asarray(y0, dtype=float)
    dW = np.sqrt(problem.D * dt) * xi
    for n in range(n_steps):
        yn = y[:, n]
        a = problem.drift(x[n], yn)
        b = problem.diffusion(x[n], yn)
        step = a * dt + np.einsum("...ij,...j->...i", b, dW[:, n])
        if scheme == "ito":
            y[:, n + 1] = yn + step
        elif scheme == "stratonovich":
            pred = yn + step
            a2 = problem.drift(x[n + 1], pred)
            b2 = problem.diffusion(x[n + 1], pred)
            y[:, n + 1] = yn + 0.5 * (a + a2) * dt + 0.5 * np.einsum("...ij,...j->...i", b + b2, dW[:, n])
        else:
            raise ValidationError(f"unknown scheme {scheme!r}")
        if not np.all(np.isfinite(y[:, n + 1])):
            raise NumericalBlowup(n + 1)
    return y


def euler_maruyama(problem, control, y0, dt, seed, index=0):
    """One Ito trajectory on the grid ``t_n = n dt`` of the control samples."""
    n_steps = len(control) - 1
    xi = standard_normals(seed, [index], n_steps, problem.n_w)
    y = integrate(problem, control, y0, dt, xi)[0]
    return NoiseTrajectory(int(seed), int(index), dt * np.arange(n_steps + 1), y, xi[0])


def euler_maruyama_ensemble(problem, control, y0, dt, master_seed, n_paths, start=0, scheme="ito"):
    """Trajectories ``start .. start + n_paths - 1`` of an ensemble, shape
    ``(n_paths, n_steps + 1, n_y)``."""
    n_steps = len(control) - 1
    xi = standard_normals(master_seed, range(start, start + n_paths), n_steps, problem.n_w)
    return integrate(problem, control, y0, dt, xi, scheme)


def variance_kernel(k, schedule, D, t0, t, n=2001):
    """``K(t, t0) = D * int_{t0}^{t} k(theta(s))^2 ds`` by the trapezoid rule."""
    if t < t0:
        raise ValidationError("variance kernel needs t >= t0")
    if t == t0:
        return 0.0
    s = np.linspace(t0, t, n)
    return float(D * trapezoid(np.asarray(k(schedule(s))) ** 2, s))


def variance_kernel_series(k, theta, times, D):
    """Cumulative ``K(t_n, t_0)`` on a sampled schedule (trapezoid)."""
    kk = np.asarray(k(np.asarray(theta))) ** 2
    inc = 0.5 * (kk[1:] + kk[:-1]) * np.diff(times)
    return D * np.concatenate([[0.0], np.cumsum(inc)])


def gaussian_characteristic(alpha, K):
    """``E[exp(-i alpha X)]`` for centred Gaussian ``X`` of variance ``K``."""
    if K < 0:
        raise ValidationError("variance K must be non-negative")
    return np.exp(-0.5 * alpha ** 2 * K)


def conditional_density(delta, t, delta0, t0, K):
    """Transition density of the phase noise from ``(delta0, t0)`` to ``(delta, t)``."""
    if t < t0:
        raise ValidationError("need t >= t0")
    if K < 0:
        raise ValidationError("variance K must be non-negative")
    if K == 0:
        raise DegenerateDensity("zero variance: point mass at delta0")
    u = np.asarray(delta) - delta0
    return np.exp(-0.5 * u ** 2 / K) / np.sqrt(2 * np.pi * K)


def antiperiodic_check(k, grid, tol=1e-9):
    grid = np.asarray(grid, dtype=float)
    return bool(np.all(np.abs(np.asarray(k(grid + 2 * np.pi)) + np.asarray(k(grid))) < tol))


def write_trajectory_csv(path, traj, theta):
    """CSV with columns ``t, theta, delta_theta``; seed in a comment header."""
    theta = np.asarray(theta, dtype=float).reshape(len(traj.times), -1)[:, 0]
    with open(path, "w", newline="") as fh:
        fh.write(f"# seed={traj.seed} index={traj.index}\n")
        w = csv.writer(fh)
        w.writerow(["t", "theta", "delta_theta"])
        for t, th, y in zip(traj.times, theta, traj.values[:, 0]):
            w.writerow([f"{t:.17g}", f"{th:.17g}", f"{y:.17g}"])

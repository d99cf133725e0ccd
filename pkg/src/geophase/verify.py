"""Independent checks of the adiabatic machinery.

* exact propagation of ``i dpsi/dt = H+(t) psi`` with midpoint exponentials;
* Monte Carlo ensembles of disturbed adiabatic trajectories with the
  Gaussian attenuation fit of the dressed-state population.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from . import models, stochastic
from .composite import DisturbanceOperator, adiabatic_evolve, dressed_amplitude, generator_split
from .errors import ValidationError
from .spectral import frames_array, smooth_transport

MAX_PHASE_PER_STEP = 0.1


@dataclass(frozen=True)
class ExactTrajectory:
    times: np.ndarray
    psi: np.ndarray

    def norm_drift(self):
        return float(np.max(np.abs(np.linalg.norm(self.psi, axis=-1) - 1.0)))


def exact_propagate(hamiltonian, psi0, times):
    """Propagate with ``exp(-i H(t_mid) dt)`` on every step of ``times``.

    ``hamiltonian(t)`` returns the ``(dim, dim)`` matrix at time ``t``.
    """
    times = np.asarray(times, dtype=float)
    dts = np.diff(times)
    if np.any(dts <= 0):
        raise ValidationError("times must be strictly increasing")
    mids = 0.5 * (times[1:] + times[:-1])
    H = np.stack([np.asarray(hamiltonian(t), dtype=complex) for t in mids])
    norms = np.linalg.norm(H, ord=2, axis=(-2, -1))
    worst = int(np.argmax(norms * dts))
    if norms[worst] * dts[worst] >= MAX_PHASE_PER_STEP:
        raise ValidationError(f"dt too large for ||H|| at step {worst}: dt*||H|| = {norms[worst] * dts[worst]:.3f}")
    E = expm(-1j * H * dts[:, None, None])
    psi = np.empty((len(times), H.shape[-1]), dtype=complex)
    psi[0] = psi0
    for k in range(len(dts)):
        psi[k + 1] = E[k] @ psi[k]
    return ExactTrajectory(times, psi)


def adiabatic_fidelity(exact, adiabatic):
    """``|<psi_exact(T)|psi_adiabatic(T)>|`` on identical time grids."""
    t_a = adiabatic.times
    if len(t_a) != len(exact.times) or not np.allclose(t_a, exact.times, rtol=0, atol=1e-12):
        raise ValidationError("exact and adiabatic trajectories use different time grids")
    return float(abs(np.vdot(exact.psi[-1], adiabatic.psi[..., -1, :])))


def loop_schedule(T, n_steps, loops=1):
    """Uniform loop ``theta(t) = 2 pi loops t / T`` sampled on ``n_steps + 1`` points."""
    times = np.linspace(0.0, T, n_steps + 1)
    return times, 2 * np.pi * loops * times / T


def noiseless_loop(model, T, n_steps, loops=1, gap_min=1e-6):
    """Exact and adiabatic solutions for an undisturbed control loop.

    Returns ``(exact, adiabatic)``.
    """
    times, theta = loop_schedule(T, n_steps, loops)
    xs = theta[:, None]
    Hs = model.hamiltonian(xs)
    frames = smooth_transport(Hs, model.branch, gap_min=gap_min)
    Z = frames_array(frames)
    ys = np.zeros((len(times), max(model.n_noise, 1)))
    W = DisturbanceOperator.from_model(model)
    split = generator_split(Z, W, xs, ys)
    lam = np.array([f.value for f in frames])
    adi = adiabatic_evolve(split, lam, W(xs, ys), Z, times)
    # exact run uses a grid fine enough for the propagator bound
    exact = exact_propagate(lambda t: model.hamiltonian(np.array([2 * np.pi * loops * t / T])),
                            Z[0, :, 0], times)
    return exact, adi


def fidelity_sweep(model, durations, steps_per_time=20, loops=1):
    """Adiabatic fidelity for each loop duration."""
    out = []
    for T in durations:
        n = max(int(np.ceil(T * steps_per_time)), 10)
        exact, adi = noiseless_loop(model, T, n, loops)
        out.append({"T": float(T), "steps": n, "fidelity": adiabatic_fidelity(exact, adi),
                    "norm_drift": exact.norm_drift()})
    return out


@dataclass(frozen=True)
class EnsembleSummary:
    N: int
    master_seed: int
    times: np.ndarray
    K: np.ndarray
    mean_psi: np.ndarray
    mean_psi_stderr: np.ndarray
    dressed_mean: np.ndarray
    dressed_stderr: np.ndarray
    individual_modulus_dev: float
    fitted_exponent: float
    exponent_stderr: float
    fit_points: int
    abort_count: int
    implemented_coefficient: float
    parameters: dict = field(default_factory=dict)

    @property
    def dressed_modulus(self):
        return np.abs(self.dressed_mean)

    def to_dict(self):
        return {
            "parameters": self.parameters,
            "N": self.N,
            "master_seed": self.master_seed,
            "fitted_exponent": self.fitted_exponent,
            "exponent_stderr": self.exponent_stderr,
            "fit_points": self.fit_points,
            "implemented_coefficient": self.implemented_coefficient,
            "individual_modulus_dev": self.individual_modulus_dev,
            "abort_count": self.abort_count,
            "final_dressed_modulus": float(self.dressed_modulus[-1]),
        }


def fit_attenuation(K, modulus, lo=0.1, hi=0.9):
    """Fit ``|E| = exp(-c^2 K / 2)`` on the window ``lo < |E| < hi``.

    Least squares of ``-2 log|E|`` against ``K`` through the origin.
    Returns ``(c, stderr_c, n_points)``; the standard error ignores the
    correlation between time samples and is indicative only.
    """
    K = np.asarray(K, dtype=float)
    m = np.asarray(modulus, dtype=float)
    sel = (m > lo) & (m < hi) & (K > 0)
    n = int(sel.sum())
    if n < 2:
        return 0.0, np.inf, n
    x = K[sel]
    y = -2 * np.log(m[sel])
    slope = float(np.dot(x, y) / np.dot(x, x))
    resid = y - slope * x
    se_slope = float(np.sqrt(np.dot(resid, resid) / (n - 1) / np.dot(x, x)))
    c = np.sqrt(max(slope, 0.0))
    se_c = se_slope / (2 * c) if c > 0 else np.inf
    return float(c), float(se_c), n


def ensemble_average(model, T, n_steps, D, N, master_seed, k=models.cos_half, loops=1,
                     include_ATy=True, chunk=500, threads=1, gap_min=1e-6):
    """Monte Carlo average of disturbed adiabatic trajectories.

    Every trajectory follows the same control loop with its own phase noise
    ``d(delta) = k(theta) sqrt(D) dW``.  Frames depend only on the control,
    so they are transported once and shared; a gap violation there aborts
    all ``N`` trajectories.  Chunks are reduced in index order so the result
    does not depend on ``threads``.
    """
    if N < 100:
        raise ValidationError("ensemble needs N >= 100")
    times, theta = loop_schedule(T, n_steps, loops)
    dt = times[1] - times[0]
    xs = theta[:, None]
    W = DisturbanceOperator.from_model(model)
    params = {"model": model.name, **model.params, "T": T, "n_steps": n_steps, "D": D,
              "loops": loops, "include_ATy": include_ATy}
    # frames are shared, so a gap violation aborts all N trajectories at once
    frames = smooth_transport(model.hamiltonian(xs), model.branch, gap_min=gap_min)
    Z = frames_array(frames)
    lam = np.array([f.value for f in frames])
    problem = stochastic.wiener_phase_problem(k, D)
    K = stochastic.variance_kernel_series(k, theta, times, D)

    # implemented noise generator per unit delta, from a unit noise step
    probe = generator_split(Z[:2], W, xs[:2], np.array([[0.0], [1e-4]]))
    coef = float(abs(probe.A_Qx[0, 0, 0]) / 1e-4) if Z.shape[2] == 1 else float("nan")

    starts = list(range(0, N, chunk))

    def run(start):
        n = min(chunk, N - start)
        ys = stochastic.euler_maruyama_ensemble(problem, xs, [0.0], dt, master_seed, n, start)
        split = generator_split(Z, W, xs, ys)
        Wv = W(xs, ys)
        traj = adiabatic_evolve(split, lam, Wv, Z, times, include_ATy=include_ATy)
        amp = dressed_amplitude(traj, Wv, Z)
        return (traj.psi.sum(axis=0), (np.abs(traj.psi) ** 2).sum(axis=0),
                amp.sum(axis=0), (np.abs(amp) ** 2).sum(axis=0),
                float(np.max(np.abs(np.abs(amp) - 1.0))))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(s) for s in starts]

    s_psi = sum(r[0] for r in results)
    s_psi2 = sum(r[1] for r in results)
    s_amp = sum(r[2] for r in results)
    s_amp2 = sum(r[3] for r in results)
    dev = max(r[4] for r in results)

    mean_psi = s_psi / N
    var_psi = np.maximum(s_psi2 / N - np.abs(mean_psi) ** 2, 0.0)
    amp_mean = s_amp / N
    var_amp = np.maximum(s_amp2 / N - np.abs(amp_mean) ** 2, 0.0)
    c, se_c, n_fit = fit_attenuation(K, np.abs(amp_mean))
    return EnsembleSummary(
        N=N, master_seed=int(master_seed), times=times, K=K,
        mean_psi=mean_psi, mean_psi_stderr=np.sqrt(var_psi / (N - 1)),
        dressed_mean=amp_mean, dressed_stderr=np.sqrt(var_amp / (N - 1)),
        individual_modulus_dev=dev, fitted_exponent=c, exponent_stderr=se_c,
        fit_points=n_fit, abort_count=0, implemented_coefficient=coef, parameters=params,
    )

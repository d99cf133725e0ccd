"""Command-line entry point.

    geophase <command> [--config PATH] [--seed N] [--out DIR] [--threads N]

Commands: holonomy, evolve, ensemble, sde-check, verify-adiabatic,
curvature.  Each writes ``report.json`` and a command-specific CSV into the
output directory.  Exit codes: 0 ok, 1 configuration/validation error,
2 numerical failure, 3 I/O error.
"""
import argparse
import csv
import json
import os
import platform
import sys
import time

import numpy as np
import scipy
from scipy.integrate import quad

from . import __version__, config as cfgmod, models, stochastic, verify
from .composite import DisturbanceOperator, adiabatic_evolve, dressed_amplitude, generator_split
from .connection import (finite_difference_curvature, gauge_potential_from_frames, holonomy_with_crossings,
                         path_ordered_exp, plaquette_curvature)
from .errors import ConfigError, GapViolation, NumericalBlowup, StepTooCoarse, ValidationError
from .manifold import chart_route, circle_atlas, fibre_monodromy, moebius_bundle
from .spectral import eigendecompose, frames_array, smooth_transport

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


def _fmt(x):
    return f"{x:.17g}"


def _matrix(U):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.atleast_2d(U)]


def _write_csv(path, header, rows, comment=None):
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _two_level(cfg):
    m = cfg["model"]
    return models.two_level_model(m["omega"], m["delta"])


def _loop_frames(model, cfg, theta):
    n = cfg["numerics"]
    return smooth_transport(model.hamiltonian(theta[:, None]), model.branch,
                            n["degeneracy_tol"], n["gap_min"])


def cmd_holonomy(cfg, out, threads=1):
    """Undisturbed closed-loop geometric phase of the configured model."""
    steps = cfg.get("schedule", "steps")
    loops = cfg.get("schedule", "loops")
    name = cfg.get("model", "name")
    if name == "sphere":
        theta0 = cfg.get("model", "theta0")
        model = models.sphere_model(theta0)
        phi = np.linspace(0, 2 * np.pi * loops, steps + 1)
        pts = np.stack([np.full_like(phi, theta0), phi], axis=-1)
        frames = smooth_transport(model.hamiltonian(pts), model.branch, cfg.get("numerics", "degeneracy_tol"),
                                  cfg.get("numerics", "gap_min"))
        hol = path_ordered_exp(gauge_potential_from_frames(frames, closed=True))
        expected = loops * models.sphere_latitude_phase(theta0)
        rows = [(float(p), "sphere", f.value) for p, f in zip(phi, frames)]
    else:
        model = _two_level(cfg)
        theta = np.linspace(0, 2 * np.pi * loops, steps + 1)
        atlas = circle_atlas(cfg.get("manifold", "epsilon"))
        bundle = moebius_bundle(atlas)
        route = chart_route(np.arange(steps + 1, dtype=float), theta, atlas, closed=True)
        frames = _loop_frames(model, cfg, theta)
        gauge = gauge_potential_from_frames(frames, theta, route.charts, bundle, closed=True)
        hol = holonomy_with_crossings(gauge, bundle)
        coef = models.analytic_AP_coefficient(models.TwoLevelParams(**model.params))
        expected = -loops * quad(lambda th: coef.imag, 0, 2 * np.pi)[0]
        rows = [(float(t), c, f.value) for t, c, f in zip(theta, route.charts, frames)]

    angle = hol.phase
    wrapped = float(np.angle(np.exp(1j * expected)))
    _write_csv(os.path.join(out, "holonomy.csv"), ["x", "chart", "eigenvalue"], rows)
    return {
        "phase_angle": angle,
        "holonomy_matrix": _matrix(hol.matrix),
        "expected_phase_unwrapped": float(expected),
        "expected_phase_wrapped": wrapped,
        "abs_error": float(abs(np.exp(1j * angle) - np.exp(1j * expected))),
        "unitarity_error": hol.unitarity_error(),
        "ordering": hol.ordering,
    }


def _evolve_one(cfg, seed):
    model = _two_level(cfg)
    p = models.TwoLevelParams(**model.params)
    T, steps, loops = cfg.get("schedule", "T"), cfg.get("schedule", "steps"), cfg.get("schedule", "loops")
    times, theta = verify.loop_schedule(T, steps, loops)
    xs = theta[:, None]
    k = models.K_FORMS[cfg.get("noise", "k_form")]
    problem = stochastic.wiener_phase_problem(k, cfg.get("noise", "D"))
    traj = stochastic.euler_maruyama(problem, xs, [0.0], times[1] - times[0], seed)
    frames = _loop_frames(model, cfg, theta)
    Z = frames_array(frames)
    W = DisturbanceOperator.from_model(model)
    split = generator_split(Z, W, xs, traj.values)
    Wv = W(xs, traj.values)
    include = cfg.get("numerics", "include_ATy")
    adi = adiabatic_evolve(split, [f.value for f in frames], Wv, Z, times, include_ATy=include)
    return model, p, times, theta, traj, Z, Wv, adi


def cmd_evolve(cfg, out, threads=1):
    """One disturbed trajectory: noise draw, generator split, adiabatic evolution."""
    if cfg.get("model", "name") != "two_level":
        raise ConfigError("evolve supports model two_level only")
    seed = cfg.get("noise", "seed")
    model, p, times, theta, traj, Z, Wv, adi = _evolve_one(cfg, seed)
    amp = dressed_amplitude(adi, Wv, Z)
    rows = []
    for n in range(len(times)):
        psi = adi.psi[n]
        rows.append((times[n], theta[n], traj.values[n, 0], psi[0].real, psi[0].imag, psi[1].real, psi[1].imag,
                     adi.dynamical_phase[n], adi.geometric_phase[n], abs(amp[n])))
    _write_csv(os.path.join(out, "evolve.csv"),
               ["t", "theta", "delta_theta", "re_psi0", "im_psi0", "re_psi1", "im_psi1",
                "dynamical_phase", "geometric_phase", "dressed_modulus"],
               rows, comment=f"seed={seed}")

    report = {"seed": seed, "include_ATy": adi.metadata["include_ATy"],
              "final_delta_theta": float(traj.values[-1, 0]),
              "max_dressed_modulus_dev": float(np.max(np.abs(np.abs(amp) - 1)))}
    loops = cfg.get("schedule", "loops")
    if loops >= 1:
        # gauge-invariant geometric factor at the loop end: closure * transporter
        closure = Z[0].conj().T @ Z[-1]
        total = complex((closure @ adi.transporter[-1])[0, 0])
        a_q = models.analytic_AQ_coefficient(p)
        a_p = quad(lambda th: models.analytic_AP_coefficient(p).imag, 0, 2 * np.pi * loops)[0]
        oracle = np.exp(-1j * a_p) * np.exp(-a_q * (traj.values[-1, 0] - traj.values[0, 0]))
        # instantaneous extra turn at the final noise value: the fibre
        # coordinate comes back negated when the route returns to its chart
        delta0 = float(traj.values[-1, 0])
        atlas = circle_atlas(cfg.get("manifold", "epsilon"))
        turn_route = chart_route([0.0, 1.0, 2.0, 3.0], [0.0, np.pi, 1.5 * np.pi, 2 * np.pi], atlas, closed=True)
        flipped = fibre_monodromy(moebius_bundle(atlas), turn_route, delta0)
        turn = np.exp(1j * models.loop_phase(p)) * np.exp(-a_q * (flipped - delta0))
        report.update({
            "loop_geometric_factor": [total.real, total.imag],
            "loop_geometric_phase": float(np.angle(total)),
            "oracle_phase": float(np.angle(oracle)),
            "oracle_abs_error": float(abs(total - oracle)),
            "instantaneous_turn": {
                "delta_theta_before": delta0,
                "delta_theta_after_chart_return": float(flipped),
                "phase": float(np.angle(turn)),
            },
        })
    return report


def _coefficient_comparison(p, c):
    q_half, q_full = abs(p.delta) / (2 * p.r), abs(p.delta) / p.r
    return {
        "fitted": c,
        "delta_over_2r": q_half,
        "delta_over_r": q_full,
        "rel_dev_delta_over_2r": abs(c - q_half) / q_half if q_half else None,
        "rel_dev_delta_over_r": abs(c - q_full) / q_full if q_full else None,
        "closer_to": "delta_over_2r" if abs(c - q_half) <= abs(c - q_full) else "delta_over_r",
        "component_exponents": {
            "implemented": [(q_half + 0.5) ** 2, (q_half - 0.5) ** 2],
            "with_delta_over_r": [(q_full + 0.5) ** 2, (q_full - 0.5) ** 2],
        },
    }


def cmd_ensemble(cfg, out, threads=1):
    """Monte Carlo average over independent noise realizations."""
    if cfg.get("model", "name") != "two_level":
        raise ConfigError("ensemble supports model two_level only")
    model = _two_level(cfg)
    p = models.TwoLevelParams(**model.params)
    s = verify.ensemble_average(
        model, cfg.get("schedule", "T"), cfg.get("schedule", "steps"), cfg.get("noise", "D"),
        cfg.get("ensemble", "N"), cfg.get("noise", "seed"), k=models.K_FORMS[cfg.get("noise", "k_form")],
        loops=cfg.get("schedule", "loops"), include_ATy=cfg.get("numerics", "include_ATy"),
        chunk=cfg.get("ensemble", "chunk"), threads=threads, gap_min=cfg.get("numerics", "gap_min"))
    rows = []
    for n in range(len(s.times)):
        mp = s.mean_psi[n]
        rows.append((s.times[n], s.K[n], mp[0].real, mp[0].imag, mp[1].real, mp[1].imag,
                     abs(s.dressed_mean[n]), s.dressed_stderr[n]))
    _write_csv(os.path.join(out, "ensemble.csv"),
               ["t", "K", "re_mean_psi0", "im_mean_psi0", "re_mean_psi1", "im_mean_psi1",
                "dressed_modulus", "dressed_stderr"], rows, comment=f"master_seed={s.master_seed} N={s.N}")
    report = s.to_dict()
    report["coefficient_comparison"] = _coefficient_comparison(p, s.fitted_exponent)
    return report


def cmd_sde_check(cfg, out, threads=1):
    """Antiperiodicity, moments and characteristic function of the phase noise."""
    k = models.K_FORMS[cfg.get("noise", "k_form")]
    D, T, steps = cfg.get("noise", "D"), cfg.get("schedule", "T"), cfg.get("schedule", "steps")
    N, seed = cfg.get("ensemble", "N"), cfg.get("noise", "seed")
    loops = cfg.get("schedule", "loops")
    times, theta = verify.loop_schedule(T, steps, loops)
    schedule = lambda t: 2 * np.pi * loops * np.asarray(t) / T
    K = stochastic.variance_kernel(k, schedule, D, 0.0, T)
    problem = stochastic.wiener_phase_problem(k, D)
    y = stochastic.euler_maruyama_ensemble(problem, theta[:, None], [0.0], times[1] - times[0], seed, N)[:, -1, 0]
    mean, var = float(y.mean()), float(y.var(ddof=1))
    se_mean = float(np.sqrt(var / N))
    se_var = float(np.sqrt(np.var((y - y.mean()) ** 2, ddof=1) / N))
    rows, checks = [], []
    for alpha in (0.5, 1.0, 2.0):
        z = np.exp(-1j * alpha * y)
        m = complex(z.mean())
        se = float(np.sqrt(np.var(z.real, ddof=1) / N))
        pred = float(stochastic.gaussian_characteristic(alpha, K))
        ok = abs(m.real - pred) < 3 * se + 1e-12
        checks.append(ok)
        rows.append((alpha, m.real, m.imag, se, pred, int(ok)))
    _write_csv(os.path.join(out, "sde_check.csv"),
               ["alpha", "mc_real", "mc_imag", "stderr", "predicted", "within_3se"], rows,
               comment=f"seed={seed} N={N}")
    grid = np.linspace(0, 2 * np.pi, 1001)
    return {
        "antiperiodic": stochastic.antiperiodic_check(k, grid),
        "K": K,
        "mean": mean, "mean_stderr": se_mean, "mean_ok": abs(mean) < 3 * se_mean + 1e-12,
        "variance": var, "variance_stderr": se_var, "variance_ok": abs(var - K) < 3 * se_var + 1e-12,
        "characteristic_ok": all(checks),
    }


def cmd_verify_adiabatic(cfg, out, threads=1):
    """Exact versus adiabatic fidelity over a sweep of loop durations."""
    model = _two_level(cfg)
    dt = cfg.get("numerics", "dt")
    table = verify.fidelity_sweep(model, cfg.get("verify", "durations"), steps_per_time=1.0 / dt,
                                  loops=max(cfg.get("schedule", "loops"), 1))
    _write_csv(os.path.join(out, "fidelity.csv"), ["T", "steps", "fidelity", "norm_drift"],
               [(r["T"], r["steps"], r["fidelity"], r["norm_drift"]) for r in table])
    return {"fidelity_table": table}


def cmd_curvature(cfg, out, threads=1):
    """Plaquette curvature of the sphere fixture around the configured latitude."""
    c = cfg["curvature"]
    theta0 = cfg.get("model", "theta0")
    model = models.sphere_model(theta0)
    half = min(0.25, 0.5 * min(theta0, np.pi - theta0))
    th = np.linspace(theta0 - half, theta0 + half, c["n_theta"])
    ph = np.linspace(0.0, 2 * np.pi, c["n_phi"])
    h = (th[1] - th[0], ph[1] - ph[0])
    grid = np.stack(np.meshgrid(th, ph, indexing="ij"), axis=-1)
    field = np.empty(grid.shape[:2] + (2, 1), dtype=complex)
    for i in range(len(th)):
        for j in range(len(ph)):
            field[i, j] = eigendecompose(model.hamiltonian(grid[i, j]))[model.branch].frame
    rows, worst, worst_fd = [], 0.0, 0.0
    for i in range(len(th) - 1):
        for j in range(len(ph) - 1):
            F = plaquette_curvature(field, (i, j), h)[0, 0]
            Ffd = finite_difference_curvature(field, (i, j), h)[0, 0]
            exact = 0.5 * np.sin(th[i] + 0.5 * h[0])
            worst = max(worst, abs(F.imag - exact))
            worst_fd = max(worst_fd, abs(F - Ffd))
            rows.append((th[i] + 0.5 * h[0], ph[j] + 0.5 * h[1], F.imag, Ffd.imag, exact))
    _write_csv(os.path.join(out, "curvature.csv"),
               ["theta", "phi", "F_plaquette_imag", "F_finite_difference_imag", "F_exact_imag"], rows)

    n = c["loop_samples"]
    phi = np.linspace(0, 2 * np.pi, n + 1)
    pts = np.stack([np.full_like(phi, theta0), phi], axis=-1)
    hol = path_ordered_exp(gauge_potential_from_frames(smooth_transport(model.hamiltonian(pts), model.branch),
                                                      closed=True))
    expected = models.sphere_latitude_phase(theta0)

    # two-level model: frames W(delta) Z(theta) on a (theta, delta) grid; the
    # control base is one-dimensional so the curvature must vanish
    tl = _two_level(cfg)
    W = DisturbanceOperator.from_model(tl)
    ths = np.linspace(0.0, 0.4, 5)
    ds = np.linspace(0.0, 0.2, 3)
    flat = np.empty((len(ths), len(ds), 2, 1), dtype=complex)
    for i, t in enumerate(ths):
        fr = eigendecompose(tl.hamiltonian(np.array([t])))[tl.branch].frame
        for j, d in enumerate(ds):
            flat[i, j] = W(np.array([t]), np.array([d])) @ fr
    flat_F = max(abs(plaquette_curvature(flat, (i, j), (ths[1] - ths[0], ds[1] - ds[0]))[0, 0])
                 for i in range(len(ths) - 1) for j in range(len(ds) - 1))
    return {
        "max_abs_dev_from_exact": worst,
        "max_abs_dev_plaquette_vs_fd": worst_fd,
        "latitude_phase": hol.phase,
        "latitude_expected": float(expected),
        "latitude_abs_error": float(abs(hol.matrix[0, 0] - np.exp(1j * expected))),
        "circle_model_max_curvature": float(flat_F),
    }


COMMANDS = {
    "holonomy": cmd_holonomy,
    "evolve": cmd_evolve,
    "ensemble": cmd_ensemble,
    "sde-check": cmd_sde_check,
    "verify-adiabatic": cmd_verify_adiabatic,
    "curvature": cmd_curvature,
}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def run(command, cfg, out, threads=1):
    """Execute one command and write ``report.json``; returns the report."""
    os.makedirs(out, exist_ok=True)
    t0 = time.perf_counter()
    results = COMMANDS[command](cfg, out, threads)
    report = {
        "command": command,
        "config": cfg.to_dict(),
        "seeds": {"noise": cfg.get("noise", "seed")},
        "results": results,
        "versions": {"geophase": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "wall_time_s": time.perf_counter() - t0,
    }
    report = _jsonable(report)
    with open(os.path.join(out, "report.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
    with open(os.path.join(out, "config.ini"), "w") as fh:
        fh.write(cfg.to_ini())
    return report


def build_parser():
    ap = argparse.ArgumentParser(prog="geophase", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="INI config file, or a report.json to replay")
    ap.add_argument("--seed", type=int, help="override [noise] seed")
    ap.add_argument("--out", help="override [output] dir")
    ap.add_argument("--threads", type=int, default=1)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = cfgmod.load(args.config)
        if args.seed is not None:
            if args.seed < 0 or args.seed >= 2 ** 64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            cfg["noise"]["seed"] = args.seed
        if args.out is not None:
            cfg["output"]["dir"] = args.out
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        report = run(args.command, cfg, cfg.get("output", "dir"), args.threads)
    except (ConfigError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GapViolation, StepTooCoarse, NumericalBlowup) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(json.dumps(report["results"], indent=2, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

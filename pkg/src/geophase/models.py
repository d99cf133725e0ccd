"""Built-in model fixtures.

* ``two_level``: an atom driven by a phase-modulated laser in the rotating
  wave approximation, whose laser phase picks up a stochastic offset.
  Control coordinate: laser phase ``theta``; noise coordinate: ``delta_theta``.
* ``sphere``: a spin-1/2 in a unit field along ``(theta, phi)``, a
  two-parameter family with non-zero curvature.

All maps broadcast over leading array dimensions.  hbar = 1.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class TwoLevelParams:
    omega: float = 1.0
    delta: float = 1.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValidationError("omega must be positive")
        if not np.isfinite(self.delta):
            raise ValidationError("delta must be finite")

    @property
    def r(self):
        return float(np.hypot(self.omega, self.delta))


def rwa_hamiltonian(params, theta):
    """``(1/2) [[0, Omega e^{i theta}], [Omega e^{-i theta}, 2 Delta]]``."""
    theta = np.asarray(theta, dtype=float)
    H = np.zeros(theta.shape + (2, 2), dtype=complex)
    H[..., 0, 1] = 0.5 * params.omega * np.exp(1j * theta)
    H[..., 1, 0] = 0.5 * params.omega * np.exp(-1j * theta)
    H[..., 1, 1] = params.delta
    return H


def plus_eigenvalue(params):
    """Upper eigenvalue ``(Delta + r) / 2``."""
    return 0.5 * (params.delta + params.r)


def plus_eigenvector(params, theta):
    """Upper dressed state, ``(Omega e^{i theta}, Delta + r) / sqrt(2 r (r + Delta))``.

    The second component is real and positive, which makes the state
    single-valued on the circle.
    """
    theta = np.asarray(theta, dtype=float)
    r, d = params.r, params.delta
    norm = np.sqrt(2 * r * (r + d))
    v = np.empty(theta.shape + (2,), dtype=complex)
    v[..., 0] = params.omega * np.exp(1j * theta) / norm
    v[..., 1] = (d + r) / norm
    return v


def analytic_AP_coefficient(params):
    """Coefficient of ``d theta`` in ``<+|d|+>``: ``i Omega^2 / (2 r (r + Delta))``."""
    r = params.r
    return 1j * params.omega ** 2 / (2 * r * (r + params.delta))


def analytic_AQ_coefficient(params):
    """Coefficient of ``d delta_theta`` in ``<+|W^-1 dW|+>`` with
    :func:`disturbance_W`: ``-i Delta / (2 r)``."""
    return -1j * params.delta / (2 * params.r)


def loop_phase(params, turns=1):
    """Closed-loop Berry phase ``-pi (1 - Delta / r)`` per turn, unwrapped."""
    return -2 * np.pi * turns * analytic_AP_coefficient(params).imag


def disturbance_W(delta_theta):
    """``diag(e^{i d/2}, e^{-i d/2})``, so that ``W H(theta) W^dagger = H(theta + d)``."""
    d = np.asarray(delta_theta, dtype=float)
    W = np.zeros(d.shape + (2, 2), dtype=complex)
    W[..., 0, 0] = np.exp(0.5j * d)
    W[..., 1, 1] = np.exp(-0.5j * d)
    return W


def disturbance_W_derivative(delta_theta):
    d = np.asarray(delta_theta, dtype=float)
    dW = np.zeros(d.shape + (2, 2), dtype=complex)
    dW[..., 0, 0] = 0.5j * np.exp(0.5j * d)
    dW[..., 1, 1] = -0.5j * np.exp(-0.5j * d)
    return dW


def sphere_fixture(theta, phi):
    """``(1/2) n . sigma`` with ``n = (sin t cos p, sin t sin p, cos t)``."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.any(theta <= 0) or np.any(theta >= np.pi):
        raise ValidationError("sphere fixture is charted on 0 < theta < pi")
    theta, phi = np.broadcast_arrays(theta, phi)
    H = np.empty(theta.shape + (2, 2), dtype=complex)
    H[..., 0, 0] = 0.5 * np.cos(theta)
    H[..., 1, 1] = -0.5 * np.cos(theta)
    H[..., 0, 1] = 0.5 * np.sin(theta) * np.exp(-1j * phi)
    H[..., 1, 0] = 0.5 * np.sin(theta) * np.exp(1j * phi)
    return H


def sphere_latitude_phase(theta0):
    """Upper-state loop phase at fixed polar angle, ``-pi (1 - cos theta0)``."""
    return -np.pi * (1 - np.cos(theta0))


def cos_half(theta):
    """Default diffusion profile, antiperiodic under ``theta -> theta + 2 pi``."""
    return np.cos(0.5 * np.asarray(theta))


K_FORMS = {
    "cos_half": cos_half,
    "sin_half": lambda th: np.sin(0.5 * np.asarray(th)),
    "one": lambda th: np.ones_like(np.asarray(th, dtype=float)),
}


@dataclass(frozen=True)
class ModelSpec:
    """A parameterized model: ``H(x)``, ``W(x, y)`` and known closed forms.

    ``hamiltonian`` takes control points ``(..., n_control)``;
    ``disturbance`` and its derivatives take ``(x, y)`` with trailing
    coordinate axes and return ``(..., dim, dim)`` (derivatives add a
    coordinate axis before the matrix axes).
    """

    name: str
    dim: int
    n_control: int
    n_noise: int
    branch: int
    hamiltonian: object
    disturbance: object = None
    disturbance_dy: object = None
    disturbance_dx: object = None
    analytic: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)


def two_level_model(omega=1.0, delta=1.0):
    p = TwoLevelParams(omega, delta)

    def dW_dy(x, y):
        return disturbance_W_derivative(np.asarray(y)[..., 0])[..., None, :, :]

    def dW_dx(x, y):
        y = np.asarray(y)
        return np.zeros(y.shape[:-1] + (1, 2, 2), dtype=complex)

    return ModelSpec(
        name="two_level", dim=2, n_control=1, n_noise=1, branch=1,
        hamiltonian=lambda x: rwa_hamiltonian(p, np.asarray(x)[..., 0]),
        disturbance=lambda x, y: disturbance_W(np.asarray(y)[..., 0]),
        disturbance_dy=dW_dy, disturbance_dx=dW_dx,
        analytic={
            "eigenvalue": plus_eigenvalue(p),
            "eigenvector": lambda x: plus_eigenvector(p, np.asarray(x)[..., 0])[..., None],
            "AP_coefficient": analytic_AP_coefficient(p),
            "AQ_coefficient": analytic_AQ_coefficient(p),
            "loop_phase": loop_phase(p),
        },
        params={"omega": omega, "delta": delta},
    )


def sphere_model(theta0=np.pi / 3):
    """Sphere fixture with the latitude loop at ``theta0`` as its control path.

    Control coordinates are ``(theta, phi)``; there is no noise coordinate.
    """
    return ModelSpec(
        name="sphere", dim=2, n_control=2, n_noise=0, branch=1,
        hamiltonian=lambda x: sphere_fixture(np.asarray(x)[..., 0], np.asarray(x)[..., 1]),
        analytic={"loop_phase": sphere_latitude_phase(theta0), "eigenvalue": 0.5},
        params={"theta0": theta0},
    )


MODELS = {"two_level": two_level_model, "sphere": sphere_model}


def get_model(name, **params):
    try:
        factory = MODELS[name]
    except KeyError:
        raise ValidationError(f"unknown model {name!r}; known: {sorted(MODELS)}") from None
    return factory(**params)

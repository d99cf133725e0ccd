"""Disturbed Hamiltonians ``H+ = W H W^dagger``, the three-part generator
split and adiabatic propagation along a combined control + noise path.

Array conventions: frames ``(n, dim, n_a)``, control samples ``(n, n_x)``,
noise samples ``(..., n, n_y)`` where the leading axes index independent
noise realizations.  Every function broadcasts over those leading axes so a
whole ensemble chunk is processed at once.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import expm

from .connection import anti_hermitian_part, cumulative_products
from .errors import ValidationError
from .spectral import align_frame, check_hermitian, eigendecompose

UNITARY_TOL = 1e-10
FD_STEP = 1e-5


def _dagger(A):
    return np.swapaxes(A.conj(), -1, -2)


def _unitarity_error(W):
    n = W.shape[-1]
    return float(np.max(np.abs(_dagger(W) @ W - np.eye(n))))


class DisturbanceOperator:
    """Unitary ``W(x, y)`` with partial derivatives.

    Derivatives fall back to central finite differences when no analytic
    map is given.  ``x`` and ``y`` carry a trailing coordinate axis.
    """

    def __init__(self, W, dW_dx=None, dW_dy=None, fd_step=FD_STEP):
        self._W = W
        self._dx = dW_dx
        self._dy = dW_dy
        self.fd_step = fd_step

    @classmethod
    def from_model(cls, model):
        return cls(model.disturbance, model.disturbance_dx, model.disturbance_dy)

    def __call__(self, x, y):
        return np.asarray(self._W(np.asarray(x, float), np.asarray(y, float)), dtype=complex)

    def _fd(self, x, y, wrt):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        arg = x if wrt == "x" else y
        h = self.fd_step
        out = []
        for m in range(arg.shape[-1]):
            e = np.zeros(arg.shape[-1])
            e[m] = h
            if wrt == "x":
                out.append((self(x + e, y) - self(x - e, y)) / (2 * h))
            else:
                out.append((self(x, y + e) - self(x, y - e)) / (2 * h))
        return np.stack(out, axis=-3)

    def d_dx(self, x, y):
        if self._dx is not None:
            return np.asarray(self._dx(np.asarray(x, float), np.asarray(y, float)), dtype=complex)
        return self._fd(x, y, "x")

    def d_dy(self, x, y):
        if self._dy is not None:
            return np.asarray(self._dy(np.asarray(x, float), np.asarray(y, float)), dtype=complex)
        return self._fd(x, y, "y")

    def check_unitary(self, x, y, tol=UNITARY_TOL):
        return _unitarity_error(self(x, y)) < tol


def disturbed_hamiltonian(H, W):
    """``W H W^dagger`` for a Hermitian ``H`` and unitary ``W``."""
    H = check_hermitian(H)
    W = np.asarray(W, dtype=complex)
    if _unitarity_error(W) > UNITARY_TOL:
        raise ValidationError("disturbance operator is not unitary")
    return W @ H @ W.conj().T


def perturbative_consistency(H, w, epsilon):
    """Norm of ``W H W^-1 - H - eps [i w, H]`` with ``W = exp(i eps w)``.

    The remainder is second order in ``eps``.
    """
    H = check_hermitian(H)
    w = check_hermitian(w)
    W = expm(1j * epsilon * w)
    Hp = W @ H @ W.conj().T
    first = 1j * (w @ H - H @ w)
    return float(np.linalg.norm(Hp - H - epsilon * first, 2))


@dataclass(frozen=True)
class GeneratorSplit:
    """Per-step anti-Hermitian generators, each ``(..., n_steps, n_a, n_a)``."""

    A_P: np.ndarray
    A_Qx: np.ndarray
    A_Ty: np.ndarray

    @property
    def A_plus(self):
        return self.A_P + self.A_Qx + self.A_Ty

    def total(self, include_ATy=True):
        return self.A_plus if include_ATy else self.A_P + self.A_Qx


def generator_split(frames, W, xs, ys):
    """Split the combined-path connection into control, noise and cross parts.

    Parameters
    ----------
    frames : (n, dim, n_a) array
        Gauge-aligned eigenframes of ``H(x)`` along the control samples.
    W : DisturbanceOperator
    xs : (n, n_x) array
    ys : (..., n, n_y) array

    Notes
    -----
    ``A_P`` uses the frame overlap (midpoint rule); ``A_Qx`` and ``A_Ty``
    average ``Z^dagger W^-1 dW Z`` at both ends of each step (trapezoid),
    with ``dW`` taken along ``y`` at fixed ``x`` and along ``x`` at fixed
    ``y`` respectively.
    """
    Z = np.asarray(frames, dtype=complex)
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim == 1:
        xs = xs[:, None]
    if ys.ndim == 1:
        ys = ys[:, None]
    if len(Z) != xs.shape[0] or ys.shape[-2] != xs.shape[0]:
        raise ValidationError("frames, control and noise samples must share the time grid")

    Zd = _dagger(Z)
    A_P = anti_hermitian_part(Zd[:-1] @ Z[1:])
    batch = ys.shape[:-2]
    A_P = np.broadcast_to(A_P, batch + A_P.shape)

    Wv = W(xs, ys)
    Wd = _dagger(Wv)

    def part(dW, dcoord):
        # G[..., n, m] = Z^dagger W^-1 dW/dc_m Z
        G = Zd[:, None] @ (Wd[..., None, :, :] @ dW) @ Z[:, None]
        G = 0.5 * (G[..., 1:, :, :, :] + G[..., :-1, :, :, :])
        return anti_hermitian_part(np.einsum("...nm,...nmij->...nij", dcoord, G))

    A_Qx = part(W.d_dy(xs, ys), np.diff(ys, axis=-2))
    dx = np.broadcast_to(np.diff(xs, axis=0), batch + (len(xs) - 1, xs.shape[1]))
    A_Ty = part(W.d_dx(xs, ys), dx)
    return GeneratorSplit(A_P, A_Qx, A_Ty)


def disturbed_frames(hamiltonian, W, frames, xs, ys, degeneracy_tol=1e-9):
    """Eigenframes of ``H+(x, y)`` computed by diagonalizing ``H+`` directly.

    At each sample the eigenspace closest in energy to the undisturbed
    frame is chosen and rotated within itself to match ``W Z`` (pure gauge
    choice, the span comes from ``H+``).
    """
    Z = np.asarray(frames, dtype=complex)
    xs = np.asarray(xs, dtype=float).reshape(len(Z), -1)
    ys = np.asarray(ys, dtype=float).reshape(len(Z), -1)
    H = hamiltonian(xs)
    Wv = W(xs, ys)
    out = np.empty_like(Z)
    for k in range(len(Z)):
        ref = Wv[k] @ Z[k]
        Hp = Wv[k] @ H[k] @ Wv[k].conj().T
        lam = np.real(np.trace(Z[k].conj().T @ H[k] @ Z[k])) / Z.shape[2]
        cand = min(eigendecompose(Hp, degeneracy_tol), key=lambda f: abs(f.value - lam))
        out[k] = align_frame(ref, cand.frame, k)
    return out


def split_identity_check(split, plus_frames, dt=1.0):
    """Largest per-step deviation between ``A_P + A_Qx + A_Ty`` and the
    connection of the directly computed disturbed frames, divided by the
    step length ``dt`` (i.e. measured as a generator rate)."""
    Zp = np.asarray(plus_frames, dtype=complex)
    direct = anti_hermitian_part(_dagger(Zp[:-1]) @ Zp[1:])
    return float(np.max(np.linalg.norm(split.A_plus - direct, ord=2, axis=(-2, -1))) / dt)


@dataclass(frozen=True)
class AdiabaticState:
    time: float
    dynamical_phase: float
    transporter: np.ndarray
    psi: np.ndarray


@dataclass(frozen=True)
class AdiabaticTrajectory:
    """Adiabatic solution sampled on the path grid.

    ``psi`` is ``(..., n, dim)``; ``transporter`` is ``(..., n, n_a, n_a)``.
    """

    times: np.ndarray
    dynamical_phase: np.ndarray
    transporter: np.ndarray
    psi: np.ndarray
    branch_column: int
    metadata: dict = field(default_factory=dict)

    def state(self, k):
        return AdiabaticState(float(self.times[k]), float(self.dynamical_phase[k]),
                              self.transporter[..., k, :, :], self.psi[..., k, :])

    @property
    def geometric_phase(self):
        """Unwrapped angle of the diagonal transporter entry for the initial column."""
        return np.unwrap(np.angle(self.transporter[..., self.branch_column, self.branch_column]), axis=-1)


def adiabatic_evolve(split, eigenvalues, W_samples, frames, times, column=0, include_ATy=True):
    """Adiabatic wave function along a disturbed path.

    ``psi(t_k) = exp(-i int lambda) * W_k Z_k U_k[:, column]`` with
    ``U_k`` the ordered exponential of the (possibly truncated) split
    generator.

    Parameters
    ----------
    split : GeneratorSplit
    eigenvalues : (n,) array
        Tracked eigenvalue along the control path.
    W_samples : (..., n, dim, dim) array
    frames : (n, dim, n_a) array
    times : (n,) array
    column : int
        Which frame vector the state starts in.
    include_ATy : bool
        Keep the cross term of the split.
    """
    Z = np.asarray(frames, dtype=complex)
    times = np.asarray(times, dtype=float)
    lam = np.asarray(eigenvalues, dtype=float)
    if not 0 <= column < Z.shape[2]:
        raise ValidationError("column outside the tracked eigenspace")
    phi = cumulative_trapezoid(lam, times, initial=0.0)
    U = cumulative_products(split.total(include_ATy))
    basis = np.asarray(W_samples, dtype=complex) @ Z
    psi = np.exp(-1j * phi)[:, None] * np.einsum("...nij,...nj->...ni", basis, U[..., :, column])
    return AdiabaticTrajectory(times, phi, U, psi, column, {"include_ATy": bool(include_ATy)})


def dressed_amplitude(traj, W_samples, frames):
    """``<a, x(t)| W^-1 psi(t)>`` for the starting frame column, ``(..., n)``."""
    Z = np.asarray(frames, dtype=complex)
    v = np.einsum("nd,...nde,...ne->...n", Z[:, :, traj.branch_column].conj(),
                  _dagger(np.asarray(W_samples, dtype=complex)), traj.psi)
    return v

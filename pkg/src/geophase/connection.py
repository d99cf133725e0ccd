"""Gauge potentials along paths, path-ordered exponentials and curvature.

Ordering convention: later steps multiply on the left,
``U = exp(-A_N) ... exp(-A_1)``, so ``U`` maps the frame coefficients at the
start of a path to those at its end (``psi = Z(t) U c0``).
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, logm

from .errors import ConfigError, ValidationError
from .spectral import EigenFrame, align_frame, polar_unitary

ORDERING = "later-left"


def anti_hermitian_part(A):
    return 0.5 * (A - np.swapaxes(A.conj(), -1, -2))


def _as_frame_array(frames):
    if isinstance(frames, np.ndarray):
        return frames.astype(complex, copy=False)
    return np.stack([f.frame if isinstance(f, EigenFrame) else np.asarray(f) for f in frames]).astype(complex)


@dataclass(frozen=True)
class GaugePath:
    """Per-step gauge-potential increments ``A . dx`` along a sampled path.

    ``steps`` has shape ``(n_steps, n_a, n_a)``.  ``closure``, when present,
    is the unitary connecting the last frame back to the first one on a
    closed loop (expressed in the last sample's chart).
    """

    steps: np.ndarray
    points: np.ndarray = None
    charts: tuple = None
    closure: np.ndarray = None
    convention: str = "midpoint"

    @property
    def n_a(self):
        return self.steps.shape[-1]

    @property
    def closed(self):
        return self.closure is not None

    def __post_init__(self):
        dev = np.max(np.abs(self.steps + np.swapaxes(self.steps.conj(), -1, -2)), initial=0.0)
        if dev > 1e-10:
            raise ValidationError(f"gauge steps are not anti-Hermitian (deviation {dev:.2e})")

    @classmethod
    def from_field(cls, field, points):
        """Sample a gauge field at step midpoints.

        ``field(x)`` returns the components ``(d, n_a, n_a)`` at a point of a
        ``d``-dimensional parameter space.
        """
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        mids = 0.5 * (points[1:] + points[:-1])
        dx = np.diff(points, axis=0)
        steps = np.stack([np.einsum("m,mij->ij", d, np.asarray(field(m), dtype=complex))
                          for m, d in zip(mids, dx)])
        return cls(anti_hermitian_part(steps), points)


@dataclass(frozen=True)
class Holonomy:
    matrix: np.ndarray
    ordering: str = ORDERING

    @property
    def phases(self):
        """Eigenphases in (-pi, pi]."""
        return np.sort(np.angle(np.linalg.eigvals(self.matrix)))

    @property
    def phase(self):
        if self.matrix.shape != (1, 1):
            raise ValidationError("scalar phase only defined for n_a = 1")
        return float(np.angle(self.matrix[0, 0]))

    def unitarity_error(self):
        n = self.matrix.shape[0]
        return float(np.max(np.abs(self.matrix.conj().T @ self.matrix - np.eye(n))))


def link_transporter(Za, Zb):
    """Unitary carrying frame coefficients from ``Za`` to a nearby ``Zb``."""
    return polar_unitary(Zb.conj().T @ Za)


def gauge_potential_from_frames(frames, points=None, charts=None, bundle=None, closed=False):
    """Discrete gauge potential ``Z^dagger dZ`` from a sequence of frames.

    Each step is the anti-Hermitian part of ``Z_k^dagger Z_{k+1}``, which
    equals the connection at the step midpoint times the step, up to third
    order.  When consecutive samples sit in different charts the later frame
    is first rewritten in the earlier chart through ``bundle``.

    Parameters
    ----------
    frames : list of EigenFrame or (n, dim, n_a) array
    points : (n, d) array, optional
        Base points, needed to evaluate non-constant transition functions.
    charts : sequence of chart names, optional
    bundle : BundleAtlas, optional
    closed : bool
        Record the closure unitary from the last frame back to the first.
    """
    Z = _as_frame_array(frames)
    if Z.ndim != 3:
        raise ValidationError("frames must stack to (n, dim, n_a)")
    n = len(Z)
    if points is not None:
        points = np.asarray(points, dtype=float).reshape(n, -1)
    if charts is not None and len(charts) != n:
        raise ValidationError("one chart id per frame required")

    def point(k):
        return None if points is None else points[k]

    def to_chart(Zk, src, dst, k):
        if charts is None or src == dst:
            return Zk
        if bundle is None or not bundle.has_transition(src, dst):
            raise ConfigError(f"missing transition function for crossing {src}->{dst}")
        # Z_dst = Z_src g[src, dst]
        return Zk @ np.asarray(bundle.transition(src, dst)(point(k)), dtype=complex)

    S = np.empty((n - 1, Z.shape[2], Z.shape[2]), dtype=complex)
    for k in range(n - 1):
        Znext = Z[k + 1]
        if charts is not None and charts[k] != charts[k + 1]:
            Znext = to_chart(Znext, charts[k + 1], charts[k], k + 1)
        S[k] = Z[k].conj().T @ Znext
    steps = anti_hermitian_part(S)

    closure = None
    if closed:
        Z0 = Z[0]
        if charts is not None:
            Z0 = to_chart(Z0, charts[0], charts[-1], n - 1)
        closure = link_transporter(Z[-1], Z0)
    return GaugePath(steps, points, None if charts is None else tuple(charts), closure)


def step_exponentials(steps):
    """``exp(-A_k)`` for a stack of step matrices (any leading batch shape)."""
    steps = np.asarray(steps)
    if steps.shape[-1] == 1:
        return np.exp(-steps)
    return expm(-steps)


def cumulative_products(steps):
    """Running ordered products ``U_k = exp(-A_{k-1}) ... exp(-A_0)``.

    ``steps`` has shape ``(..., n_steps, n_a, n_a)``; the result has
    ``n_steps + 1`` entries along that axis, starting with the identity.
    """
    steps = np.asarray(steps, dtype=complex)
    n_a = steps.shape[-1]
    batch = steps.shape[:-3]
    n_steps = steps.shape[-3]
    out = np.empty(batch + (n_steps + 1, n_a, n_a), dtype=complex)
    out[..., 0, :, :] = np.eye(n_a)
    if n_a == 1:
        out[..., 1:, 0, 0] = np.exp(-np.cumsum(steps[..., 0, 0], axis=-1))
        return out
    E = step_exponentials(steps)
    for k in range(n_steps):
        out[..., k + 1, :, :] = E[..., k, :, :] @ out[..., k, :, :]
    return out


def path_ordered_exp(gauge):
    """Ordered product of ``exp(-A_k)``, with the closure applied last for
    closed loops.  For ``n_a = 1`` this is ``exp(-sum A_k)``."""
    steps = gauge.steps
    if gauge.n_a == 1:
        U = np.exp(-np.sum(steps[:, 0, 0], initial=0.0)).reshape(1, 1)
    else:
        U = np.eye(gauge.n_a, dtype=complex)
        for E in step_exponentials(steps):
            U = E @ U
    if gauge.closure is not None:
        U = gauge.closure @ U
    return Holonomy(U)


def holonomy_with_crossings(gauge, bundle):
    """Path-ordered exponential that switches chart conventions at crossings.

    At a crossing ``a -> b`` the running product is multiplied on the left by
    ``g[b, a]`` at the first sample of the new chart.  A closed loop that
    ends in another chart than it started gets a final crossing back.
    """
    if gauge.charts is None:
        return path_ordered_exp(gauge)
    charts = gauge.charts
    n_a = gauge.n_a

    def g(dst, src, k):
        if not bundle.has_transition(dst, src):
            raise ConfigError(f"missing transition function for crossing {src}->{dst}")
        x = None if gauge.points is None else gauge.points[min(k, len(charts) - 1)]
        return np.asarray(bundle.transition(dst, src)(x), dtype=complex).reshape(n_a, n_a)

    E = step_exponentials(gauge.steps)
    U = np.eye(n_a, dtype=complex)
    for k in range(len(E)):
        U = E[k] @ U
        if charts[k + 1] != charts[k]:
            U = g(charts[k + 1], charts[k], k + 1) @ U
    if gauge.closure is not None:
        U = gauge.closure @ U
        if charts[-1] != charts[0]:
            U = g(charts[0], charts[-1], len(charts)) @ U
    return Holonomy(U)


def loop_holonomy(frames):
    """Holonomy of a closed loop from its frames via exact link transporters.

    The last frame connects back to the first.  Any gauge is accepted; the
    result is covariant under a change of the starting frame.
    """
    Z = _as_frame_array(frames)
    U = np.eye(Z.shape[2], dtype=complex)
    for k in range(len(Z)):
        U = link_transporter(Z[k], Z[(k + 1) % len(Z)]) @ U
    return Holonomy(U)


def plaquette_curvature(frame_field, cell, spacing):
    """Curvature 2-form component on one grid cell.

    Walks the cell boundary ``(i,j) -> (i+1,j) -> (i+1,j+1) -> (i,j+1)`` and
    returns ``-log(U) / area``, so that it approximates ``dA + A ^ A`` with
    the same sign convention as the holonomy ``U = P exp(-oint A)``.

    Parameters
    ----------
    frame_field : (n1, n2, dim, n_a) array
        Eigenframes on a regular grid, any gauge.
    cell : (i, j)
    spacing : (h1, h2)
    """
    Z = np.asarray(frame_field)
    i, j = cell
    loop = [Z[i, j], Z[i + 1, j], Z[i + 1, j + 1], Z[i, j + 1]]
    U = loop_holonomy(loop).matrix
    F = -logm(U) / (spacing[0] * spacing[1])
    return anti_hermitian_part(np.atleast_2d(F))


def gauge_fix_grid(frame_field):
    """Parallel-transport gauge on a grid: along the first axis at ``j = 0``,
    then along the second axis from every point of that line."""
    Z = np.array(frame_field, dtype=complex)
    n1, n2 = Z.shape[:2]
    for i in range(1, n1):
        Z[i, 0] = align_frame(Z[i - 1, 0], Z[i, 0], i)
    for i in range(n1):
        for j in range(1, n2):
            Z[i, j] = align_frame(Z[i, j - 1], Z[i, j], j)
    return Z


def finite_difference_curvature(frame_field, cell, spacing):
    """``d_1 A_2 - d_2 A_1 + [A_1, A_2]`` at the cell centre from edge
    differences of a smooth-gauge frame field."""
    i, j = cell
    Z = gauge_fix_grid(np.asarray(frame_field)[i:i + 2, j:j + 2])
    i = j = 0
    h1, h2 = spacing

    def edge(Za, Zb, h):
        return anti_hermitian_part(Za.conj().T @ Zb) / h

    A1_lo = edge(Z[i, j], Z[i + 1, j], h1)
    A1_hi = edge(Z[i, j + 1], Z[i + 1, j + 1], h1)
    A2_lf = edge(Z[i, j], Z[i, j + 1], h2)
    A2_rt = edge(Z[i + 1, j], Z[i + 1, j + 1], h2)
    A1 = 0.5 * (A1_lo + A1_hi)
    A2 = 0.5 * (A2_lf + A2_rt)
    return (A2_rt - A2_lf) / h1 - (A1_hi - A1_lo) / h2 + A1 @ A2 - A2 @ A1

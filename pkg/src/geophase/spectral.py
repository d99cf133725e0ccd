"""Hermitian eigen-decomposition, projectors and gauge-smooth frame transport.

Frames are stored as ``dim x n`` complex matrices whose columns are
orthonormal eigenvectors of one (possibly degenerate) eigenvalue.
Units: hbar = 1.
"""
from dataclasses import dataclass

import numpy as np

from .errors import GapViolation, StepTooCoarse, ValidationError

HERMITIAN_TOL = 1e-12
DEFAULT_DEGENERACY_TOL = 1e-9
MIN_OVERLAP_SV = 0.1


@dataclass(frozen=True)
class EigenFrame:
    """One eigenvalue with an orthonormal frame spanning its eigenspace."""

    value: float
    frame: np.ndarray
    gap: float = np.inf

    @property
    def multiplicity(self):
        return self.frame.shape[1]

    @property
    def dim(self):
        return self.frame.shape[0]


def check_hermitian(H, tol=HERMITIAN_TOL):
    """Return ``H`` as a complex array, raising if it is not Hermitian."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {H.shape}")
    scale = max(1.0, float(np.max(np.abs(H))))
    if np.max(np.abs(H - H.conj().T)) > tol * scale:
        raise ValidationError("operator is not Hermitian")
    return H


def eigendecompose(H, degeneracy_tol=DEFAULT_DEGENERACY_TOL):
    """Split ``H`` into eigenframes, merging near-degenerate eigenvalues.

    Parameters
    ----------
    H : (dim, dim) array_like
        Hermitian matrix.
    degeneracy_tol : float
        Eigenvalues closer than this (chained in ascending order) form one
        frame.

    Returns
    -------
    list of EigenFrame
        Sorted by ascending eigenvalue, with ``gap`` set to the distance to
        the nearest other eigenvalue.
    """
    if degeneracy_tol <= 0:
        raise ValidationError("degeneracy_tol must be positive")
    H = check_hermitian(H)
    w, v = np.linalg.eigh(0.5 * (H + H.conj().T))
    return _group(w, v, degeneracy_tol)


def _group(w, v, degeneracy_tol):
    groups = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] < degeneracy_tol:
            groups[-1].append(i)
        else:
            groups.append([i])

    values = [float(w[g].mean()) if len(g) > 1 else float(w[g[0]]) for g in groups]
    frames = []
    for j, g in enumerate(groups):
        others = [abs(values[j] - values[m]) for m in range(len(values)) if m != j]
        gap = min(others) if others else np.inf
        frames.append(EigenFrame(values[j], v[:, g], gap))
    return frames


def projector(frame):
    """Orthogonal projector ``Z Z^dagger`` onto the frame's eigenspace."""
    Z = frame.frame if isinstance(frame, EigenFrame) else np.asarray(frame)
    return Z @ Z.conj().T


def polar_unitary(S):
    """Unitary factor of the polar decomposition of a square matrix."""
    U, _, Vh = np.linalg.svd(S)
    return U @ Vh


def align_frame(reference, Z, step=None):
    """Rotate ``Z`` within its span so that ``reference^dagger Z`` is
    Hermitian positive-definite.

    For a single column this just removes the relative phase.  Raises
    :class:`StepTooCoarse` when the overlap is close to singular.
    """
    S = reference.conj().T @ Z
    if S.shape == (1, 1):
        m = abs(S[0, 0])
        if m < MIN_OVERLAP_SV:
            raise StepTooCoarse(step, f"frame overlap {m:.3g}")
        return Z * (S[0, 0].conjugate() / m)
    U, s, Vh = np.linalg.svd(S)
    if s.min() < MIN_OVERLAP_SV:
        raise StepTooCoarse(step, f"frame overlap singular value {s.min():.3g}")
    # S u = U s U^dagger with u = V U^dagger
    return Z @ (Vh.conj().T @ U.conj().T)


def smooth_transport(path, branch=0, degeneracy_tol=DEFAULT_DEGENERACY_TOL, gap_min=1e-6):
    """Follow one eigenvalue branch along a sequence of Hamiltonians.

    The branch is selected by index at the first sample and afterwards by
    continuity of the eigenvalue.  Each new frame is rotated by the unitary
    polar factor of the overlap with its predecessor, which is the discrete
    parallel-transport gauge: ``Z_k^dagger Z_{k+1}`` is Hermitian positive.

    Raises
    ------
    GapViolation
        If the tracked eigenvalue's gap drops below ``gap_min``.
    StepTooCoarse
        If consecutive frames barely overlap.
    """
    if gap_min <= 0:
        raise ValidationError("gap_min must be positive")
    if degeneracy_tol <= 0:
        raise ValidationError("degeneracy_tol must be positive")
    Hs = np.asarray(path, dtype=complex)
    if Hs.ndim != 3 or Hs.shape[1] != Hs.shape[2]:
        raise ValidationError(f"expected a stack of square matrices, got shape {Hs.shape}")
    scale = np.maximum(1.0, np.max(np.abs(Hs), axis=(1, 2)))
    Hd = np.swapaxes(Hs.conj(), 1, 2)
    if np.any(np.max(np.abs(Hs - Hd), axis=(1, 2)) > HERMITIAN_TOL * scale):
        raise ValidationError("operator is not Hermitian")
    ws, vs = np.linalg.eigh(0.5 * (Hs + Hd))
    out = []
    prev = None
    for k in range(len(Hs)):
        frames = _group(ws[k], vs[k], degeneracy_tol)
        if prev is None:
            if not 0 <= branch < len(frames):
                raise ValidationError(f"branch {branch} out of range ({len(frames)} eigenvalues)")
            cur = frames[branch]
        else:
            cur = min(frames, key=lambda f: abs(f.value - prev.value))
            if cur.multiplicity != prev.multiplicity:
                raise GapViolation(k, 0.0, gap_min)
        if cur.gap < gap_min:
            raise GapViolation(k, cur.gap, gap_min)
        if prev is not None:
            cur = EigenFrame(cur.value, align_frame(prev.frame, cur.frame, k), cur.gap)
        out.append(cur)
        prev = cur
    return out


def frames_array(frames):
    """Stack a list of EigenFrame into ``(n_samples, dim, n_a)``."""
    return np.stack([f.frame for f in frames])

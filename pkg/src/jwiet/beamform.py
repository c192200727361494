"""Rank-one beamformers and geodesic curves on the complex unit sphere.

Beam vectors are plain complex ndarrays of unit norm.  A :class:`GeodesicCurve`
connects two of them; its points ``v(theta)`` for ``0 <= theta <= phi`` trace
the shortest path between the directions, with ``v(phi)`` equal to the end
vector.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._search import grid_argmax
from .channel import as_channel
from .errors import DegenerateCurveError, DomainError, NumericInputError

__all__ = [
    "GeodesicCurve",
    "curve_gain",
    "eta",
    "eta_argmax",
    "geodesic",
    "geodesic_point",
    "info_endpoints",
    "meb",
    "mlb",
    "normalize",
    "sler",
    "sler_value",
]

COLLINEAR_TOL = 1e-9
_ANGLE_SLACK = 1e-12


def normalize(v):
    """Return ``v / ||v||`` with the first nonzero entry made real nonnegative."""
    v = np.asarray(v, dtype=complex)
    n = np.linalg.norm(v)
    if not np.isfinite(n) or n == 0:
        raise NumericInputError("cannot normalize a zero or non-finite vector")
    v = v / n
    idx = np.flatnonzero(np.abs(v) > 1e-12)
    if idx.size:
        v = v * (np.conj(v[idx[0]]) / abs(v[idx[0]]))
    return v


def meb(h11):
    """Maximum-energy beam: the dominant right singular vector of ``h11``."""
    return as_channel(h11).svd[2][:, 0].copy()


def mlb(h21):
    """Minimum-leakage beam: the weakest right singular vector of ``h21``."""
    return as_channel(h21).svd[2][:, -1].copy()


def info_endpoints(h22, h12):
    """Return ``(w_I, w_L)``: eigen-beam of ``h22`` and top direction of ``h12``."""
    return as_channel(h22).svd[2][:, 0].copy(), as_channel(h12).svd[2][:, 0].copy()


def _sler_pencil(h11, h21, ebar, power):
    h11, h21 = as_channel(h11), as_channel(h21)
    shift = max(ebar / power - h11.sigma[0] ** 2, 0.0)
    den = h21.gram + shift * np.eye(h21.m)
    lo = np.linalg.eigvalsh(den)[0]
    scale = h21.sigma[0] ** 2 if h21.sigma[0] > 0 else max(h11.sigma[0] ** 2, 1.0)
    eps = 1e-12 * scale
    if lo <= eps:
        den = den + eps * np.eye(h21.m)
    return h11.gram, den


def sler(h11, h21, ebar, power):
    """Beam maximizing the signal-to-leakage-and-harvested-energy ratio.

    Dominant generalized eigenvector of ``(H11^H H11, H21^H H21 + s I)`` with
    ``s = max(ebar / power - ||H11||^2, 0)``.  A rank-deficient ``H21`` with
    ``s = 0`` is regularized by ``1e-12 ||H21||^2 I``.
    """
    num, den = _sler_pencil(h11, h21, ebar, power)
    _, vecs = scipy.linalg.eigh(num, den)
    return normalize(vecs[:, -1])


def sler_value(v, h11, h21, ebar, power):
    num, den = _sler_pencil(h11, h21, ebar, power)
    v = np.asarray(v)
    return float(np.real(v.conj() @ num @ v) / np.real(v.conj() @ den @ v))


@dataclass(frozen=True, eq=False)
class GeodesicCurve:
    """Great-circle path from ``start`` to ``end``.

    ``start^H end = phase * cos(principal_angle)`` and
    ``ortho = (start * phase * cos(phi) - end) / sin(phi)`` is the unit vector
    orthogonal to ``start`` that completes the plane of the curve.
    """

    start: np.ndarray
    end: np.ndarray
    phase: complex
    principal_angle: float
    ortho: np.ndarray

    @property
    def phi(self):
        return self.principal_angle

    @property
    def end_ortho(self):
        """Orthogonal completion seen from ``end`` (curve traversed backwards)."""
        c, s = np.cos(self.phi), np.sin(self.phi)
        return (self.end * np.conj(self.phase) * c - self.start) / s

    def points(self, theta):
        """Stack of curve points, shape ``(len(theta), M)``; no domain check."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        a = self.start * self.phase
        return np.cos(theta)[:, None] * a[None, :] - np.sin(theta)[:, None] * self.ortho[None, :]

    def point(self, theta):
        return geodesic_point(self, theta)


def geodesic(v1, v2):
    """Geodesic between two unit vectors.

    A zero inner product gets unit phase.  Raises
    :class:`DegenerateCurveError` when ``|v1^H v2| >= 1 - 1e-9``.
    """
    v1 = np.asarray(v1, dtype=complex)
    v2 = np.asarray(v2, dtype=complex)
    for v in (v1, v2):
        if abs(np.linalg.norm(v) - 1.0) > 1e-8:
            raise NumericInputError("geodesic endpoints must be unit norm")
    inner = np.vdot(v1, v2)
    mag = abs(inner)
    if mag >= 1.0 - COLLINEAR_TOL:
        raise DegenerateCurveError(f"endpoints are collinear (|v1^H v2| = {mag:.12f})")
    phase = inner / mag if mag > 1e-15 else 1.0 + 0j
    phi = float(np.arccos(mag))
    ortho = (v1 * phase * np.cos(phi) - v2) / np.sin(phi)
    return GeodesicCurve(v1, v2, complex(phase), phi, ortho)


def geodesic_point(curve, theta):
    """``v(theta) = start * phase * cos(theta) - ortho * sin(theta)``."""
    if not -_ANGLE_SLACK <= theta <= curve.phi + _ANGLE_SLACK:
        raise DomainError(f"theta={theta} outside [0, {curve.phi}]")
    return curve.points(theta)[0]


def curve_gain(curve, h):
    """Exact ``theta -> ||H v(theta)||^2`` along a curve, vectorized in theta.

    Uses ``a cos^2 + b sin^2 - 2 c cos sin`` with three inner products, so it
    holds for any endpoints (the cross term vanishes when ``start`` is a right
    singular vector of ``H``).
    """
    hm = as_channel(h).entries
    hs = hm @ (curve.start * curve.phase)
    ho = hm @ curve.ortho
    a = float(np.real(np.vdot(hs, hs)))
    b = float(np.real(np.vdot(ho, ho)))
    c = float(np.real(np.vdot(hs, ho)))

    def gain(theta):
        ct, st = np.cos(theta), np.sin(theta)
        return np.maximum(a * ct * ct + b * st * st - 2.0 * c * ct * st, 0.0)

    return gain


def _eta_scalars(curve, h11, h21):
    h11, h21 = as_channel(h11), as_channel(h21)
    return (
        float(h11.gain(curve.start)),
        float(h11.gain(curve.ortho)),
        float(h21.gain(curve.end)),
        float(h21.gain(curve.end_ortho)),
    )


def eta(theta1, curve, h11, h21, form="direct"):
    """Harvested-energy to leakage ratio ``||H11 v||^2 / ||H21 v||^2`` on a curve.

    ``form="direct"`` evaluates the beam explicitly; ``form="scalar"`` uses
    the four reported scalars (exact when the curve runs from the maximum
    energy beam of ``h11`` to the minimum leakage beam of ``h21``).  Perfect
    null steering gives ``inf``.
    """
    if form == "direct":
        v = geodesic_point(curve, theta1)
        num = float(as_channel(h11).gain(v))
        den = float(as_channel(h21).gain(v))
    elif form == "scalar":
        if not -_ANGLE_SLACK <= theta1 <= curve.phi + _ANGLE_SLACK:
            raise DomainError(f"theta={theta1} outside [0, {curve.phi}]")
        s11, o11, s21, o21 = _eta_scalars(curve, h11, h21)
        d = curve.phi - theta1
        num = np.cos(theta1) ** 2 * s11 + np.sin(theta1) ** 2 * o11
        den = np.cos(d) ** 2 * s21 + np.sin(d) ** 2 * o21
    else:
        raise ValueError(f"unknown form {form!r}")
    if den <= 0.0:
        return np.inf
    return num / den


def eta_argmax(curve, h11, h21, upper=None):
    """Angle in ``[0, upper]`` (default the full curve) maximizing ``eta``."""
    upper = curve.phi if upper is None else min(max(upper, 0.0), curve.phi)
    g11 = curve_gain(curve, h11)
    g21 = curve_gain(curve, h21)

    def f(theta):
        den = g21(theta)
        num = g11(theta)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)

    theta, _ = grid_argmax(f, 0.0, upper)
    return theta

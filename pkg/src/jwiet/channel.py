"""Channel realizations for the two-user MIMO interference channel.

Channels are stored in a noise-normalized form: direct links have unit-variance
entries and cross links have variance ``alpha``.  The physical transmit power,
noise power and direct-link path loss are folded into a single effective power
``NetworkRealization.p`` (the per-transmitter SNR), which is the ``P`` every
solver in this package works with.  Harvested energies returned by the solvers
are therefore in units of the noise power.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidDimensionError, NumericInputError

__all__ = [
    "ChannelMatrix",
    "NetworkRealization",
    "as_channel",
    "complex_gaussian",
    "decompose",
    "make_rng",
    "sample_network",
]


def make_rng(seed):
    """Return a ``numpy.random.Generator`` for ``seed``.

    ``seed`` may be an int, a sequence of ints (e.g. ``(master_seed, trial)``
    for per-trial substreams) or an existing generator, which is returned as is.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, (tuple, list)):
        return np.random.default_rng(np.random.SeedSequence([int(s) for s in seed]))
    return np.random.default_rng(seed)


def complex_gaussian(rng, shape, variance=1.0):
    """Circularly-symmetric complex Gaussian samples with the given variance."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _fix_phase(u, v):
    # first non-negligible entry of each right singular vector made real >= 0
    tol = 1e-12 * max(np.abs(v).max(), 1e-300)
    for k in range(v.shape[1]):
        col = v[:, k]
        idx = np.flatnonzero(np.abs(col) > tol)
        if idx.size == 0:
            continue
        ph = col[idx[0]] / abs(col[idx[0]])
        v[:, k] = col * np.conj(ph)
        u[:, k] = u[:, k] * np.conj(ph)
    return u, v


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    """Square complex channel matrix with a lazily computed SVD.

    ``entries = U @ diag(sigma) @ V^H`` with ``sigma`` nonincreasing and each
    column of ``V`` phase-normalized so that its first nonzero entry is real
    and nonnegative.
    """

    entries: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.entries, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise InvalidDimensionError(f"channel must be square, got shape {h.shape}")
        if not np.all(np.isfinite(h)):
            raise NumericInputError("channel has non-finite entries")
        h.setflags(write=False)
        object.__setattr__(self, "entries", h)

    @property
    def m(self):
        return self.entries.shape[0]

    @cached_property
    def svd(self):
        u, s, vh = np.linalg.svd(self.entries)
        u, v = _fix_phase(u.copy(), vh.conj().T.copy())
        for a in (u, s, v):
            a.setflags(write=False)
        return u, s, v

    @property
    def sigma(self):
        return self.svd[1]

    @cached_property
    def gram(self):
        """``H^H H``."""
        g = self.entries.conj().T @ self.entries
        g.setflags(write=False)
        return g

    def gain(self, v):
        """``||H v||^2`` for a vector, or row-wise for a stack of vectors."""
        hv = np.asarray(v) @ self.entries.T
        return np.sum(np.abs(hv) ** 2, axis=-1)

    def __matmul__(self, other):
        return self.entries @ other


def as_channel(h):
    return h if isinstance(h, ChannelMatrix) else ChannelMatrix(h)


def decompose(h):
    """Return ``(U, sigma, V)`` of a channel (cached on the object)."""
    return as_channel(h).svd


@dataclass(frozen=True, eq=False)
class NetworkRealization:
    """One draw of the four channel matrices plus the link budget.

    ``h12`` is the link from the information transmitter to the energy
    receiver and ``h21`` the link from the energy transmitter to the
    information receiver (``h_ij``: transmitter ``j`` to receiver ``i``).
    """

    h11: ChannelMatrix
    h12: ChannelMatrix
    h21: ChannelMatrix
    h22: ChannelMatrix
    alpha12: float
    alpha21: float
    power: float = 0.05
    noise: float = 1e-6
    direct_pathloss: float = 1e-3

    def __post_init__(self):
        ms = {h.m for h in (self.h11, self.h12, self.h21, self.h22)}
        if len(ms) != 1:
            raise InvalidDimensionError(f"channel sizes differ: {sorted(ms)}")
        for name in ("alpha12", "alpha21"):
            a = getattr(self, name)
            if not 0.0 <= a <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {a}")
        if self.power <= 0 or self.noise <= 0:
            raise ValueError("power and noise must be positive")

    @property
    def m(self):
        return self.h11.m

    @property
    def p(self):
        """Effective per-transmitter power (SNR) used by all solvers."""
        return self.power * self.direct_pathloss / self.noise

    def to_watts(self, energy):
        """Convert a normalized harvested energy back to watts."""
        return energy * self.noise

    def with_power(self, power):
        return NetworkRealization(
            self.h11, self.h12, self.h21, self.h22, self.alpha12, self.alpha21,
            power, self.noise, self.direct_pathloss,
        )

    @classmethod
    def from_arrays(cls, h11, h12, h21, h22, p=1.0, alpha12=1.0, alpha21=1.0):
        """Build a realization whose effective power is exactly ``p``."""
        return cls(
            ChannelMatrix(h11), ChannelMatrix(h12), ChannelMatrix(h21), ChannelMatrix(h22),
            alpha12, alpha21, power=p, noise=1.0, direct_pathloss=1.0,
        )


def sample_network(seed, m, alpha, power=0.05, noise=1e-6, direct_pathloss=1e-3):
    """Draw i.i.d. Rayleigh channels for the two-user interference channel.

    Direct links get unit-variance entries, cross links variance ``alpha``;
    the direct-link path loss enters only through ``NetworkRealization.p``.
    The draw order is fixed (h11, h12, h21, h22) so a seed fully determines
    the realization, and realizations that differ only in ``alpha`` share the
    same underlying Gaussian samples.
    """
    if int(m) != m or m < 2:
        raise InvalidDimensionError(f"need at least 2 antennas, got m={m}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    m = int(m)
    rng = make_rng(seed)
    base = [complex_gaussian(rng, (m, m)) for _ in range(4)]
    scale = [1.0, np.sqrt(alpha), np.sqrt(alpha), 1.0]
    h11, h12, h21, h22 = (ChannelMatrix(s * b) for s, b in zip(scale, base))
    return NetworkRealization(h11, h12, h21, h22, alpha, alpha, power, noise, direct_pathloss)

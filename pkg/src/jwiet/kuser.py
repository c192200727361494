"""K-user extension: partial-feedback direction estimates and distributed tilting.

Receivers ``0 .. k1-1`` harvest energy and receivers ``k1 .. k-1`` decode;
transmitter ``i`` serves receiver ``i``.  ``channels[i][j]`` is the link from
transmitter ``j`` to receiver ``i``.  Energy transmitters steer a rank-one
beam along the geodesic between an energy-maximum direction (EMD) and an
interference-minimum direction (IMD) estimated from the receivers' reports.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import beamform as bf
from .channel import ChannelMatrix, complex_gaussian, make_rng
from .errors import DegenerateCurveError, DomainError, InfeasibleError, InvalidDimensionError

__all__ = [
    "KNetwork",
    "PartialFeedback",
    "TiltResult",
    "collect_feedback",
    "distributed_tilt",
    "emd_full",
    "emd_select",
    "emd_svd",
    "imd_estimate",
    "imd_full",
    "max_energy",
    "sample_knetwork",
]

TILT_STEPS = 64
GAMMA = 0.95
TAU_GRID = np.linspace(0.0, 1.0, 9)


@dataclass(frozen=True, eq=False)
class KNetwork:
    channels: tuple
    k1: int
    power: float

    def __post_init__(self):
        k = len(self.channels)
        if any(len(row) != k for row in self.channels):
            raise InvalidDimensionError("channel grid must be K x K")
        if not 1 <= self.k1 < k:
            raise DomainError(f"need 1 <= k1 < k, got k1={self.k1}, k={k}")
        ms = {h.m for row in self.channels for h in row}
        if len(ms) != 1:
            raise InvalidDimensionError("all links must share the antenna count")
        if self.power <= 0:
            raise DomainError("power must be positive")

    @property
    def k(self):
        return len(self.channels)

    @property
    def m(self):
        return self.channels[0][0].m

    def h(self, i, j):
        return self.channels[i][j]

    @property
    def eh(self):
        return range(self.k1)

    @property
    def id(self):
        return range(self.k1, self.k)


def sample_knetwork(seed, k, k1, m, alpha, power):
    """i.i.d. Rayleigh K-user network; direct links unit variance, cross links ``alpha``."""
    rng = make_rng(seed)
    grid = tuple(
        tuple(
            ChannelMatrix(complex_gaussian(rng, (m, m), 1.0 if i == j else alpha))
            for j in range(k)
        )
        for i in range(k)
    )
    return KNetwork(grid, k1, power)


@dataclass(frozen=True, eq=False)
class PartialFeedback:
    """Reports keyed by ``(receiver, transmitter)``: ``(unit vector, sigma_1)``.

    Energy receivers report the top right singular vector of every incoming
    link.  Decoding receivers report the top vector of their own link and the
    weakest vector of each cross link, each with the link's top singular value.
    """

    k: int
    k1: int
    reports: dict = field(repr=False)

    def eh_reports(self, j):
        return [self.reports[(i, j)] for i in range(self.k1) if (i, j) in self.reports]

    def id_reports(self, j):
        return [
            self.reports[(i, j)] for i in range(self.k1, self.k) if i != j and (i, j) in self.reports
        ]


def collect_feedback(knet):
    reports = {}
    for i in range(knet.k):
        for j in range(knet.k):
            _, s, v = knet.h(i, j).svd
            col = 0 if (i < knet.k1 or i == j) else -1
            reports[(i, j)] = (v[:, col].copy(), float(s[0]))
    return PartialFeedback(knet.k, knet.k1, reports)


def emd_select(fb, j):
    """Top vector reported by the energy receiver with the largest gain."""
    reps = fb.eh_reports(j)
    if not reps:
        raise DomainError(f"no energy-receiver reports for transmitter {j}")
    best = int(np.argmax([s for _, s in reps]))
    return reps[best][0].copy()


def _top_left(vectors, weights):
    a = np.column_stack(vectors) * np.asarray(weights, dtype=float)
    u, _, _ = np.linalg.svd(a)
    return bf.normalize(u[:, 0])


def emd_svd(fb, j):
    """Dominant left singular vector of ``[v_1 .. v_K1] diag(sigma)``."""
    reps = fb.eh_reports(j)
    if not reps:
        raise DomainError(f"no energy-receiver reports for transmitter {j}")
    if len(reps) == 1:
        return reps[0][0].copy()
    return _top_left([v for v, _ in reps], [s for _, s in reps])


def imd_estimate(fb, j, method="svd"):
    """Interference-minimum direction from the weakest-direction reports.

    ``select`` uses the report of the decoding receiver with the strongest
    link from ``j``; ``svd`` takes the dominant left singular vector of the
    gain-weighted stack of reported weakest directions (one report gives that
    report back).
    """
    reps = fb.id_reports(j)
    if not reps:
        raise DomainError(f"no decoding-receiver reports for transmitter {j}")
    if len(reps) == 1:
        return reps[0][0].copy()
    if method == "select":
        return reps[int(np.argmax([s for _, s in reps]))][0].copy()
    if method == "svd":
        return _top_left([v for v, _ in reps], [s for _, s in reps])
    raise DomainError(f"unknown method {method!r}")


def emd_full(knet, j):
    """Top right singular vector of the stacked links from ``j`` to energy receivers."""
    stack = np.vstack([knet.h(i, j).entries for i in knet.eh])
    _, _, vh = np.linalg.svd(stack)
    return bf.normalize(vh[0].conj())


def imd_full(knet, j):
    """Weakest right singular vector of the stacked links from ``j`` to other decoders."""
    rows = [knet.h(i, j).entries for i in knet.id if i != j]
    if not rows:
        raise DomainError(f"transmitter {j} has no decoding victims")
    _, _, vh = np.linalg.svd(np.vstack(rows))
    return bf.normalize(vh[-1].conj())


def _directions(knet, method):
    if method == "full":
        return ([emd_full(knet, j) for j in range(knet.k)],
                [imd_full(knet, j) if knet.k - knet.k1 > (0 if j < knet.k1 else 1) else None
                 for j in range(knet.k)])
    fb = collect_feedback(knet)
    emd = emd_svd if method == "svd" else emd_select
    emds = [emd(fb, j) for j in range(knet.k)]
    imds = [imd_estimate(fb, j, method) if fb.id_reports(j) else None for j in range(knet.k)]
    return emds, imds


@dataclass(frozen=True, eq=False)
class TiltResult:
    thetas: np.ndarray
    powers: np.ndarray
    rates: np.ndarray
    energy: float
    tau: float
    method: str
    trajectory: tuple = field(default=(), repr=False)

    @property
    def sum_rate(self):
        return float(np.sum(self.rates))


class _State:
    """Beams and powers of all transmitters with fast energy evaluation."""

    def __init__(self, knet, curves, fixed):
        self.knet = knet
        self.curves = curves
        self.fixed = fixed
        m = knet.m
        # per transmitter j: sum over EH receivers of H_ij^H H_ij
        self.g = [
            sum((knet.h(i, j).gram for i in knet.eh), np.zeros((m, m), dtype=complex))
            for j in range(knet.k)
        ]

    def beam(self, j, theta):
        c = self.curves[j]
        if c is None:
            return self.fixed[j]
        return c.points(theta)[0]

    def energy(self, thetas, powers):
        e = 0.0
        for j in range(self.knet.k):
            if powers[j] == 0:
                continue
            b = self.beam(j, thetas[j])
            e += powers[j] * float(np.real(b.conj() @ self.g[j] @ b))
        return e


def _rates(knet, beams, powers):
    rates = []
    for i in knet.id:
        r = np.eye(knet.m, dtype=complex)
        for j in range(knet.k):
            if j == i or powers[j] == 0:
                continue
            hb = knet.h(i, j).entries @ beams[j]
            r += powers[j] * np.outer(hb, hb.conj())
        hs = knet.h(i, i).entries @ beams[i]
        sinr = powers[i] * float(np.real(hs.conj() @ np.linalg.solve(r, hs)))
        rates.append(np.log2(1.0 + sinr))
    return np.array(rates)


def _setup(knet, emds, imds):
    curves, fixed = [], []
    for j in range(knet.k):
        if j < knet.k1:
            start, end = emds[j], imds[j]
        else:
            # decoding transmitters tilt from their own eigen-beam toward the EMD
            start, end = _eigen_beam(knet, j), emds[j]
        try:
            curves.append(None if end is None else bf.geodesic(start, end))
        except DegenerateCurveError:
            curves.append(None)
        fixed.append(start)
    phis = np.array([0.0 if c is None else c.phi for c in curves])
    return _State(knet, curves, fixed), phis


def _start(knet, phis, tau):
    thetas = np.zeros(knet.k)
    thetas[knet.k1:] = tau * phis[knet.k1:]
    return thetas, np.full(knet.k, float(knet.power))


def max_energy(knet, method="full"):
    """Largest energy the tilt procedure can deliver (EAPs on their EMD at full power)."""
    if method not in ("select", "svd", "full"):
        raise DomainError(f"unknown method {method!r}")
    st, phis = _setup(knet, *_directions(knet, method))
    return max(st.energy(*_start(knet, phis, float(t))) for t in TAU_GRID)


def _tilt_once(knet, ebar, emds, imds, tau, method):
    k, k1 = knet.k, knet.k1
    st, phis = _setup(knet, emds, imds)
    thetas, powers = _start(knet, phis, tau)

    e = st.energy(thetas, powers)
    traj = [e]
    if e < ebar * (1.0 - 1e-9):
        raise InfeasibleError(f"target {ebar:.6g} exceeds reachable {e:.6g}", max_energy=e)
    off = powers.copy()
    off[:k1] = 0.0
    if st.energy(thetas, off) >= ebar:
        thetas[:k1] = phis[:k1]
        powers = off
        traj.append(st.energy(thetas, powers))
    else:
        eap = slice(0, k1)
        dtheta = phis[:k1] / TILT_STEPS
        tol = 1e-9 * max(ebar, 1.0)
        for _ in range(20 * TILT_STEPS):
            if e <= ebar + tol:
                break
            th_new = thetas.copy()
            th_new[eap] = np.minimum(thetas[eap] + dtheta, phis[:k1])
            pw_new = powers.copy()
            pw_new[eap] = powers[eap] * GAMMA
            e_new = st.energy(th_new, pw_new)
            if e_new > e:
                th_new = thetas.copy()
                e_new = st.energy(th_new, pw_new)
            if e_new >= ebar:
                thetas, powers, e = th_new, pw_new, e_new
                traj.append(e)
                continue
            # overshoot: bisect the fraction of this step that lands on ebar
            lo, hi = 0.0, 1.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                th_mid = thetas + mid * (th_new - thetas)
                pw_mid = powers.copy()
                pw_mid[eap] = powers[eap] * GAMMA**mid
                if st.energy(th_mid, pw_mid) >= ebar:
                    lo = mid
                else:
                    hi = mid
            thetas = thetas + lo * (th_new - thetas)
            powers = powers.copy()
            powers[eap] = powers[eap] * GAMMA**lo
            e = st.energy(thetas, powers)
            traj.append(e)
            break
    beams = [st.beam(j, thetas[j]) for j in range(k)]
    return TiltResult(thetas, powers, _rates(knet, beams, powers), st.energy(thetas, powers),
                      tau, method, tuple(traj))


def _eigen_beam(knet, j):
    """Top right singular vector of transmitter ``j``'s own link."""
    return knet.h(j, j).svd[2][:, 0].copy()


def distributed_tilt(knet, ebar, method="svd", tau=None):
    """Tilt-and-shrink procedure for the energy transmitters.

    Energy transmitters start on their EMD at full power and, while the
    harvested energy exceeds ``ebar``, tilt toward the IMD by ``phi/64`` and
    cut power by 0.95 per step (power only if a tilt would raise the energy);
    the last step is bisected to land on ``ebar``.  Decoding transmitters use
    a common tilt fraction ``tau`` of their own geodesic, searched on a grid
    for the best sum rate when not given.  ``method`` is ``select``, ``svd``
    or ``full`` (exact stacked-channel directions).
    """
    if method not in ("select", "svd", "full"):
        raise DomainError(f"unknown method {method!r}")
    emds, imds = _directions(knet, method)
    taus = TAU_GRID if tau is None else [tau]
    best, last_err = None, None
    for t in taus:
        try:
            res = _tilt_once(knet, ebar, emds, imds, float(t), method)
        except InfeasibleError as exc:
            last_err = exc
            continue
        if best is None or res.sum_rate > best.sum_rate:
            best = res
    if best is None:
        raise last_err
    return best

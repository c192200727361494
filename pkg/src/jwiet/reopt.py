"""Rate-energy region solvers for the two-user interference channel.

Transmitter 1 (the energy access point) sends a rank-one beam ``v`` with
power ``P1``; transmitter 2 (the information access point) sends covariance
``Q2``.  The information receiver treats the energy signal as Gaussian noise,
so its rate is ``log2 det(I + R^{-1} H22 Q2 H22^H)`` with
``R = I + P1 H21 v v^H H21^H``, and the energy receiver harvests
``P1 ||H11 v||^2 + tr(H12 Q2 H12^H)``.

All powers and energies are in the noise-normalized units of
:class:`~jwiet.channel.NetworkRealization` (see ``net.p``); rates are in bits.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import beamform as bf
from ._search import grid_argmax, last_crossing
from .channel import as_channel
from .errors import DegenerateCurveError, DomainError, InfeasibleError

__all__ = [
    "DualState",
    "REBoundary",
    "REPoint",
    "STRATEGIES",
    "TxCovariance",
    "algorithm1",
    "algorithm2",
    "algorithm3",
    "algorithm4",
    "max_energy",
    "optimal_theta2",
    "phi0_solve",
    "rate_bits",
    "re_boundary",
    "single_stream_rate",
    "solve_p1",
    "solve_p2d",
    "timeshare_baseline",
    "timeshare_point",
    "waterfill",
]

N_MAX = 50
DELTA_FRACTION = 0.5
GAMMA = 0.95
MAX_GAMMA_SHRINKS = 10
POINT_TOL = 1e-6
FEAS_RTOL = 1e-9
TILT_GRID = 6
P1_GRID = 12
P1_REFINE_ITERS = 8
TILT_REFINE_ITERS = 8

STRATEGIES = (
    "MEB", "MLB", "SLER", "GEO_E", "GEO_EI", "GEO_R1", "MEB_R1", "MLB_R1", "TIMESHARE",
)


# ---------------------------------------------------------------- data types


@dataclass(frozen=True, eq=False)
class TxCovariance:
    """Hermitian PSD transmit covariance with its trace budget."""

    q: np.ndarray
    budget: float

    def __post_init__(self):
        q = np.asarray(self.q, dtype=complex)
        q = 0.5 * (q + q.conj().T)
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @property
    def trace(self):
        return float(np.real(np.trace(self.q)))

    def energy(self, h):
        """``tr(H Q H^H)``."""
        hm = as_channel(h).entries
        return float(np.real(np.trace(hm @ self.q @ hm.conj().T)))


@dataclass(frozen=True)
class DualState:
    lam: float = 0.0
    mu: float = 0.0


@dataclass(frozen=True, eq=False)
class REPoint:
    """One operating point of a rate-energy boundary.

    ``target`` is the energy demand the point was solved for.  Infeasible
    demands yield ``feasible=False`` with zero rate and ``energy`` set to the
    largest energy the strategy can deliver.
    """

    rate: float
    energy: float
    p1: float = 0.0
    theta1: float | None = None
    theta2: float | None = None
    target: float | None = None
    feasible: bool = True
    strategy: str | None = None
    beam: np.ndarray | None = field(default=None, repr=False)
    q2: np.ndarray | None = field(default=None, repr=False)
    history: tuple = field(default=(), repr=False)


@dataclass(frozen=True, eq=False)
class REBoundary:
    strategy: str
    targets: np.ndarray
    points: tuple

    @property
    def rates(self):
        return np.array([p.rate for p in self.points])

    @property
    def energies(self):
        return np.array([p.energy for p in self.points])

    @property
    def feasible(self):
        return np.array([p.feasible for p in self.points])


# ------------------------------------------------------------ basic blocks


def _inv_sqrt(r):
    w, u = np.linalg.eigh(r)
    w = np.maximum(w, 1e-12)
    return (u / np.sqrt(w)) @ u.conj().T


def rate_bits(h22, q2, r_minus2=None):
    """``log2 det(I + R^{-1/2} H22 Q2 H22^H R^{-1/2})``."""
    hm = as_channel(h22).entries
    if r_minus2 is not None:
        hm = _inv_sqrt(r_minus2) @ hm
    q2 = q2.q if isinstance(q2, TxCovariance) else np.asarray(q2)
    k = np.eye(hm.shape[0]) + hm @ q2 @ hm.conj().T
    w = np.linalg.eigvalsh(0.5 * (k + k.conj().T))
    return float(np.sum(np.log2(np.maximum(w, 1e-300))))


def single_stream_rate(net, pt):
    """``log2(1 + tr(H22 Q2 H22^H) / (1 + P1 ||H21 v||^2))`` for a solved point.

    This is the rate of a receiver that matches the desired beam but does not
    suppress the energy signal spatially; it is the quantity the
    limited-feedback SINR bounds describe.  Infeasible points give 0.
    """
    if not pt.feasible or pt.q2 is None:
        return 0.0
    s = float(np.real(np.trace(net.h22.entries @ pt.q2 @ net.h22.entries.conj().T)))
    i = pt.p1 * float(net.h21.gain(pt.beam)) if pt.beam is not None and pt.p1 > 0 else 0.0
    return float(np.log2(1.0 + s / (1.0 + i)))


def _interference_cov(h21, v, p1):
    hv = as_channel(h21).entries @ v
    return np.eye(hv.size) + p1 * np.outer(hv, hv.conj())


def _levels(gains, weights, power):
    """Water level ``nu`` with ``sum c_i (nu - 1/g_i)^+ = power``; returns powers."""
    gains = np.asarray(gains, dtype=float)
    weights = np.asarray(weights, dtype=float)
    out = np.zeros_like(gains)
    ok = gains > 1e-300
    if not np.any(ok) or power <= 0:
        return out, 0.0
    a = 1.0 / gains[ok]
    c = weights[ok]
    order = np.argsort(a, kind="stable")
    a_s, c_s = a[order], c[order]
    ca = np.cumsum(c_s * a_s)
    cs = np.cumsum(c_s)
    nu = 0.0
    for k in range(a_s.size):
        nu = (power + ca[k]) / cs[k]
        if k == a_s.size - 1 or nu <= a_s[k + 1]:
            break
    p = np.maximum(nu - a, 0.0)
    out[ok] = p
    return out, nu


def waterfill(h_eff, power):
    """Capacity-achieving covariance for ``log det(I + H Q H^H)``, ``tr Q <= power``."""
    if power <= 0:
        raise DomainError("power must be positive")
    _, s, v = as_channel(h_eff).svd
    p, _ = _levels(s**2, np.ones_like(s), power)
    return TxCovariance((v * p) @ v.conj().T, power)


# --------------------------------------------------------- problem (P1)


class _P1Family:
    """Lagrangian maximizers ``Q(t)`` of the energy-constrained rate problem.

    With ``t = lambda / mu`` the stationarity condition becomes a
    water-filling over ``K = H~ B^{-1/2}``, ``B = I - t H12^H H12``; the water
    level is fixed by the trace budget.
    """

    def __init__(self, h_tilde, h12, power):
        self.ht = h_tilde
        self.h12 = as_channel(h12)
        _, self.s12, self.v12 = self.h12.svd
        self.power = power
        self.top = self.s12[0] ** 2

    def at_r(self, r):
        # t = (1 - r) / sigma_1^2, so B has eigenvalues 1 - (1 - r) s_i^2 / s_1^2 >= r
        ratio = self.s12**2 / self.top if self.top > 0 else np.zeros_like(self.s12)
        d = 1.0 / np.sqrt(1.0 - (1.0 - r) * ratio)
        bh = (self.v12 * d) @ self.v12.conj().T
        _, kap, kvh = np.linalg.svd(self.ht @ bh)
        x = bh @ kvh.conj().T
        c = np.sum(np.abs(x) ** 2, axis=0)
        p, nu = _levels(kap**2, c, self.power)
        q = (x * p) @ x.conj().T
        return q, nu

    def energy(self, q):
        hm = self.h12.entries
        return float(np.real(np.trace(hm @ q @ hm.conj().T)))


def solve_p1(h12, h22, r_minus2, e11, ebar, power):
    """Rate-maximizing ``Q2`` subject to ``tr(H12 Q2 H12^H) >= ebar - e11``.

    Returns ``(TxCovariance, DualState)``.  The duals are for the natural-log
    objective: ``mu`` prices the trace budget and ``lam`` the energy demand.
    Raises :class:`InfeasibleError` if the demand exceeds ``power * sigma_12,1^2``.
    """
    h12 = as_channel(h12)
    ht = _inv_sqrt(r_minus2) @ as_channel(h22).entries
    req = max(ebar - e11, 0.0)
    fam = _P1Family(ht, h12, power)
    emax = power * fam.top

    q0, nu0 = fam.at_r(1.0)
    if fam.energy(q0) >= req:
        return TxCovariance(q0, power), DualState(0.0, 1.0 / nu0 if nu0 > 0 else 0.0)
    if req > emax * (1.0 + FEAS_RTOL):
        raise InfeasibleError(
            f"energy demand {req:.6g} exceeds what transmitter 2 can deliver",
            max_energy=emax + e11,
        )
    w_l = fam.v12[:, 0]
    q_l = power * np.outer(w_l, w_l.conj())
    r_min = 1e-13
    q_lo, _ = fam.at_r(r_min)
    if req >= emax * (1.0 - 1e-12) or fam.energy(q_lo) < req:
        return TxCovariance(q_l, power), DualState(np.inf, 0.0)

    def gap(logr):
        return fam.energy(fam.at_r(np.exp(logr))[0]) - req

    logr = brentq(gap, np.log(r_min), 0.0, xtol=1e-14)
    # nudge toward the feasible side
    step = 1e-13
    while gap(logr) < 0 and logr > np.log(r_min):
        logr = max(logr - step, np.log(r_min))
        step *= 4
    q, nu = fam.at_r(np.exp(logr))
    mu = 1.0 / nu
    t = (1.0 - np.exp(logr)) / fam.top
    return TxCovariance(q, power), DualState(t * mu, mu)


# -------------------------------------------------------------- Algorithm 1


def max_energy(net, beam):
    """``||H11 v||^2 P + P sigma_12,1^2``: largest energy with energy beam ``v``."""
    return net.p * float(net.h11.gain(beam)) + net.p * net.h12.sigma[0] ** 2


def _alg1_eval(net, v, hv21, omega1, p1, ebar):
    r = np.eye(net.m) + p1 * np.outer(hv21, hv21.conj())
    cov, _ = solve_p1(net.h12, net.h22, r, omega1 * p1, ebar, net.p)
    rate = rate_bits(net.h22, cov.q, r)
    energy = omega1 * p1 + cov.energy(net.h12)
    return rate, energy, cov


def _p1_scan(net, v, hv21, omega1, ebar, n_grid=P1_GRID):
    """Global search of the rate over ``P1`` for a fixed energy beam.

    For fixed ``P1`` :func:`solve_p1` is exact, so this is a one-dimensional
    problem; the rate need not be unimodal in ``P1``, hence grid then Brent.
    Returns ``(rate, energy, cov, p1)`` or None when nothing is feasible.
    """
    p = net.p
    emax12 = p * net.h12.sigma[0] ** 2
    lo = 0.0 if omega1 <= 0 else min(max(ebar - emax12, 0.0) / omega1, p)
    cache = {}

    def ev(p1):
        if p1 not in cache:
            try:
                cache[p1] = _alg1_eval(net, v, hv21, omega1, p1, ebar) + (p1,)
            except InfeasibleError:
                cache[p1] = None
        return cache[p1]

    def neg(p1):
        out = ev(float(p1))
        return 1e300 if out is None else -out[0]

    xs = np.linspace(lo, p, n_grid) if p > lo else np.array([lo])
    ys = np.array([neg(float(x)) for x in xs])
    k = int(np.argmin(ys))
    if xs.size > 2 and ys[k] < 1e300:
        minimize_scalar(
            neg, bounds=(xs[max(k - 1, 0)], xs[min(k + 1, xs.size - 1)]), method="bounded",
            options={"xatol": 1e-6 * p, "maxiter": P1_REFINE_ITERS},
        )
    found = [c for c in cache.values() if c is not None]
    return max(found, key=lambda c: c[0]) if found else None


def algorithm1(net, energy_beam, ebar, *, strategy=None, n_max=N_MAX, gamma=GAMMA, scan=True):
    """Boundary point for a fixed energy beam by iterative power reduction.

    Starting from full energy-transmitter power, ``P1`` shrinks by half the
    energy surplus while the demand is over-met, then by a factor ``gamma``
    (halved in log scale on failure) while that still improves the rate.
    With ``scan`` a global search over ``P1`` follows and the better of the
    two points is kept.
    """
    v = np.asarray(energy_beam, dtype=complex)
    p = net.p
    omega1 = float(net.h11.gain(v))
    hv21 = net.h21.entries @ v
    emax = max_energy(net, v)
    if ebar > emax * (1.0 + FEAS_RTOL):
        raise InfeasibleError(f"target {ebar:.6g} exceeds E_max {emax:.6g}", max_energy=emax)

    p1 = p
    rate, energy, cov = _alg1_eval(net, v, hv21, omega1, p1, ebar)
    history = [rate]
    shrinks = 0
    g = gamma
    for _ in range(n_max):
        surplus = energy - ebar
        if surplus > FEAS_RTOL * max(ebar, 1.0) and p1 > 0 and omega1 > 0:
            delta = DELTA_FRACTION * surplus / omega1
            p1_new = max(p1 - delta, 0.0)
            r_new, e_new, c_new = _alg1_eval(net, v, hv21, omega1, p1_new, ebar)
            stalled = abs(r_new - rate) < POINT_TOL and abs(e_new - energy) < POINT_TOL
            p1, rate, energy, cov = p1_new, r_new, e_new, c_new
            history.append(rate)
            if p1 == 0.0:
                break
            if not stalled:
                continue
            # the surplus is shrinking geometrically; switch to power cuts
        # the demand is met with equality: try a geometric power cut
        if p1 <= 0:
            break
        accepted = False
        while shrinks <= MAX_GAMMA_SHRINKS:
            p1_new = g * p1
            try:
                r_new, e_new, c_new = _alg1_eval(net, v, hv21, omega1, p1_new, ebar)
            except InfeasibleError:
                r_new = -np.inf
            if r_new >= rate:
                accepted = True
                break
            g = np.sqrt(g)
            shrinks += 1
        if not accepted:
            break
        done = abs(r_new - rate) < POINT_TOL and abs(e_new - energy) < POINT_TOL
        p1, rate, energy, cov = p1_new, r_new, e_new, c_new
        history.append(rate)
        if done and g > 1.0 - 1e-3:
            break
    if scan:
        # the reduction loop can stall at a local optimum in P1
        found = _p1_scan(net, v, hv21, omega1, ebar)
        if found is not None and found[0] > rate + POINT_TOL:
            rate, energy, cov, p1 = found
            history.append(rate)
    return REPoint(
        rate, energy, p1, target=ebar, strategy=strategy, beam=v, q2=cov.q,
        history=tuple(history),
    )


# ------------------------------------------------------ geodesic energy beam


def phi0_solve(curve, h11, power, target):
    """Largest ``phi0`` with ``P ||H11 v(phi0)||^2 >= target``.

    Returns ``(phi0, attainable)``; ``attainable`` is False when even the start
    of the curve falls short, in which case ``phi0 = 0``.
    """
    gain = bf.curve_gain(curve, h11)
    if target <= 0:
        return curve.phi, True

    def g(theta):
        return power * gain(theta)

    if g(np.array([0.0]))[0] < target * (1.0 - FEAS_RTOL):
        return 0.0, False
    x, ok = last_crossing(g, target, 0.0, curve.phi, n=64, xtol=1e-12)
    if not ok:
        return 0.0, False
    return x, True


def _energy_curve(net):
    try:
        return bf.geodesic(bf.meb(net.h11), bf.mlb(net.h21))
    except DegenerateCurveError:
        return None


def _tilt_search(net, curve, ebar, upper, strategy, n_grid):
    """Best Algorithm-1 point over tilts in ``[0, upper]`` on the energy curve.

    A coarse grid (both ends included) brackets the best tilt, then a bounded
    Brent search refines it; the rate is not unimodal in the tilt.
    """
    cache = {}

    def rate(theta):
        if theta not in cache:
            v = curve.points(theta)[0]
            found = _p1_scan(net, v, net.h21.entries @ v, float(net.h11.gain(v)), ebar)
            cache[theta] = -np.inf if found is None else found[0]
        return cache[theta]

    xs = np.linspace(0.0, upper, n_grid) if upper > 0 else np.zeros(1)
    ys = np.array([rate(float(x)) for x in xs])
    k = int(np.argmax(ys))
    if xs.size > 2 and np.isfinite(ys[k]):
        a, b = xs[max(k - 1, 0)], xs[min(k + 1, xs.size - 1)]
        minimize_scalar(
            lambda t: -rate(float(t)) if np.isfinite(rate(float(t))) else 1e300,
            bounds=(a, b), method="bounded",
            options={"xatol": 1e-4 * max(upper, 1e-12), "maxiter": TILT_REFINE_ITERS},
        )
    theta, r = max(cache.items(), key=lambda kv: kv[1])
    best = None
    # the ends are re-solved in full so the fixed MEB/MLB beams are matched exactly
    for t in {float(theta), 0.0, float(upper)}:
        if not np.isfinite(cache.get(t, r)):
            continue
        try:
            pt = algorithm1(net, curve.points(t)[0], ebar, strategy=strategy)
        except InfeasibleError:
            continue
        if best is None or pt.rate > best.rate:
            best = _replace(pt, theta1=t)
    return best


def algorithm2(net, ebar, *, n_max=20, strategy="GEO_E", search=True, n_grid=TILT_GRID):
    """Geodesic energy beamforming with Algorithm 1 in the loop.

    The tilt ``theta1`` maximizes the energy-to-leakage ratio on ``[0, phi0]``
    where ``phi0`` keeps the energy demand reachable; ``phi0`` is refreshed
    with the energy the information transmitter supplies.

    The ratio is the right figure of merit for a receiver that treats the
    energy signal as white noise, but a linear MMSE receiver partly cancels
    it, so with ``search`` (the default) the rate is also maximized directly
    over the tilt and the better of the two points is returned.
    """
    curve = _energy_curve(net)
    if curve is None:
        pt = algorithm1(net, bf.meb(net.h11), ebar, strategy=strategy)
        return _replace(pt, theta1=0.0)
    p = net.p
    emax = p * net.h11.sigma[0] ** 2 + p * net.h12.sigma[0] ** 2
    if ebar > emax * (1.0 + FEAS_RTOL):
        raise InfeasibleError(f"target {ebar:.6g} exceeds E_max {emax:.6g}", max_energy=emax)
    phi0, _ = phi0_solve(curve, net.h11, p, ebar)
    best = None
    theta_prev = None
    pt_prev = None
    for _ in range(n_max):
        theta1 = bf.eta_argmax(curve, net.h11, net.h21, upper=phi0)
        v = curve.points(theta1)[0]
        pt = algorithm1(net, v, ebar, strategy=strategy)
        pt = _replace(pt, theta1=theta1)
        if best is None or pt.rate > best.rate:
            best = pt
        e12 = pt.energy - pt.p1 * float(net.h11.gain(v))
        phi0, _ = phi0_solve(curve, net.h11, p, ebar - e12)
        if (
            theta_prev is not None
            and abs(theta1 - theta_prev) < 1e-6
            and abs(pt.rate - pt_prev.rate) < POINT_TOL
            and abs(pt.energy - pt_prev.energy) < POINT_TOL
        ):
            break
        theta_prev, pt_prev = theta1, pt
    if search:
        # tilts past this one cannot meet the demand even with full power
        upper, _ = phi0_solve(curve, net.h11, p, ebar - p * net.h12.sigma[0] ** 2)
        found = _tilt_search(net, curve, ebar, upper, strategy, n_grid)
        if found is not None and found.rate > best.rate:
            best = found
    return best


def _replace(pt, **kw):
    d = {k: getattr(pt, k) for k in pt.__dataclass_fields__}
    d.update(kw)
    return REPoint(**d)


# --------------------------------------------------- rank-one information beam


def _top_eig(mat):
    w, u = np.linalg.eigh(mat)
    return bf.normalize(u[:, -1]), w[-1]


def solve_p2d(h12, h22, alpha_scalar, omega1, ebar, power):
    """Rank-one information beam maximizing the simplified SINR.

    Maximizes ``P w^H G22 w / (1 + (alpha/omega1)(ebar - P w^H G12 w))`` over
    unit ``w`` with ``ebar - omega1 P <= P w^H G12 w <= ebar``.  The optimum is
    the dominant eigenvector of ``G22 + s G12`` for a scalar ``s``, found by
    Dinkelbach iterations with ``s`` clamped to the energy band.  Returns
    ``(w, DualState)`` where ``lam``/``mu`` price the lower/upper band edges.
    """
    h12, h22 = as_channel(h12), as_channel(h22)
    g12, g22 = h12.gram, h22.gram
    w_i = h22.svd[2][:, 0]
    p = power
    if p * float(h12.gain(w_i)) >= ebar:
        return w_i.copy(), DualState(0.0, 0.0)
    emax = omega1 * p + p * h12.sigma[0] ** 2
    if ebar > emax * (1.0 + FEAS_RTOL):
        raise InfeasibleError(f"target {ebar:.6g} exceeds E_max {emax:.6g}", max_energy=emax)
    lo_t, hi_t = ebar - omega1 * p, ebar
    ratio = alpha_scalar / omega1 if omega1 > 0 else 0.0

    def beam(s):
        return _top_eig(g22 + s * g12)[0]

    def energy(s):
        w = beam(s)
        return p * float(np.real(w.conj() @ g12 @ w))

    def objective(w):
        e = p * float(np.real(w.conj() @ g12 @ w))
        return p * float(np.real(w.conj() @ g22 @ w)) / (1.0 + ratio * (ebar - e))

    scale = max(g22.trace().real, 1.0) / max(h12.sigma[0] ** 2 - h12.sigma[-1] ** 2, 1e-12)

    def solve_level(target):
        # smallest s with energy(s) >= target (energy is nondecreasing in s)
        a, b = -scale, scale
        while energy(b) < target and b < 1e12 * scale:
            b *= 4
        while energy(a) > target and a > -1e12 * scale:
            a *= 4
        for _ in range(200):
            mid = 0.5 * (a + b)
            if energy(mid) >= target:
                b = mid
            else:
                a = mid
            if b - a <= 1e-12 * max(1.0, abs(b)):
                break
        return a, b

    def clamp(nu):
        e = energy(nu)
        if e > hi_t:
            a, _ = solve_level(hi_t)
            return a
        if e < lo_t:
            _, b = solve_level(lo_t)
            return b
        return nu

    f = objective(w_i) if lo_t <= p * float(h12.gain(w_i)) else 0.0
    s = 0.0
    for _ in range(100):
        nu = f * ratio
        s = clamp(nu)
        w = beam(s)
        f_new = objective(w)
        if abs(f_new - f) <= 1e-12 * max(abs(f_new), 1.0):
            f = f_new
            break
        f = f_new
    w = beam(s)
    nu = objective(w) * ratio
    lam = max(s - nu, 0.0)
    mu = max(nu - s, 0.0)
    return w, DualState(lam, mu)


def _sinr_rate(net, v, p1, w):
    r = _interference_cov(net.h21, v, p1)
    return rate_bits(net.h22, net.p * np.outer(w, w.conj()), r)


def _rank_one_point(net, v, theta1, w, theta2, ebar, strategy):
    p = net.p
    omega1 = float(net.h11.gain(v))
    e12 = p * float(net.h12.gain(w))
    p1 = max(ebar - e12, 0.0) / omega1 if omega1 > 0 else 0.0
    if p1 > p * (1.0 + 1e-9):
        raise InfeasibleError("energy transmitter would exceed its power budget")
    p1 = min(p1, p)
    return REPoint(
        _sinr_rate(net, v, p1, w), omega1 * p1 + e12, p1, theta1, theta2, ebar,
        strategy=strategy, beam=v, q2=p * np.outer(w, w.conj()),
    )


def algorithm3(net, ebar, energy_strategy="GEO", *, n_max=20):
    """Rank-one information beam from ``solve_p2d`` with a MEB, MLB or geodesic energy beam."""
    tag = {"GEO": "GEO_R1", "MEB": "MEB_R1", "MLB": "MLB_R1"}[energy_strategy]
    p = net.p
    w_i, _ = bf.info_endpoints(net.h22, net.h12)
    if p * float(net.h12.gain(w_i)) >= ebar:
        v = bf.meb(net.h11) if energy_strategy != "MLB" else bf.mlb(net.h21)
        return _rank_one_point(net, v, None, w_i, None, ebar, tag)

    def step(v):
        omega1 = float(net.h11.gain(v))
        a = float(net.h21.gain(v))
        w, _ = solve_p2d(net.h12, net.h22, a, omega1, ebar, p)
        return w

    if energy_strategy in ("MEB", "MLB"):
        v = bf.meb(net.h11) if energy_strategy == "MEB" else bf.mlb(net.h21)
        return _rank_one_point(net, v, None, step(v), None, ebar, tag)

    curve = _energy_curve(net)
    if curve is None:
        v = bf.meb(net.h11)
        return _rank_one_point(net, v, 0.0, step(v), None, ebar, tag)
    phi0, _ = phi0_solve(curve, net.h11, p, ebar)
    theta_prev = None
    for _ in range(n_max):
        theta1 = bf.eta_argmax(curve, net.h11, net.h21, upper=phi0)
        v = curve.points(theta1)[0]
        w = step(v)
        phi0, _ = phi0_solve(curve, net.h11, p, ebar - p * float(net.h12.gain(w)))
        if theta_prev is not None and abs(theta1 - theta_prev) < 1e-6:
            break
        theta_prev = theta1
    return _rank_one_point(net, v, theta1, w, None, ebar, tag)


def optimal_theta2(curve_i, h22, h12, alpha_scalar, omega1, ebar, power):
    """Tilt on the information geodesic maximizing the simplified SINR ``J``.

    Angles whose information-beam energy leaves more than ``omega1 * power``
    for the energy transmitter to cover are excluded, so the implied ``P1``
    never exceeds the budget.  If no angle qualifies the end of the curve
    (maximum energy) is returned.
    """
    g22 = bf.curve_gain(curve_i, h22)
    g12 = bf.curve_gain(curve_i, h12)
    ratio = alpha_scalar / omega1 if omega1 > 0 else 0.0
    floor = ebar - omega1 * power
    slack = 1e-12 * max(abs(ebar), 1.0)

    def j(theta):
        e = power * g12(theta)
        val = power * g22(theta) / (1.0 + ratio * np.maximum(ebar - e, 0.0))
        return np.where(e >= floor - slack, val, -np.inf)

    if floor >= power * float(g12(np.array([curve_i.phi]))[0]) * (1.0 - FEAS_RTOL):
        # only the energy-maximizing end can carry the demand
        return curve_i.phi
    theta, val = grid_argmax(j, 0.0, curve_i.phi)
    if np.isinf(val):
        return curve_i.phi
    return theta


def _curve_or_beam(c):
    if isinstance(c, bf.GeodesicCurve):
        return c, c.start
    return None, bf.normalize(c)


def algorithm4(net, ebar, *, n_max=20, curves=None):
    """Geodesic beams at both transmitters, tilts chosen in alternation.

    ``curves`` optionally replaces the perfect-CSI geodesics with
    ``(energy_curve, info_curve)``, e.g. built from quantized reports; either
    entry may be a plain unit vector to hold that beam fixed.  Gains are
    always measured on the true channels.
    """
    p = net.p
    if curves is None:
        w_i, w_l = bf.info_endpoints(net.h22, net.h12)
        curve_e = _energy_curve(net)
        v0 = bf.meb(net.h11)
        try:
            curve_i = bf.geodesic(w_i, w_l)
        except DegenerateCurveError:
            curve_i = None
        emax = p * net.h11.sigma[0] ** 2 + p * net.h12.sigma[0] ** 2
    else:
        curve_e, v0 = _curve_or_beam(curves[0])
        curve_i, w_i = _curve_or_beam(curves[1])
        w_top = curve_i.end if curve_i is not None else w_i
        emax = p * float(net.h11.gain(v0)) + p * float(net.h12.gain(w_top))
    if p * float(net.h12.gain(w_i)) >= ebar:
        return _rank_one_point(net, v0, None, w_i, 0.0, ebar, "GEO_EI")
    if ebar > emax * (1.0 + FEAS_RTOL):
        raise InfeasibleError(f"target {ebar:.6g} exceeds E_max {emax:.6g}", max_energy=emax)
    phi0 = 0.0
    if curve_e is not None:
        phi0, _ = phi0_solve(curve_e, net.h11, p, ebar)
    prev = None
    for _ in range(n_max):
        if curve_e is None:
            theta1, v = 0.0, v0
        else:
            theta1 = bf.eta_argmax(curve_e, net.h11, net.h21, upper=phi0)
            v = curve_e.points(theta1)[0]
        omega1 = float(net.h11.gain(v))
        a = float(net.h21.gain(v))
        if curve_i is None:
            theta2, w = 0.0, w_i
        else:
            theta2 = optimal_theta2(curve_i, net.h22, net.h12, a, omega1, ebar, p)
            w = curve_i.points(theta2)[0]
        if curve_e is not None:
            phi0, _ = phi0_solve(curve_e, net.h11, p, ebar - p * float(net.h12.gain(w)))
        if prev is not None and abs(theta1 - prev[0]) < 1e-6 and abs(theta2 - prev[1]) < 1e-6:
            break
        prev = (theta1, theta2)
    return _rank_one_point(net, v, theta1, w, theta2, ebar, "GEO_EI")


# ----------------------------------------------------------- time sharing


def _timeshare_ends(net):
    p = net.p
    cov = waterfill(net.h22, p)
    r0, e0 = rate_bits(net.h22, cov.q), cov.energy(net.h12)
    v_e = bf.meb(net.h11)
    _, w_l = bf.info_endpoints(net.h22, net.h12)
    r1 = _sinr_rate(net, v_e, p, w_l)
    e1 = p * net.h11.sigma[0] ** 2 + p * net.h12.sigma[0] ** 2
    return (r0, e0), (r1, e1)


def timeshare_point(net, share):
    """Time-share ``share`` of the slot in the full-power energy mode."""
    if not 0.0 <= share <= 1.0:
        raise DomainError("share must lie in [0, 1]")
    (r0, e0), (r1, e1) = _timeshare_ends(net)
    return REPoint(
        (1 - share) * r0 + share * r1, (1 - share) * e0 + share * e1,
        share * net.p, strategy="TIMESHARE",
    )


def timeshare_baseline(net, ebar_grid):
    """Time-sharing between water-filling (energy transmitter off) and full-power energy mode."""
    (r0, e0), (r1, e1) = _timeshare_ends(net)
    grid = _check_grid(ebar_grid)
    pts = []
    for eb in grid:
        if eb > e1 * (1.0 + FEAS_RTOL):
            pts.append(REPoint(0.0, e1, target=eb, feasible=False, strategy="TIMESHARE"))
            continue
        share = float(np.clip((eb - e0) / (e1 - e0), 0.0, 1.0)) if e1 > e0 else 1.0
        pts.append(REPoint(
            (1 - share) * r0 + share * r1, (1 - share) * e0 + share * e1,
            share * net.p, target=eb, strategy="TIMESHARE",
        ))
    return REBoundary("TIMESHARE", grid, tuple(pts))


# ------------------------------------------------------------- boundaries


def _check_grid(ebar_grid):
    grid = np.atleast_1d(np.asarray(ebar_grid, dtype=float))
    if grid.size == 0:
        raise DomainError("empty energy grid")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise DomainError("energy grid must be strictly increasing")
    return grid


def strategy_emax(net, strategy, ebar=0.0):
    """Largest harvested energy reachable with a strategy."""
    p = net.p
    top12 = p * net.h12.sigma[0] ** 2
    if strategy in ("MLB", "MLB_R1"):
        return p * float(net.h11.gain(bf.mlb(net.h21))) + top12
    if strategy == "SLER":
        return max_energy(net, bf.sler(net.h11, net.h21, ebar, p))
    return p * net.h11.sigma[0] ** 2 + top12


def solve_point(net, strategy, ebar):
    """Single boundary point for ``strategy`` at demand ``ebar``."""
    p = net.p
    if strategy == "MEB":
        return algorithm1(net, bf.meb(net.h11), ebar, strategy="MEB")
    if strategy == "MLB":
        return algorithm1(net, bf.mlb(net.h21), ebar, strategy="MLB")
    if strategy == "SLER":
        return algorithm1(net, bf.sler(net.h11, net.h21, ebar, p), ebar, strategy="SLER")
    if strategy == "GEO_E":
        return algorithm2(net, ebar)
    if strategy == "GEO_EI":
        return algorithm4(net, ebar)
    if strategy in ("GEO_R1", "MEB_R1", "MLB_R1"):
        return algorithm3(net, ebar, strategy.split("_")[0])
    if strategy == "TIMESHARE":
        return timeshare_baseline(net, [ebar]).points[0]
    raise DomainError(f"unknown strategy {strategy!r}")


def re_boundary(net, strategy, ebar_grid, envelope=True):
    """Sweep a strategy over an increasing energy-demand grid.

    Demands the strategy cannot meet are kept as ``feasible=False`` points.
    With ``envelope`` (the default) each demand takes the best point solved for
    any larger demand when that one has a higher rate: it harvests at least as
    much, so it is achievable too.  This makes the boundary the upper edge of
    the achievable region, which matters for rank-one strategies whose
    reported (exact) rate is not monotone in the demand they were tuned for.
    """
    grid = _check_grid(ebar_grid)
    if strategy == "TIMESHARE":
        return timeshare_baseline(net, grid)
    pts = []
    for eb in grid:
        try:
            pt = solve_point(net, strategy, float(eb))
        except InfeasibleError as exc:
            emax = exc.max_energy if exc.max_energy is not None else strategy_emax(net, strategy, eb)
            pt = REPoint(0.0, float(emax), target=float(eb), feasible=False, strategy=strategy)
        pts.append(pt)
    if envelope:
        for i in range(len(pts) - 2, -1, -1):
            nxt = pts[i + 1]
            # a point meeting a larger demand also meets this one, even one solved as infeasible
            if nxt.feasible and (not pts[i].feasible or nxt.rate > pts[i].rate):
                pts[i] = _replace(nxt, target=pts[i].target)
    return REBoundary(strategy, grid, tuple(pts))

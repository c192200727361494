"""Random vector quantization of the geodesic endpoints and feedback-bit allocation.

Each receiver quantizes the unit vectors it reports with its own RVQ codebook.
The expected quantization error ``E[1 - |v^H v_hat|^2]`` of a ``B``-bit
codebook in ``M`` dimensions is ``2^B Beta(2^B, M/(M-1))``; this drives the
statistical bounds on harvested energy and interference and, through their
large-``M`` approximations, the bit split between direct and cross links.

Bounds are evaluated in the noise-normalized system of
:mod:`jwiet.channel`: unit-variance direct links, cross-link variance
``alpha`` and powers ``p``, ``p1`` in units of the noise power.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from . import beamform as bf
from . import reopt
from .channel import complex_gaussian, make_rng
from .errors import DegenerateCurveError, DomainError, InfeasibleError, ResourceError

__all__ = [
    "BitAllocation",
    "BoundReport",
    "Codebook",
    "allocate_bits_eh",
    "beta",
    "bound_report",
    "build_codebook",
    "e_bounds_eh",
    "expected_quant_error",
    "expected_sigma_max_sq",
    "expected_sigma_min_sq",
    "in_bound_id",
    "limited_feedback_point",
    "load_codebook",
    "quantize",
    "quantized_geodesics",
    "s22_bound",
    "save_codebook",
    "sinr_bound_and_allocate_id",
]

MAX_ENTRIES = 2**20
EXACT = "exact"
ASYMPTOTIC = "asymptotic"


# ------------------------------------------------------------- codebooks


@dataclass(frozen=True, eq=False)
class Codebook:
    """``2^bits`` isotropic unit vectors stored as rows."""

    entries: np.ndarray
    bits: int
    seed: object = None

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.ndim != 2 or e.shape[0] != 2**self.bits:
            raise DomainError(f"codebook needs {2**self.bits} rows, got shape {e.shape}")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def m(self):
        return self.entries.shape[1]

    def __len__(self):
        return self.entries.shape[0]


def build_codebook(seed, bits, m, cap=MAX_ENTRIES):
    """RVQ codebook of normalized complex Gaussian vectors, deterministic per seed."""
    if int(bits) != bits or bits < 0:
        raise DomainError(f"bits must be a nonnegative integer, got {bits}")
    bits = int(bits)
    if 2**bits > cap:
        raise ResourceError(f"2^{bits} codewords exceed the cap of {cap}")
    g = complex_gaussian(make_rng(seed), (2**bits, m))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return Codebook(g, bits, seed)


def quantize_index(v, cb):
    """Index of the codeword maximizing ``|v^H f|`` (lowest index on ties)."""
    v = np.asarray(v)
    if v.shape[-1] != cb.m:
        raise DomainError(f"vector has {v.shape[-1]} entries, codebook {cb.m}")
    return int(np.argmax(np.abs(cb.entries.conj() @ v)))


def quantize(v, cb):
    return cb.entries[quantize_index(v, cb)].copy()


def save_codebook(cb, path):
    """Write a codebook as a text table.

    The header line is ``# rvq-codebook m=<M> bits=<B>``; every following row
    is ``index re_1 im_1 ... re_M im_M`` with 17 significant digits, so a
    reload reproduces the entries exactly.
    """
    e = cb.entries
    table = np.empty((e.shape[0], 1 + 2 * e.shape[1]))
    table[:, 0] = np.arange(e.shape[0])
    table[:, 1::2] = e.real
    table[:, 2::2] = e.imag
    fmt = ["%d"] + ["%.17g"] * (2 * e.shape[1])
    np.savetxt(path, table, fmt=fmt, header=f"rvq-codebook m={cb.m} bits={cb.bits}")


def load_codebook(path):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
    fields = dict(tok.split("=") for tok in header.lstrip("# ").split()[1:])
    m, bits = int(fields["m"]), int(fields["bits"])
    table = np.loadtxt(path, ndmin=2)
    if table.shape != (2**bits, 1 + 2 * m):
        raise DomainError(f"table shape {table.shape} does not match header")
    order = np.argsort(table[:, 0])
    table = table[order]
    return Codebook(table[:, 1::2] + 1j * table[:, 2::2], bits)


def quantized_geodesics(v_e_hat, v_l_hat, w_i_hat, w_l_hat):
    """Energy curve ``v_E -> v_L`` and information curve ``w_I -> w_L`` from reports."""
    return bf.geodesic(v_e_hat, v_l_hat), bf.geodesic(w_i_hat, w_l_hat)


# --------------------------------------------------------- random-matrix laws


def beta(x, y):
    """Beta function via log-gamma (stable for huge arguments)."""
    return float(np.exp(special.betaln(x, y)))


def expected_quant_error(bits, m):
    """``E[1 - |v^H v_hat|^2] = 2^B Beta(2^B, M/(M-1))`` for a ``B``-bit RVQ codebook."""
    n = 2.0**bits
    return float(np.exp(np.log(n) + special.betaln(n, m / (m - 1.0))))


@lru_cache(maxsize=None)
def expected_sigma_max_sq(m):
    """``E[sigma_1^2]`` of an ``M x M`` unit-variance complex Gaussian matrix.

    The largest eigenvalue of ``H^H H`` has distribution
    ``F(x) = det(I - G(x))`` with ``G_kl(x) = int_x^inf e^-t L_k(t) L_l(t) dt``
    over the Laguerre polynomials ``L_0 .. L_{M-1}`` (a finite-rank Fredholm
    determinant).  ``G`` is evaluated exactly by ``M``-point Gauss-Laguerre
    quadrature and the mean is ``int_0^inf (1 - F)``.
    """
    m = int(m)
    nodes, weights = special.roots_laguerre(m)
    k = np.arange(m)

    def cdf(x):
        lag = special.eval_laguerre(k[:, None], (x + nodes)[None, :])
        g = np.exp(-x) * (lag * weights) @ lag.T
        return float(np.linalg.det(np.eye(m) - g))

    upper = 4.0 * m + 40.0 * np.sqrt(m) + 40.0
    val, _ = integrate.quad(lambda x: 1.0 - cdf(x), 0.0, upper, limit=400, points=[m, 4 * m])
    return float(val)


def expected_sigma_min_sq(m):
    """``E[sigma_M^2] = 1/M`` for a square unit-variance complex Gaussian matrix."""
    return 1.0 / m


def _expected_gain(sigma_sq, bits, m, alpha=1.0):
    # E||H v_hat||^2 when v_hat quantizes the singular vector with E[sigma^2] = sigma_sq:
    # the error mass spreads isotropically over the remaining M - 1 directions.
    z = expected_quant_error(bits, m)
    return alpha * (sigma_sq * (1.0 - z) + z * (m * m - sigma_sq) / (m - 1.0))


def _cos_sq_mean(m):
    # E|a^H b|^2 for independent isotropic unit vectors, i.e. 1 - Beta(1, M/(M-1))
    return 1.0 - beta(1.0, m / (m - 1.0))


# ------------------------------------------------------------------ bounds


@dataclass(frozen=True)
class BoundReport:
    e11_low: float
    e12_low: float
    s22_low: float
    in21_up: float
    sinr_low: float
    form: str


def _lower_form(gain_mean, scale, angle, m, alpha=1.0):
    c2, s2 = np.cos(angle) ** 2, np.sin(angle) ** 2
    return gain_mean * scale * (c2 - s2 * _cos_sq_mean(m)) + alpha * m * scale * s2


def e_bounds_eh(m, b11, b21, p1, theta1, alpha12, power, phi_i_hat, theta2, form=EXACT):
    """Lower bounds on the energy harvested from each transmitter.

    Returns ``(e11_low, e12_low)``.  The exact form uses the Beta-function
    quantization law and the exact mean of the largest squared singular value;
    the asymptotic form is ``M P1 [(4 - 3 * 2^(-B11/M)) cos^2 + sin^2]`` and
    its cross-link analogue.
    """
    d2 = phi_i_hat - theta2
    if form == EXACT:
        s1 = expected_sigma_max_sq(m)
        e11 = _lower_form(_expected_gain(s1, b11, m), p1, theta1, m)
        e12 = _lower_form(_expected_gain(s1, b21, m, alpha12), power, d2, m, alpha12)
    elif form == ASYMPTOTIC:
        e11 = m * p1 * ((4 - 3 * 2.0 ** (-b11 / m)) * np.cos(theta1) ** 2 + np.sin(theta1) ** 2)
        e12 = alpha12 * m * power * (
            (4 - 3 * 2.0 ** (-b21 / m)) * np.cos(d2) ** 2 + np.sin(d2) ** 2
        )
    else:
        raise DomainError(f"unknown form {form!r}")
    return float(e11), float(e12)


def s22_bound(m, b22, theta2, power, form=EXACT):
    """Lower bound on the information-link gain ``E[P ||H22 w_hat(theta2)||^2]``."""
    if form == EXACT:
        g = _expected_gain(expected_sigma_max_sq(m), b22, m)
        return float(_lower_form(g, power, theta2, m))
    if form == ASYMPTOTIC:
        return float(m * power * (
            (4 - 3 * 2.0 ** (-b22 / m)) * np.cos(theta2) ** 2 + np.sin(theta2) ** 2
        ))
    raise DomainError(f"unknown form {form!r}")


def in_bound_id(m, b12, p1, theta1, phi_e_hat, alpha21, form=EXACT):
    """Upper bound on the interference ``E[P1 ||H21 v_hat(theta1)||^2]``."""
    d = phi_e_hat - theta1
    c2, s2 = np.cos(d) ** 2, np.sin(d) ** 2
    if form == EXACT:
        g = _expected_gain(expected_sigma_min_sq(m), b12, m, alpha21)
        return float(g * p1 * c2 + alpha21 * m * p1 * s2 / beta(1.0, m / (m - 1.0)))
    if form == ASYMPTOTIC:
        return float(alpha21 * m * p1 * ((1 + 4 * 2.0 ** (-b12 / m)) * c2 + s2))
    raise DomainError(f"unknown form {form!r}")


def _sinr_low(b22, b12, m, p1, theta1, phi_e_hat, alpha21, power, theta2):
    num = s22_bound(m, b22, theta2, power, ASYMPTOTIC)
    return num / (1.0 + in_bound_id(m, b12, p1, theta1, phi_e_hat, alpha21, ASYMPTOTIC))


def bound_report(m, bits, p1, theta1, theta2, alpha12, alpha21, power, phi_e_hat, phi_i_hat,
                 form=EXACT):
    """All four bounds plus the SINR lower bound for one bit allocation."""
    e11, e12 = e_bounds_eh(m, bits.b11, bits.b21, p1, theta1, alpha12, power, phi_i_hat,
                           theta2, form)
    s22 = s22_bound(m, bits.b22, theta2, power, form)
    in21 = in_bound_id(m, bits.b12, p1, theta1, phi_e_hat, alpha21, form)
    return BoundReport(e11, e12, s22, in21, s22 / (1.0 + in21), form)


# -------------------------------------------------------------- allocation


@dataclass(frozen=True)
class BitAllocation:
    b11: int
    b21: int
    b12: int
    b22: int

    def __post_init__(self):
        vals = (self.b11, self.b21, self.b12, self.b22)
        if any(int(b) != b or b < 0 for b in vals):
            raise DomainError("bit counts must be nonnegative integers")
        if self.b11 + self.b21 != self.b12 + self.b22:
            raise DomainError("both receivers must spend the same budget")

    @property
    def total(self):
        return self.b11 + self.b21

    @classmethod
    def equal(cls, b_total):
        h = b_total // 2
        return cls(h, b_total - h, b_total - h, h)


def allocate_bits_eh(b_total, m, p1, theta1, alpha12, power, phi_i_hat, theta2):
    """Closed-form split ``(b11, b21)`` of the energy receiver's feedback bits.

    ``b11 = B/2 + (M/2) log2(P1 cos^2 theta1 / (alpha12 P cos^2(phi_I - theta2)))``
    rounded half-to-even and clamped to ``[0, B]``; it maximizes the
    asymptotic ``e11_low + e12_low`` up to rounding.
    """
    a = p1 * np.cos(theta1) ** 2
    c = alpha12 * power * np.cos(phi_i_hat - theta2) ** 2
    if a <= 0:
        b11 = 0
    elif c <= 0:
        b11 = b_total
    else:
        x = b_total / 2.0 + 0.5 * m * np.log2(a / c)
        b11 = int(min(max(np.round(x), 0), b_total))
    return b11, b_total - b11


def sinr_bound_and_allocate_id(b_total, m, p1, theta1, phi_e_hat, alpha21, power, theta2):
    """Exhaustive split ``(b12, b22)`` maximizing the approximate SINR lower bound.

    Ties go to the larger ``b22``.  Returns ``(b12, b22, sinr_low)``.
    """
    vals = [
        _sinr_low(b22, b_total - b22, m, p1, theta1, phi_e_hat, alpha21, power, theta2)
        for b22 in range(b_total + 1)
    ]
    vals = np.asarray(vals)
    b22 = int(np.flatnonzero(vals >= vals.max() * (1 - 1e-12))[-1])
    return b_total - b22, b22, float(vals[b22])


# ------------------------------------------------------- limited feedback


def _codebooks(seed, bits, m):
    b = (bits.b11, bits.b21, bits.b12, bits.b22)
    return [build_codebook((*_as_tuple(seed), k, bk), bk, m) for k, bk in enumerate(b)]


def _as_tuple(seed):
    return tuple(seed) if isinstance(seed, (tuple, list)) else (int(seed),)


def quantized_reports(net, bits, seed):
    """``(v_E, v_L, w_I, w_L)`` quantized with four independently seeded codebooks."""
    cb11, cb21, cb12, cb22 = _codebooks(seed, bits, net.m)
    v_e, v_l = bf.meb(net.h11), bf.mlb(net.h21)
    w_i, w_l = bf.info_endpoints(net.h22, net.h12)
    return quantize(v_e, cb11), quantize(v_l, cb12), quantize(w_i, cb22), quantize(w_l, cb21)


def limited_feedback_point(net, ebar, bits, seed):
    """Geodesic energy/information beamforming on quantized curves.

    Returns ``(REPoint, (energy_curve, info_curve))``; a curve whose quantized
    endpoints coincide is replaced by its start vector.

    The tilts are chosen from gains measured on the true channels (the scalar
    reports are taken as exact); rates and energies are evaluated on the true
    channels.  Raises :class:`InfeasibleError` if the demand cannot be met.
    """
    v_e, v_l, w_i, w_l = quantized_reports(net, bits, seed)
    curves = (_curve_or_start(v_e, v_l), _curve_or_start(w_i, w_l))
    return reopt.algorithm4(net, ebar, curves=curves), curves


def _curve_or_start(a, b):
    try:
        return bf.geodesic(a, b)
    except DegenerateCurveError:
        return a


def adaptive_allocation(net, ebar, b_total, seed):
    """Bit split from an equal-split pass: returns ``BitAllocation``."""
    eq = BitAllocation.equal(b_total)
    pt, (ce, ci) = limited_feedback_point(net, ebar, eq, seed)
    phi_e = ce.phi if isinstance(ce, bf.GeodesicCurve) else 0.0
    phi_i = ci.phi if isinstance(ci, bf.GeodesicCurve) else 0.0
    th1 = pt.theta1 if pt.theta1 is not None else 0.0
    th2 = pt.theta2 if pt.theta2 is not None else 0.0
    b11, b21 = allocate_bits_eh(b_total, net.m, pt.p1, th1, net.alpha12, net.p, phi_i, th2)
    b12, b22, _ = sinr_bound_and_allocate_id(
        b_total, net.m, pt.p1, th1, phi_e, net.alpha21, net.p, th2
    )
    return BitAllocation(b11, b21, b12, b22)


def feedback_rate(net, ebar, b_total, seed, allocation="adaptive", rate_model="mmse"):
    """Achieved rate with ``b_total`` bits per receiver; infeasible demands score 0.

    ``rate_model`` is ``mmse`` (log-det rate of the receiver that treats the
    energy signal as coloured noise) or ``sinr`` (single-stream rate, see
    :func:`jwiet.reopt.single_stream_rate`).  Returns ``(rate, energy, BitAllocation)``.
    """
    if rate_model not in ("mmse", "sinr"):
        raise DomainError(f"unknown rate model {rate_model!r}")
    if allocation == "adaptive":
        try:
            bits = adaptive_allocation(net, ebar, b_total, seed)
        except InfeasibleError:
            bits = BitAllocation.equal(b_total)
    elif allocation == "equal":
        bits = BitAllocation.equal(b_total)
    else:
        raise DomainError(f"unknown allocation {allocation!r}")
    try:
        pt, _ = limited_feedback_point(net, ebar, bits, seed)
    except InfeasibleError:
        return 0.0, 0.0, bits
    rate = pt.rate if rate_model == "mmse" else reopt.single_stream_rate(net, pt)
    return rate, pt.energy, bits

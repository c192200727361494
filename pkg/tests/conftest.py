import numpy as np
import pytest

from jwiet.channel import complex_gaussian, make_rng, sample_network


def random_unit_vectors(seed, n, m):
    x = complex_gaussian(make_rng(seed), (n, m))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def gains(vectors, h):
    """``||H x||^2`` for each row ``x`` of ``vectors``."""
    return np.sum(np.abs(vectors @ np.asarray(h).T) ** 2, axis=1)


@pytest.fixture
def net4():
    return sample_network(11, 4, 0.6)


@pytest.fixture
def net2():
    return sample_network(12, 2, 0.6)


# ---------------------------------------------------- limited-feedback Monte Carlo


def _quantize_batch(rng, v, bits):
    """Quantize each row of ``v`` with its own fresh RVQ codebook."""
    n, m = v.shape
    cb = complex_gaussian(rng, (n, 2**bits, m))
    cb /= np.linalg.norm(cb, axis=2, keepdims=True)
    idx = np.argmax(np.abs(np.einsum("nkm,nm->nk", cb.conj(), v)), axis=1)
    return cb[np.arange(n), idx]


def _curve_points(a, b, offset, from_end=False):
    """Points at angle ``offset`` from ``a`` (or from ``b``) on the a -> b geodesics."""
    c = np.einsum("nm,nm->n", a.conj(), b)
    phi = np.arccos(np.clip(np.abs(c), 0.0, 1.0))
    phase = c / np.maximum(np.abs(c), 1e-300)
    ortho = b - a * c[:, None]
    ortho /= np.maximum(np.linalg.norm(ortho, axis=1, keepdims=True), 1e-300)
    theta = np.clip(phi - offset if from_end else np.full_like(phi, offset), 0.0, phi)
    return (a * phase[:, None]) * np.cos(theta)[:, None] + ortho * np.sin(theta)[:, None]


def _batch_gain(h, x):
    return np.sum(np.abs(np.einsum("nij,nj->ni", h, x)) ** 2, axis=1)


def mc_bound_means(seed, n, m, bits, p1, theta1, d1, d2, theta2, alpha12, alpha21, power):
    """Monte Carlo means of the four quantities the feedback bounds describe.

    ``theta1``/``theta2`` are tilts measured from the energy-maximizing /
    eigen-beam ends; ``d1``/``d2`` are the angles from the leakage end of the
    energy curve and from the cross-link end of the information curve.
    Returns ``(e11, e12, s22, in21)`` means and their standard errors.
    """
    rng = make_rng(seed)
    h11, h21, h12, h22 = (complex_gaussian(rng, (n, m, m)) for _ in range(4))
    v_e = np.linalg.svd(h11)[2][:, 0, :].conj()
    v_l = np.linalg.svd(h21)[2][:, -1, :].conj()
    w_i = np.linalg.svd(h22)[2][:, 0, :].conj()
    w_l = np.linalg.svd(h12)[2][:, 0, :].conj()
    ve, vl = _quantize_batch(rng, v_e, bits.b11), _quantize_batch(rng, v_l, bits.b12)
    wi, wl = _quantize_batch(rng, w_i, bits.b22), _quantize_batch(rng, w_l, bits.b21)
    samples = (
        p1 * _batch_gain(h11, _curve_points(ve, vl, theta1)),
        alpha12 * power * _batch_gain(h12, _curve_points(wi, wl, d2, from_end=True)),
        power * _batch_gain(h22, _curve_points(wi, wl, theta2)),
        alpha21 * p1 * _batch_gain(h21, _curve_points(ve, vl, d1, from_end=True)),
    )
    means = np.array([s.mean() for s in samples])
    ses = np.array([s.std(ddof=1) / np.sqrt(n) for s in samples])
    return means, ses


# ------------------------------------------------------------ acceptance log

ACCEPTANCE_LINES = []


def record_criterion(number, ok, detail):
    """Log one acceptance verdict; the lines are repeated in the terminal summary."""
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

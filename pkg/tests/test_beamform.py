import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import gains, random_unit_vectors
from jwiet import beamform as bf
from jwiet.channel import complex_gaussian, make_rng, sample_network
from jwiet.errors import DegenerateCurveError, DomainError, NumericInputError

E1 = np.array([1, 0], dtype=complex)
E2 = np.array([0, 1], dtype=complex)


def _h(seed, m=4, var=1.0):
    return complex_gaussian(make_rng(seed), (m, m), var)


# ----------------------------------------------------------- MEB / MLB


def test_meb_diagonal_cases():
    np.testing.assert_allclose(np.abs(bf.meb(np.diag([2.0, 1.0]))), [1, 0])
    np.testing.assert_allclose(np.abs(bf.meb(np.diag([1.0, 3.0]))), [0, 1])


def test_mlb_diagonal_case():
    np.testing.assert_allclose(np.abs(bf.mlb(np.diag([2.0, 1.0]))), [0, 1])


def test_mlb_null_space_gives_zero_leakage():
    h = np.array([[1.0, 0.0], [2.0, 0.0]])
    v = bf.mlb(h)
    assert np.linalg.norm(h @ v) < 1e-12


def test_meb_beats_random_search():
    h = _h(1)
    x = random_unit_vectors(2, 100_000, 4)
    best = gains(x, h).max()
    v = bf.meb(h)
    sigma1 = np.linalg.svd(h, compute_uv=False)[0] ** 2
    assert np.linalg.norm(h @ v) ** 2 == pytest.approx(sigma1, rel=1e-12)
    assert best <= sigma1 + 1e-9
    assert best >= sigma1 * (1 - 1e-2)


def test_mlb_beats_random_search():
    h = _h(3)
    x = random_unit_vectors(4, 100_000, 4)
    worst = gains(x, h).min()
    v = bf.mlb(h)
    sm = np.linalg.svd(h, compute_uv=False)[-1] ** 2
    assert np.linalg.norm(h @ v) ** 2 == pytest.approx(sm, rel=1e-9, abs=1e-12)
    assert worst >= sm - 1e-9
    assert worst <= sm + 1e-2 * np.linalg.norm(h, 2) ** 2


def test_info_endpoints():
    w_i, _ = bf.info_endpoints(np.diag([3.0, 1.0]), np.eye(2))
    _, w_l = bf.info_endpoints(np.eye(2), np.diag([1.0, 2.0]))
    np.testing.assert_allclose(np.abs(w_i), [1, 0])
    np.testing.assert_allclose(np.abs(w_l), [0, 1])
    h22 = _h(5)
    w_i, _ = bf.info_endpoints(h22, _h(6))
    s1 = np.linalg.svd(h22, compute_uv=False)[0] ** 2
    assert np.linalg.norm(h22 @ w_i) ** 2 == pytest.approx(s1, rel=1e-10)


def test_normalize_rejects_zero():
    with pytest.raises(NumericInputError):
        bf.normalize(np.zeros(3))


# ------------------------------------------------------------------ SLER


def test_sler_diagonal_decouples():
    v = bf.sler(np.diag([2.0, 1.0]), np.diag([1.0, 2.0]), 0.0, 1.0)
    np.testing.assert_allclose(np.abs(v), [1, 0], atol=1e-12)
    assert bf.sler_value(v, np.diag([2.0, 1.0]), np.diag([1.0, 2.0]), 0.0, 1.0) == pytest.approx(4.0)


def test_sler_approaches_meb_for_large_demand():
    h11, h21 = _h(7), _h(8, var=0.6)
    v_e = bf.meb(h11)
    overlaps = [abs(np.vdot(bf.sler(h11, h21, eb, 1.0), v_e)) for eb in (1e2, 1e4, 1e6)]
    assert overlaps[-1] > 1 - 1e-6
    assert overlaps[0] <= overlaps[1] + 1e-12 <= overlaps[2] + 2e-12


def test_sler_beats_random_search():
    h11, h21 = _h(9), _h(10, var=0.6)
    eb, p = 400.0, 50.0
    v = bf.sler(h11, h21, eb, p)
    x = random_unit_vectors(11, 100_000, 4)
    shift = max(eb / p - np.linalg.norm(h11, 2) ** 2, 0.0)
    ratio = gains(x, h11) / (gains(x, h21) + shift)
    assert bf.sler_value(v, h11, h21, eb, p) >= ratio.max() - 1e-9


def test_sler_matches_generalized_eigenvalue():
    h11, h21 = _h(12), _h(13)
    v = bf.sler(h11, h21, 0.0, 1.0)
    top = scipy.linalg.eigh(h11.conj().T @ h11, h21.conj().T @ h21, eigvals_only=True)[-1]
    assert bf.sler_value(v, h11, h21, 0.0, 1.0) == pytest.approx(top, rel=1e-10)


def test_sler_regularizes_rank_deficient_leakage():
    h21 = np.array([[1.0, 0.0], [0.0, 0.0]])
    v = bf.sler(np.eye(2), h21, 0.0, 1.0)
    np.testing.assert_allclose(np.abs(v), [0, 1], atol=1e-9)


# -------------------------------------------------------------- geodesic


def test_orthogonal_endpoints():
    c = bf.geodesic(E1, E2)
    assert c.phi == pytest.approx(np.pi / 2)
    assert c.phase == 1
    np.testing.assert_allclose(c.ortho, -E2, atol=1e-15)
    for t in (0.1, 0.7, 1.3):
        np.testing.assert_allclose(c.point(t), E1 * np.cos(t) + E2 * np.sin(t), atol=1e-15)
    np.testing.assert_allclose(c.point(np.pi / 4), (E1 + E2) / np.sqrt(2), atol=1e-15)


def test_collinear_endpoints_rejected():
    v = random_unit_vectors(1, 1, 3)[0]
    with pytest.raises(DegenerateCurveError):
        bf.geodesic(v, v * np.exp(0.3j))


def test_non_unit_endpoints_rejected():
    with pytest.raises(NumericInputError):
        bf.geodesic(2 * E1, E2)


def test_point_outside_domain():
    c = bf.geodesic(E1, (E1 + E2) / np.sqrt(2))
    with pytest.raises(DomainError):
        c.point(c.phi + 1e-6)
    with pytest.raises(DomainError):
        c.point(-1e-6)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(2, 6))
def test_random_curve_invariants(seed, m):
    v1, v2 = random_unit_vectors(seed, 2, m)
    c = bf.geodesic(v1, v2)
    assert np.vdot(v1, v2) == pytest.approx(c.phase * np.cos(c.phi), abs=1e-10)
    assert abs(np.vdot(c.start, c.ortho)) <= 1e-10
    assert np.linalg.norm(c.ortho) == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_allclose(c.point(0.0), v1 * c.phase, atol=1e-10)
    np.testing.assert_allclose(c.point(c.phi), v2, atol=1e-10)
    pts = c.points(np.linspace(0, c.phi, 100))
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_curve_gain_matches_direct_evaluation(seed):
    v1, v2 = random_unit_vectors(seed, 2, 4)
    h = _h(seed % 1000)
    c = bf.geodesic(v1, v2)
    th = np.linspace(0, c.phi, 25)
    direct = gains(c.points(th), h)
    np.testing.assert_allclose(bf.curve_gain(c, h)(th), direct, rtol=1e-10, atol=1e-12)


# ------------------------------------------------------------------- eta


def _energy_curve(net):
    return bf.geodesic(bf.meb(net.h11), bf.mlb(net.h21))


def test_eta_endpoints(net4):
    c = _energy_curve(net4)
    s11 = net4.h11.sigma[0] ** 2
    assert bf.eta(0.0, c, net4.h11, net4.h21) == pytest.approx(
        s11 / net4.h21.gain(c.start * c.phase), rel=1e-10
    )
    assert bf.eta(c.phi, c, net4.h11, net4.h21) == pytest.approx(
        net4.h11.gain(c.end) / net4.h21.sigma[-1] ** 2, rel=1e-9
    )


def test_eta_forms_agree():
    for s in range(100):
        net = sample_network(s, 4, 0.6)
        c = _energy_curve(net)
        th = make_rng(s).uniform(0, c.phi)
        a = bf.eta(th, c, net.h11, net.h21, form="direct")
        b = bf.eta(th, c, net.h11, net.h21, form="scalar")
        assert a == pytest.approx(b, rel=1e-9)


def test_eta_infinite_on_perfect_null():
    h21 = np.array([[0.0, 1.0], [0.0, 1.0]])
    c = bf.geodesic(E2, E1)
    assert bf.eta(c.phi, c, np.eye(2), h21) == np.inf


def test_eta_argmax_beats_grid(net4):
    c = _energy_curve(net4)
    th = bf.eta_argmax(c, net4.h11, net4.h21)
    grid = np.linspace(0, c.phi, 2000)
    vals = bf.curve_gain(c, net4.h11)(grid) / bf.curve_gain(c, net4.h21)(grid)
    assert bf.eta(th, c, net4.h11, net4.h21) >= vals.max() - 1e-9


def test_eta_argmax_respects_upper_bound(net4):
    c = _energy_curve(net4)
    th = bf.eta_argmax(c, net4.h11, net4.h21, upper=0.2 * c.phi)
    assert 0 <= th <= 0.2 * c.phi + 1e-12


# ------------------------------------------------- geometric properties


def _monotone_violations():
    e_viol = l_viol = 0
    for s in range(100):
        net = sample_network((40, s), 4, 0.6)
        c = _energy_curve(net)
        th = np.linspace(0, c.phi, 50)
        e11 = bf.curve_gain(c, net.h11)(th)
        in21 = bf.curve_gain(c, net.h21)(th)
        e_viol += int(np.sum(np.diff(e11) > 1e-10 * e11[0]))
        l_viol += int(np.sum(np.diff(in21) > 1e-10 * max(in21[0], 1.0)))
    return e_viol, l_viol


def test_energy_and_leakage_monotone_along_energy_curve():
    e_viol, l_viol = _monotone_violations()
    assert e_viol == 0
    # leakage falls from the MEB end toward the MLB end
    assert l_viol == 0


def test_leakage_extremes_at_curve_ends():
    for s in range(20):
        net = sample_network((41, s), 4, 0.6)
        c = _energy_curve(net)
        g = bf.curve_gain(c, net.h21)
        assert g(c.phi) == pytest.approx(net.h21.sigma[-1] ** 2, rel=1e-8, abs=1e-12)
        assert g(c.phi) <= g(0.0)


def test_eta_maximizer_lies_on_energy_curve_m2():
    # the sphere-wide maximizer of ||H11 v||^2 / ||H21 v||^2 sits on the curve
    x = random_unit_vectors(99, 1_000_000, 2)
    for s in range(3):
        net = sample_network((42, s), 2, 0.6)
        ratio = gains(x, net.h11.entries) / gains(x, net.h21.entries)
        best = x[np.argmax(ratio)]
        c = _energy_curve(net)
        pts = c.points(np.linspace(0, c.phi, 20001))
        dist = np.arccos(min(1.0, np.max(np.abs(pts.conj() @ best))))
        assert dist < 0.02

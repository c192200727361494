"""One-dimensional search helpers shared by the beam and power solvers."""
import numpy as np
from scipy.optimize import brentq, minimize_scalar

GRID_POINTS = 2000
ANGLE_TOL = 1e-6


def grid_argmax(f, lo, hi, n=GRID_POINTS, xtol=ANGLE_TOL):
    """Maximize a vectorized scalar function on ``[lo, hi]``.

    A dense grid locates the global peak, then a bounded Brent search refines
    it inside the neighbouring grid cells.  ``f`` must accept an ndarray.
    Returns ``(x, f(x))``.
    """
    if hi <= lo:
        return lo, float(f(np.array([lo]))[0])
    xs = np.linspace(lo, hi, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        ys = np.asarray(f(xs), dtype=float)
    ys = np.where(np.isnan(ys), -np.inf, ys)
    k = int(np.argmax(ys))
    x_best, y_best = xs[k], ys[k]
    if np.isinf(y_best):
        return x_best, y_best
    a, b = xs[max(k - 1, 0)], xs[min(k + 1, n - 1)]

    def neg(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            y = float(f(np.array([x]))[0])
        return -y if np.isfinite(y) else (-1e300 if y > 0 else 1e300)

    res = minimize_scalar(
        neg,
        bounds=(a, b),
        method="bounded",
        options={"xatol": xtol},
    )
    if res.success and -res.fun > y_best:
        return float(res.x), float(-res.fun)
    return float(x_best), float(y_best)


def last_crossing(g, target, lo, hi, n=256, xtol=1e-10):
    """Largest ``x`` in ``[lo, hi]`` with ``g(x) >= target``.

    ``g`` is vectorized and expected to be (mostly) decreasing.  Returns
    ``(x, ok)``; ``ok`` is False when even ``g`` at the best grid point falls
    short, in which case ``x`` is the grid maximizer of ``g``.
    """
    xs = np.linspace(lo, hi, n)
    ys = np.asarray(g(xs), dtype=float)
    good = np.flatnonzero(ys >= target)
    if good.size == 0:
        return float(xs[int(np.argmax(ys))]), False
    k = good[-1]
    if k == n - 1:
        return float(hi), True
    a, b = xs[k], xs[k + 1]
    x = brentq(lambda t: float(g(np.array([t]))[0]) - target, a, b, xtol=xtol)
    # stay on the feasible side of the root
    step = xtol
    while x > a and float(g(np.array([x]))[0]) < target:
        x = max(a, x - step)
        step *= 2
    return float(x), True

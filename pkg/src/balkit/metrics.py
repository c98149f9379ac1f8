"""Frequency-response evaluation, grid-based H-infinity estimates and pole reports."""

import numpy as np

from .errors import DimensionError
from .system import ReducedModel, _dense, tf_evaluator

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def freq_response(sys, grid, all_singular_values=False):
    """Largest singular value of H(i * node) over a frequency grid.

    With ``all_singular_values`` the full min(m, p) spectrum per node is
    returned (one row per node).
    """
    grid = np.asarray(grid, dtype=float)
    evaluate = tf_evaluator(sys)
    out = []
    for w in grid:
        s = np.linalg.svd(evaluate(1j * w), compute_uv=False)
        out.append(s if all_singular_values else s[0])
    return np.array(out)


def hinf_grid(sys, lo=1e-3, hi=1e3, n=400, refine=True):
    """Grid estimate of the H-infinity norm (a lower bound of the true norm).

    Takes the maximum of sigma_max(H(i omega)) over ``n`` log-spaced points
    in [lo, hi]; with ``refine`` a golden-section search in log-frequency
    polishes the maximum between the neighbors of the grid argmax.
    """
    if not (0 < lo < hi) or n < 2:
        raise ValueError(f"invalid grid [{lo}, {hi}] with {n} points")
    grid = np.geomspace(lo, hi, n)
    evaluate = tf_evaluator(sys)

    def gain(w):
        return float(np.linalg.svd(evaluate(1j * w), compute_uv=False)[0])

    vals = np.array([gain(w) for w in grid])
    k = int(np.argmax(vals))
    best = float(vals[k])
    if not refine:
        return best
    a = np.log(grid[max(k - 1, 0)])
    b = np.log(grid[min(k + 1, n - 1)])
    if a == b:
        return best
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = gain(np.exp(x1)), gain(np.exp(x2))
    for _ in range(60):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = gain(np.exp(x2))
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = gain(np.exp(x1))
        if b - a < 1e-12:
            break
    return max(best, f1, f2)


def bt_bound(sigma, r):
    """A priori balancing error bound 2 * sum_{i>r} sigma_i."""
    sigma = np.asarray(sigma, dtype=float)
    if not 0 <= r < sigma.size:
        raise DimensionError(f"r={r} out of range for {sigma.size} singular values")
    return float(2.0 * np.sum(sigma[r:]))


def poles(rom):
    """Eigenvalues of the (reduced) state matrix, sorted by real part."""
    sys = rom.sys if isinstance(rom, ReducedModel) else rom
    A = _dense(sys.A)
    if sys.e_is_identity():
        lam = np.linalg.eigvals(A)
    else:
        import scipy.linalg as spla

        lam = spla.eigvals(A, _dense(sys.E))
    order = np.lexsort((lam.imag, lam.real))
    return lam[order]

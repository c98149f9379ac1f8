import numpy as np
import pytest

from balkit import StateSpace, eval_tf, tf_evaluator


@pytest.fixture
def s1():
    # H(s) = 1/(s+1)
    return StateSpace(A=[[-1.0]], B=[[1.0]], C=[[1.0]])


@pytest.fixture
def s2():
    # H(s) = 1/(s+1) + 1/(s+2)
    return StateSpace(A=np.diag([-1.0, -2.0]), B=[[1.0], [1.0]], C=[[1.0, 1.0]])


def grid_gain(sys, grid):
    """max over the grid of sigma_max(H(i w))."""
    ev = tf_evaluator(sys)
    return max(np.linalg.norm(ev(1j * w), 2) for w in grid)


def grid_diff(sys_a, sys_b, grid):
    """max over the grid of sigma_max(H_a(i w) - H_b(i w))."""
    ev_a, ev_b = tf_evaluator(sys_a), tf_evaluator(sys_b)
    return max(np.linalg.norm(ev_a(1j * w) - ev_b(1j * w), 2) for w in grid)


def rel_grid_diff(sys_a, sys_b, grid, ref=None):
    ref = sys_a if ref is None else ref
    return grid_diff(sys_a, sys_b, grid) / grid_gain(ref, grid)


def kron_lyap(A, E, F):
    """Kronecker-vectorization oracle for A X E^T + E X A^T + F F^T = 0."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    E = np.eye(n) if E is None else np.asarray(E, dtype=float)
    K = np.kron(E, A) + np.kron(A, E)
    x = np.linalg.solve(K, -(F @ F.T).reshape(-1))
    X = x.reshape(n, n)
    return (X + X.T) / 2.0


def default_grid(n=40, lo=1e-3, hi=1e3):
    return np.geomspace(lo, hi, n)

"""Intrusive reductions: square-root BT, SPA via the reciprocal route, direct SPA."""

import warnings

import numpy as np
import scipy.linalg as spla

from .errors import DimensionError, RankError, SigmaTieError, SingularMatrixError
from .gramian import RANK_FLOOR, hankel_projection, hankel_svd, lyap_factor_dense, \
    lyap_factor_lowrank
from .system import ReducedModel, StateSpace, _dense, _is_sparse, _solver

SIGMA_TIE_REL = 1e-10
COND_WARN = 1e12


def order_from_tolerance(sigma, tol):
    """Smallest r with 2 * sum_{i>r} sigma_i <= tol * (2 * sum_i sigma_i)."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.size == 0:
        raise ValueError("empty singular-value vector")
    total = 2.0 * np.sum(sigma)
    tails = 2.0 * (np.sum(sigma) - np.cumsum(sigma))
    for r in range(1, sigma.size + 1):
        if tails[r - 1] <= tol * total:
            return r
    return sigma.size


def _sigma_gap(sigma, r, method):
    """Tie handling at the truncation index: warn for BT, raise for SPA."""
    if r >= sigma.size:
        return
    if sigma[r - 1] <= 0 or (sigma[r - 1] - sigma[r]) < SIGMA_TIE_REL * sigma[r - 1]:
        msg = (f"Hankel values sigma_{r} = {sigma[r - 1]:.6e} and "
               f"sigma_{r + 1} = {sigma[r]:.6e} are tied")
        if method == "BT":
            warnings.warn(msg + "; proceeding with an arbitrary split")
        else:
            raise SigmaTieError(msg + "; SPA requires a strict gap")


def _factors_for(sys, factors, lowrank, adi_tol):
    if factors is not None:
        return factors
    if lowrank:
        return lyap_factor_lowrank(sys, tol=adi_tol)
    return lyap_factor_dense(sys)


def bt(sys, r=None, tol=None, factors=None, lowrank=False, adi_tol=1e-8):
    """Balanced truncation by the square-root method.

    Either the target order ``r`` or a relative error-bound tolerance ``tol``
    must be given.  ``factors`` may carry precomputed Gramian factors;
    ``lowrank`` switches the factor computation to the ADI path for large
    sparse systems.

    Returns a :class:`ReducedModel` with E = I, D_r = D and the retained
    singular values recorded.
    """
    if (r is None) == (tol is None):
        raise ValueError("exactly one of r / tol must be given")
    fac = _factors_for(sys, factors, lowrank, adi_tol)
    if tol is not None:
        _, s, _ = hankel_svd(fac, None if sys.e_is_identity() else sys.E)
        r = order_from_tolerance(s[s > RANK_FLOOR * s[0]], tol)
    proj = hankel_projection(fac, sys.E, r)
    _sigma_gap(proj.sigma, r, "BT")
    W, V = proj.W, proj.V
    Ar = W.T @ _dense(sys.A @ V)
    Br = W.T @ _dense(sys.B)
    Cr = _dense(sys.C) @ V
    rom = StateSpace(A=Ar, B=Br, C=Cr, D=np.array(sys.D, copy=True))
    return ReducedModel(sys=rom, method="BT", r=r, hankel_used=proj.sigma[:r].copy())


def spa(sys, r, factors=None, lowrank=False, adi_tol=1e-8):
    """Singular perturbation approximation via BT of the reciprocal system.

    The reciprocal system is never formed: its projected realization is
    assembled from solves against A (A_V = A^-1 E V, B_A = A^-1 B), and the
    final model is the reciprocal transform of the r x r intermediate ROM.
    Interpolates the full model at s = 0.
    """
    fac = _factors_for(sys, factors, lowrank, adi_tol)
    proj = hankel_projection(fac, sys.E, r)
    _sigma_gap(proj.sigma, r, "SPA")
    W, V = proj.W, proj.V
    E, B, C, D = sys.E, _dense(sys.B), _dense(sys.C), _dense(sys.D)
    solve_a = _solver(sys.A.tocsc() if sys.is_sparse else sys.A, "A")
    EV = _dense(E @ V)
    A_V = solve_a(EV)
    B_A = solve_a(B)
    EA_V = _dense(E @ A_V)
    EB_A = _dense(E @ B_A)
    At = W.T @ EA_V            # intermediate (reciprocal) ROM
    Bt = W.T @ EB_A
    Ct = -C @ A_V
    Dt = D - C @ B_A
    Ar, Br, Cr, Dr = _reciprocal_small(At, Bt, Ct, Dt)
    rom = StateSpace(A=Ar, B=Br, C=Cr, D=Dr)
    return ReducedModel(sys=rom, method="SPA", r=r, hankel_used=proj.sigma[:r].copy())


def _reciprocal_small(At, Bt, Ct, Dt):
    """Reciprocal transform of a small E = I realization, evaluated in the
    order A_r, then B_r = A_r Bt, C_r = -Ct A_r, D_r = Dt + C_r Bt."""
    r = At.shape[0]
    lu, piv = spla.lu_factor(At)
    diag = np.abs(np.diag(lu))
    if np.any(diag == 0.0):
        raise SingularMatrixError("intermediate ROM matrix is singular")
    anorm = np.linalg.norm(At, 1)
    rcond = spla.lapack.dgecon(lu, anorm)[0] if not np.iscomplexobj(At) \
        else spla.lapack.zgecon(lu, anorm)[0]
    if rcond == 0.0 or not np.isfinite(rcond):
        raise SingularMatrixError("intermediate ROM matrix is singular")
    if 1.0 / rcond > COND_WARN:
        warnings.warn(f"intermediate ROM matrix has condition ~{1.0 / rcond:.2e}")
    Ar = spla.lu_solve((lu, piv), np.eye(r, dtype=At.dtype))
    Br = Ar @ Bt
    Cr = -Ct @ Ar
    Dr = Dt + Cr @ Bt
    return Ar, Br, Cr, Dr


def spa_direct(sys, r, factors=None):
    """SPA through the explicit balance-partition-eliminate formula.

    Builds the full balancing transform from the square-root data
    (T = S^-1/2 Z^T L^T E, T^-1 = U Y S^-1/2), partitions the balanced
    realization at r and applies the Schur-complement formulas.  Dense only;
    intended as the order-r oracle for :func:`spa`, feasible to n ~ 2000.
    States beyond the numerical rank of L^T E U contribute O(1e-12) and are
    dropped before partitioning.
    """
    if sys.is_sparse and sys.n > 2000:
        raise DimensionError("spa_direct requires a dense-feasible system (n <= ~2000)")
    fac = factors if factors is not None else lyap_factor_dense(
        sys if not sys.is_sparse else StateSpace(
            A=_dense(sys.A), B=_dense(sys.B), C=_dense(sys.C), D=_dense(sys.D),
            E=_dense(sys.E)))
    e_arg = None if sys.e_is_identity() else sys.E
    Z, s, Yh = hankel_svd(fac, e_arg)
    rank = int(np.sum(s > RANK_FLOOR * s[0]))
    if r >= rank:
        raise RankError(f"order r={r} needs r < numerical rank {rank} for the partition")
    _sigma_gap(s, r, "SPA")
    scale = 1.0 / np.sqrt(s[:rank])
    Wf = (fac.L @ Z[:, :rank]) * scale
    Vf = (fac.U @ Yh[:rank, :].T) * scale
    Abal = Wf.T @ _dense(sys.A @ Vf)
    Bbal = Wf.T @ _dense(sys.B)
    Cbal = _dense(sys.C) @ Vf
    A11, A12 = Abal[:r, :r], Abal[:r, r:]
    A21, A22 = Abal[r:, :r], Abal[r:, r:]
    B1, B2 = Bbal[:r], Bbal[r:]
    C1, C2 = Cbal[:, :r], Cbal[:, r:]
    lu, piv = spla.lu_factor(A22)
    if np.any(np.abs(np.diag(lu)) == 0.0):
        raise SingularMatrixError("A22 block of the balanced realization is singular")
    A22iA21 = spla.lu_solve((lu, piv), A21)
    A22iB2 = spla.lu_solve((lu, piv), B2)
    Ar = A11 - A12 @ A22iA21
    Br = B1 - A12 @ A22iB2
    Cr = C1 - C2 @ A22iA21
    Dr = _dense(sys.D) - C2 @ A22iB2
    rom = StateSpace(A=Ar, B=Br, C=Cr, D=Dr)
    return ReducedModel(sys=rom, method="SPA_DIRECT", r=r, hankel_used=s[:r].copy())

"""Lyapunov solvers, square-root Gramian factors and the Hankel projection."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as spla
import scipy.sparse as sps
import scipy.sparse.linalg as spsla

from .errors import ConvergenceError, DimensionError, RankError
from .system import _dense, _is_sparse

SIGN_TOL = 1e-12
SIGN_MAX_ITER = 100
COLUMN_DROP_TOL = 1e-12
PSD_CLIP_TOL = 1e-12
RANK_FLOOR = 1e-12


@dataclass(frozen=True)
class GramianFactors:
    """Square-root factors U, L with P ~ U U^T and Q ~ L L^T.

    ``exact`` marks factors from the dense solver (residuals <= 1e-10);
    low-rank factors carry the residual actually reached.  Residuals are
    relative Frobenius residuals of the two Lyapunov equations.
    """

    U: np.ndarray
    L: np.ndarray
    exact: bool
    residual_P: float
    residual_Q: float

    @property
    def r_U(self):
        return self.U.shape[1]

    @property
    def r_L(self):
        return self.L.shape[1]


@dataclass(frozen=True)
class ProjectionData:
    """Truncated SVD of L^T E U plus the square-root reduction bases.

    ``S1`` holds the leading r singular values (the diagonal of the r x r
    factor); ``sigma`` is the full descending spectrum, which equals the
    Hankel singular values when the factors are exact.
    """

    Z1: np.ndarray
    S1: np.ndarray
    Y1: np.ndarray
    W: np.ndarray
    V: np.ndarray
    sigma: np.ndarray


def _logabsdet_lu(lu):
    d = np.abs(np.diag(lu))
    if np.any(d == 0.0):
        raise ConvergenceError("sign iteration hit an exactly singular iterate")
    return float(np.sum(np.log(d)))


def lyap_dense(A, E, F, side="controllability"):
    """Solve a generalized Lyapunov equation by the sign-function iteration.

    side='controllability' solves  A X E^T + E X A^T + F F^T = 0  (F: n x k);
    side='observability'  solves  A^T X E + E^T X A + F^T F = 0  (F: k x n).
    The iteration uses determinant-based scaling and needs only solves and
    additions; it diverges (and raises) when the pencil is not stable.
    """
    A = _dense(A).astype(float)
    E = None if E is None else _dense(E).astype(float)
    F = np.atleast_2d(np.asarray(F, dtype=float))
    n = A.shape[0]
    if side == "observability":
        if F.shape[1] != n:
            raise DimensionError(f"observability factor needs {n} columns, got {F.shape}")
        return lyap_dense(A.T, None if E is None else E.T, F.T, "controllability")
    if side != "controllability":
        raise ValueError(f"unknown side {side!r}")
    if F.shape[0] != n:
        raise DimensionError(f"controllability factor needs {n} rows, got {F.shape}")

    e_identity = E is None or np.array_equal(E, np.eye(n))
    W = F @ F.T
    Ak = A.copy()
    if e_identity:
        logdet_e = 0.0
        Emat = np.eye(n)
    else:
        lu_e, piv_e = spla.lu_factor(E)
        logdet_e = _logabsdet_lu(lu_e)
        Emat = E
    err_prev = np.inf
    converged = False
    for _ in range(SIGN_MAX_ITER):
        lu, piv = spla.lu_factor(Ak)
        c = np.exp((_logabsdet_lu(lu) - logdet_e) / n)
        if e_identity:
            Ai = spla.lu_solve((lu, piv), np.eye(n))
            A_next = (Ak + c * c * Ai) / (2.0 * c)
            W = (W + c * c * Ai @ W @ Ai.T) / (2.0 * c)
        else:
            AiE = spla.lu_solve((lu, piv), Emat)            # A_k^-1 E
            EAi = spla.lu_solve((lu, piv), Emat.T, trans=1).T  # E A_k^-1
            A_next = (Ak + c * c * Emat @ AiE) / (2.0 * c)
            W = (W + c * c * EAi @ W @ EAi.T) / (2.0 * c)
        err = np.linalg.norm(A_next + Emat) / np.linalg.norm(Emat)
        Ak = A_next
        if err <= SIGN_TOL or (err <= 1e-8 and err >= err_prev):
            converged = True  # tol reached, or roundoff plateau after the quadratic phase
            break
        err_prev = err
    if not converged:
        raise ConvergenceError(
            f"sign iteration did not reach {SIGN_TOL} in {SIGN_MAX_ITER} steps; "
            "the pencil (E, A) may be unstable"
        )

    Y = W / 2.0  # = E X E^T at convergence
    if e_identity:
        X = Y
    else:
        X = spla.lu_solve((lu_e, piv_e), Y)
        X = spla.lu_solve((lu_e, piv_e), X.T).T
    return (X + X.T) / 2.0


def lyap_residual(A, E, X, F):
    """Relative Frobenius residual of A X E^T + E X A^T + F F^T (dense)."""
    A = _dense(A)
    W = F @ F.T
    if E is None:
        AXE = A @ X
    else:
        AXE = A @ X @ _dense(E).T
    R = AXE + AXE.T + W
    return float(np.linalg.norm(R) / np.linalg.norm(W))


def _psd_factor(X, what):
    """Factor a (numerically) PSD matrix as U U^T via symmetric eigendecomposition.

    Eigenvalues in [-PSD_CLIP_TOL * lam_max, 0] are clipped to zero; anything
    more negative flags a solver failure.
    """
    lam, V = spla.eigh((X + X.T) / 2.0)
    lam_max = max(lam[-1], 0.0)
    if lam_max == 0.0:
        return np.zeros((X.shape[0], 0))
    if lam[0] < -PSD_CLIP_TOL * lam_max:
        raise ConvergenceError(
            f"{what} is indefinite (lam_min = {lam[0]:.2e}); Lyapunov solve failed"
        )
    lam = np.clip(lam, 0.0, None)
    keep = lam > 0.0
    order = np.argsort(lam[keep])[::-1]
    lam_k = lam[keep][order]
    V_k = V[:, keep][:, order]
    return V_k * np.sqrt(lam_k)


def lyap_factor_dense(sys):
    """Exact square-root Gramian factors of a stable system (dense path)."""
    A, E = _dense(sys.A), _dense(sys.E)
    B, C = _dense(sys.B), _dense(sys.C)
    e_arg = None if sys.e_is_identity() else E
    P = lyap_dense(A, e_arg, B, "controllability")
    Q = lyap_dense(A, e_arg, C, "observability")
    U = _psd_factor(P, "controllability Gramian")
    L = _psd_factor(Q, "observability Gramian")
    res_p = lyap_residual(A, e_arg, P, B)
    res_q = lyap_residual(A.T, None if e_arg is None else E.T, Q, C.T)
    return GramianFactors(U=U, L=L, exact=True, residual_P=res_p, residual_Q=res_q)


# --------------------------------------------------------------------------
# low-rank ADI


def _arnoldi_ritz(matvec, v0, k):
    """Ritz values from a k-step Arnoldi process (modified Gram-Schmidt)."""
    n = v0.shape[0]
    k = min(k, n)
    V = np.zeros((n, k + 1))
    H = np.zeros((k + 1, k))
    nrm = np.linalg.norm(v0)
    if nrm == 0:
        v0 = np.ones(n)
        nrm = np.sqrt(n)
    V[:, 0] = v0 / nrm
    m = k
    for j in range(k):
        w = matvec(V[:, j])
        for i in range(j + 1):
            H[i, j] = V[:, i] @ w
            w = w - H[i, j] * V[:, i]
        H[j + 1, j] = np.linalg.norm(w)
        if H[j + 1, j] < 1e-12:
            m = j + 1
            break
        V[:, j + 1] = w / H[j + 1, j]
    return np.linalg.eigvals(H[:m, :m])


def penzl_shifts(A, E=None, v0=None, n_ritz=30, n_inv_ritz=20, n_shifts=16):
    """Heuristic ADI shifts from Arnoldi Ritz values of E^-1 A and its inverse.

    Candidates with nonnegative real part are discarded; the greedy selection
    repeatedly adds the candidate where the current shift set's ADI damping
    factor is worst, keeping complex shifts in conjugate pairs.
    """
    n = A.shape[0]
    if v0 is None:
        v0 = np.ones(n)
    e_identity = E is None
    if not e_identity:
        solve_e = spsla.splu(E.tocsc()).solve if _is_sparse(E) else _solver_dense(E)
    solve_a = spsla.splu(A.tocsc()).solve if _is_sparse(A) else _solver_dense(_dense(A))

    def mv_plus(v):
        w = A @ v
        return w if e_identity else solve_e(w)

    def mv_minus(v):
        w = v if e_identity else (E @ v)
        return solve_a(w)

    ritz_p = _arnoldi_ritz(mv_plus, v0, min(n_ritz, n))
    ritz_m = _arnoldi_ritz(mv_minus, v0, min(n_inv_ritz, n))
    ritz_m = ritz_m[np.abs(ritz_m) > 1e-300]
    cand = np.concatenate([ritz_p, 1.0 / ritz_m])
    cand = cand[cand.real < 0]
    if cand.size == 0:
        return np.array([-1.0])
    # dedupe
    cand = np.unique(np.round(cand, 12))

    def damping(shifts, t):
        val = 1.0
        for q in shifts:
            val *= abs(t - q) / abs(t + np.conj(q))
        return val

    # first shift: the single candidate with the best worst-case damping
    best, best_val = None, np.inf
    for p in cand:
        worst = max(damping([p] if p.imag == 0 else [p, np.conj(p)], t) for t in cand)
        if worst < best_val:
            best, best_val = p, worst
    shifts = [best] if best.imag == 0 else [best, np.conj(best)]
    while len(shifts) < n_shifts:
        t_star = max(cand, key=lambda t: damping(shifts, t))
        if t_star.imag == 0:
            shifts.append(t_star)
        else:
            shifts.extend([t_star, np.conj(t_star)])
    # order pairs adjacently with +imag first so the ADI double step consumes them
    out = []
    seen = set()
    for p in shifts:
        key = (round(p.real, 12), round(abs(p.imag), 12))
        if p.imag != 0 and key in seen:
            continue
        seen.add(key)
        if p.imag == 0:
            out.append(complex(p.real, 0.0))
        else:
            out.append(complex(p.real, abs(p.imag)))
            out.append(complex(p.real, -abs(p.imag)))
    return np.array(out)


def _solver_dense(M):
    lu_piv = spla.lu_factor(M)
    return lambda rhs: spla.lu_solve(lu_piv, rhs)


def _shifted_solver(A, E, p):
    M = A + p * (sps.identity(A.shape[0], format="csc") if E is None else E)
    if _is_sparse(M):
        lu = spsla.splu(M.tocsc())
        return lu.solve
    return _solver_dense(M)


def _lr_adi(A, E, F, shifts, tol, max_iter):
    """Low-rank ADI for A X E^T + E X A^T + F F^T = 0, X ~ Z Z^T.

    Real arithmetic throughout; complex shift pairs are consumed with the
    standard double step.  The ADI residual factor W satisfies
    ``residual = ||W W^T||_F / ||F F^T||_F`` exactly, which is what the
    stopping test uses.
    """
    sparse = _is_sparse(A)
    if not sparse:
        A = _dense(A)
        E = None if E is None else _dense(E)
    W = _dense(F).astype(float)
    nrm0 = np.linalg.norm(W.T @ W)
    e_identity = E is None
    solvers = {}
    Z_blocks = []
    i = 0
    idx = 0
    nsh = len(shifts)
    residual = np.inf
    while i < max_iter:
        p = complex(shifts[idx % nsh])
        if p not in solvers:
            solvers[p] = _shifted_solver(A, E, p.real if p.imag == 0.0 else p)
        if p.imag == 0.0:
            a = p.real
            V = solvers[p](W)
            Z_blocks.append(np.sqrt(-2.0 * a) * V)
            EV = V if e_identity else E @ V
            W = W - 2.0 * a * EV
            idx += 1
            i += 1
        else:
            # complex pair (p, conj p): one complex solve, two real blocks
            a, b = p.real, p.imag
            V = solvers[p](W.astype(complex))
            delta = a / b
            V1 = V.real + delta * V.imag
            V2 = np.sqrt(delta * delta + 1.0) * V.imag
            g = np.sqrt(-2.0 * a)
            Z_blocks.append(g * V1)
            Z_blocks.append(g * V2)
            EV1 = V1 if e_identity else E @ V1
            W = W - 4.0 * a * EV1
            idx += 2
            i += 2
        residual = np.linalg.norm(W.T @ W) / nrm0
        if residual <= tol:
            break
    if residual > tol:
        raise ConvergenceError(
            f"low-rank ADI reached {residual:.2e} > tol {tol:.2e} after {max_iter} columns"
        )
    Z = np.hstack(Z_blocks)
    # drop columns that no longer carry mass
    col = np.linalg.norm(Z, axis=0)
    keep = col > COLUMN_DROP_TOL * col.max()
    return Z[:, keep]


def lyap_factor_lowrank(sys, tol=1e-8, max_iter=400, n_shifts=16):
    """Approximate low-rank Gramian factors via ADI with Penzl shifts."""
    A, E = sys.A, sys.E
    e_arg = None if sys.e_is_identity() else E
    B, C = _dense(sys.B), _dense(sys.C)
    shifts = penzl_shifts(A, e_arg, v0=B[:, 0].copy(), n_shifts=n_shifts)
    U = _lr_adi(A, e_arg, B, shifts, tol, max_iter)
    At = A.T.tocsr() if _is_sparse(A) else _dense(A).T
    Et = None if e_arg is None else (E.T.tocsr() if _is_sparse(E) else _dense(E).T)
    shifts_o = penzl_shifts(At, Et, v0=C[0, :].copy(), n_shifts=n_shifts)
    L = _lr_adi(At, Et, C.T, shifts_o, tol, max_iter)
    res_p = lowrank_residual(A, e_arg, U, B)
    res_q = lowrank_residual(At, Et, L, C.T)
    return GramianFactors(U=U, L=L, exact=False, residual_P=res_p, residual_Q=res_q)


def lowrank_residual(A, E, Z, F):
    """Explicit relative residual ||A Z Z^T E^T + E Z Z^T A^T + F F^T||_F / ||F F^T||_F.

    Computed from a thin QR of [A Z, E Z, F], so it stays cheap for tall
    skinny factors of large sparse systems.
    """
    AZ = _dense(A @ Z)
    EZ = Z if E is None else _dense(E @ Z)
    F = _dense(F)
    q = Z.shape[1]
    K = np.hstack([AZ, EZ, F])
    R = np.linalg.qr(K, mode="r")
    mid = np.zeros((K.shape[1], K.shape[1]))
    mid[:q, q : 2 * q] = np.eye(q)
    mid[q : 2 * q, :q] = np.eye(q)
    mid[2 * q :, 2 * q :] = np.eye(F.shape[1])
    num = np.linalg.norm(R @ mid @ R.T)
    den = np.linalg.norm(F.T @ F)
    return float(num / den)


def hankel_svd(factors, E=None):
    """Full SVD of L^T E U; returns (Z, sigma, Yh)."""
    U, L = factors.U, factors.L
    EU = U if E is None else _dense(E @ U)
    M = L.T @ EU
    Z, s, Yh = np.linalg.svd(M, full_matrices=False)
    return Z, s, Yh


def hankel_projection(factors, E, r):
    """Reduction bases W = L Z1 S1^-1/2, V = U Y1 S1^-1/2 for a chosen order r.

    ``sigma`` carries all singular values of L^T E U (the Hankel singular
    values when the factors are exact); raises when r exceeds the numerical
    rank.
    """
    e_arg = None
    if E is not None:
        n = factors.U.shape[0]
        ident = (E - sps.identity(n, format="csr")).nnz == 0 if _is_sparse(E) \
            else np.array_equal(_dense(E), np.eye(n))
        e_arg = None if ident else E
    Z, s, Yh = hankel_svd(factors, e_arg)
    rank = int(np.sum(s > RANK_FLOOR * s[0])) if s.size else 0
    if r < 1 or r > rank:
        raise RankError(f"requested order r={r} exceeds numerical rank {rank} of L^T E U")
    S1 = s[:r]
    Z1 = Z[:, :r]
    Y1 = Yh[:r, :].T
    scale = 1.0 / np.sqrt(S1)
    W = (factors.L @ Z1) * scale
    V = (factors.U @ Y1) * scale
    return ProjectionData(Z1=Z1, S1=S1, Y1=Y1, W=W, V=V, sigma=s)

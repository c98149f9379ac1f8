"""State-space realizations, transfer-function evaluation and the reciprocal map."""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as spla
import scipy.sparse as sps
import scipy.sparse.linalg as spsla

from .errors import DimensionError, SingularMatrixError, StabilityError

_EPS = np.finfo(float).eps

REDUCTION_METHODS = ("BT", "SPA", "SPA_DIRECT", "QUADBT", "QUADSPA")


def _is_sparse(M):
    return sps.issparse(M)


def _as_2d(M):
    A = np.atleast_2d(np.asarray(M))
    if not np.iscomplexobj(A):
        A = A.astype(float, copy=False)
    return A


@dataclass(frozen=True)
class StateSpace:
    """A (descriptor) LTI realization E x' = A x + B u, y = C x + D u.

    ``E`` defaults to the identity and may be omitted; sparse matrices are
    kept sparse.  Instances are immutable values; all operations in this
    module are pure functions of them.
    """

    A: object
    B: object
    C: object
    D: object = None
    E: object = None

    def __post_init__(self):
        A = self.A if _is_sparse(self.A) else _as_2d(self.A)
        if A.shape[0] != A.shape[1]:
            raise DimensionError(f"A must be square, got {A.shape}")
        n = A.shape[0]
        B = self.B if _is_sparse(self.B) else _as_2d(self.B)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        C = self.C if _is_sparse(self.C) else _as_2d(self.C)
        if B.shape[0] != n:
            raise DimensionError(f"B has {B.shape[0]} rows, expected {n}")
        if C.shape[1] != n:
            raise DimensionError(f"C has {C.shape[1]} columns, expected {n}")
        p, m = C.shape[0], B.shape[1]
        D = self.D
        if D is None:
            D = np.zeros((p, m))
        else:
            D = _as_2d(D)
            if D.shape != (p, m):
                raise DimensionError(f"D has shape {D.shape}, expected {(p, m)}")
        E = self.E
        if E is None:
            E = sps.identity(n, format="csr") if _is_sparse(A) else np.eye(n)
        elif not _is_sparse(E):
            E = _as_2d(E)
        if E.shape != (n, n):
            raise DimensionError(f"E has shape {E.shape}, expected {(n, n)}")
        for name, val in (("A", A), ("B", B), ("C", C), ("D", D), ("E", E)):
            object.__setattr__(self, name, val)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    @property
    def p(self):
        return self.C.shape[0]

    @property
    def is_sparse(self):
        return _is_sparse(self.A)

    def e_is_identity(self):
        if _is_sparse(self.E):
            return (self.E - sps.identity(self.n, format=self.E.format)).nnz == 0
        return np.array_equal(self.E, np.eye(self.n))


@dataclass(frozen=True)
class ReducedModel:
    """A reduced realization (E = I) together with reduction provenance."""

    sys: StateSpace
    method: str
    r: int
    hankel_used: object = None
    deviation_meta: object = None
    quad_context: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.method not in REDUCTION_METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")
        if self.sys.n != self.r:
            raise DimensionError(f"model order {self.sys.n} != r = {self.r}")
        if not self.sys.e_is_identity():
            raise DimensionError("reduced models must have E = I")


def _dense(M):
    return M.toarray() if _is_sparse(M) else np.asarray(M)


def _lu_with_rcond(M, what):
    """LU-factor a dense square matrix, raising if numerically singular."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", spla.LinAlgWarning)
        lu, piv = spla.lu_factor(M)
    anorm = np.linalg.norm(M, 1)
    if np.iscomplexobj(M):
        rcond = spla.lapack.zgecon(lu, anorm)[0]
    else:
        rcond = spla.lapack.dgecon(lu, anorm)[0]
    if not np.isfinite(rcond) or rcond < _EPS:
        raise SingularMatrixError(f"{what} is numerically singular (rcond={rcond:.2e})")
    return lu, piv


def _solver(M, what):
    """Return rhs -> M^-1 rhs for a dense or sparse square matrix."""
    if _is_sparse(M):
        try:
            lu = spsla.splu(M.tocsc())
        except RuntimeError as exc:
            raise SingularMatrixError(f"{what} is singular: {exc}") from exc
        return lambda rhs: lu.solve(np.asarray(rhs))
    lu_piv = _lu_with_rcond(M, what)
    return lambda rhs: spla.lu_solve(lu_piv, rhs)


def eval_tf(sys, s):
    """Evaluate the transfer function C (sE - A)^-1 B + D at one point ``s``."""
    pencil = complex(s) * sys.E - sys.A
    if _is_sparse(pencil):
        solve = _solver(pencil.astype(complex).tocsc(), f"pencil sE - A at s={s}")
        X = solve(_dense(sys.B).astype(complex))
    else:
        solve = _solver(pencil.astype(complex), f"pencil sE - A at s={s}")
        X = solve(np.asarray(sys.B, dtype=complex))
    return _dense(sys.C) @ X + sys.D


def tf_evaluator(sys):
    """Return a callable s -> H(s) amortized for many evaluation points.

    Dense systems are reduced once to (generalized) Schur form so each point
    costs a pair of triangular solves; sparse systems factor the shifted
    pencil per point.
    """
    if sys.is_sparse:
        B = _dense(sys.B)
        C = _dense(sys.C)

        def _eval(s):
            pencil = (complex(s) * sys.E - sys.A).astype(complex)
            solve = _solver(pencil.tocsc(), f"pencil sE - A at s={s}")
            return C @ solve(B.astype(complex)) + sys.D

        return _eval

    A = np.asarray(sys.A, dtype=complex)
    B = np.asarray(sys.B, dtype=complex)
    C = np.asarray(sys.C, dtype=complex)
    if sys.e_is_identity():
        T, Z = spla.schur(A, output="complex")
        Bt, Ct = Z.conj().T @ B, C @ Z
        eye = np.eye(sys.n)

        def _eval(s):
            try:
                X = spla.solve_triangular(s * eye - T, Bt)
            except np.linalg.LinAlgError as exc:
                raise SingularMatrixError(f"pencil sI - A singular at s={s}") from exc
            return Ct @ X + sys.D

        return _eval

    E = np.asarray(sys.E, dtype=complex)
    AA, EE, Q, Z = spla.qz(A, E, output="complex")
    Bt, Ct = Q.conj().T @ B, C @ Z

    def _eval(s):
        try:
            X = spla.solve_triangular(s * EE - AA, Bt)
        except np.linalg.LinAlgError as exc:
            raise SingularMatrixError(f"pencil sE - A singular at s={s}") from exc
        return Ct @ X + sys.D

    return _eval


def reciprocal(sys):
    """Map (E, A, B, C, D) to (E, E A^-1 E, E A^-1 B, -C A^-1 E, D - C A^-1 B).

    The transfer function of the result is s -> H(1/s); applying the map twice
    is the identity.  A is never inverted explicitly, only solved against.
    Note the result is dense even for a sparse input.
    """
    solve = _solver(sys.A.tocsc() if sys.is_sparse else sys.A, "A")
    E, B, C, D = _dense(sys.E), _dense(sys.B), _dense(sys.C), _dense(sys.D)
    AiE = solve(E)
    AiB = solve(B)
    return StateSpace(A=E @ AiE, B=E @ AiB, C=-C @ AiE, D=D - C @ AiB, E=E)


def strictly_proper_split(sys):
    """Split ``sys`` into (system with D = 0, D) so H(s) = H_sp(s) + D."""
    zero_d = StateSpace(A=sys.A, B=sys.B, C=sys.C, D=np.zeros((sys.p, sys.m)), E=sys.E)
    return zero_d, np.array(sys.D, copy=True)


def dc_moment(sys):
    """Steady-state gain H(0) = D - C A^-1 B, computed via a linear solve."""
    solve = _solver(sys.A.tocsc() if sys.is_sparse else sys.A, "A")
    return _dense(sys.D) - _dense(sys.C) @ solve(_dense(sys.B))


def is_stable(sys, max_dense=5000):
    """Return (stable?, spectral abscissa) for the pencil (E, A).

    Uses a dense eigensolver; systems beyond ``max_dense`` states are refused
    (callers at that scale must assert stability themselves).
    """
    if sys.n > max_dense:
        raise StabilityError(
            f"dense stability check refused for n={sys.n} > {max_dense}; "
            "assert stability externally at this scale"
        )
    A, E = _dense(sys.A), _dense(sys.E)
    _lu_with_rcond(E, "E")
    if sys.e_is_identity():
        lam = np.linalg.eigvals(A)
    else:
        lam = spla.eigvals(A, E)
    abscissa = float(np.max(lam.real))
    return abscissa < 0.0, abscissa


def random_stable(n, m, p, seed, spd_e=False):
    """Deterministic random asymptotically-stable system.

    A = Q (Lambda - 0.1 I) Q^T with Lambda block diagonal of stable 1x1 / 2x2
    blocks and Q random orthogonal; the 0.1 margin keeps poles away from the
    imaginary axis.  B, C are dense uniform in [-1, 1].  With ``spd_e`` the
    descriptor matrix is random symmetric positive definite (the construction
    keeps the symmetric part of A negative definite, so the pencil stays
    stable for any SPD E).
    """
    if min(n, m, p) < 1:
        raise DimensionError("n, m, p must all be >= 1")
    rng = np.random.default_rng(seed)
    Lam = np.zeros((n, n))
    i = 0
    while i < n:
        if i == n - 1 or rng.random() < 0.5:
            Lam[i, i] = -rng.uniform(0.05, 2.0)
            i += 1
        else:
            a = -rng.uniform(0.05, 2.0)
            b = rng.uniform(0.1, 3.0)
            Lam[i : i + 2, i : i + 2] = [[a, b], [-b, a]]
            i += 2
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    A = Q @ (Lam - 0.1 * np.eye(n)) @ Q.T
    B = rng.uniform(-1.0, 1.0, (n, m))
    C = rng.uniform(-1.0, 1.0, (p, n))
    E = None
    if spd_e:
        W = rng.standard_normal((n, n)) / np.sqrt(n)
        E = np.eye(n) + W @ W.T
    return StateSpace(A=A, B=B, C=C, D=np.zeros((p, m)), E=E)


def heat_1d(n, dense=False):
    """1D heat equation on (0, 1): tridiagonal Laplacian, one input, one output.

    The input heats the node at x = 1/3 and the output reads x = 2/3; sparse
    by default.
    """
    h2 = (n + 1) ** 2
    A = sps.diags([h2 * np.ones(n - 1), -2.0 * h2 * np.ones(n), h2 * np.ones(n - 1)],
                  offsets=[-1, 0, 1], format="csr")
    B = np.zeros((n, 1))
    B[n // 3, 0] = 1.0
    C = np.zeros((1, n))
    C[0, (2 * n) // 3] = 1.0
    if dense:
        return StateSpace(A=A.toarray(), B=B, C=C)
    return StateSpace(A=A, B=B, C=C)


def error_system(fom, rom):
    """Block-diagonal realization whose transfer function is H(s) - H_r(s)."""
    rsys = rom.sys if isinstance(rom, ReducedModel) else rom
    if (fom.m, fom.p) != (rsys.m, rsys.p):
        raise DimensionError(
            f"I/O dimensions differ: fom is {fom.p}x{fom.m}, rom is {rsys.p}x{rsys.m}"
        )
    if fom.is_sparse or rsys.is_sparse:
        A = sps.block_diag([fom.A, rsys.A], format="csr")
        E = sps.block_diag([fom.E, rsys.E], format="csr")
        B = np.vstack([_dense(fom.B), _dense(rsys.B)])
        C = np.hstack([_dense(fom.C), -_dense(rsys.C)])
    else:
        A = spla.block_diag(_dense(fom.A), _dense(rsys.A))
        E = spla.block_diag(_dense(fom.E), _dense(rsys.E))
        B = np.vstack([fom.B, rsys.B])
        C = np.hstack([fom.C, -rsys.C])
    return StateSpace(A=A, B=B, C=C, D=_dense(fom.D) - _dense(rsys.D), E=E)

"""Quadrature rules, data-matrix assembly and the realization-free reductions."""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, RankError, SingularMatrixError
from .samples import RAW_H, STRICTLY_PROPER, ZERO_SHIFTED, SampleSet, to_strictly_proper, \
    to_zero_shifted
from .system import ReducedModel, StateSpace

RANK_FLOOR = 1e-12
COINCIDENT_REL = 1e-12
TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and square-rooted weights for the two Gramian integrals.

    ``nodes_c`` / ``weights_c`` feed the controllability-side factor,
    ``nodes_o`` / ``weights_o`` the observability side.  ``positive_only``
    marks rules that cover only the positive frequency axis and rely on
    conjugate symmetry of the integrand (their weights are doubled).
    """

    nodes_c: np.ndarray
    weights_c: np.ndarray
    nodes_o: np.ndarray
    weights_o: np.ndarray
    positive_only: bool = True

    def __post_init__(self):
        for name in ("nodes_c", "weights_c", "nodes_o", "weights_o"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        for nodes, weights, side in ((self.nodes_c, self.weights_c, "c"),
                                     (self.nodes_o, self.weights_o, "o")):
            if nodes.size != weights.size:
                raise DimensionError(f"side {side}: {nodes.size} nodes vs {weights.size} weights")
            if nodes.size == 0 or nodes[0] <= 0:
                raise ValueError(f"side {side}: nodes must be positive frequencies")
            if np.any(np.diff(nodes) <= 0):
                raise ValueError(f"side {side}: nodes must be strictly increasing")
            if np.any(weights <= 0):
                raise ValueError(f"side {side}: weights must be positive")

    def scaled(self, c=1.0, d=1.0):
        """Rule with all rho multiplied by c and all phi by d (for invariance tests)."""
        return QuadratureRule(self.nodes_c, c * self.weights_c,
                              self.nodes_o, d * self.weights_o, self.positive_only)


def log_nodes(lo, hi, n):
    """n geometrically spaced points in [lo, hi], 0 < lo < hi."""
    if not (0 < lo < hi):
        raise ValueError(f"need 0 < lo < hi, got [{lo}, {hi}]")
    if n < 2:
        raise ValueError("need at least two nodes")
    return np.geomspace(lo, hi, n)


def trapezoid_rule(nodes, positive_only=True):
    """Square-rooted trapezoid weights for 1/(2 pi) * integral over the real line.

    Raw weights are the trapezoid half-interval lengths times 1/(2 pi),
    doubled under ``positive_only`` to account for the mirrored negative axis.
    """
    nodes = np.asarray(nodes, dtype=float)
    if nodes.size < 2 or np.any(np.diff(nodes) <= 0):
        raise ValueError("nodes must be strictly increasing with at least two points")
    w = np.empty_like(nodes)
    w[0] = (nodes[1] - nodes[0]) / 2.0
    w[-1] = (nodes[-1] - nodes[-2]) / 2.0
    w[1:-1] = (nodes[2:] - nodes[:-2]) / 2.0
    w = w / TWO_PI
    if positive_only:
        w = 2.0 * w
    return np.sqrt(w)


def make_trapezoid_rule(nodes_c, nodes_o, positive_only=True):
    """Convenience constructor pairing both sides with trapezoid weights."""
    return QuadratureRule(nodes_c, trapezoid_rule(nodes_c, positive_only),
                          nodes_o, trapezoid_rule(nodes_o, positive_only),
                          positive_only)


@dataclass(frozen=True)
class QuadDataMatrices:
    """Data matrices assembled from samples: the quadrature stand-ins for
    L^T U (N), L^T A U (M), L^T B (T) and C U (G, stored as the p x (Np m)
    transpose).  Block rows follow the observability nodes, block columns the
    controllability nodes."""

    N: np.ndarray
    M: np.ndarray
    T: np.ndarray
    G: np.ndarray
    flavor: str


def _assemble(nodes_c, rho, vals_c, nodes_o, phi, vals_o, flavor, deriv_at=None):
    """Divided-difference assembly shared by both flavors.

    Nodes are signed reals (s = i * node); ``vals_*`` are samples of the
    strictly proper part (BT flavor) or the zero-shifted function (SPA
    flavor).  Block rows follow the observability nodes xi_j, block columns
    the controllability nodes omega_k.  For the SPA flavor, coincident node
    pairs take the derivative route; ``deriv_at(node)`` must return dH/ds at
    i * node.
    """
    p, m = vals_o.shape[1], vals_c.shape[2]
    Np_c, Np_o = nodes_c.size, nodes_o.size
    sc = (1j * nodes_c)[None, :, None, None]          # i omega_k
    so = (1j * nodes_o)[:, None, None, None]          # i xi_j
    coeff = (phi[:, None] * rho[None, :])[:, :, None, None]
    Vc = vals_c[None, :, :, :]
    Vo = vals_o[:, None, :, :]
    coincident = np.abs(nodes_c[None, :] - nodes_o[:, None]) <= COINCIDENT_REL * np.maximum(
        np.abs(nodes_c)[None, :], np.abs(nodes_o)[:, None])
    den = sc - so
    den = np.where(coincident[:, :, None, None], 1.0, den)
    N4 = -coeff * (Vc - Vo) / den
    if flavor == "bt":
        M4 = -coeff * (sc * Vc - so * Vo) / den
    else:
        M4 = -coeff * (Vc / sc - Vo / so) / den
    if np.any(coincident):
        if flavor == "bt":
            raise ValueError("coincident omega_k = xi_j nodes: the BT flavor has no "
                             "derivative path; perturb the node sets")
        if deriv_at is None:
            raise ValueError("coincident omega_k = xi_j nodes require derivative samples")
        for j, k in zip(*np.nonzero(coincident)):
            dH = deriv_at(nodes_o[j])
            s_j = 1j * nodes_o[j]
            c = phi[j] * rho[k]
            N4[j, k] = -c * dH
            M4[j, k] = -c * (dH / s_j - vals_o[j] / s_j**2)
    N = N4.transpose(0, 2, 1, 3).reshape(Np_o * p, Np_c * m)
    M = M4.transpose(0, 2, 1, 3).reshape(Np_o * p, Np_c * m)
    if flavor == "bt":
        T = (phi[:, None, None] * vals_o).reshape(Np_o * p, m)
        G = np.concatenate(list(rho[:, None, None] * vals_c), axis=1)
    else:
        T = ((phi / nodes_o)[:, None, None] * vals_o).reshape(Np_o * p, m)
        G = np.concatenate(list((rho / nodes_c)[:, None, None] * vals_c), axis=1)
    return N, M, T, G


def _check_alignment(samples_c, samples_o, rule):
    if not np.allclose(samples_c.nodes, rule.nodes_c, rtol=COINCIDENT_REL, atol=0):
        raise ValueError("controllability samples are not aligned with rule.nodes_c")
    if not np.allclose(samples_o.nodes, rule.nodes_o, rtol=COINCIDENT_REL, atol=0):
        raise ValueError("observability samples are not aligned with rule.nodes_o")
    if (samples_c.p, samples_c.m) != (samples_o.p, samples_o.m):
        raise DimensionError("sample sets have different I/O dimensions")


def quadbt_matrices(samples_c, samples_o, rule):
    """BT-flavor data matrices from strictly proper samples (distinct nodes only)."""
    for s in (samples_c, samples_o):
        if s.kind != STRICTLY_PROPER:
            raise ValueError(f"BT flavor needs strictly proper samples, got {s.kind!r}")
    _check_alignment(samples_c, samples_o, rule)
    N, M, T, G = _assemble(rule.nodes_c, rule.weights_c, samples_c.values,
                           rule.nodes_o, rule.weights_o, samples_o.values, "bt")
    return QuadDataMatrices(N=N, M=M, T=T, G=G, flavor="bt")


def quadspa_matrices(samples_c, samples_o, rule, derivative_samples=None):
    """SPA-flavor data matrices from zero-shifted samples.

    All nodes must be nonzero (guaranteed by the rule); coincident node pairs
    are admitted when ``derivative_samples`` provides dH/ds there.
    """
    for s in (samples_c, samples_o):
        if s.kind != ZERO_SHIFTED:
            raise ValueError(f"SPA flavor needs zero-shifted samples, got {s.kind!r}")
    _check_alignment(samples_c, samples_o, rule)
    deriv_at = None
    if derivative_samples is not None:
        deriv_at = derivative_samples.value_at
    N, M, T, G = _assemble(rule.nodes_c, rule.weights_c, samples_c.values,
                           rule.nodes_o, rule.weights_o, samples_o.values, "spa",
                           deriv_at=deriv_at)
    return QuadDataMatrices(N=N, M=M, T=T, G=G, flavor="spa")


def _svd_slices(N, r):
    Z, s, Yh = np.linalg.svd(N, full_matrices=False)
    if r < 1:
        raise RankError("requested order must be at least 1")
    rank = int(np.sum(s > RANK_FLOOR * s[0])) if s.size else 0
    if r > rank:
        raise RankError(f"requested order r={r} exceeds numerical rank {rank} of the data matrix")
    scale = 1.0 / np.sqrt(s[:r])
    Z1 = Z[:, :r] * scale
    Y1 = Yh[:r, :].conj().T * scale
    return Z1, Y1, s


def _rom_from_matrices(mats, r, dc_like):
    """Assemble (A_r, B_r, C_r) from data matrices plus the flavor's D handling."""
    Z1, Y1, s = _svd_slices(mats.N, r)
    Ar = Z1.conj().T @ mats.M @ Y1
    Br = Z1.conj().T @ mats.T
    Cr = mats.G @ Y1
    if mats.flavor == "bt":
        return Ar, Br, Cr, np.asarray(dc_like), s
    # SPA flavor: reciprocal transform of the intermediate ROM
    try:
        Ainv = np.linalg.inv(Ar)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("intermediate quad ROM matrix is singular") from exc
    Dr = np.asarray(dc_like, dtype=complex)
    Br_f = Ainv @ Br
    Cr_f = -Cr @ Ainv
    Dr_f = Dr + Cr_f @ Br
    return Ainv, Br_f, Cr_f, Dr_f, s


@dataclass(frozen=True)
class QuadContext:
    """Build inputs retained on quad ROMs so realification can re-assemble."""

    samples_c: SampleSet
    samples_o: SampleSet
    rule: QuadratureRule
    derivative_samples: object
    dc_like: np.ndarray
    flavor: str


def _prepare_bt_samples(samples_c, samples_o, d):
    if samples_c.kind == RAW_H:
        if d is None:
            d = samples_c.D
        if d is None:
            raise ValueError("raw samples need a feedthrough D to form the strictly proper part")
        samples_c = to_strictly_proper(samples_c, d)
        samples_o = to_strictly_proper(samples_o, d)
    if d is None:
        d = samples_c.D
    if d is None:
        raise ValueError("feedthrough D is required (it becomes D_r)")
    return samples_c, samples_o, np.atleast_2d(np.asarray(d, dtype=float))


def quadbt(samples_c, samples_o, rule, r, d=None):
    """Realization-free balanced truncation from transfer-function samples.

    Raw samples are converted to the strictly proper part using ``d`` (or the
    feedthrough recorded on the sample set).  The result is complex-valued;
    apply :func:`realify` for a real realization.
    """
    samples_c, samples_o, D = _prepare_bt_samples(samples_c, samples_o, d)
    mats = quadbt_matrices(samples_c, samples_o, rule)
    Ar, Br, Cr, Dr, s = _rom_from_matrices(mats, r, D)
    ctx = QuadContext(samples_c, samples_o, rule, None, D, "bt")
    rom = StateSpace(A=Ar, B=Br, C=Cr, D=Dr)
    return ReducedModel(sys=rom, method="QUADBT", r=r, hankel_used=s[:r].copy(),
                        quad_context=ctx)


def _prepare_spa_samples(samples_c, samples_o, h0):
    if samples_c.kind == RAW_H:
        if h0 is None:
            raise ValueError("raw samples need the DC moment H(0) to form H - H(0)")
        samples_c = to_zero_shifted(samples_c, h0)
        samples_o = to_zero_shifted(samples_o, h0)
    if h0 is None:
        h0 = samples_c.H0_ref
    if h0 is None:
        raise ValueError("the DC moment H(0) is required (it becomes the intermediate D)")
    return samples_c, samples_o, np.atleast_2d(np.asarray(h0))


def quadspa(samples_c, samples_o, rule, r, h0=None, derivative_samples=None):
    """Realization-free singular perturbation approximation from samples.

    Needs the DC moment H(0) (feedthrough of the reciprocal system); nodes
    must be nonzero, and coincident node pairs additionally require
    ``derivative_samples``.  Interpolates the data at s = 0 by construction.
    """
    samples_c, samples_o, H0 = _prepare_spa_samples(samples_c, samples_o, h0)
    mats = quadspa_matrices(samples_c, samples_o, rule, derivative_samples)
    Ar, Br, Cr, Dr, s = _rom_from_matrices(mats, r, H0)
    ctx = QuadContext(samples_c, samples_o, rule, derivative_samples, H0, "spa")
    rom = StateSpace(A=Ar, B=Br, C=Cr, D=Dr)
    return ReducedModel(sys=rom, method="QUADSPA", r=r, hankel_used=s[:r].copy(),
                        quad_context=ctx)


# --------------------------------------------------------------------------
# realification


def _signed_extension(samples, nodes, weights):
    """Interleave (+node, -node) with conj-extended values and halved weights."""
    order = np.argsort(nodes)
    nodes, weights = nodes[order], weights[order]
    vals = samples.values[order]
    n = nodes.size
    s_nodes = np.empty(2 * n)
    s_w = np.empty(2 * n)
    s_vals = np.empty((2 * n,) + vals.shape[1:], dtype=complex)
    s_nodes[0::2], s_nodes[1::2] = nodes, -nodes
    s_w[0::2] = s_w[1::2] = weights / np.sqrt(2.0)
    s_vals[0::2] = vals
    s_vals[1::2] = np.conj(vals)
    return s_nodes, s_w, s_vals


def _pairing(n_pairs, blk):
    """Unitary block transform sending sample pairs (x, conj x) to real data."""
    base = np.array([[1.0, 1.0], [-1j, 1j]]) / np.sqrt(2.0)
    P = np.zeros((2 * n_pairs * blk, 2 * n_pairs * blk), dtype=complex)
    eye = np.eye(blk)
    for i in range(n_pairs):
        a = 2 * i * blk
        P[a : a + blk, a : a + blk] = base[0, 0] * eye
        P[a : a + blk, a + blk : a + 2 * blk] = base[0, 1] * eye
        P[a + blk : a + 2 * blk, a : a + blk] = base[1, 0] * eye
        P[a + blk : a + 2 * blk, a + blk : a + 2 * blk] = base[1, 1] * eye
    return P


def conjugate_extended_matrices(samples_c, samples_o, rule, flavor,
                                derivative_samples=None, pairing=True):
    """Data matrices over the conjugate-closed node extension (+i w, -i w).

    With ``pairing`` the fixed unitary block transform that sends each
    conjugate sample pair to its real/imaginary parts is applied, leaving
    matrices that are real up to roundoff; ``max_imag`` reports the worst
    imaginary magnitude so the caller can assert before casting.  Without
    ``pairing`` the raw extended complex matrices are returned (their ROM has
    the same transfer function, the transform being unitary).
    """
    if not rule.positive_only:
        raise ValueError("realification needs a conjugate-closed node set "
                         "(rule.positive_only must be true)")
    _check_alignment(samples_c, samples_o, rule)
    deriv_at = None
    if derivative_samples is not None:
        base = derivative_samples.value_at

        def deriv_at(node):
            # derivative of a real-coefficient H at conj(s) is conj(dH/ds)
            return base(node) if node > 0 else np.conj(base(-node))

    nc, rc, vc = _signed_extension(samples_c, rule.nodes_c, rule.weights_c)
    no, ro, vo = _signed_extension(samples_o, rule.nodes_o, rule.weights_o)
    N, M, T, G = _assemble(nc, rc, vc, no, ro, vo, flavor, deriv_at=deriv_at)
    p, m = samples_o.p, samples_c.m
    if flavor == "spa":
        # the 1/node factor scaling makes the negative-node block the *negated*
        # conjugate of its partner; flipping those blocks (a diagonal +-1
        # unitary, transfer-invariant) restores the plain conjugate pairing
        d_o = np.repeat(np.sign(no), p)
        d_c = np.repeat(np.sign(nc), m)
        N = N * d_o[:, None] * d_c[None, :]
        M = M * d_o[:, None] * d_c[None, :]
        T = T * d_o[:, None]
        G = G * d_c[None, :]
    if not pairing:
        return QuadDataMatrices(N=N, M=M, T=T, G=G, flavor=flavor), None
    Pi_o = _pairing(rule.nodes_o.size, p)
    Pi_c = _pairing(rule.nodes_c.size, m)
    N = Pi_o @ N @ Pi_c.conj().T
    M = Pi_o @ M @ Pi_c.conj().T
    T = Pi_o @ T
    G = G @ Pi_c.conj().T
    max_imag = max(float(np.max(np.abs(x.imag))) for x in (N, M, T, G))
    return QuadDataMatrices(N=N, M=M, T=T, G=G, flavor=flavor), max_imag


def realified_matrices(samples_c, samples_o, rule, flavor, derivative_samples=None):
    """Conjugate-pair-extended data matrices after the realifying transform."""
    return conjugate_extended_matrices(samples_c, samples_o, rule, flavor,
                                       derivative_samples, pairing=True)


def realify(rom, rule=None):
    """Real-valued re-assembly of a quad ROM over the conjugate-closed node set.

    Rebuilds the data matrices with the (+i omega, -i omega) extension,
    applies the fixed unitary pairing transform that makes them real, and
    re-assembles; the transfer function agrees with the complex ROM built
    from the same extended data to roundoff.
    """
    ctx = rom.quad_context
    if ctx is None:
        raise ValueError("rom does not carry quadrature build data; "
                         "realify only applies to quadbt/quadspa results")
    rule = ctx.rule if rule is None else rule
    mats, max_imag = realified_matrices(ctx.samples_c, ctx.samples_o, rule, ctx.flavor,
                                        ctx.derivative_samples)
    if max_imag > 1e-10:
        raise ValueError(f"pairing transform left imaginary residue {max_imag:.2e}")
    real_mats = QuadDataMatrices(N=mats.N.real, M=mats.M.real, T=mats.T.real,
                                 G=mats.G.real, flavor=mats.flavor)
    dc = np.asarray(ctx.dc_like)
    if np.iscomplexobj(dc):
        dc = dc.real
    Ar, Br, Cr, Dr, s = _rom_from_matrices(real_mats, rom.r, dc)
    sys_r = StateSpace(A=np.real(Ar), B=np.real(Br), C=np.real(Cr), D=np.real(Dr))
    return ReducedModel(sys=sys_r, method=rom.method, r=rom.r, hankel_used=s[: rom.r].copy(),
                        deviation_meta=f"realified; data imag residue {max_imag:.2e}",
                        quad_context=ctx)

"""Transfer-function sample sets: oracle-mode sampling and measured-data handling."""

from dataclasses import dataclass, replace

import numpy as np

from .errors import BalkitError, DimensionError
from .system import StateSpace, _dense, _solver, tf_evaluator

RAW_H = "raw_h"
STRICTLY_PROPER = "strictly_proper"
ZERO_SHIFTED = "zero_shifted"
DERIVATIVE = "derivative"
KINDS = (RAW_H, STRICTLY_PROPER, ZERO_SHIFTED, DERIVATIVE)

NODE_MATCH_REL = 1e-12


@dataclass(frozen=True)
class SampleSet:
    """Transfer-function evaluations at imaginary-axis points i * node.

    ``values`` has shape (len(nodes), p, m).  ``kind`` records what the
    values are samples of (the raw transfer function, its strictly proper
    part, the zero-shifted H(s) - H(0), or the derivative dH/ds).  ``D`` and
    ``H0_ref`` carry the feedthrough / DC values used to produce shifted
    kinds, when known.
    """

    nodes: np.ndarray
    values: np.ndarray
    kind: str
    D: object = None
    H0_ref: object = None

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if values.ndim == 1:
            values = values.reshape(-1, 1, 1)
        if nodes.ndim != 1 or values.ndim != 3 or values.shape[0] != nodes.size:
            raise DimensionError(
                f"need one p x m value per node, got {values.shape} for {nodes.size} nodes"
            )
        if np.any(nodes <= 0):
            raise ValueError("sample nodes must be positive frequencies")
        if self.kind not in KINDS:
            raise ValueError(f"unknown sample kind {self.kind!r}")
        d = None if self.D is None else np.atleast_2d(np.asarray(self.D, dtype=float))
        h0 = None if self.H0_ref is None else np.atleast_2d(np.asarray(self.H0_ref))
        for name, val in (("nodes", nodes), ("values", values), ("D", d), ("H0_ref", h0)):
            object.__setattr__(self, name, val)

    @property
    def p(self):
        return self.values.shape[1]

    @property
    def m(self):
        return self.values.shape[2]

    def value_at(self, node):
        """Sample at a given node (matched to relative tolerance)."""
        i = np.argmin(np.abs(self.nodes - node))
        if abs(self.nodes[i] - node) > NODE_MATCH_REL * max(abs(node), 1.0):
            raise KeyError(f"no sample at node {node}")
        return self.values[i]

    def restrict(self, nodes):
        """Sub-sample-set at the given nodes (all must be present)."""
        idx = []
        for w in np.asarray(nodes, dtype=float):
            i = np.argmin(np.abs(self.nodes - w))
            if abs(self.nodes[i] - w) > NODE_MATCH_REL * max(abs(w), 1.0):
                raise KeyError(f"no sample at node {w}")
            idx.append(i)
        return replace(self, nodes=self.nodes[idx], values=self.values[idx])


def sample_tf(sys, nodes):
    """Evaluate H(i * node) for every node; oracle-mode data generation."""
    nodes = np.asarray(nodes, dtype=float)
    evaluate = tf_evaluator(sys)
    values = np.stack([evaluate(1j * w) for w in nodes])
    return SampleSet(nodes=nodes, values=values, kind=RAW_H, D=np.array(sys.D, copy=True))


def sample_tf_derivative(sys, nodes):
    """Evaluate dH/ds at s = i * node, via -C (sE-A)^-1 E (sE-A)^-1 B."""
    nodes = np.asarray(nodes, dtype=float)
    B, C, E = _dense(sys.B), _dense(sys.C), sys.E
    values = []
    for w in nodes:
        pencil = 1j * w * sys.E - sys.A
        solve = _solver(pencil.astype(complex).tocsc() if sys.is_sparse
                        else np.asarray(pencil, complex), f"pencil at s={1j * w}")
        v1 = solve(B.astype(complex))
        v2 = solve(_dense(E @ v1))
        values.append(-C @ v2)
    return SampleSet(nodes=nodes, values=np.stack(values), kind=DERIVATIVE)


def estimate_feedthrough(source, d=None):
    """Feedthrough D with an uncertainty estimate.

    Passing ``d`` returns it verbatim (uncertainty 0); a :class:`StateSpace`
    source yields the exact realization D; a :class:`SampleSet` source uses
    the real part of its highest-frequency sample, reporting the magnitude of
    the imaginary part as elementwise uncertainty.
    """
    if d is not None:
        d = np.atleast_2d(np.asarray(d, dtype=float))
        return d, np.zeros_like(d)
    if isinstance(source, StateSpace):
        D = np.array(_dense(source.D), copy=True)
        return D, np.zeros_like(D)
    if isinstance(source, SampleSet):
        if source.nodes.size == 0:
            raise BalkitError("no samples to estimate the feedthrough from")
        i = int(np.argmax(source.nodes))
        v = source.values[i]
        return v.real.copy(), np.abs(v.imag)
    raise TypeError(f"cannot estimate feedthrough from {type(source).__name__}")


def to_strictly_proper(samples, d):
    """Subtract the feedthrough from raw samples: H_sp = H - D."""
    if samples.kind != RAW_H:
        raise ValueError(f"expected {RAW_H!r} samples, got {samples.kind!r}")
    d = np.atleast_2d(np.asarray(d, dtype=float))
    if d.shape != (samples.p, samples.m):
        raise DimensionError(f"D has shape {d.shape}, expected {(samples.p, samples.m)}")
    return SampleSet(nodes=samples.nodes, values=samples.values - d,
                     kind=STRICTLY_PROPER, D=d)


def to_zero_shifted(samples, h0):
    """Subtract the DC value from raw samples: H_0 = H - H(0)."""
    if samples.kind != RAW_H:
        raise ValueError(f"expected {RAW_H!r} samples, got {samples.kind!r}")
    h0 = np.atleast_2d(np.asarray(h0))
    if h0.shape != (samples.p, samples.m):
        raise DimensionError(f"H0 has shape {h0.shape}, expected {(samples.p, samples.m)}")
    return SampleSet(nodes=samples.nodes, values=samples.values - h0,
                     kind=ZERO_SHIFTED, D=samples.D, H0_ref=h0)

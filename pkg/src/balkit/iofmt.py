"""File formats: Matrix Market system manifests, ROM JSON, sample CSV + sidecar."""

import csv
import json
import os

import numpy as np
import scipy.io as spio
import scipy.sparse as sps

from .errors import DimensionError, FormatError
from .samples import KINDS, SampleSet
from .system import ReducedModel, StateSpace, _dense, _is_sparse


def _read_matrix(path, name):
    if not os.path.exists(path):
        raise FormatError(f"matrix file for {name} not found: {path}")
    try:
        M = spio.mmread(path)
    except Exception as exc:
        raise FormatError(f"cannot parse {path} for {name}: {exc}") from exc
    return M.tocsr() if sps.issparse(M) else np.asarray(M, dtype=float)


def load_system(manifest_path):
    """Assemble a StateSpace from a JSON manifest naming Matrix Market files.

    The manifest must name files for "A", "B", "C"; "E" defaults to the
    identity and "D" to zero.  Paths are resolved relative to the manifest.
    Sparse inputs stay sparse.
    """
    try:
        with open(manifest_path) as fh:
            manifest = json.load(fh)
    except OSError:
        raise
    except json.JSONDecodeError as exc:
        raise FormatError(f"manifest {manifest_path}: invalid JSON at line {exc.lineno}") from exc
    base = os.path.dirname(os.path.abspath(manifest_path))
    mats = {}
    for name in ("A", "B", "C", "E", "D"):
        if name in manifest:
            mats[name] = _read_matrix(os.path.join(base, manifest[name]), name)
        elif name in ("A", "B", "C"):
            raise FormatError(f"manifest {manifest_path} is missing required entry {name!r}")
    n = mats["A"].shape[0]
    if mats["A"].shape[1] != n:
        raise FormatError(f"{manifest['A']}: A must be square, got {mats['A'].shape}")
    if mats["B"].shape[0] != n:
        raise FormatError(
            f"{manifest['B']}: B has {mats['B'].shape[0]} rows, expected {n}")
    if mats["C"].shape[1] != n:
        raise FormatError(
            f"{manifest['C']}: C has {mats['C'].shape[1]} columns, expected {n}")
    if "E" in mats and mats["E"].shape != (n, n):
        raise FormatError(f"{manifest['E']}: E has shape {mats['E'].shape}, expected {(n, n)}")
    D = mats.get("D")
    if D is not None:
        D = _dense(D)
    try:
        return StateSpace(A=mats["A"], B=mats["B"], C=mats["C"], D=D, E=mats.get("E"))
    except DimensionError as exc:
        raise FormatError(f"manifest {manifest_path}: {exc}") from exc


def save_system(dirpath, sys, name="system"):
    """Write a system as Matrix Market files plus a manifest; returns the manifest path."""
    os.makedirs(dirpath, exist_ok=True)
    manifest = {}
    entries = [("A", sys.A), ("B", sys.B), ("C", sys.C)]
    if not sys.e_is_identity():
        entries.append(("E", sys.E))
    if np.any(_dense(sys.D) != 0):
        entries.append(("D", sys.D))
    for key, M in entries:
        fname = f"{name}_{key}.mtx"
        spio.mmwrite(os.path.join(dirpath, fname), M if _is_sparse(M) else np.asarray(M))
        manifest[key] = fname
    path = os.path.join(dirpath, f"{name}.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=1)
    return path


def _matrix_to_lists(M):
    M = np.asarray(M)
    if np.iscomplexobj(M):
        return {"re": M.real.tolist(), "im": M.imag.tolist()}
    return M.tolist()


def _matrix_from_lists(obj, name):
    if isinstance(obj, dict):
        if set(obj) != {"re", "im"}:
            raise FormatError(f"field {name}: complex matrices need 're' and 'im'")
        return np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    return np.asarray(obj, dtype=float)


def save_rom(path, rom):
    """ROM JSON: method, r, dense row-major A/B/C/D, retained Hankel values.

    Floats are written with Python's shortest round-trip repr, so reading the
    file back reproduces every entry bit-exactly.
    """
    doc = {
        "method": rom.method,
        "r": int(rom.r),
        "A": _matrix_to_lists(rom.sys.A),
        "B": _matrix_to_lists(rom.sys.B),
        "C": _matrix_to_lists(rom.sys.C),
        "D": _matrix_to_lists(rom.sys.D),
        "hankel_used": None if rom.hankel_used is None else
            np.asarray(rom.hankel_used, dtype=float).tolist(),
    }
    if rom.deviation_meta is not None:
        doc["deviation_meta"] = str(rom.deviation_meta)
    with open(path, "w") as fh:
        json.dump(doc, fh)
    return path


def load_rom(path):
    """Inverse of :func:`save_rom`; schema violations raise FormatError."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON at line {exc.lineno}") from exc
    for field in ("method", "r", "A", "B", "C", "D"):
        if field not in doc:
            raise FormatError(f"{path}: missing required field {field!r}")
    try:
        sys = StateSpace(
            A=_matrix_from_lists(doc["A"], "A"), B=_matrix_from_lists(doc["B"], "B"),
            C=_matrix_from_lists(doc["C"], "C"), D=_matrix_from_lists(doc["D"], "D"))
        hankel = doc.get("hankel_used")
        return ReducedModel(
            sys=sys, method=doc["method"], r=int(doc["r"]),
            hankel_used=None if hankel is None else np.asarray(hankel, dtype=float),
            deviation_meta=doc.get("deviation_meta"))
    except (DimensionError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from exc


def _sample_header(p, m):
    cols = ["omega"]
    for i in range(1, p + 1):
        for j in range(1, m + 1):
            cols += [f"re_{i}{j}", f"im_{i}{j}"]
    return cols


def save_samples(path, samples, sidecar_path=None):
    """Sample CSV (omega, re_ij, im_ij row-major over p x m) plus JSON sidecar."""
    sidecar_path = sidecar_path or path + ".json"
    p, m = samples.p, samples.m
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_sample_header(p, m))
        for w, V in zip(samples.nodes, samples.values):
            row = [repr(float(w))]
            for i in range(p):
                for j in range(m):
                    row += [repr(float(V[i, j].real)), repr(float(V[i, j].imag))]
            writer.writerow(row)
    side = {"m": m, "p": p, "kind": samples.kind, "count": int(samples.nodes.size)}
    if samples.D is not None:
        side["D"] = _matrix_to_lists(samples.D)
    if samples.H0_ref is not None:
        side["H0"] = _matrix_to_lists(samples.H0_ref)
    with open(sidecar_path, "w") as fh:
        json.dump(side, fh)
    return path, sidecar_path


def load_samples(path, sidecar_path=None):
    """Inverse of :func:`save_samples`, validating row shape and counts."""
    sidecar_path = sidecar_path or path + ".json"
    with open(sidecar_path) as fh:
        try:
            side = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{sidecar_path}: invalid JSON at line {exc.lineno}") from exc
    for field in ("m", "p", "kind", "count"):
        if field not in side:
            raise FormatError(f"{sidecar_path}: missing required field {field!r}")
    p, m = int(side["p"]), int(side["m"])
    if side["kind"] not in KINDS:
        raise FormatError(f"{sidecar_path}: unknown kind {side['kind']!r}")
    expected = _sample_header(p, m)
    nodes, values = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        if [c.strip() for c in header] != expected:
            raise FormatError(f"{path}: header does not match a {p}x{m} sample file")
        for idx, row in enumerate(reader, start=2):
            if len(row) != len(expected):
                raise FormatError(
                    f"{path}: row {idx} has {len(row)} columns, expected {len(expected)}")
            try:
                data = [float(x) for x in row]
            except ValueError as exc:
                raise FormatError(f"{path}: row {idx}: {exc}") from exc
            nodes.append(data[0])
            V = np.array(data[1::2]) + 1j * np.array(data[2::2])
            values.append(V.reshape(p, m))
    if len(nodes) != int(side["count"]):
        raise FormatError(
            f"{path}: {len(nodes)} data rows but sidecar declares {side['count']}")
    D = _matrix_from_lists(side["D"], "D") if "D" in side else None
    H0 = _matrix_from_lists(side["H0"], "H0") if "H0" in side else None
    return SampleSet(nodes=np.array(nodes), values=np.array(values), kind=side["kind"],
                     D=D, H0_ref=H0)

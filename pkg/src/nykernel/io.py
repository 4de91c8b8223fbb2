"""Readers and writers for kernel, label, landmark and model files.

Floats are written with ``repr`` so text files round-trip value-exactly.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .classifiers import IkfdModel, OneVsRestModel, PcvmModel
from .errors import ValidationError
from .landmarks import LandmarkReport

TEXT_MAGIC = "NYK1"
BINARY_MAGIC = b"NYKB"


def _fmt(values) -> str:
    return " ".join(repr(float(v)) for v in np.ravel(values))


def _ints(values) -> str:
    return " ".join(str(int(v)) for v in np.ravel(values))


# --------------------------------------------------------------------------
# kernel matrices


def write_kernel(path, K, binary: bool = False) -> None:
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValidationError("kernel matrix must be square")
    n = K.shape[0]
    if binary:
        with open(path, "wb") as fh:
            fh.write(BINARY_MAGIC)
            fh.write(struct.pack("<Q", n))
            fh.write(np.ascontiguousarray(K, dtype="<f8").tobytes())
        return
    with open(path, "w") as fh:
        fh.write(f"{TEXT_MAGIC} {n}\n")
        for row in K:
            fh.write(_fmt(row) + "\n")


def read_kernel(path) -> np.ndarray:
    """Read a NYK1 (text) or NYKB (binary) kernel file."""
    with open(path, "rb") as fh:
        head = fh.read(4)
        if head == BINARY_MAGIC:
            raw = fh.read(8)
            if len(raw) != 8:
                raise ValidationError(f"{path}: truncated NYKB header")
            (n,) = struct.unpack("<Q", raw)
            data = fh.read()
            if len(data) != 8 * n * n:
                raise ValidationError(f"{path}: expected {n * n} doubles, got {len(data) // 8}")
            return np.frombuffer(data, dtype="<f8").reshape(n, n).astype(float)
        text = (head + fh.read()).decode("ascii", errors="replace")
    lines = text.splitlines()
    parts = lines[0].split() if lines else []
    if len(parts) != 2 or parts[0] != TEXT_MAGIC:
        raise ValidationError(f"{path}: missing '{TEXT_MAGIC} <n>' header")
    try:
        n = int(parts[1])
        rows = [[float(v) for v in ln.split()] for ln in lines[1:] if ln.strip()]
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValidationError(f"{path}: expected {n} rows of {n} values")
    return np.array(rows, dtype=float).reshape(n, n)


def write_labels(path, labels) -> None:
    Path(path).write_text("".join(f"{int(v)}\n" for v in np.ravel(labels)))


def read_labels(path) -> np.ndarray:
    try:
        vals = [int(ln) for ln in Path(path).read_text().split()]
    except ValueError as exc:
        raise ValidationError(f"{path}: labels must be integers ({exc})") from exc
    return np.array(vals, dtype=int)


def read_matrix(path) -> np.ndarray:
    """Plain whitespace-separated rows (test kernel rows)."""
    try:
        return np.atleast_2d(np.loadtxt(path, dtype=float, ndmin=2))
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


# --------------------------------------------------------------------------
# landmark reports


def write_landmarks(path, report: LandmarkReport) -> None:
    lines = [report.method]
    if report.method == "meb":
        lines.append(f"eps {report.epsilon!r}")
    else:
        lines.append(f"m {report.m}")
    lines.append(f"seed {report.seed}")
    lines += [str(int(i)) for i in report.indices]
    Path(path).write_text("\n".join(lines) + "\n")


def read_landmarks(path) -> LandmarkReport:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if len(lines) < 3 or lines[0] not in ("meb", "kmeans", "random"):
        raise ValidationError(f"{path}: not a landmark file")
    try:
        key, val = lines[1].split()
        _, seed = lines[2].split()
        idx = np.array([int(v) for v in lines[3:]], dtype=int)
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    eps = float(val) if key == "eps" else None
    m = int(val) if key == "m" else None
    seed_val = None if seed == "None" else int(seed)
    return LandmarkReport(idx, lines[0], epsilon=eps, m=m, seed=seed_val)


# --------------------------------------------------------------------------
# models


def _ikfd_lines(M: IkfdModel) -> list:
    m = 0 if M.landmarks is None else len(M.landmarks)
    (mp, vp), (mn, vn) = M.posterior_params
    lines = ["IKFD1", f"{M.n_train} {m}", _fmt([M.bias]), _fmt([mp, vp, mn, vn]),
             _fmt(M.alpha), _fmt(M.mean_pos), _fmt(M.mean_neg)]
    if m:
        lines += [_ints(M.landmarks), _fmt(M.landmark_coef)]
    return lines


def _pcvm_lines(M: PcvmModel) -> list:
    return ["PCVM1", f"{M.n_train} {M.active.size}",
            f"{M.bias!r} {M.prune_threshold!r} {M.iterations}",
            _ints(M.active), _fmt(M.weights), _ints(M.basis_labels)]


def _model_lines(model) -> list:
    if isinstance(model, IkfdModel):
        return _ikfd_lines(model)
    if isinstance(model, PcvmModel):
        return _pcvm_lines(model)
    if isinstance(model, OneVsRestModel):
        lines = [f"OVR1 {len(model.classes)} {len(model.models)}", _ints(model.classes)]
        for sub in model.models:
            lines += _model_lines(sub)
        return lines
    raise ValidationError(f"cannot serialize {type(model).__name__}")


def write_model(path, model) -> None:
    Path(path).write_text("\n".join(_model_lines(model)) + "\n")


def _floats(line, count, what):
    vals = np.array([float(v) for v in line.split()], dtype=float)
    if vals.size != count:
        raise ValidationError(f"{what}: expected {count} values, got {vals.size}")
    return vals


def _parse_ikfd(lines, pos):
    n, m = (int(v) for v in lines[pos + 1].split())
    bias = float(lines[pos + 2])
    mp, vp, mn, vn = _floats(lines[pos + 3], 4, "posterior")
    alpha = _floats(lines[pos + 4], n, "alpha")
    mu_p = _floats(lines[pos + 5], n, "mean_pos")
    mu_n = _floats(lines[pos + 6], n, "mean_neg")
    pos += 7
    L = coef = None
    if m:
        L = np.array([int(v) for v in lines[pos].split()], dtype=int)
        coef = _floats(lines[pos + 1], m, "landmark_coef")
        pos += 2
    return IkfdModel(alpha, bias, mu_p, mu_n, ((mp, vp), (mn, vn)), L, coef), pos


def _parse_pcvm(lines, pos):
    n, a = (int(v) for v in lines[pos + 1].split())
    b, thr, it = lines[pos + 2].split()
    active = np.array([int(v) for v in lines[pos + 3].split()], dtype=int)
    weights = _floats(lines[pos + 4], a, "weights")
    labels = np.array([int(v) for v in lines[pos + 5].split()], dtype=int)
    if active.size != a or labels.size != a:
        raise ValidationError("PCVM1: active/label counts do not match")
    return PcvmModel(weights, float(b), active, labels, float(thr), n, int(it)), pos + 6


def _parse(lines, pos):
    tag = lines[pos].split()[0]
    if tag == "IKFD1":
        return _parse_ikfd(lines, pos)
    if tag == "PCVM1":
        return _parse_pcvm(lines, pos)
    if tag == "OVR1":
        _, _k, count = lines[pos].split()
        classes = np.array([int(v) for v in lines[pos + 1].split()], dtype=int)
        pos += 2
        models = []
        for _ in range(int(count)):
            sub, pos = _parse(lines, pos)
            models.append(sub)
        return OneVsRestModel(classes, tuple(models)), pos
    raise ValidationError(f"unknown model header {tag!r}")


def read_model(path):
    # keep empty lines: an empty PCVM active set serializes to blank lines
    lines = Path(path).read_text().split("\n")
    try:
        model, _ = _parse(lines, 0)
    except (IndexError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"{path}: malformed model file ({exc})") from exc
    return model

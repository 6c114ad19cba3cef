"""On-disk formats: IDX tensor files, labeled CSV, model binaries, reports.

All writes go through a temp-file-plus-rename so a crashed run never leaves
a half-written artifact behind. All read errors name the offending path.
"""

from __future__ import annotations

import gzip
import json
import math
import os
import struct

import numpy as np

from .data import Dataset
from .exceptions import DataError
from .learners import LogisticModel, MLPModel, RidgeModel

__all__ = [
    "load_idx",
    "save_idx",
    "load_csv",
    "save_model",
    "load_model",
    "load_vector",
    "save_vector",
    "mask_image",
    "emit_report",
]

IDX_MAGIC_IMAGES = 0x00000803
IDX_MAGIC_LABELS = 0x00000801
MODEL_MAGIC = b"CSMDL001"
_MODEL_KINDS = {"logistic": 0, "mlp": 1, "ridge": 2}


def _read_bytes(path) -> bytes:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if data[:2] == b"\x1f\x8b":  # transparent gzip
        try:
            data = gzip.decompress(data)
        except OSError as exc:
            raise DataError(f"cannot decompress {path}: {exc}") from exc
    return data


def _atomic_write(path, payload: bytes) -> None:
    path = os.fspath(path)
    tmp = path + ".tmp"
    try:
        with open(tmp, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except OSError as exc:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise DataError(f"cannot write {path}: {exc}") from exc


def load_idx(images_path, labels_path) -> Dataset:
    """Read an images/labels IDX pair (gzipped or raw) into a dataset.

    Pixels scale to [0, 1]; the class count is max(label) + 1.
    """
    img = _read_bytes(images_path)
    if len(img) < 16:
        raise DataError(f"{images_path}: too short for an images header")
    magic, n, rows, cols = struct.unpack(">IIII", img[:16])
    if magic != IDX_MAGIC_IMAGES:
        raise DataError(
            f"{images_path}: bad magic 0x{magic:08x}, expected 0x{IDX_MAGIC_IMAGES:08x}"
        )
    want = 16 + n * rows * cols
    if len(img) != want:
        raise DataError(f"{images_path}: expected {want} bytes, found {len(img)} (truncated?)")
    pixels = np.frombuffer(img, dtype=np.uint8, offset=16).astype(np.float64) / 255.0

    lab = _read_bytes(labels_path)
    if len(lab) < 8:
        raise DataError(f"{labels_path}: too short for a labels header")
    magic, n_lab = struct.unpack(">II", lab[:8])
    if magic != IDX_MAGIC_LABELS:
        raise DataError(
            f"{labels_path}: bad magic 0x{magic:08x}, expected 0x{IDX_MAGIC_LABELS:08x}"
        )
    if len(lab) != 8 + n_lab:
        raise DataError(f"{labels_path}: expected {8 + n_lab} bytes, found {len(lab)}")
    if n_lab != n:
        raise DataError(f"{labels_path}: {n_lab} labels for {n} images in {images_path}")
    labels = np.frombuffer(lab, dtype=np.uint8, offset=8).astype(np.int64)
    num_classes = int(labels.max()) + 1 if n else 1
    return Dataset(pixels.reshape(n, rows * cols), labels, num_classes)


def save_idx(dataset: Dataset, images_path, labels_path, rows: int | None = None,
             cols: int | None = None) -> None:
    """Write a dataset as an IDX pair. Features are rounded to byte pixels,
    so a load/save round trip of byte-valued data is exact."""
    d = dataset.feature_dim
    if rows is None or cols is None:
        side = math.isqrt(d)
        rows, cols = (side, side) if side * side == d else (1, d)
    if rows * cols != d:
        raise DataError(f"rows*cols = {rows * cols} does not match feature dim {d}")
    if dataset.labels.size and (dataset.labels.min() < 0 or dataset.labels.max() > 255):
        raise DataError("IDX labels must fit in a byte")
    pixels = np.clip(np.round(dataset.features * 255.0), 0, 255).astype(np.uint8)
    header = struct.pack(">IIII", IDX_MAGIC_IMAGES, len(dataset), rows, cols)
    _atomic_write(images_path, header + pixels.tobytes())
    header = struct.pack(">II", IDX_MAGIC_LABELS, len(dataset))
    _atomic_write(labels_path, header + dataset.labels.astype(np.uint8).tobytes())


def load_csv(path) -> Dataset:
    """Read `label,f0,f1,...` rows. Labels are re-indexed densely to
    [0, C) preserving numeric order."""
    text = _read_bytes(path).decode("utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DataError(f"{path}: empty file")
    header = [c.strip() for c in lines[0].split(",")]
    if not header or header[0].lower() != "label":
        raise DataError(f"{path}: missing header row (first column must be 'label')")
    width = len(header)
    if width < 2:
        raise DataError(f"{path}: header has no feature columns")
    raw_labels = []
    feats = []
    for lineno, ln in enumerate(lines[1:], start=2):
        cells = ln.split(",")
        if len(cells) != width:
            raise DataError(f"{path}:{lineno}: expected {width} columns, found {len(cells)}")
        try:
            raw_labels.append(float(cells[0]))
            feats.append([float(c) for c in cells[1:]])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: non-numeric cell ({exc})") from exc
    if not feats:
        raise DataError(f"{path}: no data rows")
    raw = np.array(raw_labels)
    classes = np.unique(raw)
    labels = np.searchsorted(classes, raw).astype(np.int64)
    return Dataset(np.array(feats), labels, len(classes))


def save_model(model, path) -> None:
    """Serialize a trained model: magic, kind byte, little-endian dims and
    float64 parameters in a fixed order."""
    kind = _MODEL_KINDS.get(model.kind)
    if kind is None:
        raise DataError(f"cannot serialize model kind {model.kind!r}")
    parts = [MODEL_MAGIC, bytes([kind])]
    if isinstance(model, LogisticModel):
        d, C = model.W.shape
        parts.append(struct.pack("<IId", d, C, model.final_loss))
    elif isinstance(model, MLPModel):
        d, H = model.W1.shape
        C = model.W3.shape[1]
        parts.append(struct.pack("<IIId", d, H, C, model.final_loss))
    elif isinstance(model, RidgeModel):
        d = model.W.shape[0] - 1
        C = model.W.shape[1]
        parts.append(struct.pack("<IIdd", d, C, model.ridge_lambda, model.final_loss))
    parts.extend(np.ascontiguousarray(p, dtype="<f8").tobytes() for p in model.params())
    _atomic_write(path, b"".join(parts))


def _take(buf: memoryview, path, count: int, offset: int):
    if offset + count > len(buf):
        raise DataError(f"{path}: truncated model file")
    return buf[offset : offset + count], offset + count


def _read_array(buf, path, offset, shape):
    count = 8 * int(np.prod(shape))
    raw, offset = _take(buf, path, count, offset)
    return np.frombuffer(raw, dtype="<f8").reshape(shape).copy(), offset


def load_model(path):
    """Inverse of save_model. Errors name the path and what went wrong."""
    data = memoryview(_read_bytes(path))
    if bytes(data[:8]) != MODEL_MAGIC:
        raise DataError(f"{path}: not a model file (bad magic)")
    kind = data[8]
    offset = 9
    if kind == 0:
        raw, offset = _take(data, path, struct.calcsize("<IId"), offset)
        d, C, loss = struct.unpack("<IId", raw)
        W, offset = _read_array(data, path, offset, (d, C))
        b, offset = _read_array(data, path, offset, (C,))
        model = LogisticModel(W, b, loss)
    elif kind == 1:
        raw, offset = _take(data, path, struct.calcsize("<IIId"), offset)
        d, H, C, loss = struct.unpack("<IIId", raw)
        W1, offset = _read_array(data, path, offset, (d, H))
        b1, offset = _read_array(data, path, offset, (H,))
        W2, offset = _read_array(data, path, offset, (H, H))
        b2, offset = _read_array(data, path, offset, (H,))
        W3, offset = _read_array(data, path, offset, (H, C))
        b3, offset = _read_array(data, path, offset, (C,))
        model = MLPModel(W1, b1, W2, b2, W3, b3, loss)
    elif kind == 2:
        raw, offset = _take(data, path, struct.calcsize("<IIdd"), offset)
        d, C, lam, loss = struct.unpack("<IIdd", raw)
        W, offset = _read_array(data, path, offset, (d + 1, C))
        model = RidgeModel(W, lam, loss)
    else:
        raise DataError(f"{path}: unknown model kind byte {int(kind)}")
    if offset != len(data):
        raise DataError(f"{path}: {len(data) - offset} trailing bytes")
    return model


def load_vector(path) -> np.ndarray:
    """One float per line."""
    text = _read_bytes(path).decode("utf-8")
    try:
        values = [float(ln) for ln in text.splitlines() if ln.strip()]
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric line ({exc})") from exc
    if not values:
        raise DataError(f"{path}: no values")
    return np.array(values)


def save_vector(path, values) -> None:
    payload = "".join(f"{float(v):.17g}\n" for v in np.asarray(values).ravel())
    _atomic_write(path, payload.encode("utf-8"))


def mask_image(bits) -> np.ndarray:
    """0/1 vector laid out as the smallest square image that holds it."""
    bits = np.asarray(bits).ravel()
    side = math.isqrt(bits.size)
    if side * side < bits.size:
        side += 1
    img = np.zeros(side * side, dtype=np.uint8)
    img[: bits.size] = bits
    return img.reshape(side, side)


def _pgm_bytes(image: np.ndarray) -> bytes:
    img = np.asarray(image, dtype=np.uint8)
    if img.ndim != 2:
        raise DataError(f"PGM needs a 2-d image, got shape {img.shape}")
    pixels = np.where(img > 0, 255, 0).astype(np.uint8)
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
    return header + pixels.tobytes()


def emit_report(report: dict, out_dir) -> None:
    """Write the report bundle into out_dir (created if missing).

    Keys used: "metrics" (dict or list of dicts -> metrics.jsonl), "coreset"
    (indices -> coreset.txt, one per line), "probabilities" (floats ->
    probabilities.txt, one per line), "mask_bits" (0/1 vector -> mask.pgm,
    selected entries white). Missing keys skip their file.
    """
    out_dir = os.fspath(out_dir)
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create {out_dir}: {exc}") from exc

    metrics = report.get("metrics")
    if metrics is not None:
        if isinstance(metrics, dict):
            metrics = [metrics]
        payload = "".join(json.dumps(m, sort_keys=True) + "\n" for m in metrics)
        _atomic_write(os.path.join(out_dir, "metrics.jsonl"), payload.encode("utf-8"))
    coreset = report.get("coreset")
    if coreset is not None:
        payload = "".join(f"{int(i)}\n" for i in np.asarray(coreset).ravel())
        _atomic_write(os.path.join(out_dir, "coreset.txt"), payload.encode("utf-8"))
    probs = report.get("probabilities")
    if probs is not None:
        save_vector(os.path.join(out_dir, "probabilities.txt"), probs)
    bits = report.get("mask_bits")
    if bits is not None:
        _atomic_write(os.path.join(out_dir, "mask.pgm"), _pgm_bytes(mask_image(bits)))

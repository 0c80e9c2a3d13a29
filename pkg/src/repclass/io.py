"""On-disk interchange: binary matrix files, JSON sidecars, PGM images.

Matrix format: 8-byte magic "RPMATv1\\0", little-endian u64 rows, u64 cols,
then row-major IEEE-754 doubles. Small matrices may also be imported from
CSV.
"""

import json
import struct
from pathlib import Path

import numpy as np

from .dictionary import Dictionary, Projector
from .errors import MalformedMatrix, MissingPath
from .features import PcaModel

MAGIC = b"RPMATv1\x00"


def write_matrix(path, matrix):
    matrix = np.ascontiguousarray(matrix, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<QQ", matrix.shape[0], matrix.shape[1]))
        fh.write(matrix.tobytes(order="C"))


def read_matrix(path):
    path = Path(path)
    if not path.exists():
        raise MissingPath(str(path))
    raw = path.read_bytes()
    if len(raw) < 24 or raw[:8] != MAGIC:
        raise MalformedMatrix(f"{path}: bad magic or truncated header")
    rows, cols = struct.unpack("<QQ", raw[8:24])
    expected = 24 + rows * cols * 8
    if len(raw) != expected:
        raise MalformedMatrix(f"{path}: expected {expected} bytes, got {len(raw)}")
    return np.frombuffer(raw[24:], dtype="<f8").reshape(rows, cols).copy()


def read_matrix_csv(path):
    path = Path(path)
    if not path.exists():
        raise MissingPath(str(path))
    try:
        return np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise MalformedMatrix(f"{path}: {exc}") from None


def read_pgm(path):
    """Read a binary 8-bit grayscale PGM (P5) image as an H x W float array."""
    path = Path(path)
    if not path.exists():
        raise MissingPath(str(path))
    raw = path.read_bytes()
    if raw[:2] != b"P5":
        raise MalformedMatrix(f"{path}: not a binary PGM (P5) file")
    # header tokens may be separated by whitespace and '#' comments
    tokens = []
    i = 2
    while len(tokens) < 3 and i < len(raw):
        c = raw[i : i + 1]
        if c == b"#":
            while i < len(raw) and raw[i : i + 1] != b"\n":
                i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < len(raw) and not raw[j : j + 1].isspace():
                j += 1
            tokens.append(raw[i:j])
            i = j
    if len(tokens) < 3:
        raise MalformedMatrix(f"{path}: truncated PGM header")
    w, h, maxval = (int(t) for t in tokens)
    if maxval > 255:
        raise MalformedMatrix(f"{path}: only 8-bit PGM supported (maxval {maxval})")
    i += 1  # single whitespace after maxval
    pixels = np.frombuffer(raw[i : i + w * h], dtype=np.uint8)
    if pixels.size != w * h:
        raise MalformedMatrix(f"{path}: truncated pixel data")
    return pixels.reshape(h, w).astype(np.float64)


def write_pgm(path, image):
    image = np.asarray(image)
    clipped = np.clip(np.round(image), 0, 255).astype(np.uint8)
    h, w = clipped.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        fh.write(clipped.tobytes())


def save_dictionary(dictionary, path):
    """Write a dictionary as matrix file + JSON sidecar (labels, ranges)."""
    path = Path(path)
    write_matrix(path, dictionary.data)
    sidecar = {
        "labels": [str(lab) for lab in dictionary.labels],
        "class_ranges": {str(k): list(v) for k, v in dictionary.class_ranges.items()},
        "fingerprint": dictionary.fingerprint,
    }
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(sidecar, indent=2))


def load_dictionary(path):
    path = Path(path)
    data = read_matrix(path)
    sidecar = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    ranges = {k: tuple(v) for k, v in sidecar["class_ranges"].items()}
    return Dictionary(data=data, labels=tuple(sidecar["labels"]), class_ranges=ranges)


def save_projector(projector, path):
    path = Path(path)
    write_matrix(path, projector.matrix)
    sidecar = {
        "lambda": projector.lam,
        "dictionary_fingerprint": projector.dictionary_fingerprint,
    }
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(sidecar, indent=2))


def load_projector(path, dictionary=None):
    path = Path(path)
    matrix = read_matrix(path)
    sidecar = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    return Projector(
        matrix=matrix,
        lam=float(sidecar["lambda"]),
        dictionary_fingerprint=sidecar["dictionary_fingerprint"],
        source=dictionary,
    )


def save_pca(model, path):
    path = Path(path)
    write_matrix(path, np.column_stack([model.mean, model.basis]))
    sidecar = {
        "d": model.d,
        "input_dim": model.input_dim,
        "sign_convention": "largest-magnitude-entry-nonnegative",
    }
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(sidecar, indent=2))


def load_pca(path):
    path = Path(path)
    packed = read_matrix(path)
    return PcaModel(mean=packed[:, 0].copy(), basis=packed[:, 1:].copy())

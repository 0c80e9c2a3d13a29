"""Multi-class training dictionaries and precomputed ridge projectors."""

import hashlib
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    EmptyInput,
    NonPositiveLambda,
    UnknownClass,
    ZeroColumn,
)

_ZERO_NORM_TOL = 1e-12


def default_lambda(n_columns):
    """Default ridge weight, scaled by the number of training columns."""
    return 0.001 * n_columns / 700.0


def normalize_columns(raw):
    """Return a copy of `raw` with every column scaled to unit l2-norm."""
    raw = np.asarray(raw, dtype=np.float64)
    norms = np.linalg.norm(raw, axis=0)
    if np.any(norms < _ZERO_NORM_TOL):
        bad = int(np.argmin(norms))
        raise ZeroColumn(f"column {bad} has norm {norms[bad]:.3e}")
    return raw / norms


@dataclass(frozen=True)
class Dictionary:
    """Column-normalized training matrix with contiguous per-class blocks.

    data: m x n matrix, unit-norm columns.
    labels: class identifier per column.
    class_ranges: class -> (start, stop) column range; ranges partition the
        columns and classes are stored in first-appearance order.
    """

    data: np.ndarray
    labels: tuple
    class_ranges: dict
    _fingerprint: str = field(default="", repr=False)

    def __post_init__(self):
        if not self._fingerprint:
            h = hashlib.sha256()
            h.update(self.data.tobytes())
            h.update(repr(self.labels).encode())
            object.__setattr__(self, "_fingerprint", h.hexdigest())

    @property
    def m(self):
        return self.data.shape[0]

    @property
    def n(self):
        return self.data.shape[1]

    @property
    def k(self):
        return len(self.class_ranges)

    @property
    def classes(self):
        return list(self.class_ranges.keys())

    @property
    def fingerprint(self):
        return self._fingerprint

    def class_block(self, label):
        if label not in self.class_ranges:
            raise UnknownClass(f"no class {label!r} in dictionary")
        lo, hi = self.class_ranges[label]
        return self.data[:, lo:hi]


def build_dictionary(samples):
    """Build a Dictionary from (feature vector, class label) pairs.

    Columns are regrouped so each class occupies one contiguous block, with
    classes ordered by first appearance in the input.
    """
    samples = list(samples)
    if not samples:
        raise EmptyInput("no training samples")
    vecs = [np.asarray(v, dtype=np.float64).ravel() for v, _ in samples]
    m = vecs[0].shape[0]
    for i, v in enumerate(vecs):
        if v.shape[0] != m:
            raise DimensionMismatch(f"sample {i} has dimension {v.shape[0]}, expected {m}")
    order = []
    by_class = {}
    for v, lab in zip(vecs, (lab for _, lab in samples)):
        if lab not in by_class:
            by_class[lab] = []
            order.append(lab)
        by_class[lab].append(v)
    cols = []
    labels = []
    ranges = {}
    pos = 0
    for lab in order:
        block = by_class[lab]
        ranges[lab] = (pos, pos + len(block))
        pos += len(block)
        cols.extend(block)
        labels.extend([lab] * len(block))
    data = normalize_columns(np.column_stack(cols))
    return Dictionary(data=data, labels=tuple(labels), class_ranges=ranges)


def class_coefficients(dictionary, alpha, label):
    """Slice of a length-n coefficient vector belonging to one class block."""
    alpha = np.asarray(alpha)
    if alpha.shape[0] != dictionary.n:
        raise DimensionMismatch(
            f"alpha has length {alpha.shape[0]}, dictionary has {dictionary.n} columns"
        )
    if label not in dictionary.class_ranges:
        raise UnknownClass(f"no class {label!r} in dictionary")
    lo, hi = dictionary.class_ranges[label]
    return alpha[lo:hi]


@dataclass(frozen=True)
class Projector:
    """Precomputed ridge projection (X^T X + lambda I)^{-1} X^T.

    source is a convenience back-reference to the dictionary the projector
    was built from; it is not serialized (the fingerprint ties the two
    together on disk).
    """

    matrix: np.ndarray
    lam: float
    dictionary_fingerprint: str
    source: "Dictionary | None" = field(default=None, repr=False, compare=False)


def build_projector(dictionary, lam):
    """Precompute the ridge projector of a dictionary.

    Solved through a Cholesky factorization of the SPD matrix X^T X + lam*I;
    lam > 0 keeps it positive definite even for n > m.
    """
    if lam <= 0:
        raise NonPositiveLambda(f"lambda must be positive, got {lam}")
    X = dictionary.data
    gram = X.T @ X + lam * np.eye(dictionary.n)
    cf = scipy.linalg.cho_factor(gram, lower=True)
    P = scipy.linalg.cho_solve(cf, X.T)
    return Projector(
        matrix=P,
        lam=float(lam),
        dictionary_fingerprint=dictionary.fingerprint,
        source=dictionary,
    )


def enroll(dictionary, projector, new_samples, lam=None):
    """Append new training samples and fully recompute the projector.

    If the caller used the default lambda rule for the old projector (or
    passes lam=None with no recognizable rule), the new lambda follows
    default_lambda(new n); an explicit lam overrides.
    """
    new_samples = list(new_samples)
    if not new_samples:
        return dictionary, projector
    old = [
        (dictionary.data[:, i], dictionary.labels[i]) for i in range(dictionary.n)
    ]
    for i, (v, _) in enumerate(new_samples):
        v = np.asarray(v).ravel()
        if v.shape[0] != dictionary.m:
            raise DimensionMismatch(
                f"new sample {i} has dimension {v.shape[0]}, expected {dictionary.m}"
            )
    new_dict = build_dictionary(old + new_samples)
    if lam is None:
        used_default = abs(projector.lam - default_lambda(dictionary.n)) <= 1e-15
        lam = default_lambda(new_dict.n) if used_default else projector.lam
    new_proj = build_projector(new_dict, lam)
    return new_dict, new_proj

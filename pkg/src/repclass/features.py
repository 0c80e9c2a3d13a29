"""PCA (eigenface-style) dimensionality reduction and image flattening."""

from dataclasses import dataclass

import numpy as np

from .errors import BadDimension, DimensionMismatch, EmptyImage


@dataclass(frozen=True)
class PcaModel:
    """Mean vector plus orthonormal basis of the top principal directions."""

    mean: np.ndarray
    basis: np.ndarray  # D x d, orthonormal columns

    @property
    def d(self):
        return self.basis.shape[1]

    @property
    def input_dim(self):
        return self.basis.shape[0]


def fit_pca(training, d):
    """Fit a d-dimensional PCA model on the columns of a D x N matrix.

    Uses the SVD of the centered data (stable when D >> N). Component signs
    are fixed by making each component's largest-magnitude entry nonnegative.
    """
    training = np.asarray(training, dtype=np.float64)
    if training.ndim != 2:
        raise BadDimension("training must be a D x N matrix")
    D, N = training.shape
    if not (1 <= d <= min(D, N)):
        raise BadDimension(f"need 1 <= d <= min(D, N) = {min(D, N)}, got {d}")
    mean = training.mean(axis=1)
    centered = training - mean[:, None]
    U, s, _ = np.linalg.svd(centered, full_matrices=False)
    basis = U[:, :d].copy()
    for j in range(d):
        i = int(np.argmax(np.abs(basis[:, j])))
        if basis[i, j] < 0:
            basis[:, j] = -basis[:, j]
    return PcaModel(mean=mean, basis=basis)


def project_pca(model, x):
    """Project a vector (or D x N matrix of columns) into the PCA space."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    cols = x[:, None] if single else x
    if cols.shape[0] != model.input_dim:
        raise DimensionMismatch(
            f"input has dimension {cols.shape[0]}, model expects {model.input_dim}"
        )
    out = model.basis.T @ (cols - model.mean[:, None])
    return out[:, 0] if single else out


def vectorize_image(image):
    """Flatten an H x W grayscale image column-major into a length H*W vector."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2 or image.size == 0:
        raise EmptyImage("image must be a nonempty 2-D array")
    return image.flatten(order="F")

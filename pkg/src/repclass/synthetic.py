"""Seeded synthetic multi-class subspace data for desk-scale experiments.

Each class is a random low-dimensional subspace of the ambient space;
samples are gaussian combinations of an orthonormal class basis plus
isotropic noise. Class bases can share a common component to make classes
deliberately correlated (harder problems for regularization studies).
"""

import numpy as np


def make_subspace_dataset(
    n_classes,
    subspace_dim,
    ambient_dim,
    n_train,
    n_test,
    noise_sigma,
    seed,
    shared_fraction=0.0,
):
    """Generate train/test feature matrices from per-class random subspaces.

    shared_fraction in [0, 1) mixes a common basis into every class basis,
    raising inter-class correlation. Returns (train m x Ntr, train labels,
    test m x Nte, test labels).
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    shared = _orthonormal(rng, ambient_dim, subspace_dim)
    train_cols, train_labels = [], []
    test_cols, test_labels = [], []
    for c in range(n_classes):
        own = _orthonormal(rng, ambient_dim, subspace_dim)
        if shared_fraction > 0:
            mixed = (1.0 - shared_fraction) * own + shared_fraction * shared
            basis, _ = np.linalg.qr(mixed)
        else:
            basis = own
        label = f"class{c:03d}"
        for count, cols, labels in (
            (n_train, train_cols, train_labels),
            (n_test, test_cols, test_labels),
        ):
            coefs = rng.standard_normal((subspace_dim, count))
            samples = basis @ coefs + noise_sigma * rng.standard_normal((ambient_dim, count))
            cols.append(samples)
            labels.extend([label] * count)
    return (
        np.concatenate(train_cols, axis=1),
        train_labels,
        np.concatenate(test_cols, axis=1),
        test_labels,
    )


def _orthonormal(rng, m, d):
    q, _ = np.linalg.qr(rng.standard_normal((m, d)))
    return q

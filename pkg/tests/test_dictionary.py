import numpy as np
import pytest

from repclass.dictionary import (
    Dictionary,
    build_dictionary,
    build_projector,
    class_coefficients,
    default_lambda,
    enroll,
    normalize_columns,
)
from repclass.errors import (
    DimensionMismatch,
    EmptyInput,
    NonPositiveLambda,
    UnknownClass,
    ZeroColumn,
)


def _samples(rng, m=12, per_class=4, classes=("a", "b", "c")):
    out = []
    for lab in classes:
        for _ in range(per_class):
            out.append((rng.standard_normal(m), lab))
    return out


def test_default_lambda_values():
    assert default_lambda(700) == pytest.approx(0.001)
    assert default_lambda(1400) == pytest.approx(0.002)
    assert default_lambda(1) == pytest.approx(0.001 / 700)


def test_normalize_columns_unit_norm():
    rng = np.random.default_rng(0)
    raw = rng.standard_normal((10, 7)) * 13.0
    X = normalize_columns(raw)
    np.testing.assert_allclose(np.linalg.norm(X, axis=0), 1.0, rtol=1e-12)
    # direction preserved
    for j in range(7):
        cos = X[:, j] @ raw[:, j] / np.linalg.norm(raw[:, j])
        assert cos == pytest.approx(1.0)


def test_normalize_columns_rejects_zero_column():
    raw = np.ones((5, 3))
    raw[:, 1] = 0.0
    with pytest.raises(ZeroColumn):
        normalize_columns(raw)


def test_build_dictionary_grouping_and_ranges():
    rng = np.random.default_rng(1)
    # interleaved class order; grouping should follow first appearance
    samples = [
        (rng.standard_normal(6), "b"),
        (rng.standard_normal(6), "a"),
        (rng.standard_normal(6), "b"),
        (rng.standard_normal(6), "a"),
    ]
    d = build_dictionary(samples)
    assert d.classes == ["b", "a"]
    assert d.class_ranges["b"] == (0, 2)
    assert d.class_ranges["a"] == (2, 4)
    assert d.m == 6 and d.n == 4 and d.k == 2
    np.testing.assert_allclose(np.linalg.norm(d.data, axis=0), 1.0, rtol=1e-12)


def test_build_dictionary_empty_input():
    with pytest.raises(EmptyInput):
        build_dictionary([])


def test_fingerprint_stability_and_sensitivity():
    rng = np.random.default_rng(2)
    samples = _samples(rng)
    d1 = build_dictionary(samples)
    d2 = build_dictionary(samples)
    assert d1.fingerprint == d2.fingerprint
    bumped = [(v + (0.1 if i == 0 else 0.0), lab) for i, (v, lab) in enumerate(samples)]
    d3 = build_dictionary(bumped)
    assert d3.fingerprint != d1.fingerprint


def test_class_block_and_coefficients():
    rng = np.random.default_rng(3)
    d = build_dictionary(_samples(rng, per_class=3))
    blk = d.class_block("b")
    assert blk.shape == (12, 3)
    np.testing.assert_array_equal(blk, d.data[:, 3:6])
    alpha = np.arange(d.n, dtype=float)
    np.testing.assert_array_equal(class_coefficients(d, alpha, "b"), alpha[3:6])
    with pytest.raises(UnknownClass):
        class_coefficients(d, alpha, "zz")
    with pytest.raises(UnknownClass):
        d.class_block("zz")


def test_projector_matches_direct_inverse():
    rng = np.random.default_rng(4)
    d = build_dictionary(_samples(rng, m=20, per_class=4))
    lam = 0.05
    proj = build_projector(d, lam)
    X = d.data
    direct = np.linalg.inv(X.T @ X + lam * np.eye(d.n)) @ X.T
    np.testing.assert_allclose(proj.matrix, direct, rtol=1e-10, atol=1e-12)
    assert proj.dictionary_fingerprint == d.fingerprint
    assert proj.source is d


def test_projector_rejects_bad_lambda():
    rng = np.random.default_rng(5)
    d = build_dictionary(_samples(rng))
    for lam in (0.0, -1.0):
        with pytest.raises(NonPositiveLambda):
            build_projector(d, lam)


def test_enroll_extends_class_and_rebuilds_projector():
    rng = np.random.default_rng(6)
    d = build_dictionary(_samples(rng, m=15, per_class=3))
    proj = build_projector(d, default_lambda(d.n))
    new = [(rng.standard_normal(15), "b"), (rng.standard_normal(15), "d")]
    d2, proj2 = enroll(d, proj, new)
    assert d2.n == d.n + 2
    assert "d" in d2.classes
    lo, hi = d2.class_ranges["b"]
    assert hi - lo == 4
    # auto lambda tracks the new column count
    assert proj2.lam == pytest.approx(default_lambda(d2.n))
    # the rebuilt projector must agree with a from-scratch build
    ref = build_projector(d2, default_lambda(d2.n))
    np.testing.assert_allclose(proj2.matrix, ref.matrix, rtol=1e-12)


def test_enroll_keeps_explicit_lambda():
    rng = np.random.default_rng(7)
    d = build_dictionary(_samples(rng, m=15, per_class=3))
    proj = build_projector(d, 0.25)
    d2, proj2 = enroll(d, proj, [(rng.standard_normal(15), "a")])
    assert proj2.lam == pytest.approx(0.25)


def test_enroll_dimension_mismatch():
    rng = np.random.default_rng(8)
    d = build_dictionary(_samples(rng, m=15))
    proj = build_projector(d, 0.1)
    with pytest.raises(DimensionMismatch):
        enroll(d, proj, [(rng.standard_normal(9), "a")])


def test_dictionary_is_frozen():
    rng = np.random.default_rng(9)
    d = build_dictionary(_samples(rng))
    with pytest.raises(Exception):
        d.labels = ()

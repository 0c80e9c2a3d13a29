import numpy as np
import pytest

from repclass.dictionary import build_dictionary, build_projector
from repclass.errors import FingerprintMismatch, MalformedMatrix, MissingPath
from repclass.features import fit_pca, project_pca
from repclass.io import (
    MAGIC,
    load_dictionary,
    load_pca,
    load_projector,
    read_matrix,
    read_matrix_csv,
    read_pgm,
    save_dictionary,
    save_pca,
    save_projector,
    write_matrix,
    write_pgm,
)
from repclass.solvers import solve_rls


def test_matrix_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    M = rng.standard_normal((13, 7))
    p = tmp_path / "m.rpmat"
    write_matrix(p, M)
    back = read_matrix(p)
    np.testing.assert_array_equal(back, M)
    assert back.dtype == np.float64
    # header layout
    raw = p.read_bytes()
    assert raw[:8] == MAGIC
    assert len(raw) == 24 + 13 * 7 * 8


def test_matrix_vector_promoted_to_column(tmp_path):
    p = tmp_path / "v.rpmat"
    write_matrix(p, np.arange(5.0))
    assert read_matrix(p).shape == (5, 1)


def test_read_matrix_error_cases(tmp_path):
    with pytest.raises(MissingPath):
        read_matrix(tmp_path / "absent.rpmat")
    bad = tmp_path / "bad.rpmat"
    bad.write_bytes(b"NOTMAGIC" + b"\x00" * 32)
    with pytest.raises(MalformedMatrix):
        read_matrix(bad)
    trunc = tmp_path / "trunc.rpmat"
    write_matrix(trunc, np.ones((4, 4)))
    trunc.write_bytes(trunc.read_bytes()[:-8])
    with pytest.raises(MalformedMatrix):
        read_matrix(trunc)


def test_read_matrix_csv(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("1.0,2.0\n3.5,-4.0\n")
    np.testing.assert_array_equal(read_matrix_csv(p), [[1.0, 2.0], [3.5, -4.0]])
    bad = tmp_path / "bad.csv"
    bad.write_text("1.0,garbage\n")
    with pytest.raises(MalformedMatrix):
        read_matrix_csv(bad)


def test_pgm_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    img = np.round(rng.uniform(0, 255, size=(9, 14)))
    p = tmp_path / "img.pgm"
    write_pgm(p, img)
    np.testing.assert_array_equal(read_pgm(p), img)


def test_pgm_header_comments_and_errors(tmp_path):
    p = tmp_path / "c.pgm"
    body = bytes(range(6))
    p.write_bytes(b"P5\n# a comment\n3 2\n# another\n255\n" + body)
    img = read_pgm(p)
    assert img.shape == (2, 3)
    np.testing.assert_array_equal(img.ravel(), np.arange(6.0))

    notpgm = tmp_path / "x.pgm"
    notpgm.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
    with pytest.raises(MalformedMatrix):
        read_pgm(notpgm)
    deep = tmp_path / "deep.pgm"
    deep.write_bytes(b"P5\n2 2\n65535\n" + b"\x00" * 8)
    with pytest.raises(MalformedMatrix):
        read_pgm(deep)
    short = tmp_path / "short.pgm"
    short.write_bytes(b"P5\n4 4\n255\n\x00\x00")
    with pytest.raises(MalformedMatrix):
        read_pgm(short)


def _dictionary(seed=2):
    rng = np.random.default_rng(seed)
    samples = [(rng.standard_normal(10), f"c{i % 3}") for i in range(12)]
    return build_dictionary(samples)


def test_dictionary_roundtrip(tmp_path):
    d = _dictionary()
    save_dictionary(d, tmp_path / "dict.rpmat")
    back = load_dictionary(tmp_path / "dict.rpmat")
    np.testing.assert_array_equal(back.data, d.data)
    assert back.labels == d.labels
    assert back.class_ranges == d.class_ranges
    assert back.fingerprint == d.fingerprint


def test_projector_roundtrip_and_reattachment(tmp_path):
    d = _dictionary(3)
    proj = build_projector(d, 0.07)
    save_projector(proj, tmp_path / "proj.rpmat")

    detached = load_projector(tmp_path / "proj.rpmat")
    np.testing.assert_array_equal(detached.matrix, proj.matrix)
    assert detached.lam == proj.lam
    assert detached.dictionary_fingerprint == d.fingerprint
    assert detached.source is None
    with pytest.raises(FingerprintMismatch):
        solve_rls(detached, np.zeros(10))

    attached = load_projector(tmp_path / "proj.rpmat", dictionary=d)
    res = solve_rls(attached, np.ones(10))
    ref = solve_rls(d.data, np.ones(10), 0.07)
    np.testing.assert_allclose(res.alpha, ref.alpha, rtol=1e-12)


def test_pca_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    data = rng.standard_normal((30, 40))
    model = fit_pca(data, 6)
    save_pca(model, tmp_path / "pca.rpmat")
    back = load_pca(tmp_path / "pca.rpmat")
    np.testing.assert_array_equal(back.mean, model.mean)
    np.testing.assert_array_equal(back.basis, model.basis)
    x = rng.standard_normal(30)
    np.testing.assert_array_equal(project_pca(back, x), project_pca(model, x))

"""Vectorization and complex-to-real embedding invariants."""

import numpy as np
import pytest

from danisac.conic.embedding import (
    hermitian_embed,
    hermitian_extract,
    smat,
    svec,
    svec_dim,
    svec_side,
)


def random_hermitian(rng, n):
    B = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (B + B.conj().T)


def random_hpsd(rng, n):
    B = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return B @ B.conj().T


def test_svec_dim_and_side():
    assert svec_dim(1) == 1
    assert svec_dim(4) == 10
    assert svec_side(10) == 4
    with pytest.raises(ValueError):
        svec_side(11)


def test_svec_smat_round_trip():
    rng = np.random.default_rng(3)
    for n in (1, 2, 5, 9):
        A = rng.normal(size=(n, n))
        A = 0.5 * (A + A.T)
        v = svec(A)
        assert v.shape == (svec_dim(n),)
        np.testing.assert_allclose(smat(v), A, atol=1e-14)
        np.testing.assert_allclose(svec(smat(v)), v, atol=1e-14)


def test_svec_inner_product_matches_frobenius():
    rng = np.random.default_rng(4)
    for n in (2, 6):
        A = rng.normal(size=(n, n))
        A = 0.5 * (A + A.T)
        B = rng.normal(size=(n, n))
        B = 0.5 * (B + B.T)
        assert np.dot(svec(A), svec(B)) == pytest.approx(np.trace(A @ B), rel=1e-12)


def test_svec_off_diagonal_scaling():
    M = np.array([[0.0, 1.0], [1.0, 0.0]])
    v = svec(M)
    np.testing.assert_allclose(v, [0.0, np.sqrt(2.0), 0.0])


def test_svec_rejects_nonsquare():
    with pytest.raises(ValueError):
        svec(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        smat(np.zeros((2, 2)))


def test_embed_round_trip_identity():
    rng = np.random.default_rng(5)
    for n in (1, 3, 6):
        H = random_hermitian(rng, n)
        Y = hermitian_embed(H)
        assert Y.shape == (2 * n, 2 * n)
        np.testing.assert_allclose(Y, Y.T, atol=1e-14)
        np.testing.assert_allclose(hermitian_extract(Y), H, atol=1e-14)


def test_embed_preserves_psd_both_ways():
    rng = np.random.default_rng(6)
    H = random_hpsd(rng, 4)
    Y = hermitian_embed(H)
    assert np.linalg.eigvalsh(Y).min() >= -1e-10
    # doubled spectrum
    eh = np.sort(np.repeat(np.linalg.eigvalsh(H).real, 2))
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(Y)), eh, atol=1e-9)
    # extraction of a general PSD symmetric matrix stays PSD
    B = rng.normal(size=(8, 8))
    Ypsd = B @ B.T
    Hx = hermitian_extract(Ypsd)
    assert np.linalg.eigvalsh(Hx).min() >= -1e-10


def test_embed_trace_identity():
    rng = np.random.default_rng(7)
    C = random_hermitian(rng, 5)
    X = random_hpsd(rng, 5)
    lhs = np.trace(hermitian_embed(C) @ hermitian_embed(X))
    rhs = 2.0 * np.trace(C @ X).real
    assert lhs == pytest.approx(rhs, rel=1e-12)
    # the halved coefficient therefore reproduces the complex inner product
    half = np.dot(svec(0.5 * hermitian_embed(C)), svec(hermitian_embed(X)))
    assert half == pytest.approx(np.trace(C @ X).real, rel=1e-12)


def test_extract_projection_is_average_over_symmetry():
    rng = np.random.default_rng(8)
    n = 3
    Y = rng.normal(size=(2 * n, 2 * n))
    Y = 0.5 * (Y + Y.T)
    J = np.block([[np.zeros((n, n)), -np.eye(n)], [np.eye(n), np.zeros((n, n))]])
    H = hermitian_extract(Y)
    np.testing.assert_allclose(
        hermitian_embed(H), 0.5 * (Y + J @ Y @ J.T), atol=1e-12
    )
    # idempotent: extracting an embedded matrix changes nothing
    np.testing.assert_allclose(hermitian_extract(hermitian_embed(H)), H, atol=1e-13)


def test_embed_rejects_bad_shapes():
    with pytest.raises(ValueError):
        hermitian_embed(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        hermitian_extract(np.zeros((3, 3)))

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ris_capacity.linalg import hermitian_eig, is_hermitian, logdet_pd, psd_sqrt


def test_psd_sqrt_identity():
    np.testing.assert_allclose(psd_sqrt(np.eye(5)), np.eye(5), atol=1e-14)


def test_psd_sqrt_rank_one():
    rng = np.random.default_rng(0)
    u = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    u /= np.linalg.norm(u)
    n = 7
    root = psd_sqrt(n * np.outer(u, u.conj()))
    np.testing.assert_allclose(root, np.sqrt(n) * np.outer(u, u.conj()), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_psd_sqrt_squares_back(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    m = a @ a.conj().T
    root = psd_sqrt(m)
    assert is_hermitian(root)
    assert np.min(np.linalg.eigvalsh(root)) > -1e-10 * np.linalg.norm(m)
    assert np.linalg.norm(root @ root - m) <= 1e-8 * np.linalg.norm(m)


def test_psd_sqrt_rejects_non_hermitian():
    with pytest.raises(ValueError):
        psd_sqrt(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_psd_sqrt_clips_negative_noise():
    m = np.diag([1.0, -1e-14])
    np.testing.assert_allclose(psd_sqrt(m), np.diag([1.0, 0.0]), atol=1e-15)


def test_hermitian_eig_descending():
    w, v = hermitian_eig(np.diag([1.0, 3.0, 2.0]))
    np.testing.assert_allclose(w, [3, 2, 1])
    np.testing.assert_allclose(np.abs(v[:, 0]), [0, 1, 0])


def test_logdet_matches_slogdet():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    m = np.eye(6) + a @ a.conj().T
    assert logdet_pd(m) == pytest.approx(np.linalg.slogdet(m)[1], rel=1e-12)

"""Small Hermitian linear-algebra helpers shared by the modelling modules."""

import numpy as np

__all__ = ["psd_sqrt", "hermitian_eig", "logdet_pd", "is_hermitian"]


def is_hermitian(m, atol=1e-10):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    return bool(np.allclose(m, m.conj().T, rtol=0.0, atol=atol * scale))


def hermitian_eig(m):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    Returns
    -------
    w : ndarray
        Real eigenvalues in descending order.
    v : ndarray
        Unitary matrix whose columns are the matching eigenvectors.
    """
    m = np.asarray(m)
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return w[::-1], v[:, ::-1]


def psd_sqrt(m):
    """Hermitian PSD square root via eigendecomposition.

    Negative eigenvalues (numerical noise on a PSD input) are clipped to
    zero before taking the square root.

    Parameters
    ----------
    m : array_like
        Hermitian matrix.

    Returns
    -------
    ndarray
        Hermitian PSD matrix ``s`` with ``s @ s`` equal to ``m`` up to the
        clipped negative part.

    Raises
    ------
    ValueError
        If ``m`` is not square and Hermitian.
    """
    m = np.asarray(getattr(m, "entries", m))
    if not is_hermitian(m):
        raise ValueError("psd_sqrt requires a square Hermitian matrix")
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    root = np.sqrt(np.clip(w, 0.0, None))
    s = (v * root) @ v.conj().T
    return 0.5 * (s + s.conj().T)


def logdet_pd(a):
    """log det of a Hermitian positive-definite matrix through Cholesky."""
    a = np.asarray(a)
    chol = np.linalg.cholesky(0.5 * (a + a.conj().T))
    return 2.0 * float(np.sum(np.log(np.diagonal(chol).real)))

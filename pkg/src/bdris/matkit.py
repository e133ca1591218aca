"""
Dense complex linear algebra used throughout the package.

Thin, contract-checked wrappers over LAPACK (through numpy) plus the
two matrix functions the optimizer relies on: the exponential of a
skew-Hermitian matrix and the Takagi factorization of a complex
symmetric matrix.

All tolerances are relative to the Frobenius norm of the input.
"""

import numpy as np

from .errors import ContractViolation, DecompositionError

_EPS = np.finfo(float).eps


def _as_matrix(a, name="A"):
    a = np.asarray(a)
    if a.ndim != 2:
        raise ContractViolation(f"{name} must be a 2-D matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ContractViolation(f"{name} has non-finite entries")
    return a.astype(complex, copy=False)


def _as_square(a, name="A"):
    a = _as_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise ContractViolation(f"{name} must be square, got {a.shape}")
    return a


def fro(a):
    return float(np.linalg.norm(a))


def hermitian_residual(a):
    return fro(a - a.conj().T)


def unitarity_residual(q):
    """Frobenius distance of ``Q^H Q`` from the identity."""
    q = np.asarray(q)
    return fro(q.conj().T @ q - np.eye(q.shape[1]))


def svd(a):
    """
    Thin singular value decomposition ``A = U diag(s) V^H``.

    Returns ``(U, s, V)`` with ``s`` sorted in descending order. Note that
    ``V`` itself is returned, not its conjugate transpose.
    """
    a = _as_matrix(a)
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"SVD did not converge: {exc}", a.shape) from exc
    return u, s, vh.conj().T


def eigh(a, tol=1e-10):
    """
    Eigendecomposition ``A = W diag(lam) W^H`` of a Hermitian matrix.

    Eigenvalues are returned in ascending order. Raises
    ``ContractViolation`` if ``A`` is not Hermitian to ``tol`` relative
    to its norm.
    """
    a = _as_square(a)
    if hermitian_residual(a) > tol * fro(a):
        raise ContractViolation("eigh: input is not Hermitian")
    a = 0.5 * (a + a.conj().T)
    try:
        lam, w = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"eigh did not converge: {exc}", a.shape) from exc
    return w, lam


def sqrtm_psd(a):
    """Principal square root of a Hermitian positive semidefinite matrix."""
    w, lam = eigh(a)
    root = np.sqrt(np.clip(lam, 0.0, None))
    return (w * root) @ w.conj().T


def skew_spectrum(s, tol=1e-10):
    """
    ``(W, lam)`` with ``S = i W diag(lam) W^H`` for a skew-Hermitian ``S``.

    ``expm(mu S)`` is then ``W diag(exp(i mu lam)) W^H`` for every real ``mu``.
    """
    s = _as_square(s, "S")
    if fro(s + s.conj().T) > tol * fro(s):
        raise ContractViolation("expm_skew: input is not skew-Hermitian")
    return eigh(-1j * s, tol=np.inf)


def expm_skew(s, tol=1e-10):
    """
    Matrix exponential of a skew-Hermitian matrix.

    Computed from the spectral decomposition of the Hermitian matrix
    ``-iS`` so that the result is unitary to working precision.
    """
    s = _as_square(s, "S")
    if not np.any(s):
        return np.eye(s.shape[0], dtype=complex)
    w, lam = skew_spectrum(s, tol)
    return (w * np.exp(1j * lam)) @ w.conj().T


def takagi(a, tol=1e-8):
    """
    Takagi factorization of a complex symmetric matrix.

    Finds a unitary ``Q`` and nonnegative ``sigma`` (descending) with
    ``A = Q diag(sigma) Q^T``. For a unitary symmetric ``A`` every
    ``sigma`` equals one and ``A = Q Q^T``.

    Parameters
    ----------
    a : (m, m) array_like
        Complex symmetric matrix.
    tol : float
        Allowed relative asymmetry ``||A - A^T||_F / ||A||_F``.

    Returns
    -------
    q : (m, m) ndarray
        Unitary Takagi factor.
    sigma : (m,) ndarray
        Takagi values, equal to the singular values of ``A``.

    Notes
    -----
    Writing ``A = B + iC`` and ``q = x + iy``, the condition
    ``A conj(q) = sigma q`` is the real symmetric eigenproblem

        [[B, C], [C, -B]] [x; y] = sigma [x; y],

    whose spectrum is ``+-sigma``. Any orthonormal basis of the
    nonnegative half gives a valid factor, so repeated Takagi values need
    no special handling. A final phase-preserving QR removes the loss of
    orthogonality that can appear among columns with ``sigma`` near zero.
    """
    a = _as_square(a)
    if fro(a - a.T) > tol * fro(a):
        raise ContractViolation("takagi: input is not symmetric")
    m = a.shape[0]
    a = 0.5 * (a + a.T)
    b, c = a.real, a.imag
    embed = np.block([[b, c], [c, -b]])
    try:
        lam, vecs = np.linalg.eigh(embed)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"takagi did not converge: {exc}", a.shape) from exc
    lam = lam[m:][::-1]
    vecs = vecs[:, m:][:, ::-1]
    q = vecs[:m] + 1j * vecs[m:]
    sigma = np.clip(lam, 0.0, None)

    qr_q, r = np.linalg.qr(q)
    d = np.diag(r)
    phase = np.where(np.abs(d) > 0, d / np.where(np.abs(d) > 0, np.abs(d), 1.0), 1.0)
    return qr_q * phase, sigma


def nearest_unitary(a):
    """
    Frobenius-nearest unitary matrix (the unitary polar factor ``U V^H``).

    Raises ``DecompositionError`` if ``A`` is numerically rank deficient.
    """
    a = _as_square(a)
    u, s, v = svd(a)
    n = a.shape[0]
    if s[-1] <= n * _EPS * s[0] or s[0] == 0:
        raise DecompositionError("nearest_unitary: matrix is rank deficient", a.shape)
    return u @ v.conj().T


def random_unitary(rng, m):
    """Haar-distributed unitary matrix from the QR of a Ginibre sample."""
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))

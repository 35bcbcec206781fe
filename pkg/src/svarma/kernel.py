"""
The Woodbury kernel of a scalar MA polynomial.

For ``theta`` of order ``q`` and sample length ``T``::

    lambda = Theta_T^{-1} Theta_{*;T-q}          (T x q)
    Kbar   = I_q + lambda' lambda                (q x q)
    K      = I_T - lambda Kbar^{-1} lambda'  = (I_T + lambda lambda')^{-1}

``K`` is never formed. With the thin QR factorisation ``lambda = Q R``,

    K = (I_T - Q Q') + Q (I_q + R R')^{-1} Q'

which gives the same inner products as ``N'M - N' lambda Kbar^{-1} lambda' M``
but without subtracting two large numbers when ``Theta_T^{-1}`` grows (a
non-invertible ``theta``). The MA(q) autocovariance matrix ``Sigma_T`` satisfies
``Sigma_T^{-1} = Theta_T^{-T} K Theta_T^{-1}`` and
``det(Sigma_T) = det(Kbar)``.
"""
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .polyops import check_theta, invert_series, shift_down
from .roots import roots_of

__all__ = [
    "KernelHandle",
    "SigmaBand",
    "presample_block",
    "build_lambda",
    "build_kernel",
    "inner_product_K",
    "build_sigma",
    "log_det_kbar",
    "szego_limit",
]


def presample_block(theta):
    """The ``q x q`` upper-triangular block coupling presample shocks to the sample.

    Row ``r`` holds ``(0, ..., 0, theta_q, ..., theta_{r+1})``.
    """
    theta = check_theta(theta)
    q = theta.size - 1
    B = np.zeros((q, q))
    for r in range(q):
        for c in range(r, q):
            B[r, c] = theta[q - c + r]
    return B


def build_lambda(theta, T, series=None):
    """``lambda = Theta_T^{-1} Theta_{*;T-q}`` as a ``T x q`` array.

    Column ``c`` is a combination of the inverse series shifted by
    ``0..c`` rows, so no convolution is needed.
    """
    theta = check_theta(theta)
    q = theta.size - 1
    T = int(T)
    if T < q:
        raise ValueError(f"T={T} is smaller than q={q}")
    if series is None:
        series = invert_series(theta, T)
    series = series[:T]
    lam = np.zeros((T, q))
    B = presample_block(theta)
    shifted = np.stack([shift_down(series, r) for r in range(q)], axis=1) if q else lam
    for c in range(q):
        lam[:, c] = shifted[:, :c + 1] @ B[:c + 1, c]
    return lam


@dataclass(frozen=True)
class KernelHandle:
    """Factored form of ``K = (I + lambda lambda')^{-1}``.

    Attributes
    ----------
    lam : ndarray, shape (T, q)
    kbar : ndarray, shape (q, q)
        ``I_q + lam' lam``.
    chol : ndarray, shape (q, q)
        Lower Cholesky factor of ``kbar``.
    basis : ndarray, shape (T, q)
        Orthonormal ``Q`` of ``lam = Q R``.
    inner_chol : ndarray, shape (q, q)
        Lower Cholesky factor of ``I_q + R R'``.
    """

    lam: np.ndarray
    kbar: np.ndarray
    chol: np.ndarray
    basis: np.ndarray
    inner_chol: np.ndarray

    @property
    def T(self):
        return self.lam.shape[0]

    @property
    def q(self):
        return self.lam.shape[1]

    def whiten(self, M):
        """``C^{-1} lam' M`` where ``C C' = Kbar``."""
        if self.q == 0:
            return np.zeros((0,) + np.shape(M)[1:])
        return linalg.solve_triangular(self.chol, self.lam.T @ M, lower=True)


def build_kernel(lam):
    lam = np.asarray(lam, dtype=float)
    if lam.ndim != 2:
        raise ValueError("lambda must be a 2-d array")
    if not np.all(np.isfinite(lam)):
        raise FloatingPointError("lambda has non-finite entries")
    T, q = lam.shape
    kbar = np.eye(q) + lam.T @ lam
    if q == 0:
        empty = np.zeros((0, 0))
        return KernelHandle(lam=lam, kbar=kbar, chol=empty, basis=np.zeros((T, 0)),
                            inner_chol=empty)
    if T < q:
        raise ValueError(f"lambda has {T} rows, fewer than its {q} columns")
    Q, R = np.linalg.qr(lam)
    try:
        chol = np.linalg.cholesky(kbar)
        inner = np.linalg.cholesky(np.eye(q) + R @ R.T)
    except np.linalg.LinAlgError as exc:
        # Kbar >= I analytically, so this only happens on corrupted input
        raise FloatingPointError("Cholesky factorisation of Kbar failed") from exc
    return KernelHandle(lam=lam, kbar=kbar, chol=chol, basis=Q, inner_chol=inner)


def inner_product_K(handle, N, M):
    """``N' K M`` without materialising the ``T x T`` matrix ``K``.

    Equal to ``N'M - (C^{-1} lam' N)' (C^{-1} lam' M)`` with ``C C' = Kbar``;
    evaluated in the projected form ``(P N)'(P M) + (D^{-1} Q'N)'(D^{-1} Q'M)``
    where ``P = I - QQ'`` and ``D D' = I + RR'``.
    """
    N = np.asarray(N, dtype=float)
    M = np.asarray(M, dtype=float)
    if N.shape[0] != handle.T or M.shape[0] != handle.T:
        raise ValueError(
            f"row counts {N.shape[0]}, {M.shape[0]} do not match T={handle.T}")
    if not handle.q:
        return N.T @ M
    Q = handle.basis
    QN = Q.T @ N
    QM = Q.T @ M
    PN = N - Q @ QN
    PM = M - Q @ QM
    DN = linalg.solve_triangular(handle.inner_chol, QN, lower=True)
    DM = linalg.solve_triangular(handle.inner_chol, QM, lower=True)
    return PN.T @ PM + DN.T @ DM


@dataclass(frozen=True)
class SigmaBand:
    """Banded MA(q) autocovariance matrix, unit innovation variance."""

    gamma: np.ndarray
    T: int

    def to_dense(self):
        col = np.zeros(self.T)
        n = min(self.T, self.gamma.size)
        col[:n] = self.gamma[:n]
        return linalg.toeplitz(col)

    def scaled(self, c):
        return SigmaBand(gamma=self.gamma * c, T=self.T)


def build_sigma(theta, T):
    """Autocovariances ``gamma_l = sum_i theta_i theta_{i+l}`` of ``theta(L) eps``."""
    theta = check_theta(theta)
    if int(T) < 1:
        raise ValueError("T must be >= 1")
    q = theta.size - 1
    gamma = np.array([theta[:q + 1 - l] @ theta[l:] for l in range(q + 1)])
    return SigmaBand(gamma=gamma, T=int(T))


def log_det_kbar(handle):
    """``log det Kbar``, equal to ``log det Sigma_T``."""
    if handle.q == 0:
        return 0.0
    return 2.0 * float(np.sum(np.log(np.diag(handle.chol))))


def szego_limit(theta):
    """Large-``T`` limit of ``1/det(Sigma_T)`` for invertible ``theta``.

    ``theta(1) * theta(-1) * prod_{i<j} (1 - l_i l_j)^2`` over the inverse
    roots ``l_i`` of ``theta(L)``.
    """
    theta = check_theta(theta)
    q = theta.size - 1
    if q == 0:
        return 1.0
    lam = roots_of(theta).roots
    if np.max(np.abs(lam)) >= 1.0:
        raise ValueError("theta is not invertible; the limit does not exist")
    signs = (-1.0) ** np.arange(q + 1)
    val = theta.sum() * (signs @ theta)
    iu, ju = np.triu_indices(q, k=1)
    val = val * np.prod((1.0 - lam[iu] * lam[ju]) ** 2)
    return float(np.real(val))

"""
Slow dense reference implementations for tests.

Nothing in the production modules imports this file. Every routine here
works with explicit ``T x T`` (or ``Tk x Tk``) matrices and generic dense
linear algebra, independently of the Toeplitz/Woodbury machinery.
"""
import numpy as np
from scipy import linalg

from .likelihood import raw_design, residuals
from .polyops import check_theta

MAX_DENSE = 4096


def series_by_division(theta, T):
    """Inverse power series by explicit long division (pure Python loop)."""
    theta = [float(t) for t in check_theta(theta)]
    c = [0.0] * T
    c[0] = 1.0
    for j in range(1, T):
        acc = 0.0
        for i in range(1, min(j, len(theta) - 1) + 1):
            acc -= theta[i] * c[j - i]
        c[j] = acc
    return np.array(c)


def dense_theta(theta, T):
    """``Theta_T``: banded lower-triangular Toeplitz matrix of theta."""
    theta = check_theta(theta)
    col = np.zeros(T)
    n = min(T, theta.size)
    col[:n] = theta[:n]
    return linalg.toeplitz(col, np.zeros(T))


def dense_presample(theta, T):
    """``Theta_{*;T-q}``: presample coupling, rows ``Z_{p+1..}`` on ``eps_{p-q+1..p}``."""
    theta = check_theta(theta)
    q = theta.size - 1
    M = np.zeros((T, q))
    # Z_{p+1+r} picks up theta_{r+1+s} * eps_{p-s}, s = 0..q-1-r; eps_{p-s} is column q-1-s
    for r in range(min(T, q)):
        for s in range(q - r):
            M[r, q - 1 - s] = theta[r + 1 + s]
    return M


def dense_lambda(theta, T):
    return linalg.solve_triangular(dense_theta(theta, T), dense_presample(theta, T), lower=True)


def dense_sigma(theta, T):
    """MA(q) autocovariance matrix from ``Theta_T Theta_T' + Theta_* Theta_*'``."""
    A = dense_theta(theta, T)
    B = dense_presample(theta, T)
    return A @ A.T + B @ B.T


def dense_k_matrix(theta, T):
    """Explicit ``K = (I_T + lambda lambda')^{-1}`` by dense inversion."""
    if T > 512:
        raise ValueError("dense K is limited to T <= 512")
    lam = dense_lambda(theta, T)
    return np.linalg.inv(np.eye(T) + lam @ lam.T)


def _kron_cov(theta, omega, T):
    return np.kron(dense_sigma(theta, T), np.asarray(omega, dtype=float))


def dense_loglik(spec, xhat, regs, cross_check=False):
    """Gaussian log-density of ``v(Z)`` under ``Sigma_T (x) Omega``."""
    Z = residuals(spec, xhat, regs)
    T, k = Z.shape
    if T * k > MAX_DENSE:
        raise ValueError(f"dense oracle limited to T*k <= {MAX_DENSE}")
    cov = _kron_cov(spec.theta, spec.omega, T)
    v = Z.reshape(-1)  # rows first
    c, low = linalg.cho_factor(cov, lower=True)
    logdet = 2.0 * np.sum(np.log(np.diag(c)))
    quad = v @ linalg.cho_solve((c, low), v)
    if cross_check:
        from .kernel import build_kernel, build_lambda, log_det_kbar
        sig = np.linalg.slogdet(dense_sigma(spec.theta, T))[1]
        fast = log_det_kbar(build_kernel(build_lambda(spec.theta, T)))
        if not np.isclose(sig, fast, rtol=1e-9, atol=1e-9):
            raise AssertionError(f"log det Sigma_T {sig} != log det Kbar {fast}")
    return -0.5 * (T * k * np.log(2 * np.pi) + logdet + quad)


def dense_gls(theta, xhat, regs):
    """``Sigma_T^{-1}``-weighted regression of ``X`` on ``(D, LX, .., L^pX)``.

    Returns
    -------
    B : ndarray
        Stacked coefficients.
    omega : ndarray
        Concentrated covariance.
    """
    Xlag, X = raw_design(xhat, regs)
    T = X.shape[0]
    Sinv = np.linalg.inv(dense_sigma(theta, T))
    A = Xlag.T @ Sinv @ Xlag
    B = np.linalg.solve(A, Xlag.T @ Sinv @ X) if Xlag.shape[1] else np.zeros((0, X.shape[1]))
    R = X - Xlag @ B
    omega = R.T @ Sinv @ R / T
    return B, 0.5 * (omega + omega.T)


def dense_profile_loglik(theta, xhat, regs):
    """Profile likelihood from the dense GLS fit."""
    _, X = raw_design(xhat, regs)
    T, k = X.shape
    _, omega = dense_gls(theta, xhat, regs)
    logdet_sigma = np.linalg.slogdet(dense_sigma(theta, T))[1]
    logdet_omega = np.linalg.slogdet(omega)[1]
    return -0.5 * (T * k * np.log(2 * np.pi) + T * logdet_omega + k * logdet_sigma + T * k)


def central_difference(f, x, h=1e-5):
    """Per-coordinate central finite-difference gradient of scalar ``f``."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g

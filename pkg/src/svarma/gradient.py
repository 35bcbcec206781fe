"""
Analytic gradient of the profile log-likelihood with respect to theta.

Derivative ingredients, with ``S^j`` the downward shift by ``j`` rows::

    d_j Theta^{-1} A   = -S^j Theta^{-1} Theta^{-1} A
    d_j lambda         = -S^j Theta^{-1} lambda + (0_{T,q-j} | first j columns of Theta^{-1})
    d_j Kbar           = d_j lambda' lambda + lambda' d_j lambda
    d_j K              = -d_j lambda Kbar^{-1} lambda' - lambda Kbar^{-1} d_j lambda'
                         + lambda Kbar^{-1} d_j Kbar Kbar^{-1} lambda'

and ``d_j Lbar = -T/2 tr(Omega^{-1} d_j Omega) - k/2 tr(Kbar^{-1} d_j Kbar)``.
"""
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .likelihood import Problem, _profile_from_problem
from .polyops import shift_down, toeplitz_apply

__all__ = [
    "GradientReport",
    "grad_profile_loglik",
    "grad_chain",
    "d_inner_product_K",
    "lambda_derivatives",
]


@dataclass
class GradientReport:
    """Gradient of the profile likelihood and its two parts.

    Attributes
    ----------
    grad : ndarray, shape (q,)
    grad_omega : ndarray
        ``-T/2 d log det Omega_opt``.
    grad_kbar : ndarray
        ``-k/2 d log det Kbar``.
    loglik : float
        Profile likelihood at the same point.
    """

    grad: np.ndarray
    grad_omega: np.ndarray
    grad_kbar: np.ndarray
    loglik: float


def lambda_derivatives(prob):
    """``d lambda / d theta_j`` for ``j = 1..q`` as a list of ``T x q`` arrays."""
    lam = prob.handle.lam
    T, q = lam.shape
    s = prob.series[:T]
    inv_lam = toeplitz_apply(s, lam)
    out = []
    for j in range(1, q + 1):
        d = -shift_down(inv_lam, j)
        for c in range(j):
            d[:, q - j + c] += shift_down(s, c)
        out.append(d)
    return out


def d_inner_product_K(handle, A, dA, B, dB, dlam):
    """Derivative of ``A' K B`` by the product rule, without symmetry shortcuts."""
    lam = handle.lam
    cho = (handle.chol, True)
    dKbar = dlam.T @ lam + lam.T @ dlam
    Kinv_lB = linalg.cho_solve(cho, lam.T @ B)
    Kinv_lA = linalg.cho_solve(cho, lam.T @ A)
    out = dA.T @ B - (dA.T @ lam) @ Kinv_lB
    out += A.T @ dB - Kinv_lA.T @ (lam.T @ dB)
    out -= (A.T @ dlam) @ Kinv_lB
    out -= Kinv_lA.T @ (dlam.T @ B)
    out += Kinv_lA.T @ dKbar @ Kinv_lB
    return out


def _d_gram(prob, W, dlams):
    """``d(G'KG)/d theta_j`` using the symmetric half ``M + M'``."""
    G = prob.G
    lam = prob.handle.lam
    cho = (prob.handle.chol, True)
    U = lam.T @ G
    KU = linalg.cho_solve(cho, U)  # Kbar^{-1} lam' G
    T = G.shape[0]
    out = []
    for j, dlam in enumerate(dlams, start=1):
        dG = -shift_down(W, j)
        dKbar = dlam.T @ lam + lam.T @ dlam
        V = dlam.T @ G
        M = dG.T @ G - (dG.T @ lam) @ KU - V.T @ KU + 0.5 * KU.T @ dKbar @ KU
        out.append((M + M.T, dKbar))
    return out


def grad_profile_loglik(theta, xhat, regs):
    """Gradient of the profile log-likelihood in ``theta_1..theta_q``.

    Returns
    -------
    GradientReport
    """
    prob = Problem(theta, xhat, regs)
    report = _profile_from_problem(prob)
    T, k, m = prob.T, prob.k, prob.m
    q = prob.theta.size - 1
    if q == 0:
        z = np.zeros(0)
        return GradientReport(grad=z, grad_omega=z.copy(), grad_kbar=z.copy(),
                              loglik=report.loglik)
    W = toeplitz_apply(prob.series[:T], prob.G)
    dlams = lambda_derivatives(prob)
    B = prob.coefficients()
    omega = report.omega
    cho_o = linalg.cho_factor(omega, lower=True)
    cho_k = (prob.handle.chol, True)
    g_om = np.empty(q)
    g_kb = np.empty(q)
    for j, (dS, dKbar) in enumerate(_d_gram(prob, W, dlams)):
        dSxy = dS[:m, m:]
        dSyy = dS[m:, m:]
        dW = dSyy
        if m:
            cross = dSxy.T @ B
            dW = dSyy - cross - cross.T + B.T @ dS[:m, :m] @ B
        d_omega = dW / T
        g_om[j] = -0.5 * T * np.trace(linalg.cho_solve(cho_o, d_omega))
        g_kb[j] = -0.5 * k * np.trace(linalg.cho_solve(cho_k, dKbar))
    return GradientReport(grad=g_om + g_kb, grad_omega=g_om, grad_kbar=g_kb,
                          loglik=report.loglik)


def grad_chain(theta_of_params, jac, params, xhat, regs):
    """Gradient in a lower-dimensional parameterisation ``theta(params)``.

    Parameters
    ----------
    theta_of_params : callable
        Maps the parameter vector to a full MA polynomial ``(1, theta_1..)``.
    jac : array_like or callable
        ``d theta_i / d params_j`` of shape (q, m), or a callable giving it.
    params : array_like
    xhat, regs
        As for :func:`grad_profile_loglik`.

    Returns
    -------
    ndarray, shape (m,)
    """
    params = np.atleast_1d(np.asarray(params, dtype=float))
    J = np.atleast_2d(jac(params) if callable(jac) else np.asarray(jac, dtype=float))
    theta = theta_of_params(params)
    g = grad_profile_loglik(theta, xhat, regs).grad
    if J.shape != (g.size, params.size):
        raise ValueError(f"jacobian shape {J.shape} != ({g.size}, {params.size})")
    return g @ J

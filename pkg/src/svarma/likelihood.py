"""
Conditional Gaussian log-likelihood of a VARMA model with scalar MA part

    X_t = mu + X_{t-1} Phi_1 + ... + X_{t-p} Phi_p
          + eps_t + theta_1 eps_{t-1} + ... + theta_q eps_{t-q}

(rows are observations), conditioned on the first ``p`` rows of the
sample. For fixed ``theta`` the regression coefficients and ``Omega`` have
closed forms; a GLS fit under the inner product ``Theta^{-T} K Theta^{-1}``.
"""
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg

from .kernel import build_kernel, build_lambda, inner_product_K, log_det_kbar
from .polyops import check_theta, invert_series, theta_inverse_lags, toeplitz_apply

__all__ = [
    "RegressorSet",
    "VarmaSpec",
    "LikelihoodReport",
    "RankDeficientError",
    "DegenerateSampleError",
    "residuals",
    "conditional_loglik",
    "optimal_regression",
    "optimal_omega",
    "profile_loglik",
]

LOG2PI = np.log(2.0 * np.pi)


class RankDeficientError(np.linalg.LinAlgError):
    """The weighted regression design does not have full column rank."""

    def __init__(self, msg, smallest_singular_value=None):
        super().__init__(msg)
        self.smallest_singular_value = smallest_singular_value


class DegenerateSampleError(np.linalg.LinAlgError):
    """The fitted innovation covariance is singular."""


@dataclass(frozen=True)
class RegressorSet:
    """Deterministic columns and lag order of the regression.

    Parameters
    ----------
    p : int
        AR order; the first ``p`` sample rows are conditioned on.
    constant : bool
        Include an intercept ``mu``.
    trend_degree : int
        Add ``(t/T)^d`` for ``d = 1..trend_degree``, ``t = 1..T``.
    seasonal_period : int
        Add seasonal dummies for a period ``s >= 2``: ``s - 1`` columns
        with an intercept, ``s`` without.
    ridge : bool
        On a rank-deficient design, add ``1e-8 * trace / ncols`` to the
        diagonal instead of raising.
    """

    p: int = 0
    constant: bool = True
    trend_degree: int = 0
    seasonal_period: int = 0
    ridge: bool = False

    def __post_init__(self):
        if self.p < 0 or self.trend_degree < 0 or self.seasonal_period < 0:
            raise ValueError("orders must be non-negative")

    @property
    def n_seasonal(self):
        s = self.seasonal_period
        if s < 2:
            return 0
        return s - 1 if self.constant else s

    @property
    def n_deterministic(self):
        return int(self.constant) + self.trend_degree + self.n_seasonal

    @property
    def n_extra(self):
        """Deterministic columns other than the intercept."""
        return self.trend_degree + self.n_seasonal

    def deterministic(self, T):
        """Deterministic design, shape (T, n_deterministic), for rows ``t = 1..T``."""
        t = np.arange(1, T + 1, dtype=float)
        cols = []
        if self.constant:
            cols.append(np.ones(T))
        for d in range(1, self.trend_degree + 1):
            cols.append((t / T) ** d)
        s = self.seasonal_period
        if s >= 2:
            season = (np.arange(T)) % s
            first = 1 if self.constant else 0
            for j in range(first, s):
                cols.append((season == j).astype(float))
        if not cols:
            return np.zeros((T, 0))
        return np.column_stack(cols)


@dataclass
class VarmaSpec:
    """Full parameterisation of a scalar-MA VARMA(p, q) model.

    ``phi`` has shape (p, k, k) with ``phi[i-1]`` multiplying ``X_{t-i}``
    from the right; ``beta_extra`` holds coefficients of deterministic
    columns beyond the intercept (trend, seasonal).
    """

    theta: np.ndarray
    mu: np.ndarray
    phi: np.ndarray
    omega: np.ndarray
    beta_extra: Optional[np.ndarray] = None

    def __post_init__(self):
        self.theta = check_theta(self.theta)
        self.mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        k = self.mu.size
        self.omega = np.atleast_2d(np.asarray(self.omega, dtype=float))
        phi = np.asarray(self.phi, dtype=float)
        if phi.size == 0:
            phi = np.zeros((0, k, k))
        self.phi = phi.reshape(-1, k, k)
        if self.omega.shape != (k, k):
            raise ValueError(f"omega must be {k}x{k}")
        if not np.allclose(self.omega, self.omega.T, rtol=0, atol=1e-12 * (1 + np.abs(self.omega).max())):
            raise ValueError("omega must be symmetric")
        if self.beta_extra is not None:
            self.beta_extra = np.asarray(self.beta_extra, dtype=float).reshape(-1, k)

    @property
    def k(self):
        return self.mu.size

    @property
    def p(self):
        return self.phi.shape[0]

    @property
    def q(self):
        return self.theta.size - 1

    @property
    def omega_is_pd(self):
        return bool(np.min(np.linalg.eigvalsh(self.omega)) > 0)

    def regression_block(self, regs):
        """Stacked coefficients matching the design built from ``regs``."""
        k = self.k
        rows = []
        if regs.constant:
            rows.append(self.mu[None, :])
        elif np.any(self.mu != 0):
            raise ValueError("regressor set has no intercept but mu is non-zero")
        extra = self.beta_extra if self.beta_extra is not None else np.zeros((0, k))
        if extra.shape[0] != regs.n_extra:
            if extra.shape[0] == 0:
                extra = np.zeros((regs.n_extra, k))
            else:
                raise ValueError(
                    f"beta_extra has {extra.shape[0]} rows, regressor set needs {regs.n_extra}")
        rows.append(extra)
        rows.extend(self.phi)
        return np.vstack(rows) if rows else np.zeros((0, k))

    @classmethod
    def from_regression(cls, theta, B, omega, regs, k):
        """Unstack ``(mu; extras; Phi_1; ...; Phi_p)`` into a spec."""
        B = np.asarray(B, dtype=float).reshape(-1, k)
        i = 0
        mu = np.zeros(k)
        if regs.constant:
            mu = B[0].copy()
            i = 1
        extra = B[i:i + regs.n_extra].copy()
        i += regs.n_extra
        phi = B[i:].reshape(regs.p, k, k).copy()
        return cls(theta=theta, mu=mu, phi=phi, omega=omega,
                   beta_extra=extra if regs.n_extra else None)


@dataclass
class LikelihoodReport:
    """Log-likelihood in nats with its additive parts.

    ``term_trace`` is ``-Tk/2`` when the covariance is profiled out.
    """

    loglik: float
    term_const: float
    term_omega: float
    term_kbar: float
    term_trace: float
    T: int
    k: int
    mu: Optional[np.ndarray] = None
    phi: Optional[np.ndarray] = None
    omega: Optional[np.ndarray] = None
    beta: Optional[np.ndarray] = None
    beta_extra: Optional[np.ndarray] = None
    ridge_applied: bool = False
    extras: dict = field(default_factory=dict)

    @classmethod
    def from_terms(cls, term_const, term_omega, term_kbar, term_trace, **kw):
        loglik = term_const + term_omega + term_kbar + term_trace
        return cls(loglik=float(loglik), term_const=float(term_const),
                   term_omega=float(term_omega), term_kbar=float(term_kbar),
                   term_trace=float(term_trace), **kw)

    def as_dict(self):
        out = {
            "loglik": self.loglik,
            "term_const": self.term_const,
            "term_omega": self.term_omega,
            "term_kbar": self.term_kbar,
            "term_trace": self.term_trace,
            "T": self.T,
            "k": self.k,
            "ridge_applied": self.ridge_applied,
        }
        for name in ("mu", "phi", "omega", "beta_extra"):
            val = getattr(self, name)
            if val is not None:
                out[name] = np.asarray(val).tolist()
        return out


def _as_sample(xhat, p):
    xhat = np.asarray(xhat, dtype=float)
    if xhat.ndim == 1:
        xhat = xhat[:, None]
    if xhat.ndim != 2:
        raise ValueError("sample must be a (T+p) x k matrix")
    if not np.all(np.isfinite(xhat)):
        raise ValueError("sample has non-finite values")
    T = xhat.shape[0] - p
    if T < 1:
        raise ValueError(f"sample has {xhat.shape[0]} rows; need more than p={p}")
    return xhat, T


def raw_design(xhat, regs):
    """Untransformed regressors ``(D, L X, ..., L^p X)`` and target ``X``."""
    xhat, T = _as_sample(xhat, regs.p)
    p = regs.p
    lags = [xhat[p - i:p - i + T] for i in range(1, p + 1)]
    Xlag = np.hstack([regs.deterministic(T)] + lags)
    return Xlag, xhat[p:]


class Problem:
    """Transformed design ``Theta^{-1}(D, LX, .., L^pX | X)`` and its kernel.

    Shared by the likelihood and gradient routines; everything derived
    from ``(theta, sample, regressors)`` alone is computed once here.
    """

    def __init__(self, theta, xhat, regs):
        self.theta = check_theta(theta)
        self.regs = regs
        self.xhat, self.T = _as_sample(xhat, regs.p)
        self.k = self.xhat.shape[1]
        T, p = self.T, regs.p
        q = self.theta.size - 1
        if T < q:
            raise ValueError(f"T={T} must be at least q={q}")
        self.series = invert_series(self.theta, T + p)
        lags = theta_inverse_lags(self.theta, self.xhat, p, self.series)
        D = regs.deterministic(T)
        Dth = toeplitz_apply(self.series[:T], D) if D.shape[1] else D
        self.Gx = np.hstack([Dth] + lags[1:])
        self.Gy = lags[0]
        self.G = np.hstack([self.Gx, self.Gy])
        self.m = self.Gx.shape[1]
        self.handle = build_kernel(build_lambda(self.theta, T, self.series))
        S = inner_product_K(self.handle, self.G, self.G)
        self.S = 0.5 * (S + S.T)
        self.ridge_applied = False
        self._cho = None

    @property
    def Sxx(self):
        return self.S[:self.m, :self.m]

    @property
    def Sxy(self):
        return self.S[:self.m, self.m:]

    @property
    def Syy(self):
        return self.S[self.m:, self.m:]

    def factor(self):
        """Cholesky factor of the weighted normal matrix (ridged if allowed)."""
        if self._cho is not None:
            return self._cho
        m = self.m
        if m == 0:
            self._cho = (np.zeros((0, 0)), True)
            return self._cho
        if self.T <= m:
            raise RankDeficientError(
                f"T={self.T} observations for {m} regression columns")
        A = self.Sxx
        try:
            cho = linalg.cho_factor(A, lower=True)
            d = np.diag(cho[0]) ** 2
            if np.min(d) <= 1e-13 * np.max(np.abs(np.diag(A))):
                raise np.linalg.LinAlgError
        except (np.linalg.LinAlgError, ValueError):
            sv = np.linalg.svd(A, compute_uv=False)
            if not self.regs.ridge:
                raise RankDeficientError(
                    f"weighted design is rank deficient (smallest singular value {sv[-1]:.3e})",
                    smallest_singular_value=float(sv[-1])) from None
            eps = 1e-8 * np.trace(A) / m
            warnings.warn(f"rank-deficient design; ridge {eps:.3e} added", RuntimeWarning)
            cho = linalg.cho_factor(A + eps * np.eye(m), lower=True)
            self.ridge_applied = True
        self._cho = cho
        return cho

    def coefficients(self):
        if self.m == 0:
            return np.zeros((0, self.k))
        return linalg.cho_solve(self.factor(), self.Sxy)

    def omega(self):
        B = self.coefficients()
        W = self.Syy - self.Sxy.T @ B if self.m else self.Syy.copy()
        W = 0.5 * (W + W.T)
        return W / self.T


def _check_omega(omega):
    try:
        return np.linalg.cholesky(omega)
    except np.linalg.LinAlgError:
        raise ValueError("omega is not positive definite") from None


def residuals(spec, xhat, regs):
    """``Z = X - mu - L X Phi_1 - ... - L^p X Phi_p`` (minus any extra regressors)."""
    if spec.p != regs.p:
        raise ValueError(f"spec has p={spec.p}, regressor set p={regs.p}")
    Xlag, X = raw_design(xhat, regs)
    if X.shape[1] != spec.k:
        raise ValueError(f"sample has {X.shape[1]} columns, spec k={spec.k}")
    return X - Xlag @ spec.regression_block(regs)


def conditional_loglik(spec, xhat, regs):
    """Conditional log-likelihood at fixed ``(theta, mu, Phi, Omega)``.

    Returns
    -------
    LikelihoodReport
    """
    if spec.p != regs.p:
        raise ValueError(f"spec has p={spec.p}, regressor set p={regs.p}")
    Lo = _check_omega(spec.omega)
    prob = Problem(spec.theta, xhat, regs)
    if prob.k != spec.k:
        raise ValueError(f"sample has {prob.k} columns, spec k={spec.k}")
    T, k = prob.T, prob.k
    Zth = prob.Gy - prob.Gx @ spec.regression_block(regs)
    Q = inner_product_K(prob.handle, Zth, Zth)
    Y = linalg.solve_triangular(Lo, Q, lower=True)
    tr = np.trace(linalg.solve_triangular(Lo, Y.T, lower=True))
    logdet_omega = 2.0 * np.sum(np.log(np.diag(Lo)))
    return LikelihoodReport.from_terms(
        -0.5 * T * k * LOG2PI,
        -0.5 * T * logdet_omega,
        -0.5 * k * log_det_kbar(prob.handle),
        -0.5 * tr,
        T=T, k=k, mu=spec.mu, phi=spec.phi, omega=spec.omega,
        beta=spec.regression_block(regs), beta_extra=spec.beta_extra)


def optimal_regression(theta, xhat, regs):
    """GLS-optimal stacked ``(mu; extras; Phi_1; ...; Phi_p)``; independent of Omega."""
    return Problem(theta, xhat, regs).coefficients()


def optimal_omega(theta, xhat, regs):
    """Concentrated innovation covariance at the optimal regression."""
    return Problem(theta, xhat, regs).omega()


def _profile_from_problem(prob):
    T, k = prob.T, prob.k
    B = prob.coefficients()
    omega = prob.omega()
    try:
        Lo = np.linalg.cholesky(omega)
    except np.linalg.LinAlgError:
        raise DegenerateSampleError("optimal Omega is singular for this sample") from None
    logdet = 2.0 * np.sum(np.log(np.diag(Lo)))
    spec = VarmaSpec.from_regression(prob.theta, B, omega, prob.regs, k)
    return LikelihoodReport.from_terms(
        -0.5 * T * k * LOG2PI,
        -0.5 * T * logdet,
        -0.5 * k * log_det_kbar(prob.handle),
        -0.5 * T * k,
        T=T, k=k, mu=spec.mu, phi=spec.phi, omega=omega, beta=B,
        beta_extra=spec.beta_extra, ridge_applied=prob.ridge_applied)


def profile_loglik(theta, xhat, regs):
    """Log-likelihood with ``mu, Phi, Omega`` concentrated out.

    Returns
    -------
    LikelihoodReport
        Carries the fitted ``mu``, ``phi`` and ``omega``.
    """
    return _profile_from_problem(Problem(theta, xhat, regs))

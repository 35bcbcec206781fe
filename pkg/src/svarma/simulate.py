"""
Synthetic samples and the matrix-MA to scalar-MA conversion.

A matrix system ``D(L) x_t = N(L) e_t`` (column vectors, ``N_0 = D_0 = I``)
is rewritten with a scalar MA polynomial by multiplying through with the
adjugate of ``N``::

    adj(N(L)) D(L) x_t = det(N(L)) e_t

so ``theta(L) = det N(L)`` and the AR polynomial is ``adj(N(L)) D(L)``.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import signal

from .likelihood import VarmaSpec

__all__ = [
    "NoiseConfig",
    "MatrixVarma",
    "ScalarForm",
    "UnstableModelError",
    "default_burn_in",
    "companion_radius",
    "simulate_varma",
    "simulate_matrix_varma",
    "matrix_to_scalar",
    "transfer_deviation",
    "polymat_mul",
    "polymat_det",
    "polymat_adjugate",
    "polymat_eval",
]


class UnstableModelError(ValueError):
    pass


@dataclass(frozen=True)
class NoiseConfig:
    """RNG seed and number of discarded start-up rows (None: default burn-in)."""

    seed: int = 0
    burn_in: Optional[int] = None


def default_burn_in(p, q):
    return 10 * (p + q + 50)


def companion_radius(phi):
    """Spectral radius of the companion matrix of ``X_t = sum X_{t-i} Phi_i``."""
    phi = np.asarray(phi, dtype=float)
    p = phi.shape[0]
    if p == 0:
        return 0.0
    k = phi.shape[1]
    C = np.zeros((k * p, k * p))
    # row-vector recursion: state (X_{t-1}, ..., X_{t-p}) multiplied on the right
    C[:, :k] = np.vstack(list(phi))
    if p > 1:
        C[:k * (p - 1), k:] = np.eye(k * (p - 1))
    return float(np.max(np.abs(np.linalg.eigvals(C))))


def _noise_factor(omega):
    omega = np.atleast_2d(np.asarray(omega, dtype=float))
    try:
        return np.linalg.cholesky(omega)
    except np.linalg.LinAlgError:
        w, V = np.linalg.eigh(omega)
        if np.min(w) < -1e-12 * max(1.0, np.max(np.abs(w))):
            raise ValueError("omega is not positive semi-definite") from None
        return V * np.sqrt(np.clip(w, 0, None))


def simulate_varma(spec, T, noise=NoiseConfig(), allow_unstable=False):
    """Draw ``T + p`` rows from a scalar-MA VARMA model.

    Parameters
    ----------
    spec : VarmaSpec
        Model; only the intercept ``mu`` is used as deterministic term.
    T : int
        Number of rows after the ``p`` conditioning rows.
    noise : NoiseConfig
    allow_unstable : bool
        Permit a non-stationary AR part; then the default burn-in is 0.

    Returns
    -------
    ndarray, shape (T + p, k)
    """
    p, q, k = spec.p, spec.q, spec.k
    stable = companion_radius(spec.phi) < 1.0
    if not stable and not allow_unstable:
        raise UnstableModelError("AR part is not stable; pass allow_unstable=True")
    burn = noise.burn_in
    if burn is None:
        burn = default_burn_in(p, q) if stable else 0
    if burn < 0:
        raise ValueError("burn_in must be non-negative")
    n = burn + int(T) + p
    rng = np.random.default_rng(noise.seed)
    eps = rng.standard_normal((n + q, k)) @ _noise_factor(spec.omega).T
    Z = signal.lfilter(spec.theta, [1.0], eps, axis=0)[q:]
    X = np.zeros((n, k))
    for t in range(n):
        row = spec.mu + Z[t]
        for i in range(1, min(p, t) + 1):
            row = row + X[t - i] @ spec.phi[i - 1]
        X[t] = row
    return X[burn:]


@dataclass
class MatrixVarma:
    """``D(L) x_t = N(L) e_t`` with matrix polynomials in column convention.

    ``N`` and ``D`` have shape (degree + 1, k, k) with identity leading terms.
    """

    N: np.ndarray
    D: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        self.N = np.asarray(self.N, dtype=float)
        self.D = np.asarray(self.D, dtype=float)
        self.omega = np.atleast_2d(np.asarray(self.omega, dtype=float))
        k = self.k
        for name, P in (("N", self.N), ("D", self.D)):
            if P.ndim != 3 or P.shape[1:] != (k, k):
                raise ValueError(f"{name} must have shape (deg+1, {k}, {k})")
            if not np.array_equal(P[0], np.eye(k)):
                raise ValueError(f"{name}_0 must be the identity")

    @property
    def k(self):
        return self.N.shape[1]

    @classmethod
    def from_row_form(cls, phi, theta_mats, omega):
        """From ``X_t = sum X_{t-i} Phi_i + eps_t + sum eps_{t-j} Theta_j`` (row vectors)."""
        phi = np.asarray(phi, dtype=float)
        theta_mats = np.asarray(theta_mats, dtype=float)
        k = np.atleast_2d(omega).shape[0]
        phi = phi.reshape(-1, k, k)
        theta_mats = theta_mats.reshape(-1, k, k)
        I = np.eye(k)[None]
        D = np.concatenate([I, -np.transpose(phi, (0, 2, 1))])
        N = np.concatenate([I, np.transpose(theta_mats, (0, 2, 1))])
        return cls(N=N, D=D, omega=omega)


def simulate_matrix_varma(model, n_rows, noise=NoiseConfig()):
    """Draw ``n_rows`` observations (as rows) from a matrix VARMA system."""
    k = model.k
    r = model.D.shape[0] - 1
    s = model.N.shape[0] - 1
    burn = default_burn_in(r, s) if noise.burn_in is None else noise.burn_in
    n = burn + int(n_rows)
    rng = np.random.default_rng(noise.seed)
    e = rng.standard_normal((n + s, k)) @ _noise_factor(model.omega).T
    # rows of e and x are transposed column vectors, so coefficients act as M'
    u = np.zeros((n, k))
    for j in range(s + 1):
        u += e[s - j:s - j + n] @ model.N[j].T
    x = np.zeros((n, k))
    for t in range(n):
        row = u[t].copy()
        for i in range(1, min(r, t) + 1):
            row -= x[t - i] @ model.D[i].T
        x[t] = row
    return x[burn:]


def polymat_mul(A, B):
    """Product of matrix polynomials given as (deg+1, k, k) coefficient stacks."""
    A = np.asarray(A)
    B = np.asarray(B)
    out = np.zeros((A.shape[0] + B.shape[0] - 1, A.shape[1], B.shape[2]),
                   dtype=np.result_type(A, B))
    for i in range(A.shape[0]):
        for j in range(B.shape[0]):
            out[i + j] += A[i] @ B[j]
    return out


def polymat_eval(P, z):
    """Evaluate a matrix polynomial at complex ``z``."""
    P = np.asarray(P)
    return sum(P[d] * z ** d for d in range(P.shape[0]))


def _entry(P, i, j):
    return P[:, i, j]


def _pdet(entries):
    """Determinant of a matrix of 1-d polynomial coefficient arrays (cofactor expansion)."""
    k = len(entries)
    if k == 1:
        return entries[0][0]
    total = np.zeros(1)
    for j in range(k):
        minor = [row[:j] + row[j + 1:] for row in entries[1:]]
        term = np.convolve(entries[0][j], _pdet(minor))
        if j % 2:
            term = -term
        n = max(total.size, term.size)
        total = np.pad(total, (0, n - total.size)) + np.pad(term, (0, n - term.size))
    return total


def _as_entries(P):
    k = P.shape[1]
    return [[_entry(P, i, j) for j in range(k)] for i in range(k)]


def _trim(c, tol=1e-14):
    c = np.asarray(c)
    scale = max(1.0, float(np.max(np.abs(c)))) if c.size else 1.0
    n = c.shape[0]
    while n > 1 and np.all(np.abs(c[n - 1]) <= tol * scale):
        n -= 1
    return c[:n]


def _interp_det_adj(P):
    """det and adjugate by evaluation at roots of unity and inverse DFT."""
    k = P.shape[1]
    s = P.shape[0] - 1
    M = k * s + 1
    w = np.exp(2j * np.pi * np.arange(M) / M)
    dets = np.empty(M, dtype=complex)
    adjs = np.empty((M, k, k), dtype=complex)
    for m in range(M):
        A = polymat_eval(P, w[m])
        d = np.linalg.det(A)
        dets[m] = d
        adjs[m] = d * np.linalg.inv(A)
    det = np.real(np.fft.fft(dets) / M)
    adj = np.real(np.fft.fft(adjs, axis=0) / M)[:(k - 1) * s + 1]
    return det, adj


def polymat_det(P, method="auto"):
    """Determinant polynomial coefficients of a square matrix polynomial."""
    P = np.asarray(P, dtype=float)
    k = P.shape[1]
    if method == "interp" or (method == "auto" and k > 4):
        return _trim(_interp_det_adj(P)[0])
    return _trim(_pdet(_as_entries(P)))


def polymat_adjugate(P, method="auto"):
    """Adjugate matrix polynomial, shape (deg+1, k, k)."""
    P = np.asarray(P, dtype=float)
    k = P.shape[1]
    if k == 1:
        return np.ones((1, 1, 1))
    if method == "interp" or (method == "auto" and k > 4):
        return _trim(_interp_det_adj(P)[1])
    entries = _as_entries(P)
    cof = [[None] * k for _ in range(k)]
    deg = 0
    for i in range(k):
        for j in range(k):
            minor = [row[:j] + row[j + 1:] for r, row in enumerate(entries) if r != i]
            c = _pdet(minor) * (-1) ** (i + j)
            cof[i][j] = c
            deg = max(deg, c.size)
    adj = np.zeros((deg, k, k))
    for i in range(k):
        for j in range(k):
            c = cof[i][j]
            adj[:c.size, j, i] = c  # transpose of the cofactor matrix
    return _trim(adj)


@dataclass
class ScalarForm:
    """``A(L) x_t = theta(L) e_t`` with scalar ``theta`` (column convention)."""

    theta: np.ndarray
    A: np.ndarray
    omega: np.ndarray

    @property
    def p(self):
        return self.A.shape[0] - 1

    @property
    def q(self):
        return self.theta.size - 1

    def to_spec(self, mu=None):
        """Row-convention :class:`VarmaSpec` with ``Phi_i = -A_i'``."""
        k = self.A.shape[1]
        phi = -np.transpose(self.A[1:], (0, 2, 1))
        return VarmaSpec(theta=self.theta, mu=np.zeros(k) if mu is None else mu,
                         phi=phi, omega=self.omega)


def matrix_to_scalar(model, method="auto"):
    """Scalar-MA form: ``theta = det N`` and AR part ``adj(N) D``."""
    det = polymat_det(model.N, method)
    if abs(det[0]) == 0.0:
        raise ValueError("det N(0) = 0; no scalar-MA form")
    theta = det / det[0]
    adj = polymat_adjugate(model.N, method)
    A = _trim(polymat_mul(adj, model.D)) / det[0]
    return ScalarForm(theta=theta, A=A, omega=model.omega.copy())


def transfer_deviation(model, scalar, n_points=16, radius=0.5):
    """Max entrywise gap between ``N^{-1} D`` and ``A / theta`` on a circle."""
    z = radius * np.exp(2j * np.pi * np.arange(n_points) / n_points)
    worst = 0.0
    for zz in z:
        lhs = np.linalg.solve(polymat_eval(model.N, zz), polymat_eval(model.D, zz))
        th = np.polyval(scalar.theta[::-1], zz)
        rhs = polymat_eval(scalar.A, zz) / th
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst

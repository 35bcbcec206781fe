"""
Multi-start maximisation of the profile likelihood over the invertible
region of ``theta``.

Starting points come from partitioning root locations: real inverse roots
go to one of three intervals of ``(-1, 1)`` and complex pairs to one of
three regions of the upper half disc; each allocation of the ``q`` roots
gives one seed.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np
from scipy import optimize

from .gradient import grad_profile_loglik
from .likelihood import RegressorSet, profile_loglik
from .roots import RepeatedRootError, canonicalize, roots_of, vieta, vieta_jacobian

logger = logging.getLogger(__name__)

__all__ = [
    "SeedGrid",
    "FitOptions",
    "StartTrace",
    "FitResult",
    "CalibrationError",
    "region_count",
    "seed_grid",
    "fit",
    "information_criteria",
    "n_parameters",
    "select_order",
]

CUT = 3 ** -0.5
PENALTY = 1e10
BOUNDARY_MARGIN = 1e-3


class CalibrationError(RuntimeError):
    pass


def _compositions3(n):
    """All ``(a, b, c)`` with ``a + b + c = n``, lexicographic."""
    return [(a, b, n - a - b) for a in range(n, -1, -1) for b in range(n - a, -1, -1)]


def region_count(q):
    """Closed-form number of root-allocation regions for order ``q``."""
    if q % 2 == 0:
        num = (q + 2) * (q + 4) * (q + 6) * (q + 8) * (2 * q + 5)
    else:
        num = (q + 1) * (q + 3) * (q + 5) * (q + 7) * (2 * q + 13)
    return num // 1920


def _real_midpoints():
    return (-(1 + CUT) / 2, 0.0, (1 + CUT) / 2)


def _complex_centroids():
    # half disc of radius CUT, then quarter annuli CUT..1 in quadrants I and II
    c1 = 4 * CUT / (3 * np.pi) * 1j
    rbar = (2.0 / 3.0) * (1 - CUT ** 3) / (1 - CUT ** 2) * (2 / np.pi)
    return (c1, complex(rbar, rbar), complex(-rbar, rbar))


@dataclass
class SeedGrid:
    """Starting polynomials with the root allocation each came from.

    ``regions[i]`` is ``((r1, r2, r3), (c1, c2, c3))``: counts of real roots
    per interval and of complex pairs per upper-half-disc region.
    """

    thetas: List[np.ndarray]
    regions: List[tuple]

    def __len__(self):
        return len(self.thetas)


def seed_grid(q):
    """One seed per allocation of ``q`` inverse roots to the six regions."""
    if q < 1:
        raise ValueError("q must be >= 1")
    mids = _real_midpoints()
    cents = _complex_centroids()
    thetas, regions = [], []
    for qc in range(q // 2 + 1):
        qr = q - 2 * qc
        for ra in _compositions3(qr):
            for ca in _compositions3(qc):
                r = [mids[i] for i in range(3) for _ in range(ra[i])]
                for i in range(3):
                    r += [cents[i], np.conj(cents[i])] * ca[i]
                thetas.append(vieta(np.array(r, dtype=complex)))
                regions.append((ra, ca))
    return SeedGrid(thetas=thetas, regions=regions)


@dataclass(frozen=True)
class FitOptions:
    """Optimizer settings.

    ``grad_tol`` is relative: a start counts as converged when
    ``max|grad| <= grad_tol * (1 + |loglik|)``.
    """

    max_iters: int = 200
    grad_tol: float = 1e-6
    seeds: Optional[Sequence] = None
    threads: int = 1


@dataclass
class StartTrace:
    index: int
    seed: np.ndarray
    start_loglik: float
    theta: np.ndarray
    loglik: float
    converged: bool
    iterations: int
    message: str = ""


@dataclass
class FitResult:
    theta: np.ndarray
    mu: np.ndarray
    phi: np.ndarray
    omega: np.ndarray
    loglik: float
    aic: float
    bic: float
    T: int
    k: int
    p: int
    q: int
    regs: RegressorSet
    starts: List[StartTrace] = field(default_factory=list)
    boundary_flag: bool = False
    converged: bool = True
    grad: Optional[np.ndarray] = None
    beta_extra: Optional[np.ndarray] = None

    @property
    def iterations(self):
        return int(sum(s.iterations for s in self.starts))

    @property
    def n_params(self):
        return n_parameters(self.k, self.p, self.q, self.regs.n_deterministic)


def n_parameters(k, p, q, n_regs):
    return q + k * n_regs + p * k * k + k * (k + 1) // 2


def information_criteria(loglik, T, k, p, q, n_regs):
    """AIC and BIC for a fitted model.

    ``loglik`` may also be a :class:`FitResult`.
    """
    if isinstance(loglik, FitResult):
        loglik = loglik.loglik
    n = n_parameters(k, p, q, n_regs)
    return -2.0 * loglik + 2.0 * n, -2.0 * loglik + np.log(T) * n


def _max_modulus_grad(theta):
    """Largest inverse-root modulus and its gradient in ``theta_1..q``."""
    rs = roots_of(theta)
    j = int(np.argmax(rs.moduli))
    lam = rs.roots[j]
    rho = abs(lam)
    try:
        row = np.linalg.inv(vieta_jacobian(rs))[j]
        g = np.real(np.conj(lam) * row) / max(rho, 1e-300)
    except (RepeatedRootError, np.linalg.LinAlgError):
        h = 1e-7
        g = np.empty(theta.size - 1)
        for i in range(g.size):
            e = np.zeros_like(theta)
            e[i + 1] = h
            g[i] = (np.max(roots_of(theta + e).moduli) - np.max(roots_of(theta - e).moduli)) / (2 * h)
    return rho, g


class _Objective:
    """Negative profile likelihood with the out-of-region penalty."""

    def __init__(self, xhat, regs):
        self.xhat = xhat
        self.regs = regs

    def __call__(self, t):
        theta = np.r_[1.0, t]
        rho, g = _max_modulus_grad(theta)
        if rho >= 1.0:
            return PENALTY + (rho - 1.0), g
        try:
            rep = grad_profile_loglik(theta, self.xhat, self.regs)
        except np.linalg.LinAlgError:
            return PENALTY, g
        if not np.isfinite(rep.loglik):
            return PENALTY, g
        return -rep.loglik, -rep.grad


def _local(obj, index, seed, options):
    seed = np.asarray(seed, dtype=float)
    f0, _ = obj(seed[1:])
    scale = 1.0 + abs(f0) if f0 < PENALTY else 1.0
    res = optimize.minimize(
        obj, seed[1:], jac=True, method="L-BFGS-B",
        options={"maxiter": options.max_iters, "gtol": 0.1 * options.grad_tol * scale,
                 "ftol": 1e-15, "maxcor": 20})
    theta = np.r_[1.0, res.x]
    f, g = obj(res.x)
    ok = f < PENALTY and np.max(np.abs(g)) <= options.grad_tol * (1.0 + abs(f))
    return StartTrace(index=index, seed=seed, start_loglik=-f0 if f0 < PENALTY else -np.inf,
                      theta=theta, loglik=-f if f < PENALTY else -np.inf,
                      converged=bool(ok), iterations=int(res.nit), message=str(res.message))


def fit(xhat, p, q, regs=None, options=FitOptions()):
    """Maximum-likelihood fit of a scalar-MA VARMA(p, q).

    Parameters
    ----------
    xhat : array_like, shape (T + p, k)
    p, q : int
    regs : RegressorSet, optional
        Deterministic terms; its lag order is replaced by ``p``.
    options : FitOptions

    Returns
    -------
    FitResult
    """
    xhat = np.asarray(xhat, dtype=float)
    if xhat.ndim == 1:
        xhat = xhat[:, None]
    regs = RegressorSet(p=p) if regs is None else replace(regs, p=p)
    T = xhat.shape[0] - p
    k = xhat.shape[1]
    if T <= regs.n_deterministic + k * p:
        raise ValueError(f"T={T} too small for {regs.n_deterministic + k * p} regressors")

    starts = []
    if q == 0:
        theta = np.ones(1)
    else:
        seeds = options.seeds if options.seeds is not None else seed_grid(q).thetas
        seeds = [np.asarray(s, dtype=float) for s in seeds]
        for s in seeds:
            if s.size != q + 1 or s[0] != 1.0:
                raise ValueError(f"seed {s} is not a degree-{q} polynomial with theta_0 = 1")
        obj = _Objective(xhat, regs)
        jobs = list(enumerate(seeds))
        if options.threads > 1:
            with ThreadPoolExecutor(max_workers=options.threads) as ex:
                starts = list(ex.map(lambda a: _local(obj, a[0], a[1], options), jobs))
        else:
            starts = [_local(obj, i, s, options) for i, s in jobs]
        finite = [s for s in starts if np.isfinite(s.loglik)]
        if not finite:
            raise CalibrationError("every start diverged")
        best = max(s.loglik for s in finite)
        # lowest seed index among near-ties
        winner = min((s for s in finite if s.loglik >= best - 1e-9), key=lambda s: s.index)
        theta, _ = canonicalize(winner.theta)
        logger.debug("winner seed %d, loglik %.10g", winner.index, winner.loglik)

    rep = profile_loglik(theta, xhat, regs)
    grad = grad_profile_loglik(theta, xhat, regs).grad if q else np.zeros(0)
    rho = np.max(roots_of(theta).moduli) if q else 0.0
    aic, bic = information_criteria(rep.loglik, T, k, p, q, regs.n_deterministic)
    converged = bool(np.max(np.abs(grad), initial=0.0) <= options.grad_tol * (1 + abs(rep.loglik)))
    return FitResult(theta=theta, mu=rep.mu, phi=rep.phi, omega=rep.omega,
                     loglik=rep.loglik, aic=aic, bic=bic, T=T, k=k, p=p, q=q, regs=regs,
                     starts=starts, boundary_flag=bool(rho > 1.0 - BOUNDARY_MARGIN),
                     converged=converged, grad=grad, beta_extra=rep.beta_extra)


def select_order(xhat, mcmillan, regs=None, criterion="bic", options=FitOptions()):
    """Fit every ``(p, q)`` with ``p, q <= mcmillan`` on a common sample.

    The first ``mcmillan - p`` rows are dropped for order ``p`` so all
    candidates are scored on the same ``T``.

    Returns
    -------
    best : FitResult
    table : dict
        ``(p, q) -> FitResult`` for every candidate that could be fitted.
    """
    xhat = np.asarray(xhat, dtype=float)
    if xhat.ndim == 1:
        xhat = xhat[:, None]
    if criterion not in ("aic", "bic"):
        raise ValueError("criterion must be 'aic' or 'bic'")
    table = {}
    for p in range(mcmillan + 1):
        for q in range(mcmillan + 1):
            try:
                table[(p, q)] = fit(xhat[mcmillan - p:], p, q, regs, options)
            except (np.linalg.LinAlgError, CalibrationError, ValueError) as exc:
                logger.info("order (%d, %d) skipped: %s", p, q, exc)
    if not table:
        raise CalibrationError("no candidate order could be fitted")
    key = min(table, key=lambda pq: (getattr(table[pq], criterion), pq))
    return table[key], table

"""
Inverse roots of the MA polynomial, the Vieta map and root inversion.

``theta(L) = prod_i (1 - l_i L)``; the ``l_i`` are the roots of
``z^q + theta_1 z^{q-1} + ... + theta_q`` and ``theta`` is invertible when
all of them lie strictly inside the unit circle.

Inverting a conjugate-closed subset ``S`` of roots (``l -> 1/l``) while
scaling the innovation covariance by ``prod_S l^2`` leaves the
autocovariance function, and hence the likelihood, unchanged.
"""
import itertools
from dataclasses import dataclass

import numpy as np

from .polyops import check_theta

__all__ = [
    "RootSet",
    "RepeatedRootError",
    "roots_of",
    "vieta",
    "is_invertible",
    "schur_cohn",
    "conjugate_units",
    "conjugate_closed_subsets",
    "check_selection",
    "invert_roots",
    "canonicalize",
    "vieta_jacobian",
    "ir_jacobian",
    "ir_multiplicity",
]

PAIR_TOL = 1e-8
SNAP_TOL = 1e-10
REPEAT_TOL = 1e-8


class RepeatedRootError(ValueError):
    """Raised where a Jacobian of the Vieta map is singular."""


def _sort_key(z):
    return (round(z.real, 12), abs(z.imag), z.imag)


@dataclass(frozen=True)
class RootSet:
    """Multiset of inverse roots, conjugate pairs stored adjacently."""

    roots: np.ndarray

    def __len__(self):
        return self.roots.size

    @property
    def moduli(self):
        return np.abs(self.roots)

    @property
    def separation(self):
        """Smallest distance between two roots (inf when q < 2)."""
        r = self.roots
        if r.size < 2:
            return np.inf
        d = np.abs(r[:, None] - r[None, :])
        return float(np.min(d[np.triu_indices(r.size, 1)]))

    def partner(self, i):
        """Index of the conjugate of root ``i`` (itself when real)."""
        z = self.roots[i]
        if z.imag == 0.0:
            return i
        cand = np.abs(self.roots - np.conj(z))
        cand[i] = np.inf
        j = int(np.argmin(cand))
        if cand[j] > PAIR_TOL * (1 + abs(z)):
            raise ValueError("root set is not closed under conjugation")
        return j

    def is_conjugate_closed(self):
        try:
            for i in range(len(self)):
                self.partner(i)
        except ValueError:
            return False
        return True


def _pair_up(z):
    """Snap near-real roots to the axis and make conjugate pairs exact."""
    z = np.asarray(z, dtype=complex).copy()
    used = np.zeros(z.size, dtype=bool)
    for i in range(z.size):
        if used[i]:
            continue
        if abs(z[i].imag) <= SNAP_TOL * (1 + abs(z[i])):
            z[i] = z[i].real
            used[i] = True
            continue
        dist = np.abs(z - np.conj(z[i]))
        dist[used] = np.inf
        dist[i] = np.inf
        j = int(np.argmin(dist)) if z.size > 1 else i
        if j != i and dist[j] <= PAIR_TOL * (1 + abs(z[i])):
            mid = 0.5 * (z[i] + np.conj(z[j]))
            z[i], z[j] = mid, np.conj(mid)
            used[i] = used[j] = True
        else:
            used[i] = True
    return np.array(sorted(z, key=_sort_key), dtype=complex)


def roots_of(theta):
    """Inverse roots of ``theta(L)`` via companion-matrix eigenvalues."""
    theta = check_theta(theta)
    if theta.size == 1:
        return RootSet(roots=np.zeros(0, dtype=complex))
    # theta_0 = 1 is the leading coefficient of z^q + theta_1 z^{q-1} + ...
    r = np.roots(theta)
    return RootSet(roots=_pair_up(r))


def _as_roots(roots):
    if isinstance(roots, RootSet):
        return roots.roots
    return np.asarray(roots, dtype=complex).ravel()


def vieta(roots):
    """Coefficients ``(1, theta_1, ..., theta_q)`` of ``prod (1 - l_i L)``."""
    r = _as_roots(roots)
    if r.size == 0:
        return np.ones(1)
    if not RootSet(roots=r).is_conjugate_closed():
        raise ValueError("roots are not closed under complex conjugation")
    c = np.poly(r)
    return np.real(c).astype(float)


def is_invertible(theta, tol=0.0):
    """True when every inverse root has modulus below ``1 - tol``."""
    theta = check_theta(theta)
    if theta.size == 1:
        return True
    return bool(np.max(roots_of(theta).moduli) < 1.0 - tol)


def schur_cohn(theta):
    """Explicit strict stability inequalities for ``q <= 3``.

    Returns
    -------
    bool
        True when ``theta`` lies in the open invertibility region.
    """
    t = check_theta(theta)[1:]
    q = t.size
    if q == 0:
        return True
    if q == 1:
        return bool(abs(t[0]) < 1)
    if q == 2:
        a, b = t
        return bool(b < 1 and 1 - a + b > 0 and 1 + a + b > 0)
    if q == 3:
        a, b, c = t
        return bool(1 + a + b + c > 0
                    and 3 + a - b - 3 * c > 0
                    and 1 - a + b - c > 0
                    and 1 - b - c * c + a * c > 0)
    raise ValueError("explicit Schur-Cohn conditions are only provided for q <= 3")


def conjugate_units(rs):
    """Group root indices into real singletons and conjugate pairs."""
    if not isinstance(rs, RootSet):
        rs = RootSet(roots=_as_roots(rs))
    seen = set()
    units = []
    for i in range(len(rs)):
        if i in seen:
            continue
        j = rs.partner(i)
        unit = (i,) if j == i else (i, j)
        seen.update(unit)
        units.append(unit)
    return units


def conjugate_closed_subsets(rs):
    """Every conjugate-closed index subset of a root set, empty set first."""
    units = conjugate_units(rs)
    out = []
    for n in range(len(units) + 1):
        for combo in itertools.combinations(units, n):
            out.append(tuple(sorted(i for u in combo for i in u)))
    return out


def check_selection(rs, sel):
    sel = tuple(sorted(set(int(i) for i in sel)))
    for i in sel:
        if not 0 <= i < len(rs):
            raise IndexError(f"root index {i} out of range")
        if rs.partner(i) not in sel:
            raise ValueError("selection is not closed under conjugation")
    return sel


def invert_roots(theta, omega, sel):
    """Root-inversion map.

    Parameters
    ----------
    theta : array_like
        MA polynomial.
    omega : array_like or None
        Innovation covariance; scaled by ``prod_S l^2``.
    sel : iterable of int
        Indices into ``roots_of(theta).roots``; must be conjugate closed.

    Returns
    -------
    theta_ir : ndarray
    omega_ir : ndarray or float
        Scaled covariance, or the scale factor itself if ``omega`` is None.
    """
    rs = roots_of(theta)
    sel = check_selection(rs, sel)
    r = rs.roots.copy()
    if sel and np.any(r[list(sel)] == 0):
        raise ZeroDivisionError("cannot invert a zero root")
    scale = np.prod(r[list(sel)] ** 2) if sel else 1.0
    r[list(sel)] = 1.0 / r[list(sel)]
    theta_ir = vieta(r)
    scale = float(np.real(scale))
    if omega is None:
        return theta_ir, scale
    return theta_ir, scale * np.asarray(omega, dtype=float)


def canonicalize(theta, omega=None):
    """Move every root outside the closed unit disc inside it."""
    rs = roots_of(theta)
    sel = [i for i in range(len(rs)) if abs(rs.roots[i]) > 1.0]
    if not sel:
        theta = check_theta(theta)
        return (theta, omega) if omega is not None else (theta, 1.0)
    return invert_roots(theta, omega, sel)


def vieta_jacobian(roots):
    """``d theta_i / d l_j`` as a complex ``q x q`` matrix.

    Column ``j`` holds the coefficients of ``-theta(L) / (1 - l_j L)``,
    obtained by evaluating the product at the ``q``-th roots of unity and
    transforming back.
    """
    r = _as_roots(roots)
    q = r.size
    if q >= 2:
        d = np.abs(r[:, None] - r[None, :])
        if np.min(d[np.triu_indices(q, 1)]) <= REPEAT_TOL:
            raise RepeatedRootError("Vieta Jacobian is singular at repeated roots")
    w = np.exp(2j * np.pi * np.arange(q) / q)
    factors = 1.0 - r[None, :] * w[:, None]  # (point, root)
    J = np.empty((q, q), dtype=complex)
    for j in range(q):
        vals = -np.prod(np.delete(factors, j, axis=1), axis=1)
        J[:, j] = np.fft.fft(vals) / q
    return J


def ir_jacobian(theta, sel):
    """Jacobian of the root-inversion map in coefficient space."""
    rs = roots_of(theta)
    sel = check_selection(rs, sel)
    r = rs.roots
    q = r.size
    new = r.copy()
    diag = np.ones(q, dtype=complex)
    for i in sel:
        new[i] = 1.0 / r[i]
        diag[i] = -r[i] ** -2
    J = vieta_jacobian(new) @ np.diag(diag) @ np.linalg.inv(vieta_jacobian(r))
    return np.real(J)


def ir_multiplicity(theta, sel):
    """Dimension of the -1 eigenspace of ``J[IR]`` at a fixed point of the map."""
    rs = roots_of(theta)
    sel = check_selection(rs, sel)
    rr = len(sel)
    psi = (-1) ** rr * np.prod(rs.roots[list(sel)]) if sel else 1.0
    if np.isclose(psi, -1.0) or rr % 2 == 1:
        return rr // 2 + 1
    return rr // 2

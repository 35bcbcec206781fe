"""
Scalar MA polynomials, truncated power-series inversion and fast
application of lower-triangular Toeplitz operators.

A polynomial ``theta = (1, theta_1, ..., theta_q)`` is mapped by the
Toeplitz map to the ``T x T`` banded lower-triangular matrix ``Theta_T``.
The map is an algebra homomorphism, so ``Theta_T^{-1}`` is the Toeplitz
image of the first ``T`` coefficients of the series ``1/theta(L)`` and
applying it to data is a causal convolution truncated at ``T``.
"""
import numpy as np
from scipy import signal

__all__ = [
    "check_theta",
    "invert_series",
    "series_cutoff",
    "toeplitz_apply",
    "toeplitz_dense",
    "shift_down",
    "theta_inverse_lags",
    "DIRECT_THRESHOLD",
]

#: below this many rows toeplitz_apply uses direct convolution
DIRECT_THRESHOLD = 64


def check_theta(theta):
    """Return ``theta`` as a float array, validating ``theta_0 == 1``.

    Parameters
    ----------
    theta : array_like
        Coefficients ``(1, theta_1, ..., theta_q)``.

    Returns
    -------
    ndarray, shape (q+1,)
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.ndim != 1 or theta.size == 0:
        raise ValueError("theta must be a non-empty 1-d sequence")
    if theta[0] != 1.0:
        raise ValueError(f"theta_0 must be exactly 1, got {theta[0]!r}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta has non-finite coefficients")
    return theta


def invert_series(theta, T):
    """First ``T`` coefficients of the power series ``1/theta(L)``.

    Uses the long-division recurrence
    ``c_j = -sum_{i>=1} theta_i c_{j-i}``, which costs O(T q).

    Parameters
    ----------
    theta : array_like
        MA polynomial with ``theta_0 = 1``.
    T : int
        Number of coefficients.

    Returns
    -------
    ndarray, shape (T,)
    """
    theta = check_theta(theta)
    T = int(T)
    if T < 1:
        raise ValueError("T must be >= 1")
    impulse = np.zeros(T)
    impulse[0] = 1.0
    # lfilter runs exactly the division recurrence (a[0] == 1)
    return signal.lfilter([1.0], theta, impulse)


def series_cutoff(series, tol):
    """Effective length of a decaying series: last index with ``|c| > tol``, plus one."""
    big = np.flatnonzero(np.abs(series) > tol)
    if big.size == 0:
        return 1
    return int(big[-1]) + 1


def _next_pow2(n):
    return 1 << max(0, int(n - 1).bit_length())


def _direct(series, A):
    T = A.shape[0]
    out = np.empty_like(A)
    for j in range(A.shape[1]):
        out[:, j] = np.convolve(series, A[:, j])[:T]
    return out


def _overlap_save(kernel, A, T):
    """Causal convolution of every column of ``A`` with ``kernel``, first T rows."""
    Lk = kernel.size
    nfft = _next_pow2(4 * Lk)
    if nfft >= T + Lk - 1:
        # one block covers the whole signal
        nfft = _next_pow2(T + Lk - 1)
        K = np.fft.rfft(kernel, nfft)
        Y = np.fft.irfft(np.fft.rfft(A, nfft, axis=0) * K[:, None], nfft, axis=0)
        return Y[:T]
    step = nfft - Lk + 1
    K = np.fft.rfft(kernel, nfft)
    m = A.shape[1]
    nblocks = -(-T // step)
    padded = np.zeros((Lk - 1 + nblocks * step + Lk, m))
    padded[Lk - 1:Lk - 1 + T] = A
    out = np.empty((nblocks * step, m))
    for b in range(nblocks):
        seg = padded[b * step:b * step + nfft]
        y = np.fft.irfft(np.fft.rfft(seg, nfft, axis=0) * K[:, None], nfft, axis=0)
        out[b * step:(b + 1) * step] = y[Lk - 1:Lk - 1 + step]
    return out[:T]


def toeplitz_apply(series, A, cutoff=None):
    """Multiply the lower-triangular Toeplitz matrix of ``series`` into ``A``.

    Computes ``T(series, T) @ A`` column by column as a causal convolution
    truncated at ``T`` rows. Short inputs use direct convolution, longer
    ones block FFT convolution (overlap-save).

    Parameters
    ----------
    series : array_like, shape (T,)
        First column of the Toeplitz matrix.
    A : array_like, shape (T,) or (T, m)
    cutoff : float, optional
        If given, series coefficients beyond the last one exceeding
        ``cutoff`` in magnitude are dropped before convolving. Off by
        default, which keeps the product exact.

    Returns
    -------
    ndarray with the shape of ``A``
    """
    series = np.asarray(series, dtype=float)
    A = np.asarray(A, dtype=float)
    vector = A.ndim == 1
    if vector:
        A = A[:, None]
    T = A.shape[0]
    if series.ndim != 1 or series.size != T:
        raise ValueError(f"series length {series.size} does not match {T} rows")
    if cutoff is not None:
        series = series[:series_cutoff(series, cutoff)]
    if A.shape[1] == 0:
        out = np.zeros_like(A)
    elif T < DIRECT_THRESHOLD:
        out = _direct(series, A)
    else:
        out = _overlap_save(series, A, T)
    return out[:, 0] if vector else out


def toeplitz_dense(series, T=None):
    """Dense lower-triangular Toeplitz matrix whose first column is ``series``."""
    series = np.asarray(series, dtype=float)
    T = series.size if T is None else int(T)
    col = np.zeros(T)
    n = min(T, series.size)
    col[:n] = series[:n]
    idx = np.arange(T)
    diff = idx[:, None] - idx[None, :]
    return np.where(diff >= 0, col[np.clip(diff, 0, None)], 0.0)


def shift_down(A, j):
    """Rows of ``A`` moved down by ``j`` with zero fill (the lag operator ``L^j``)."""
    out = np.zeros_like(A)
    if j < A.shape[0]:
        out[j:] = A[:A.shape[0] - j]
    return out


def theta_inverse_lags(theta, xhat, p, series=None):
    """``Theta_T^{-1} L^i X`` for ``i = 0..p`` from one long convolution.

    ``Theta_{T+p}^{-1} Xhat`` is computed once; the rows belonging to lag
    ``i`` then differ from ``Theta_T^{-1} L^i X`` only by the contribution
    of the first ``p - i`` conditioning rows, which is subtracted.

    Parameters
    ----------
    theta : array_like
        MA polynomial.
    xhat : array_like, shape (T+p, k)
        Full sample including the ``p`` conditioning rows.
    p : int
        Number of conditioning rows / AR order.
    series : ndarray, optional
        Precomputed ``invert_series(theta, T+p)``.

    Returns
    -------
    list of ndarray
        ``p + 1`` arrays of shape (T, k); entry ``i`` is lag ``i``.
    """
    xhat = np.asarray(xhat, dtype=float)
    if xhat.ndim == 1:
        xhat = xhat[:, None]
    n = xhat.shape[0]
    p = int(p)
    if p < 0:
        raise ValueError("p must be non-negative")
    T = n - p
    if T < 1:
        raise ValueError(f"need more than p={p} rows, got {n}")
    if series is None:
        series = invert_series(theta, n)
    elif series.size != n:
        raise ValueError("series length must equal T+p")
    full = toeplitz_apply(series, xhat)
    out = []
    for i in range(p + 1):
        start = p - i
        block = full[start:start + T].copy()
        # C[start + r, c] = series[start + r - c] for the leading start columns
        for c in range(start):
            block -= np.outer(series[start - c:start - c + T], xhat[c])
        out.append(block)
    return out

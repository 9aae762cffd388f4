"""Elementary symmetric functions of vectors and general square matrices.

For a matrix ``A`` (not necessarily symmetric) ``sigma_k(A)`` is the sum of its
``k x k`` principal minors and ``sigma_k^{ij}(A) = d sigma_k / d a_ij``.  The
derivative matrices follow the recursion

    G_1 = I,   G_k = sigma_{k-1}(A) I - G_{k-1} A^T,

and ``sigma_k(A) = (1/k) sum_ij G_k[i, j] a_ij``.  No eigenvalues are involved,
so the result is real for any real ``A``.

Every matrix function accepts stacked input of shape ``(..., n, n)``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np


def as_square_matrix(A) -> np.ndarray:
    """Return ``A`` as a float array of shape ``(..., n, n)`` with finite entries."""
    A = np.asarray(A, dtype=float)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2] or A.shape[-1] < 1:
        raise ValueError(f"expected square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def _check_degree(k: int, n: int, lowest: int = 0) -> int:
    if int(k) != k:
        raise ValueError(f"degree must be an integer, got {k!r}")
    k = int(k)
    if not lowest <= k <= n:
        raise ValueError(f"degree k={k} out of range [{lowest}, {n}]")
    return k


def entry_scale(A, k: int) -> np.ndarray | float:
    """Residual scale ``(max |a_ij|)^k``; 1 for the zero matrix."""
    m = np.max(np.abs(np.asarray(A, dtype=float)), axis=(-2, -1))
    return np.where(m > 0, m, 1.0) ** k


def sigma_of_vector(lam, k: int):
    """k-th elementary symmetric polynomial of the last axis of ``lam``."""
    lam = np.asarray(lam, dtype=float)
    if lam.ndim == 0:
        raise ValueError("expected a vector")
    k = _check_degree(k, lam.shape[-1])
    # e[j] holds sigma_j of the components consumed so far
    e = [np.ones(lam.shape[:-1])] + [np.zeros(lam.shape[:-1]) for _ in range(k)]
    for i in range(lam.shape[-1]):
        x = lam[..., i]
        for j in range(k, 0, -1):
            e[j] = e[j] + x * e[j - 1]
    return e[k] if lam.ndim > 1 else float(e[k])


def sigma_sequence(A, kmax: int) -> tuple[list, list]:
    """Return ``([sigma_0..sigma_kmax], [G_0..G_kmax])`` for ``A``.

    ``G_0`` is the zero matrix since ``sigma_0 = 1`` is constant.
    """
    A = as_square_matrix(A)
    n = A.shape[-1]
    kmax = _check_degree(kmax, n)
    eye = np.broadcast_to(np.eye(n), A.shape)
    At = np.swapaxes(A, -1, -2)
    sigmas = [np.ones(A.shape[:-2])]
    grads = [np.zeros_like(A)]
    for m in range(1, kmax + 1):
        if m == 1:
            G = eye.copy()
        else:
            G = sigmas[-1][..., None, None] * eye - grads[-1] @ At
        grads.append(G)
        sigmas.append(np.sum(G * A, axis=(-2, -1)) / m)
    return sigmas, grads


def sigma_of_matrix(A, k: int):
    """Sum of the ``k x k`` principal minors of ``A`` (``sigma_0 = 1``)."""
    A = as_square_matrix(A)
    k = _check_degree(k, A.shape[-1])
    s = sigma_sequence(A, k)[0][k]
    return float(s) if A.ndim == 2 else s


def sigma_gradient(A, k: int) -> np.ndarray:
    """Matrix of partial derivatives ``sigma_k^{ij}(A)``, for ``1 <= k <= n``."""
    A = as_square_matrix(A)
    k = _check_degree(k, A.shape[-1], lowest=1)
    return sigma_sequence(A, k)[1][k]


def sigma_from_power_sums(A, k: int):
    """``sigma_k(A)`` from traces of powers via Newton's identities.

    Shares no arithmetic with the derivative recursion, which makes it a fair
    left-hand side for the Euler residual.
    """
    A = as_square_matrix(A)
    k = _check_degree(k, A.shape[-1])
    power = np.broadcast_to(np.eye(A.shape[-1]), A.shape)
    traces = [None]
    for _ in range(k):
        power = power @ A
        traces.append(np.trace(power, axis1=-2, axis2=-1))
    e = [np.ones(A.shape[:-2])]
    for m in range(1, k + 1):
        acc = np.zeros(A.shape[:-2])
        for i in range(1, m + 1):
            acc = acc + (-1) ** (i - 1) * e[m - i] * traces[i]
        e.append(acc / m)
    return float(e[k]) if A.ndim == 2 else e[k]


class IdentityResiduals(NamedTuple):
    euler: float | np.ndarray
    exchange: float | np.ndarray


def identity_residuals(A, k: int) -> IdentityResiduals:
    """Absolute defects of the Euler and exchange identities.

    euler    = |k sigma_k(A) - sum_ij sigma_k^{ij} a_ij|
    exchange = max_ij |(G A^T)_ij - (A^T G)_ij|,  G = sigma_k^{..}(A)

    Both vanish up to rounding; compare against ``tol * entry_scale(A, k)``.
    """
    A = as_square_matrix(A)
    k = _check_degree(k, A.shape[-1], lowest=1)
    G = sigma_sequence(A, k)[1][k]
    At = np.swapaxes(A, -1, -2)
    euler = np.abs(k * sigma_from_power_sums(A, k) - np.sum(G * A, axis=(-2, -1)))
    exchange = np.max(np.abs(G @ At - At @ G), axis=(-2, -1))
    if A.ndim == 2:
        return IdentityResiduals(float(euler), float(exchange))
    return IdentityResiduals(euler, exchange)


def cone_membership(lam, k: int, tol: float = 0.0):
    """True iff ``sigma_l(lam) >= -tol`` for every ``l = 1..k`` (the cone Gamma_k)."""
    lam = np.asarray(lam, dtype=float)
    k = _check_degree(k, lam.shape[-1], lowest=1)
    inside = np.ones(lam.shape[:-1], dtype=bool)
    for ell in range(1, k + 1):
        inside &= np.asarray(sigma_of_vector(lam, ell)) >= -tol
    return bool(inside) if lam.ndim == 1 else inside

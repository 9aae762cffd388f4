"""Pointwise evaluation of the p-k-Hessian operator.

At a point with gradient ``g`` and symmetric Hessian ``H`` the flux
``|Du|^{p-2} Du`` has Jacobian ``J = B H`` where

    B = |g|^{p-2} (I + (p-2) g g^T / |g|^2).

``J`` is not symmetric, but it is similar to ``B^{1/2} H B^{1/2}``, so its
eigenvalues are real and can be read off with a symmetric solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import symfun

SYMMETRY_RTOL = 1e-12


class ZeroGradientError(ValueError):
    """Raised when a p != 2 formula is evaluated where the gradient vanishes."""


class NotAdmissibleError(ValueError):
    pass


@dataclass(frozen=True)
class EvalPoint:
    """Gradient, Hessian and exponent at one point.

    ``H`` is checked for symmetry (relative tolerance 1e-12) and then
    symmetrized exactly.
    """

    g: np.ndarray
    H: np.ndarray
    p: float

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float).reshape(-1)
        H = symfun.as_square_matrix(self.H)
        if H.ndim != 2 or H.shape[0] != g.size:
            raise ValueError(f"gradient of size {g.size} does not match Hessian {H.shape}")
        if not np.all(np.isfinite(g)):
            raise ValueError("gradient has non-finite entries")
        if not self.p > 1:
            raise ValueError(f"exponent p must exceed 1, got {self.p}")
        asym = np.max(np.abs(H - H.T))
        if asym > SYMMETRY_RTOL * max(np.max(np.abs(H)), 1e-300):
            raise ValueError(f"Hessian is not symmetric (max asymmetry {asym:.3e})")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "H", 0.5 * (H + H.T))
        object.__setattr__(self, "p", float(self.p))

    @property
    def n(self) -> int:
        return self.g.size


@dataclass(frozen=True)
class ExponentSet:
    """Critical exponents; ``None`` marks a value whose denominator is not positive."""

    k_star_upper: Optional[float]
    k_star_mid: Optional[float]
    k_star_lower: Optional[float]
    kp_star: Optional[float]


def critical_exponents(n: int, p: float, k: int) -> ExponentSet:
    """Sobolev, Tso and lower critical exponents (p = 2 trio) and ``k_{p,*}``.

    >>> critical_exponents(4, 3, 1).kp_star
    8.0
    """
    if n < 1 or k < 1 or not p > 1:
        raise ValueError("need n >= 1, k >= 1, p > 1")
    kp_star = n * (p - 1) * k / (n - p * k) if p * k < n else None
    if 2 * k < n:
        d = n - 2 * k
        upper, mid, lower = n * (k + 1) / d, (n + 2) * k / d, n * k / d
    else:
        upper = mid = lower = None
    return ExponentSet(upper, mid, lower, kp_star)


def _gradient_frame(g, p):
    g = np.asarray(g, dtype=float)
    p = np.asarray(p, dtype=float)
    norm = np.linalg.norm(g, axis=-1)
    if np.any((norm == 0) & (p != 2)):
        raise ZeroGradientError("gradient vanishes and p != 2")
    safe = np.where(norm > 0, norm, 1.0)
    P = g[..., :, None] * g[..., None, :] / (safe**2)[..., None, None]
    eye = np.broadcast_to(np.eye(g.shape[-1]), P.shape)
    return safe[..., None, None], P, eye, p[..., None, None]


def anisotropy_matrix(g, p) -> np.ndarray:
    """``B = |g|^{p-2} (I + (p-2) g g^T/|g|^2)``; identity when ``p == 2``.

    Accepts stacked gradients ``(..., n)`` and a scalar or per-point ``p``.
    """
    c, P, eye, p = _gradient_frame(g, p)
    return c ** (p - 2) * (eye + (p - 2) * P)


def anisotropy_sqrt(g, p) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form ``(B^{1/2}, B^{-1/2})``, both symmetric positive definite."""
    c, P, eye, p = _gradient_frame(g, p)
    root = np.sqrt(p - 1)
    half = c ** ((p - 2) / 2) * (eye + (root - 1) * P)
    inv_half = c ** ((2 - p) / 2) * (eye - (root - 1) / root * P)
    return half, inv_half


def flux_jacobian_array(g, H, p) -> np.ndarray:
    """Stacked version of :func:`flux_jacobian` on raw arrays."""
    return anisotropy_matrix(g, p) @ np.asarray(H, dtype=float)


def flux_jacobian(pt: EvalPoint) -> np.ndarray:
    """``D(|Du|^{p-2} Du) = B H``; generally not symmetric."""
    return flux_jacobian_array(pt.g, pt.H, pt.p)


def symmetrized_product(pt: EvalPoint) -> np.ndarray:
    half, _ = anisotropy_sqrt(pt.g, pt.p)
    M = half @ pt.H @ half
    return 0.5 * (M + M.T)


class PointValue(NamedTuple):
    value: float
    eigenvalues: np.ndarray


def pk_hessian_at_point(pt: EvalPoint, k: int) -> PointValue:
    """``sigma_k`` of the eigenvalues of ``B^{1/2} H B^{1/2}``."""
    symfun._check_degree(k, pt.n, lowest=1)
    lam = np.linalg.eigvalsh(symmetrized_product(pt))
    return PointValue(symfun.sigma_of_vector(lam, k), lam)


def admissibility_check(pt: EvalPoint, k: int, tol: float = 0.0) -> bool:
    """Whether the flux-Jacobian eigenvalues lie in the cone Gamma_k."""
    lam = pk_hessian_at_point(pt, k).eigenvalues
    return symfun.cone_membership(lam, k, tol=tol)


def domination_residual(pt: EvalPoint, s: int) -> float:
    """``min_ij (sum_l sigma_s^{ll}(J) - |sigma_s^{ij}(J)|)`` with ``J = B H``.

    Nonnegative whenever the domination inequality holds at ``pt``.  Compare
    with ``-tol * entry_scale(J, s - 1)``.
    """
    symfun._check_degree(s, pt.n, lowest=1)
    if not admissibility_check(pt, s):
        raise NotAdmissibleError(f"point is not admissible for s={s}")
    G = symfun.sigma_gradient(flux_jacobian(pt), s)
    return float(np.trace(G) - np.max(np.abs(G)))

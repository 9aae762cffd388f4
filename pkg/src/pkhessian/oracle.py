"""Brute-force cross-checks used by the tests and the acceptance runs.

Nothing in the library routes through this module.  Each function here
recomputes a quantity by a path that shares no code with the one it checks
(minor enumeration, finite differences, Richardson extrapolation).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import hessop, symfun
from .radial import RadialProfile, radial_pk_hessian_closed_form

MAX_ORACLE_DIM = 8


@dataclass(frozen=True)
class StencilSpec:
    """Central-difference step and number of Richardson levels (1 = plain)."""

    h: float = 1e-5
    richardson_levels: int = 2

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("step must be positive")
        if not 1 <= self.richardson_levels <= 4:
            raise ValueError("richardson_levels must be in 1..4")


def richardson_derivative(f: Callable[[float], np.ndarray], h: float, levels: int) -> np.ndarray:
    """Derivative at 0 of ``t -> f(t)`` by central differences and Richardson.

    Uses steps ``h, h/2, ..., h/2^{levels-1}`` and eliminates the even error
    terms ``h^2, h^4, ...`` in turn.
    """
    table = []
    for i in range(levels):
        step = h / 2**i
        table.append((np.asarray(f(step)) - np.asarray(f(-step))) / (2 * step))
    for j in range(1, levels):
        factor = 4.0**j
        table = [(factor * table[i + 1] - table[i]) / (factor - 1) for i in range(len(table) - 1)]
    return table[0]


def sigma_minor_oracle(A, k: int):
    """Sum of ``det(A[S, S])`` over all k-subsets S (LU with partial pivoting).

    Accepts stacked input ``(..., n, n)``.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ValueError(f"expected square matrix, got shape {A.shape}")
    n = A.shape[-1]
    if n > MAX_ORACLE_DIM:
        raise ValueError(f"minor enumeration capped at n <= {MAX_ORACLE_DIM}, got n={n}")
    if not 0 <= k <= n:
        raise ValueError(f"degree k={k} out of range [0, {n}]")
    total = np.ones(A.shape[:-2]) if k == 0 else np.zeros(A.shape[:-2])
    if k > 0:
        for S in itertools.combinations(range(n), k):
            idx = list(S)
            total = total + np.linalg.det(A[..., idx, :][..., :, idx])
    return float(total) if A.ndim == 2 else total


def gradient_fd_oracle(A, k: int, st: StencilSpec = StencilSpec()) -> np.ndarray:
    """Entrywise central differences of :func:`sigma_minor_oracle`.

    Accepts stacked input; the step is scaled by ``max |a_ij|`` of each matrix.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[-1]
    h = st.h * np.maximum(1.0, np.max(np.abs(A), axis=(-2, -1)))
    step = h[..., None, None]
    out = np.empty(A.shape)
    for i in range(n):
        for j in range(n):
            E = np.zeros((n, n))
            E[i, j] = 1.0
            # differentiate in t with unit step, then rescale by the per-matrix step
            d = richardson_derivative(lambda t: sigma_minor_oracle(A + t * step * E, k), 1.0, st.richardson_levels)
            out[..., i, j] = d / h
    return out


def fd_jacobian(X: Callable[[np.ndarray], np.ndarray], x0, st: StencilSpec) -> np.ndarray:
    """``DX(x0)[i, j] = d X_i / d x_j`` by Richardson-extrapolated differences."""
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    cols = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        cols.append(richardson_derivative(lambda t: np.asarray(X(x0 + t * e), dtype=float), st.h, st.richardson_levels))
    return np.stack(cols, axis=1)


def divergence_fd_probe(
    X: Callable[[np.ndarray], np.ndarray],
    x0,
    k: int,
    st: StencilSpec = StencilSpec(),
) -> float:
    """``max_i |sum_j d_j sigma_k^{ij}(DX)|`` at ``x0`` by nested differences.

    The inner Jacobian and the outer derivative both use ``st``.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    if not 1 <= k <= n:
        raise ValueError(f"degree k={k} out of range [1, {n}]")

    def G(x):
        return symfun.sigma_gradient(fd_jacobian(X, x, st), k)

    div = np.zeros(n)
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        div += richardson_derivative(lambda t: G(x0 + t * e)[:, j], st.h, st.richardson_levels)
    return float(np.max(np.abs(div)))


def hessian_fd_probe(
    profile: RadialProfile,
    r: float,
    n: int,
    p: float,
    k: int,
    st: StencilSpec = StencilSpec(h=1e-4),
    direction: Optional[np.ndarray] = None,
) -> float:
    """``|FD-path value - closed-form radial value|`` at radius ``r``.

    ``u(x) = phi(|x|)`` is sampled around ``x0 = r * direction`` (default: the
    normalized all-ones vector), differentiated numerically, and evaluated
    through :mod:`hessop`.
    """
    if not r > 0:
        raise ValueError("probe needs r > 0")
    d = np.ones(n) if direction is None else np.asarray(direction, dtype=float)
    x0 = r * d / np.linalg.norm(d)
    h = st.h * max(1.0, r)
    if h * (st.richardson_levels + 1) >= r:
        raise ValueError("stencil crosses the origin")

    def u(x):
        return float(profile.phi(np.linalg.norm(x)))

    eye = np.eye(n)
    g = np.array([
        richardson_derivative(lambda t: u(x0 + t * eye[i]), h, st.richardson_levels) for i in range(n)
    ])

    def second(i, j, step):
        if i == j:
            return (u(x0 + step * eye[i]) - 2 * u(x0) + u(x0 - step * eye[i])) / step**2
        a, b = step * eye[i], step * eye[j]
        return (u(x0 + a + b) - u(x0 + a - b) - u(x0 - a + b) + u(x0 - a - b)) / (4 * step**2)

    H = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            table = [second(i, j, h / 2**m) for m in range(st.richardson_levels)]
            for lvl in range(1, st.richardson_levels):
                f = 4.0**lvl
                table = [(f * table[m + 1] - table[m]) / (f - 1) for m in range(len(table) - 1)]
            H[i, j] = H[j, i] = table[0]
    fd_value = hessop.pk_hessian_at_point(hessop.EvalPoint(g, H, p), k).value
    return abs(fd_value - radial_pk_hessian_closed_form(profile, r, n, p, k))


def trapezoid_radial_integral(f: Callable[[np.ndarray], np.ndarray], n: int, b: float, points: int = 400_001) -> float:
    """``omega_{n-1} int_0^b f(r) r^{n-1} dr`` by the composite trapezoid rule.

    Uniform grid, no adaptivity: slow but shares nothing with the cubature
    path in :mod:`estimates`.
    """
    r = np.linspace(0.0, b, points)
    omega = 2 * math.pi ** (n / 2) / math.gamma(n / 2)
    return float(omega * np.trapezoid(np.asarray(f(r), dtype=float) * r ** (n - 1), r))

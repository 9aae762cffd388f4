"""Radial reduction and the explicit supersolution family.

For ``u(x) = phi(|x|)`` write ``psi = |phi'|^{p-2} phi'``.  The flux Jacobian
has eigenvalue ``psi'`` in the radial direction and ``psi / r`` with
multiplicity ``n - 1``, so

    F_{k,p}[u] = C(n-1, k-1) psi' (psi/r)^{k-1} + C(n-1, k) (psi/r)^k.

The family

    w(r) = -C_* (A + r^q)^{-m},   q = p/(p-1),   m = k(p-1)/(alpha - (p-1)k)

satisfies ``F_{k,p}[w] >= (-w)^alpha`` for every ``A >= 0`` once
``alpha > k_{p,*}``, with ``C_*`` from :func:`supersolution_constant`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import hessop, symfun


class FamilyFailsError(ValueError):
    """The constant C_* has no real value: alpha lies below the critical exponent."""


@dataclass(frozen=True)
class RadialProfile:
    phi: Callable
    dphi: Callable
    d2phi: Callable


@dataclass(frozen=True)
class SupersolutionParams:
    n: int
    k: int
    p: float
    alpha: float
    A: float = 1.0

    def __post_init__(self):
        if self.n < 2 or self.k < 1 or not self.p > 1:
            raise ValueError("need n >= 2, k >= 1, p > 1")
        if not self.p * self.k < self.n:
            raise ValueError(f"need pk < n, got p={self.p}, k={self.k}, n={self.n}")
        if self.A < 0:
            raise ValueError("A must be nonnegative")

    @property
    def q(self) -> float:
        return self.p / (self.p - 1)

    @property
    def kp_star(self) -> float:
        return self.n * (self.p - 1) * self.k / (self.n - self.p * self.k)

    @property
    def gap(self) -> float:
        """``alpha - (p-1)k``, the denominator of every exponent in the family."""
        return self.alpha - (self.p - 1) * self.k

    @property
    def m(self) -> float:
        return self.k * (self.p - 1) / self.gap

    @property
    def gamma(self) -> float:
        """Decay exponent of the tangential eigenvalue, ``alpha(p-1)/gap``."""
        return self.alpha * (self.p - 1) / self.gap


def supersolution_constant(sp: SupersolutionParams) -> float:
    if sp.gap <= 0:
        raise ValueError(f"alpha={sp.alpha} <= (p-1)k: profile exponent undefined")
    n, k, p, alpha = sp.n, sp.k, sp.p, sp.alpha
    factor = alpha * (n - p * k) - n * (p - 1) * k
    if factor < 0:
        raise FamilyFailsError(
            f"family fails below critical exponent: alpha={alpha} < k_p*={sp.kp_star}"
        )
    base = (
        math.comb(n, k) / n
        * (p * k) ** ((p - 1) * k)
        * factor
        / sp.gap ** ((p - 1) * k + 1)
    )
    return base ** (1.0 / sp.gap)


class ProfileValues(NamedTuple):
    w: float
    dw: float
    d2w: float


def supersolution_profile(sp: SupersolutionParams, r: float) -> ProfileValues:
    """``w`` and its radial derivatives.

    At ``r = 0`` (only allowed when ``A > 0``) ``d2w`` is the one-sided limit,
    which is infinite for ``p > 2``.
    """
    C = supersolution_constant(sp)
    q, m, A = sp.q, sp.m, sp.A
    r = float(r)
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if r == 0:
        if A == 0:
            raise ValueError("w is singular at the origin when A = 0")
        if sp.p < 2:
            d2w = 0.0
        elif sp.p == 2:
            d2w = C * m * q * (q - 1) * A ** (-m - 1)
        else:
            d2w = math.inf
        return ProfileValues(-C * A ** (-m), 0.0, d2w)
    s = A + r**q
    w = -C * s ** (-m)
    dw = C * m * q * r ** (q - 1) * s ** (-m - 1)
    d2w = C * m * q * (
        (q - 1) * r ** (q - 2) * s ** (-m - 1) - (m + 1) * q * r ** (2 * q - 2) * s ** (-m - 2)
    )
    return ProfileValues(w, dw, d2w)


def supersolution_radial_profile(sp: SupersolutionParams) -> RadialProfile:
    """The family member as a vectorized :class:`RadialProfile`."""
    C = supersolution_constant(sp)
    q, m, A = sp.q, sp.m, sp.A

    def phi(r):
        return -C * (A + np.asarray(r, dtype=float) ** q) ** (-m)

    def dphi(r):
        r = np.asarray(r, dtype=float)
        return C * m * q * r ** (q - 1) * (A + r**q) ** (-m - 1)

    def d2phi(r):
        r = np.asarray(r, dtype=float)
        s = A + r**q
        return C * m * q * (
            (q - 1) * r ** (q - 2) * s ** (-m - 1) - (m + 1) * q * r ** (2 * q - 2) * s ** (-m - 2)
        )

    return RadialProfile(phi, dphi, d2phi)


def supersolution_eigenvalues(sp: SupersolutionParams, r: float) -> tuple[float, float]:
    """Analytic ``(radial, tangential)`` eigenvalues of the flux Jacobian of ``w``.

    Valid at ``r = 0`` when ``A > 0``, where both equal ``K A^{-gamma}``.
    """
    C = supersolution_constant(sp)
    q, A, gamma = sp.q, sp.A, sp.gamma
    if r == 0 and A == 0:
        raise ValueError("eigenvalues are singular at the origin when A = 0")
    x = sp.k * sp.p / sp.gap
    K = (C * x) ** (sp.p - 1)
    rq = float(r) ** q
    s = A + rq
    tangential = K * s ** (-gamma)
    radial = K * s ** (-gamma - 1) * (A + (1 - gamma * q) * rq)
    return radial, tangential


def supersolution_operator(sp: SupersolutionParams, r: float) -> float:
    """Two-term closed form of ``F_{k,p}[w]``.

        C(n,k) K^k (A + r^q)^{-gamma k - 1} (A + (1 - c) r^q),
        c = k alpha p / (n (alpha - (p-1)k)).

    Defined at ``r = 0`` when ``A > 0``.
    """
    C = supersolution_constant(sp)
    n, k, p, A = sp.n, sp.k, sp.p, sp.A
    if r == 0 and A == 0:
        raise ValueError("operator is singular at the origin when A = 0")
    K = (C * k * p / sp.gap) ** (p - 1)
    one_minus_c = (sp.alpha * (n - p * k) - n * (p - 1) * k) / (n * sp.gap)
    rq = float(r) ** sp.q
    s = A + rq
    return math.comb(n, k) * K**k * s ** (-sp.gamma * k - 1) * (A + one_minus_c * rq)


def radial_to_point(profile: RadialProfile, r: float, n: int, p: float) -> hessop.EvalPoint:
    """Embed ``u(x) = phi(|x|)`` at ``x = r e_1``."""
    if not r > 0:
        raise ValueError("radial embedding needs r > 0")
    d1 = float(profile.dphi(r))
    d2 = float(profile.d2phi(r))
    if d1 == 0 and p != 2:
        raise hessop.ZeroGradientError(f"phi'({r}) = 0 and p != 2")
    g = np.zeros(n)
    g[0] = d1
    H = np.diag([d2] + [d1 / r] * (n - 1))
    return hessop.EvalPoint(g, H, p)


def _flux_terms(d1: float, d2: float, r: float, n: int, p: float, k: int) -> tuple[float, float]:
    if d1 == 0:
        if p < 2:
            raise ValueError("psi' undefined where phi' = 0 and p < 2")
        psi, dpsi = 0.0, (d2 if p == 2 else 0.0)
    else:
        a = abs(d1) ** (p - 2)
        psi, dpsi = a * d1, (p - 1) * a * d2
    t = psi / r
    return math.comb(n - 1, k - 1) * dpsi * t ** (k - 1), math.comb(n - 1, k) * t**k


def radial_pk_hessian_closed_form(profile: RadialProfile, r: float, n: int, p: float, k: int) -> float:
    if not r > 0:
        raise ValueError("closed form needs r > 0")
    symfun._check_degree(k, n, lowest=1)
    return sum(_flux_terms(float(profile.dphi(r)), float(profile.d2phi(r)), r, n, p, k))


def log_grid(lo: float = 1e-3, hi: float = 1e3, num: int = 200) -> np.ndarray:
    return np.logspace(math.log10(lo), math.log10(hi), num)


class ScanResult(NamedTuple):
    C_star: float
    min_residual: float
    worst_radius: float
    admissible_fraction: float


def supersolution_scan(sp: SupersolutionParams, r_grid: Sequence[float] | None = None) -> ScanResult:
    """Scan ``F_{k,p}[w] - (-w)^alpha`` over a radius grid.

    ``min_residual`` is relative: at each radius the residual is divided by
    ``max(|radial term| + |tangential term|, (-w)^alpha)`` so rounding in the
    two-term sum cannot masquerade as a violation.  Admissibility goes through
    the matrix path of :mod:`hessop` (analytic eigenvalues at ``r = 0``).
    """
    C = supersolution_constant(sp)
    grid = log_grid() if r_grid is None else np.asarray(r_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty radius grid")
    profile = supersolution_radial_profile(sp)
    worst, worst_r, admissible = math.inf, math.nan, 0
    for r in grid:
        r = float(r)
        if r > 0:
            w, dw, d2w = supersolution_profile(sp, r)
            terms = _flux_terms(dw, d2w, r, sp.n, sp.p, sp.k)
            F, mag = sum(terms), abs(terms[0]) + abs(terms[1])
            ok = hessop.admissibility_check(radial_to_point(profile, r, sp.n, sp.p), sp.k)
        else:
            w = supersolution_profile(sp, 0.0).w
            F = supersolution_operator(sp, 0.0)
            mag = abs(F)
            radial, tangential = supersolution_eigenvalues(sp, 0.0)
            ok = symfun.cone_membership([radial] + [tangential] * (sp.n - 1), sp.k)
        target = (-w) ** sp.alpha
        rel = (F - target) / max(mag, target, np.finfo(float).tiny)
        if rel < worst:
            worst, worst_r = rel, r
        admissible += bool(ok)
    return ScanResult(C, float(worst), worst_r, admissible / grid.size)

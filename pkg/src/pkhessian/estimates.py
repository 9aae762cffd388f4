"""Cutoff function, integral quantities and quadrature checks of their identities.

For a negative radial ``u`` and the cutoff ``eta`` supported in ``B_{2R}``,
with ``sigma_m`` and ``sigma_m^{ij}`` taken of the flux Jacobian ``J``:

    B_s = int sigma_{k-s} |Du|^{sp} (-u)^{-delta-s} eta^theta
    M_s = int sigma_{k-s+1}^{ij} |Du|^{sp-2} u_i u_j (-u)^{-delta-s} eta^theta
    E_s = int sigma_{k-s+1}^{ij} |Du|^{sp-2} u_i eta_j (-u)^{-delta-s+1} eta^{theta-1}

and the left-hand side ``L = k int sigma_k (-u)^{-delta} eta^theta``.  These
satisfy, exactly,

    L   = -delta M_1 - theta E_1
    M_s = a_s B_s + (delta+s) c_s M_{s+1} + theta c_s E_{s+1},
          a_s = (k - (k-s)/p)/s,  c_s = (1 - 1/p)/s,  M_{k+1} = E_{k+1} = 0
    L   = -sum_s b_s B_s - sum_s e_s E_s.

Integrals over R^n are reduced to ``omega_{n-1} int_0^{2R} f(r) r^{n-1} dr``.
The integrand is assembled at ``x = r e_1`` from the full flux Jacobian, so
contractions with ``u_i`` and ``eta_j`` pick out the (1, 1) entry of
``sigma^{ij}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.integrate import cubature

from . import hessop, symfun
from .radial import RadialProfile, SupersolutionParams, supersolution_radial_profile

# max |q'| on [0, 1] for the quintic smoothstep q(t) = 6t^5 - 15t^4 + 10t^3
CUTOFF_GRADIENT_CONSTANT = 15 / 8


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class CutoffSpec:
    R: float
    theta: float

    def __post_init__(self):
        if not self.R > 0 or not self.theta > 0:
            raise ValueError("cutoff needs R > 0 and theta > 0")


class CutoffValues(NamedTuple):
    eta: np.ndarray
    deta: np.ndarray
    d2eta: np.ndarray


def cutoff(spec: CutoffSpec, r) -> CutoffValues:
    """C^2 radial cutoff: 1 on ``[0, R]``, 0 beyond ``2R``, quintic in between.

    ``|eta'| <= CUTOFF_GRADIENT_CONSTANT / R``.
    """
    R = spec.R
    r = np.asarray(r, dtype=float)
    t = np.clip((2 * R - r) / R, 0.0, 1.0)
    eta = t**3 * (10 - 15 * t + 6 * t**2)
    deta = -30 * t**2 * (1 - t) ** 2 / R
    d2eta = (60 * t - 180 * t**2 + 120 * t**3) / R**2
    return CutoffValues(eta, deta, d2eta)


@dataclass(frozen=True)
class EstimateParams:
    n: int
    k: int
    p: float
    delta: float
    theta: float
    R: float
    quad_tol: float = 1e-9
    beta: Optional[float] = None

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if not self.p > 1 or not self.p * self.k < self.n:
            raise ValueError(f"need p > 1 and pk < n, got p={self.p}, k={self.k}, n={self.n}")
        if not 0 < self.quad_tol <= 1e-3:
            raise ValueError("quad_tol must lie in (0, 1e-3]")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.beta is not None and not self.theta > self.k * self.p:
            raise ValueError("V_s, W_s need theta > kp so eta^{theta - sp} stays integrable")

    @property
    def cutoff(self) -> CutoffSpec:
        return CutoffSpec(self.R, self.theta)


def case_d_beta(n: int, delta: float, alpha: float) -> float:
    return n * delta / alpha


def sphere_area(n: int) -> float:
    """Surface measure ``omega_{n-1}`` of the unit sphere in R^n."""
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


class Coefficients(NamedTuple):
    b: list[float]
    e: list[float]


def coefficients(params: EstimateParams) -> Coefficients:
    k, p, delta, theta = params.k, params.p, params.delta, params.theta
    b, e = [], []
    rising = 1.0  # delta (delta+1) ... (delta+s-1)
    for s in range(1, k + 1):
        prev = rising
        rising *= delta + s - 1
        ratio = (1 - 1 / p) ** (s - 1) / math.factorial(s - 1)
        b.append(ratio / s * (k - (k - s) / p) * rising)
        e.append(theta * ratio * prev)
    return Coefficients(b, e)


def recursion_weights(params: EstimateParams, s: int) -> tuple[float, float, float]:
    """Weights of ``(B_s, M_{s+1}, E_{s+1})`` in the recursion for ``M_s``."""
    k, p = params.k, params.p
    c = (1 - 1 / p) / s
    return (k - (k - s) / p) / s, (params.delta + s) * c, params.theta * c


@dataclass
class IntegralReport:
    """Quadrature values; ``M`` and ``E`` carry the zero entry for ``s = k+1``."""

    lhs: float
    B: list[float]
    M: list[float]
    E: list[float]
    V: list[float] = field(default_factory=list)
    W: list[float] = field(default_factory=list)
    residuals: dict[str, float] = field(default_factory=dict)


def _integrand(u: RadialProfile, params: EstimateParams):
    n, k, p, delta, theta = params.n, params.k, params.p, params.delta, params.theta
    spec = params.cutoff
    weight = sphere_area(n)
    with_vw = params.beta is not None

    def f(x):
        r = x[:, 0]
        phi, d1, d2 = (np.asarray(fn(r), dtype=float) for fn in (u.phi, u.dphi, u.d2phi))
        if np.any(phi >= 0):
            raise ValueError("profile must be negative on [0, 2R]")
        neg = -phi
        g = np.zeros((r.size, n))
        g[:, 0] = d1
        H = np.zeros((r.size, n, n))
        H[:, 0, 0] = d2
        for i in range(1, n):
            H[:, i, i] = d1 / r
        J = hessop.flux_jacobian_array(g, H, p)
        sig, grads = symfun.sigma_sequence(J, k)
        eta, deta, _ = cutoff(spec, r)
        grad_abs = np.abs(d1)
        measure = weight * r ** (n - 1)
        cols = [k * sig[k] * neg ** (-delta) * eta**theta]
        for s in range(1, k + 1):
            cols.append(sig[k - s] * grad_abs ** (s * p) * neg ** (-delta - s) * eta**theta)
        for s in range(1, k + 1):
            g11 = grads[k - s + 1][:, 0, 0]
            cols.append(g11 * grad_abs ** (s * p) * neg ** (-delta - s) * eta**theta)
        for s in range(1, k + 1):
            g11 = grads[k - s + 1][:, 0, 0]
            cols.append(
                g11 * np.sign(d1) * grad_abs ** (s * p - 1) * deta
                * neg ** (-delta - s + 1) * eta ** (theta - 1)
            )
        if with_vw:
            beta, R = params.beta, spec.R
            for s in range(1, k + 1):
                cols.append(
                    R ** (s * p * (beta - 1)) * sig[k - s]
                    * neg ** (-delta - s + s * p * (delta + 1)) * eta ** (theta - p * s)
                )
            for s in range(1, k + 1):
                cols.append(R ** (beta - s * p) * sig[k - s] * neg ** ((p - 1) * s) * eta ** (theta - s * p))
        return np.stack(cols, axis=1) * measure[:, None]

    return f


def _integrate(f, a: float, b: float, rtol: float) -> np.ndarray:
    res = cubature(f, [a], [b], rule="gk21", rtol=rtol, atol=0.0)
    if res.status != "converged":
        raise QuadratureError(f"quadrature did not converge on [{a}, {b}]")
    return np.asarray(res.estimate, dtype=float)


def quantity_integrals(u: RadialProfile, params: EstimateParams) -> IntegralReport:
    """Integrate every quantity at once; residuals are filled in as well.

    ``[0, R]`` and ``[R, 2R]`` are integrated separately because the cutoff is
    only C^2 at ``r = R``.
    """
    k, R = params.k, params.R
    f = _integrand(u, params)
    total = _integrate(f, 0.0, R, params.quad_tol) + _integrate(f, R, 2 * R, params.quad_tol)
    vals = [float(v) for v in total]
    report = IntegralReport(
        lhs=vals[0],
        B=vals[1 : k + 1],
        M=vals[k + 1 : 2 * k + 1] + [0.0],
        E=vals[2 * k + 1 : 3 * k + 1] + [0.0],
    )
    if params.beta is not None:
        report.V = vals[3 * k + 1 : 4 * k + 1]
        report.W = vals[4 * k + 1 : 5 * k + 1]
    report.residuals = residuals_from_report(report, params)
    return report


def _normalized(terms: list[float]) -> float:
    scale = sum(abs(t) for t in terms)
    return abs(sum(terms)) / scale if scale > 0 else 0.0


def residuals_from_report(report: IntegralReport, params: EstimateParams) -> dict[str, float]:
    """All identity defects, each divided by the sum of |terms| it balances."""
    out = {"base": _normalized([report.lhs, params.delta * report.M[0], params.theta * report.E[0]])}
    for s in range(1, params.k + 1):
        a, wm, we = recursion_weights(params, s)
        out[f"ms_{s}"] = _normalized(
            [report.M[s - 1], -a * report.B[s - 1], -wm * report.M[s], -we * report.E[s]]
        )
    b, e = coefficients(params)
    out["expansion"] = _normalized(
        [report.lhs]
        + [bs * Bs for bs, Bs in zip(b, report.B)]
        + [es * Es for es, Es in zip(e, report.E)]
    )
    return out


def base_identity_residual(u: RadialProfile, params: EstimateParams) -> float:
    return quantity_integrals(u, params).residuals["base"]


def ms_recursion_residual(u: RadialProfile, params: EstimateParams, s: int) -> float:
    if not 1 <= s <= params.k:
        raise ValueError(f"recursion level s={s} out of range [1, {params.k}]")
    return quantity_integrals(u, params).residuals[f"ms_{s}"]


def expansion_residual(u: RadialProfile, params: EstimateParams) -> float:
    return quantity_integrals(u, params).residuals["expansion"]


def _quadratic() -> RadialProfile:
    return RadialProfile(
        lambda r: -(1 + np.asarray(r) ** 2),
        lambda r: -2 * np.asarray(r, dtype=float),
        lambda r: np.full_like(np.asarray(r, dtype=float), -2.0),
    )


def _rational() -> RadialProfile:
    def d2(r):
        r = np.asarray(r, dtype=float)
        s = 2 + r**2
        return 2 / s**2 - 8 * r**2 / s**3

    return RadialProfile(
        lambda r: -1 / (2 + np.asarray(r) ** 2) - 1,
        lambda r: 2 * np.asarray(r) / (2 + np.asarray(r) ** 2) ** 2,
        d2,
    )


def _gaussian() -> RadialProfile:
    return RadialProfile(
        lambda r: -np.exp(-np.asarray(r) ** 2) - 1,
        lambda r: 2 * np.asarray(r) * np.exp(-np.asarray(r) ** 2),
        lambda r: (2 - 4 * np.asarray(r) ** 2) * np.exp(-np.asarray(r) ** 2),
    )


CORPUS_NAMES = ("quadratic", "rational", "gaussian", "supersolution")


def corpus_profile(name: str, n: int, p: float, k: int) -> RadialProfile:
    """Fixed test profiles; ``supersolution`` uses ``alpha = 2 k_{p,*}``, ``A = 1``."""
    if name == "quadratic":
        return _quadratic()
    if name == "rational":
        return _rational()
    if name == "gaussian":
        return _gaussian()
    if name == "supersolution":
        kp_star = n * (p - 1) * k / (n - p * k)
        return supersolution_radial_profile(SupersolutionParams(n, k, p, 2 * kp_star, 1.0))
    raise KeyError(f"unknown profile {name!r}; choose from {CORPUS_NAMES}")

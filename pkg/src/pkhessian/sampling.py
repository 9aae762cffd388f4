"""Seeded random inputs shared by the CLI suites and the tests."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import hessop, symfun


def random_matrices(rng: np.random.Generator, trials: int, n: int) -> np.ndarray:
    """Non-symmetric matrices with standard normal entries, shape ``(trials, n, n)``."""
    return rng.standard_normal((trials, n, n))


def random_symmetric(rng: np.random.Generator, trials: int, n: int) -> np.ndarray:
    X = rng.standard_normal((trials, n, n))
    return 0.5 * (X + np.swapaxes(X, -1, -2))


@dataclass
class PointBatch:
    g: np.ndarray  # (m, n)
    H: np.ndarray  # (m, n, n)
    p: np.ndarray  # (m,)

    def __len__(self) -> int:
        return self.p.size

    def point(self, i: int) -> hessop.EvalPoint:
        return hessop.EvalPoint(self.g[i], self.H[i], float(self.p[i]))


def random_points(
    rng: np.random.Generator, trials: int, n: int, p_range: tuple[float, float] = (1.2, 4.0)
) -> PointBatch:
    """Gradients ~ N(0, I), Hessians from the symmetric Gaussian ensemble."""
    g = rng.standard_normal((trials, n))
    H = random_symmetric(rng, trials, n)
    p = rng.uniform(*p_range, size=trials)
    return PointBatch(g, H, p)


def batch_symmetrized(batch: PointBatch) -> np.ndarray:
    """``B^{1/2} H B^{1/2}`` for every point."""
    half, _ = hessop.anisotropy_sqrt(batch.g, batch.p)
    out = half @ batch.H @ half
    return 0.5 * (out + np.swapaxes(out, -1, -2))


def batch_flux_jacobian(batch: PointBatch) -> np.ndarray:
    return hessop.flux_jacobian_array(batch.g, batch.H, batch.p)


@dataclass
class AdmissibleSample:
    points: PointBatch
    accepted: int
    drawn: int

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.drawn if self.drawn else 0.0


def admissible_points(
    rng: np.random.Generator,
    count: int,
    n: int,
    k: int,
    p_range: tuple[float, float] = (1.2, 4.0),
    max_shift: float = 2.0,
    batch: int = 512,
    max_draws: int = 10_000_000,
) -> AdmissibleSample:
    """Rejection-sample points whose flux-Jacobian eigenvalues lie in Gamma_k.

    Proposals are ``H = S + tau I`` with ``S`` from the symmetric Gaussian
    ensemble and ``tau ~ U(0, max_shift)``; gradients and ``p`` as in
    :func:`random_points`.
    """
    kept: list[PointBatch] = []
    have, drawn = 0, 0
    while have < count:
        if drawn >= max_draws:
            raise RuntimeError(f"rejection sampling stalled for n={n}, k={k}")
        prop = random_points(rng, batch, n, p_range)
        prop.H = prop.H + rng.uniform(0.0, max_shift, size=batch)[:, None, None] * np.eye(n)
        lam = np.linalg.eigvalsh(batch_symmetrized(prop))
        ok = symfun.cone_membership(lam, k)
        drawn += batch
        kept.append(PointBatch(prop.g[ok], prop.H[ok], prop.p[ok]))
        have += int(ok.sum())
    merged = PointBatch(
        np.concatenate([b.g for b in kept])[:count],
        np.concatenate([b.H for b in kept])[:count],
        np.concatenate([b.p for b in kept])[:count],
    )
    return AdmissibleSample(merged, have, drawn)


@dataclass
class PolynomialField:
    """Vector field with polynomial components ``X_i(x) = sum_a c_{i,a} x^a``."""

    exponents: np.ndarray  # (terms, n)
    coeffs: np.ndarray  # (n, terms)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.coeffs @ np.prod(x ** self.exponents, axis=1)


def random_polynomial_field(rng: np.random.Generator, n: int, degree: int = 3) -> PolynomialField:
    exps = [e for e in np.ndindex(*(degree + 1,) * n) if sum(e) <= degree]
    exponents = np.array(exps, dtype=float)
    coeffs = rng.standard_normal((n, len(exps)))
    return PolynomialField(exponents, coeffs)


def gradient_field(f: PolynomialField) -> Callable[[np.ndarray], np.ndarray]:
    """``D f_0`` for the first component of ``f``: a gradient (curl-free) field."""
    c = f.coeffs[0]

    def X(x):
        x = np.asarray(x, dtype=float)
        out = np.empty(x.size)
        for j in range(x.size):
            e = f.exponents[:, j]
            shifted = f.exponents.copy()
            shifted[:, j] = np.maximum(e - 1, 0)
            out[j] = np.sum(c * e * np.prod(x**shifted, axis=1))
        return out

    return X

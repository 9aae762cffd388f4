import math

import numpy as np
import pytest

from pkhessian import hessop, oracle, radial
from pkhessian.radial import RadialProfile, SupersolutionParams


def sp(n=3, k=1, p=2.0, alpha=4.0, A=1.0):
    return SupersolutionParams(n, k, p, alpha, A)


HALF_SQUARE = RadialProfile(lambda r: 0.5 * np.asarray(r) ** 2, lambda r: np.asarray(r, dtype=float), lambda r: np.ones_like(np.asarray(r, dtype=float)))

GRID = [(n, k, p) for n in (3, 4, 5, 6) for k in (1, 2, 3) for p in (2.0, 2.5, 3.0) if p * k < n]


def test_params_validation():
    with pytest.raises(ValueError):
        SupersolutionParams(3, 2, 2.0, 10.0)  # pk = n
    with pytest.raises(ValueError):
        SupersolutionParams(3, 1, 2.0, 4.0, A=-1.0)


def test_constant_reference_value():
    assert radial.supersolution_constant(sp()) == pytest.approx((2 / 9) ** (1 / 3), rel=1e-14)


def test_constant_at_and_below_threshold():
    assert radial.supersolution_constant(sp(alpha=3.0)) == 0
    with pytest.raises(radial.FamilyFailsError, match="family fails below critical exponent"):
        radial.supersolution_constant(sp(alpha=2.9))
    with pytest.raises(ValueError):
        radial.supersolution_constant(sp(alpha=1.0))  # alpha <= (p-1)k


@pytest.mark.parametrize("n,k,p", GRID)
def test_sharpness_threshold(n, k, p):
    kp = n * (p - 1) * k / (n - p * k)
    with pytest.raises(radial.FamilyFailsError):
        radial.supersolution_constant(SupersolutionParams(n, k, p, kp - 0.1))
    eps = (1e-12, 1e-8, 1e-4)
    values = [radial.supersolution_constant(SupersolutionParams(n, k, p, kp + d)) for d in eps]
    assert 0 < values[0] < values[1] < values[2]
    # C_* ~ eps^{1/gap} as alpha -> k_p* from above
    gap = kp - (p - 1) * k
    assert values[0] / values[2] == pytest.approx(1e-8 ** (1 / gap), rel=1e-3)


def test_profile_base_point_and_decay():
    s = sp()
    C = radial.supersolution_constant(s)
    assert radial.supersolution_profile(s, 0.0).w == -C
    ws = [radial.supersolution_profile(s, r).w for r in (0.5, 1, 10, 1e3, 1e12)]
    assert all(w < 0 for w in ws)
    assert all(a < b for a, b in zip(ws, ws[1:]))
    assert abs(ws[-1]) < 1e-6


def test_profile_origin_with_A_zero():
    with pytest.raises(ValueError):
        radial.supersolution_profile(sp(A=0.0), 0.0)


@pytest.mark.parametrize("p", [2.0, 3.0])
def test_profile_derivatives_fd(p):
    s = SupersolutionParams(6, 1, p, 9.0, 1.0)
    for r in (0.3, 1.0, 4.0):
        vals = radial.supersolution_profile(s, r)
        h = 1e-5
        dw = (radial.supersolution_profile(s, r + h).w - radial.supersolution_profile(s, r - h).w) / (2 * h)
        d2w = (radial.supersolution_profile(s, r + h).dw - radial.supersolution_profile(s, r - h).dw) / (2 * h)
        assert dw == pytest.approx(vals.dw, rel=1e-8)
        assert d2w == pytest.approx(vals.d2w, rel=1e-7)


def test_radial_to_point():
    pt = radial.radial_to_point(HALF_SQUARE, 2.0, 3, 2)
    np.testing.assert_array_equal(pt.g, [2.0, 0, 0])
    np.testing.assert_array_equal(pt.H, np.eye(3))
    inv = RadialProfile(lambda r: -1 / r, lambda r: 1 / r**2, lambda r: -2 / r**3)
    r = 1.5
    np.testing.assert_allclose(radial.radial_to_point(inv, r, 4, 2).H, np.diag([-2 / r**3] + [1 / r**3] * 3))
    with pytest.raises(ValueError):
        radial.radial_to_point(HALF_SQUARE, 0.0, 3, 2)
    flat = RadialProfile(lambda r: 0 * r, lambda r: 0 * r, lambda r: 0 * r)
    with pytest.raises(hessop.ZeroGradientError):
        radial.radial_to_point(flat, 1.0, 3, 3.0)


def test_closed_form_reductions():
    for n in (3, 5):
        for k in range(1, n + 1):
            assert radial.radial_pk_hessian_closed_form(HALF_SQUARE, 0.7, n, 2.0, k) == pytest.approx(math.comb(n, k))
    # k = 1: the radial p-Laplacian psi' + (n-1) psi / r
    prof = RadialProfile(lambda r: r**3, lambda r: 3 * r**2, lambda r: 6 * r)
    r, p, n = 1.3, 2.7, 4
    psi = (3 * r**2) ** (p - 1)
    dpsi = (p - 1) * (3 * r**2) ** (p - 2) * 6 * r
    assert radial.radial_pk_hessian_closed_form(prof, r, n, p, 1) == pytest.approx(dpsi + (n - 1) * psi / r)
    with pytest.raises(ValueError):
        radial.radial_pk_hessian_closed_form(HALF_SQUARE, 0.0, 3, 2.0, 1)


def test_closed_form_at_critical_point():
    flat = RadialProfile(lambda r: r**4, lambda r: 0.0 * r, lambda r: 0.0 * r)
    assert radial.radial_pk_hessian_closed_form(flat, 1.0, 3, 3.0, 2) == 0
    with pytest.raises(ValueError):
        radial.radial_pk_hessian_closed_form(flat, 1.0, 3, 1.5, 2)


@pytest.mark.parametrize("n,k,p", GRID)
def test_cross_path_agreement(n, k, p):
    kp = n * (p - 1) * k / (n - p * k)
    s = SupersolutionParams(n, k, p, 2 * kp, 1.0)
    prof = radial.supersolution_radial_profile(s)
    for r in (1e-2, 0.4, 3.0, 50.0):
        closed = radial.radial_pk_hessian_closed_form(prof, r, n, p, k)
        matrix = hessop.pk_hessian_at_point(radial.radial_to_point(prof, r, n, p), k).value
        two_term = radial.supersolution_operator(s, r)
        assert matrix == pytest.approx(closed, rel=1e-10)
        assert two_term == pytest.approx(closed, rel=1e-10)


def test_eigenvalues_match_matrix_path():
    s = SupersolutionParams(5, 2, 2.0, 12.0, 1.0)
    prof = radial.supersolution_radial_profile(s)
    for r in (0.2, 2.0):
        lam = hessop.pk_hessian_at_point(radial.radial_to_point(prof, r, 5, 2.0), 2).eigenvalues
        rad, tan = radial.supersolution_eigenvalues(s, r)
        np.testing.assert_allclose(np.sort(lam), np.sort([rad] + [tan] * 4), rtol=1e-10)


def test_origin_limits():
    s = SupersolutionParams(6, 1, 3.0, 9.0, 2.0)
    rad, tan = radial.supersolution_eigenvalues(s, 0.0)
    assert rad == tan
    near = radial.supersolution_operator(s, 1e-9)
    assert radial.supersolution_operator(s, 0.0) == pytest.approx(near, rel=1e-6)


def test_scan_reference_case():
    res = radial.supersolution_scan(sp())
    assert res.min_residual >= -1e-10
    assert res.admissible_fraction == 1


@pytest.mark.parametrize("A", [0.0, 1.0, 10.0])
def test_scan_near_threshold(A):
    res = radial.supersolution_scan(sp(alpha=3.01, A=A))
    assert res.min_residual >= -1e-10
    assert res.admissible_fraction == 1


def test_scan_includes_origin():
    res = radial.supersolution_scan(sp(), [0.0, 1.0])
    assert res.admissible_fraction == 1 and res.min_residual >= 0


def test_scan_rejects_empty_grid():
    with pytest.raises(ValueError):
        radial.supersolution_scan(sp(), [])


def test_fd_hessian_probe():
    # quadratics carry no truncation error, so a coarse step keeps rounding at eps / h^2
    coarse = oracle.StencilSpec(h=1e-1, richardson_levels=1)
    assert oracle.hessian_fd_probe(HALF_SQUARE, 1.0, 3, 2.0, 2, coarse) <= 1e-10
    prof = radial.supersolution_radial_profile(SupersolutionParams(6, 1, 2.5, 9.0, 1.0))
    assert oracle.hessian_fd_probe(prof, 1.0, 6, 2.5, 1) <= 1e-6


def test_fd_hessian_probe_order():
    prof = radial.supersolution_radial_profile(SupersolutionParams(5, 2, 2.0, 12.0, 1.0))
    errs = [oracle.hessian_fd_probe(prof, 1.0, 5, 2.0, 2, oracle.StencilSpec(h=h, richardson_levels=1)) for h in (4e-2, 2e-2, 1e-2, 5e-3)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.9)

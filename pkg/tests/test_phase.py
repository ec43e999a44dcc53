import math

import numpy as np
import pytest
from scipy.optimize import brentq

import oracles
from dickehubbard import (Branch, ContractViolation, Geometry, ModelInvalid, ModelParams, Region,
                          boundary_normal, boundary_super, classify, crossing_points, intersection_curve_2d,
                          lambda_sc, scan)
from dickehubbard.model import bloch_stack
from dickehubbard.phase import intersection_g

HC = Geometry.HONEYCOMB_2D
P018 = ModelParams(zeta=0.18)
K_STAR = 2 * math.pi / 3


def _det(lam, params, k, branch):
    # a mode reaching E = 0 makes M singular, independent of any eigen-solver
    return np.linalg.det(bloch_stack(params, k, lam, branch)).real


def test_lambda_sc_values():
    assert lambda_sc(ModelParams()) == 0.5
    assert lambda_sc(P018) == pytest.approx(oracles.LAMBDA_SC_018, abs=1e-15)
    assert lambda_sc(ModelParams(zeta=0.1)) == pytest.approx(oracles.LAMBDA_SC_010, abs=1e-15)
    with pytest.raises(ModelInvalid):
        lambda_sc(ModelParams(zeta=0.6))


def test_boundary_normal_values():
    assert boundary_normal(P018, math.pi) == pytest.approx(0.5, abs=1e-15)
    assert boundary_normal(P018, 0.0) == pytest.approx(oracles.BOUNDARY_NORMAL_K0_018, abs=1e-15)
    assert boundary_normal(P018, K_STAR) == pytest.approx(oracles.LAMBDA_SC_018, abs=1e-12)


def test_boundary_normal_off_resonance_matches_determinant_root():
    q = ModelParams(omega_b=1.2, omega_spin=0.8, zeta=0.2)
    for k in (0.0, 0.4, 2.5):
        root = brentq(_det, 1e-3, 0.9, args=(q, k, Branch.NORMAL), xtol=1e-14)
        assert boundary_normal(q, k) == pytest.approx(root, abs=1e-9)


def test_boundary_super_values():
    lsc = lambda_sc(P018)
    assert boundary_super(P018, K_STAR) == pytest.approx(lsc, abs=1e-6)
    for k in (0.0, 0.5, 1.0):
        root = brentq(_det, lsc + 1e-6, 0.7, args=(P018, k, Branch.SUPERRADIANT), xtol=1e-14)
        assert boundary_super(P018, k) == pytest.approx(root, abs=1e-9)
    assert boundary_super(P018, 0.0) > lsc + 0.07
    # inside the overlap zones the superradiant phase is stable right at lambda_sc
    assert boundary_super(P018, math.pi) == lsc


def test_boundary_super_small_zeta_limit():
    p = ModelParams(zeta=1e-4)
    lsc = lambda_sc(p)
    for k in np.linspace(-math.pi, math.pi, 9):
        assert abs(boundary_super(p, k) - lsc) < 1e-3


def test_boundaries_even_and_periodic():
    for k in (0.3, 1.7, 2.9):
        for fn in (boundary_normal, boundary_super):
            assert fn(P018, k) == pytest.approx(fn(P018, -k), abs=1e-9)
            assert fn(P018, k) == pytest.approx(fn(P018, k + 2 * math.pi), abs=1e-9)


def test_boundaries_meet_only_at_crossings():
    ks = np.linspace(-math.pi, math.pi, 721)
    gap = np.array([abs(boundary_normal(P018, k) - boundary_super(P018, k)) for k in ks])
    touching = ks[gap < 1e-8]
    step = ks[1] - ks[0]
    assert len(touching) > 0
    assert np.all(np.abs(np.cos(touching) + 0.5) < 2 * step)
    for k in (K_STAR, -K_STAR):
        assert abs(boundary_normal(P018, k) - boundary_super(P018, k)) < 1e-8


def test_crossing_points():
    pts = crossing_points(0, 1)
    assert pts[0] == (pytest.approx(-4 * math.pi / 3), "P")
    assert pts[1] == (pytest.approx(-2 * math.pi / 3), "Q")
    assert pts[2] == (pytest.approx(2 * math.pi / 3), "P")
    assert all(abs(math.cos(k) + 0.5) < 1e-10 for k, _ in crossing_points(-5, 5))
    with pytest.raises(ContractViolation):
        crossing_points(2, 1)


def test_classify_examples():
    for k in np.linspace(-math.pi, math.pi, 17):
        assert classify(P018, k, 0.3) is Region.NORMAL
        assert classify(P018, k, 0.542) is Region.SUPERRADIANT
    assert classify(P018, 0.0, 0.48) is Region.UNSTABLE
    assert classify(P018, math.pi, 0.48) is Region.OVERLAP
    # a boundary point itself has a zero mode and counts as unstable
    assert classify(P018, 0.0, boundary_normal(P018, 0.0)) is Region.UNSTABLE


def test_classify_honeycomb():
    p = ModelParams(zeta=0.12, geometry=HC)
    assert classify(p, [0.0, 0.0], 0.34) is Region.NORMAL
    with pytest.raises(ContractViolation):
        classify(p, 0.0, 0.34)


def test_scan_columns_and_periodicity():
    ks = np.linspace(-math.pi, math.pi, 64, endpoint=False)
    lams = np.linspace(0.2, 0.7, 51)
    pd = scan(P018, ks, lams)
    assert pd.labels.shape == (64, 51)
    below = lams < boundary_normal(P018, 0.0)
    assert np.all(pd.labels[:, below] == "Normal")
    shifted = scan(P018, ks + 2 * math.pi, lams)
    assert np.array_equal(pd.labels, shifted.labels)
    assert np.all(np.isnan(pd.lowest_energy_sup[:, lams < lambda_sc(P018)].real))
    assert sum(pd.counts().values()) == 64 * 51


def test_scan_region_two_touches_lambda_sc_at_crossings():
    ks = np.array([K_STAR - 0.3, K_STAR + 0.3, 0.0, math.pi])
    lams = np.array([lambda_sc(P018) + 0.01])
    labels = scan(P018, ks, lams).labels[:, 0]
    # inside P_1..Q_1 (around pi) overlap, inside Q_0..P_1 (around 0) unstable
    assert list(labels) == ["Unstable", "Overlap", "Unstable", "Overlap"]


def test_scan_chunking_is_deterministic():
    ks = np.linspace(-math.pi, math.pi, 40)
    lams = np.linspace(0.2, 0.7, 30)
    a = scan(P018, ks, lams)
    b = scan(P018, ks, lams, chunk=7)
    assert np.array_equal(a.labels, b.labels)
    assert np.array_equal(a.lowest_energy_nor, b.lowest_energy_nor)


def test_intersection_curve_points():
    pts = intersection_curve_2d()
    assert np.max(np.abs(intersection_g(pts[:, 0], pts[:, 1]))) < 1e-8
    assert np.min(np.linalg.norm(pts, axis=1)) > 0.5  # Gamma is never emitted
    assert intersection_g(math.pi, math.pi / math.sqrt(3)) == pytest.approx(0.0, abs=1e-15)
    assert intersection_g(0.0, 0.0) == 4.0


def test_intersection_curve_matches_boundary_contacts():
    p = ModelParams(zeta=0.12, geometry=HC)
    lsc = lambda_sc(p)
    assert lsc == pytest.approx(oracles.LAMBDA_SC_2D_012, abs=1e-15)
    pts = intersection_curve_2d(p, resolution=64)
    for kx, ky in pts[:: max(1, len(pts) // 6)]:
        assert boundary_normal(p, [kx, ky]) == pytest.approx(lsc, abs=1e-8)
        assert boundary_super(p, [kx, ky]) == pytest.approx(lsc, abs=1e-6)


def test_intersection_curve_errors():
    assert intersection_curve_2d(k_window=(1.0, 0.0, 0.0, 1.0)).shape == (0, 2)
    assert intersection_curve_2d(k_window=(-0.5, 0.5, -0.5, 0.5)).shape == (0, 2)
    with pytest.raises(ContractViolation):
        intersection_curve_2d(resolution=4)
    with pytest.raises(ContractViolation):
        intersection_curve_2d(P018)

import math
import random
from fractions import Fraction

import pytest

from carnotpoly.dynamics import (ControlPath, CurvePath, convergence_order,
                                 duality_check, graded_grid,
                                 integrate_adjoint, integrate_horizontal,
                                 integrate_normal, iterated_integrals,
                                 solve_goh_covector, spiral_dphi, spiral_dpsi,
                                 spiral_example, spiral_phi, spiral_psi,
                                 uniform_grid)
from carnotpoly.extremal import build_family
from carnotpoly.group import flow, identity, to_second_kind


GRID = uniform_grid(0.0, 1.0, 1e-3)


def test_zero_controls_constant_curve(free24):
    controls = ControlPath(2, func=lambda t: (0.0, 0.0))
    curve = integrate_horizontal(free24, controls, [0.0] * 8,
                                 uniform_grid(0, 1, 0.01))
    for x in curve.gamma:
        assert all(c == 0 for c in x)


def test_flow_line_matches_exact_flow(free24):
    controls = ControlPath(2, func=lambda t: (0.0, 1.0))
    curve = integrate_horizontal(free24, controls, [0.0] * 8, GRID)
    # oracle: the exact group flow at rational times
    for m in (250, 500, 1000):
        t = Fraction(m, 1000)
        exact = flow(free24, 2, t, identity(free24))
        err = max(abs(a - float(b)) for a, b in zip(curve.gamma[m], exact))
        assert err <= 1e-12


def test_constant_controls_match_single_field_flow(free24):
    # constant controls (1,1) follow exp(t(X_1+X_2)): compare endpoints
    controls = ControlPath(2, func=lambda t: (1.0, 1.0))
    curve = integrate_horizontal(free24, controls, [0.0] * 8, GRID)
    exact = to_second_kind(free24, {1: Fraction(1), 2: Fraction(1)})
    err = max(abs(a - float(b)) for a, b in zip(curve.gamma[-1], exact))
    assert err <= 1e-10


def test_horizontal_consistency(free24):
    controls = ControlPath(2, func=lambda t: (math.cos(t), math.sin(t)))
    curve = integrate_horizontal(free24, controls, [0.0] * 8, GRID)
    for m in (200, 700, 1000):
        t = curve.times[m]
        assert abs(curve.gamma[m][0] - math.sin(t)) <= 1e-10
        assert abs(curve.gamma[m][1] - (1 - math.cos(t))) <= 1e-10


def test_adjoint_constant_curve(heisenberg):
    controls = ControlPath(2, func=lambda t: (0.0, 0.0))
    curve = integrate_horizontal(heisenberg, controls, [0.0] * 3,
                                 uniform_grid(0, 1, 0.01))
    out = integrate_adjoint(heisenberg, curve, [1.0, -2.0, 3.0])
    for lam in out.lam:
        assert lam == [1.0, -2.0, 3.0]


def test_adjoint_heisenberg_closed_form(heisenberg):
    controls = ControlPath(2, func=lambda t: (1.0, 0.0))
    curve = integrate_horizontal(heisenberg, controls, [0.0] * 3, GRID)
    out = integrate_adjoint(heisenberg, curve, [0.0, 0.0, 1.0])
    for m in (0, 500, 1000):
        t = out.times[m]
        lam = out.lam[m]
        assert abs(lam[0] - 0.0) <= 1e-12
        assert abs(lam[1] + t) <= 1e-12
        assert abs(lam[2] - 1.0) <= 1e-12


def test_adjoint_solutions_are_prime_integrals(free24, free24_fields):
    fam = build_family(free24)
    controls = ControlPath(2, func=lambda t: (math.cos(t), math.sin(t)))
    curve = integrate_horizontal(free24, controls, [0.0] * 8, GRID,
                                 fields=free24_fields)
    rng = random.Random(19)
    lam0 = [rng.uniform(-1, 1) for _ in range(8)]
    out = integrate_adjoint(free24, curve, lam0)
    drift = duality_check(fam, out)
    assert max(drift.values()) <= 1e-8


def test_adjoint_linear_in_initial_condition(free24, free24_fields):
    controls = ControlPath(2, func=lambda t: (math.cos(t), math.sin(t)))
    curve = integrate_horizontal(free24, controls, [0.0] * 8,
                                 uniform_grid(0, 1, 0.01),
                                 fields=free24_fields)
    rng = random.Random(23)
    a, b = rng.uniform(-2, 2), rng.uniform(-2, 2)
    l1 = [rng.uniform(-1, 1) for _ in range(8)]
    l2 = [rng.uniform(-1, 1) for _ in range(8)]
    combo = [a * x + b * y for x, y in zip(l1, l2)]
    o1 = integrate_adjoint(free24, curve, l1)
    o2 = integrate_adjoint(free24, curve, l2)
    oc = integrate_adjoint(free24, curve, combo)
    for m in range(0, len(curve.times), 10):
        for i in range(8):
            mix = a * o1.lam[m][i] + b * o2.lam[m][i]
            assert abs(oc.lam[m][i] - mix) <= 1e-12


def test_normal_zero_covector(free24):
    curve = integrate_normal(free24, [0.0] * 8, [0.0] * 8,
                             uniform_grid(0, 1, 0.01))
    assert all(all(c == 0 for c in x) for x in curve.gamma)


def test_normal_heisenberg_straight_line(heisenberg):
    curve = integrate_normal(heisenberg, [0.0, -1.0, 0.0], [0.0] * 3, GRID)
    for m in (0, 400, 1000):
        t = curve.times[m]
        x = curve.gamma[m]
        assert abs(x[0]) <= 1e-12 and abs(x[1] - t) <= 1e-12 \
            and abs(x[2]) <= 1e-12
        assert max(abs(a - b) for a, b in
                   zip(curve.lam[m], [0.0, -1.0, 0.0])) <= 1e-12


def test_normal_prime_integral_drift(free24, free24_fields):
    fam = build_family(free24)
    lam0 = [-1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]
    curve = integrate_normal(free24, lam0, [0.0] * 8, GRID,
                             fields=free24_fields)
    drift = duality_check(fam, curve)
    assert max(drift.values()) <= 1e-8


def test_normal_rk4_convergence_order(free24, free24_fields):
    fam = build_family(free24)
    lam0 = [-1.0, 0.5, 1.0, -1 / 3, 0.25, 0.2, -1 / 7, 1.0]
    drifts = []
    for h in (0.04, 0.02, 0.01):
        curve = integrate_normal(free24, lam0, [0.0] * 8,
                                 uniform_grid(0, 1, h), fields=free24_fields)
        drifts.append(max(duality_check(fam, curve).values()))
    assert convergence_order(drifts) >= 3.5


def test_duality_check_exact_on_abnormal_line(free24_family):
    # rational samples of the abnormal line with lambda = P^{e_4}(gamma)
    ts = [Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2)]
    gamma = []
    lam = []
    v = [Fraction(0)] * 8
    v[3] = Fraction(1)
    for t in ts:
        x = [Fraction(0)] * 8
        x[1] = t
        gamma.append(x)
        lam.append([free24_family.evaluate(i, v, x) for i in range(1, 9)])
    curve = CurvePath(ts, gamma, lam=lam)
    drift = duality_check(free24_family, curve)
    assert all(d == 0 for d in drift.values())
    assert all(lam[m][i] == 0 for m in range(len(ts)) for i in (0, 1, 2))


def test_iterated_integrals_constant_curve(free24_family):
    controls = ControlPath(2, func=lambda t: (0.0, 0.0))
    ts = uniform_grid(0, 1, 0.01)
    curve = CurvePath(ts, [[0.0] * 8 for _ in ts], controls=controls)
    table, pairings = iterated_integrals(
        free24_family, curve, [0.0] * 8)
    assert all(all(v == 0 for v in vals) for vals in table.values())


def test_iterated_integrals_pairings(free24, free24_family, free24_fields):
    controls = ControlPath(2, func=lambda t: (math.cos(t), math.sin(t)))
    curve = integrate_horizontal(free24, controls, [0.0] * 8, GRID,
                                 fields=free24_fields)
    rng = random.Random(29)
    v = [0, 0, 0] + [rng.uniform(-1, 1) for _ in range(5)]
    table, pairings = iterated_integrals(free24_family, curve, v)
    # the elementary-matrix basis pairs all four integrals
    assert {(i, j, p) for i, j, p, _ in pairings} == \
        {(1, 2, -3), (2, 2, -2), (1, 1, -1), (2, 1, 0)}
    for _, _, _, drift in pairings:
        assert drift <= 1e-7


def test_iterated_integral_on_line_closed_form(free24, free24_family):
    # v = e_8, straight line gamma = (0, t, ...): B_12 = t^4/24
    controls = ControlPath(2, func=lambda t: (0.0, 1.0))
    curve = integrate_horizontal(free24, controls, [0.0] * 8, GRID)
    v = [0.0] * 8
    v[7] = 1.0
    table, pairings = iterated_integrals(free24_family, curve, v)
    for m in (250, 500, 1000):
        t = curve.times[m]
        assert abs(table[(1, 2)][m] - t ** 4 / 24) <= 1e-10
    hit = [p for p in pairings if (p[0], p[1]) == (1, 2)]
    assert hit and hit[0][2] == -3 and hit[0][3] <= 1e-10


def test_spiral_controls_bounded():
    for t in [x / 997 for x in range(1, 998)]:
        assert abs(spiral_dphi(t)) <= 2.0
        assert abs(spiral_dpsi(t)) <= 2.0
        assert abs(spiral_dphi(-t)) <= 2.0
    # and they really are the derivatives of phi, psi
    for t in (0.3, 0.7, -0.4):
        h = 1e-6
        num = (spiral_phi(t + h) - spiral_phi(t - h)) / (2 * h)
        assert abs(num - spiral_dphi(t)) <= 1e-6
        num = (spiral_psi(t + h) - spiral_psi(t - h)) / (2 * h)
        assert abs(num - spiral_dpsi(t)) <= 1e-6


def test_graded_grid_contains_requested_times():
    wanted = [1e-5, 0.3, 0.9]
    grid = graded_grid(1.0, include=wanted)
    for t in wanted:
        assert t in grid
    assert grid == sorted(grid)


def test_solve_goh_covector_rows(free34):
    fam = build_family(free34, rows=free34.stratum(2))
    v = solve_goh_covector(fam)
    assert all(v[k] == 0 for k in range(6))
    p4 = fam.polynomial(4, v)
    from carnotpoly.poly import Poly
    expect = Poly.monomial(32, (0, 2) + (0,) * 30, Fraction(1)) - \
        Poly.variable(32, 1)
    assert p4.terms == expect.terms
    assert not fam.polynomial(5, v)
    assert not fam.polynomial(6, v)


@pytest.mark.slow
def test_spiral_example_smoke():
    rep = spiral_example(samples_per_side=120, puncture=1e-5)
    assert rep["dimension"] == 64
    assert rep["goh_ok"] and rep["origin_exact_zero"]
    assert rep["max_residual"] <= 1e-8
    assert rep["third_coordinate_error"] <= 1e-9
    assert rep["control_bound"] <= 2.0

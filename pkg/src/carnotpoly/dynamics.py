"""Numeric side: horizontal curves, adjoint equations, normal extremals.

All integrators are fixed-step RK4 over an explicit time grid, so drift
numbers are reproducible.  The dual system

    dlambda_i/dt = - sum_k sum_{j<=r} c_ij^k h_j lambda_k

is linear and time-varying through the controls h; along its solutions
every coordinate lambda_i coincides with the extremal polynomial
P_i^{lambda(0)} evaluated on the curve, which turns the family into a set
of prime integrals.  :func:`duality_check` measures that drift, and
:func:`iterated_integrals` runs the quadrature algorithm pairing the
integrals B_ij with prolongation rows of the family.

Floating point lives here and nowhere else in the package.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from .extremal import build_family
from .group import left_invariant_fields
from .prolongation import ProlongedAlgebra


@dataclass
class ControlPath:
    """Bounded measurable controls as a callback or samples on a grid."""

    r: int
    func: object = None          # t -> sequence of r values
    times: list = None
    values: list = None          # aligned with times, each of length r
    bound: float = None

    def __call__(self, t):
        if self.func is not None:
            return self.func(t)
        ts, vs = self.times, self.values
        if t <= ts[0]:
            return vs[0]
        if t >= ts[-1]:
            return vs[-1]
        lo, hi = 0, len(ts) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ts[mid] <= t:
                lo = mid
            else:
                hi = mid
        w = (t - ts[lo]) / (ts[hi] - ts[lo])
        return [a + w * (b - a) for a, b in zip(vs[lo], vs[hi])]


@dataclass
class CurvePath:
    times: list
    gamma: list                  # one coordinate list per time
    lam: list = None             # optional dual coordinates per time
    controls: ControlPath = None

    def point(self, m):
        return self.gamma[m]


def uniform_grid(t0, t1, step):
    count = max(1, round(abs(t1 - t0) / step))
    return [t0 + (t1 - t0) * m / count for m in range(count + 1)]


def _rk4(f, y0, times):
    out = [list(y0)]
    y = list(y0)
    for m in range(len(times) - 1):
        t, h = times[m], times[m + 1] - times[m]
        k1 = f(t, y)
        y2 = [a + 0.5 * h * b for a, b in zip(y, k1)]
        k2 = f(t + 0.5 * h, y2)
        y3 = [a + 0.5 * h * b for a, b in zip(y, k2)]
        k3 = f(t + 0.5 * h, y3)
        y4 = [a + h * b for a, b in zip(y, k3)]
        k4 = f(t + h, y4)
        y = [a + h / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4)
             for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)]
        out.append(y)
    return out


def _algebra_of(A):
    return A.algebra if isinstance(A, ProlongedAlgebra) else A


def _compiled_fields(A, fields=None, coords=None):
    algebra = _algebra_of(A)
    if fields is None:
        fields = left_invariant_fields(algebra)
    if coords is not None:
        from .poly import PolyVectorField
        fields = [PolyVectorField(f.n, {l: p for l, p in f.coeffs.items()
                                        if l <= coords})
                  for f in fields]
    return [f.compiled() for f in fields]


def integrate_horizontal(A, controls, x0, grid, fields=None):
    """RK4 solution of ``gamma' = sum_j h_j X_j(gamma)`` on the grid."""
    algebra = _algebra_of(A)
    compiled = _compiled_fields(A, fields)
    r = algebra.r

    def f(t, y):
        h = controls(t)
        out = [0.0] * algebra.n
        for j in range(r):
            hj = h[j]
            if not hj:
                continue
            fj = compiled[j](y)
            for l in range(algebra.n):
                out[l] += hj * fj[l]
        return out

    gamma = _rk4(f, [float(c) for c in x0], [float(t) for t in grid])
    return CurvePath(list(grid), gamma, controls=controls)


def _adjoint_tables(algebra):
    """Sparse (i, k, c) float triples per horizontal index j."""
    tables = []
    for j in range(1, algebra.r + 1):
        rows = []
        for i in range(1, algebra.n + 1):
            for k, c in algebra.bracket_indices(i, j).items():
                if 1 <= k <= algebra.n:
                    rows.append((i - 1, k - 1, float(c)))
        tables.append(rows)
    return tables


def _adjoint_rhs(tables, h, lam):
    out = [0.0] * len(lam)
    for j, rows in enumerate(tables):
        hj = h[j]
        if not hj:
            continue
        for i, k, c in rows:
            out[i] -= hj * c * lam[k]
    return out


def integrate_adjoint(A, curve, lambda0):
    """Dual coordinates along an integrated curve, same grid, RK4.

    The curve must carry controls (the adjoint system only reads the
    horizontal velocities).
    """
    algebra = _algebra_of(A)
    if curve.controls is None:
        raise ValueError("adjoint integration needs the curve's controls")
    tables = _adjoint_tables(algebra)
    controls = curve.controls

    def f(t, lam):
        return _adjoint_rhs(tables, controls(t), lam)

    lam = _rk4(f, [float(c) for c in lambda0], [float(t) for t in curve.times])
    return CurvePath(curve.times, curve.gamma, lam=lam, controls=controls)


def integrate_normal(A, lambda0, x0, grid, fields=None):
    """Normal extremal: controls ``h_j = -lambda_j`` coupled to the adjoint."""
    algebra = _algebra_of(A)
    compiled = _compiled_fields(A, fields)
    tables = _adjoint_tables(algebra)
    n, r = algebra.n, algebra.r

    def f(t, y):
        gamma, lam = y[:n], y[n:]
        h = [-lam[j] for j in range(r)]
        out = [0.0] * n
        for j in range(r):
            hj = h[j]
            if not hj:
                continue
            fj = compiled[j](gamma)
            for l in range(n):
                out[l] += hj * fj[l]
        return out + _adjoint_rhs(tables, h, lam)

    y0 = [float(c) for c in x0] + [float(c) for c in lambda0]
    ys = _rk4(f, y0, [float(t) for t in grid])
    gamma = [y[:n] for y in ys]
    lam = [y[n:] for y in ys]
    lam0 = [float(c) for c in lambda0]
    controls = ControlPath(r, times=list(grid),
                           values=[[-l[j] for j in range(r)] for l in lam])
    return CurvePath(list(grid), gamma, lam=lam, controls=controls)


def duality_check(family, curve):
    """Max drift ``|lambda_i(t) - P_i^v(gamma(t))|`` per index, v = lambda(0)."""
    if curve.lam is None:
        raise ValueError("curve carries no dual coordinates")
    v = list(curve.lam[0])
    n = family.n
    drift = {}
    for i in range(1, n + 1):
        worst = 0
        for x, lam in zip(curve.gamma, curve.lam):
            val = family.evaluate(i, v, x)
            err = abs(lam[i - 1] - val)
            if err > worst:
                worst = err
        drift[i] = worst
    return drift


def iterated_integrals(family, curve, v):
    """Quadrature table ``B_ij(t) = int P_i^v(gamma) gamma_j' ds`` and
    its pairing with degree-0 prolongation rows.

    B is integrated by RK4 on the curve's grid alongside nothing else;
    the pairing matches a row p with ``[X_j, E_p] = X_i`` and
    ``[X_j', E_p] = 0`` for the other horizontal indices, for which
    ``B_ij = P_p^v`` along any horizontal curve through the origin.
    Returns ``(table, pairings)`` where table maps (i, j) to the sampled
    B values and pairings is a list of ``(i, j, p, drift)``.
    """
    A = family.algebra
    r = A.r
    if curve.controls is None:
        raise ValueError("iterated integrals need the curve's controls")
    controls = curve.controls
    gamma_at = _Interpolant(curve)
    polys = {i: family.polynomial(i, v) for i in range(1, r + 1)}
    pairs = [(i, j) for i in range(1, r + 1) for j in range(1, r + 1)]

    def f(t, y):
        x = gamma_at(t)
        h = controls(t)
        vals = {i: float(polys[i].evaluate(x)) for i in range(1, r + 1)}
        return [vals[i] * h[j - 1] for (i, j) in pairs]

    ys = _rk4(f, [0.0] * len(pairs), [float(t) for t in curve.times])
    table = {pair: [y[idx] for y in ys] for idx, pair in enumerate(pairs)}

    pairings = []
    for p in A.stratum(0):
        if p > 0:
            continue
        images = {j: A.bracket_indices(j, p) for j in range(1, r + 1)}
        hit = None
        for (i, j) in pairs:
            if images[j] == {i: Fraction(1)} and \
                    all(not images[jj] for jj in range(1, r + 1) if jj != j):
                hit = (i, j)
                break
        if hit is None:
            continue
        i, j = hit
        drift = 0.0
        for m, x in enumerate(curve.gamma):
            val = float(family.evaluate(p, v, x))
            err = abs(table[(i, j)][m] - val)
            if err > drift:
                drift = err
        pairings.append((i, j, p, drift))
    return table, pairings


class _Interpolant:
    """Cubic Hermite interpolation of an integrated curve.

    Endpoint derivatives are rebuilt from the controls and the fields, so
    midpoint values keep RK4 accuracy.
    """

    def __init__(self, curve):
        self.curve = curve

    def __call__(self, t):
        ts = self.curve.times
        if t <= ts[0]:
            return self.curve.gamma[0]
        if t >= ts[-1]:
            return self.curve.gamma[-1]
        lo, hi = 0, len(ts) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ts[mid] <= t:
                lo = mid
            else:
                hi = mid
        t0, t1 = ts[lo], ts[hi]
        if t == t0:
            return self.curve.gamma[lo]
        if t == t1:
            return self.curve.gamma[hi]
        # velocities are available only through the controls for the first
        # r coordinates; higher coordinates fall back to a cubic through
        # the secant with matched second differences (Catmull-Rom style)
        w = (t - t0) / (t1 - t0)
        p0 = self.curve.gamma[lo]
        p1 = self.curve.gamma[hi]
        pm = self.curve.gamma[max(lo - 1, 0)]
        pp = self.curve.gamma[min(hi + 1, len(ts) - 1)]
        out = []
        for a_m, a0, a1, a_p in zip(pm, p0, p1, pp):
            m0 = (a1 - a_m) / 2 if lo > 0 else a1 - a0
            m1 = (a_p - a0) / 2 if hi < len(ts) - 1 else a1 - a0
            h00 = (1 + 2 * w) * (1 - w) ** 2
            h10 = w * (1 - w) ** 2
            h01 = w * w * (3 - 2 * w)
            h11 = w * w * (w - 1)
            out.append(h00 * a0 + h10 * m0 + h01 * a1 + h11 * m1)
        return out


def convergence_order(drifts):
    """Observed order from drifts at successively halved steps."""
    orders = []
    for a, b in zip(drifts, drifts[1:]):
        if b == 0:
            continue
        orders.append(math.log2(a / b))
    return min(orders) if orders else float("inf")


# -- spiral Goh extremal ------------------------------------------------------

def spiral_phi(t):
    if t == 0:
        return 0.0
    return t * math.cos(math.log(1.0 - math.log(abs(t))))


def spiral_psi(t):
    if t == 0:
        return 0.0
    return t * math.sin(math.log(1.0 - math.log(abs(t))))


def spiral_dphi(t):
    L = math.log(1.0 - math.log(abs(t)))
    return math.cos(L) + math.sin(L) / (1.0 - math.log(abs(t)))


def spiral_dpsi(t):
    L = math.log(1.0 - math.log(abs(t)))
    return math.sin(L) - math.cos(L) / (1.0 - math.log(abs(t)))


def graded_grid(t_end, base_step=1e-3, ratio=64.0, t_min=1e-9,
                include=()):
    """Grid from ``t_min`` to ``|t_end|`` with steps capped by ``|t|/ratio``.

    Signed: the grid runs toward ``t_end`` of either sign and contains
    every requested ``include`` time.
    """
    sign = 1.0 if t_end > 0 else -1.0
    T = abs(t_end)
    pts = {t_min, T}
    for t in include:
        if t_min <= abs(t) <= T:
            pts.add(abs(t))
    t = t_min
    while t < T:
        t = min(T, t + min(base_step, max(t / ratio, t_min)))
        pts.add(t)
    return [sign * t for t in sorted(pts)]


def solve_goh_covector(factor_family):
    """Exact covector with degree-2 rows ``(y_2^2 - y_1, 0, 0, ...)``.

    Unknowns are the covector entries on strata of degree >= 3; the three
    lowest degree-2 rows are matched to the target polynomials.  Returns
    the covector (length n, Fractions) or raises if the exact linear
    system is inconsistent.
    """
    from . import linalg
    from .poly import Poly
    A = factor_family.algebra
    n = A.n
    deg2 = A.stratum(2)
    if len(deg2) < 1:
        raise ValueError("need a stratum of degree 2")
    weights = factor_family.weights
    target = {
        deg2[0]: Poly(n, {((2, 2),): Fraction(1), ((1, 1),): Fraction(-1)},
                      weights),
    }
    for j in deg2[1:]:
        target[j] = Poly.zero(n, weights)
    unknowns = [k for k in range(1, n + 1) if A.degrees[k] >= 3]
    upos = {k: i for i, k in enumerate(unknowns)}
    rows = {}
    rhs = {}
    for j in deg2:
        keys = set(target[j].terms)
        for k in unknowns:
            q = factor_family.Q.get((j, k))
            if q is not None:
                keys.update(q.terms)
        for key in keys:
            row = [Fraction(0)] * len(unknowns)
            for k in unknowns:
                q = factor_family.Q.get((j, k))
                if q is not None:
                    c = q.terms.get(key)
                    if c:
                        row[upos[k]] = c
            rows[(j, key)] = row
            rhs[(j, key)] = target[j].terms.get(key, Fraction(0))
    order = sorted(rows)
    sol = linalg.solve([rows[o] for o in order], [rhs[o] for o in order],
                       len(unknowns))
    if sol is None:
        raise ValueError("no covector matches the degree-2 target rows")
    v = [Fraction(0)] * n
    for k, c in zip(unknowns, sol):
        v[k - 1] = c
    return v


def spiral_lift(algebra, fields, dcoord, t_end, base_step=1e-3, ratio=64.0,
                t_min=1e-9, include=(), coords_cap=None):
    """Horizontal lift of ``(t^2, t, f(t), *, ...)`` in a rank-3 factor.

    ``dcoord`` is the derivative callback of the third coordinate.  The
    run starts at ``+-t_min`` from the analytic seed; coordinates above
    ``coords_cap`` (an index bound) are dropped from the state.
    """
    n = algebra.n
    cap = coords_cap or n
    compiled = _compiled_fields(algebra, fields, coords=cap)[:3]

    def controls(t):
        return (2.0 * t, 1.0, dcoord(t))

    grid = graded_grid(t_end, base_step, ratio, t_min, include)
    f3 = spiral_phi if dcoord is spiral_dphi else spiral_psi
    seed = [0.0] * cap
    t0 = grid[0]
    seed[0] = t0 * t0
    seed[1] = t0
    seed[2] = f3(t0)

    def f(t, y):
        h = controls(t)
        out = [0.0] * cap
        for j in range(3):
            hj = h[j]
            if not hj:
                continue
            fj = compiled[j](y)
            for l in range(cap):
                out[l] += hj * fj[l]
        return out

    ys = _rk4(f, seed, grid)
    return grid, [y + [0.0] * (n - cap) for y in ys]


def spiral_example(samples_per_side=1000, puncture=1e-6, base_step=1e-3,
                   tol=1e-8, context=None):
    """Reproduce the 64-dimensional spiral Goh extremal end to end.

    Builds the rank-6 step-4 product, solves the exact covector with
    degree-2 rows ``(y_2^2 - y_1, 0, 0)`` in each factor, lifts the
    spiral horizontally on a graded grid, and reports the Goh residuals
    together with the control bound.  ``context`` may carry a prebuilt
    ``(product, product_family, factor_fields, covector)`` tuple.
    """
    from .abnormal import goh_check, product_group
    from .freelie import build_free

    if context is None:
        factor, _ = build_free(3, 4)
        factor_fields = left_invariant_fields(factor)
        factor_family = build_family(factor, rows=factor.stratum(2))
        v = solve_goh_covector(factor_family)
        product = product_group(factor, factor)
        goh_rows = [j for j in range(1, product.base.n + 1)
                    if product.base.degrees[j] in (1, 2)]
        product_family = build_family(product.base, rows=goh_rows)
    else:
        product, product_family, factor_fields, v = context
        factor = product.factor_a.base
    vG = product.embed_covector(v, v)

    # factor coordinates of weight <= 3 are enough for every Goh row
    cap = max(j for j in range(1, factor.n + 1) if factor.degrees[j] <= 3)
    side = {}
    half = max(samples_per_side, 4)
    n_geo = half // 2
    n_uni = half - n_geo
    knee = 0.05
    geo = [puncture * (knee / puncture) ** (m / n_geo)
           for m in range(n_geo)]
    uni = [knee + (1.0 - knee) * m / (n_uni - 1) for m in range(n_uni)]
    sample_ts = sorted(set(geo + uni))
    sample_ts = [min(t, 1.0) for t in sample_ts]
    for sign in (1.0, -1.0):
        wanted = [sign * t for t in sample_ts]
        lifts = {}
        for name, d in (("y", spiral_dphi), ("z", spiral_dpsi)):
            grid, ys = spiral_lift(factor, factor_fields, d, sign,
                                   base_step=base_step,
                                   include=[abs(t) for t in wanted],
                                   coords_cap=cap)
            lifts[name] = dict(zip(grid, ys))
        side[sign] = (wanted, lifts)

    points = []
    ts = []
    osc_err = 0.0
    for sign in (1.0, -1.0):
        wanted, lifts = side[sign]
        for t in wanted:
            if abs(t) < puncture:
                continue
            ly, lz = lifts["y"][t], lifts["z"][t]
            # accuracy witness on the oscillatory third coordinate
            osc_err = max(osc_err, abs(ly[2] - spiral_phi(t)),
                          abs(lz[2] - spiral_psi(t)))
            pt = product.embed_point(ly, lz)
            points.append([float(c) for c in pt])
            ts.append(t)
    ok, worst = goh_check(product_family, [float(c) for c in vG], points,
                          tol=tol)

    origin = [Fraction(0)] * product.base.n
    ok0, worst0 = goh_check(product_family, vG, [origin], tol=0)

    bound = 0.0
    for sign in (1.0, -1.0):
        wanted, _ = side[sign]
        for t in wanted:
            bound = max(bound, abs(spiral_dphi(t)), abs(spiral_dpsi(t)))

    return {
        "dimension": product.base.n,
        "rank": product.base.r,
        "step": product.base.s,
        "covector_support": {k + 1: v[k] for k in range(len(v)) if v[k]},
        "samples": len(points),
        "puncture": puncture,
        "goh_ok": bool(ok),
        "max_residual": float(worst),
        "origin_exact_zero": bool(ok0) and worst0 == 0,
        "third_coordinate_error": osc_err,
        "control_bound": bound,
        "control_bound_ok": bound <= 2.0,
    }

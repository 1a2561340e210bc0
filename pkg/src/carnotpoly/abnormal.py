"""Abnormal varieties, corank detection, minors, and the Goh condition.

A horizontal curve through the origin is an abnormal extremal exactly
when some nonzero covector v annihilates all generator rows P_j^v with
d(j) <= 1 along it (prolongation rows included).  Sampling the curve
turns that into a linear system on v whose null space is computed exactly
on rational samples and by singular-value thresholding on floats; its
dimension is a sound lower bound for the corank.

The minor construction stacks the generator rows of the Q matrix against
the columns a curve through the origin can load (d(k) >= 2, minus the
single degree-2 column in rank 2, where the adjoint equations force
lambda_3 = 0 on nonconstant curves) and takes all maximal minors; each
nonzero determinant is a covector-independent polynomial vanishing on
every abnormal curve, certified by one explicit monomial.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from . import linalg
from .algebra import GradedLieAlgebra, StructureError
from .extremal import ExtremalFamily
from .poly import Poly, weighted_degree
from .prolongation import ProlongationStratum, ProlongedAlgebra


def _is_exact(value):
    return isinstance(value, (int, Fraction))


def variety_generators(family, v):
    """The polynomials P_j^v over all stored rows with d(j) <= 1."""
    if not any(v):
        raise StructureError("the covector must be nonzero")
    return [family.polynomial(j, v) for j in family.rows_of_degree_at_most(1)]


def membership(family, v, samples, tol=None):
    """Whether every generator row vanishes on every sample.

    Returns ``(ok, max_residual)``.  Exact comparison on all-rational
    samples (tol defaults to 0 there, 1e-9 otherwise).
    """
    rows = family.rows_of_degree_at_most(1)
    exact = all(_is_exact(c) for x in samples for c in x)
    if tol is None:
        tol = 0 if exact else 1e-9
    worst = Fraction(0) if exact else 0.0
    for x in samples:
        for j in rows:
            val = family.evaluate(j, v, x)
            mag = abs(val)
            if mag > worst:
                worst = mag
        if worst > tol and exact:
            break
    return worst <= tol, worst


def detect_abnormal(family, samples, tol=1e-9):
    """Null space of the sampled generator constraints on the covector.

    Returns a dict with the exact or numeric basis, the corank lower
    bound, and (numeric path) the singular value spectrum.  Samples must
    include the origin for the corank reading to be sound; too few
    samples only make the result an over-approximation, flagged in
    ``warnings``.
    """
    n = family.n
    rows = family.rows_of_degree_at_most(1)
    warnings = []
    if not any(all(not c for c in x) for x in samples):
        warnings.append("samples do not include the origin")
    if len(samples) < 2:
        warnings.append("very few samples: null space is an over-approximation")
    exact = all(_is_exact(c) for x in samples for c in x)
    matrix = []
    for x in samples:
        for j in rows:
            matrix.append([family.q(j, k).evaluate(x)
                           for k in range(1, n + 1)])
    if exact:
        basis = linalg.nullspace(
            [[Fraction(c) for c in row] for row in matrix], n)
        return {"exact": True, "basis": basis, "corank_lower_bound": len(basis),
                "warnings": warnings}
    import numpy as np
    M = np.array([[float(c) for c in row] for row in matrix], dtype=float)
    u, sing, vt = np.linalg.svd(M)
    cutoff = tol * (sing[0] if len(sing) and sing[0] > 0 else 1.0)
    ker = [vt[i] for i in range(len(vt)) if i >= len(sing) or sing[i] <= cutoff]
    return {"exact": False, "basis": [list(map(float, b)) for b in ker],
            "corank_lower_bound": len(ker),
            "singular_values": [float(s) for s in sing],
            "warnings": warnings}


@dataclass
class MinorSystem:
    family: ExtremalFamily
    row_indices: list
    col_indices: list
    matrix: list        # list of rows of Poly
    minors: list        # (subset of row positions, determinant Poly)


def _det(matrix):
    """Exact determinant of a square Poly matrix by memoized expansion."""
    size = len(matrix)
    n = matrix[0][0].n if size else 0
    cache = {}

    def minor(rows, cols):
        if len(rows) == 1:
            return matrix[rows[0]][cols[0]]
        key = (rows, cols)
        hit = cache.get(key)
        if hit is not None:
            return hit
        out = None
        r = rows[0]
        for pos, c in enumerate(cols):
            entry = matrix[r][c]
            if not entry:
                continue
            sub = minor(rows[1:], cols[:pos] + cols[pos + 1:])
            if not sub:
                continue
            term = entry * sub
            if pos % 2:
                term = -term
            out = term if out is None else out + term
        if out is None:
            out = Poly.zero(matrix[r][0].n)
        cache[key] = out
        return out

    if size == 0:
        return Poly.const(n, 1)
    return minor(tuple(range(size)), tuple(range(size)))


def minor_system(family, columns=None):
    """All maximal square minors of the generator-row Q submatrix.

    Rows: stored j with d(j) <= 1, ascending.  Columns default to the
    curve-through-origin reduction: k with d(k) >= 2, and in rank 2 the
    degree-2 column is dropped as well.
    """
    A = family.algebra
    n = A.n
    rows = family.rows_of_degree_at_most(1)
    if A.r == 2:
        # nonconstant rank-2 abnormals also satisfy lambda = 0 on the
        # degree-2 row, so it joins the rows and leaves the columns
        rows = family.rows_of_degree_at_most(2)
    if columns is None:
        columns = [k for k in range(1, n + 1) if A.degrees[k] >= 2]
        if A.r == 2:
            columns = [k for k in columns if A.degrees[k] != 2]
    matrix = [[family.q(j, k) for k in columns] for j in rows]
    minors = []
    if not rows or not columns:
        return MinorSystem(family, rows, columns, matrix, minors)
    if len(rows) >= len(columns):
        for subset in combinations(range(len(rows)), len(columns)):
            det = _det([matrix[i] for i in subset])
            minors.append((subset, det))
    else:
        for subset in combinations(range(len(columns)), len(rows)):
            det = _det([[row[c] for c in subset] for row in matrix])
            minors.append((subset, det))
    return MinorSystem(family, rows, columns, matrix, minors)


def nonvanishing_certificate(system):
    """One explicit monomial witness per nonzero minor.

    Returns a list aligned with ``system.minors``: ``None`` for the zero
    determinant, else ``(subset, alpha_key, coefficient)`` with the
    canonically largest monomial.
    """
    out = []
    for subset, det in system.minors:
        if not det:
            out.append(None)
            continue
        key = max(det.terms)
        out.append((subset, key, det.terms[key]))
    return out


def goh_check(family, v, samples, tol=None):
    """Goh test: rows with d(i) in {1, 2} vanish on all samples."""
    rows = [j for j in family.rows()
            if family.algebra.degrees[j] in (1, 2)]
    exact = all(_is_exact(c) for x in samples for c in x)
    if tol is None:
        tol = 0 if exact else 1e-9
    worst = Fraction(0) if exact else 0.0
    for x in samples:
        for j in rows:
            mag = abs(family.evaluate(j, v, x))
            if mag > worst:
                worst = mag
    return worst <= tol, worst


class ProductAlgebra(ProlongedAlgebra):
    """Direct product with the factor-to-product index embeddings."""

    def __init__(self, base, algebra, strata, complete, map_a, map_b,
                 factor_a, factor_b):
        super().__init__(base=base, algebra=algebra, strata=strata,
                         complete=complete)
        self.map_a = map_a
        self.map_b = map_b
        self.factor_a = factor_a
        self.factor_b = factor_b

    def embed_point(self, xa, xb):
        out = [Fraction(0)] * self.base.n
        for i, c in enumerate(xa, start=1):
            out[self.map_a[i] - 1] = c
        for i, c in enumerate(xb, start=1):
            out[self.map_b[i] - 1] = c
        return out

    def embed_covector(self, va, vb):
        out = [Fraction(0)] * self.base.n
        for i, c in enumerate(va, start=1):
            out[self.map_a[i] - 1] = c
        for i, c in enumerate(vb, start=1):
            out[self.map_b[i] - 1] = c
        return out


def product_group(PA, PB):
    """Direct product of two (prolonged) algebras, brackets across = 0.

    The positive part interleaves strata degree by degree (factor A
    first); nonpositive strata are adjoined the same way, acting block
    diagonally, which is a graded extension of the product but not its
    full prolongation.
    """
    if isinstance(PA, GradedLieAlgebra):
        PA = ProlongedAlgebra(base=PA, algebra=PA, strata=[], complete=False)
    if isinstance(PB, GradedLieAlgebra):
        PB = ProlongedAlgebra(base=PB, algebra=PB, strata=[], complete=False)
    a, b = PA.algebra, PB.algebra
    s = max(PA.base.s, PB.base.s)
    map_a, map_b = {}, {}
    degrees = {}
    nxt = 1
    for d in range(1, s + 1):
        for i in PA.base.stratum(d):
            map_a[i] = nxt
            degrees[nxt] = d
            nxt += 1
        for i in PB.base.stratum(d):
            map_b[i] = nxt
            degrees[nxt] = d
            nxt += 1
    lowest_a = min(a.degrees.values())
    lowest_b = min(b.degrees.values())
    nxt = 0
    for d in range(0, min(lowest_a, lowest_b) - 1, -1):
        layer = [(map_a, i) for i in a.stratum(d) if i <= 0] + \
                [(map_b, i) for i in b.stratum(d) if i <= 0]
        for mapping, i in reversed(layer):
            mapping[i] = nxt
            degrees[nxt] = d
            nxt -= 1
    table = {}
    for (i, j), terms in a.table.items():
        table[(map_a[i], map_a[j])] = {map_a[k]: c for k, c in terms.items()}
    for (i, j), terms in b.table.items():
        table[(map_b[i], map_b[j])] = {map_b[k]: c for k, c in terms.items()}
    algebra = GradedLieAlgebra(degrees, table, rank=PA.base.r + PB.base.r)
    base = GradedLieAlgebra({i: d for i, d in degrees.items() if i >= 1},
                            {(i, j): t for (i, j), t in table.items()
                             if i >= 1 and j >= 1},
                            rank=PA.base.r + PB.base.r)
    strata = []
    for d in range(0, min(lowest_a, lowest_b) - 1, -1):
        maps, blocks, ids = [], [], []
        for P, mapping in ((PA, map_a), (PB, map_b)):
            for st in P.strata:
                if st.degree != d:
                    continue
                for phi, blk, old_id in zip(st.maps, st.g1_blocks, st.ids):
                    maps.append({mapping[m]: {mapping[t]: c
                                              for t, c in img.items()}
                                 for m, img in phi.items()})
                    blocks.append({mapping[q]: {mapping[t]: c
                                                for t, c in img.items()}
                                   for q, img in blk.items()})
                    ids.append(mapping[old_id])
        if maps:
            strata.append(ProlongationStratum(d, maps, blocks, ids))
    return ProductAlgebra(base, algebra, strata,
                          PA.complete and PB.complete,
                          map_a, map_b, PA, PB)


def certificate_text(system, certificates):
    """Human-readable lines for a minor report."""
    lines = []
    for (subset, det), cert in zip(system.minors, certificates):
        rows = ",".join(str(system.row_indices[i]) for i in subset) \
            if len(system.row_indices) >= len(system.col_indices) \
            else ",".join(str(system.col_indices[i]) for i in subset)
        if cert is None:
            lines.append(f"minor rows({rows}): zero determinant")
        else:
            _, key, coeff = cert
            mono = "*".join(f"x{v}" if e == 1 else f"x{v}^{e}"
                            for v, e in key)
            deg = weighted_degree(det, system.family.weights)
            lines.append(
                f"minor rows({rows}): degree {deg}, witness {coeff}*{mono}")
    return lines

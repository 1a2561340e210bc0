"""Extremal polynomials of a graded (possibly prolonged) algebra.

For every stored index j and covector parameter v the polynomial

    P_j^v(x) = sum_alpha ((-1)^|alpha| / alpha!) sum_k c_j,alpha^k v_k x^alpha

is linear in v, so the family is held as the matrix Q with

    P_j^v = sum_{k=1..n} v_k Q_jk,
    Q_jk  = sum_{alpha : d(alpha) = d(k) - d(j)} ((-1)^|alpha|/alpha!)
            c_j,alpha^k x^alpha,

where v_k = 0 for k <= 0 by convention.  Q_jk is weighted homogeneous of
degree d(k) - d(j) (or zero), Q_jk(0) = delta_jk for j >= 1, and the rows
satisfy the structure formulas  X_i P_j^v = sum_k c_ij^k P_k^v  exactly;
:func:`verify_structure` checks that identity symbolically and
:func:`reconstruct_by_recursion` rebuilds the family from it by exact
antidifferentiation, top stratum down.
"""

from dataclasses import dataclass
from fractions import Fraction

from .algebra import (GradedLieAlgebra, StructureError, multi_index_factorial,
                      multi_index_order)
from .group import left_invariant_fields
from .poly import Poly, key_from_alpha, weighted_degree
from .prolongation import ProlongedAlgebra, bracket_decompositions


def _algebra_of(A):
    return A.algebra if isinstance(A, ProlongedAlgebra) else A


@dataclass
class ExtremalFamily:
    algebra: GradedLieAlgebra
    Q: dict  # (j, k) -> Poly, absent entries are zero

    @property
    def n(self):
        return self.algebra.n

    @property
    def weights(self):
        n = self.algebra.n
        return tuple(self.algebra.degrees[j] for j in range(1, n + 1))

    def rows(self):
        return sorted(self.algebra.degrees)

    def rows_of_degree_at_most(self, bound):
        return [j for j in self.rows() if self.algebra.degrees[j] <= bound]

    def q(self, j, k):
        hit = self.Q.get((j, k))
        if hit is not None:
            return hit
        return Poly.zero(self.n, self.weights)

    def polynomial(self, j, v):
        """P_j^v as a polynomial; float covector entries are taken exactly."""
        if len(v) != self.n:
            raise StructureError("covector length must equal the dimension")
        out = Poly.zero(self.n, self.weights)
        for k in range(1, self.n + 1):
            c = v[k - 1]
            if not c:
                continue
            q = self.Q.get((j, k))
            if q is not None:
                out = out + q * Fraction(c)
        return out

    def evaluate(self, j, v, x):
        """P_j^v(x); exact on rational input."""
        total = None
        for k in range(1, self.n + 1):
            c = v[k - 1]
            if not c:
                continue
            q = self.Q.get((j, k))
            if q is None:
                continue
            val = q.evaluate(x) * c
            total = val if total is None else total + val
        if total is None:
            return Fraction(0)
        return total


def build_family(A, rows=None):
    """The full matrix Q of the extremal family of ``A``.

    ``rows`` restricts the computed row indices (default: all stored).
    Generalized structure constants are enumerated once per row by the
    ascending-generator bracketing, so every coefficient is exact.
    """
    algebra = _algebra_of(A)
    n = algebra.n
    weights = tuple(algebra.degrees[j] for j in range(1, n + 1))
    Q = {}
    row_list = sorted(algebra.degrees) if rows is None else list(rows)
    for j in row_list:
        gsc = algebra.generalized_structure_constants(j)
        for (alpha, k), c in gsc.items():
            if k < 1:
                continue
            coeff = Fraction((-1) ** multi_index_order(alpha),
                             multi_index_factorial(alpha)) * c
            if not coeff:
                continue
            key = key_from_alpha(alpha)
            slot = Q.get((j, k))
            if slot is None:
                slot = Poly.zero(n, weights)
            Q[(j, k)] = slot + Poly(n, {key: coeff}, weights)
    Q = {jk: p for jk, p in Q.items() if p}
    return ExtremalFamily(_algebra_of(A), Q)


def eval_P(family, j, v, x):
    return family.evaluate(j, v, x)


def verify_structure(family, fields=None, rows=None):
    """Residuals of X_i Q_j. - sum_k c_ij^k Q_k. for all i, stored j.

    Returns a list of violation records ``(i, j, k, residual_poly)``;
    empty means the structure formulas hold exactly.
    """
    A = family.algebra
    n = A.n
    if fields is None:
        fields = left_invariant_fields(A)
    report = []
    row_list = family.rows() if rows is None else list(rows)
    for i in range(1, n + 1):
        field = fields[i - 1]
        for j in row_list:
            cij = A.bracket_indices(i, j)
            for k in range(1, n + 1):
                qjk = family.Q.get((j, k))
                lhs = field.apply(qjk) if qjk is not None \
                    else Poly.zero(n, family.weights)
                rhs = Poly.zero(n, family.weights)
                for m, c in cij.items():
                    qmk = family.Q.get((m, k))
                    if qmk is not None:
                        rhs = rhs + qmk * c
                res = lhs - rhs
                if res:
                    report.append((i, j, k, res))
    return report


def reconstruct_by_recursion(A, fields=None):
    """Rebuild the family from the structure formulas alone.

    Start from the top stratum (constant rows) and descend: each lower row
    has known derivatives along every coordinate field, recovered from the
    horizontal ones through the generativity decompositions, and is then
    integrated coordinate by coordinate from x_n down to x_1.  The result
    must agree with :func:`build_family` exactly; inconsistent derivative
    data raises :class:`StructureError`.
    """
    algebra = _algebra_of(A)
    n = algebra.n
    weights = tuple(algebra.degrees[j] for j in range(1, n + 1))
    if fields is None:
        fields = left_invariant_fields(algebra)
    decomp = bracket_decompositions(algebra)
    rows = sorted(algebra.degrees)
    degrees_present = sorted({algebra.degrees[j] for j in rows}, reverse=True)
    Q = {}
    for deg in degrees_present:
        for j in rows:
            if algebra.degrees[j] != deg:
                continue
            if deg == algebra.s:
                if j >= 1:
                    Q[(j, j)] = Poly.const(n, 1, weights)
                continue
            # Known coordinate-field derivatives of the row vector Q_j.
            deriv = {}
            for q in algebra.stratum(1):
                row = {}
                for m, c in algebra.bracket_indices(q, j).items():
                    for k in range(1, n + 1):
                        qmk = Q.get((m, k))
                        if qmk is not None:
                            cur = row.get(k)
                            row[k] = qmk * c if cur is None else cur + qmk * c
                deriv[q] = {k: p for k, p in row.items() if p}
            for d in range(2, algebra.s + 1):
                for m in algebra.stratum(d):
                    row = {}
                    for w, p, qq in decomp[m]:
                        for k, poly in deriv[qq].items():
                            t = fields[p - 1].apply(poly) * w
                            if t:
                                cur = row.get(k)
                                row[k] = t if cur is None else cur + t
                        for k, poly in deriv[p].items():
                            t = fields[qq - 1].apply(poly) * (-w)
                            if t:
                                cur = row.get(k)
                                row[k] = t if cur is None else cur + t
                    deriv[m] = {k: p for k, p in row.items() if p}
            # Integrate along coordinates, outermost first.
            acc = {}
            if j >= 1:
                acc[j] = Poly.const(n, 1, weights)
            for ell in range(n, 0, -1):
                for k, poly in deriv[ell].items():
                    piece = poly.subs_zero(range(1, ell)).integrate(ell)
                    if piece:
                        cur = acc.get(k)
                        acc[k] = piece if cur is None else cur + piece
            for q in algebra.stratum(1):
                for k in range(1, n + 1):
                    got = fields[q - 1].apply(acc.get(k, Poly.zero(n, weights)))
                    want = deriv[q].get(k, Poly.zero(n, weights))
                    if got != want:
                        raise StructureError(
                            f"row {j}: integrated polynomial does not satisfy "
                            f"its own derivative data at (i={q}, k={k})")
            for k, p in acc.items():
                if p:
                    Q[(j, k)] = p
    return ExtremalFamily(algebra, Q)


def degree_bound_report(family):
    """Rows violating d(P_j^v) <= s - d(j); empty on a valid family."""
    A = family.algebra
    bad = []
    for (j, k), p in family.Q.items():
        bound = A.s - A.degrees[j]
        if weighted_degree(p, family.weights) > bound:
            bad.append((j, k))
    return bad

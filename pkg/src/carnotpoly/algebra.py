"""Graded Lie algebras given by exact structure constants.

A stratified nilpotent Lie algebra of dimension *n*, rank *r* and step *s*
is stored through the degrees ``d(j)`` of an adapted basis ``X_1..X_n``
(``d`` nondecreasing, values ``1..s``) and a sparse bracket table
``[X_i, X_j] = sum_k c_ij^k X_k``.  Indices ``j <= 0`` with degrees
``d(j) <= 0`` are allowed and carry a graded prolongation extension of the
algebra; the same bracket table covers those rows.

Orientation convention for the prolongation part: a basis element ``E`` of
degree ``<= 0`` acts on the algebra as a derivation-type map ``E(.)`` and
the bracket is stored as

    [X_i, E] = E(X_i)      for i = 1..n,

i.e. the (positive, nonpositive) entries of the table are the action of
the map itself.  All derived data (generalized structure constants,
extremal polynomials, structure-formula checks) use this one orientation
consistently.

A table entry is canonically keyed by ``(i, j)`` with ``i > j``, but the
constructor accepts arbitrary orientations so that hand-entered tables can
be checked by :func:`validate` before use.
"""

from fractions import Fraction
from math import factorial

from . import linalg


class StructureError(ValueError):
    """Malformed algebra data: unknown index, bad grading, non-spanning basis."""


def _clean(coeffs):
    return {k: c for k, c in coeffs.items() if c}


class GradedLieAlgebra:
    """Immutable container for degrees and the exact bracket table."""

    def __init__(self, degrees, table, rank=None):
        self.degrees = dict(degrees)
        pos = sorted(i for i in self.degrees if i >= 1)
        if not pos or pos != list(range(1, len(pos) + 1)):
            raise StructureError("positive indices must be exactly 1..n")
        self.n = len(pos)
        self.s = max(self.degrees[i] for i in pos)
        if rank is None:
            rank = sum(1 for i in pos if self.degrees[i] == 1)
        self.r = rank
        neg = sorted(i for i in self.degrees if i <= 0)
        if neg and neg != list(range(neg[0], 1)):
            raise StructureError("nonpositive indices must be contiguous up to 0")
        idx = sorted(self.degrees)
        for a, b in zip(idx, idx[1:]):
            if self.degrees[a] > self.degrees[b]:
                raise StructureError("basis order is not adapted to the grading")
        self.table = {}
        for (i, j), terms in table.items():
            if i not in self.degrees or j not in self.degrees:
                raise StructureError(f"bracket entry for unknown pair ({i}, {j})")
            terms = _clean({k: Fraction(c) for k, c in terms.items()})
            if terms:
                self.table[(i, j)] = terms
        self._strata = {}
        for i, d in self.degrees.items():
            self._strata.setdefault(d, []).append(i)
        for v in self._strata.values():
            v.sort()

    # -- index bookkeeping -------------------------------------------------

    def indices(self):
        return sorted(self.degrees)

    def base_indices(self):
        return range(1, self.n + 1)

    def degree(self, i):
        try:
            return self.degrees[i]
        except KeyError:
            raise StructureError(f"unknown basis index {i}") from None

    def stratum(self, d):
        return list(self._strata.get(d, ()))

    def lowest_degree(self):
        return min(self.degrees.values())

    # -- brackets ----------------------------------------------------------

    def bracket_indices(self, i, j):
        """Coefficients of ``[X_i, X_j]`` as a sparse map ``k -> c``."""
        if i == j:
            return {}
        if (i, j) in self.table:
            return self.table[(i, j)]
        if (j, i) in self.table:
            return {k: -c for k, c in self.table[(j, i)].items()}
        if i not in self.degrees or j not in self.degrees:
            raise StructureError(f"unknown basis index in pair ({i}, {j})")
        return {}

    def bracket(self, u, w):
        """Bilinear extension of the bracket to coefficient maps."""
        out = {}
        for i, ci in u.items():
            if not ci:
                continue
            for j, cj in w.items():
                if not cj:
                    continue
                terms = self.bracket_indices(i, j)
                if not terms:
                    continue
                prod = ci * cj
                for k, c in terms.items():
                    cur = out.get(k)
                    val = prod * c if cur is None else cur + prod * c
                    out[k] = val
        return _clean(out)

    def iterated_commutator(self, i, alpha):
        """``[X_i, X_alpha]`` with the generators applied in ascending order.

        ``alpha`` is a dense tuple of length n; ``alpha = 0`` returns
        ``X_i`` itself.
        """
        if len(alpha) != self.n:
            raise StructureError("multi-index length must equal the dimension")
        value = {i: Fraction(1)}
        self.degree(i)
        for m, mult in enumerate(alpha, start=1):
            for _ in range(mult):
                if not value:
                    return {}
                value = self.bracket(value, {m: Fraction(1)})
        return value

    def generalized_structure_constants(self, i):
        """All nonzero ``c_i,alpha^k`` as a map ``(alpha, k) -> Fraction``.

        Multi-indices are enumerated breadth-first in ascending generator
        order, pruned by the grading bound ``d(i) + d(alpha) <= s``.
        """
        di = self.degree(i)
        out = {}
        zero = (0,) * self.n
        frontier = [(zero, 0, {i: Fraction(1)})]
        while frontier:
            nxt = []
            for alpha, last, value in frontier:
                for k, c in value.items():
                    out[(alpha, k)] = c
                for m in range(max(last, 1), self.n + 1):
                    dm = self.degrees[m]
                    if di + self._alpha_weight(alpha) + dm > self.s:
                        continue
                    new_val = self.bracket(value, {m: Fraction(1)})
                    if not new_val:
                        continue
                    new_alpha = alpha[:m - 1] + (alpha[m - 1] + 1,) + alpha[m:]
                    nxt.append((new_alpha, m, new_val))
            frontier = nxt
        return out

    def _alpha_weight(self, alpha):
        return sum(a * self.degrees[m] for m, a in enumerate(alpha, start=1) if a)

    def multi_index_weight(self, alpha):
        return self._alpha_weight(alpha)

    # -- validation ---------------------------------------------------------

    def validate(self):
        return validate(self)


def multi_index_order(alpha):
    return sum(alpha)


def multi_index_factorial(alpha):
    out = 1
    for a in alpha:
        out *= factorial(a)
    return out


def validate(algebra):
    """Exhaustive structural check; returns a list of violation strings.

    Checks antisymmetry of the stored table (including redundantly stored
    orientations), the grading filter on every entry, the Jacobi identity
    on every basis triple, and generativity of the stratification
    ``g_m = [g_{m-1}, g_1]`` for ``m = 2..s``.
    """
    report = []
    A = algebra
    for (i, j), terms in A.table.items():
        if i == j and terms:
            report.append(f"nonzero bracket [X_{i}, X_{i}]")
        mirror = A.table.get((j, i))
        if mirror is not None and i != j:
            total = dict(terms)
            for k, c in mirror.items():
                total[k] = total.get(k, Fraction(0)) + c
            if _clean(total):
                report.append(f"antisymmetry violated on pair ({i}, {j})")
        want = A.degrees[i] + A.degrees[j]
        for k, c in terms.items():
            if k not in A.degrees:
                report.append(f"bracket [X_{i}, X_{j}] hits unknown index {k}")
            elif c and A.degrees[k] != want:
                report.append(
                    f"grading violated: c_({i},{j})^{k} nonzero with "
                    f"d={A.degrees[k]} != {want}")
    idx = A.indices()
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            for c in range(b + 1, len(idx)):
                i, j, k = idx[a], idx[b], idx[c]
                acc = {}
                for u, v, w in ((i, j, k), (j, k, i), (k, i, j)):
                    term = A.bracket(A.bracket_indices(u, v), {w: Fraction(1)})
                    for m, cc in term.items():
                        acc[m] = acc.get(m, Fraction(0)) + cc
                if _clean(acc):
                    report.append(f"Jacobi violated on triple ({i}, {j}, {k})")
    for m in range(2, A.s + 1):
        target = A.stratum(m)
        if not target:
            report.append(f"stratum {m} is empty below the step")
            continue
        pos = {k: t for t, k in enumerate(target)}
        rows = []
        for p in A.stratum(m - 1):
            for q in A.stratum(1):
                terms = A.bracket_indices(p, q)
                if terms:
                    row = [Fraction(0)] * len(target)
                    for k, c in terms.items():
                        # components outside the stratum are grading
                        # violations reported above
                        if k in pos:
                            row[pos[k]] = c
                    rows.append(row)
        if linalg.rank(rows, len(target)) < len(target):
            report.append(
                f"stratum {m} not spanned by brackets [g_{m-1}, g_1]")
    return report

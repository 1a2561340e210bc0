from fractions import Fraction

import pytest
import sympy

from carnotpoly.algebra import GradedLieAlgebra, StructureError
from carnotpoly.prolongation import (ProlongedAlgebra, compute_stratum,
                                     extend_structure_constants, prolong)

from conftest import ELEMENTARY_G0


def brute_force_stratum_dim(P, k):
    """Independent oracle: solve the derivation identity on the full
    unknown set (every block entry) with sympy's nullspace."""
    if isinstance(P, GradedLieAlgebra):
        P = ProlongedAlgebra(base=P, algebra=P, strata=[], complete=False)
    A = P.algebra
    base = P.base
    unknowns = []
    for m in range(1, base.n + 1):
        for t in A.stratum(base.degrees[m] + k):
            unknowns.append((m, t))
    upos = {ut: i for i, ut in enumerate(unknowns)}
    if not unknowns:
        return 0
    rows = []
    for a in range(1, base.n + 1):
        for b in range(a + 1, base.n + 1):
            res_deg = base.degrees[a] + base.degrees[b] + k
            acc = {}

            def add(res, uslot, c):
                acc.setdefault(res, {})
                acc[res][uslot] = acc[res].get(uslot, Fraction(0)) + c

            for cidx, w in base.bracket_indices(a, b).items():
                for t in A.stratum(base.degrees[cidx] + k):
                    add(t, upos[(cidx, t)], w)
            for t in A.stratum(base.degrees[a] + k):
                for res, c in A.bracket_indices(t, b).items():
                    add(res, upos[(a, t)], -c)
            for t in A.stratum(base.degrees[b] + k):
                for res, c in A.bracket_indices(t, a).items():
                    add(res, upos[(b, t)], c)
            for slot in acc.values():
                row = [0] * len(unknowns)
                for u, c in slot.items():
                    row[u] = sympy.Rational(c.numerator, c.denominator)
                rows.append(row)
    if not rows:
        return len(unknowns)
    return len(sympy.Matrix(rows).nullspace())


def test_free24_g0_dimension(free24):
    st = compute_stratum(free24, 0)
    assert st.dim == 4
    assert brute_force_stratum_dim(free24, 0) == 4


def test_free24_prolongation_terminates(free24):
    P = prolong(free24, 3)
    assert P.stratum_dims == [4, 0]
    assert P.complete
    assert P.validate() == []


def test_heisenberg_g0_dimension(heisenberg):
    st = compute_stratum(heisenberg, 0)
    assert st.dim == 4
    assert brute_force_stratum_dim(heisenberg, 0) == 4


def test_heisenberg_prolongation_is_contact_like(heisenberg):
    # strata grow like the weighted monomial count (contact Hamiltonians
    # of weight kappa + 2), so the construction never terminates
    P = prolong(heisenberg, 3)
    assert P.stratum_dims == [4, 6, 9, 12]
    assert not P.complete
    for depth, dim in zip((0, -1), (4, 6)):
        Q = prolong(heisenberg, -depth)
        assert brute_force_stratum_dim(
            ProlongedAlgebra(base=heisenberg, algebra=Q.algebra,
                             strata=Q.strata, complete=False),
            depth - 1) == P.stratum_dims[-depth + 1]


def test_free34_g0_and_termination(free34):
    st = compute_stratum(free34, 0)
    assert st.dim == 9
    P = prolong(free34, 2)
    assert P.stratum_dims == [9, 0]
    assert P.complete


def test_free23_prolongs_to_fourteen_dimensions(free23):
    # the exceptional rank-2 step-3 case: the prolongation does not stop
    # at g_0 but closes up at total dimension 14 with mirror-symmetric
    # strata, confirmed against the full-unknown solver stratum by stratum
    P = prolong(free23, 5)
    assert P.stratum_dims == [4, 2, 1, 2, 0]
    assert P.complete
    assert P.validate() == []
    assert len(P.algebra.indices()) == 14
    for k, expected in ((0, 4), (-1, 2), (-2, 1), (-3, 2), (-4, 0)):
        Q = prolong(free23, -k - 1) if k < 0 else free23
        assert brute_force_stratum_dim(Q, k) == expected


def test_stratum_insensitive_to_pair_order(free34):
    # second opinion with the full-unknown solver
    assert brute_force_stratum_dim(free34, 0) == 9


def test_abelian_rank2(free24):
    AB = GradedLieAlgebra({1: 1, 2: 1}, {})
    st = compute_stratum(AB, 0)
    assert st.dim == 4
    P = prolong(AB, 2)
    assert P.stratum_dims == [4, 6, 8]
    assert not P.complete
    assert len(P.deferred) > 0
    assert brute_force_stratum_dim(prolong(AB, 0), -1) == 6


def test_elementary_basis_structure_constants(free24_prolonged):
    ext = free24_prolonged.algebra
    # the delta table of the elementary maps, read as [X_i, E_j] = E_j(X_i)
    assert ext.bracket_indices(2, -3) == {1: 1}
    assert ext.bracket_indices(1, -1) == {1: 1}
    assert ext.bracket_indices(2, -2) == {2: 1}
    assert ext.bracket_indices(1, 0) == {2: 1}
    for pair in ((1, -3), (1, -2), (2, -1), (2, 0)):
        assert ext.bracket_indices(*pair) == {}


def test_elementary_basis_action_on_higher_strata(free24_prolonged):
    ext = free24_prolonged.algebra
    # E_{-3} maps (X_1, X_2) to (0, X_1); as a derivation it sends
    # X_5 = [X_3, X_2] to [X_3, X_1] = X_4 and X_8 to 2 X_7
    assert ext.bracket_indices(5, -3) == {4: 1}
    assert ext.bracket_indices(8, -3) == {7: 2}


def test_bracket_of_two_g0_elements(free24_prolonged):
    ext = free24_prolonged.algebra
    # [E_0, E_-3] acts as the reversed matrix commutator of e_21, e_12
    assert ext.bracket_indices(0, -3) == {-1: 1, -2: -1}
    # Jacobi with the generators: [[A,B],X] = [[X,B],A] - [[X,A],B]
    for m in (1, 2):
        lhs = ext.bracket(ext.bracket_indices(0, -3), {m: Fraction(1)})
        rhs = ext.bracket(ext.bracket_indices(m, -3), {0: Fraction(1)})
        rhs2 = ext.bracket(ext.bracket_indices(m, 0), {-3: Fraction(1)})
        total = dict(lhs)
        for k, c in rhs.items():
            total[k] = total.get(k, Fraction(0)) - c
        for k, c in rhs2.items():
            total[k] = total.get(k, Fraction(0)) + c
        assert not {k: c for k, c in total.items() if c}


def test_extended_algebra_validates_with_mixed_triples(free24_prolonged):
    assert free24_prolonged.validate() == []


def test_canonical_and_elementary_bases_span_the_same_space(free24):
    canon = prolong(free24, 3)
    elem = prolong(free24, 3, basis_overrides={0: ELEMENTARY_G0})
    assert canon.stratum_dims == elem.stratum_dims
    assert elem.validate() == []


def test_non_spanning_override_rejected(free24):
    st = compute_stratum(free24, 0)
    bad = [[[0, 1], [0, 0]]] * 4
    with pytest.raises(StructureError):
        extend_structure_constants(free24, st, chosen_basis=bad)


def test_zero_stratum_leaves_table_unchanged(free24):
    P = prolong(free24, 3)
    before = dict(P.algebra.table)
    st = compute_stratum(P, P.strata[-1].degree - 1) \
        if P.strata[-1].dim else P.strata[-1]
    assert st.dim == 0
    Q = extend_structure_constants(P, st)
    assert Q.algebra.table == before


def test_determined_by_g1_restriction(free24, heisenberg):
    # rebuild every derivation map from its g_1 block alone through the
    # generativity decompositions; it must reproduce the stored blocks
    from carnotpoly.prolongation import bracket_decompositions
    for A, depth in ((free24, 3), (heisenberg, 2)):
        P = prolong(A, depth)
        decomp = bracket_decompositions(A)
        ext = P.algebra
        for st in P.strata:
            for phi, e in zip(st.maps, st.ids):
                for d in range(2, A.s + 1):
                    for m in A.stratum(d):
                        acc = {}
                        for w, p, q in decomp[m]:
                            # phi([p,q]) = [phi(p), q] + [p, phi(q)]
                            for t, c in phi.get(p, {}).items():
                                for res, c2 in ext.bracket_indices(t, q).items():
                                    acc[res] = acc.get(res, Fraction(0)) \
                                        + w * c * c2
                            for t, c in phi.get(q, {}).items():
                                for res, c2 in ext.bracket_indices(t, p).items():
                                    acc[res] = acc.get(res, Fraction(0)) \
                                        - w * c * c2
                        acc = {k: c for k, c in acc.items() if c}
                        assert acc == phi.get(m, {})


def test_compute_stratum_requires_previous(free24):
    with pytest.raises(StructureError):
        compute_stratum(free24, -1)

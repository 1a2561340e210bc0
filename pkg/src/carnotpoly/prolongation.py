"""Graded prolongation of a stratified algebra by nonpositive strata.

Stratum k <= 0 consists of the degree-k derivation-type maps phi sending
g_i into the stored stratum of degree i + k and satisfying

    phi([X, Y]) = [phi(X), Y] + [X, phi(Y)]        for all X, Y in g,

with the brackets on the right evaluated in the extension built so far.
Such a map is determined by its restriction to g_1 (push the identity
through g_m = [g_{m-1}, g_1]), so the solver parameterizes phi by the g_1
block alone, expresses every other block as exact linear forms in those
unknowns, and takes the rational null space of the full pair-constraint
system.  The canonical stratum basis is the null-space basis in primitive
integer form; an explicit basis of the caller's choosing can be
substituted as long as it spans the same space.

New basis elements receive consecutive indices below the lowest stored
index, so the first computed stratum of dimension D occupies -D+1 .. 0.
Brackets of two nonpositive elements are recovered from the Jacobi
identity  [X, [E, F]] = [[X, E], F] - [[X, F], E]  and re-expressed in the
stored stratum bases.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg
from .algebra import GradedLieAlgebra, StructureError


@dataclass
class ProlongationStratum:
    degree: int
    maps: list          # per basis element: {m (1..n) -> {target id -> Fraction}}
    g1_blocks: list     # per basis element: {q (1..r) -> {target id -> Fraction}}
    ids: list = field(default_factory=list)  # assigned when adjoined

    @property
    def dim(self):
        return len(self.maps)


@dataclass
class ProlongedAlgebra:
    base: GradedLieAlgebra
    algebra: GradedLieAlgebra
    strata: list = field(default_factory=list)
    complete: bool = False
    deferred: list = field(default_factory=list)  # nonpositive pairs whose
    # bracket lands below the deepest computed stratum (truncated runs only)

    @property
    def stratum_dims(self):
        return [st.dim for st in self.strata]

    def validate(self):
        report = self.algebra.validate()
        if self.deferred:
            report = report + [
                f"bracket table incomplete on nonpositive pair {p}"
                for p in self.deferred]
        return report


def _trivial(base):
    return ProlongedAlgebra(base=base, algebra=base, strata=[], complete=False)


def bracket_decompositions(algebra):
    """For each index m with d(m) >= 2, a combination X_m = sum w [X_p, X_q].

    Pairs run over (stratum d(m)-1) x (stratum 1); existence is the
    generativity of the stratification.  Cached on the algebra.
    """
    cached = getattr(algebra, "_gen_decomp", None)
    if cached is not None:
        return cached
    out = {}
    for d in range(2, algebra.s + 1):
        target = algebra.stratum(d)
        if not target:
            continue
        pos = {k: t for t, k in enumerate(target)}
        pairs = [(p, q) for p in algebra.stratum(d - 1)
                 for q in algebra.stratum(1)]
        cols = []
        for p, q in pairs:
            col = [Fraction(0)] * len(target)
            for k, c in algebra.bracket_indices(p, q).items():
                col[pos[k]] = c
            cols.append(col)
        rows = [[cols[j][i] for j in range(len(pairs))]
                for i in range(len(target))]
        for m in target:
            rhs = [Fraction(1) if k == m else Fraction(0) for k in target]
            sol = linalg.solve(rows, rhs, len(pairs))
            if sol is None:
                raise StructureError(
                    f"stratum {d} not generated by [g_{d-1}, g_1]")
            out[m] = [(w, p, q) for w, (p, q) in zip(sol, pairs) if w]
    algebra._gen_decomp = out
    return out


def _phi_expressions(P, k, unknown_pos, g1_targets):
    """Blocks of phi as linear forms {unknown -> Fraction} in the g_1 unknowns."""
    A = P.algebra
    base = P.base
    decomp = bracket_decompositions(base)
    expr = {}
    for q in base.stratum(1):
        expr[q] = {t: {unknown_pos[(q, t)]: Fraction(1)} for t in g1_targets}
    for d in range(2, base.s + 1):
        for m in base.stratum(d):
            acc = {}
            for w, p, q in decomp[m]:
                # w * ([phi(X_p), X_q] + [X_p, phi(X_q)])
                for t, form in expr[p].items():
                    for res, c in A.bracket_indices(t, q).items():
                        _form_add(acc, res, form, w * c)
                for t, form in expr[q].items():
                    for res, c in A.bracket_indices(t, p).items():
                        _form_add(acc, res, form, -w * c)
            expr[m] = {res: f for res, f in acc.items() if f}
    return expr


def _form_add(acc, res, form, scale):
    if not scale:
        return
    slot = acc.setdefault(res, {})
    for u, c in form.items():
        v = slot.get(u, Fraction(0)) + c * scale
        if v:
            slot[u] = v
        else:
            slot.pop(u, None)


def compute_stratum(P, k):
    """Canonical basis of the degree-k stratum of the prolongation of P.

    Requires every stratum of degree in (k, 0] to be present already.
    """
    if isinstance(P, GradedLieAlgebra):
        P = _trivial(P)
    have = [st.degree for st in P.strata]
    if k > 0 or sorted(have, reverse=True) != list(range(0, k, -1)):
        raise StructureError(
            f"stratum {k} needs all strata above it computed first")
    A = P.algebra
    base = P.base
    g1_targets = A.stratum(1 + k)
    if not g1_targets:
        return ProlongationStratum(k, [], [])
    unknowns = [(q, t) for q in base.stratum(1) for t in g1_targets]
    unknown_pos = {ut: i for i, ut in enumerate(unknowns)}
    expr = _phi_expressions(P, k, unknown_pos, g1_targets)

    rows = {}
    idx = base.indices()
    pos_idx = [i for i in idx if i >= 1]
    for ai in range(len(pos_idx)):
        for bi in range(ai + 1, len(pos_idx)):
            a, b = pos_idx[ai], pos_idx[bi]
            res_deg = base.degrees[a] + base.degrees[b] + k
            if res_deg > base.s:
                continue
            acc = {}
            for c, w in base.bracket_indices(a, b).items():
                for res, form in expr[c].items():
                    _form_add(acc, res, form, w)
            # minus ([phi(X_a), X_b] + [X_a, phi(X_b)])
            for t, form in expr[a].items():
                for res, c in A.bracket_indices(t, b).items():
                    _form_add(acc, res, form, -c)
            for t, form in expr[b].items():
                for res, c in A.bracket_indices(t, a).items():
                    _form_add(acc, res, form, c)
            for slot in acc.values():
                if slot:
                    row = [Fraction(0)] * len(unknowns)
                    for u, c in slot.items():
                        row[u] = c
                    rows[tuple(row)] = None
    basis = linalg.nullspace([list(r) for r in rows], len(unknowns))

    maps = []
    blocks = []
    for vec in basis:
        phi = {}
        for q in base.stratum(1):
            img = {t: vec[unknown_pos[(q, t)]] for t in g1_targets
                   if vec[unknown_pos[(q, t)]]}
            if img:
                phi[q] = img
        for d in range(2, base.s + 1):
            for m in base.stratum(d):
                img = {}
                for res, form in expr[m].items():
                    v = sum((c * vec[u] for u, c in form.items()),
                            Fraction(0))
                    if v:
                        img[res] = v
                if img:
                    phi[m] = img
        maps.append(phi)
        blocks.append({q: dict(phi.get(q, {})) for q in base.stratum(1)})
    return ProlongationStratum(k, maps, blocks)


class _TableView:
    """Live bracket view over mutable degree/table dicts during extension."""

    def __init__(self, n, degrees, table):
        self.n = n
        self.degrees = degrees
        self.table = table

    def base_indices(self):
        return range(1, self.n + 1)

    def bracket_indices(self, i, j):
        if i == j:
            return {}
        hit = self.table.get((i, j))
        if hit is not None:
            return hit
        hit = self.table.get((j, i))
        if hit is not None:
            return {k: -c for k, c in hit.items()}
        return {}

    def bracket(self, u, w):
        out = {}
        for i, ci in u.items():
            for j, cj in w.items():
                terms = self.bracket_indices(i, j)
                if not terms:
                    continue
                prod = ci * cj
                for k, c in terms.items():
                    v = out.get(k, Fraction(0)) + prod * c
                    if v:
                        out[k] = v
                    else:
                        out.pop(k, None)
        return out


def _pair_action(A, e1, e2):
    """Action m -> [X_m, [E_1, E_2]] via Jacobi, for nonpositive e1, e2."""
    act = {}
    for m in A.base_indices():
        first = A.bracket(A.bracket_indices(m, e1), {e2: Fraction(1)})
        second = A.bracket(A.bracket_indices(m, e2), {e1: Fraction(1)})
        val = dict(first)
        for kk, c in second.items():
            v = val.get(kk, Fraction(0)) - c
            if v:
                val[kk] = v
            else:
                val.pop(kk, None)
        if val:
            act[m] = val
    return act


def _close_pairs(base, degrees, table, strata_by_deg, pending, terminated):
    """Decide deferred nonpositive pairs whose result stratum is available.

    Pairs are processed by descending result degree so that the inner
    brackets a Jacobi expansion needs are always decided first.  Returns
    the pairs that still cannot be placed (possible only on a truncated
    prolongation).
    """
    lowest_computed = min(strata_by_deg)
    still = []
    ext = _TableView(base.n, degrees, table)
    for e1, e2 in sorted(pending, key=lambda p: degrees[p[0]] + degrees[p[1]],
                         reverse=True):
        res_deg = degrees[e1] + degrees[e2]
        if res_deg < lowest_computed and not terminated:
            still.append((e1, e2))
            continue
        act = _pair_action(ext, e1, e2)
        if res_deg < lowest_computed:
            if act:
                raise StructureError(
                    "bracket escapes a terminated prolongation")
            continue
        coords = _match_in_stratum(strata_by_deg, res_deg, act,
                                   f"[E_{e1}, E_{e2}]")
        if coords:
            table[(e1, e2)] = coords
    return still


def _match_in_stratum(strata_by_deg, deg, act, context):
    """Coordinates of an action map in the basis of the given stratum."""
    st = strata_by_deg.get(deg)
    if st is None or st.dim == 0:
        if act:
            raise StructureError(
                f"{context}: nonzero bracket lands in an empty stratum {deg}")
        return {}
    coords = sorted({(m, t) for phi in st.maps
                     for m, img in phi.items() for t in img}
                    | {(m, t) for m, img in act.items() for t in img})
    cpos = {c: i for i, c in enumerate(coords)}
    vectors = []
    for phi in st.maps:
        v = [Fraction(0)] * len(coords)
        for m, img in phi.items():
            for t, c in img.items():
                v[cpos[(m, t)]] = c
        vectors.append(v)
    target = [Fraction(0)] * len(coords)
    for m, img in act.items():
        for t, c in img.items():
            target[cpos[(m, t)]] = c
    sol = linalg.solve_in_span(vectors, target)
    if sol is None:
        raise StructureError(f"{context}: bracket outside the computed stratum")
    return {st_id: c for st_id, c in zip(st.ids, sol) if c}


def extend_structure_constants(P, stratum, chosen_basis=None):
    """Adjoin a computed stratum to the bracket table.

    ``chosen_basis`` optionally replaces the canonical basis by explicit
    g_1 blocks (a list, ascending index order, of maps ``q -> {target ->
    coefficient}`` or dense matrices); it must span the same space.
    """
    if isinstance(P, GradedLieAlgebra):
        P = _trivial(P)
    k = stratum.degree
    terminated = stratum.dim == 0 or any(st.dim == 0 for st in P.strata)
    if stratum.dim == 0:
        pending = list(P.deferred)
        degrees = dict(P.algebra.degrees)
        table = dict(P.algebra.table)
        strata_by_deg = {st.degree: st for st in P.strata}
        strata_by_deg[k] = stratum
        left = _close_pairs(P.base, degrees, table, strata_by_deg, pending,
                            terminated) if pending else []
        closed = GradedLieAlgebra(degrees, table, rank=P.base.r)
        return ProlongedAlgebra(P.base, closed, P.strata + [stratum],
                                P.complete, left)
    if chosen_basis is not None:
        stratum = _rebase_stratum(P, stratum, chosen_basis)
    D = stratum.dim
    lowest = min(P.algebra.degrees)
    new_ids = list(range(lowest - D, lowest))
    stratum.ids = new_ids

    degrees = dict(P.algebra.degrees)
    for e in new_ids:
        degrees[e] = k
    table = dict(P.algebra.table)
    for e, phi in zip(new_ids, stratum.maps):
        for m, img in phi.items():
            table[(m, e)] = dict(img)

    strata_by_deg = {st.degree: st for st in P.strata}
    strata_by_deg[k] = stratum

    pending = list(P.deferred)
    for st in P.strata:
        for eo in st.ids:
            for en in new_ids:
                pending.append((eo, en))
    for i in range(len(new_ids)):
        for j in range(i):
            pending.append((new_ids[i], new_ids[j]))
    left = _close_pairs(P.base, degrees, table, strata_by_deg, pending,
                        terminated)

    new_algebra = GradedLieAlgebra(degrees, table, rank=P.base.r)
    return ProlongedAlgebra(P.base, new_algebra, P.strata + [stratum],
                            P.complete, left)


def _rebase_stratum(P, stratum, chosen_basis):
    base = P.base
    g1 = base.stratum(1)
    canon_vecs = []
    coords = sorted({(q, t) for blk in stratum.g1_blocks
                     for q, img in blk.items() for t in img})
    chosen_blocks = []
    for entry in chosen_basis:
        if isinstance(entry, dict):
            blk = {q: {t: Fraction(c) for t, c in img.items() if Fraction(c)}
                   for q, img in entry.items()}
        else:
            # dense matrix: rows indexed by target order, columns by g_1 order
            targets = sorted({t for blk2 in stratum.g1_blocks
                              for img in blk2.values() for t in img})
            if not targets:
                targets = P.algebra.stratum(1 + stratum.degree)
            blk = {}
            for ci, q in enumerate(g1):
                img = {}
                for ri, t in enumerate(targets):
                    c = Fraction(entry[ri][ci])
                    if c:
                        img[t] = c
                blk[q] = img
        chosen_blocks.append(blk)
        for q, img in blk.items():
            for t in img:
                if (q, t) not in coords:
                    coords.append((q, t))
    coords = sorted(coords)
    cpos = {c: i for i, c in enumerate(coords)}
    for blk in stratum.g1_blocks:
        v = [Fraction(0)] * len(coords)
        for q, img in blk.items():
            for t, c in img.items():
                v[cpos[(q, t)]] = c
        canon_vecs.append(v)
    trans = []
    for blk in chosen_blocks:
        v = [Fraction(0)] * len(coords)
        for q, img in blk.items():
            for t, c in img.items():
                v[cpos[(q, t)]] = c
        sol = linalg.solve_in_span(canon_vecs, v)
        if sol is None:
            raise StructureError("chosen basis leaves the computed stratum")
        trans.append(sol)
    if len(trans) != stratum.dim or linalg.rank(trans, stratum.dim) != stratum.dim:
        raise StructureError("chosen basis does not span the stratum")
    maps = []
    for sol in trans:
        phi = {}
        for c, old in zip(sol, stratum.maps):
            if not c:
                continue
            for m, img in old.items():
                slot = phi.setdefault(m, {})
                for t, cc in img.items():
                    v = slot.get(t, Fraction(0)) + c * cc
                    if v:
                        slot[t] = v
                    else:
                        slot.pop(t, None)
        maps.append({m: img for m, img in phi.items() if img})
    return ProlongationStratum(stratum.degree, maps, chosen_blocks)


def prolong(A, max_depth=8, basis_overrides=None):
    """Iterate stratum computation until a zero stratum or the cutoff.

    ``basis_overrides`` maps a stratum degree to an explicit basis for
    :func:`extend_structure_constants`.  The result is flagged complete
    only if a zero stratum was reached; otherwise the prolongation may
    continue below the cutoff.
    """
    P = _trivial(A) if isinstance(A, GradedLieAlgebra) else A
    for k in range(0, -max_depth - 1, -1):
        st = compute_stratum(P, k)
        override = (basis_overrides or {}).get(k)
        P = extend_structure_constants(P, st, chosen_basis=override)
        if st.dim == 0:
            P.complete = True
            break
    return P

"""Sparse multivariate polynomials with exact rational coefficients.

Terms are keyed by packed exponent tuples ``((var, exp), ...)`` with
1-based variable numbers sorted ascending; zero coefficients are never
stored.  A polynomial may carry the weight vector ``d(1)..d(n)`` of the
ambient graded algebra, which defines the weighted homogeneous degree and
the canonical term order (weighted degree, then lexicographic exponent)
used by :func:`canonical_text`.

Coefficients are :class:`fractions.Fraction` in all exact workflows, but
the arithmetic is generic: evaluation and scaling accept floats, and the
group-model module multiplies polynomials by its own jet scalars.
"""

from fractions import Fraction

_ZERO = Fraction(0)


def _key_mul(a, b):
    if not a:
        return b
    if not b:
        return a
    out = dict(a)
    for v, e in b:
        out[v] = out.get(v, 0) + e
    return tuple(sorted(out.items()))


def key_from_alpha(alpha):
    """Packed key from a dense exponent tuple (position p = variable p+1)."""
    return tuple((p + 1, e) for p, e in enumerate(alpha) if e)


def alpha_from_key(key, n):
    alpha = [0] * n
    for v, e in key:
        alpha[v - 1] = e
    return tuple(alpha)


class Poly:
    __slots__ = ("n", "terms", "weights")

    def __init__(self, n, terms=None, weights=None):
        self.n = n
        self.terms = {k: c for k, c in (terms or {}).items() if c}
        self.weights = weights

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, n, weights=None):
        return cls(n, {}, weights)

    @classmethod
    def const(cls, n, c, weights=None):
        return cls(n, {(): Fraction(c)}, weights)

    @classmethod
    def variable(cls, n, j, weights=None):
        if not 1 <= j <= n:
            raise ValueError(f"variable x{j} out of range 1..{n}")
        return cls(n, {((j, 1),): Fraction(1)}, weights)

    @classmethod
    def monomial(cls, n, alpha, c, weights=None):
        return cls(n, {key_from_alpha(alpha): Fraction(c)}, weights)

    # -- ring structure ------------------------------------------------------

    def _merge_weights(self, other):
        if self.weights is not None:
            return self.weights
        return other.weights

    def __add__(self, other):
        if not isinstance(other, Poly):
            if isinstance(other, (int, Fraction)):
                other = Poly.const(self.n, other, self.weights)
            else:
                return NotImplemented
        if other.n != self.n:
            raise ValueError("ambient dimensions differ")
        out = dict(self.terms)
        for k, c in other.terms.items():
            cur = out.get(k, _ZERO) + c
            if cur:
                out[k] = cur
            else:
                out.pop(k, None)
        return Poly(self.n, out, self._merge_weights(other))

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.n, {k: -c for k, c in self.terms.items()}, self.weights)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Poly):
            if other.n != self.n:
                raise ValueError("ambient dimensions differ")
            if not self.terms or not other.terms:
                return Poly(self.n, {}, self._merge_weights(other))
            out = {}
            for ka, ca in self.terms.items():
                for kb, cb in other.terms.items():
                    k = _key_mul(ka, kb)
                    cur = out.get(k, _ZERO) + ca * cb
                    if cur:
                        out[k] = cur
                    else:
                        out.pop(k, None)
            return Poly(self.n, out, self._merge_weights(other))
        if isinstance(other, (int, Fraction)):
            if not other:
                return Poly(self.n, {}, self.weights)
            return Poly(self.n, {k: c * other for k, c in self.terms.items()},
                        self.weights)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __pow__(self, e):
        if not isinstance(e, int) or e < 0:
            raise ValueError("only nonnegative integer powers")
        out = Poly.const(self.n, 1, self.weights)
        for _ in range(e):
            out = out * self
        return out

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(self.n, other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def __repr__(self):
        return f"Poly({canonical_text(self)})"

    # -- calculus ------------------------------------------------------------

    def diff(self, j):
        out = {}
        for k, c in self.terms.items():
            for pos, (v, e) in enumerate(k):
                if v == j:
                    nk = k[:pos] + ((v, e - 1),) + k[pos + 1:] if e > 1 \
                        else k[:pos] + k[pos + 1:]
                    out[nk] = out.get(nk, _ZERO) + c * e
                    break
        return Poly(self.n, out, self.weights)

    def integrate(self, j):
        """Antiderivative in x_j vanishing at x_j = 0."""
        out = {}
        for k, c in self.terms.items():
            done = False
            for pos, (v, e) in enumerate(k):
                if v == j:
                    nk = k[:pos] + ((v, e + 1),) + k[pos + 1:]
                    out[nk] = c / (e + 1)
                    done = True
                    break
                if v > j:
                    nk = k[:pos] + ((j, 1),) + k[pos:]
                    out[nk] = c
                    done = True
                    break
            if not done:
                out[k + ((j, 1),)] = c
        return Poly(self.n, out, self.weights)

    def subs_zero(self, vars_to_zero):
        vz = set(vars_to_zero)
        out = {}
        for k, c in self.terms.items():
            if any(v in vz for v, _ in k):
                continue
            out[k] = out.get(k, _ZERO) + c
        return Poly(self.n, out, self.weights)

    def evaluate(self, point):
        """Value at a point given as a sequence of n coordinates."""
        if len(point) != self.n:
            raise ValueError("coordinate count must equal the dimension")
        total = None
        for k, c in self.terms.items():
            term = c
            for v, e in k:
                x = point[v - 1]
                for _ in range(e):
                    term = term * x
            total = term if total is None else total + term
        if total is None:
            return _ZERO if not point or isinstance(point[0], (int, Fraction)) else 0.0
        return total

    def coefficient(self, alpha):
        return self.terms.get(key_from_alpha(alpha), _ZERO)

    def var_support(self):
        out = set()
        for k in self.terms:
            for v, _ in k:
                out.add(v)
        return out


# -- weighted degree --------------------------------------------------------

def _key_weight(key, weights):
    return sum(e * weights[v - 1] for v, e in key)


def weighted_degree(p, weights=None):
    """Max weighted degree over nonzero terms; -inf for the zero polynomial."""
    w = weights if weights is not None else p.weights
    if w is None:
        w = (1,) * p.n
    if not p.terms:
        return float("-inf")
    return max(_key_weight(k, w) for k in p.terms)


def is_homogeneous(p, weights=None):
    w = weights if weights is not None else p.weights
    if w is None:
        w = (1,) * p.n
    degs = {_key_weight(k, w) for k in p.terms}
    return len(degs) <= 1


def canonical_text(p, weights=None):
    """Byte-stable text form: terms by (weighted degree, lex exponents)."""
    w = weights if weights is not None else p.weights
    if w is None:
        w = (1,) * p.n
    if not p.terms:
        return "0"
    def sort_key(k):
        return (_key_weight(k, w), alpha_from_key(k, p.n))
    pieces = []
    for k in sorted(p.terms, key=sort_key):
        c = p.terms[k]
        mono = "*".join(f"x{v}" if e == 1 else f"x{v}^{e}" for v, e in k)
        if not mono:
            body = str(abs(c))
        elif abs(c) == 1:
            body = mono
        else:
            body = f"{abs(c)}*{mono}"
        if not pieces:
            pieces.append(body if c > 0 else "-" + body)
        else:
            pieces.append((" + " if c > 0 else " - ") + body)
    return "".join(pieces)


class PolyVectorField:
    """Vector field ``sum_l f_l d/dx_l`` with polynomial coefficients.

    ``coeffs`` maps coordinate index l to the :class:`Poly` f_l; absent
    entries are zero.
    """

    __slots__ = ("n", "coeffs")

    def __init__(self, n, coeffs):
        self.n = n
        self.coeffs = {l: p for l, p in coeffs.items() if p}

    def coefficient(self, l):
        return self.coeffs.get(l, Poly.zero(self.n))

    def apply(self, p):
        """Derivation action ``sum_l f_l dp/dx_l``."""
        if p.n != self.n:
            raise ValueError("ambient dimensions differ")
        support = p.var_support()
        out = Poly.zero(self.n, p.weights)
        for l, f in self.coeffs.items():
            if l in support:
                out = out + f * p.diff(l)
        return out

    def evaluate(self, point):
        return [self.coeffs[l].evaluate(point) if l in self.coeffs else 0
                for l in range(1, self.n + 1)]

    def compiled(self):
        """Fast float evaluator ``point -> list`` (0-based point sequence)."""
        items = []
        for l, f in sorted(self.coeffs.items()):
            terms = [(float(c), tuple((v - 1, e) for v, e in k))
                     for k, c in f.terms.items()]
            items.append((l - 1, terms))
        n = self.n

        def run(point):
            out = [0.0] * n
            for l0, terms in items:
                acc = 0.0
                for c, vs in terms:
                    t = c
                    for v0, e in vs:
                        x = point[v0]
                        for _ in range(e):
                            t *= x
                    acc += t
                out[l0] = acc
            return out

        return run


def apply_field(field, p):
    return field.apply(p)

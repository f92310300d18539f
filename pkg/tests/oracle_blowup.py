"""Independent model of the classical ring: Z/2-invariants of the blowup.

The Hilbert square of the quadric Q is the quotient of Bl_diag(Q x Q) by
the factor swap.  With Q-coefficients its cohomology is the invariant
subring, which this module builds from first principles:

  * A*(Q) has basis h0, h1, h2, h3 = h1 h2 with h1^2 = h2^2 = 0.
  * A*(Q x Q) = A*(Q) (x) A*(Q); the diagonal class is
    1 (x) h3 + h1 (x) h2 + h2 (x) h1 + h3 (x) 1.
  * Classes on the blowup are pairs (u, v): the pullback of u from Q x Q
    plus the pushforward to the exceptional divisor of v pulled back from
    the diagonal.  With N the diagonal's normal bundle (c1 = 2h1 + 2h2,
    c2 = 4h3) the product rule is

        (u, v) (u', v') = (u u' - delta_*(v v'),
                           i*(u) v' + i*(u') v + c1(N) v v')

    which encodes the self-intersection of the exceptional divisor.
  * The quotient map is 2:1, so integrals over the Hilbert square are half
    the integrals upstairs.

The divisor of non-reduced subschemes pulls back to twice the exceptional
divisor, which fixes the third divisor generator; the curve classes are
solved from their intersection numbers against the divisor basis.  No code
is shared with qhilb.chow: this is the oracle side of the dual derivation.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

# A*(Q): indices 0..3 for h0, h1, h2, h3.  h_a h_b lookup, None = zero.
_QMUL = {
    (0, 0): 0, (0, 1): 1, (0, 2): 2, (0, 3): 3,
    (1, 1): None, (1, 2): 3, (1, 3): None,
    (2, 2): None, (2, 3): None,
    (3, 3): None,
}


def _qmul(a, b):
    return _QMUL[(a, b) if a <= b else (b, a)]


def _qvec_mul(v, w):
    out = {}
    for a, ca in v.items():
        for b, cb in w.items():
            r = _qmul(a, b)
            if r is not None:
                out[r] = out.get(r, Fraction(0)) + ca * cb
    return {k: c for k, c in out.items() if c != 0}


def _uvec_mul(u, w):
    out = {}
    for (r1, s1), c1 in u.items():
        for (r2, s2), c2 in w.items():
            r = _qmul(r1, r2)
            s = _qmul(s1, s2)
            if r is not None and s is not None:
                key = (r, s)
                out[key] = out.get(key, Fraction(0)) + c1 * c2
    return {k: c for k, c in out.items() if c != 0}


def _restrict(u):
    """Pull a class on Q x Q back to the diagonal."""
    out = {}
    for (r, s), c in u.items():
        t = _qmul(r, s)
        if t is not None:
            out[t] = out.get(t, Fraction(0)) + c
    return {k: c for k, c in out.items() if c != 0}


_DIAGONAL = {(0, 3): Fraction(1), (1, 2): Fraction(1), (2, 1): Fraction(1), (3, 0): Fraction(1)}

# Pushforward from the diagonal: multiply the diagonal class by a lift.
_PUSH = {
    0: _DIAGONAL,
    1: {(1, 3): Fraction(1), (3, 1): Fraction(1)},
    2: {(2, 3): Fraction(1), (3, 2): Fraction(1)},
    3: {(3, 3): Fraction(1)},
}

_C1N = {1: Fraction(2), 2: Fraction(2)}  # first Chern class of the normal bundle


class BlowupClass:
    """(u, v) with u on Q x Q and v on the diagonal copy of Q."""

    def __init__(self, u=None, v=None):
        self.u = {k: Fraction(c) for k, c in (u or {}).items() if c != 0}
        self.v = {k: Fraction(c) for k, c in (v or {}).items() if c != 0}

    def __add__(self, other):
        u = dict(self.u)
        for k, c in other.u.items():
            u[k] = u.get(k, Fraction(0)) + c
        v = dict(self.v)
        for k, c in other.v.items():
            v[k] = v.get(k, Fraction(0)) + c
        return BlowupClass(u, v)

    def scale(self, x):
        x = Fraction(x)
        return BlowupClass(
            {k: c * x for k, c in self.u.items()},
            {k: c * x for k, c in self.v.items()},
        )

    def __sub__(self, other):
        return self + other.scale(-1)

    def __mul__(self, other):
        uu = _uvec_mul(self.u, other.u)
        vv = _qvec_mul(self.v, other.v)
        push = {}
        for t, c in vv.items():
            for key, w in _PUSH[t].items():
                push[key] = push.get(key, Fraction(0)) + c * w
        u = dict(uu)
        for k, c in push.items():
            u[k] = u.get(k, Fraction(0)) - c
        v = {}
        for t, c in _qvec_mul(_restrict(self.u), other.v).items():
            v[t] = v.get(t, Fraction(0)) + c
        for t, c in _qvec_mul(_restrict(other.u), self.v).items():
            v[t] = v.get(t, Fraction(0)) + c
        for t, c in _qvec_mul(_C1N, vv).items():
            v[t] = v.get(t, Fraction(0)) + c
        return BlowupClass(u, v)

    def swap(self):
        """The factor-swapping involution."""
        return BlowupClass({(s, r): c for (r, s), c in self.u.items()}, dict(self.v))

    def integral(self):
        """Integral over the Hilbert square: half the upstairs degree."""
        return self.u.get((3, 3), Fraction(0)) / 2

    def coords(self):
        return (tuple(sorted(self.u.items())), tuple(sorted(self.v.items())))

    def __eq__(self, other):
        return self.coords() == other.coords()

    def __hash__(self):
        return hash(self.coords())


def _sym(r, s):
    if r == s:
        return BlowupClass({(r, s): Fraction(1)})
    return BlowupClass({(r, s): Fraction(1), (s, r): Fraction(1)})


def oracle_basis():
    """The fourteen basis classes in the blowup model."""
    t0 = BlowupClass({(0, 0): Fraction(1)})
    t1 = _sym(1, 0)
    t2 = _sym(2, 0)
    xi = BlowupClass(v={0: Fraction(1)})
    # the non-reduced locus is 2(T1 + T2 - T3) and pulls back to twice
    # the exceptional divisor, so T3 = T1 + T2 - xi
    t3 = t1 + t2 - xi
    t4 = _sym(3, 0)
    t5 = t1 * t2
    t6 = t1 * t1
    t7 = t2 * t2
    t8 = t1 * t3
    t9 = t2 * t3
    t13 = BlowupClass({(3, 3): Fraction(2)})

    # Solve for the curve classes from their divisor pairings.
    span = [_sym(1, 3), _sym(2, 3), BlowupClass(v={3: Fraction(1)})]
    divisors = [t1, t2, t3]

    def solve(targets):
        # find x = sum x_i span_i with integral(x * divisors[d]) = targets[d]
        mat = [[(span[i] * divisors[d]).integral() for i in range(3)] for d in range(3)]
        x = _solve3(mat, [Fraction(t) for t in targets])
        out = BlowupClass()
        for xi_, s in zip(x, span):
            out = out + s.scale(xi_)
        return out

    c1 = solve([0, 1, 0])
    c2 = solve([1, 0, 0])
    f = solve([0, 0, 1])
    t10 = c2 + f
    t11 = c1 + f
    t12 = c1 + c2 + f
    return [t0, t1, t2, t3, t4, t5, t6, t7, t8, t9, t10, t11, t12, t13]


def _solve3(mat, rhs):
    import copy
    a = [row[:] + [rhs[i]] for i, row in enumerate(copy.deepcopy(mat))]
    n = 3
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        inv = Fraction(1) / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                fct = a[r][col]
                a[r] = [v - fct * w for v, w in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)]


def _invert(mat):
    n = len(mat)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = Fraction(1) / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                fct = aug[r][col]
                aug[r] = [v - fct * w for v, w in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def oracle_cup_table():
    """All 14 x 14 products expanded in the basis, via the pairing."""
    basis = oracle_basis()
    # Expansion needs the dual basis; build the Gram matrix exactly.
    gram = [[(basis[i] * basis[j]).integral() for j in range(14)] for i in range(14)]
    ginv = _invert(gram)
    table = {}
    for i in range(14):
        for j in range(14):
            prod = basis[i] * basis[j]
            pair = [(prod * basis[k]).integral() for k in range(14)]
            coords = [
                sum(ginv[m][k] * pair[k] for k in range(14))
                for m in range(14)
            ]
            # sanity: the expansion must reproduce the product exactly
            recon = BlowupClass()
            for m, c in enumerate(coords):
                recon = recon + basis[m].scale(c)
            assert recon == prod, "oracle basis does not span at (%d,%d)" % (i, j)
            table[(i, j)] = tuple(coords)
    return table


def oracle_lines():
    def fmt(x):
        return str(x.numerator) if x.denominator == 1 else "%d/%d" % (x.numerator, x.denominator)

    table = oracle_cup_table()
    return [
        "%d %d -> %s" % (i, j, ",".join(fmt(c) for c in table[(i, j)]))
        for i, j in product(range(14), range(14))
    ]

"""The classical cohomology ring of the Hilbert square of a quadric surface.

The ring is a 14-dimensional Q-algebra with fixed basis T0..T13, graded
(1,3,6,3,1) in codimensions 0..4, generated by the three divisor classes
T1, T2, T3 and one codimension-2 class T4.  The named basis elements are

    T0  = unit                      T5 = T1.T2      T10 = C2 + F
    T1, T2, T3 = divisors           T6 = T1.T1      T11 = C1 + F
    T4  = incidence class           T7 = T2.T2      T12 = C1 + C2 + F
                                    T8 = T1.T3      T13 = point class
                                    T9 = T2.T3

where C1, C2, F span the curve classes, normalised against the divisors by
C1.T2 = 1, C2.T1 = 1, F.T3 = 1 and all other pairings zero.  Curve classes
are identified with their Poincare-dual codimension-3 classes.

Products are computed by normal-form rewriting of generator monomials
against the classical (q = 0) relations of the quantum presentation; the
resulting cup table is cross-checked in the test suite against an
independent model of the ring (Z/2-invariants of the blown-up product of
two quadrics).
"""

from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .coeffring import Rational, rat_str

BASIS_SIZE = 14
CODIM = (0, 1, 1, 1, 2, 2, 2, 2, 2, 2, 3, 3, 3, 4)
GRADED_DIMS = (1, 3, 6, 3, 1)

# Action of the factor-swapping involution on basis indices.
IOTA = (0, 2, 1, 3, 4, 5, 7, 6, 9, 8, 11, 10, 12, 13)

# Every basis class as a monomial in the generators T1..T4.
GENERATOR_WORDS = (
    (), (1,), (2,), (3,), (4,),
    (1, 2), (1, 1), (2, 2), (1, 3), (2, 3),
    (2, 4), (1, 4), (3, 4), (4, 4),
)

BASIS_NAMES = tuple("T%d" % i for i in range(BASIS_SIZE))


class RingConsistencyError(RuntimeError):
    """An internal cross-check of the ring structure failed."""


class UsageError(ValueError):
    pass


class CohVector:
    """A class in the cohomology ring: 14 exact rational coordinates."""

    __slots__ = ("coords",)

    def __init__(self, coords: Sequence[Rational]):
        if len(coords) != BASIS_SIZE:
            raise ValueError("expected %d coordinates" % BASIS_SIZE)
        self.coords = tuple(Fraction(c) for c in coords)

    @classmethod
    def zero(cls) -> "CohVector":
        return cls((0,) * BASIS_SIZE)

    @classmethod
    def basis(cls, i: int) -> "CohVector":
        c = [Fraction(0)] * BASIS_SIZE
        c[i] = Fraction(1)
        return cls(c)

    def __add__(self, other: "CohVector") -> "CohVector":
        return CohVector([a + b for a, b in zip(self.coords, other.coords)])

    def __sub__(self, other: "CohVector") -> "CohVector":
        return CohVector([a - b for a, b in zip(self.coords, other.coords)])

    def __neg__(self) -> "CohVector":
        return CohVector([-a for a in self.coords])

    def scale(self, x) -> "CohVector":
        x = Fraction(x)
        return CohVector([a * x for a in self.coords])

    def __eq__(self, other) -> bool:
        if not isinstance(other, CohVector):
            return NotImplemented
        return self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def is_homogeneous(self, k: int) -> bool:
        return all(c == 0 for i, c in enumerate(self.coords) if CODIM[i] != k)

    def codimension(self) -> Optional[int]:
        """Codimension if homogeneous, else None."""
        degs = {CODIM[i] for i, c in enumerate(self.coords) if c != 0}
        if not degs:
            return 0
        if len(degs) == 1:
            return degs.pop()
        return None

    def support(self) -> List[int]:
        return [i for i, c in enumerate(self.coords) if c != 0]

    def __str__(self) -> str:
        parts = []
        for i, c in enumerate(self.coords):
            if c == 0:
                continue
            if c == 1:
                parts.append(BASIS_NAMES[i])
            elif c == -1:
                parts.append("-" + BASIS_NAMES[i])
            else:
                parts.append("%s %s" % (rat_str(c), BASIS_NAMES[i]))
        if not parts:
            return "0"
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__


# ---------------------------------------------------------------------------
# Normal-form rewriting of generator monomials
# ---------------------------------------------------------------------------
#
# A monomial is an exponent vector (n1, n2, n3, n4) on the generators.
# The rewrite rules are the q = 0 shadows of the seventeen quantum
# relations, plus the square of T4 giving the point class.  Each rule
# removes the given pattern and substitutes a linear combination.

Mono = Tuple[int, int, int, int]


def _deg(m: Mono) -> int:
    return m[0] + m[1] + m[2] + 2 * m[3]


# (name, pattern, replacement list of (coeff, pattern)); replacement
# patterns substitute for the removed pattern inside the ambient monomial.
REWRITE_RULES: Tuple = (
    ("sq3", (0, 0, 2, 0), ((1, (1, 0, 1, 0)), (1, (0, 1, 1, 0)), (-1, (1, 1, 0, 0)))),
    ("cube1", (3, 0, 0, 0), ()),
    ("cube2", (0, 3, 0, 0), ()),
    ("sq1-2", (2, 1, 0, 0), ((2, (1, 0, 0, 1)),)),
    ("sq2-1", (1, 2, 0, 0), ((2, (0, 1, 0, 1)),)),
    ("sq1-3", (2, 0, 1, 0), ((2, (1, 0, 0, 1)),)),
    ("sq2-3", (0, 2, 1, 0), ((2, (0, 1, 0, 1)),)),
    ("triple", (1, 1, 1, 0), ((2, (0, 0, 1, 1)),)),
    ("cube4", (0, 0, 0, 3), ()),
    ("sq4-1", (1, 0, 0, 2), ()),
    ("sq4-2", (0, 1, 0, 2), ()),
    ("sq4-3", (0, 0, 1, 2), ()),
    ("sq1-4", (2, 0, 0, 1), ()),
    ("sq2-4", (0, 2, 0, 1), ()),
    ("mix12-4", (1, 1, 0, 1), ((1, (0, 0, 0, 2)),)),
    ("mix13-4", (1, 0, 1, 1), ((1, (0, 0, 0, 2)),)),
    ("mix23-4", (0, 1, 1, 1), ((1, (0, 0, 0, 2)),)),
)


def _fits(pattern: Mono, m: Mono) -> bool:
    return all(p <= n for p, n in zip(pattern, m))


def _apply(rule, m: Mono) -> List[Tuple[Fraction, Mono]]:
    _, pat, repl = rule
    base = tuple(n - p for n, p in zip(m, pat))
    return [
        (Fraction(c), tuple(b + r for b, r in zip(base, rp)))
        for c, rp in repl
    ]


# Terminal monomials of degree <= 2 and their basis classes.
_TERMINAL = {
    (0, 0, 0, 0): 0,
    (1, 0, 0, 0): 1, (0, 1, 0, 0): 2, (0, 0, 1, 0): 3,
    (0, 0, 0, 1): 4,
    (1, 1, 0, 0): 5, (2, 0, 0, 0): 6, (0, 2, 0, 0): 7,
    (1, 0, 1, 0): 8, (0, 1, 1, 0): 9,
}

# Pairing of the curve-class basis T10, T11, T12 against the divisors
# T1, T2, T3: row e, column d gives the intersection number.
CURVE_DIVISOR_PAIRING = ((1, 0, 1), (0, 1, 1), (1, 1, 1))


def _reduce_combination(combo: Dict[Mono, Fraction], rng: Optional[random.Random]) -> Dict[Mono, Fraction]:
    """Rewrite until no rule applies; rng randomises rule and monomial
    choice (used by the confluence test), default order is deterministic."""
    work = {m: c for m, c in combo.items() if c != 0}
    while True:
        candidates = []
        for m in work:
            if _deg(m) > 4:
                candidates.append((m, None))  # vanishes by grading
                continue
            for rule in REWRITE_RULES:
                if _fits(rule[1], m):
                    candidates.append((m, rule))
        if not candidates:
            return work
        if rng is None:
            m, rule = candidates[0]
        else:
            m, rule = candidates[rng.randrange(len(candidates))]
        coeff = work.pop(m)
        if rule is None:
            continue
        for c, m2 in _apply(rule, m):
            work[m2] = work.get(m2, Fraction(0)) + coeff * c
            if work[m2] == 0:
                del work[m2]


def _monomial_integral(m: Mono) -> Fraction:
    """Integral of a degree-4 generator monomial over the whole space."""
    if _deg(m) != 4:
        raise ValueError("integral wants total degree 4, got %r" % (m,))
    reduced = _reduce_combination({m: Fraction(1)}, None)
    total = Fraction(0)
    for mono, coeff in reduced.items():
        if mono == (0, 0, 0, 2):
            total += coeff  # the square of T4 is the point class
        else:
            raise RingConsistencyError("degree-4 reduction left %r" % (mono,))
    return total


@lru_cache(maxsize=1)
def _curve_pairing_inverse():
    rows = [[Fraction(v) for v in row] for row in CURVE_DIVISOR_PAIRING]
    return _invert_matrix(rows)


def _codim3_to_basis(m: Mono) -> CohVector:
    """Resolve a terminal codimension-3 monomial into T10, T11, T12 by
    pairing against the divisors and solving the 3x3 system fixed by the
    curve-divisor intersection numbers."""
    p = []
    for d in range(3):
        bumped = tuple(n + (1 if i == d else 0) for i, n in enumerate(m))
        p.append(_monomial_integral(bumped))
    # x = sum x_e T_{10+e} with sum_e x_e CURVE_DIVISOR_PAIRING[e][d] = p[d]
    inv = _curve_pairing_inverse()
    out = [Fraction(0)] * BASIS_SIZE
    for e in range(3):
        out[10 + e] = sum(p[d] * inv[d][e] for d in range(3))
    return CohVector(out)


def normal_form(monomial: Iterable[int], rng: Optional[random.Random] = None) -> CohVector:
    """Express a product of generators (indices in {1,2,3,4}) in the basis.

    Monomials of total degree above four vanish for grading reasons.  The
    result is independent of the rewrite order; pass ``rng`` to randomise
    the order (exercised by the confluence test).
    """
    counts = [0, 0, 0, 0]
    for g in monomial:
        if g not in (1, 2, 3, 4):
            raise UsageError("generator index must be 1..4, got %r" % (g,))
        counts[g - 1] += 1
    m0 = tuple(counts)
    reduced = _reduce_combination({m0: Fraction(1)}, rng)
    result = CohVector.zero()
    for m, coeff in reduced.items():
        d = _deg(m)
        if d > 4:
            continue
        if d <= 2:
            vec = CohVector.basis(_TERMINAL[m])
        elif d == 3:
            vec = _codim3_to_basis(m)
        else:
            k = Fraction(0)
            if m == (0, 0, 0, 2):
                k = Fraction(1)
            else:
                raise RingConsistencyError("unreduced degree-4 monomial %r" % (m,))
            vec = CohVector.basis(13).scale(k)
        result = result + vec.scale(coeff)
    return result


# ---------------------------------------------------------------------------
# Cup product, integration, pairing
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _cup_basis(i: int, j: int) -> CohVector:
    return normal_form(GENERATOR_WORDS[i] + GENERATOR_WORDS[j])


def cup_basis(i: int, j: int) -> CohVector:
    """Cup product of two basis classes (cached)."""
    return _cup_basis(i, j)


def cup(x: CohVector, y: CohVector) -> CohVector:
    """Bilinear extension of the basis cup table."""
    result = CohVector.zero()
    for i, ci in enumerate(x.coords):
        if ci == 0:
            continue
        for j, cj in enumerate(y.coords):
            if cj == 0:
                continue
            result = result + _cup_basis(i, j).scale(ci * cj)
    return result


def integrate(x: CohVector) -> Rational:
    """Degree of the codimension-4 part: the coefficient of the point class."""
    return x.coords[13]


def involution(x: CohVector) -> CohVector:
    return CohVector([x.coords[IOTA[i]] for i in range(BASIS_SIZE)])


def divisor_degree(i: int, beta: Tuple[int, int, int]) -> int:
    """Degree of the divisor T_i on the curve class (a, b, c)."""
    a, b, c = beta
    if i == 1:
        return b
    if i == 2:
        return a
    if i == 3:
        return c
    raise UsageError("divisor index must be 1, 2 or 3, got %r" % (i,))


def _invert_matrix(mat: List[List[Fraction]]) -> List[List[Fraction]]:
    """Exact Gauss-Jordan inverse; raises on a singular matrix."""
    n = len(mat)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise RingConsistencyError("pairing matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = Fraction(1) / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


class PairingMatrix:
    """The intersection pairing g and its exact inverse."""

    def __init__(self, g: List[List[Fraction]], g_inv: List[List[Fraction]]):
        self.g = g
        self.g_inv = g_inv

    def nonzero_inverse_pairs(self) -> List[Tuple[int, int, Fraction]]:
        return [
            (e, f, self.g_inv[e][f])
            for e in range(BASIS_SIZE)
            for f in range(BASIS_SIZE)
            if self.g_inv[e][f] != 0
        ]


@lru_cache(maxsize=1)
def pairing() -> PairingMatrix:
    g = [[integrate(_cup_basis(i, j)) for j in range(BASIS_SIZE)] for i in range(BASIS_SIZE)]
    for i in range(BASIS_SIZE):
        for j in range(BASIS_SIZE):
            if g[i][j] != g[j][i]:
                raise RingConsistencyError("pairing not symmetric at (%d,%d)" % (i, j))
            if g[i][j] != 0 and CODIM[i] + CODIM[j] != 4:
                raise RingConsistencyError("pairing not graded at (%d,%d)" % (i, j))
    g_inv = _invert_matrix([row[:] for row in g])
    return PairingMatrix(g, g_inv)


@lru_cache(maxsize=1)
def dual_pairs() -> Tuple[Tuple[int, int, Fraction], ...]:
    """All (e, f, weight) with a nonzero inverse-pairing entry; the sums in
    the quantum product and the associativity equations run over these."""
    return tuple(pairing().nonzero_inverse_pairs())


@lru_cache(maxsize=1)
def dual_groups() -> Tuple[Tuple[int, Tuple[Tuple[int, Fraction], ...]], ...]:
    """dual_pairs grouped by the first index, for sums that can hoist the
    e-side factor out of the f-loop."""
    groups: Dict[int, List[Tuple[int, Fraction]]] = {}
    for e, f, w in dual_pairs():
        groups.setdefault(e, []).append((f, w))
    return tuple((e, tuple(fs)) for e, fs in sorted(groups.items()))


@lru_cache(maxsize=1)
def dual_basis() -> Tuple[CohVector, ...]:
    """dual(e) with integrate(cup(dual(e), T_g)) = delta_{eg}."""
    duals = []
    for e in range(BASIS_SIZE):
        vec = CohVector.zero()
        for e2, f, w in dual_pairs():
            if e2 == e:
                vec = vec + CohVector.basis(f).scale(w)
        duals.append(vec)
    return tuple(duals)


# ---------------------------------------------------------------------------
# Golden-file format: "i j -> c0,...,c13" per basis pair
# ---------------------------------------------------------------------------

def cup_table_lines() -> List[str]:
    lines = []
    for i in range(BASIS_SIZE):
        for j in range(BASIS_SIZE):
            coords = ",".join(rat_str(c) for c in _cup_basis(i, j).coords)
            lines.append("%d %d -> %s" % (i, j, coords))
    return lines


def parse_cup_table(lines: Iterable[str]) -> Dict[Tuple[int, int], CohVector]:
    table = {}
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        head, _, tail = line.partition("->")
        i, j = (int(t) for t in head.split())
        coords = [Fraction(t) for t in tail.strip().split(",")]
        table[(i, j)] = CohVector(coords)
    return table

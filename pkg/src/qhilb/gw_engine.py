"""Genus-zero Gromov-Witten invariants of the Hilbert square of the quadric.

The engine stores a small table of seed invariants (the one- and two-point
values established by direct geometry), applies the standard axioms
(dimension, divisor, fundamental class), and computes everything else it
can by the associativity (WDVV) equations:

  * n-point invariants whose insertions avoid T4 reduce, by repeatedly
    factoring the lowest-codimension insertion through a divisor, to
    two-point invariants;
  * insertions of T4 are peeled off by dedicated instance shapes, at the
    price of recursing into smaller curve classes;
  * two-point invariants that are not seeded are obtained by collecting
    associativity relations in which they appear linearly and solving the
    system by exact Gaussian elimination.

Invariants the seeds and the recursion cannot reach (the pure T4-power
series beyond exponent three) are first-class ``Unknown`` results carrying
a reason, never silently zeroed.  The optional bidegree-vanishing rule
(off by default) seeds those powers with zero for small bidegrees, where
no curve of the corresponding type exists.

Values and keys are immutable; the memo tables follow a single-writer
contract (concurrent reads are fine, writes must be serialized by the
caller).  Everything here is deterministic and single-threaded by default.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from . import chow
from .chow import (
    CODIM,
    IOTA,
    CohVector,
    UsageError,
    cup,
    divisor_degree,
    dual_groups,
    dual_pairs,
)

Beta = Tuple[int, int, int]
Insertions = Tuple[int, ...]
Key = Tuple[Beta, Insertions]


class Unknown:
    """An invariant the shipped seeds cannot reach."""

    __slots__ = ("reason",)

    def __init__(self, reason: str):
        self.reason = reason

    def __repr__(self):
        return "Unknown(%s)" % self.reason

    def __eq__(self, other):
        return isinstance(other, Unknown)

    def __hash__(self):
        return hash("Unknown")


Value = Union[Fraction, Unknown]


class ConsistencyError(RuntimeError):
    """The WDVV system or a seed contradicted itself; fatal."""


def val_mul(x: Value, y: Value) -> Value:
    """Product with annihilation: an exact zero absorbs an Unknown."""
    if isinstance(x, Fraction) and x == 0:
        return Fraction(0)
    if isinstance(y, Fraction) and y == 0:
        return Fraction(0)
    if isinstance(x, Unknown):
        return x
    if isinstance(y, Unknown):
        return y
    return x * y


def val_add(x: Value, y: Value) -> Value:
    if isinstance(x, Unknown):
        return x
    if isinstance(y, Unknown):
        return y
    return x + y


def val_scale(c: Fraction, x: Value) -> Value:
    return val_mul(Fraction(c), x)


# ---------------------------------------------------------------------------
# Curve classes
# ---------------------------------------------------------------------------

def is_effective(beta: Beta) -> bool:
    return all(t >= 0 for t in beta)


def beta_key(beta: Beta) -> Tuple[int, int, int]:
    a, b, c = beta
    return (a + b, c, a)


def iota_beta(beta: Beta) -> Beta:
    a, b, c = beta
    return (b, a, c)


def iota_insertions(ins: Insertions) -> Insertions:
    return tuple(sorted(IOTA[i] for i in ins))


def expected_dim(beta: Beta, n: int) -> int:
    a, b, _ = beta
    return 2 * a + 2 * b + 1 + n


def dimension_check(beta: Beta, insertions: Sequence[int]) -> bool:
    """Total insertion codimension must match the expected dimension."""
    return sum(CODIM[i] for i in insertions) == expected_dim(beta, len(insertions))


def splittings(beta: Beta) -> List[Tuple[Beta, Beta]]:
    """All decompositions into two nonzero effective classes."""
    a, b, c = beta
    out = []
    for a1 in range(a + 1):
        for b1 in range(b + 1):
            for c1 in range(c + 1):
                b1_ = (a1, b1, c1)
                b2_ = (a - a1, b - b1, c - c1)
                if b1_ != (0, 0, 0) and b2_ != (0, 0, 0):
                    out.append((b1_, b2_))
    return out


def _multiset_splits(extra: Insertions) -> List[Tuple[Insertions, Insertions, int]]:
    """Sub-multisets A of ``extra`` with the count of labelled partitions
    realising the split (the associativity sum runs over labelled ones)."""
    items = sorted(set(extra))
    mults = [extra.count(t) for t in items]
    out = []
    for picks in itertools.product(*(range(m + 1) for m in mults)):
        weight = 1
        a_part: List[int] = []
        b_part: List[int] = []
        for t, m, p in zip(items, mults, picks):
            weight *= comb(m, p)
            a_part.extend([t] * p)
            b_part.extend([t] * (m - p))
        out.append((tuple(a_part), tuple(b_part), weight))
    return out


# ---------------------------------------------------------------------------
# Seeds
# ---------------------------------------------------------------------------

_CIT_FIBER = "one-point values on the punctual fiber classes (obstruction-bundle computation)"
_CIT_RULED = "one- and two-point values on the section-plus-fiber classes"
_CIT_ASSOC_TABLE = "two-point table obtained from generator associativity"
_CIT_WORKED = "two-point values worked out from the curve geometry"
_CIT_DIAGONAL_CLASSES = "three-point vanishing for section classes with more than two fiber components"
_CIT_POINTLINE = "point-class two-point values on the balanced class from the incidence lemma"
_CIT_T4_LOW = "pure incidence-class invariants vanish at exponents one and three"
_CIT_BIDEGREE = "bidegree vanishing: no curves below the first admissible bidegree"
_CIT_DRESSED = "divisor dressing of: "


class SeedTable:
    """Shipped seed invariants: explicit entries plus closed-form rules.

    The table is closed under the factor-swapping involution, and every
    entry satisfies the dimension axiom.  Rules may be disabled by name
    (used by the independence check, which re-derives the associativity
    table instead of consulting it).
    """

    def __init__(self, enable_bidegree_vanishing: bool = False,
                 disabled_rules: Iterable[str] = ()):
        self.enable_bidegree_vanishing = enable_bidegree_vanishing
        self.disabled_rules = frozenset(disabled_rules)
        self.explicit: Dict[Key, Tuple[Fraction, str]] = {}

    # -- explicit entries --------------------------------------------------

    def add(self, beta: Beta, insertions: Sequence[int], value, citation: str,
            mirror: bool = True) -> None:
        beta = tuple(beta)
        ins = tuple(sorted(insertions))
        if not is_effective(beta) or beta == (0, 0, 0):
            raise UsageError("seed wants a nonzero effective class, got %r" % (beta,))
        if not dimension_check(beta, ins):
            raise UsageError(
                "seed <%s>_%r violates the dimension axiom"
                % (" ".join(chow.BASIS_NAMES[i] for i in ins), beta)
            )
        value = Fraction(value)
        key = (beta, ins)
        old = self.explicit.get(key)
        if old is not None and old[0] != value:
            raise ConsistencyError("conflicting seed for %r: %s vs %s" % (key, old[0], value))
        self.explicit[key] = (value, citation)
        if mirror:
            mkey = (iota_beta(beta), iota_insertions(ins))
            mold = self.explicit.get(mkey)
            if mold is not None and mold[0] != value:
                raise ConsistencyError("seed not involution-closed at %r" % (mkey,))
            self.explicit[mkey] = (value, citation)

    def load_overrides(self, lines: Iterable[str]) -> int:
        """Load "a,b,c | i1 i2 ... | p/q | citation" lines; returns count."""
        n = 0
        for raw in lines:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split("|")]
            if len(parts) != 4:
                raise UsageError("bad seed line: %r" % raw)
            beta = tuple(int(t) for t in parts[0].split(","))
            if len(beta) != 3:
                raise UsageError("bad curve class in seed line: %r" % raw)
            ins = tuple(int(t.lstrip("T")) for t in parts[1].split())
            self.add(beta, ins, Fraction(parts[2]), parts[3])
            n += 1
        return n

    def export_lines(self) -> List[str]:
        out = []
        for (beta, ins), (value, cit) in sorted(self.explicit.items()):
            out.append(
                "%d,%d,%d | %s | %s | %s"
                % (beta[0], beta[1], beta[2],
                   " ".join(str(i) for i in ins),
                   Fraction(value), cit)
            )
        return out

    def materialize(self, c_max: int) -> Dict[Key, Tuple[Fraction, str]]:
        """Explicit entries plus every rule-based seed with q3-order up to
        c_max, as a concrete table (used by export and for inspection)."""
        table: Dict[Key, Tuple[Fraction, str]] = dict(self.explicit)
        candidates: List[Key] = []
        for c in range(c_max + 1):
            for i in range(4, 10):
                candidates.append(((0, 0, c), (i,)))
            for ab in ((1, 0), (0, 1)):
                beta = (ab[0], ab[1], c)
                candidates.append((beta, (13,)))
                candidates.append((beta, (4, 4, 4)))
                for e in (10, 11, 12):
                    for i in (4, 5, 6, 7):
                        candidates.append((beta, tuple(sorted((i, e)))))
            candidates.append(((1, 1, 1), (10, 13)))
            candidates.append(((1, 1, 1), (11, 13)))
            candidates.append(((1, 1, 1), (12, 13)))
        for beta, ins in candidates:
            if beta == (0, 0, 0) or not dimension_check(beta, ins):
                continue
            hit = self.lookup(beta, ins)
            if hit is not None and (beta, ins) not in table:
                table[(beta, ins)] = hit
        return table

    def materialized_lines(self, c_max: int) -> List[str]:
        return [
            "%d,%d,%d | %s | %s | %s"
            % (beta[0], beta[1], beta[2],
               " ".join(str(i) for i in ins), Fraction(value), cit)
            for (beta, ins), (value, cit) in sorted(self.materialize(c_max).items())
        ]

    # -- rule lookup ---------------------------------------------------------

    def lookup(self, beta: Beta, ins: Insertions) -> Optional[Tuple[Fraction, str]]:
        """Seed value for a normalized, dimension-consistent key, or None."""
        hit = self.explicit.get((beta, ins))
        if hit is not None:
            return hit
        for name, rule in _SEED_RULES:
            if name in self.disabled_rules:
                continue
            got = rule(self, beta, ins)
            if got is not None:
                return got
        return None


def _rule_fiber_one_point(table, beta, ins):
    # one-point invariants on the multiple fiber classes
    a, b, c = beta
    if (a, b) != (0, 0) or len(ins) != 1:
        return None
    i = ins[0]
    if i in (8, 9):
        return (Fraction(4, c * c), _CIT_FIBER)
    if i in (4, 5, 6, 7):
        return (Fraction(0), _CIT_FIBER)
    return None


def _rule_ruled_classes(table, beta, ins):
    # <T13> and <T4, codim-3> on the (1,0,c) and (0,1,c) families
    a, b, c = beta
    if (a, b) == (1, 0):
        if ins == (13,):
            return (Fraction(2 if c == 1 else 0), _CIT_RULED)
        if len(ins) == 2 and ins[0] == 4 and ins[1] in (10, 11, 12):
            v = 1 if (c == 1 and ins[1] in (10, 12)) else 0
            return (Fraction(v), _CIT_RULED)
    if (a, b) == (0, 1):
        if ins == (13,):
            return (Fraction(2 if c == 1 else 0), _CIT_RULED)
        if len(ins) == 2 and ins[0] == 4 and ins[1] in (10, 11, 12):
            v = 1 if (c == 1 and ins[1] in (11, 12)) else 0
            return (Fraction(v), _CIT_RULED)
    return None


def _rule_high_fiber_vanishing(table, beta, ins):
    # all three-point invariants on (1,0,c), (0,1,c) with c > 2 vanish;
    # via the divisor T3 (degree c != 0) the two-point ones follow
    a, b, c = beta
    if {a, b} == {0, 1} and c > 2 and len(ins) in (2, 3):
        return (Fraction(0), _CIT_DIAGONAL_CLASSES)
    return None


def _rule_assoc_table(table, beta, ins):
    # the associativity-derived two-point table on the ruled families
    a, b, c = beta
    if len(ins) != 2 or ins[1] not in (10, 11, 12):
        return None
    if (a, b) == (0, 1) and ins[0] == 5:
        v = {10: 0, 11: 2, 12: 2}[ins[1]] if c == 1 else 0
        return (Fraction(v), _CIT_ASSOC_TABLE)
    if (a, b) == (1, 0) and ins[0] == 5:
        v = {10: 2, 11: 0, 12: 2}[ins[1]] if c == 1 else 0
        return (Fraction(v), _CIT_ASSOC_TABLE)
    if (a, b) == (1, 0) and ins[0] == 6:
        return (Fraction(0), _CIT_ASSOC_TABLE)
    if (a, b) == (0, 1) and ins[0] == 7:
        return (Fraction(0), _CIT_ASSOC_TABLE)
    return None


def _rule_worked_two_point(table, beta, ins):
    # <T11 T6> on (0,1,c) = 1, 2, 1 for c = 0, 1, 2 and the mirror family
    a, b, c = beta
    if (a, b) == (0, 1) and ins == (6, 11):
        if c <= 2:
            return (Fraction((1, 2, 1)[c]), _CIT_WORKED)
        return (Fraction(0), _CIT_WORKED)
    if (a, b) == (1, 0) and ins == (7, 10):
        if c <= 2:
            return (Fraction((1, 2, 1)[c]), _CIT_WORKED)
        return (Fraction(0), _CIT_WORKED)
    return None


def _rule_balanced_point(table, beta, ins):
    # <T13 Te> on (1,1,1) equals the pairing of Te against T3
    if beta == (1, 1, 1) and len(ins) == 2 and ins[1] == 13 and ins[0] in (10, 11, 12):
        v = chow.integrate(cup(CohVector.basis(3), CohVector.basis(ins[0])))
        return (Fraction(v), _CIT_POINTLINE)
    return None


def _rule_pure_t4(table, beta, ins):
    if not ins or any(i != 4 for i in ins):
        return None
    m = len(ins)
    if m in (1, 3):
        return (Fraction(0), _CIT_T4_LOW)
    if table.enable_bidegree_vanishing:
        a, b, _ = beta
        if a * b - a - b - 1 < 0:
            return (Fraction(0), _CIT_BIDEGREE)
    return None


def _rule_dressing(table, beta, ins):
    # a two-point invariant with a divisor insertion is the divisor's
    # degree on the class times the seeded one-point invariant
    if len(ins) != 2 or CODIM[ins[0]] != 1 or CODIM[ins[1]] < 2:
        return None
    sub = table.lookup(beta, (ins[1],))
    if sub is None:
        return None
    deg = divisor_degree(ins[0], beta)
    return (Fraction(deg) * sub[0], _CIT_DRESSED + sub[1])


_SEED_RULES = (
    ("s1s2", _rule_fiber_one_point),
    ("s3", _rule_ruled_classes),
    ("s4", _rule_high_fiber_vanishing),
    ("s5", _rule_assoc_table),
    ("s6", _rule_worked_two_point),
    ("s7", _rule_balanced_point),
    ("s8s9", _rule_pure_t4),
    ("dressing", _rule_dressing),
)


# ---------------------------------------------------------------------------
# Linear expressions over open two-point keys (used by the solver)
# ---------------------------------------------------------------------------

class LinExpr:
    """const + sum coeff_k * <key_k>, possibly poisoned by an Unknown."""

    __slots__ = ("const", "coeffs", "poison")

    def __init__(self, const=Fraction(0), coeffs=None, poison: Optional[str] = None):
        self.const = Fraction(const)
        self.coeffs: Dict[Key, Fraction] = dict(coeffs or {})
        self.poison = poison

    @classmethod
    def of_value(cls, v: Value) -> "LinExpr":
        if isinstance(v, Unknown):
            return cls(poison=v.reason)
        return cls(const=v)

    @classmethod
    def symbol(cls, key: Key) -> "LinExpr":
        return cls(coeffs={key: Fraction(1)})

    def __add__(self, other: "LinExpr") -> "LinExpr":
        coeffs = dict(self.coeffs)
        for k, c in other.coeffs.items():
            coeffs[k] = coeffs.get(k, Fraction(0)) + c
            if coeffs[k] == 0:
                del coeffs[k]
        return LinExpr(self.const + other.const, coeffs, self.poison or other.poison)

    def __sub__(self, other: "LinExpr") -> "LinExpr":
        return self + other.scale(Fraction(-1))

    def scale(self, c: Fraction) -> "LinExpr":
        c = Fraction(c)
        if c == 0:
            return LinExpr()
        return LinExpr(self.const * c, {k: v * c for k, v in self.coeffs.items()}, self.poison)

    def value(self) -> Value:
        if self.poison:
            return Unknown(self.poison)
        if self.coeffs:
            raise ConsistencyError("unresolved symbols in %r" % sorted(self.coeffs))
        return self.const

    def __repr__(self):
        return "LinExpr(%s, %s, poison=%r)" % (self.const, self.coeffs, self.poison)


ZERO_EXPR = LinExpr()


# ---------------------------------------------------------------------------
# Canonical factorizations through a divisor (the recursion's choices)
# ---------------------------------------------------------------------------
#
# For each basis class of codimension >= 2 that sits in the divisor-generated
# subring: gamma = scale * (alpha cup alpha1) with alpha1 a divisor.  T4
# itself has no such factorization; it is what the dedicated cases peel off.

FACTORIZATIONS = {
    5: (Fraction(1), 1, 2),        # T5 = T1.T2
    6: (Fraction(1), 1, 1),        # T6 = T1.T1
    7: (Fraction(1), 2, 2),        # T7 = T2.T2
    8: (Fraction(1), 1, 3),        # T8 = T1.T3
    9: (Fraction(1), 2, 3),        # T9 = T2.T3
    10: (Fraction(1, 2), 7, 1),    # T10 = (T7.T1)/2
    11: (Fraction(1, 2), 6, 2),    # T11 = (T6.T2)/2
    12: (Fraction(1, 2), 5, 3),    # T12 = (T5.T3)/2
    13: (Fraction(1), 12, 1),      # T13 = T12.T1
}


# ---------------------------------------------------------------------------
# The engine
# ---------------------------------------------------------------------------

class InstanceRecord:
    """One associativity instance, for tracing and the derivation audit."""

    __slots__ = ("label", "corners", "extra", "beta", "target")

    def __init__(self, label, corners, extra, beta, target):
        self.label = label
        self.corners = corners
        self.extra = extra
        self.beta = beta
        self.target = target

    def describe(self) -> str:
        corners = ",".join(chow.BASIS_NAMES[i] for i in self.corners)
        extra = " ".join(chow.BASIS_NAMES[i] for i in self.extra) or "-"
        tgt = ""
        if self.target is not None:
            tb, ti = self.target
            tgt = " for <%s>_%r" % (" ".join(chow.BASIS_NAMES[i] for i in ti), (tb,))
        return "%s: corners(%s) extra(%s) at %r%s" % (self.label, corners, extra, self.beta, tgt)


class Engine:
    """Memoized Gromov-Witten invariant computer."""

    def __init__(self, c_max: int = 6, enable_bidegree_vanishing: bool = False,
                 seed_overrides: Optional[Iterable[str]] = None,
                 disabled_seed_rules: Iterable[str] = ()):
        self.c_max = c_max
        self.seeds = SeedTable(enable_bidegree_vanishing, disabled_seed_rules)
        if seed_overrides is not None:
            self.seeds.load_overrides(seed_overrides)
        self.memo: Dict[Key, Value] = {}
        self._raw_memo: Dict[Key, Value] = {}  # pre-normalization fast path
        self.provenance: Dict[Key, str] = {}
        self.two_point: Dict[Key, Value] = {}
        self.two_point_provenance: Dict[Key, str] = {}
        self._solved_betas = set()
        self._solving = set()
        self.stats = {"wdvv_instances": 0, "solver_instances": 0}
        self.tracing = False
        self.trace_log: List[InstanceRecord] = []
        self._solver_instances_used: List[Tuple] = []

    # -- public API ----------------------------------------------------------

    def invariant(self, beta: Sequence[int], insertions: Sequence) -> Value:
        """The genus-zero invariant of the class ``beta`` with the given
        insertions (basis indices, or CohVectors expanded multilinearly)."""
        beta = tuple(int(t) for t in beta)
        if beta == (0, 0, 0) or not is_effective(beta):
            raise UsageError("invariants want a nonzero effective class, got %r" % (beta,))
        vectors: List[CohVector] = []
        for ins in insertions:
            if isinstance(ins, CohVector):
                vectors.append(ins)
            else:
                vectors.append(CohVector.basis(int(ins)))
        total: Value = Fraction(0)
        for combo in itertools.product(*(v.support() for v in vectors)):
            coeff = Fraction(1)
            for v, i in zip(vectors, combo):
                coeff *= v.coords[i]
            term = val_scale(coeff, self._invariant(beta, tuple(sorted(combo))))
            total = val_add(total, term)
        return total

    def provenance_of(self, beta: Beta, insertions: Sequence[int]) -> str:
        factor, key = self._normalize(tuple(beta), tuple(sorted(insertions)))
        if key is None:
            return "vanishes by an axiom (fundamental class, dimension, or divisor degree)"
        note = self.provenance.get(key) or self.two_point_provenance.get(key)
        if note is None:
            seed = self.seeds.lookup(*key)
            if seed is not None:
                note = "seed: " + seed[1]
        if note is None:
            memo_hit = self.memo.get(key)
            if isinstance(memo_hit, Unknown):
                note = memo_hit.reason
        head = "" if factor == 1 else "divisor axiom factor %s; " % factor
        return head + (note or "unresolved")

    # -- normalization -------------------------------------------------------

    def _normalize(self, beta: Beta, ins: Insertions):
        """Apply the fundamental-class, dimension and divisor axioms.

        Returns (factor, key) with key None when the invariant is an exact
        zero.  Divisors are only removed while at least two insertions
        remain: one- and two-point values are primitive inputs here.
        """
        if 0 in ins:
            return Fraction(0), None
        if not dimension_check(beta, ins):
            return Fraction(0), None
        factor = Fraction(1)
        work = list(ins)
        while len(work) >= 3:
            d = next((i for i in work if CODIM[i] == 1), None)
            if d is None:
                break
            work.remove(d)
            deg = divisor_degree(d, beta)
            if deg == 0:
                return Fraction(0), None
            factor *= deg
        return factor, (beta, tuple(sorted(work)))

    def _invariant(self, beta: Beta, ins: Insertions) -> Value:
        raw = (beta, ins)
        hit = self._raw_memo.get(raw)
        if hit is not None:
            return hit
        factor, key = self._normalize(beta, ins)
        if key is None:
            value: Value = Fraction(0)
        else:
            value = val_scale(factor, self._lookup_or_reduce(key))
        self._raw_memo[raw] = value
        return value

    def _lookup_or_reduce(self, key: Key) -> Value:
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        expr = self._reduce_key(key, _NumericContext(self))
        value = expr.value()
        self.memo[key] = value
        return value

    # -- the recursive reducer ------------------------------------------------

    def _reduce_key(self, key: Key, ctx: "_Context") -> LinExpr:
        if ctx.is_open(key):
            return LinExpr.symbol(key)
        cached = ctx.cache.get(key)
        if cached is not None:
            return cached
        memo_hit = self.memo.get(key)
        if memo_hit is not None:
            return LinExpr.of_value(memo_hit)
        beta, ins = key
        seed = self.seeds.lookup(beta, ins)
        if seed is not None:
            self.provenance.setdefault(key, "seed: " + seed[1])
            return LinExpr.of_value(seed[0])
        if ins and all(i == 4 for i in ins):
            # pure incidence-class powers are seed material, never derived
            expr = LinExpr(poison=_pure_t4_reason(key))
        elif len(ins) <= 2:
            expr = self._two_point_expr(key, ctx)
        else:
            if key in ctx.stack:
                raise ConsistencyError("recursion cycle at %r" % (key,))
            ctx.stack.add(key)
            try:
                expr = self._reduce_by_wdvv(key, ctx)
            finally:
                ctx.stack.discard(key)
        ctx.cache[key] = expr
        if not expr.coeffs and not ctx.is_solver:
            self.memo[key] = expr.value()
        return expr

    def _two_point_expr(self, key: Key, ctx: "_Context") -> LinExpr:
        beta, ins = key
        a, b, c = beta
        stored = self.two_point.get(key)
        if stored is not None:
            return LinExpr.of_value(stored)
        if a + b <= 2 and c > self.c_max:
            return LinExpr(poison="exceeds c_max=%d at %r" % (self.c_max, (beta,)))
        if a + b <= 2 and not ctx.is_solver:
            self._ensure_two_point(beta)
            stored = self.two_point.get(key)
            if stored is not None:
                return LinExpr.of_value(stored)
        if ins and all(i == 4 for i in ins):
            reason = _pure_t4_reason(key)
        else:
            reason = "two-point invariant <%s>_%r not determined by the shipped seeds" % (
                " ".join(chow.BASIS_NAMES[i] for i in ins), (beta,))
        return LinExpr(poison=reason)

    def _term_expr(self, beta: Beta, raw: List, ctx: "_Context") -> LinExpr:
        """Reduce one boundary term: a list of basis indices and CohVectors."""
        vectors = [v if isinstance(v, CohVector) else CohVector.basis(v) for v in raw]
        total = ZERO_EXPR
        for combo in itertools.product(*(v.support() for v in vectors)):
            coeff = Fraction(1)
            for v, i in zip(vectors, combo):
                coeff *= v.coords[i]
            factor, key = self._normalize(beta, tuple(sorted(combo)))
            if key is None:
                continue
            total = total + self._reduce_key(key, ctx).scale(coeff * factor)
        return total

    def _interior_value(self, beta: Beta, raw: Insertions) -> Value:
        """Numeric invariant for interior factors (always at smaller classes)."""
        return self._invariant(beta, raw)

    def _instance_expr(self, corners, extra: Insertions, beta: Beta, ctx: "_Context") -> LinExpr:
        """Residual of one associativity instance: identically zero.

        corners (i, j, k, l): the equation couples the pairing (ij|kl)
        against (ik|jl) over all splittings of ``beta`` and labelled
        partitions of ``extra``.
        """
        i, j, k, l = corners
        rel = ZERO_EXPR
        rel = rel + self._term_expr(beta, [i, j, cup(CohVector.basis(k), CohVector.basis(l))] + list(extra), ctx)
        rel = rel + self._term_expr(beta, [cup(CohVector.basis(i), CohVector.basis(j)), k, l] + list(extra), ctx)
        rel = rel - self._term_expr(beta, [i, k, cup(CohVector.basis(j), CohVector.basis(l))] + list(extra), ctx)
        rel = rel - self._term_expr(beta, [cup(CohVector.basis(i), CohVector.basis(k)), j, l] + list(extra), ctx)
        partitions = _multiset_splits(extra)
        const_acc = Fraction(0)
        for b1, b2 in splittings(beta):
            for a_part, b_part, weight in partitions:
                for e, fws in dual_groups():
                    lhs1 = self._interior_value(b1, (i, j, e) + a_part)
                    rhs1 = self._interior_value(b1, (i, k, e) + a_part)
                    lhs1_zero = isinstance(lhs1, Fraction) and lhs1 == 0
                    rhs1_zero = isinstance(rhs1, Fraction) and rhs1 == 0
                    if lhs1_zero and rhs1_zero:
                        continue
                    for f, w in fws:
                        coeff = weight * w
                        if not lhs1_zero:
                            term = val_mul(lhs1, self._interior_value(b2, (k, l, f) + b_part))
                            if isinstance(term, Unknown):
                                return LinExpr(poison=term.reason)
                            const_acc += coeff * term
                        if not rhs1_zero:
                            term = val_mul(rhs1, self._interior_value(b2, (j, l, f) + b_part))
                            if isinstance(term, Unknown):
                                return LinExpr(poison=term.reason)
                            const_acc -= coeff * term
        if const_acc != 0:
            rel = rel + LinExpr(const=const_acc)
        return rel

    def _reduce_by_wdvv(self, key: Key, ctx: "_Context") -> LinExpr:
        """Case analysis on (number of T4 insertions, the rest)."""
        beta, ins = key
        m = sum(1 for t in ins if t == 4)
        gammas = sorted((t for t in ins if t != 4), key=lambda t: -CODIM[t])
        if not gammas:
            # pure T4 powers are seeds only; unseeded ones already returned
            raise ConsistencyError("pure-T4 key %r escaped the lookup" % (key,))

        if m == 0:
            _, alpha, alpha1 = FACTORIZATIONS[gammas[-1]]
            corners = (gammas[0], gammas[1], alpha, alpha1)
            extra = tuple(gammas[2:-1])
            label = "divisor-subring reduction"
        elif m == 1 and len(gammas) >= 2:
            _, alpha, alpha1 = FACTORIZATIONS[gammas[-1]]
            corners = (4, gammas[0], alpha, alpha1)
            extra = tuple(gammas[1:-1])
            label = "single-T4 peel"
        elif m >= 2 and len(gammas) == 1:
            g1 = gammas[0]
            if CODIM[g1] == 4:
                alpha = alpha1 = 5  # T5.T5 = 2 T13
            else:
                _, alpha, alpha1 = FACTORIZATIONS[g1]
            corners = (4, 4, alpha, alpha1)
            extra = (4,) * (m - 2)
            label = "double-T4 instance"
        else:  # m >= 2, len(gammas) >= 2
            _, alpha, alpha1 = FACTORIZATIONS[gammas[-1]]
            corners = (4, gammas[0], alpha, alpha1)
            extra = (4,) * (m - 1) + tuple(gammas[1:-1])
            label = "multi-T4 peel"

        self.stats["wdvv_instances"] += 1
        if self.tracing:
            self.trace_log.append(InstanceRecord(label, corners, extra, beta, key))

        inner = _TargetContext(ctx, key)
        rel = self._instance_expr(corners, extra, beta, inner)
        if rel.poison:
            return LinExpr(poison=rel.poison)
        t_c = rel.coeffs.pop(key, Fraction(0))
        if t_c == 0:
            raise ConsistencyError(
                "instance for %r does not contain its target (case %s)" % (key, label))
        return rel.scale(Fraction(-1) / t_c)

    # -- two-point derivation --------------------------------------------------

    def _two_point_candidates(self, beta: Beta) -> List[Key]:
        a, b, _ = beta
        need = 2 * a + 2 * b + 3
        out = []
        for i in range(1, chow.BASIS_SIZE):
            for j in range(i, chow.BASIS_SIZE):
                if CODIM[i] + CODIM[j] == need:
                    out.append((beta, (i, j)))
        return out

    def _ensure_two_point(self, beta: Beta) -> None:
        a, b, c = beta
        if a + b > 2 or c > self.c_max:
            return
        if beta in self._solved_betas or beta in self._solving:
            return
        self._solving.add(beta)
        try:
            for a1 in range(a + 1):
                for b1 in range(b + 1):
                    for c1 in range(c + 1):
                        sub = (a1, b1, c1)
                        if sub != beta and sub != (0, 0, 0):
                            self._ensure_two_point(sub)
            self._solve_two_point(beta)
        finally:
            self._solving.discard(beta)
        self._solved_betas.add(beta)

    def _solve_two_point(self, beta: Beta) -> None:
        open_keys = []
        for key in self._two_point_candidates(beta):
            if key in self.two_point:
                continue
            if self.seeds.lookup(*key) is None:
                open_keys.append(key)
        if not open_keys:
            return
        solver = _GaussSolver(open_keys)
        ctx = _SolverContext(self, frozenset(open_keys))
        for corners, extra in _instance_catalog(beta):
            self.stats["solver_instances"] += 1
            rel = self._instance_expr(corners, extra, beta, ctx)
            if rel.poison:
                continue
            if not rel.coeffs:
                if rel.const != 0:
                    raise ConsistencyError(
                        "inconsistent associativity instance %r %r at %r: residual %s"
                        % (corners, extra, beta, rel.const))
                continue
            try:
                grew = solver.add(rel)
            except ConsistencyError as exc:
                raise ConsistencyError(
                    "%s; offending instance corners=%r extra=%r at %r, "
                    "after %r" % (exc, corners, extra, beta,
                                  self._solver_instances_used[-6:])) from None
            if grew:
                self._solver_instances_used.append((corners, extra, beta))
            if solver.fully_determined():
                break
        solution, undetermined = solver.solve()
        for key, value in solution.items():
            self._store_two_point(key, value, "derived from the associativity equations")
        for key in undetermined:
            self.two_point[key] = Unknown(
                "two-point invariant left undetermined by the associativity system")
            self.two_point_provenance[key] = "underdetermined"

    def _store_two_point(self, key: Key, value: Fraction, note: str) -> None:
        seed = self.seeds.lookup(*key)
        if seed is not None and seed[0] != value:
            raise ConsistencyError(
                "two-point solver contradicts seed at %r: %s vs %s" % (key, value, seed[0]))
        old = self.two_point.get(key)
        if isinstance(old, Fraction) and old != value:
            raise ConsistencyError("two-point solver contradicts itself at %r" % (key,))
        self.two_point[key] = value
        self.two_point_provenance[key] = note
        beta, ins = key
        mkey = (iota_beta(beta), iota_insertions(ins))
        mold = self.two_point.get(mkey)
        if isinstance(mold, Fraction) and mold != value:
            raise ConsistencyError("two-point table not involution-closed at %r" % (mkey,))
        if mold is None and mkey != key:
            self.two_point[mkey] = value
            self.two_point_provenance[mkey] = note + " (involution image)"

    def derive_two_point_table(self, c_max: Optional[int] = None) -> Dict[Key, Value]:
        """Derive every two-point invariant with a + b <= 2 up to the
        truncation order; returns the combined seed + derived table."""
        c_max = self.c_max if c_max is None else c_max
        betas = []
        for a in range(3):
            for b in range(3 - a):
                for c in range(c_max + 1):
                    if (a, b, c) != (0, 0, 0):
                        betas.append((a, b, c))
        betas.sort(key=beta_key)
        table: Dict[Key, Value] = {}
        for beta in betas:
            self._ensure_two_point(beta)
            for key in self._two_point_candidates(beta):
                seed = self.seeds.lookup(*key)
                if seed is not None:
                    table[key] = seed[0]
                else:
                    table[key] = self.two_point.get(
                        key, Unknown("never required nor derived"))
        return table

    # -- public WDVV surface ---------------------------------------------------

    def wdvv_instance(self, i: int, j: int, k: int, l: int,
                      extra: Sequence[int], beta: Beta):
        """The associativity relation for the given corners as an explicit
        linear form: (coefficients over invariant keys, constant).  The
        relation asserts constant + sum coeff * <key> = 0; interior products
        are evaluated by the engine."""
        beta = tuple(beta)
        open_all = _AllTwoPointOpen(self)
        rel = self._instance_expr((i, j, k, l), tuple(sorted(extra)), beta, open_all)
        return rel

    def wdvv_residual(self, i: int, j: int, k: int, l: int,
                      extra: Sequence[int], beta: Beta) -> Value:
        """Numeric residual of one associativity instance (zero when the
        computed invariants satisfy the equation; Unknown if any term is)."""
        beta = tuple(beta)
        ctx = _NumericContext(self)
        rel = self._instance_expr((i, j, k, l), tuple(sorted(extra)), beta, ctx)
        if rel.poison:
            return Unknown(rel.poison)
        return rel.value()


# -- reduction contexts --------------------------------------------------------

def _pure_t4_reason(key: Key) -> str:
    beta, ins = key
    return ("requires <T4^%d>_(%d,%d,%d) seed; pure incidence-class powers "
            "beyond exponent three are not derivable here" % (len(ins), *beta))


class _Context:
    is_solver = False

    def __init__(self, engine: Engine):
        self.engine = engine
        self.cache: Dict[Key, LinExpr] = {}
        self.stack: set = set()

    def is_open(self, key: Key) -> bool:
        return False


class _NumericContext(_Context):
    pass


class _SolverContext(_Context):
    is_solver = True

    def __init__(self, engine: Engine, open_keys: frozenset):
        super().__init__(engine)
        self.open_keys = open_keys

    def is_open(self, key: Key) -> bool:
        return key in self.open_keys


class _AllTwoPointOpen(_Context):
    """Used by the public wdvv_instance: every unseeded two-point key stays
    symbolic so the emitted relation is inspectable."""
    is_solver = True

    def is_open(self, key: Key) -> bool:
        return (len(key[1]) <= 2 and key not in self.engine.two_point
                and self.engine.seeds.lookup(*key) is None)


class _TargetContext(_Context):
    """Wraps another context, additionally keeping one target key symbolic."""

    def __init__(self, base: _Context, target: Key):
        self.engine = base.engine
        self.stack = base.stack
        self.base = base
        self.target = target
        self.is_solver = base.is_solver
        # expressions mentioning the target must not leak into outer caches
        self.cache = _ShieldedCache(base.cache, target)

    def is_open(self, key: Key) -> bool:
        return key == self.target or self.base.is_open(key)


class _ShieldedCache(dict):
    """View of a cache that refuses to store entries mentioning the shield
    key (they are only valid while that key is symbolic)."""

    def __init__(self, base: Dict, shield: Key):
        super().__init__()
        self.base = base
        self.shield = shield

    def get(self, key, default=None):
        hit = super().get(key)
        if hit is not None:
            return hit
        return self.base.get(key, default)

    def __setitem__(self, key, expr: LinExpr):
        if self.shield in expr.coeffs:
            super().__setitem__(key, expr)
        else:
            self.base[key] = expr


# -- exact Gaussian elimination --------------------------------------------------

class _GaussSolver:
    """Incremental exact row reduction over a fixed variable list."""

    def __init__(self, variables: List[Key]):
        self.vars = list(variables)
        self.index = {v: i for i, v in enumerate(self.vars)}
        self.rows: List[Tuple[List[Fraction], Fraction]] = []
        self.pivots: Dict[int, int] = {}

    def add(self, rel: LinExpr) -> bool:
        """Add relation sum coeff*var + const = 0; True if rank grew."""
        row = [Fraction(0)] * len(self.vars)
        for key, c in rel.coeffs.items():
            row[self.index[key]] = c
        const = rel.const
        for col, rix in self.pivots.items():
            if row[col] != 0:
                prow, pconst = self.rows[rix]
                f = row[col]
                row = [r - f * p for r, p in zip(row, prow)]
                const = const - f * pconst
        lead = next((c for c, v in enumerate(row) if v != 0), None)
        if lead is None:
            if const != 0:
                raise ConsistencyError("inconsistent associativity system")
            return False
        inv = Fraction(1) / row[lead]
        row = [v * inv for v in row]
        const = const * inv
        for rix, (prow, pconst) in enumerate(self.rows):
            if prow[lead] != 0:
                f = prow[lead]
                self.rows[rix] = ([p - f * r for p, r in zip(prow, row)], pconst - f * const)
        self.rows.append((row, const))
        self.pivots[lead] = len(self.rows) - 1
        return True

    def fully_determined(self) -> bool:
        return len(self.pivots) == len(self.vars)

    def solve(self):
        """(solved variable -> value, undetermined variables).  A variable
        is determined when its pivot row involves no other variable."""
        solution = {}
        determined = set()
        for col, rix in self.pivots.items():
            row, const = self.rows[rix]
            if all(row[c] == 0 for c in range(len(self.vars)) if c != col):
                solution[self.vars[col]] = -const
                determined.add(col)
        undetermined = [self.vars[c] for c in range(len(self.vars)) if c not in determined]
        return solution, undetermined


# -- instance catalog -------------------------------------------------------------

def _corner_quadruples(total_codim: int):
    seen = set()
    for i in range(1, 5):
        for k in range(1, 5):
            for j in range(1, chow.BASIS_SIZE):
                if j == k:
                    continue
                for l in range(1, chow.BASIS_SIZE):
                    if CODIM[i] + CODIM[j] + CODIM[k] + CODIM[l] != total_codim:
                        continue
                    sig = _instance_signature(i, j, k, l)
                    if sig in seen:
                        continue
                    seen.add(sig)
                    yield (i, j, k, l)


def _instance_catalog(beta: Beta):
    """Candidate associativity instances for the two-point solver at one
    curve class: dimension-balanced corner quadruples, no extra insertions
    first, then a single codimension-2 extra for stubborn systems."""
    a, b, _ = beta
    want = 2 * a + 2 * b + 4
    for corners in _corner_quadruples(want):
        yield corners, ()
    for t in (4, 5, 8):
        # with one extra insertion the corner codimensions drop by cod(t)-1
        for corners in _corner_quadruples(want + 1 - CODIM[t]):
            yield corners, (t,)


def _instance_signature(i, j, k, l):
    lhs = frozenset((tuple(sorted((i, j))), tuple(sorted((k, l)))))
    rhs = frozenset((tuple(sorted((i, k))), tuple(sorted((j, l)))))
    return frozenset((lhs, rhs))

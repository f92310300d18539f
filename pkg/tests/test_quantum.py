from fractions import Fraction

import pytest

from qhilb import chow
from qhilb.chow import CODIM, IOTA, UsageError
from qhilb.coeffring import QSeries
from qhilb.gw_engine import Engine, Unknown
from qhilb.quantum import (
    MissingInvariant,
    QCohVector,
    SmallQuantum,
    _Parser,
    _tokenize,
    gamma,
    load_relations,
    q_of_beta,
    small_product,
    verify_all,
)

C_MAX = 3


@pytest.fixture(scope="module")
def ring(engine):
    return SmallQuantum(engine, C_MAX)


def series(e1, e2, e3, coeff=1, c_max=C_MAX):
    return QSeries.monomial((e1, e2, e3), c_max, Fraction(coeff))


# -- the deformation monomial ---------------------------------------------------

def test_q_of_beta():
    assert q_of_beta((1, 0, 1)) == (0, 1, 1)   # first coordinate rides on q2
    assert q_of_beta((0, 0, 0)) == (0, 0, 0)
    assert q_of_beta((2, 3, 1)) == (3, 2, 1)
    with pytest.raises(UsageError):
        q_of_beta((-1, 0, 0))


# -- small products ---------------------------------------------------------------

def test_product_t4_t4(ring):
    result = ring.basis_product(4, 4)
    want = QCohVector.basis(13, C_MAX) + QCohVector.basis(0, C_MAX).scale(series(1, 1, 2, 2))
    assert result == want


def test_product_unit(ring):
    for i in range(14):
        assert ring.basis_product(0, i) == QCohVector.basis(i, C_MAX)


def test_product_t1_t3(ring):
    want = QCohVector.basis(8, C_MAX) + QCohVector.basis(0, C_MAX).scale(series(1, 0, 1, 2))
    assert ring.basis_product(1, 3) == want


def test_product_reduces_to_cup_at_q_zero(ring):
    for i in range(14):
        for j in range(14):
            assert ring.basis_product(i, j).at_q_zero() == chow.cup_basis(i, j)


def test_product_commutative(ring):
    for i in range(14):
        for j in range(i, 14):
            x = QCohVector.basis(i, C_MAX)
            y = QCohVector.basis(j, C_MAX)
            assert ring.product(x, y) == ring.product(y, x)


def test_product_grading(ring):
    # deg q1 = deg q2 = 2, deg q3 = 0: every term of Ti*Tj is homogeneous
    for i in range(14):
        for j in range(14):
            result = ring.basis_product(i, j)
            for f, s in enumerate(result.coords):
                for (e1, e2, _), coeff in s.terms.items():
                    assert coeff != 0
                    assert CODIM[f] + 2 * (e1 + e2) == CODIM[i] + CODIM[j], (i, j, f)


def test_product_iota_equivariant(ring):
    def swap_series(s):
        return QSeries({(e2, e1, e3): c for (e1, e2, e3), c in s.terms.items()}, s.c_max)

    def iota_vec(v):
        return QCohVector([swap_series(v.coords[IOTA[k]]) for k in range(14)], v.c_max)

    for i in range(14):
        for j in range(14):
            lhs = iota_vec(ring.basis_product(i, j))
            rhs = ring.product(QCohVector.basis(IOTA[i], C_MAX), QCohVector.basis(IOTA[j], C_MAX))
            assert lhs == rhs, (i, j)


def test_product_associative_exhaustive(ring):
    # all 14^3 ordered triples at the working truncation
    basis = [QCohVector.basis(i, C_MAX) for i in range(14)]
    left_tables = [[ring.product(basis[i], basis[j]) for j in range(14)] for i in range(14)]
    for i in range(14):
        for j in range(14):
            for k in range(14):
                lhs = ring.product(left_tables[i][j], basis[k])
                rhs = ring.product(basis[i], left_tables[j][k])
                assert lhs == rhs, (i, j, k)


def test_code_section_example(ring):
    # the section-class product carries the full fiber tail
    t33 = ring.basis_product(3, 3)
    for c in range(1, C_MAX + 1):
        for f, want in ((5, 4), (6, 2), (7, 2), (8, -2), (9, -2)):
            assert t33.coords[f].coeff((0, 0, c)) == want
    assert t33.coords[0].coeff((1, 0, 1)) == 2
    assert t33.coords[0].coeff((0, 1, 1)) == 2


def test_missing_invariant_is_structured():
    # unseeding the fiber-class values starves the product of T3*T3
    eng = Engine(c_max=2, disabled_seed_rules=("s1s2",))
    with pytest.raises(MissingInvariant) as err:
        small_product(eng, 3, 3, 2)
    assert err.value.insertions == (3, 3, 8)
    assert err.value.beta == (0, 0, 1)


# -- relations ---------------------------------------------------------------------

def test_relation_file_parses():
    rels = load_relations()
    assert [r.id for r in rels] == list(range(1, 18))
    assert sum(1 for r in rels if r.text.startswith("iota[")) == 6


def test_parser_rejects_garbage():
    with pytest.raises(UsageError):
        _Parser(_tokenize("T1 *")).parse()
    with pytest.raises(UsageError):
        _Parser(_tokenize("T99")).parse()


def test_all_relations_at_working_truncation(engine):
    residuals = verify_all(engine, C_MAX)
    assert len(residuals) == 17
    for rel_id, res in residuals.items():
        assert res.is_zero(), (rel_id, str(res))


def test_relations_classical_check(engine):
    for rel_id, res in verify_all(engine, 0).items():
        assert res.is_zero(), rel_id


def test_single_relation_verify(engine):
    from qhilb.quantum import verify_relation

    rels = {r.id: r for r in load_relations()}
    assert verify_relation(engine, rels[6], 2).is_zero()
    assert verify_relation(engine, rels[9], 3).is_zero()


# -- gamma series --------------------------------------------------------------------

def test_gamma_vanishes_with_unit_index(engine):
    assert gamma(engine, 0, 3, 3, y_truncation=1, c_max=2).terms == {}


def test_gamma_three_point_part(engine):
    # the n = 0 coefficients are the plain three-point invariants
    g = gamma(engine, 3, 3, 8, y_truncation=0, c_max=2)
    for c in (1, 2):
        assert g.terms[((0, 0, c), (0,) * 10)] == engine.invariant((0, 0, c), (3, 3, 8))
    assert ((0, 0, 1), (0,) * 10) in g.terms


def test_gamma_y_coefficient_matches_recursion(engine):
    # the first-order y13 coefficient is the four-point invariant
    g = gamma(engine, 4, 4, 8, y_truncation=1, c_max=2)
    ydeg = tuple(1 if t == 9 else 0 for t in range(10))  # y13 slot
    for (beta, deg), value in g.terms.items():
        if deg == ydeg:
            direct = engine.invariant(beta, (4, 4, 8, 13))
            assert value == direct


def test_gamma_flags_unknowns():
    eng = Engine(c_max=2)
    g = gamma(eng, 4, 4, 5, y_truncation=2, c_max=2)
    flagged = g.flagged_terms()
    known = g.known_terms()
    assert all(isinstance(v, Unknown) for v in flagged.values())
    for key in known:
        assert key not in flagged


def test_gamma_normalization(engine):
    # a doubled insertion divides by 2! = 2
    g = gamma(engine, 3, 3, 13, y_truncation=2, c_max=2)
    ydeg = tuple(2 if t == 0 else 0 for t in range(10))  # y4^2 slot
    for (beta, deg), value in g.terms.items():
        if deg == ydeg and not isinstance(value, Unknown):
            direct = engine.invariant(beta, (3, 3, 13, 4, 4))
            assert value == Fraction(direct, 2)

"""Weight monoid, s-equivalence classes, free-group words, parameter group."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from gfft.algebra import (
    GroupWord,
    LawRow,
    MonoidElem,
    SeqClass,
    TransformClass,
    barwedge,
    monoid_op,
    q_group_laws,
    word_eval,
    word_reduce,
    xi,
    xi_inv,
)
from gfft.cylinder import (
    CylinderFunctional,
    GaussPolyFactor,
    OrthogonalFamily,
    ProductGaussPoly,
    cosine_basis,
    max_param_diff,
)
from gfft.grid_core import GridFunction, HSeq, TimeGrid, s_combine_seq
from gfft.transform import QElem

from .oracles import scan_reduce

GRID = TimeGrid(1.0, 256)


def _nonneg_values():
    return hnp.arrays(
        np.float64,
        GRID.N + 1,
        elements=st.floats(0.0, 3.0, allow_nan=False, allow_infinity=False, width=64),
    )


def _gf(c):
    return GridFunction.constant(GRID, c)


# -- monoid -------------------------------------------------------------------


def test_monoid_rejects_negative_rep():
    vals = np.full(GRID.N + 1, -1.0)
    with pytest.raises(ValueError):
        MonoidElem(GridFunction(GRID, vals))


def test_monoid_from_weight_takes_abs():
    h = GridFunction.from_callable(GRID, lambda t: np.sin(9 * t))
    m = MonoidElem.from_weight(h)
    assert np.array_equal(m.rep.values, np.abs(h.values))


def test_monoid_identity():
    e = MonoidElem.identity(GRID)
    assert e.is_identity
    x = MonoidElem.from_weight(_gf(2.0))
    assert monoid_op(x, e).same(x, tol=0.0)
    assert monoid_op(e, x).same(x, tol=0.0)


@settings(max_examples=40, deadline=None)
@given(v1=_nonneg_values(), v2=_nonneg_values())
def test_monoid_commutative(v1, v2):
    x = MonoidElem(GridFunction(GRID, v1))
    y = MonoidElem(GridFunction(GRID, v2))
    assert monoid_op(x, y).same(monoid_op(y, x), tol=0.0)


@settings(max_examples=40, deadline=None)
@given(v1=_nonneg_values(), v2=_nonneg_values(), v3=_nonneg_values())
def test_monoid_associative(v1, v2, v3):
    x, y, z = (MonoidElem(GridFunction(GRID, v)) for v in (v1, v2, v3))
    lhs = monoid_op(monoid_op(x, y), z)
    rhs = monoid_op(x, monoid_op(y, z))
    assert lhs.same(rhs, tol=1e-12)


# -- classes ------------------------------------------------------------------


def test_class_canonical_rep():
    h = GridFunction.from_callable(GRID, lambda t: 1.0 + t)
    c = 0.6
    split = HSeq.of(c * h, math.sqrt(1 - c * c) * h)
    assert SeqClass.from_weight(h).same_class(SeqClass.from_seq(split))
    assert not SeqClass.from_weight(h).same_class(SeqClass.from_weight(2.0 * h))


def test_class_keeps_witness():
    H = HSeq.of(_gf(3.0), _gf(4.0))
    c = SeqClass.from_seq(H)
    assert len(c.witness) == 2
    assert np.allclose(c.rep.values, 5.0)


def test_barwedge_composes_classes():
    t1 = TransformClass(2.0, SeqClass.from_weight(_gf(3.0)))
    t2 = TransformClass(2.0, SeqClass.from_weight(_gf(4.0)))
    t = barwedge(t1, t2)
    assert np.allclose(t.cls.rep.values, 5.0)
    assert len(t.cls.witness) == 2


def test_barwedge_needs_common_q():
    t1 = TransformClass(2.0, SeqClass.from_weight(_gf(1.0)))
    t2 = TransformClass(3.0, SeqClass.from_weight(_gf(1.0)))
    with pytest.raises(ValueError):
        barwedge(t1, t2)


def test_transform_class_validation():
    with pytest.raises(ValueError):
        TransformClass(0.0, SeqClass.from_weight(_gf(1.0)))


def test_xi_is_structure_preserving():
    t1 = TransformClass(2.0, SeqClass.from_seq(HSeq.of(_gf(1.0), _gf(2.0))))
    t2 = TransformClass(2.0, SeqClass.from_weight(_gf(2.0)))
    lhs = xi(barwedge(t1, t2))
    rhs = SeqClass.from_seq(HSeq.of(xi(t1).rep, xi(t2).rep))
    assert lhs.same_class(rhs, tol=1e-12)


def test_xi_inv_roundtrip():
    c = SeqClass.from_weight(_gf(1.5))
    t = xi_inv(c, 2.0)
    assert t.q == 2.0
    assert xi(t).same_class(c)


# -- free-group words ----------------------------------------------------------


def _letters(ids_signs):
    # small pool of distinct classes
    pool = [SeqClass.from_weight(_gf(c)) for c in (1.0, 2.0, 3.0)]
    return tuple((s, pool[i]) for i, s in ids_signs)


def test_word_validation():
    with pytest.raises(ValueError):
        GroupWord(0.0)
    with pytest.raises(ValueError):
        GroupWord(2.0, ((2, SeqClass.from_weight(_gf(1.0))),))


def test_word_reduce_cancels_inverse_pair():
    w = GroupWord(2.0, _letters([(0, 1), (0, -1)]))
    assert len(word_reduce(w)) == 0


def test_word_reduce_nested_cancellation():
    # a b b^-1 a^-1 collapses entirely
    w = GroupWord(2.0, _letters([(0, 1), (1, 1), (1, -1), (0, -1)]))
    assert len(word_reduce(w)) == 0


def test_word_reduce_keeps_distinct_classes():
    w = GroupWord(2.0, _letters([(0, 1), (1, -1)]))
    assert len(word_reduce(w)) == 2


@settings(max_examples=60, deadline=None)
@given(
    data=st.lists(
        st.tuples(st.integers(0, 2), st.sampled_from([1, -1])),
        min_size=0,
        max_size=12,
    )
)
def test_word_reduce_matches_scan_oracle(data):
    w = GroupWord(2.0, _letters(data))
    fast = word_reduce(w)
    slow = scan_reduce(w)
    assert len(fast) == len(slow)
    for (s1, c1), (s2, c2) in zip(fast.letters, slow.letters):
        assert s1 == s2
        assert c1.same_class(c2, tol=0.0)
    # reduced words are fixed points
    again = word_reduce(fast)
    assert len(again) == len(fast)


def _word_functional():
    g = TimeGrid(1.0, 1024)
    fam = OrthogonalFamily((cosine_basis(1, g),))
    F = CylinderFunctional(fam, ProductGaussPoly((GaussPolyFactor((1.0, 0.3), 1.0, 0.1),)))
    return g, F


def test_word_eval_inverse_pair_restores():
    g, F = _word_functional()
    c = SeqClass.from_weight(1.2 * cosine_basis(5, g))
    w = GroupWord(2.0, ((1, c), (-1, c)))
    out = word_eval(w, F)
    assert max_param_diff(out.f, F.f) <= 1e-9


def test_word_eval_matches_reduced_word():
    g, F = _word_functional()
    c1 = SeqClass.from_weight(1.2 * cosine_basis(5, g))
    c2 = SeqClass.from_weight(0.7 * cosine_basis(6, g))
    w = GroupWord(2.0, ((1, c1), (1, c2), (-1, c2), (1, c1)))
    out_full = word_eval(w, F)
    out_red = word_eval(word_reduce(w), F)
    assert len(word_reduce(w)) == 2
    assert max_param_diff(out_full.f, out_red.f) <= 1e-9


def test_word_eval_empty_is_identity():
    _, F = _word_functional()
    assert word_eval(GroupWord(2.0), F) is F


# -- parameter group -----------------------------------------------------------


def test_q_group_laws_all_pass_on_dyadic_sample():
    sample = [QElem(k / 8.0) for k in (-12, -5, -1, 1, 3, 8, 20)]
    rows = q_group_laws(sample)
    assert len(rows) == 4 * len(sample)
    assert all(isinstance(r, LawRow) for r in rows)
    assert all(r.passed for r in rows)
    assert all(r.residual == 0.0 for r in rows)
    laws = {r.law for r in rows}
    assert laws == {"identity", "inverse", "commutativity", "associativity"}


def test_q_group_laws_needs_three_points():
    with pytest.raises(ValueError):
        q_group_laws([QElem(1.0), QElem(2.0)])

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from couplekit import (
    INF,
    DimensionMismatchError,
    Functional,
    LinearMap,
    PreconditionError,
    SubcoupleSpec,
    dual_k_identity,
    embed_linf,
    hahn_banach_extend,
    is_b_quotient,
    is_b_subcouple,
    k_value,
    l1_linf,
    make_couple,
    operator_norm_b_lower,
    operator_norm_l,
    operator_norm_l_bounds,
    quotient_couple,
    retract_check,
)
from couplekit.couple import dual_side_norm
from couplekit.structure import (
    embedded_k_inf,
    k_eval,
    quotient_map,
    sign_pattern_dual_sup,
    subcouple_k,
)

from oracles import l1_linf_dual_sup

L2, L3 = l1_linf(2), l1_linf(3)


def lmap(m, src, tgt=None):
    return LinearMap(np.asarray(m, dtype=float), src, tgt or src)


# mapping norms


def test_operator_norm_l_examples():
    assert operator_norm_l(lmap(2 * np.eye(3), L3)) == 2
    assert operator_norm_l(lmap([[0.5, 0.5], [0.5, 0.5]], L2)) == 1
    assert operator_norm_l(lmap(np.zeros((2, 2)), L2)) == 0


def test_operator_norm_l_interval_for_l2():
    c = make_couple(2, [1, 1], [1, 1], 2, 2)
    m = np.array([[1.0, 2.0], [0.0, 1.0]])
    b = operator_norm_l_bounds(lmap(m, c))
    spectral = np.linalg.norm(m, 2)
    assert b.lower <= spectral * (1 + 1e-12) and spectral <= b.upper * (1 + 1e-12)


def test_operator_norm_b_lower_examples():
    samples = list(np.eye(3)) + [np.array([3.0, 1.0, 2.0])]
    assert operator_norm_b_lower(lmap(np.eye(3), L3), samples) == 1
    assert operator_norm_b_lower(lmap(2 * np.eye(3), L3), samples) == 2
    with pytest.raises(PreconditionError):
        operator_norm_b_lower(lmap(np.eye(3), L3), [np.zeros(3)])


def test_mapping_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        lmap(np.eye(2), L3)


# subcouples and quotients


def test_coordinate_subcouple_is_b():
    spec = SubcoupleSpec(L2, keep=[0])
    assert is_b_subcouple(spec, samples=[np.array([1.0, 0.0])]).holds
    assert subcouple_k(spec, [1, 0], 0.5) == 0.5
    assert is_b_subcouple(SubcoupleSpec(L3, keep=[0, 1, 2])).holds


def test_spanned_subcouple_is_not_b():
    spec = SubcoupleSpec(L2, basis=[[2, 1]])
    res = is_b_subcouple(spec)
    assert not res.holds
    a, t = res.witness
    assert subcouple_k(spec, a, t) > k_eval(L2, a, t)


def test_diagonal_span_is_b():
    # for (1, 1) the optimal ambient split already lies in the span
    assert is_b_subcouple(SubcoupleSpec(L2, basis=[[1, 1]])).holds


def test_subcouple_brute_force_at_n2():
    spec = SubcoupleSpec(L2, basis=[[2, 1]])
    cs = np.linspace(-2, 2, 4001)
    a = np.array([2.0, 1.0])
    for t in (0.5, 1.5, 3.0):
        brute = min(np.abs(1 - c) * 3 + t * np.abs(c) * 2 for c in cs)
        assert subcouple_k(spec, a, t) == pytest.approx(brute, abs=1e-3)


def test_quotient_examples():
    assert quotient_couple(L2, [1]) == l1_linf(1)
    assert quotient_couple(L2, []) == L2
    with pytest.raises(PreconditionError):
        quotient_couple(L2, [0, 1])
    assert quotient_map(L3, [1]).matrix.shape == (2, 3)


@pytest.mark.parametrize("kill", [[0], [1, 3], [0, 1, 2]])
def test_quotient_is_b_for_coordinate_kills(kill):
    c = make_couple(4, [1, 2, 3, 4], [4, 1, 1, 2], 1, INF)
    assert is_b_quotient(c, kill).holds


def test_quotient_brute_force_infimum():
    # inf over the killed coordinate on a grid never beats zero fill
    a = np.array([3.0, -1.0, 2.0])
    for t in (0.5, 1, 2, 4):
        kq = k_eval(quotient_couple(L3, [1]), a[[0, 2]], t)
        grid = min(k_eval(L3, np.array([3.0, c, 2.0]), t) for c in np.linspace(-4, 4, 81))
        assert kq == pytest.approx(grid, rel=1e-12)


# retracts


def test_retract_identity():
    idm = lmap(np.eye(2), L2)
    for cat in ("l", "b", "lb", "bl"):
        assert retract_check(idm, idm, cat).ok


def test_retract_coordinate_injection_projection():
    spec = SubcoupleSpec(make_couple(3, [1, 2, 1], [2, 1, 3], 1, INF), keep=[0, 2])
    rep = retract_check(spec.injection(), spec.projection(), "lb")
    assert rep.ok and rep.clause is None


def test_retract_not_identity():
    idm = lmap(np.eye(2), L2)
    rep = retract_check(idm, lmap(2 * np.eye(2), L2), "l")
    assert rep == (False, "not identity")


# Hahn-Banach


def test_hahn_banach_examples():
    spec = SubcoupleSpec(L2, keep=[0])
    S = hahn_banach_extend(Functional([1.0], spec), L2, 1, 1)
    assert S([1, 0]) == 1
    assert dual_side_norm(L2, 0, S.coeffs) <= 1 and dual_side_norm(L2, 1, S.coeffs) <= 1
    zero = hahn_banach_extend(Functional([0.0], spec), L2, 1, 1)
    assert not np.any(zero.coeffs)
    with pytest.raises(PreconditionError):
        hahn_banach_extend(Functional([2.0], spec), L2, 1, 1)


def test_hahn_banach_general_direction():
    spec = SubcoupleSpec(L3, basis=[[1, 2, -1]])
    S = hahn_banach_extend(Functional([1.0], spec), L3, 1, 1)
    assert S([1, 2, -1]) == pytest.approx(1, rel=1e-9)
    assert dual_side_norm(L3, 0, S.coeffs) <= 1 + 1e-9
    assert dual_side_norm(L3, 1, S.coeffs) <= 1 + 1e-9


# duality and embedding


def test_duality_examples():
    res = dual_k_identity(L3, [3, 1, 2], 1)
    assert res.k_value == pytest.approx(5 / 3, rel=1e-9)
    assert res.dual_value == pytest.approx(5 / 3, rel=1e-6)
    assert dual_k_identity(L3, [0, 0, 0], 1)[:2] == (0.0, 0.0)
    one = make_couple(1, [1], [1], 1, 1)
    k, d, _ = dual_k_identity(one, [1], 1)
    assert k == pytest.approx(0.5, rel=1e-9) and d == pytest.approx(0.5, rel=1e-6)


def test_sign_pattern_oracle_example():
    assert sign_pattern_dual_sup(L3, [3, 1, 2], 1) == pytest.approx(5 / 3)
    assert l1_linf_dual_sup([3, 1, 2], 1) == pytest.approx(5 / 3)


def test_embed_linf_examples():
    samples = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [1, 0, 1]]
    emb = embed_linf(L3, samples)
    assert embedded_k_inf(emb, [3, 1, 2], 1) == pytest.approx(5 / 3, rel=1e-12)
    assert not np.any(emb([0, 0, 0]))
    only = embed_linf(L3, [[1, 0, 0]])
    assert embedded_k_inf(only, [0, 0, 1], 1) == 0 < k_value(L3, [0, 0, 1], 1, INF)
    with pytest.raises(ValueError):
        embed_linf(L3, np.zeros((0, 3)))


# properties


@st.composite
def pl_couple(draw, n=None):
    n = n or draw(st.integers(1, 4))
    w = st.lists(st.floats(0.2, 5), min_size=n, max_size=n)
    p0 = draw(st.sampled_from([1.0, INF]))
    p1 = draw(st.sampled_from([1.0, INF]))
    return make_couple(n, draw(w), draw(w), p0, p1)


@given(pl_couple(), st.data())
@settings(max_examples=30)
def test_b_lower_never_exceeds_l_norm(c, data):
    m = np.array(data.draw(st.lists(st.floats(-2, 2), min_size=c.n * c.n, max_size=c.n * c.n)))
    T = lmap(m.reshape(c.n, c.n), c)
    samples = list(np.eye(c.n)) + [np.arange(1.0, c.n + 1)]
    if not np.any(m):
        return
    assert operator_norm_b_lower(T, samples, 2.0 ** np.arange(-3, 4)) <= operator_norm_l(T) * (1 + 1e-9) + 1e-12


@given(pl_couple(), st.floats(0.1, 10), st.data())
@settings(max_examples=25)
def test_ambient_k_never_exceeds_subcouple_k(c, t, data):
    keep = data.draw(st.lists(st.integers(0, c.n - 1), min_size=1, unique=True))
    spec = SubcoupleSpec(c, keep=keep)
    a = np.zeros(c.n)
    a[keep] = data.draw(st.lists(st.floats(-5, 5), min_size=len(keep), max_size=len(keep)))
    assert k_eval(c, a, t) <= subcouple_k(spec, a, t) * (1 + 1e-12) + 1e-15


@given(pl_couple(n=3), st.floats(0.2, 5), st.floats(0.2, 5), st.data())
@settings(max_examples=15)
def test_hahn_banach_bounds(c, om0, om1, data):
    v = np.array(data.draw(st.lists(st.floats(-3, 3), min_size=3, max_size=3)))
    if np.linalg.norm(v) < 1e-3:
        return
    spec = SubcoupleSpec(c, basis=[v])
    from couplekit.structure import hahn_banach_precondition

    val, _ = hahn_banach_precondition(Functional([1.0], spec), c, om0, om1)
    T = Functional([0.99 / val], spec)
    S = hahn_banach_extend(T, c, om0, om1)
    assert S(v) == pytest.approx(T(v), rel=1e-8)
    assert dual_side_norm(c, 0, S.coeffs) <= om0 * (1 + 1e-9)
    assert dual_side_norm(c, 1, S.coeffs) <= om1 * (1 + 1e-9)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from couplekit import (
    INF,
    DominationError,
    OrbitProblem,
    PreconditionError,
    dominates,
    fundamental_decomposition,
    gamma_estimate,
    hlp_construct,
    hlp_factorization,
    k_l1_linf,
    l1_linf,
    level_interp_operator,
    make_couple,
    min_kernel_check,
    operator_norm_l,
)
from couplekit.kfun import j_functional, k_value
from couplekit.orbit import hlp_certificate, level_interp_matrix, level_majorant

from oracles import is_majorized, lcm_value


def dom(a, b):
    return dominates(OrbitProblem(l1_linf(len(a)), l1_linf(len(b)), a, b))


def test_dominates_examples():
    assert dom([3, 1], [2, 2]).holds
    res = dom([1, 1], [3, 0])
    assert not res and res.witness_t == 1.0
    same = dom([3, 1, 2], [3, 1, 2])
    assert same.holds and same.margin == 0.0 and same.exact


def test_dominates_sampled_route():
    c = make_couple(2, [1, 1], [1, 1], 2, 2)
    assert dominates(OrbitProblem(c, c, [3, 1], [1, 3])).holds
    res = dominates(OrbitProblem(c, c, [1, 1], [2, 0]))
    assert not res and not res.exact


def test_hlp_examples():
    T = hlp_construct([3, 1], [2, 2]).matrix
    np.testing.assert_allclose(T, [[0.5, 0.5], [0.5, 0.5]])
    np.testing.assert_array_equal(hlp_construct([3, 1, 2], [3, 1, 2]).matrix, np.eye(3))
    np.testing.assert_allclose(hlp_construct([2, 0], [1, 0]).matrix, np.diag([0.5, 0.0]))


def test_hlp_rejects_non_dominating_pair():
    with pytest.raises(DominationError) as info:
        hlp_construct([1, 1], [3, 0])
    assert info.value.witness_t == 1


def test_hlp_factorization_reassembles():
    f = hlp_factorization([5, -1, 2, 0], [-2, 2, 2, 1])
    assert f.n_transforms <= 3
    m = f.matrix
    np.testing.assert_allclose(m @ [5, -1, 2, 0], [-2, 2, 2, 1], atol=1e-12)


def test_hlp_rectangular():
    T = hlp_construct([4, 1, 1], [3, 2])
    assert T.matrix.shape == (2, 3)
    cert = hlp_certificate(T, [4, 1, 1], [3, 2])
    assert cert["reconstruction_error"] <= 1e-12
    assert cert["max_column_sum"] <= 1 + 1e-12 and cert["max_row_sum"] <= 1 + 1e-12


def test_level_interp_examples():
    x = np.array([1.0, 2.0, 3.0])
    concave = np.array([1.0, 2.0, 2.5])
    np.testing.assert_array_equal(level_interp_matrix(x, concave), np.eye(3))
    # a nonincreasing input is lifted to its maximum, not left alone
    np.testing.assert_array_equal(level_interp_operator(x, [3, 2, 1], [3, 2, 1]), [3, 3, 3])
    a = np.array([1.0, 3.0, 2.0])
    # the image of a is its least concave majorant on the grid
    np.testing.assert_allclose(level_interp_operator(x, a, a), [1, 3, 3])
    np.testing.assert_allclose(level_interp_operator(x, a, np.full(3, 7.0)), 7.0)
    with pytest.raises(ValueError):
        level_interp_operator(x, [-1, 0, 1], a)
    with pytest.raises(ValueError):
        level_interp_operator(x, a, [1, 2])


def test_min_kernel_examples():
    assert min_kernel_check([1, 1], [1, 2], [1, 0], [0, 1]) == (True, None)
    assert min_kernel_check([1, 1], [1, 2], [1, 0], [0, 1.5]) == (False, 1)
    assert min_kernel_check([1, 2], [3, 1], [0, 0], [0, 0]) == (True, None)
    assert min_kernel_check([1, 2], [3, 1], [0, 0], [0, 1e-300]) == (False, 1)
    assert min_kernel_check([1, 2, 3], [1, 2, 3], [4, -1, 2], [4, -1, 2]) == (True, None)


def test_fundamental_decomposition_examples():
    atom = fundamental_decomposition(l1_linf(2), [1, 0], level_range=(0, 0))
    assert atom.levels == [0] and atom.c_meas == 1.0
    np.testing.assert_array_equal(atom.parts[0], [1, 0])
    d = fundamental_decomposition(l1_linf(3), [3, 1, 2], level_range=(-4, 4))
    np.testing.assert_allclose(d.recompose(), [3, 1, 2], atol=1e-12)
    assert d.c_meas <= 4
    for nu, u, r in zip(d.levels, d.parts, d.ratios):
        t = d.t(nu)
        assert j_functional(l1_linf(3), u, t) == pytest.approx(r * k_l1_linf([3, 1, 2], t))
    with pytest.raises(PreconditionError):
        fundamental_decomposition(l1_linf(2), [0, 0])


def test_gamma_examples():
    atoms = list(np.eye(3))
    assert gamma_estimate(l1_linf(3), atoms) == pytest.approx(1.0)
    scalar = make_couple(1, [2.0], [0.5], 1, INF)
    assert gamma_estimate(scalar, [np.array([1.0])]) == pytest.approx(1.0, rel=1e-8)
    with pytest.raises(PreconditionError):
        gamma_estimate(l1_linf(2), [])


def test_gamma_monotone_when_samples_grow(rng):
    c = l1_linf(3)
    first = list(rng.normal(size=(2, 3)))
    more = first + list(rng.normal(size=(2, 3)))
    assert gamma_estimate(c, more) >= gamma_estimate(c, first)


# properties

vec = arrays(np.float64, st.integers(1, 6), elements=st.floats(-10, 10))


@given(vec)
def test_dominates_reflexive(a):
    assert dom(a, a).holds


@given(vec, vec, vec)
def test_dominates_transitive(a, b, c):
    if dom(a, b).holds and dom(b, c).holds:
        assert dom(a, c).holds


@given(vec, vec, st.randoms(use_true_random=False))
def test_dominates_rearrangement_invariant(a, b, rnd):
    perm = list(range(b.size))
    rnd.shuffle(perm)
    assert dom(a, b).holds == dom(-a[::-1], b[perm]).holds


int_vec = arrays(np.float64, st.integers(1, 6), elements=st.integers(-6, 6).map(float))


@given(int_vec, int_vec)
def test_dominates_matches_partial_sums(a, b):
    assert dom(a, b).holds == is_majorized(b, a, tol=0.0)


@st.composite
def dominating_pair(draw):
    a = draw(arrays(np.float64, st.integers(1, 8), elements=st.floats(-10, 10)))
    n_b = draw(st.integers(1, 8))
    # b built as a doubly substochastic image of a
    raw = draw(arrays(np.float64, (n_b, a.size), elements=st.floats(0, 1)))
    m = raw / max(1.0, raw.sum(axis=0).max(), raw.sum(axis=1).max())
    signs = draw(arrays(np.float64, n_b, elements=st.sampled_from([-1.0, 1.0])))
    return a, signs * (m @ np.abs(a))


@given(dominating_pair())
def test_hlp_postconditions(pair):
    a, b = pair
    T = hlp_construct(a, b)
    f = hlp_factorization(a, b)
    scale = max(1.0, np.abs(a).sum())
    np.testing.assert_allclose(T(a), b, atol=1e-10 * scale)
    assert np.abs(T.matrix).sum(axis=0).max() <= 1 + 1e-12
    assert np.abs(T.matrix).sum(axis=1).max() <= 1 + 1e-12
    assert f.n_transforms <= max(a.size, b.size) - 1
    assert operator_norm_l(T) <= 1 + 1e-12
    for t in 2.0 ** np.arange(-3, 5):
        assert k_l1_linf(T(a), t) <= k_l1_linf(a, t) * (1 + 1e-12) + 1e-12


@given(dominating_pair())
def test_hlp_agrees_with_min_kernel(pair):
    # equal weights: the kernel is all ones and the condition reads |b(m)| <= ||a||_1
    a, b = pair
    n = max(a.size, b.size)
    pa, pb = np.pad(a, (0, n - a.size)), np.pad(hlp_construct(a, b)(a), (0, n - b.size))
    ok, _ = min_kernel_check(np.ones(n), np.ones(n), pa, pb * (1 - 1e-12))
    assert ok


@given(arrays(np.float64, st.integers(1, 10), elements=st.floats(0, 10)),
       arrays(np.float64, 10, elements=st.floats(-5, 5)))
def test_level_interp_properties(a, abar):
    n = a.size
    x = np.arange(1.0, n + 1)
    abar = abar[:n]
    M = level_interp_matrix(x, a)
    hat, _ = level_majorant(x, a)
    np.testing.assert_allclose(M @ a, hat, atol=1e-12 * max(1.0, a.max()))
    for i in range(n):
        assert hat[i] == pytest.approx(
            lcm_value(list(zip(x, a)), x[i], anchored=False), abs=1e-12 * max(1.0, a.max())
        )
    out = M @ abar
    # norm at most one on both l_inf(1) and l_inf(1/x)
    assert np.abs(out).max() <= np.abs(abar).max() * (1 + 1e-12) + 1e-300
    assert np.max(np.abs(out) / x) <= np.max(np.abs(abar) / x) * (1 + 1e-12) + 1e-300


@given(arrays(np.float64, st.integers(1, 5), elements=st.floats(-5, 5)).filter(lambda a: np.any(np.abs(a) > 1e-3)))
@settings(max_examples=25)
def test_decomposition_recomposes(a):
    c = l1_linf(a.size)
    d = fundamental_decomposition(c, a)
    np.testing.assert_allclose(d.recompose(), a, atol=1e-8 * np.abs(a).sum())
    for nu, u, r in zip(d.levels, d.parts, d.ratios):
        t = d.t(nu)
        assert j_functional(c, u, t) <= r * k_value(c, a, t) * (1 + 1e-9) + 1e-15

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import polynomial_corpus
from hyperlab import generators as gen
from hyperlab.errors import BadK, DegenerateDirection, DimensionMismatch, HomogeneityError, NotRealRooted
from hyperlab.hyperpoly import (
    COUNTEREXAMPLE,
    PASSED,
    HomPoly,
    char_roots,
    char_roots_batch,
    check_hyperbolic,
    cone_membership,
    evaluate,
    lipschitz_estimate,
    localization,
    restrict_line,
    sigma_k,
)

L3 = gen.lorentzian(3)
E1 = np.array([1.0, 0.0, 0.0])
CORPUS = polynomial_corpus()


def test_eval_examples():
    assert evaluate(L3, [2, 1, 1]) == 2.0
    assert evaluate(L3, [0, 0, 0]) == 0.0
    assert evaluate(gen.herm_det(2), gen.herm_coords(np.diag([3.0, 5.0]))) == pytest.approx(15.0)


def test_restrict_line_examples():
    np.testing.assert_allclose(restrict_line(L3, [0, 3, 4], E1).coeffs, [0.0, -25.0])
    f = gen.gk_compose(2, 3)
    v = np.ones(3)
    # x = v gives (T - 1)^d, x = 0 gives T^d
    np.testing.assert_allclose(restrict_line(f, v, v).coeffs, [-3.0, 3.0, -1.0], atol=1e-14)
    np.testing.assert_allclose(restrict_line(f, np.zeros(3), v).coeffs, [0.0, 0.0, 0.0])


def test_char_roots_examples():
    np.testing.assert_allclose(char_roots(L3, E1, [0, 3, 4]).values, [5.0, -5.0], atol=1e-12)
    for name, f, v in CORPUS:
        np.testing.assert_allclose(char_roots(f, v, v).values, np.ones(f.degree), atol=1e-6, err_msg=name)
    herm = char_roots(gen.herm_det(2), gen.identity_coords(2), gen.herm_coords(np.diag([3.0, 5.0])))
    np.testing.assert_allclose(herm.values, [5.0, 3.0], atol=1e-12)


def test_check_hyperbolic_examples():
    L4 = gen.lorentzian(4)
    assert check_hyperbolic(L4, [1, 0, 0, 0], nsamples=500, seed=0).verdict == PASSED
    bad = check_hyperbolic(L4, [0, 1, 0, 0], nsamples=500, seed=0)
    assert bad.verdict == COUNTEREXAMPLE
    assert bad.worst_defect > 1e-9 and bad.counterexample is not None
    # the explicit point e3: f(e3 - T e2) = -1 - T^2
    at_e3 = check_hyperbolic(L4, [0, 1, 0, 0], nsamples=0, points=[[0, 0, 1, 0]])
    assert at_e3.verdict == COUNTEREXAMPLE
    assert at_e3.worst_defect == pytest.approx(1.0)
    prod = HomPoly(2, 2, {(1, 1): 1.0})
    assert check_hyperbolic(prod, [1, 1], nsamples=200).passed
    np.testing.assert_allclose(char_roots(prod, [1, 1], [0.3, -2.0]).values, [0.3, -2.0], atol=1e-12)


def test_corpus_is_hyperbolic():
    for name, f, v in CORPUS:
        rep = check_hyperbolic(f, v, nsamples=300, radius=3.0, seed=1)
        assert rep.passed, name


def test_report_is_reproducible():
    a = check_hyperbolic(gen.lorentzian(4), [0, 1, 0, 0], nsamples=100, seed=3).to_dict()
    b = check_hyperbolic(gen.lorentzian(4), [0, 1, 0, 0], nsamples=100, seed=3).to_dict()
    assert a == b
    assert "Monte-Carlo" in a["note"] or "sampl" in a["note"].lower()


def test_cone_membership_examples():
    assert cone_membership(L3, E1, [2, 1, 0])
    assert cone_membership(L3, E1, E1)
    assert not cone_membership(L3, E1, [1, 2, 0])


def test_sigma_k_examples():
    assert sigma_k(L3, E1, [0, 3, 4], 1) == pytest.approx(5.0)
    assert sigma_k(L3, E1, [0, 3, 4], 2) == pytest.approx(0.0, abs=1e-12)
    f = gen.gk_compose(2, 4)
    for k in range(1, f.degree + 1):
        assert sigma_k(f, np.ones(4), np.ones(4), k) == pytest.approx(k, abs=1e-6)
    with pytest.raises(BadK):
        sigma_k(L3, E1, [0, 3, 4], 3)


def test_localization_examples():
    loc = localization(L3, [1, 1, 0], E1)
    assert loc.p == 1
    assert loc.floc == HomPoly(3, 1, {(1, 0, 0): 2.0, (0, 1, 0): -2.0})
    loc0 = localization(L3, [2, 1, 1])
    assert loc0.p == 0 and loc0.floc == HomPoly(3, 0, {(0, 0, 0): 2.0})
    loc_origin = localization(L3, [0, 0, 0], E1)
    assert loc_origin.p == 2 and loc_origin.floc == L3


def test_localization_order_is_root_multiplicity():
    # gk1_3 = Y1 Y2 Y3 has a root of multiplicity 2 at x0 = (0, 0, 1) w.r.t. (1,1,1)
    f = gen.gk_compose(1, 3)
    loc = localization(f, [0.0, 0.0, 1.0], np.ones(3))
    assert loc.p == 2
    assert loc.floc == HomPoly(3, 2, {(1, 1, 0): 1.0})


def test_errors():
    with pytest.raises(HomogeneityError):
        HomPoly(2, 2, {(1, 0): 1.0})
    with pytest.raises(DegenerateDirection):
        char_roots(L3, [1, 1, 0], [1, 0, 0])
    with pytest.raises(DimensionMismatch):
        char_roots(L3, [1, 0], [1, 0, 0])
    with pytest.raises(NotRealRooted) as info:
        char_roots_batch(gen.lorentzian(4), [0, 1, 0, 0], [[1, 0, 0, 0], [0, 0, 1, 0]])
    assert info.value.index == 1


def test_lipschitz_estimate_stabilizes():
    for name, f, v in CORPUS[:8]:
        a = lipschitz_estimate(f, v, npairs=1000, seed=0)
        b = lipschitz_estimate(f, v, npairs=2000, seed=0)
        assert abs(b - a) <= 0.1 * a, name


def test_exact_multiple_roots():
    # Y1..Y5 and the pair sums of four variables at integer points, where roots repeat
    f, v = gen.gk_compose(1, 5), np.ones(5)
    x = np.array([0.0, 0.0, 2.0, 2.0, 2.0])
    np.testing.assert_allclose(char_roots(f, v, x).values, [2, 2, 2, 0, 0], atol=1e-6)
    np.testing.assert_allclose(char_roots(f, v, -x).values, [0, 0, -2, -2, -2], atol=1e-6)
    g = gen.gk_compose(2, 4)
    y = np.array([-1.0, 3.0, 0.0, 0.0])
    np.testing.assert_allclose(char_roots(g, np.ones(4), y).values, [1.5, 1.5, 1, 0, -0.5, -0.5], atol=1e-6)


# property tests over the corpus

corpus_index = st.integers(0, len(CORPUS) - 1)
# generic points from a seeded generator; exact multiple roots are covered separately
vec = st.integers(0, 2**32 - 1).map(lambda seed: np.random.default_rng(seed).uniform(-3, 3, size=5))


def _pt(x, f):
    return np.asarray(x[: f.nvars], dtype=float)


@settings(max_examples=150, deadline=None)
@given(corpus_index, vec, st.floats(0, 4), st.floats(-3, 3))
def test_homogeneity_identities(i, x, r, s):
    name, f, v = CORPUS[i]
    x = _pt(x, f)
    lam = char_roots(f, v, x).values
    np.testing.assert_allclose(char_roots(f, v, r * x + s * v).values, r * lam + s, atol=1e-8)
    np.testing.assert_allclose(char_roots(f, v, -x).values, -lam[::-1], atol=1e-8)


@settings(max_examples=150, deadline=None)
@given(corpus_index, vec, vec, st.floats(0, 1))
def test_extreme_roots_convexity(i, x, y, w):
    name, f, v = CORPUS[i]
    x, y = _pt(x, f), _pt(y, f)
    lx, ly, lw = char_roots_batch(f, v, np.array([x, y, w * x + (1 - w) * y]))
    scale = max(1.0, np.abs(np.r_[lx, ly]).max())
    assert lw[-1] >= w * lx[-1] + (1 - w) * ly[-1] - 1e-8 * scale
    assert lw[0] <= w * lx[0] + (1 - w) * ly[0] + 1e-8 * scale


@settings(max_examples=150, deadline=None)
@given(corpus_index, vec, vec, st.floats(0, 4))
def test_sigma_k_sublinear(i, x, y, r):
    name, f, v = CORPUS[i]
    x, y = _pt(x, f), _pt(y, f)
    lx, ly, lxy, lr = char_roots_batch(f, v, np.array([x, y, x + y, r * x]))
    scale = max(1.0, np.abs(np.r_[lx, ly, lxy]).max())
    assert np.all(np.cumsum(lxy) <= np.cumsum(lx) + np.cumsum(ly) + 1e-8 * scale)
    np.testing.assert_allclose(np.cumsum(lr), r * np.cumsum(lx), atol=1e-8 * max(1.0, r) * scale)


@settings(max_examples=150, deadline=None)
@given(corpus_index, vec)
def test_product_identity(i, x):
    name, f, v = CORPUS[i]
    x = _pt(x, f)
    lam = char_roots(f, v, x).values
    fx, fv = evaluate(f, x), evaluate(f, v)
    # relative to the size of the terms of f at x
    E, c = f.arrays()
    bound = float(np.sum(np.abs(c) * np.prod(np.abs(x)[None, :] ** E, axis=1)))
    scale = max(1.0, np.abs(lam).max())
    assert abs(fx - fv * np.prod(lam)) <= 1e-6 * max(bound, abs(fx)) + 1e-12 * abs(fv) * scale**f.degree


@settings(max_examples=100, deadline=None)
@given(corpus_index, vec, vec, st.floats(0, 1))
def test_cone_is_convex(i, a, b, w):
    name, f, v = CORPUS[i]
    # shifting by (1 - lam_d) v puts the smallest root at 1, inside the cone
    lam_a = char_roots(f, v, _pt(a, f)).values
    lam_b = char_roots(f, v, _pt(b, f)).values
    w1 = _pt(a, f) + (1.0 - lam_a[-1]) * v
    w2 = _pt(b, f) + (1.0 - lam_b[-1]) * v
    assert cone_membership(f, v, w1) and cone_membership(f, v, w2)
    assert cone_membership(f, v, w * w1 + (1 - w) * w2)

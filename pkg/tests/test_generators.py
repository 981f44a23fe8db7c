from itertools import combinations
from math import comb

import numpy as np
import pytest

from hyperlab import generators as gen
from hyperlab.errors import BadK, NotPSD, NotSymmetric
from hyperlab.hyperpoly import HomPoly, char_roots, char_roots_batch, check_hyperbolic
from hyperlab.polynomial import SparsePoly, linear_form
from hyperlab.stability import RealPoly, check_real_stable


def test_determinantal_examples():
    assert gen.determinantal([np.eye(2)], np.zeros((2, 2))) == RealPoly(1, {(2,): 1.0})
    A1, A2 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    assert gen.determinantal([A1, A2], np.zeros((2, 2))) == RealPoly(2, {(1, 1): 1.0})


def test_determinantal_matches_dense_det():
    rng = np.random.default_rng(7)
    As = [gen.random_psd(rng, 3) for _ in range(2)]
    B = gen.random_hermitian(rng, 3)
    f = gen.determinantal(As, B)
    Z = rng.uniform(-2, 2, size=(100, 2))
    dense = np.array([np.linalg.det(z[0] * As[0] + z[1] * As[1] + B).real for z in Z])
    np.testing.assert_allclose(f.eval_batch(Z).real, dense, rtol=1e-8, atol=1e-8 * np.abs(dense).max())


def test_determinantal_rejects_bad_input():
    with pytest.raises(NotPSD):
        gen.determinantal([-np.eye(2)], np.zeros((2, 2)))
    with pytest.raises(ValueError):
        gen.determinantal([], np.zeros((2, 2)))
    # rank-deficient A_j with B = 0 can give the zero polynomial, which is returned
    zero = gen.determinantal([np.diag([1.0, 0.0])], np.zeros((2, 2)))
    assert zero.is_zero()


def test_det_of_forms_matches_numpy():
    rng = np.random.default_rng(0)
    for m in range(1, 7):
        M = rng.standard_normal((m, m))
        forms = [[SparsePoly(1, {(0,): M[a, b]}) for b in range(m)] for a in range(m)]
        val = gen.det_of_forms(forms).terms.get((0,), 0.0)
        assert val == pytest.approx(np.linalg.det(M), rel=1e-10, abs=1e-12)


def test_lax_pencil_examples():
    x3 = gen.lax_pencil(np.zeros((3, 3)), np.zeros((3, 3)))
    assert x3 == HomPoly(3, 3, {(3, 0, 0): 1.0})
    p = gen.lax_pencil(np.diag([1.0, -1.0]), np.zeros((2, 2)))
    assert p == HomPoly(3, 2, {(2, 0, 0): 1.0, (0, 2, 0): -1.0})
    with pytest.raises(NotSymmetric):
        gen.lax_pencil(np.array([[0.0, 1.0], [0.0, 0.0]]), np.zeros((2, 2)))


def test_lax_pencil_roots_are_pencil_eigenvalues():
    rng = np.random.default_rng(4)
    A, B = gen.random_symmetric(rng, 4), gen.random_symmetric(rng, 4)
    f = gen.lax_pencil(A, B)
    e1 = np.array([1.0, 0.0, 0.0])
    for y, z in rng.uniform(-2, 2, size=(20, 2)):
        # det((0 - T) I + yA + zB) = 0 exactly at the eigenvalues of yA + zB
        expected = np.sort(np.linalg.eigvalsh(y * A + z * B))[::-1]
        np.testing.assert_allclose(char_roots(f, e1, [0.0, y, z]).values, expected, atol=1e-9)


def test_lorentzian_examples():
    assert gen.lorentzian(2) == HomPoly(2, 2, {(2, 0): 1.0, (0, 2): -1.0})
    f = gen.lorentzian(4)
    e1 = np.eye(4)[0]
    rng = np.random.default_rng(1)
    for w in rng.standard_normal((20, 3)):
        r = np.linalg.norm(w)
        np.testing.assert_allclose(char_roots(f, e1, np.r_[0.0, w]).values, [r, -r], atol=1e-12)
    assert check_hyperbolic(f, e1, nsamples=1000).passed


def test_gk_examples():
    y = [linear_form([1, 1, 0]), linear_form([1, 0, 1]), linear_form([0, 1, 1])]
    expected = y[0] * y[1] * y[2]
    g = gen.gk_compose(2, 3)
    assert g.degree == 3 and g == HomPoly(3, 3, expected.terms)
    assert gen.gk_compose(1, 2) == HomPoly(2, 2, {(1, 1): 1.0})
    with pytest.raises(BadK):
        gen.gk_compose(0, 3)


def test_gk_degree_is_binomial():
    for d in range(1, 7):
        for k in range(1, d + 1):
            if comb(d, k) <= 20:
                assert gen.gk_compose(k, d).degree == comb(d, k)


def test_gk_roots_are_subset_means():
    rng = np.random.default_rng(5)
    for d, k in ((3, 2), (4, 2), (4, 3), (5, 4)):
        g = gen.gk_compose(k, d)
        for y in rng.uniform(-2, 2, size=(10, d)):
            expected = gen.compose_char(gen.gk_forms(k, d), y)
            np.testing.assert_allclose(char_roots(g, np.ones(d), y).values, expected, atol=1e-8)


def test_compose_char_examples():
    lam = np.array([0.7, -0.2, -1.5])
    np.testing.assert_allclose(gen.compose_char(gen.gk_forms(1, 3), lam), lam)
    np.testing.assert_allclose(gen.compose_char(gen.gk_forms(2, 3), [3, 2, 1]), [2.5, 2.0, 1.5])


def test_largest_subset_mean_is_top_k():
    rng = np.random.default_rng(6)
    for d in range(2, 7):
        Y = -np.sort(-rng.uniform(-3, 3, size=(50, d)), axis=1)
        for k in range(1, d + 1):
            mu = gen.compose_char(gen.gk_forms(k, d), Y)
            np.testing.assert_allclose(mu[:, 0], Y[:, :k].mean(axis=1), atol=1e-14)


def test_subset_mean_dominance_order():
    # on the sorted chamber, sorted(I) <= sorted(J) entrywise implies mu_I >= mu_J
    rng = np.random.default_rng(7)
    for d in range(2, 7):
        Y = -np.sort(-rng.uniform(-3, 3, size=(30, d)), axis=1)
        for k in range(1, d + 1):
            subsets = list(combinations(range(d), k))
            for I in subsets:
                for J in subsets:
                    if all(i <= j for i, j in zip(I, J)):
                        assert np.all(Y[:, I].mean(axis=1) >= Y[:, J].mean(axis=1) - 1e-14)


def test_index_sum_order_is_not_a_characterization():
    # I = {2,3} has the smaller index sum, yet mu_I < mu_J for J = {1,5}
    Y = np.array([10.0, 1.0, 0.5, 0.4, 0.0])
    assert Y[[1, 2]].mean() < Y[[0, 4]].mean()


def test_additive_compound_spectrum():
    rng = np.random.default_rng(8)
    A = gen.random_symmetric(rng, 4)
    lam = np.linalg.eigvalsh(A)
    for k in range(1, 5):
        sums = sorted(sum(c) for c in combinations(lam, k))
        np.testing.assert_allclose(np.linalg.eigvalsh(gen.additive_compound(A, k)), sums, atol=1e-10)


def test_compound_pencil_gives_partial_sums():
    rng = np.random.default_rng(9)
    A, B = gen.random_symmetric(rng, 3), gen.random_symmetric(rng, 3)
    f = gen.lax_pencil(A, B)
    e1 = np.array([1.0, 0.0, 0.0])
    X = np.c_[rng.uniform(-1, 1, 10), rng.uniform(-2, 2, (10, 2))]
    lam = char_roots_batch(f, e1, X)
    for k in (1, 2):
        g = gen.compound_pencil(k, A, B)
        mu = char_roots_batch(g, e1, X)
        np.testing.assert_allclose(mu[:, 0], lam[:, :k].mean(axis=1), atol=1e-8)


def test_herm_det_examples():
    assert gen.herm_det(1) == HomPoly(1, 1, {(1,): 1.0})
    # coordinates (z1, z2, x, y) with off-diagonal x + iy
    assert gen.herm_det(2) == HomPoly(4, 2, {(1, 1, 0, 0): 1.0, (0, 0, 2, 0): -1.0, (0, 0, 0, 2): -1.0})


def test_herm_coordinates_round_trip():
    rng = np.random.default_rng(10)
    for d in range(1, 6):
        A = gen.random_hermitian(rng, d)
        np.testing.assert_allclose(gen.herm_from_coords(gen.herm_coords(A), d), A, atol=1e-15)
        assert gen.herm_det(d).eval(gen.herm_coords(A)).real == pytest.approx(np.linalg.det(A).real, rel=1e-9)


def test_generated_corpus_is_hyperbolic(corpus):
    for name, f, v in corpus:
        assert check_hyperbolic(f, v, nsamples=500, radius=2.0, seed=3).passed, name
    for seed in range(10):
        assert check_real_stable(gen.random_determinantal(seed), ndirs=8, nsamples=100, seed=seed).passed

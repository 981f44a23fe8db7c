import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperlab import generators as gen
from hyperlab.errors import AmbiguousCrossing, GridTooCoarse
from hyperlab.tracking import (
    PairOptions,
    SampledCurve,
    dc_convexity_defect,
    identity_system,
    pair_branches,
    regularity_report,
    sorted_branches,
    uniform_sweep,
)

N = 2000
T = np.linspace(-1, 1, N + 1)
L3 = gen.lorentzian(3)
E1 = np.array([1.0, 0.0, 0.0])


def curve(values, t0=-1.0, t1=1.0):
    return SampledCurve(t0, t1, np.asarray(values, dtype=float))


def sort_desc(values):
    return -np.sort(-np.asarray(values, dtype=float), axis=1)


def same_up_to_relabel(labels, truth, tol=1e-10):
    cols = list(range(truth.shape[1]))
    for j in range(labels.shape[1]):
        hit = [c for c in cols if np.abs(labels[:, j] - truth[:, c]).max() <= tol]
        if not hit:
            return False
        cols.remove(hit[0])
    return True


def test_sampled_curve_validation():
    with pytest.raises(ValueError):
        SampledCurve(0.0, 1.0, [1.0])
    with pytest.raises(ValueError):
        SampledCurve(0.0, 1.0, [1.0, np.inf])
    with pytest.raises(ValueError):
        SampledCurve(1.0, 0.0, [1.0, 2.0])
    c = curve(np.c_[T, -T])
    assert c.nsteps == N and c.dt == pytest.approx(1e-3)
    with pytest.raises(ValueError):
        c.values[0, 0] = 5.0
    assert c.subsample(8).nsteps == 8
    with pytest.raises(ValueError):
        c.subsample(7)


def test_sorted_branches_examples():
    S = sorted_branches(L3, E1, curve(np.c_[0 * T, T, 0 * T]))
    np.testing.assert_allclose(S.values, np.c_[np.abs(T), -np.abs(T)], atol=1e-12)
    const = sorted_branches(L3, E1, curve(np.tile(E1, (11, 1))))
    np.testing.assert_allclose(const.values, 1.0, atol=1e-12)
    f = gen.herm_det(2)
    pts = np.array([gen.herm_coords(np.diag([s, -s])) for s in T])
    S = sorted_branches(f, gen.identity_coords(2), curve(pts))
    np.testing.assert_allclose(S.values, np.c_[np.abs(T), -np.abs(T)], atol=1e-12)


def test_pair_two_branch_crossing():
    bs = pair_branches(curve(np.c_[np.abs(T), -np.abs(T)]))
    assert same_up_to_relabel(bs.labels, np.c_[T, -T])
    assert bs.nswaps == 1
    (event,) = bs.crossing_log
    assert event.action == "swap" and abs(event.t) <= 2e-3
    assert not event.ambiguous and not event.boundary


def test_pair_separated_branches_is_identity():
    S = np.c_[np.sin(T) + 1, np.sin(T) - 1, np.cos(T) - 2.5]
    bs = pair_branches(curve(S))
    assert np.all(bs.perms == np.arange(3))
    assert bs.crossing_log == []


def test_pair_triple_crossing():
    bs = pair_branches(curve(sort_desc(np.c_[T, -T, 0 * T])))
    assert same_up_to_relabel(bs.labels, np.c_[T, -T, 0 * T])
    rep = regularity_report(bs)
    assert max(rep.tv_per_branch) <= 1e-6
    assert bs.nswaps == 3
    assert all(e.multi for e in bs.crossing_log)


def test_regularity_examples():
    paired = pair_branches(curve(np.c_[np.abs(T), -np.abs(T)]))
    rep = regularity_report(paired)
    assert rep.tv_derivative <= 1e-6 and rep.c1_defect <= 1e-6
    assert rep.c1_bound == pytest.approx(1.0)
    unpaired = identity_system(curve(np.c_[np.abs(T), -np.abs(T)]))
    rep = regularity_report(unpaired)
    np.testing.assert_allclose(rep.tv_per_branch, [2.0, 2.0], atol=1e-3)
    # W^{2,1}: |t| has L1 norm 1, |derivative| L1 norm 2 and TV 2 per branch
    assert rep.w21_norm == pytest.approx(2 * (1 + 2 + 2), rel=1e-3)


def test_report_is_non_negative():
    rng = np.random.default_rng(0)
    S = sort_desc(np.cumsum(rng.standard_normal((513, 3)), axis=0) * 0.01)
    rep = regularity_report(pair_branches(curve(S)), [64, 128, 256])
    d = rep.to_dict()
    for k, val in d.items():
        if isinstance(val, float):
            assert val >= 0, k
    assert all(x >= 0 for x in rep.tv_per_branch)
    assert rep.w21_norm >= max(rep.tv_per_branch)


def test_sharpness_trace_on_sorted_data():
    n = 2**16
    t = np.linspace(-1, 1, n + 1)
    lam = np.zeros_like(t)
    nz = t != 0
    lam[nz] = t[nz] * np.sin(np.log(np.abs(t[nz])))
    bs = pair_branches(curve(sort_desc(np.c_[lam, -lam])))
    trace = regularity_report(bs, [2**k for k in range(8, 17)]).refinement_trace
    tv = [v for _, v in trace]
    assert all(b > a for a, b in zip(tv, tv[1:]))


def test_grid_too_coarse_and_bad_refinements():
    with pytest.raises(GridTooCoarse):
        regularity_report(identity_system(curve(np.zeros((5, 2)))))
    bs = identity_system(curve(np.zeros((65, 2))))
    with pytest.raises(ValueError):
        regularity_report(bs, [32, 16])
    with pytest.raises(GridTooCoarse):
        regularity_report(bs, [4])


def test_tangential_contact_is_kept_and_flagged():
    S = np.c_[T**2, -(T**2)]
    bs = pair_branches(curve(S))
    # no-swap at a tangential touch: the sorted labeling is already smooth
    assert bs.nswaps == 0
    assert any(e.ambiguous for e in bs.crossing_log)
    np.testing.assert_array_equal(bs.labels, S)
    with pytest.raises(AmbiguousCrossing):
        pair_branches(curve(S), PairOptions(strict=True))


def test_identical_branches():
    g = np.sin(3 * T)
    bs = pair_branches(curve(np.c_[g, g, g]))
    assert np.all(bs.perms == np.arange(3))
    rep = regularity_report(bs)
    single = regularity_report(identity_system(curve(g[:, None])))
    assert rep.tv_per_branch == pytest.approx([single.tv_derivative] * 3)
    assert rep.c1_bound == pytest.approx(single.c1_bound)
    assert rep.lipschitz == pytest.approx(single.lipschitz)


def test_uniform_sweep_examples():
    def translated(r):
        X = np.c_[0 * T, T - r, 0 * T]
        return sorted_branches(L3, E1, curve(X))

    table = uniform_sweep(np.linspace(-0.5, 0.5, 5), translated)
    assert all(row.ok for row in table.rows)
    assert [row.c1_bound for row in table.rows] == pytest.approx([1.0] * 5, abs=1e-9)

    const = uniform_sweep([0.0, 1.0, 2.0], lambda r: curve(np.ones((101, 2))))
    first = const.rows[0]
    assert all((row.c1_bound, row.w21_norm, row.tv_derivative) == (first.c1_bound, first.w21_norm, first.tv_derivative) for row in const.rows)

    def diag_family(r):
        return curve(sort_desc(np.c_[T, r - T]))

    table = uniform_sweep(np.linspace(-1, 1, 21), diag_family, max_workers=4)
    w21 = np.array([row.w21_norm for row in table.rows])
    assert np.all(np.isfinite(w21)) and table.sup_w21 < 10


def test_uniform_sweep_marks_failed_rows():
    def family(r):
        if r > 0:
            raise GridTooCoarse("forced")
        return curve(np.ones((101, 2)))

    table = uniform_sweep([-1.0, 1.0], family)
    assert [row.ok for row in table.rows] == [True, False]
    assert "GridTooCoarse" in table.rows[1].error


# invariants

affine_params = st.tuples(
    st.floats(-2, 2), st.floats(-2, 2), st.floats(-0.8, 0.8)
).filter(lambda p: abs(p[0] - p[1]) >= 0.1)


@settings(max_examples=100, deadline=None)
@given(affine_params)
def test_transversal_crossing_recovers_affine_branches(p):
    a, b, ts = p
    c = (a - b) * ts
    truth = np.c_[a * T, b * T + c]
    bs = pair_branches(curve(sort_desc(truth)))
    assert same_up_to_relabel(bs.labels, truth)
    assert regularity_report(bs).tv_derivative <= 1e-8
    assert bs.nswaps == 1


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_pairing_preserves_multisets(seed, d):
    rng = np.random.default_rng(seed)
    n = 257
    t = np.linspace(0, 1, n)
    freq = rng.uniform(0.5, 4, d)
    S = sort_desc(np.sin(2 * np.pi * freq[None, :] * t[:, None] + rng.uniform(0, 6, d)))
    bs = pair_branches(curve(S, 0.0, 1.0))
    np.testing.assert_array_equal(np.sort(bs.labels, axis=1), np.sort(S, axis=1))
    np.testing.assert_array_equal(np.take_along_axis(S, bs.perms, axis=1), bs.labels)
    # increments of a label never exceed the sorted increments plus the gap inside a contact window
    inc_sorted = np.abs(np.diff(S, axis=0)).max()
    gap = 0.0
    for e in bs.crossing_log:
        lo, hi = e.window
        gap = max(gap, float(np.abs(S[lo : hi + 1, e.pair[0]] - S[lo : hi + 1, e.pair[1]]).max()))
    assert np.abs(np.diff(bs.labels, axis=0)).max() <= inc_sorted + gap + 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_partial_sums_are_convex_along_lines(seed):
    rng = np.random.default_rng(seed)
    x0, x1 = rng.uniform(-2, 2, (2, 3))
    t = np.linspace(0, 1, 129)
    X = x0[None, :] + t[:, None] * (x1 - x0)[None, :]
    S = sorted_branches(gen.lax_pencil(*(gen.random_symmetric(rng, 3) for _ in range(2))), E1, curve(X, 0.0, 1.0))
    assert dc_convexity_defect(S.values) <= 1e-8


def test_sorted_data_is_lipschitz_along_curves():
    # Lorentzian roots are x1 +- |(x2, x3)|, so each moves by at most sqrt(2) |dx|
    rng = np.random.default_rng(3)
    X = np.cumsum(rng.standard_normal((1001, 3)) * 1e-3, axis=0)
    S = sorted_branches(L3, E1, curve(X, 0.0, 1.0)).values
    dX = np.linalg.norm(np.diff(X, axis=0), axis=1)
    dS = np.abs(np.diff(S, axis=0)).max(axis=1)
    assert np.all(dS <= np.sqrt(2) * dX + 1e-12)

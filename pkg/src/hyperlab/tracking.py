"""Differentiable relabeling of sorted root data along a curve, and regularity estimates.

Sorted root tuples ``nu_1 >= ... >= nu_d`` sampled on a uniform grid are
relabeled by per-point permutations so that each label is a discretely C^1
branch.  Near-contacts of adjacent sorted positions are detected as
"contact windows"; at each window the one-sided slopes on the two sides are
matched by a minimum-cost assignment.  A transversal crossing shows up as
reversed slopes and is swapped; a tangential contact has matching slopes on
both sides and is left unswapped.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.ndimage import maximum_filter1d
from scipy.optimize import linear_sum_assignment

from .errors import AmbiguousCrossing, GridTooCoarse, HyperlabError
from .hyperpoly import HomPoly, char_roots_batch
from .realroot import DEFAULT_TOL

log = logging.getLogger(__name__)

MIN_GRID = 8
_BRUTE_FORCE_GROUP = 6


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """Samples of a map on the uniform grid ``t0 + i (t1 - t0) / nsteps``, ``i = 0..nsteps``.

    ``values`` has shape ``(nsteps + 1, ...)``: points in R^n, sorted root
    tuples or matrices.
    """

    t0: float
    t1: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] < 2:
            raise ValueError("a sampled curve needs at least two samples")
        if not np.all(np.isfinite(v)):
            raise ValueError("curve samples must be finite")
        if not self.t1 > self.t0:
            raise ValueError("need t1 > t0")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "t1", float(self.t1))

    @property
    def nsteps(self) -> int:
        return self.values.shape[0] - 1

    @property
    def dt(self) -> float:
        return (self.t1 - self.t0) / self.nsteps

    @property
    def t(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.nsteps + 1)

    @classmethod
    def from_function(cls, func: Callable, t0: float, t1: float, nsteps: int) -> "SampledCurve":
        t = np.linspace(t0, t1, nsteps + 1)
        return cls(t0, t1, np.array([func(s) for s in t]))

    def subsample(self, nsteps: int) -> "SampledCurve":
        if nsteps < 1 or self.nsteps % nsteps:
            raise ValueError(f"cannot subsample a grid of {self.nsteps} steps to {nsteps}")
        return SampledCurve(self.t0, self.t1, self.values[:: self.nsteps // nsteps])


@dataclass(frozen=True)
class PairOptions:
    kappa: float = 4.0
    tie_tol: float = 1e-9
    strict: bool = False


@dataclass
class CrossingEvent:
    """One pair of sorted positions inside a resolved contact window.

    ``index`` is the contact (smallest gap) grid index, ``switch`` the first
    grid index at which the new assignment is used.
    """

    index: int
    t: float
    pair: Tuple[int, int]
    action: str
    slope_gap: float
    switch: int
    window: Tuple[int, int]
    cost_keep: float
    cost_best: float
    ambiguous: bool = False
    multi: bool = False
    boundary: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pair"] = list(self.pair)
        d["window"] = list(self.window)
        return d


@dataclass(eq=False)
class BranchSystem:
    """Relabeled branches: ``labels[i, k] = sorted.values[i, perms[i, k]]``."""

    sorted: SampledCurve
    labels: np.ndarray
    perms: np.ndarray
    crossing_log: List[CrossingEvent] = field(default_factory=list)
    options: Optional[PairOptions] = None
    meta: dict = field(default_factory=dict)

    @property
    def t(self) -> np.ndarray:
        return self.sorted.t

    @property
    def nswaps(self) -> int:
        return sum(1 for e in self.crossing_log if e.action == "swap")


@dataclass
class RegularityReport:
    lipschitz: float
    c1_defect: float
    tv_derivative: float
    tv_per_branch: List[float]
    c1_bound: float
    w21_norm: float
    dc_convexity_defect: float
    refinement_trace: List[Tuple[int, float]]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["refinement_trace"] = [list(r) for r in self.refinement_trace]
        return d


def sorted_branches(f: HomPoly, v, curve: SampledCurve, tol: float = DEFAULT_TOL) -> SampledCurve:
    """Characteristic roots of ``f`` w.r.t. ``v`` at every sample of a curve in R^n."""
    X = curve.values
    if X.ndim != 2 or X.shape[1] != f.nvars:
        raise ValueError(f"curve samples must be points in R^{f.nvars}")
    return SampledCurve(curve.t0, curve.t1, char_roots_batch(f, v, X, tol))


def identity_system(sorted_curve: SampledCurve) -> BranchSystem:
    """The sorted labeling itself, with no relabeling."""
    S = np.asarray(sorted_curve.values, dtype=float)
    perms = np.tile(np.arange(S.shape[1]), (S.shape[0], 1))
    return BranchSystem(sorted_curve, S.copy(), perms)


def _slope_scale(S: np.ndarray, dt: float) -> float:
    return float(np.max(np.abs(np.diff(S, axis=0)), initial=0.0) / dt)


def contact_windows(S: np.ndarray, dt: float, kappa: float, L: float) -> List[Tuple[int, int, int]]:
    """Runs ``(pair p, lo, hi)`` where positions p, p+1 are within kappa local-slope steps."""
    npts, d = S.shape
    if d < 2 or L == 0.0:
        return []
    gap = S[:, :-1] - S[:, 1:]
    rate = np.abs(np.diff(gap, axis=0)) / dt
    rate = np.vstack([rate, rate[-1:]])
    k = int(np.ceil(kappa))
    local = maximum_filter1d(rate, size=2 * k + 1, axis=0, mode="nearest")
    mask = (gap <= kappa * local * dt) & (local > 1e-9 * L)
    runs = []
    for p in range(d - 1):
        m = mask[:, p].astype(np.int8)
        edges = np.diff(np.concatenate(([0], m, [0])))
        for lo, hi in zip(np.flatnonzero(edges == 1), np.flatnonzero(edges == -1) - 1):
            runs.append((p, int(lo), int(hi)))
    return runs


def _group_windows(runs) -> List[Tuple[List[int], int, int]]:
    """Merge runs of adjacent pairs whose index ranges overlap into multi-position groups."""
    n = len(runs)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a in range(n):
        for b in range(a + 1, n):
            pa, la, ha = runs[a]
            pb, lb, hb = runs[b]
            if abs(pa - pb) <= 1 and la <= hb + 1 and lb <= ha + 1:
                parent[find(a)] = find(b)
    groups = {}
    for a in range(n):
        groups.setdefault(find(a), []).append(runs[a])
    out = []
    for members in groups.values():
        pairs = [p for p, _, _ in members]
        positions = list(range(min(pairs), max(pairs) + 2))
        out.append((positions, min(lo for _, lo, _ in members), max(hi for _, _, hi in members)))
    out.sort(key=lambda g: (g[1], g[0][0]))
    return out


def _one_sided(S, P, edge, step, dt, width, t_contact_offset):
    """Slopes of positions P just outside a window, extrapolated to the contact.

    ``edge`` is the first sample outside the window, ``step`` is -1 (left) or
    +1 (right).  Returns the slopes at the contact, or None if the grid runs out.
    """
    npts = S.shape[0]
    a1 = edge + step
    if not 0 <= a1 < npts:
        return None
    s1 = step * (S[a1, P] - S[edge, P]) / dt
    e2 = edge + step * width
    a2 = e2 + step
    if 0 <= a2 < npts and 0 <= e2 < npts:
        s2 = step * (S[a2, P] - S[e2, P]) / dt
        # slope as a linear function of the distance from the contact
        d1 = t_contact_offset + 0.5 * dt
        d2 = d1 + width * dt
        return s1 + (s1 - s2) * d1 / (d2 - d1)
    return s1


def _assign(sL, sR):
    """Permutation pi of group positions minimising sum |sL[a] - sR[pi[a]]|.

    Also returns the cheapest cost among non-identity permutations (brute
    force groups only; ``inf`` otherwise), used to flag near-ties.
    """
    g = len(sL)
    cost = np.abs(sL[:, None] - sR[None, :])
    ident = tuple(range(g))
    if g <= _BRUTE_FORCE_GROUP:
        best, best_c, alt_c = None, np.inf, np.inf
        for perm in itertools.permutations(range(g)):
            c = float(cost[np.arange(g), perm].sum())
            if perm != ident:
                alt_c = min(alt_c, c)
            if c < best_c:
                best, best_c = np.array(perm), c
        return best, best_c, alt_c, cost
    rows, cols = linear_sum_assignment(cost)
    return cols[np.argsort(rows)], float(cost[rows, cols].sum()), np.inf, cost


def pair_branches(sorted_curve: SampledCurve, opts: Optional[PairOptions] = None) -> BranchSystem:
    """Relabel sorted root samples into discretely C^1 branches.

    Each contact window is resolved by assigning the slopes left of the
    window to those right of it.  Ties within ``tie_tol`` times the slope
    scale (plus the slope extrapolation error) keep the current labeling and
    are logged as ambiguous; with ``strict`` they raise AmbiguousCrossing.
    """
    opts = opts or PairOptions()
    S = np.asarray(sorted_curve.values, dtype=float)
    if S.ndim != 2:
        raise ValueError("pair_branches expects sorted tuples (2-D samples)")
    if np.any(np.diff(S, axis=1) > 1e-12 * max(1.0, float(np.abs(S).max()))):
        raise ValueError("sorted data must be non-increasing in every row")
    npts, d = S.shape
    dt = sorted_curve.dt
    t = sorted_curve.t
    L = _slope_scale(S, dt)
    groups = _group_windows(contact_windows(S, dt, opts.kappa, L))

    perm = np.arange(d)  # label k sits at sorted position perm[k]
    perms = np.empty((npts, d), dtype=np.int64)
    events: List[CrossingEvent] = []
    cursor = 0
    for P, lo, hi in groups:
        P = np.array(P)
        gap = S[lo : hi + 1, P[:-1]] - S[lo : hi + 1, P[1:]]
        c = lo + int(np.argmin(gap.min(axis=1)))
        width = max(2, hi - lo + 1)
        left = _one_sided(S, P, lo - 1, -1, dt, width, t[c] - t[max(lo - 1, 0)])
        right = _one_sided(S, P, hi + 1, +1, dt, width, t[min(hi + 1, npts - 1)] - t[c])
        multi = len(P) > 2
        if left is None or right is None:
            for a, b in itertools.combinations(range(len(P)), 2):
                events.append(CrossingEvent(c, float(t[c]), (int(P[a]), int(P[b])), "no-swap", 0.0, c, (lo, hi), 0.0, 0.0, multi=multi, boundary=True))
            continue
        sL, sR = left, right
        pi, best_cost, alt_cost, cost = _assign(sL, sR)
        keep_cost = float(np.trace(cost))
        tie = opts.tie_tol * max(L, 1e-300)
        identity = np.arange(len(P))
        ambiguous = abs(alt_cost - keep_cost) <= tie or (
            not np.array_equal(pi, identity) and keep_cost - best_cost <= tie
        )
        if ambiguous:
            if opts.strict:
                raise AmbiguousCrossing(f"tie between keep and swap at grid index {c} (t={t[c]:.6g})")
            if keep_cost - best_cost <= tie:
                pi = identity

        states = _window_path(S, P, lo, hi, pi, sL, t, penalty=opts.tie_tol * L * dt)
        perms[cursor:lo] = perm
        slot = {int(p): a for a, p in enumerate(P)}
        prev = identity
        for i in range(lo, hi + 2):
            rho = states[i - lo] if i <= hi else pi
            perms[i] = [P[rho[slot[int(p)]]] if int(p) in slot else p for p in perm]
            if not np.array_equal(rho, prev):
                for a, b in itertools.combinations(range(len(P)), 2):
                    if (prev[a] - prev[b]) * (rho[a] - rho[b]) < 0:
                        pair = tuple(sorted((int(P[prev[a]]), int(P[prev[b]]))))
                        events.append(
                            CrossingEvent(c, float(t[c]), pair, "swap", float(abs(sL[a] - sL[b])), i, (lo, hi),
                                          keep_cost, best_cost, ambiguous=ambiguous, multi=multi)
                        )
            prev = rho
        if np.array_equal(pi, identity) and not any(np.any(st != identity) for st in states):
            for a in range(len(P) - 1):
                events.append(
                    CrossingEvent(c, float(t[c]), (int(P[a]), int(P[a + 1])), "no-swap", float(abs(sL[a] - sL[a + 1])),
                                  lo, (lo, hi), keep_cost, best_cost, ambiguous=ambiguous, multi=multi)
                )
        perm = perms[hi + 1].copy()
        cursor = hi + 2
    perms[cursor:] = perm
    labels = np.take_along_axis(S, perms, axis=1)
    for e in events:
        if e.ambiguous:
            log.info("ambiguous contact at t=%.6g between positions %s kept unswapped", e.t, e.pair)
    return BranchSystem(sorted_curve, labels, perms, events, opts)


_DP_MAX_GROUP = 4


def _window_path(S, P, lo, hi, pi, sL, t, penalty: float) -> np.ndarray:
    """Local permutations for window indices lo..hi, entering with the identity and leaving with ``pi``.

    Small groups use a Viterbi pass minimising the summed |second difference|
    of the group's labels (plus ``penalty`` per change of assignment), so
    several unresolved contacts inside one window can each be undone.
    Larger groups switch once, at the index that best fits the left tangent lines.
    """
    g = len(P)
    identity = np.arange(g)
    n = hi - lo + 1
    if g > _DP_MAX_GROUP:
        return _single_switch(S, P, lo, hi, pi, sL, t)
    cand = np.array(list(itertools.permutations(range(g))))
    K = len(cand)
    idx = lambda rho: int(np.flatnonzero((cand == rho).all(axis=1))[0])
    start, end = idx(identity), idx(pi)
    # sample indices lo-2 .. hi+2; the outer two on each side are pinned
    js = np.arange(lo - 2, hi + 3)
    V = S[js][:, P][:, cand]  # (len(js), K, g)
    allowed = np.ones((len(js), K), dtype=bool)
    allowed[:2] = False
    allowed[:2, start] = True
    allowed[-2:] = False
    allowed[-2:, end] = True
    change = (cand[:, None, :] != cand[None, :, :]).any(axis=2) * penalty
    # cost[s_prev, s_cur] of the best path ending with these two states
    cost = np.full((K, K), np.inf)
    cost[start, start] = 0.0
    back = []
    for j in range(1, len(js) - 1):
        d2 = np.abs(V[j - 1][:, None, None, :] - 2 * V[j][None, :, None, :] + V[j + 1][None, None, :, :]).sum(axis=3)
        tot = cost[:, :, None] + d2 + change[None, :, :]
        tot[:, :, ~allowed[j + 1]] = np.inf
        arg = np.argmin(tot, axis=0)  # best s_prev for each (s_cur, s_next)
        cost = np.take_along_axis(tot, arg[None], axis=0)[0]
        back.append(arg)
    states = np.empty(len(js), dtype=np.int64)
    states[-1] = end
    states[-2] = int(np.argmin(cost[:, end]))
    for j in range(len(js) - 2, 0, -1):
        states[j - 1] = back[j - 1][states[j], states[j + 1]]
    return cand[states[2 : 2 + n]]


def _single_switch(S, P, lo, hi, pi, sL, t) -> np.ndarray:
    identity = np.arange(len(P))
    n = hi - lo + 1
    if np.array_equal(pi, identity):
        return np.tile(identity, (n, 1))
    edge = lo - 1
    base = S[edge, P]
    best_q, best_err = lo, np.inf
    for q in range(lo, hi + 2):
        err = 0.0
        for i in range(lo, hi + 1):
            pred = base + sL * (t[i] - t[edge])
            vals = S[i, P] if i < q else S[i, P][pi]
            err += float(np.abs(vals - pred).sum())
        if err < best_err:
            best_q, best_err = q, err
    return np.array([identity if i < best_q else pi for i in range(lo, hi + 1)])


def _derivative(labels: np.ndarray, dt: float) -> np.ndarray:
    return np.gradient(labels, dt, axis=0)


def _tv(D: np.ndarray) -> np.ndarray:
    return np.abs(np.diff(D, axis=0)).sum(axis=0)


def _trapz_abs(y: np.ndarray, dt: float) -> np.ndarray:
    a = np.abs(y)
    return dt * (a.sum(axis=0) - 0.5 * (a[0] + a[-1]))


def dc_convexity_defect(sorted_values: np.ndarray) -> float:
    """Worst midpoint-convexity violation of the partial sums ``sigma_k`` along the grid.

    Strides 1, 2, 4, ... up to half the grid are checked.
    """
    sig = np.cumsum(np.asarray(sorted_values, dtype=float), axis=1)
    n = sig.shape[0]
    worst = 0.0
    h = 1
    while 2 * h < n:
        viol = sig[h:-h] - 0.5 * (sig[: -2 * h] + sig[2 * h :])
        worst = max(worst, float(viol.max(initial=0.0)))
        h *= 2
    return worst


def _window_cells(bs: BranchSystem) -> np.ndarray:
    """Boolean mask over derivative-difference cells touched by a logged contact."""
    n = bs.labels.shape[0] - 1
    mask = np.zeros(n, dtype=bool)
    for e in bs.crossing_log:
        lo, hi = e.window
        mask[max(lo - 2, 0) : min(hi + 2, n)] = True
    return mask


def _tv_of(bs: BranchSystem) -> float:
    D = _derivative(bs.labels, bs.sorted.dt)
    return float(_tv(D).max(initial=0.0))


def regularity_report(bs: BranchSystem, refinements: Sequence[int] = ()) -> RegularityReport:
    """Discrete C^1, W^{2,1} and DC statistics of a branch system.

    ``refinements`` lists coarser grid sizes dividing ``nsteps``; each is
    obtained by subsampling the stored sorted data and pairing again (or
    keeping the sorted labeling if ``bs`` was not paired).
    """
    n = bs.labels.shape[0] - 1
    if n < MIN_GRID:
        raise GridTooCoarse(f"grid has {n} steps, need at least {MIN_GRID}")
    refinements = list(refinements)
    if any(b <= a for a, b in zip(refinements, refinements[1:])):
        raise ValueError("refinements must be increasing")
    t = bs.t
    dt = bs.sorted.dt
    lab = bs.labels
    D = _derivative(lab, dt)
    tvb = _tv(D)
    jumps = np.abs(np.diff(D, axis=0))
    outside = ~_window_cells(bs)
    c1_defect = float(jumps[outside].max(initial=0.0)) if jumps.size else 0.0
    lipschitz = float(np.max(np.abs(np.diff(lab, axis=0)), initial=0.0) / dt)
    w21 = float((_trapz_abs(lab, dt) + _trapz_abs(D, dt) + tvb).sum())
    trace = []
    for N in refinements:
        if N < MIN_GRID:
            raise GridTooCoarse(f"refinement {N} below {MIN_GRID}")
        sub = bs.sorted.subsample(N)
        sub_bs = pair_branches(sub, bs.options) if bs.options is not None else identity_system(sub)
        trace.append((int(N), _tv_of(sub_bs)))
    return RegularityReport(
        lipschitz=lipschitz,
        c1_defect=c1_defect,
        tv_derivative=float(tvb.max(initial=0.0)),
        tv_per_branch=[float(x) for x in tvb],
        c1_bound=float(np.abs(D).max(initial=0.0)),
        w21_norm=w21,
        dc_convexity_defect=dc_convexity_defect(bs.sorted.values),
        refinement_trace=trace,
    )


@dataclass
class SweepRow:
    r: float
    ok: bool
    c1_bound: float = float("nan")
    w21_norm: float = float("nan")
    tv_derivative: float = float("nan")
    nswaps: int = 0
    error: str = ""


@dataclass
class SweepTable:
    rows: List[SweepRow]

    @property
    def sup_c1(self) -> float:
        vals = [r.c1_bound for r in self.rows if r.ok]
        return max(vals) if vals else float("nan")

    @property
    def sup_w21(self) -> float:
        vals = [r.w21_norm for r in self.rows if r.ok]
        return max(vals) if vals else float("nan")

    @property
    def c1_spread(self) -> float:
        vals = [r.c1_bound for r in self.rows if r.ok]
        return max(vals) - min(vals) if vals else float("nan")


def uniform_sweep(
    rs: Sequence[float],
    sorted_for: Callable[[float], SampledCurve],
    opts: Optional[PairOptions] = None,
    max_workers: Optional[int] = None,
) -> SweepTable:
    """Run sorted -> pair -> report for every parameter value.

    ``sorted_for(r)`` returns the sorted root data of family member ``r``.
    The C^1 column is ``sup |lambda'|``; the sup over rows is the empirical
    uniform bound.  Failures mark the row and the sweep continues.
    """

    def run(r):
        try:
            bs = pair_branches(sorted_for(r), opts)
            rep = regularity_report(bs)
            return SweepRow(float(r), True, rep.c1_bound, rep.w21_norm, rep.tv_derivative, bs.nswaps)
        except (HyperlabError, ValueError, ArithmeticError) as exc:
            return SweepRow(float(r), False, error=f"{type(exc).__name__}: {exc}")

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(run, rs))
    else:
        rows = [run(r) for r in rs]
    return SweepTable(rows)


__all__ = [
    "SampledCurve",
    "PairOptions",
    "CrossingEvent",
    "BranchSystem",
    "RegularityReport",
    "SweepRow",
    "SweepTable",
    "sorted_branches",
    "identity_system",
    "pair_branches",
    "regularity_report",
    "dc_convexity_defect",
    "uniform_sweep",
]

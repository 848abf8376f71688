"""
Exhaustive small-instance analysis of the chains.

Everything here materializes a kernel's exact transition law on an enumerated
state space: stationary distributions from weights and from matrix fixed
points, worst-start total-variation mixing times, spectral gaps of the
symmetrized kernel, conductance of explicit cuts, the bottleneck report for
the slow-mixing family, the product-of-chains mixing bound, and coupling /
hitting-time estimates for the one-dimensional walk.

State orderings are frozen (lexicographic) so ids are comparable across runs.
Dense linear algebra is used up to 10^4 states, sparse iteration above; the
hard cap on materialized spaces is 10^5 states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from . import walks
from .bias import SlowMixSpec, solve_delta
from .chains import WalkChain, WalkTranspositionChain, make_rng

STATE_CAP = 100_000
DENSE_CAP = 10_000


class CapExceeded(ValueError):
    """State space larger than the configured materialization cap."""


def state_index(states) -> dict:
    return {s: k for k, s in enumerate(states)}


def transition_matrix(kernel, states=None) -> sp.csr_matrix:
    """Row-stochastic sparse matrix of the kernel on the enumerated space."""
    if states is None:
        states = kernel.space()
    if len(states) > STATE_CAP:
        raise CapExceeded(f"{len(states)} states exceed the cap {STATE_CAP}")
    idx = state_index(states)
    rows, cols, vals = [], [], []
    for i, s in enumerate(states):
        for t, p in kernel.transition_distribution(s).items():
            rows.append(i)
            cols.append(idx[t])
            vals.append(float(p))
    m = sp.csr_matrix((vals, (rows, cols)), shape=(len(states), len(states)))
    return m


def transition_matrix_exact(kernel, states=None) -> list[dict[int, Fraction]]:
    """Exact rational rows, as {column: Fraction} dicts."""
    if states is None:
        states = kernel.space()
    idx = state_index(states)
    return [
        {idx[t]: p for t, p in kernel.transition_distribution(s).items()}
        for s in states
    ]


def stationary_weights_exact(kernel, states=None) -> list[Fraction]:
    if states is None:
        states = kernel.space()
    weights = [kernel.stationary_weight(s) for s in states]
    total = sum(weights)
    if total == 0:
        raise ValueError("all states have zero weight")
    return [w / total for w in weights]


def stationary_exact(kernel, states=None) -> np.ndarray:
    """Normalized stationary distribution from the weight formula."""
    return np.array([float(x) for x in stationary_weights_exact(kernel, states)])


def is_fixed_point_exact(kernel, states=None, pi: list[Fraction] | None = None) -> bool:
    """Exact check that pi P = pi, entry by entry."""
    if states is None:
        states = kernel.space()
    if pi is None:
        pi = stationary_weights_exact(kernel, states)
    idx = state_index(states)
    acc = [Fraction(0)] * len(states)
    for i, s in enumerate(states):
        if pi[i] == 0:
            continue
        for t, p in kernel.transition_distribution(s).items():
            acc[idx[t]] += pi[i] * p
    return acc == list(pi)


def detailed_balance_violations(kernel, states=None, tol: Fraction = Fraction(0)) -> list:
    """Pairs (s, t) with pi(s)K(s,t) != pi(t)K(t,s), exact arithmetic."""
    if states is None:
        states = kernel.space()
    idx = state_index(states)
    pi = stationary_weights_exact(kernel, states)
    rows = [kernel.transition_distribution(s) for s in states]
    bad = []
    for i, s in enumerate(states):
        for t, p in rows[i].items():
            j = idx[t]
            if j <= i:
                continue
            back = rows[j].get(s, Fraction(0))
            if abs(pi[i] * p - pi[j] * back) > tol:
                bad.append((s, t))
    return bad


def tv_distance(mu, nu) -> float:
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    return 0.5 * float(np.abs(mu - nu).sum())


@dataclass
class MixingResult:
    tau: int | None         # None when the horizon ran out
    eps: float
    distances: list         # worst-start TV at t = 0, 1, ...
    converged: bool
    caveat: str             # "all-starts" or "extreme-starts"


def mixing_time_exact(
    matrix: sp.csr_matrix,
    pi: np.ndarray,
    eps: float,
    starts=None,
    horizon: int = 200_000,
) -> MixingResult:
    """Smallest t with worst-start TV <= eps.

    Worst-start TV is non-increasing in t, so the first crossing is the
    mixing time; the recorded trajectory lets callers verify monotonicity.
    starts=None uses every state (distributions tracked as a dense block).
    """
    m = matrix.shape[0]
    if starts is None:
        block = np.eye(m)
        caveat = "all-starts"
    else:
        block = np.zeros((len(starts), m))
        for r, s in enumerate(starts):
            block[r, s] = 1.0
        caveat = "extreme-starts"
    distances = [float(np.abs(block - pi).sum(axis=1).max() * 0.5)]
    if distances[-1] <= eps:
        return MixingResult(0, eps, distances, True, caveat)
    for t in range(1, horizon + 1):
        block = block @ matrix
        d = float(np.abs(block - pi).sum(axis=1).max() * 0.5)
        distances.append(d)
        if d <= eps:
            return MixingResult(t, eps, distances, True, caveat)
    return MixingResult(None, eps, distances, False, caveat)


def spectral_gap(matrix: sp.csr_matrix, pi: np.ndarray, tol: float = 1e-9) -> float:
    """1 minus the second-largest eigenvalue modulus of the symmetrized kernel.

    Requires reversibility; the similarity transform D^(1/2) P D^(-1/2) is
    then symmetric and the spectrum is real.
    """
    m = matrix.shape[0]
    if m > DENSE_CAP:
        raise CapExceeded(f"{m} states exceed the dense eigensolve cap {DENSE_CAP}")
    dense = matrix.toarray()
    flows = pi[:, None] * dense
    if not np.allclose(flows, flows.T, atol=tol, rtol=0):
        raise ValueError("kernel is not reversible with respect to pi")
    root = np.sqrt(pi)
    sym = dense * (root[:, None] / root[None, :])
    eigs = np.linalg.eigvalsh((sym + sym.T) / 2)
    mods = np.sort(np.abs(eigs))[::-1]
    return float(1.0 - mods[1])


def conductance_of_cut(matrix: sp.csr_matrix, pi: np.ndarray, cut) -> float:
    """Boundary probability flow out of the cut divided by its mass.

    Evaluates the complement instead when the cut holds more than half the
    mass, matching the usual min(pi(S), pi(S-bar)) normalization.
    """
    cut = sorted(set(cut))
    if not cut:
        raise ValueError("empty cut")
    mass = float(pi[cut].sum())
    inside = np.zeros(matrix.shape[0], dtype=bool)
    inside[cut] = True
    if mass > 0.5:
        inside = ~inside
        mass = 1.0 - mass
    rows = np.where(inside)[0]
    flow = 0.0
    sub = matrix[rows]
    coo = sub.tocoo()
    for r, c, v in zip(coo.row, coo.col, coo.data):
        if not inside[c]:
            flow += pi[rows[r]] * v
    return flow / mass


# -- slow-mixing bottleneck report ---------------------------------------------


@dataclass
class SlowMixReport:
    n: int
    delta: float
    xi: float
    level: int
    pi_s1: float
    pi_s2: float
    pi_s3: float
    ratio_s2_s1: Fraction
    phi_s1: float
    tau_lower: float
    pi_s2_wide: float
    ratio_wide: Fraction
    phi_s1_transposition: float
    tau_lower_transposition: float
    tau_comparison: int | None = None
    comparison_label: str = ""


def _class_masses(n: int, spec: SlowMixSpec, widened: bool) -> dict[int, Fraction]:
    tables = walks.height_profile(n).class_table(widened=widened)
    return {
        cls: walks.class_weight(tables[cls], spec.gamma, spec.xi) for cls in (1, 2, 3)
    }


def slowmix_cut_report(n: int, comparison_p=Fraction(3, 4), compute_comparison: bool = True) -> SlowMixReport:
    """Exact bottleneck quantities for the fluctuating-bias walk chain at size n.

    The balance point makes the low and high sides carry equal mass; the cut
    class at the bottleneck level is exponentially lighter, which the
    conductance bound converts into a mixing-time floor.  For contrast, the
    report optionally includes the exact tau(1/4) of a constant-bias walk
    chain on the same space, measured from the two extreme walks.
    """
    spec = SlowMixSpec(n=n, delta=solve_delta(n))
    masses = _class_masses(n, spec, widened=False)
    total = masses[1] + masses[2] + masses[3]
    masses_w = _class_masses(n, spec, widened=True)

    states = walks.all_walks(n)
    idx = state_index(states)
    weights = [spec.gamma**f * spec.xi**s for f, s in map(walks.tile_counts, states)]
    z = sum(weights)
    pi = np.array([float(w / z) for w in weights])
    s1_ids = [idx[w] for w in states if walks.cut_class(w) == 1]

    chain = WalkChain.fluctuating(spec)
    matrix = transition_matrix(chain, states)
    phi = conductance_of_cut(matrix, pi, s1_ids)

    tchain = WalkTranspositionChain(spec)
    phi_t = _transposition_conductance(tchain, spec, states, pi, idx)

    tau_cmp = None
    label = ""
    if compute_comparison:
        cmp_chain = WalkChain.constant(n, comparison_p)
        cmp_matrix = transition_matrix(cmp_chain, states)
        cmp_pi = stationary_exact(cmp_chain, states)
        lowest = idx[tuple([-1] * n + [1] * n)]
        highest = idx[tuple([1] * n + [-1] * n)]
        res = mixing_time_exact(cmp_matrix, cmp_pi, 0.25, starts=[lowest, highest])
        tau_cmp = res.tau
        label = f"constant:{Fraction(comparison_p)}"

    return SlowMixReport(
        n=n,
        delta=float(spec.delta),
        xi=float(spec.xi),
        level=spec.level,
        pi_s1=float(masses[1] / total),
        pi_s2=float(masses[2] / total),
        pi_s3=float(masses[3] / total),
        ratio_s2_s1=masses[2] / masses[1],
        phi_s1=phi,
        tau_lower=1.0 / (4.0 * phi) - 0.5,
        pi_s2_wide=float(masses_w[2] / total),
        ratio_wide=masses_w[2] / masses_w[1],
        phi_s1_transposition=phi_t,
        tau_lower_transposition=1.0 / (4.0 * phi_t) - 0.5,
        tau_comparison=tau_cmp,
        comparison_label=label,
    )


def _transposition_conductance(chain, spec, states, pi, idx) -> float:
    """Flow out of the low class under the long-swap chain, over its mass.

    Only walks within jumping distance of the level can cross, so the scan
    touches the thin slice with max height in {level-2, level-1}.
    """
    level = spec.level
    mass = 0.0
    flow = 0.0
    for w in states:
        h = walks.max_height(w)
        if h >= level:
            continue
        p_w = pi[idx[w]]
        mass += p_w
        if h < level - 2:
            continue
        for t, p in chain.transition_distribution(w).items():
            if t != w and walks.max_height(t) >= level:
                flow += p_w * float(p)
    return flow / mass


# -- product chains ------------------------------------------------------------


def product_mixing_bound(p_select, taus, m_factors: int, eps: float) -> float:
    """max_i (2/p_i) tau_i(eps / (2M)) for a product of M independent chains."""
    p_select = list(p_select)
    if not p_select:
        raise ValueError("empty factor list")
    if len(p_select) != m_factors or len(taus) != m_factors:
        raise ValueError("factor count mismatch")
    if sum(p_select) > 1 + 1e-12:
        raise ValueError("selection probabilities must sum to at most 1")
    inner = eps / (2 * m_factors)
    return max((2 / p) * tau(inner) for p, tau in zip(p_select, taus))


def kron_product_matrix(mats, p_select) -> np.ndarray:
    """Transition matrix of the product chain that updates factor i w.p. p_i."""
    mats = [np.asarray(m, dtype=float) for m in mats]
    dims = [m.shape[0] for m in mats]
    total = int(np.prod(dims))
    out = np.zeros((total, total))
    for i, (m, p) in enumerate(zip(mats, p_select)):
        factors = [np.eye(d) for d in dims]
        factors[i] = m
        term = factors[0]
        for f in factors[1:]:
            term = np.kron(term, f)
        out += p * term
    return out


# -- one-dimensional walk estimates ---------------------------------------------


def hitting_time_mean_exact(r: float, k: int) -> float:
    """Mean steps for the 0..k walk to first reach k from 0, holding at 0."""
    r = float(r)
    mean = 0.0
    t_prev = 0.0
    for h in range(k):
        if h == 0:
            t_prev = 1.0 / r
        else:
            t_prev = (1.0 + (1.0 - r) * t_prev) / r
        mean += t_prev
    return mean


def hitting_time_samples(r: float, k: int, trials: int, seed: int) -> np.ndarray:
    """Vectorized first-passage times to k from 0 over independent walkers."""
    rng = make_rng(seed)
    state = np.zeros(trials, dtype=np.int64)
    hit = np.full(trials, -1, dtype=np.int64)
    active = np.arange(trials)
    t = 0
    while active.size:
        t += 1
        up = rng.random(active.size) < r
        s = state[active]
        s = np.where(up, np.minimum(s + 1, k), np.maximum(s - 1, 0))
        state[active] = s
        done = s == k
        hit[active[done]] = t
        active = active[~done]
    return hit


@dataclass
class CouplingEstimate:
    mean_coupling_time: float
    pairs: int
    tau_bound: object  # callable eps -> float


def coupling_time_estimate(kernel, pairs: int, seed: int) -> CouplingEstimate:
    """Coalescence time of the same-direction coupling from the extreme pair.

    Defined for the bounded one-dimensional walk only: both copies follow
    identical up/down draws, the order is preserved, the gap closes only at
    the clamped boundaries, and once the copies meet they stay together.
    The implied mixing bound is T * e * ceil(ln(1/eps)).
    """
    from .chains import OnedChain

    if not isinstance(kernel, OnedChain):
        raise TypeError("the monotone coupling is defined for the oned kernel only")
    return _coupling_time_estimate(float(kernel.r), kernel.k, pairs, seed)


def _coupling_time_estimate(r: float, k: int, pairs: int, seed: int) -> CouplingEstimate:
    rng = make_rng(seed)
    lo = np.zeros(pairs, dtype=np.int64)
    hi = np.full(pairs, k, dtype=np.int64)
    times = np.zeros(pairs, dtype=np.int64)
    active = np.arange(pairs)
    t = 0
    while active.size:
        t += 1
        up = rng.random(active.size) < r
        step = np.where(up, 1, -1)
        lo_a = np.clip(lo[active] + step, 0, k)
        hi_a = np.clip(hi[active] + step, 0, k)
        lo[active] = lo_a
        hi[active] = hi_a
        met = lo_a == hi_a
        times[active[met]] = t
        active = active[~met]
    mean_t = float(times.mean())

    def tau_bound(eps: float) -> float:
        return mean_t * math.e * math.ceil(math.log(1.0 / eps))

    return CouplingEstimate(mean_coupling_time=mean_t, pairs=pairs, tau_bound=tau_bound)


# -- spectral-gap grid scan -------------------------------------------------------


@dataclass
class GapScan:
    n: int
    values: tuple
    tables_checked: int
    min_gap: float
    uniform_gap: float
    violations: list = field(default_factory=list)


def monotone_grid_tables(n: int, values) -> list[dict]:
    """All fully monotone assignments of grid values to the upper triangle.

    Monotone means rows never decrease to the right and never increase
    downward: p[i][j] <= p[i][j+1] and p[i-1][j] >= p[i][j].
    """
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    values = sorted(values)
    tables: list[dict] = []

    def extend(k: int, current: dict):
        if k == len(pairs):
            tables.append(dict(current))
            return
        i, j = pairs[k]
        lo = max(
            current.get((i, j - 1), values[0]) if j - 1 > i else values[0],
            current.get((i + 1, j), values[0]) if i + 1 < j else values[0],
        )
        hi = current.get((i - 1, j), values[-1]) if i >= 2 else values[-1]
        for v in values:
            if lo <= v <= hi:
                current[(i, j)] = v
                extend(k + 1, current)
                del current[(i, j)]

    extend(0, {})
    return tables


def gap_problem_scan(n: int = 4, values=(Fraction(1, 2), Fraction(3, 5), Fraction(7, 10), Fraction(4, 5), Fraction(9, 10))) -> GapScan:
    """Check gap(P) >= gap(uniform) over all monotone grid tables."""
    from .bias import BiasTable
    from .chains import NearestNeighborChain

    values = tuple(Fraction(v) for v in values)
    states = None
    uniform_gap = None
    gaps = []
    tables = monotone_grid_tables(n, values)
    for flat in tables:
        table = BiasTable(n, lambda i, j: flat[(i, j)])
        kernel = NearestNeighborChain(table)
        if states is None:
            states = kernel.space()
        matrix = transition_matrix(kernel, states)
        pi = stationary_exact(kernel, states)
        gap = spectral_gap(matrix, pi)
        if all(v == Fraction(1, 2) for v in flat.values()):
            uniform_gap = gap
        gaps.append((flat, gap))
    if uniform_gap is None:
        raise ValueError("grid must include the uniform table")
    min_gap = min(g for _, g in gaps)
    violations = [
        (dict(flat), g) for flat, g in gaps if g < uniform_gap - 1e-12
    ]
    return GapScan(
        n=n,
        values=values,
        tables_checked=len(tables),
        min_gap=min_gap,
        uniform_gap=uniform_gap,
        violations=violations,
    )


def loglog_slope(ns, values) -> float:
    """Least-squares slope of log(value) against log(n)."""
    xs = np.log(np.asarray(ns, dtype=float))
    ys = np.log(np.asarray(values, dtype=float))
    return float(np.polyfit(xs, ys, 1)[0])


def level_cuts_by_weight(pi: np.ndarray, count: int = 8) -> list[list[int]]:
    """Nested cuts taken along increasing stationary mass, for bound checks."""
    order = np.argsort(pi)
    cuts = []
    m = len(pi)
    for frac in np.linspace(0.1, 0.9, count):
        size = max(1, int(frac * m))
        cut = order[:size].tolist()
        if float(pi[cut].sum()) <= 0.5 and cut:
            cuts.append(cut)
    return cuts or [order[:1].tolist()]

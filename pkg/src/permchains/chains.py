"""
Single-step kernels for the sampling chains, plus a seeded run loop.

Every kernel exposes two views of the same transition law:

* ``step(state, rng)`` draws one transition.  The random draws come in a
  frozen order (selection, then direction bit where the kernel has one, then
  acceptance), one uniform per role, so trajectories are reproducible from
  (kernel, start, steps, seed) alone.
* ``transition_distribution(state)`` returns the exact one-step distribution
  as a dict of successor -> Fraction, which the analysis code turns into
  matrices.  Probabilities sum to exactly 1.

Kernels:

* ``NearestNeighborChain``   adjacent transpositions under a bias table.
* ``InversionChain``         +-1 moves on one inversion-table coordinate;
                             equivalently, swapping a label with the nearest
                             larger label across smaller ones.
* ``TreeChain``              transpositions that are adjacent inside one
                             node string of the league-tree encoding.
* ``OnedChain``              biased walk on 0..k with holding boundaries.
* ``AsepChain``              adjacent exclusion moves on a binary string.
* ``WalkChain``              adjacent (+1, -1) swaps on staircase walks with
                             position-dependent bias (fluctuating or constant).
* ``WalkTranspositionChain`` arbitrary (+1, -1) swaps with Metropolis
                             acceptance under the same walk weights.

Blocked proposals count as holds, never as errors.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import perms, walks
from .bias import BiasTable, CywSpec, SlowMixSpec, weight_exact
from .trees import LeagueTree

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class StepOutcome:
    state: object
    moved: bool
    chosen: tuple        # kernel-specific selection record
    accept_prob: float   # probability with which the realized arrangement was kept


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator; the documented draw order makes runs portable."""
    return np.random.Generator(np.random.Philox(seed))


def _pick_uniform(u: float, count: int) -> int:
    k = int(u * count)
    return min(k, count - 1)  # guard u == 1.0 edge


class NearestNeighborChain:
    """Pick an adjacent position uniformly; reorder the pair by its bias entry."""

    kind = "nn"

    def __init__(self, table: BiasTable):
        self.table = table
        self.n = table.n

    def space(self):
        return list(perms.all_permutations(self.n))

    def stationary_weight(self, sigma) -> Fraction:
        return weight_exact(sigma, self.table)

    def step(self, sigma, rng) -> StepOutcome:
        pos = _pick_uniform(rng.random(), self.n - 1)
        x, y = sigma[pos], sigma[pos + 1]
        p_swap = self.table.p(y, x)
        if rng.random() < p_swap:
            return StepOutcome(perms.adjacent_swap(sigma, pos), True, (pos,), float(p_swap))
        return StepOutcome(tuple(sigma), False, (pos,), float(1 - p_swap))

    def transition_distribution(self, sigma) -> dict:
        n = self.n
        sel = Fraction(1, n - 1)
        out: dict = {}
        hold = Fraction(0)
        for pos in range(n - 1):
            x, y = sigma[pos], sigma[pos + 1]
            p_swap = self.table.p(y, x)
            if p_swap > 0:
                tau = perms.adjacent_swap(sigma, pos)
                out[tau] = out.get(tau, Fraction(0)) + sel * p_swap
            hold += sel * (1 - p_swap)
        key = tuple(sigma)
        out[key] = out.get(key, Fraction(0)) + hold
        return out

    def min_hold_probability(self) -> Fraction:
        """Every state holds at least this often."""
        return min(
            min(self.table.p(i, j), self.table.p(j, i))
            for i in range(1, self.n + 1)
            for j in range(i + 1, self.n + 1)
        )


def _inv_targets(sigma, i: int) -> tuple[int | None, int | None]:
    """(first larger label after i, last larger label before i) in sigma."""
    pos = list(sigma).index(i)
    after = next((v for v in sigma[pos + 1 :] if v > i), None)
    before = next((v for v in reversed(sigma[:pos]) if v > i), None)
    return after, before


class InversionChain:
    """Move one inversion-table coordinate by +-1.

    Label i is selected with probability (n-i)/C(n,2), then a fair direction
    bit: +1 swaps i with the first larger label after it (acceptance 1-r_i),
    -1 swaps i with the last larger label before it (acceptance r_i).  All
    skipped labels are smaller than both, so the swap changes only coordinate
    i of the inversion table.  Holds with probability at least 1/2.

    The max variant is served by conjugating the min kernel with the mirror
    relabeling rather than by a second code path.
    """

    kind = "inv"

    def __init__(self, spec: CywSpec):
        self.spec = spec
        self.n = spec.n
        self._mirror = spec.variant == "max"
        self._base = spec if not self._mirror else spec.mirrored()
        from .bias import choose_your_weapon

        self.table = choose_your_weapon(spec)

    def space(self):
        return list(perms.all_permutations(self.n))

    def stationary_weight(self, sigma) -> Fraction:
        return weight_exact(sigma, self.table)

    def step(self, sigma, rng) -> StepOutcome:
        if self._mirror:
            inner = self._min_kernel().step(perms.mirror(sigma), rng)
            return StepOutcome(
                perms.mirror(inner.state), inner.moved, inner.chosen, inner.accept_prob
            )
        n = self.n
        total = n * (n - 1) // 2
        u = rng.random()
        # label i has selection weight (n - i); label n is never selected
        i = 1
        acc = 0.0
        for cand in range(1, n):
            acc += (n - cand) / total
            if u < acc:
                i = cand
                break
        else:
            i = n - 1
        b = 1 if rng.random() < 0.5 else -1
        after, before = _inv_targets(sigma, i)
        j = after if b == 1 else before
        if j is None:
            rng.random()  # burn the acceptance draw so the stream stays aligned
            return StepOutcome(tuple(sigma), False, (i, b), 1.0)
        r_i = self._base.r[i - 1]
        accept = (1 - r_i) if b == 1 else r_i
        if rng.random() < accept:
            return StepOutcome(perms.swap_values(sigma, i, j), True, (i, b), float(accept))
        return StepOutcome(tuple(sigma), False, (i, b), float(1 - accept))

    def _min_kernel(self) -> "InversionChain":
        if not hasattr(self, "_inner"):
            self._inner = InversionChain(self._base)
        return self._inner

    def transition_distribution(self, sigma) -> dict:
        if self._mirror:
            inner = self._min_kernel().transition_distribution(perms.mirror(sigma))
            return {perms.mirror(s): p for s, p in inner.items()}
        n = self.n
        total = Fraction(n * (n - 1), 2)
        out: dict = {}
        hold = Fraction(0)
        for i in range(1, n):
            sel = Fraction(n - i) / total
            r_i = self._base.r[i - 1]
            after, before = _inv_targets(sigma, i)
            for b, j, accept in ((1, after, 1 - r_i), (-1, before, r_i)):
                mass = sel * HALF
                if j is None:
                    hold += mass
                    continue
                tau = perms.swap_values(sigma, i, j)
                if accept > 0:
                    out[tau] = out.get(tau, Fraction(0)) + mass * accept
                hold += mass * (1 - accept)
        key = tuple(sigma)
        out[key] = out.get(key, Fraction(0)) + hold
        return out

    def min_hold_probability(self) -> Fraction:
        return HALF


class TreeChain:
    """Transpose a label pair when no stranger separates them.

    An unordered pair {a, b} is selected uniformly among C(n,2).  If every
    label between a and b in the permutation lies outside the subtree of
    lca(a, b), the pair is put in order with probability q at the lca and out
    of order otherwise (a no-op counts as a hold); else the step holds.
    """

    kind = "tree"

    def __init__(self, tree: LeagueTree):
        self.tree = tree
        self.n = tree.n
        from .bias import league_hierarchy

        self.table = league_hierarchy(tree)

    def space(self):
        return list(perms.all_permutations(self.n))

    def stationary_weight(self, sigma) -> Fraction:
        return weight_exact(sigma, self.table)

    def pair_is_free(self, sigma, a: int, b: int) -> bool:
        """No element between a and b descends from lca(a, b)."""
        under = self.tree.leaves_under(self.tree.lca(a, b))
        pa, pb = list(sigma).index(a), list(sigma).index(b)
        lo, hi = min(pa, pb), max(pa, pb)
        return all(sigma[k] not in under for k in range(lo + 1, hi))

    @staticmethod
    def _ordered(sigma, a: int, b: int, in_order: bool):
        pa, pb = list(sigma).index(a), list(sigma).index(b)
        lo, hi = min(pa, pb), max(pa, pb)
        first, second = (min(a, b), max(a, b)) if in_order else (max(a, b), min(a, b))
        out = list(sigma)
        out[lo], out[hi] = first, second
        return tuple(out)

    def step(self, sigma, rng) -> StepOutcome:
        pair_id = _pick_uniform(rng.random(), self.n * (self.n - 1) // 2)
        a, b = _unrank_pair(pair_id, self.n)
        if not self.pair_is_free(sigma, a, b):
            rng.random()  # burn the orientation draw to keep the stream aligned
            return StepOutcome(tuple(sigma), False, (a, b), 1.0)
        q = self.table.p(a, b)
        in_order = rng.random() < q
        tau = self._ordered(sigma, a, b, in_order)
        prob = q if in_order else 1 - q
        return StepOutcome(tau, tau != tuple(sigma), (a, b), float(prob))

    def transition_distribution(self, sigma) -> dict:
        pairs = self.n * (self.n - 1) // 2
        sel = Fraction(1, pairs)
        out: dict = {}
        hold = Fraction(0)
        for a in range(1, self.n + 1):
            for b in range(a + 1, self.n + 1):
                if not self.pair_is_free(sigma, a, b):
                    hold += sel
                    continue
                q = self.table.p(a, b)
                for in_order, prob in ((True, q), (False, 1 - q)):
                    tau = self._ordered(sigma, a, b, in_order)
                    if tau == tuple(sigma):
                        hold += sel * prob
                    elif prob > 0:
                        out[tau] = out.get(tau, Fraction(0)) + sel * prob
        key = tuple(sigma)
        out[key] = out.get(key, Fraction(0)) + hold
        return out

    def min_hold_probability(self) -> Fraction:
        qs = [self.tree.q_of(v) for v in self.tree.internal_ids()]
        return min(min(q, 1 - q) for q in qs)


def _unrank_pair(pair_id: int, n: int) -> tuple[int, int]:
    """Unordered pair (a, b), a < b, from a dense 0-based index."""
    a = 1
    remaining = pair_id
    while remaining >= n - a:
        remaining -= n - a
        a += 1
    return a, a + 1 + remaining


class OnedChain:
    """Walk on 0..k: up with probability r, down with 1-r, clamped holds."""

    kind = "oned"

    def __init__(self, r, k: int):
        from ._common import as_probability

        self.r = as_probability(r)
        self.k = int(k)

    def space(self):
        return list(range(self.k + 1))

    def stationary_weight(self, h: int) -> Fraction:
        if self.r == 1:
            return Fraction(1) if h == self.k else Fraction(0)
        return (self.r / (1 - self.r)) ** h

    def step(self, h: int, rng) -> StepOutcome:
        if not 0 <= h <= self.k:
            raise ValueError(f"state out of range 0..{self.k}: {h}")
        up = rng.random() < self.r
        if up and h < self.k:
            return StepOutcome(h + 1, True, (+1,), float(self.r))
        if not up and h > 0:
            return StepOutcome(h - 1, True, (-1,), float(1 - self.r))
        return StepOutcome(h, False, (+1 if up else -1,), 1.0)

    def transition_distribution(self, h: int) -> dict:
        out: dict = {}
        hold = Fraction(0)
        if h < self.k:
            out[h + 1] = self.r
        else:
            hold += self.r
        if h > 0:
            out[h - 1] = 1 - self.r
        else:
            hold += 1 - self.r
        if hold:
            out[h] = out.get(h, Fraction(0)) + hold
        return out


class AsepChain:
    """Adjacent exclusion moves on binary strings with k1 ones and k2 zeros.

    A position pair is chosen uniformly among the k-1 adjacencies; an unequal
    pair is set to (1, 0) with probability p and to (0, 1) otherwise.
    """

    kind = "asep"

    def __init__(self, p, k1: int, k2: int):
        from ._common import as_probability

        self.p = as_probability(p)
        self.k1, self.k2 = int(k1), int(k2)
        self.k = self.k1 + self.k2

    def space(self):
        import itertools

        out = []
        for ones in itertools.combinations(range(self.k), self.k1):
            s = ["0"] * self.k
            for i in ones:
                s[i] = "1"
            out.append("".join(s))
        out.sort()
        return out

    @staticmethod
    def order_pairs(s: str) -> int:
        """Number of (1 before 0) index pairs."""
        zeros_after = 0
        total = 0
        for ch in reversed(s):
            if ch == "0":
                zeros_after += 1
            else:
                total += zeros_after
        return total

    def stationary_weight(self, s: str) -> Fraction:
        lam = self.p / (1 - self.p) if self.p != 1 else None
        if lam is None:
            raise ValueError("p = 1 has a degenerate stationary law")
        return lam ** self.order_pairs(s)

    def step(self, s: str, rng) -> StepOutcome:
        pos = _pick_uniform(rng.random(), self.k - 1)
        a, b = s[pos], s[pos + 1]
        if a == b:
            rng.random()  # burn the orientation draw to keep the stream aligned
            return StepOutcome(s, False, (pos,), 1.0)
        sorted_pair = rng.random() < self.p
        new = s[:pos] + ("10" if sorted_pair else "01") + s[pos + 2 :]
        prob = self.p if sorted_pair else 1 - self.p
        return StepOutcome(new, new != s, (pos,), float(prob))

    def transition_distribution(self, s: str) -> dict:
        sel = Fraction(1, self.k - 1)
        out: dict = {}
        hold = Fraction(0)
        for pos in range(self.k - 1):
            a, b = s[pos], s[pos + 1]
            if a == b:
                hold += sel
                continue
            for pair, prob in (("10", self.p), ("01", 1 - self.p)):
                new = s[:pos] + pair + s[pos + 2 :]
                if new == s:
                    hold += sel * prob
                elif prob > 0:
                    out[new] = out.get(new, Fraction(0)) + sel * prob
        out[s] = out.get(s, Fraction(0)) + hold
        return out


class WalkChain:
    """Adjacent (+1, -1) swaps on staircase walks.

    The orientation probability of each unequal adjacent pair comes from
    ``bias_at(ones_before, downs_before)``: the probability of the (+1, -1)
    arrangement for the pair formed by the l-th up-step and m-th down-step.
    Use :meth:`fluctuating` for the slow-mixing family and :meth:`constant`
    for a uniform-bias reference chain of the same size.
    """

    kind = "walk"

    def __init__(
        self,
        n: int,
        bias_at: Callable[[int, int], Fraction],
        weight_of: Callable[[tuple], Fraction],
        label: str = "walk",
    ):
        self.n = n
        self.bias_at = bias_at
        self._weight_of = weight_of
        self.label = label

    @classmethod
    def fluctuating(cls, spec: SlowMixSpec) -> "WalkChain":
        def weight(w) -> Fraction:
            flat, steep = walks.tile_counts(w)
            return spec.gamma**flat * spec.xi**steep

        return cls(spec.n, lambda l, m: spec.cross_prob(l, spec.n + m), weight, "slowmix")

    @classmethod
    def constant(cls, n: int, p) -> "WalkChain":
        from ._common import as_probability

        q = as_probability(p)
        lam = q / (1 - q)

        def weight(w) -> Fraction:
            return lam ** walks.tile_count_total(w)

        return cls(n, lambda l, m: q, weight, f"constant:{q}")

    def space(self):
        return walks.all_walks(self.n)

    def stationary_weight(self, w) -> Fraction:
        return self._weight_of(w)

    def _pair_bias(self, w, pos: int) -> Fraction:
        ones = sum(1 for s in w[: pos + 2] if s == 1)
        downs = pos + 2 - ones
        return self.bias_at(ones, downs)

    def step(self, w, rng) -> StepOutcome:
        count = 2 * self.n - 1
        pos = _pick_uniform(rng.random(), count)
        if w[pos] == w[pos + 1]:
            rng.random()  # burn the orientation draw to keep the stream aligned
            return StepOutcome(tuple(w), False, (pos,), 1.0)
        p_up = self._pair_bias(w, pos)
        up_first = rng.random() < p_up
        new = list(w)
        new[pos], new[pos + 1] = (1, -1) if up_first else (-1, 1)
        new = tuple(new)
        prob = p_up if up_first else 1 - p_up
        return StepOutcome(new, new != tuple(w), (pos,), float(prob))

    def transition_distribution(self, w) -> dict:
        count = 2 * self.n - 1
        sel = Fraction(1, count)
        out: dict = {}
        hold = Fraction(0)
        for pos in range(count):
            if w[pos] == w[pos + 1]:
                hold += sel
                continue
            p_up = self._pair_bias(w, pos)
            for up_first, prob in ((True, p_up), (False, 1 - p_up)):
                new = list(w)
                new[pos], new[pos + 1] = (1, -1) if up_first else (-1, 1)
                new = tuple(new)
                if new == tuple(w):
                    hold += sel * prob
                elif prob > 0:
                    out[new] = out.get(new, Fraction(0)) + sel * prob
        key = tuple(w)
        out[key] = out.get(key, Fraction(0)) + hold
        return out


class WalkTranspositionChain:
    """Swap any (+1, -1) step pair with Metropolis acceptance.

    The pair is selected uniformly among the n*n (up-step, down-step) index
    pairs; acceptance is min(1, weight ratio) under the fluctuating-bias walk
    weights.  A single swap changes the maximum height by at most 2.
    """

    kind = "walk-transposition"

    def __init__(self, spec: SlowMixSpec):
        self.spec = spec
        self.n = spec.n

    def space(self):
        return walks.all_walks(self.n)

    def stationary_weight(self, w) -> Fraction:
        flat, steep = walks.tile_counts(w)
        return self.spec.gamma**flat * self.spec.xi**steep

    def _swapped(self, w, which_up: int, which_down: int):
        ups = [k for k, s in enumerate(w) if s == 1]
        downs = [k for k, s in enumerate(w) if s == -1]
        new = list(w)
        a, b = ups[which_up], downs[which_down]
        new[a], new[b] = new[b], new[a]
        return tuple(new)

    def _ratio(self, w, new) -> Fraction:
        f0, s0 = walks.tile_counts(w)
        f1, s1 = walks.tile_counts(new)
        return self.spec.gamma ** (f1 - f0) * self.spec.xi ** (s1 - s0)

    def step(self, w, rng) -> StepOutcome:
        idx = _pick_uniform(rng.random(), self.n * self.n)
        which_up, which_down = divmod(idx, self.n)
        new = self._swapped(w, which_up, which_down)
        ratio = self._ratio(w, new)
        accept = min(Fraction(1), ratio)
        if rng.random() < accept:
            return StepOutcome(new, True, (which_up, which_down), float(accept))
        return StepOutcome(tuple(w), False, (which_up, which_down), float(1 - accept))

    def transition_distribution(self, w) -> dict:
        sel = Fraction(1, self.n * self.n)
        out: dict = {}
        hold = Fraction(0)
        for which_up in range(self.n):
            for which_down in range(self.n):
                new = self._swapped(w, which_up, which_down)
                accept = min(Fraction(1), self._ratio(w, new))
                if new == tuple(w):
                    hold += sel
                    continue
                if accept > 0:
                    out[new] = out.get(new, Fraction(0)) + sel * accept
                hold += sel * (1 - accept)
        key = tuple(w)
        out[key] = out.get(key, Fraction(0)) + hold
        return out


# -- step function wrappers ----------------------------------------------------


def step_nn(sigma, table: BiasTable, rng) -> StepOutcome:
    return NearestNeighborChain(table).step(sigma, rng)


def step_inv(sigma, spec: CywSpec, rng) -> StepOutcome:
    return InversionChain(spec).step(sigma, rng)


def step_tree(sigma, tree: LeagueTree, rng) -> StepOutcome:
    return TreeChain(tree).step(sigma, rng)


def step_oned(h: int, r, k: int, rng) -> int:
    return OnedChain(r, k).step(h, rng).state


def step_asep(s: str, p, rng) -> str:
    k1 = s.count("1")
    return AsepChain(p, k1, len(s) - k1).step(s, rng).state


def step_walk(w, spec: SlowMixSpec, rng):
    return WalkChain.fluctuating(spec).step(w, rng).state


def step_walk_transposition(w, spec: SlowMixSpec, rng):
    return WalkTranspositionChain(spec).step(w, rng).state


def transition_distribution(kernel, state) -> dict:
    return kernel.transition_distribution(state)


# -- observables and the run loop ------------------------------------------------


def inversion_observable(state) -> float:
    return float(perms.inversion_count(state))


def max_height_observable(state) -> float:
    return float(walks.max_height(state))


OBSERVABLES: dict[str, Callable] = {
    "inversions": inversion_observable,
    "max-height": max_height_observable,
    "value": lambda state: float(state) if isinstance(state, int) else float("nan"),
    "order-pairs": lambda s: float(AsepChain.order_pairs(s)),
}


def default_observable(kernel) -> str:
    if kernel.kind in ("nn", "inv", "tree"):
        return "inversions"
    if kernel.kind in ("walk", "walk-transposition"):
        return "max-height"
    if kernel.kind == "oned":
        return "value"
    return "order-pairs"


@dataclass
class Trajectory:
    final_state: object
    steps: int
    seed: int
    observable: str
    records: list = field(default_factory=list)  # (step, value)
    moves: int = 0


def run(kernel, start, steps: int, seed: int, stride: int = 0, observable: str | None = None) -> Trajectory:
    """Deterministic trajectory: same (kernel, start, steps, seed) -> same output."""
    rng = make_rng(seed)
    name = observable or default_observable(kernel)
    obs = OBSERVABLES[name]
    state = start
    traj = Trajectory(final_state=start, steps=steps, seed=seed, observable=name)
    if stride:
        traj.records.append((0, obs(state)))
    for t in range(1, steps + 1):
        out = kernel.step(state, rng)
        state = out.state
        if out.moved:
            traj.moves += 1
        if stride and t % stride == 0:
            traj.records.append((t, obs(state)))
    traj.final_state = state
    return traj

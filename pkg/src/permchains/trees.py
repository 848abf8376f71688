"""
League trees: rooted proper binary trees whose leaves are the labels 1..n.

Each internal node v carries a probability q_v in [1/2, 1].  The tree induces
a bias table via the lowest common ancestor: the pair (i, j) with i < j is put
in order with probability q at lca(i, j).

A permutation is encoded against such a tree as one bit string per internal
node: list the node's descendant labels in permutation order and write 1 for
members of the left subtree, 0 for the right.  This encoding is a bijection;
:func:`tree_decode` inverts it by interleaving child strings.

JSON format: a node is either an integer leaf label or an object
``{"q": number, "left": node, "right": node}``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ._common import as_probability
from .perms import check_permutation


@dataclass(frozen=True)
class TreeNode:
    label: int | None = None
    q: Fraction | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.label is not None


def leaf(label: int) -> TreeNode:
    return TreeNode(label=int(label))


def node(q, left: TreeNode, right: TreeNode) -> TreeNode:
    return TreeNode(q=as_probability(q), left=left, right=right)


@dataclass(frozen=True)
class _Internal:
    # one record per internal node, id = preorder index
    q: Fraction
    leaves: frozenset
    left_leaves: frozenset
    left_ref: tuple  # ("leaf", label) or ("node", id)
    right_ref: tuple


class LeagueTree:
    """Validated league tree with precomputed lca and descendant sets."""

    def __init__(self, root: TreeNode):
        self.root = root
        self._internal: list[_Internal] = []
        leaves = self._index(root)[1]
        self.n = len(leaves)
        if list(leaves) != list(range(1, self.n + 1)):
            raise ValueError(
                f"leaf labels must read 1..n left to right, got {leaves}"
            )
        self._lca: dict[tuple[int, int], int] = {}
        for nid, rec in enumerate(self._internal):
            right = rec.leaves - rec.left_leaves
            for i in rec.left_leaves:
                for j in right:
                    self._lca[(i, j)] = nid
                    self._lca[(j, i)] = nid

    def _index(self, nd: TreeNode) -> tuple[tuple, list[int]]:
        if nd.is_leaf:
            return ("leaf", nd.label), [nd.label]
        if nd.left is None or nd.right is None or nd.q is None:
            raise ValueError("internal node needs q and both children")
        if not Fraction(1, 2) <= nd.q <= 1:
            raise ValueError(f"q out of [1/2, 1]: {nd.q}")
        nid = len(self._internal)
        self._internal.append(None)  # reserve preorder slot
        left_ref, left_leaves = self._index(nd.left)
        right_ref, right_leaves = self._index(nd.right)
        self._internal[nid] = _Internal(
            q=nd.q,
            leaves=frozenset(left_leaves) | frozenset(right_leaves),
            left_leaves=frozenset(left_leaves),
            left_ref=left_ref,
            right_ref=right_ref,
        )
        return ("node", nid), left_leaves + right_leaves

    # -- structure queries ------------------------------------------------

    def internal_ids(self) -> range:
        return range(len(self._internal))

    def q_of(self, node_id: int) -> Fraction:
        return self._internal[node_id].q

    def leaves_under(self, node_id: int) -> frozenset:
        return self._internal[node_id].leaves

    def left_under(self, node_id: int) -> frozenset:
        return self._internal[node_id].left_leaves

    def lca(self, i: int, j: int) -> int:
        """Id of the deepest node having both leaves below it."""
        if i == j:
            raise ValueError("lca needs two distinct labels")
        try:
            return self._lca[(i, j)]
        except KeyError:
            raise ValueError(f"labels out of range 1..{self.n}: {i}, {j}")

    def lca_q(self, i: int, j: int) -> Fraction:
        return self.q_of(self.lca(i, j))

    # -- JSON --------------------------------------------------------------

    @classmethod
    def from_json(cls, text: str) -> "LeagueTree":
        obj = json.loads(text, parse_float=Fraction)
        return cls(_node_from_obj(obj))

    def to_json(self) -> str:
        def emit(nd: TreeNode):
            if nd.is_leaf:
                return nd.label
            return {"q": float(nd.q), "left": emit(nd.left), "right": emit(nd.right)}

        return json.dumps(emit(self.root))


def _node_from_obj(obj) -> TreeNode:
    if isinstance(obj, int):
        return leaf(obj)
    if isinstance(obj, dict) and {"q", "left", "right"} <= set(obj):
        return node(obj["q"], _node_from_obj(obj["left"]), _node_from_obj(obj["right"]))
    raise ValueError(f"bad tree node: {obj!r}")


# -- encoding ---------------------------------------------------------------


def tree_encode(sigma: Sequence[int], tree: LeagueTree) -> dict[int, str]:
    """Bit string per internal node: 1 = left-subtree member, in sigma order."""
    sigma = check_permutation(sigma)
    if len(sigma) != tree.n:
        raise ValueError(f"permutation size {len(sigma)} != tree size {tree.n}")
    out: dict[int, str] = {}
    for nid in tree.internal_ids():
        under = tree.leaves_under(nid)
        left = tree.left_under(nid)
        out[nid] = "".join("1" if v in left else "0" for v in sigma if v in under)
    return out


def tree_decode(encoding: dict[int, str], tree: LeagueTree) -> tuple[int, ...]:
    """Inverse of :func:`tree_encode`.

    Child strings are interleaved bottom-up: each 1 in a node's string takes
    the next element of the left child's string, each 0 takes from the right.
    """
    for nid in tree.internal_ids():
        bits = encoding[nid]
        rec = tree._internal[nid]
        ones = bits.count("1")
        if ones != len(rec.left_leaves) or len(bits) - ones != len(
            rec.leaves - rec.left_leaves
        ):
            raise ValueError(f"node {nid}: bit counts do not match subtree sizes")

    def build(ref) -> list[int]:
        kind, val = ref
        if kind == "leaf":
            return [val]
        rec = tree._internal[val]
        s1 = build(rec.left_ref)
        s0 = build(rec.right_ref)
        out = []
        i1 = i0 = 0
        for b in encoding[val]:
            if b == "1":
                out.append(s1[i1])
                i1 += 1
            else:
                out.append(s0[i0])
                i0 += 1
        return out

    root_ref = ("node", 0) if tree.internal_ids() else ("leaf", 1)
    return tuple(build(root_ref))


# -- shapes ------------------------------------------------------------------


def complete_tree(n: int, q) -> LeagueTree:
    """Balanced splits; every internal node carries the same q."""
    qp = as_probability(q)

    def build(lo: int, hi: int) -> TreeNode:
        if lo == hi:
            return leaf(lo)
        mid = (lo + hi) // 2
        return TreeNode(q=qp, left=build(lo, mid), right=build(mid + 1, hi))

    return LeagueTree(build(1, n))


def caterpillar_tree(n: int, qs) -> LeagueTree:
    """Right-leaning spine: node k separates leaf k from leaves k+1..n.

    qs gives the spine probabilities top-down (length n-1).  With
    qs[k-1] = r_k this reproduces the bias table in which every pair is
    decided by its smaller label.
    """
    qs = [as_probability(x) for x in qs]
    if len(qs) != n - 1:
        raise ValueError(f"need {n - 1} spine probabilities, got {len(qs)}")

    def build(k: int) -> TreeNode:
        if k == n:
            return leaf(n)
        return TreeNode(q=qs[k - 1], left=leaf(k), right=build(k + 1))

    return LeagueTree(build(1))


def random_tree(n: int, rng, q_choices=(Fraction(3, 5), Fraction(7, 10), Fraction(4, 5))) -> LeagueTree:
    """Uniformly random split shape with q values drawn from q_choices."""

    def build(lo: int, hi: int) -> TreeNode:
        if lo == hi:
            return leaf(lo)
        cut = lo + int(rng.random() * (hi - lo))  # left part is lo..cut
        q = q_choices[int(rng.random() * len(q_choices))]
        return TreeNode(q=q, left=build(lo, cut), right=build(cut + 1, hi))

    return LeagueTree(build(1, n))


def truncate_tree(tree: LeagueTree, n: int) -> LeagueTree:
    """Induced subtree on the leaves 1..n, contracting unary nodes."""
    if not 1 <= n <= tree.n:
        raise ValueError(f"cannot truncate {tree.n}-leaf tree to {n}")

    def prune(nd: TreeNode) -> TreeNode | None:
        if nd.is_leaf:
            return nd if nd.label <= n else None
        lt, rt = prune(nd.left), prune(nd.right)
        if lt is not None and rt is not None:
            return TreeNode(q=nd.q, left=lt, right=rt)
        return lt if lt is not None else rt

    pruned = prune(tree.root)
    if pruned is None:
        raise ValueError("empty truncation")
    return LeagueTree(pruned)


def mirror_tree(tree: LeagueTree) -> LeagueTree:
    """Reflect left/right and relabel leaves v -> n+1-v."""
    n = tree.n

    def flip(nd: TreeNode) -> TreeNode:
        if nd.is_leaf:
            return leaf(n + 1 - nd.label)
        return TreeNode(q=nd.q, left=flip(nd.right), right=flip(nd.left))

    return LeagueTree(flip(tree.root))

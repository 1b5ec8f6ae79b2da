"""m-way nearest-neighbor tree over binary signatures.

A tree node holds an ordered list of (key signature, child) records.
Points route greedily to the child with the nearest key at each level.
One optimization iteration re-inserts every point into a copy of the
tree, prunes branches that received nothing, and recomputes every key
as the per-dimension majority of the points beneath it; iterations
repeat until the tree reproduces itself exactly or an iteration cap is
reached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyTreeError, InsufficientDataError, InvariantError
from .signatures import SignatureCollection, hamming_matrix, unpack_bits

_UPDATE_CHUNK = 4096


@dataclass(frozen=True)
class TreeConfig:
    """Shape and schedule of one clustering run.

    depth counts key-bearing levels; depth=1 is a flat clustering.
    seed_assignment picks how the seeding sample is partitioned:
    "nearest" routes each sample point to its nearest chosen prototype,
    "random" spreads the sample uniformly.
    """

    order: int = 16
    depth: int = 1
    max_iterations: int = 10
    rng_seed: int = 0
    seed_sample_fraction: float = 0.1
    seed_assignment: str = "nearest"

    def __post_init__(self):
        if self.order < 2:
            raise ValueError(f"order must be >= 2, got {self.order}")
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not 0 < self.seed_sample_fraction <= 1:
            raise ValueError("seed_sample_fraction must be in (0, 1]")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must fit in 64 bits")
        if self.seed_assignment not in ("nearest", "random"):
            raise ValueError(f"seed_assignment must be 'nearest' or 'random', got {self.seed_assignment!r}")


class LeafBucket:
    """Leaf holding member row indices into a signature collection."""

    __slots__ = ("members",)

    def __init__(self):
        self.members: list[int] = []

    @property
    def count(self) -> int:
        return len(self.members)

    def signed_counts(self, words: np.ndarray | None, d: int) -> tuple[np.ndarray, int]:
        if self.members and words is None:
            raise InvariantError("bucket leaves need the backing signature matrix to update")
        total = np.zeros(d, dtype=np.int64)
        k = len(self.members)
        for i in range(0, k, _UPDATE_CHUNK):
            chunk = words[self.members[i : i + _UPDATE_CHUNK]]
            total += unpack_bits(chunk).sum(axis=0, dtype=np.int64)
        return 2 * total - k, k


class Accumulator:
    """Leaf holding d signed counters instead of stored points.

    Each added signature contributes +1 to a dimension with bit 1 and
    -1 with bit 0. Counters are 32-bit; |counts[j]| <= n_added < 2^31.
    """

    __slots__ = ("counts", "n_added")

    def __init__(self):
        self.counts: np.ndarray | None = None
        self.n_added: int = 0

    @property
    def count(self) -> int:
        return self.n_added

    def reset(self) -> None:
        self.counts = None
        self.n_added = 0

    def signed_counts(self, words: np.ndarray | None, d: int) -> tuple[np.ndarray, int]:
        if self.counts is None:
            return np.zeros(d, dtype=np.int64), 0
        return self.counts.astype(np.int64), self.n_added


class Node:
    """Internal node: keys[i] is the representative of children[i]."""

    __slots__ = ("keys", "children")

    def __init__(self, keys: np.ndarray, children: list):
        keys = np.ascontiguousarray(keys, dtype=np.uint64)
        if keys.ndim != 2 or keys.shape[0] != len(children):
            raise InvariantError(f"keys shape {keys.shape} does not match {len(children)} children")
        self.keys = keys
        self.children = children

    @property
    def n_records(self) -> int:
        return len(self.children)

    @property
    def records(self) -> list[tuple[np.ndarray, object]]:
        return [(self.keys[i], self.children[i]) for i in range(self.n_records)]


def quantize_counts(counts: np.ndarray) -> np.ndarray:
    """Majority quantization: bit j = 1 iff counts[j] > 0 (ties to 0)."""
    bits = np.asarray(counts) > 0
    packed = np.packbits(bits, axis=-1, bitorder="little")
    return packed.view("<u8").astype(np.uint64, copy=False)


def nearest_record(node: Node, words: np.ndarray) -> int:
    """Index of the record with minimum Hamming distance; ties take the lowest index."""
    dist = np.bitwise_count(np.bitwise_xor(node.keys, words[None, :])).sum(axis=1, dtype=np.int32)
    return int(dist.argmin())


def sample_size(n: int, config: TreeConfig) -> int:
    """Seed sample size: ceil(fraction * n), at least order, at most n."""
    want = math.ceil(round(config.seed_sample_fraction * n, 9))
    return min(n, max(config.order, want))


def reservoir_indices(n: int, k: int, seed) -> np.ndarray:
    """Sorted indices of a uniform size-k sample of range(n).

    Single-pass reservoir rule: item i replaces a random slot with
    probability k/(i+1). Deterministic for a given seed, and usable
    against a stream because it needs only n up front.
    """
    if not 0 <= k <= n:
        raise ValueError(f"sample size {k} out of range for {n} items")
    rng = np.random.default_rng(seed)
    res = np.arange(k, dtype=np.int64)
    if k and k < n:
        draws = rng.integers(0, np.arange(k, n, dtype=np.int64) + 1)
        for i, j in enumerate(draws, start=k):
            if j < k:
                res[j] = i
    return np.sort(res)


def seed_tree(config: TreeConfig, sample_words: np.ndarray, rng: np.random.Generator,
              leaf_factory=LeafBucket) -> Node:
    """Build the initial tree from a sample of signatures.

    At each node up to `order` sample points become keys; the rest of
    the sample is partitioned (nearest key, or uniformly at random) and
    recursed one level deeper. Leaves start empty: sample points shape
    the keys but are not retained.
    """
    if sample_words.ndim != 2 or sample_words.shape[0] == 0:
        raise InsufficientDataError("seeding requires a nonempty sample")

    def build(idx: np.ndarray, level: int) -> Node:
        k = min(config.order, idx.size)
        chosen = idx[rng.choice(idx.size, size=k, replace=False)]
        keys = sample_words[chosen].copy()
        if level == config.depth:
            return Node(keys, [leaf_factory() for _ in range(k)])
        if config.seed_assignment == "random":
            assign = rng.integers(0, k, size=idx.size)
        else:
            assign = hamming_matrix(sample_words[idx], keys).argmin(axis=1)
        kept_keys: list[np.ndarray] = []
        children: list[Node] = []
        for j in range(k):
            part = idx[assign == j]
            if part.size == 0:
                # duplicate prototypes (or random assignment) can starve a branch
                continue
            kept_keys.append(keys[j])
            children.append(build(part, level + 1))
        return Node(np.vstack(kept_keys), children)

    return build(np.arange(sample_words.shape[0]), 1)


def copy_tree(node: Node, leaf_factory=LeafBucket) -> Node:
    """Copy keys and structure; leaves come back fresh and empty."""
    children = [
        copy_tree(c, leaf_factory) if isinstance(c, Node) else leaf_factory()
        for c in node.children
    ]
    return Node(node.keys.copy(), children)


def tree_depth(root: Node) -> int:
    depth = 1
    node = root
    while node.children and isinstance(node.children[0], Node):
        node = node.children[0]
        depth += 1
    return depth


def iter_leaf_records(root: Node):
    """Yield (key row, leaf) over leaf-level records in depth-first order."""
    for i, child in enumerate(root.children):
        if isinstance(child, Node):
            yield from iter_leaf_records(child)
        else:
            yield root.keys[i], child


def insert_all(root: Node, coll: SignatureCollection) -> np.ndarray:
    """Route every signature to its leaf; returns the leaf slot per row.

    Keys and structure are read-only during insertion; only leaf
    membership lists grow.
    """
    from .routing import TreeRouter

    router = TreeRouter(root)
    slots = router.route(coll.words).slots
    if slots.size:
        order = np.argsort(slots, kind="stable")
        sorted_slots = slots[order]
        starts = np.flatnonzero(np.r_[True, sorted_slots[1:] != sorted_slots[:-1]])
        ends = np.r_[starts[1:], sorted_slots.size]
        for s, e in zip(starts, ends):
            router.leaves[sorted_slots[s]].members.extend(order[s:e].tolist())
    return slots


def update_keys(root: Node, words: np.ndarray | None = None) -> None:
    """Recompute keys bottom-up by per-dimension majority.

    Leaf keys quantize their own accumulated counts; an internal key
    quantizes the sum of its child subtree's accumulators, so it equals
    the majority over every point below it. Records whose subtree got
    no points keep their key untouched (prune removes them).
    """
    d = root.keys.shape[1] * 64

    def visit(node: Node) -> tuple[np.ndarray, int]:
        total = np.zeros(d, dtype=np.int64)
        n_total = 0
        for i, child in enumerate(node.children):
            if isinstance(child, Node):
                counts, n = visit(child)
            else:
                counts, n = child.signed_counts(words, d)
            if n > 0:
                node.keys[i] = quantize_counts(counts)
            total += counts
            n_total += n
        return total, n_total

    visit(root)


def prune(root: Node) -> int:
    """Drop records whose subtree holds zero points, leaves first.

    Returns the total point count. An entirely empty tree is an error.
    """

    def visit(node: Node) -> int:
        kept_keys: list[np.ndarray] = []
        kept_children: list = []
        total = 0
        for i, child in enumerate(node.children):
            n = visit(child) if isinstance(child, Node) else child.count
            if n > 0:
                kept_keys.append(node.keys[i])
                kept_children.append(child)
                total += n
        node.keys = (
            np.vstack(kept_keys) if kept_keys else np.empty((0, node.keys.shape[1]), dtype=np.uint64)
        )
        node.children = kept_children
        return total

    total = visit(root)
    if total == 0:
        raise EmptyTreeError("all branches empty")
    return total


def trees_equal(a: Node, b: Node) -> bool:
    """Order-sensitive structural equality: same shape, bitwise-equal keys."""
    if a.n_records != b.n_records or not np.array_equal(a.keys, b.keys):
        return False
    for ca, cb in zip(a.children, b.children):
        ca_node = isinstance(ca, Node)
        if ca_node != isinstance(cb, Node):
            return False
        if ca_node and not trees_equal(ca, cb):
            return False
    return True


def distortion(root: Node, words: np.ndarray) -> float:
    """Mean Hamming distance from each member point to its leaf key."""
    total = 0
    n = 0
    for key, leaf in iter_leaf_records(root):
        members = getattr(leaf, "members", None)
        if not members:
            continue
        pts = words[members]
        total += int(np.bitwise_count(np.bitwise_xor(pts, key[None, :])).sum(dtype=np.int64))
        n += len(members)
    return total / n if n else 0.0


def _collect_members(child) -> list[int]:
    if isinstance(child, Node):
        out: list[int] = []
        for c in child.children:
            out.extend(_collect_members(c))
        return out
    return list(child.members)


def extract_clustering(root: Node, level: int, doc_ids: list[str]) -> dict[str, set[str]]:
    """Clusters are the subtrees at the given level; ids are '.'-joined record paths."""
    depth = tree_depth(root)
    if not 1 <= level <= depth:
        raise ValueError(f"level {level} out of range 1..{depth}")
    clusters: dict[str, set[str]] = {}

    def visit(node: Node, path: tuple[int, ...], lv: int) -> None:
        for i, child in enumerate(node.children):
            p = path + (i,)
            if lv == level:
                members = _collect_members(child)
                if members:
                    clusters[".".join(map(str, p))] = {doc_ids[r] for r in members}
            else:
                visit(child, p, lv + 1)

    visit(root, (), 1)
    return clusters


def count_clusters(root: Node, level: int) -> int:
    """Number of subtrees rooted at the given level."""
    depth = tree_depth(root)
    if not 1 <= level <= depth:
        raise ValueError(f"level {level} out of range 1..{depth}")

    def visit(node: Node, lv: int) -> int:
        if lv == level:
            return node.n_records
        return sum(visit(c, lv + 1) for c in node.children)

    return visit(root, 1)


def emtree(config: TreeConfig, coll: SignatureCollection) -> tuple[Node, int, bool]:
    """Full in-memory optimization: seed, then insert/prune/update until
    the tree reproduces itself or max_iterations passes run.

    Returns (tree, iterations_run, converged). Leaf memberships of the
    final iteration define the clustering.
    """
    n = len(coll)
    if n < config.order:
        raise InsufficientDataError(f"insufficient data for order {config.order}: only {n} signatures")
    k = sample_size(n, config)
    s_sample, s_build = np.random.SeedSequence(config.rng_seed).spawn(2)
    idx = reservoir_indices(n, k, s_sample)
    root = seed_tree(config, coll.words[idx], np.random.default_rng(s_build), LeafBucket)
    converged = False
    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        new_root = copy_tree(root, LeafBucket)
        insert_all(new_root, coll)
        prune(new_root)
        update_keys(new_root, coll.words)
        converged = trees_equal(root, new_root)
        root = new_root
        if converged:
            break
    return root, iterations, converged

"""Tests for batched tree routing against the greedy scalar descent."""

import numpy as np
import pytest

from sigtree import (
    DimensionMismatchError,
    InvariantError,
    LeafBucket,
    Node,
    TreeConfig,
    TreeRouter,
    hamming_words,
    insert_all,
    nearest_record,
    prune,
    update_keys,
)
from sigtree.tree import iter_leaf_records
from sigtree.synth import random_collection


def pruned_tree(order: int, depth: int, n: int, seed: int):
    """Seed, fill, prune, and re-key a tree so record counts vary by node."""
    coll = random_collection(n, 128, seed=seed)
    rng = np.random.default_rng(seed + 1)
    sample = coll.words[rng.choice(n, size=max(order * 6, 30), replace=False)]
    root = seed_tree_with(order, depth, sample, seed + 2)
    insert_all(root, coll)
    prune(root)
    update_keys(root, coll.words)
    return root, coll


def seed_tree_with(order, depth, sample, seed):
    from sigtree import seed_tree

    cfg = TreeConfig(order=order, depth=depth)
    return seed_tree(cfg, sample, np.random.default_rng(seed))


def greedy_leaf(root: Node, words: np.ndarray):
    node = root
    path = []
    while True:
        i = nearest_record(node, words)
        path.append(i)
        child = node.children[i]
        if isinstance(child, Node):
            node = child
        else:
            return child, node.keys[i], path


class TestRouteCorrectness:
    @pytest.mark.parametrize("depth,n", [(1, 150), (2, 400), (3, 800)])
    def test_matches_greedy_descent(self, depth, n):
        root, coll = pruned_tree(4, depth, n, seed=depth * 10)
        router = TreeRouter(root)
        res = router.route(coll.words, with_paths=True)
        assert res.paths.shape == (n, depth)
        for row in range(n):
            leaf, key, path = greedy_leaf(root, coll.words[row])
            assert router.leaves[res.slots[row]] is leaf
            assert res.dists[row] == hamming_words(key, coll.words[row])
            assert res.paths[row].tolist() == path

    def test_leaves_in_depth_first_order(self):
        root, _ = pruned_tree(4, 2, 300, seed=40)
        router = TreeRouter(root)
        expect = [leaf for _, leaf in iter_leaf_records(root)]
        assert len(router.leaves) == len(expect)
        for got, want in zip(router.leaves, expect):
            assert got is want

    def test_paths_omitted_by_default(self):
        root, coll = pruned_tree(4, 1, 100, seed=41)
        res = TreeRouter(root).route(coll.words)
        assert res.paths is None

    def test_empty_batch(self):
        root, _ = pruned_tree(4, 1, 100, seed=42)
        res = TreeRouter(root).route(np.empty((0, 2), dtype=np.uint64))
        assert res.slots.size == 0
        assert res.dists.size == 0

    def test_tie_goes_to_lowest_record(self):
        keys = np.array([[0b01], [0b10]], dtype=np.uint64)
        root = Node(keys, [LeafBucket(), LeafBucket()])
        res = TreeRouter(root).route(np.array([[0b00]], dtype=np.uint64))
        assert res.slots[0] == 0
        assert res.dists[0] == 1


class TestChunking:
    def test_small_chunks_change_nothing(self):
        root, coll = pruned_tree(5, 2, 500, seed=43)
        router = TreeRouter(root)
        whole = router.route(coll.words, with_paths=True)
        router._rows_per_chunk = 7
        parts = router.route(coll.words, with_paths=True)
        assert np.array_equal(whole.slots, parts.slots)
        assert np.array_equal(whole.dists, parts.dists)
        assert np.array_equal(whole.paths, parts.paths)


class TestRouteErrors:
    def test_word_count_mismatch(self):
        root, _ = pruned_tree(4, 1, 100, seed=44)
        with pytest.raises(DimensionMismatchError):
            TreeRouter(root).route(np.zeros((5, 3), dtype=np.uint64))

    def test_one_dimensional_input(self):
        root, _ = pruned_tree(4, 1, 100, seed=45)
        with pytest.raises(DimensionMismatchError):
            TreeRouter(root).route(np.zeros(2, dtype=np.uint64))

    def test_unbalanced_tree(self):
        inner = Node(np.array([[1]], dtype=np.uint64), [LeafBucket()])
        mixed = Node(np.array([[1], [2]], dtype=np.uint64), [inner, LeafBucket()])
        with pytest.raises(InvariantError, match="height-balanced"):
            TreeRouter(mixed)

    def test_zero_record_node(self):
        empty = Node(np.empty((0, 1), dtype=np.uint64), [])
        with pytest.raises(InvariantError, match="zero records"):
            TreeRouter(empty)

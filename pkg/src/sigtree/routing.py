"""Vectorized nearest-key routing through a tree.

The tree is flattened once into per-level key tables so whole batches
of signatures descend level by level with XOR + popcount over numpy
arrays. Ties go to the lowest record index (argmin takes the first
minimum). Tables cost O(nodes x order x d) bits, independent of the
number of points routed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvariantError
from .tree import Node

_MAX_CHUNK_BYTES = 1 << 26  # cap on the (rows, order, words) xor intermediate


@dataclass
class RouteResult:
    slots: np.ndarray  # (n,) leaf slot per point
    dists: np.ndarray  # (n,) Hamming distance to the chosen leaf key
    paths: np.ndarray | None = None  # (n, depth) record index per level


@dataclass
class _Level:
    keys: np.ndarray   # (nodes, m_max, words) uint64, zero-padded
    valid: np.ndarray  # (nodes, m_max) bool
    child: np.ndarray  # (nodes, m_max) next-level node index, or leaf slot


class TreeRouter:
    """Read-only routing tables for one tree snapshot.

    Rebuild the router after update or prune mutates the tree.
    """

    def __init__(self, root: Node):
        self.levels: list[_Level] = []
        self.leaves: list = []
        self.words_per_sig = root.keys.shape[1]
        level_nodes = [root]
        while True:
            m_max = max(n.n_records for n in level_nodes)
            if m_max == 0:
                raise InvariantError("node with zero records in routing table")
            n_nodes = len(level_nodes)
            keys = np.zeros((n_nodes, m_max, self.words_per_sig), dtype=np.uint64)
            valid = np.zeros((n_nodes, m_max), dtype=bool)
            child = np.zeros((n_nodes, m_max), dtype=np.int64)
            leaf_level = not isinstance(level_nodes[0].children[0], Node)
            next_nodes: list[Node] = []
            for ni, node in enumerate(level_nodes):
                r = node.n_records
                keys[ni, :r] = node.keys
                valid[ni, :r] = True
                for ri, ch in enumerate(node.children):
                    if isinstance(ch, Node) == leaf_level:
                        raise InvariantError("tree is not height-balanced")
                    if leaf_level:
                        child[ni, ri] = len(self.leaves)
                        self.leaves.append(ch)
                    else:
                        child[ni, ri] = len(next_nodes)
                        next_nodes.append(ch)
            self.levels.append(_Level(keys, valid, child))
            if leaf_level:
                break
            level_nodes = next_nodes
        self.depth = len(self.levels)
        m_big = max(level.keys.shape[1] for level in self.levels)
        self._rows_per_chunk = max(1, _MAX_CHUNK_BYTES // (m_big * self.words_per_sig * 8))

    def route(self, words: np.ndarray, with_paths: bool = False) -> RouteResult:
        words = np.asarray(words, dtype=np.uint64)
        if words.ndim != 2 or words.shape[1] != self.words_per_sig:
            raise DimensionMismatchError(
                f"points have {words.shape[-1] if words.ndim == 2 else '?'} words, "
                f"tree keys have {self.words_per_sig}"
            )
        n = words.shape[0]
        slots = np.empty(n, dtype=np.int64)
        dists = np.empty(n, dtype=np.int32)
        paths = np.empty((n, self.depth), dtype=np.int32) if with_paths else None
        for s in range(0, n, self._rows_per_chunk):
            e = min(n, s + self._rows_per_chunk)
            self._route_chunk(words[s:e], slots[s:e], dists[s:e],
                              paths[s:e] if with_paths else None)
        return RouteResult(slots, dists, paths)

    def _route_chunk(self, words, slots_out, dists_out, paths_out) -> None:
        b = words.shape[0]
        if b == 0:
            return
        cur = np.zeros(b, dtype=np.int64)
        rows = np.arange(b)
        sentinel = np.iinfo(np.int32).max
        last = None
        for lv, level in enumerate(self.levels):
            xor = np.bitwise_xor(words[:, None, :], level.keys[cur])
            dist = np.bitwise_count(xor).sum(axis=2, dtype=np.int32)
            dist[~level.valid[cur]] = sentinel
            rec = dist.argmin(axis=1)
            if paths_out is not None:
                paths_out[:, lv] = rec
            last = dist[rows, rec]
            cur = level.child[cur, rec]
        slots_out[:] = cur
        dists_out[:] = last

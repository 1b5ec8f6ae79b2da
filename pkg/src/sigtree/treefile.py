"""Binary tree file format.

Layout (little-endian): magic `TRE1`, u32 version=1, u32 dimension d,
u32 depth, then the node structure depth-first from the root: each node
is a u32 record count followed by its records in order, where a record
is the key's d/64 x u64 words and, above the leaf level, the child
node. Leaves hold no payload; loading a tree yields fresh, empty
accumulator leaves ready for another pass.
"""

from __future__ import annotations

import struct
from typing import BinaryIO

import numpy as np

from .errors import FormatError, MagicError, TruncatedError, VersionError
from .sigfile import _open, _read_exact
from .tree import Accumulator, Node, tree_depth

MAGIC = b"TRE1"
VERSION = 1
_HEADER = struct.Struct("<III")  # version, dimension, depth
_MAX_DEPTH = 64


def write_tree(root: Node, sink, dimension: int) -> None:
    if dimension <= 0 or dimension % 64 != 0:
        raise ValueError(f"dimension must be a positive multiple of 64, got {dimension}")
    if root.keys.shape[1] != dimension // 64:
        raise ValueError(f"tree keys have {root.keys.shape[1]} words, dimension {dimension} needs {dimension // 64}")
    depth = tree_depth(root)
    fh, owned = _open(sink, "wb")
    try:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(VERSION, dimension, depth))
        _write_node(fh, root, 1, depth)
        fh.flush()
    finally:
        if owned:
            fh.close()


def _write_node(fh: BinaryIO, node: Node, level: int, depth: int) -> None:
    fh.write(struct.pack("<I", node.n_records))
    for i, child in enumerate(node.children):
        fh.write(node.keys[i].astype("<u8", copy=False).tobytes())
        if level < depth:
            _write_node(fh, child, level + 1, depth)


def read_tree(source) -> tuple[Node, int, int]:
    """Load a tree; returns (root with empty accumulator leaves, dimension, depth)."""
    fh, owned = _open(source, "rb")
    try:
        magic = _read_exact(fh, 4, "magic")
        if magic != MAGIC:
            raise MagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
        version, dim, depth = _HEADER.unpack(_read_exact(fh, _HEADER.size, "header"))
        if version != VERSION:
            raise VersionError(f"unsupported tree file version {version}")
        if dim <= 0 or dim % 64 != 0:
            raise FormatError(f"dimension {dim} is not a positive multiple of 64")
        if not 1 <= depth <= _MAX_DEPTH:
            raise FormatError(f"depth {depth} out of range 1..{_MAX_DEPTH}")
        root = _read_node(fh, dim // 64, 1, depth)
        if fh.read(1):
            raise FormatError("trailing bytes after tree structure")
        return root, dim, depth
    finally:
        if owned:
            fh.close()


def _read_node(fh: BinaryIO, words_per_sig: int, level: int, depth: int) -> Node:
    count = struct.unpack("<I", _read_exact(fh, 4, "record count"))[0]
    if count == 0:
        raise FormatError("node with zero records")
    rows: list[np.ndarray] = []
    children: list = []
    for _ in range(count):
        raw = _read_exact(fh, words_per_sig * 8, "key words")
        rows.append(np.frombuffer(raw, dtype="<u8").astype(np.uint64, copy=False))
        if level < depth:
            children.append(_read_node(fh, words_per_sig, level + 1, depth))
        else:
            children.append(Accumulator())
    return Node(np.vstack(rows), children)

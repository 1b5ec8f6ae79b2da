"""Binary signature file format.

Layout (little-endian): magic `SGT1`, u32 version=1, u32 dimension d,
u64 record count n, then n records of [u16 doc_id byte length, doc_id
UTF-8 bytes, d/64 x u64 signature words]. Readers never preallocate
from the header count, so a corrupt count fails fast as truncation
rather than as a giant allocation.
"""

from __future__ import annotations

import io
import struct
from typing import BinaryIO, Iterator

import numpy as np

from .errors import (
    DuplicateDocIdError,
    FormatError,
    MagicError,
    TruncatedError,
    VersionError,
)
from .signatures import SignatureCollection, SignatureSpec

MAGIC = b"SGT1"
VERSION = 1
_HEADER = struct.Struct("<II Q")  # version, dimension, count (after magic)


def _open(source, mode: str):
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        return open(source, mode), True
    return source, False


def _read_exact(fh: BinaryIO, size: int, what: str) -> bytes:
    data = fh.read(size)
    if len(data) != size:
        raise TruncatedError(f"unexpected end of file while reading {what}")
    return data


def read_header(source) -> tuple[int, int]:
    """Return (dimension, count) from a signature file."""
    fh, owned = _open(source, "rb")
    try:
        return _read_header(fh)
    finally:
        if owned:
            fh.close()


def _read_header(fh: BinaryIO) -> tuple[int, int]:
    magic = _read_exact(fh, 4, "magic")
    if magic != MAGIC:
        raise MagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    version, dim, count = _HEADER.unpack(_read_exact(fh, _HEADER.size, "header"))
    if version != VERSION:
        raise VersionError(f"unsupported signature file version {version}")
    if dim <= 0 or dim % 64 != 0:
        raise FormatError(f"dimension {dim} is not a positive multiple of 64")
    return dim, count


def _read_record(fh: BinaryIO, words_per_sig: int) -> tuple[str, np.ndarray]:
    id_len = struct.unpack("<H", _read_exact(fh, 2, "doc_id length"))[0]
    raw_id = _read_exact(fh, id_len, "doc_id")
    try:
        doc_id = raw_id.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"doc_id is not valid UTF-8: {exc}") from None
    raw = _read_exact(fh, words_per_sig * 8, "signature words")
    words = np.frombuffer(raw, dtype="<u8").astype(np.uint64, copy=False)
    return doc_id, words


class SignatureWriter:
    """Streaming writer; the record count is patched into the header on close.

    Requires a seekable sink. Rejects duplicate doc ids.
    """

    def __init__(self, sink, dimension: int):
        if dimension <= 0 or dimension % 64 != 0:
            raise ValueError(f"dimension must be a positive multiple of 64, got {dimension}")
        self._fh, self._owned = _open(sink, "wb")
        self.dimension = dimension
        self.count = 0
        self._seen: set[str] = set()
        self._fh.write(MAGIC)
        self._fh.write(_HEADER.pack(VERSION, dimension, 0))

    def write(self, doc_id: str, words: np.ndarray) -> None:
        if doc_id in self._seen:
            raise DuplicateDocIdError(f"duplicate doc_id {doc_id!r}")
        raw_id = doc_id.encode("utf-8")
        if len(raw_id) > 0xFFFF:
            raise FormatError(f"doc_id longer than 65535 bytes: {doc_id[:40]!r}...")
        words = np.ascontiguousarray(words, dtype=np.uint64)
        if words.shape != (self.dimension // 64,):
            raise ValueError(f"signature has shape {words.shape}, expected ({self.dimension // 64},)")
        self._seen.add(doc_id)
        self._fh.write(struct.pack("<H", len(raw_id)))
        self._fh.write(raw_id)
        self._fh.write(words.astype("<u8", copy=False).tobytes())
        self.count += 1

    def close(self) -> None:
        self._fh.flush()
        self._fh.seek(4 + 4 + 4)  # magic + version + dimension
        self._fh.write(struct.pack("<Q", self.count))
        self._fh.flush()
        if self._owned:
            self._fh.close()

    def __enter__(self) -> "SignatureWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def write_signatures(coll: SignatureCollection, sink) -> None:
    """Write a whole collection; round-trips with read_signatures."""
    with SignatureWriter(sink, coll.spec.dimension) as w:
        for i, doc_id in enumerate(coll.doc_ids):
            w.write(doc_id, coll.words[i])


def iter_signatures(source, batch_size: int = 1024) -> Iterator[tuple[list[str], np.ndarray]]:
    """Yield (doc_ids, words) batches; words has shape (batch, d/64) uint64.

    Validates the record count against the header and rejects trailing
    bytes, so truncated or padded files always raise.
    """
    fh, owned = _open(source, "rb")
    try:
        dim, count = _read_header(fh)
        wps = dim // 64
        ids: list[str] = []
        rows: list[np.ndarray] = []
        for _ in range(count):
            doc_id, words = _read_record(fh, wps)
            ids.append(doc_id)
            rows.append(words)
            if len(ids) == batch_size:
                yield ids, np.vstack(rows)
                ids, rows = [], []
        if fh.read(1):
            raise FormatError("trailing bytes after final record")
        if ids:
            yield ids, np.vstack(rows)
    finally:
        if owned:
            fh.close()


def read_signatures(source) -> SignatureCollection:
    """Load a whole signature file into memory."""
    fh, owned = _open(source, "rb")
    try:
        dim, _ = _read_header(fh)
        fh.seek(0)
        doc_ids: list[str] = []
        rows: list[np.ndarray] = []
        seen: set[str] = set()
        for ids, words in iter_signatures(fh):
            for d in ids:
                if d in seen:
                    raise DuplicateDocIdError(f"duplicate doc_id {d!r}")
                seen.add(d)
            doc_ids.extend(ids)
            rows.append(words)
        mat = np.vstack(rows) if rows else np.empty((0, dim // 64), dtype=np.uint64)
        # code parameters are not recorded in the file; only d is pinned
        return SignatureCollection(SignatureSpec(dimension=dim), doc_ids, mat)
    finally:
        if owned:
            fh.close()


def write_collection_bytes(coll: SignatureCollection) -> bytes:
    buf = io.BytesIO()
    write_signatures(coll, buf)
    return buf.getvalue()

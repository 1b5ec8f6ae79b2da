"""Binary document signatures via sparse random indexing.

Every term gets a fixed sparse random code of balanced +1/-1 entries,
derived deterministically from the term string and a global seed. A
document's signature is the sign of the weighted sum of its term codes,
packed 64 dimensions per machine word so distances reduce to XOR plus
popcount.
"""

from __future__ import annotations

import functools
import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, DuplicateDocIdError

_MASK64 = (1 << 64) - 1
# splitmix64 constants; counter-based so codes need no stored dictionary
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


@dataclass(frozen=True)
class SignatureSpec:
    """Parameters of the signature space.

    dimension: signature width in bits, must be a positive multiple of 64.
    code_sparsity: nonzero entries per term code, positive and even.
    global_seed: 64-bit seed mixed into every term code.
    """

    dimension: int = 4096
    code_sparsity: int = 8
    global_seed: int = 0

    def __post_init__(self):
        if self.dimension <= 0 or self.dimension % 64 != 0:
            raise ValueError(f"dimension must be a positive multiple of 64, got {self.dimension}")
        if self.code_sparsity <= 0 or self.code_sparsity % 2 != 0:
            raise ValueError(f"code_sparsity must be positive and even, got {self.code_sparsity}")
        if self.code_sparsity > self.dimension:
            raise ValueError("code_sparsity cannot exceed dimension")
        if not 0 <= self.global_seed <= _MASK64:
            raise ValueError("global_seed must fit in 64 bits")

    @property
    def words(self) -> int:
        return self.dimension // 64


@dataclass
class TermVector:
    """Weighted bag of terms for one document."""

    doc_id: str
    entries: dict[str, float]

    def __post_init__(self):
        for term, weight in self.entries.items():
            if not term:
                raise ValueError("empty term in term vector")
            if weight <= 0:
                raise ValueError(f"non-positive weight for term {term!r}")


@dataclass
class Signature:
    """A document identifier plus its packed bit vector.

    Bit j of the signature is bit (j mod 64) of word (j // 64).
    """

    doc_id: str
    words: np.ndarray  # (dimension // 64,) uint64

    @property
    def dimension(self) -> int:
        return self.words.shape[0] * 64


class SignatureCollection:
    """Signatures of uniform width with unique document ids.

    Bits are held as one (n, words) uint64 matrix so that bulk distance
    computations stay inside numpy.
    """

    def __init__(self, spec: SignatureSpec, doc_ids: list[str], words: np.ndarray):
        words = np.asarray(words, dtype=np.uint64)
        if words.ndim != 2 or words.shape != (len(doc_ids), spec.words):
            raise ValueError(
                f"words must have shape ({len(doc_ids)}, {spec.words}), got {words.shape}"
            )
        if len(set(doc_ids)) != len(doc_ids):
            seen = set()
            dup = next(d for d in doc_ids if d in seen or seen.add(d))
            raise DuplicateDocIdError(f"duplicate doc_id {dup!r}")
        self.spec = spec
        self.doc_ids = list(doc_ids)
        self.words = words

    @classmethod
    def from_signatures(cls, spec: SignatureSpec, sigs: list[Signature]) -> "SignatureCollection":
        if sigs:
            mat = np.stack([s.words for s in sigs])
        else:
            mat = np.empty((0, spec.words), dtype=np.uint64)
        return cls(spec, [s.doc_id for s in sigs], mat)

    def __len__(self) -> int:
        return len(self.doc_ids)

    def __getitem__(self, i: int) -> Signature:
        return Signature(self.doc_ids[i], self.words[i])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]


def _hash64(term: str) -> int:
    digest = hashlib.blake2b(term.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _mix(seed: int, counter: int) -> int:
    z = (seed + counter * _GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


@functools.lru_cache(maxsize=1 << 20)
def term_code(term: str, spec: SignatureSpec) -> tuple[tuple[int, int], ...]:
    """Sparse random code for a term: ((index, sign), ...).

    Exactly spec.code_sparsity distinct indices, half +1 and half -1,
    a pure function of (term, spec.global_seed). Indices are drawn by
    rejection from a counter-based generator, so the draw is unbiased
    and reproducible across platforms.
    """
    if not term:
        raise ValueError("term must be nonempty")
    d = spec.dimension
    seed = _hash64(term) ^ spec.global_seed
    limit = ((_MASK64 + 1) // d) * d  # rejection bound: no modulo bias
    out: list[tuple[int, int]] = []
    seen: set[int] = set()
    counter = 0
    sign = 1
    while len(out) < spec.code_sparsity:
        counter += 1
        r = _mix(seed, counter)
        if r >= limit:
            continue
        idx = r % d
        if idx in seen:
            continue
        seen.add(idx)
        out.append((idx, sign))
        sign = -sign
    return tuple(out)


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a (d,) 0/1 array into (d // 64,) uint64 words."""
    packed = np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little")
    return packed.view("<u8").astype(np.uint64, copy=False)


def unpack_bits(words: np.ndarray) -> np.ndarray:
    """Unpack uint64 words back to 0/1 uint8 along the last axis."""
    words = np.ascontiguousarray(words, dtype=np.uint64)
    return np.unpackbits(words.view(np.uint8), axis=-1, bitorder="little")


def project_and_quantize(tv: TermVector, spec: SignatureSpec) -> Signature:
    """Project a term vector onto the random codes and quantize to bits.

    Accumulates weight * sign per dimension; bit j is 1 iff the
    accumulator is strictly positive. Ties, including the empty
    document, quantize to 0.
    """
    acc = np.zeros(spec.dimension, dtype=np.float64)
    for term, weight in tv.entries.items():
        for idx, sign in term_code(term, spec):
            acc[idx] += sign * weight
    return Signature(tv.doc_id, pack_bits(acc > 0))


def hamming(a: Signature, b: Signature) -> int:
    """Number of differing bit positions; XOR followed by popcount."""
    return hamming_words(a.words, b.words)


def hamming_words(a: np.ndarray, b: np.ndarray) -> int:
    if a.shape != b.shape:
        raise DimensionMismatchError(f"signature widths differ: {a.shape} vs {b.shape}")
    return int(np.bitwise_count(np.bitwise_xor(a, b)).sum(dtype=np.int64))


def hamming_matrix(points: np.ndarray, keys: np.ndarray) -> np.ndarray:
    """Pairwise distances between (n, w) points and (k, w) keys -> (n, k) int32."""
    if points.shape[-1] != keys.shape[-1]:
        raise DimensionMismatchError(
            f"signature widths differ: {points.shape[-1]} vs {keys.shape[-1]} words"
        )
    xor = np.bitwise_xor(points[:, None, :], keys[None, :, :])
    return np.bitwise_count(xor).sum(axis=2, dtype=np.int32)

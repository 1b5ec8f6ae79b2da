"""Tests for term codes, projection, bit packing, and hamming distances."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigtree import (
    DimensionMismatchError,
    DuplicateDocIdError,
    Signature,
    SignatureCollection,
    SignatureSpec,
    TermVector,
    hamming,
    hamming_matrix,
    hamming_words,
    pack_bits,
    project_and_quantize,
    term_code,
    unpack_bits,
)


class TestSignatureSpec:
    def test_defaults(self):
        spec = SignatureSpec()
        assert spec.dimension == 4096
        assert spec.code_sparsity == 8
        assert spec.global_seed == 0
        assert spec.words == 64

    @pytest.mark.parametrize("dim", [0, -64, 63, 100, 65])
    def test_rejects_bad_dimension(self, dim):
        with pytest.raises(ValueError):
            SignatureSpec(dimension=dim)

    @pytest.mark.parametrize("sparsity", [0, -2, 3, 7])
    def test_rejects_odd_or_nonpositive_sparsity(self, sparsity):
        with pytest.raises(ValueError):
            SignatureSpec(dimension=256, code_sparsity=sparsity)

    def test_rejects_sparsity_above_dimension(self):
        with pytest.raises(ValueError):
            SignatureSpec(dimension=64, code_sparsity=66)

    @pytest.mark.parametrize("seed", [-1, 1 << 64])
    def test_rejects_out_of_range_seed(self, seed):
        with pytest.raises(ValueError):
            SignatureSpec(global_seed=seed)

    def test_words_property(self):
        assert SignatureSpec(dimension=128).words == 2


class TestTermVector:
    def test_rejects_empty_term(self):
        with pytest.raises(ValueError):
            TermVector("d1", {"": 1.0})

    @pytest.mark.parametrize("w", [0.0, -1.0])
    def test_rejects_non_positive_weight(self, w):
        with pytest.raises(ValueError):
            TermVector("d1", {"cat": w})


class TestTermCode:
    SPEC = SignatureSpec(dimension=256, code_sparsity=8, global_seed=42)

    def test_deterministic_across_equal_specs(self):
        # frozen dataclass hashes by value, so equal specs share codes
        other = SignatureSpec(dimension=256, code_sparsity=8, global_seed=42)
        assert term_code("alpha", self.SPEC) == term_code("alpha", other)

    def test_entry_count_and_range(self):
        code = term_code("alpha", self.SPEC)
        assert len(code) == self.SPEC.code_sparsity
        for idx, sign in code:
            assert 0 <= idx < self.SPEC.dimension
            assert sign in (1, -1)

    def test_indices_distinct(self):
        for term in ("alpha", "beta", "gamma", "x"):
            idxs = [i for i, _ in term_code(term, self.SPEC)]
            assert len(set(idxs)) == len(idxs)

    def test_signs_balanced(self):
        for term in ("alpha", "beta", "gamma", "delta", "epsilon"):
            signs = [s for _, s in term_code(term, self.SPEC)]
            assert signs.count(1) == signs.count(-1) == self.SPEC.code_sparsity // 2

    def test_rejects_empty_term(self):
        with pytest.raises(ValueError):
            term_code("", self.SPEC)

    def test_seed_changes_codes(self):
        moved = 0
        for i in range(100):
            a = term_code(f"t{i}", SignatureSpec(dimension=256, code_sparsity=8, global_seed=0))
            b = term_code(f"t{i}", SignatureSpec(dimension=256, code_sparsity=8, global_seed=1))
            if a != b:
                moved += 1
        assert moved >= 95

    def test_distinct_terms_mostly_distinct_codes(self):
        codes = {term_code(f"t{i}", self.SPEC) for i in range(1000)}
        assert len(codes) >= 995

    def test_index_frequency_uniform(self):
        # 10k terms x 8 entries over 256 slots: expect 312.5 per slot,
        # multinomial sigma ~17.6, so a 5-sigma band is [224, 401]
        counts = np.zeros(256, dtype=np.int64)
        for i in range(10_000):
            for idx, _ in term_code(f"word{i}", self.SPEC):
                counts[idx] += 1
        assert counts.sum() == 80_000
        assert counts.min() >= 224
        assert counts.max() <= 401


class TestPackBits:
    def test_round_trip(self):
        rng = np.random.default_rng(5)
        bits = rng.integers(0, 2, size=256).astype(np.uint8)
        assert np.array_equal(unpack_bits(pack_bits(bits)), bits)

    def test_bit_placement(self):
        # bit j lives at bit (j mod 64) of word (j // 64)
        bits = np.zeros(128, dtype=np.uint8)
        bits[70] = 1
        words = pack_bits(bits)
        assert words.dtype == np.uint64
        assert words.shape == (2,)
        assert words[0] == 0
        assert words[1] == np.uint64(1) << np.uint64(6)

    def test_all_ones(self):
        words = pack_bits(np.ones(64, dtype=np.uint8))
        assert words[0] == np.uint64(0xFFFFFFFFFFFFFFFF)

    def test_unpack_matrix_rows(self):
        rng = np.random.default_rng(6)
        mat = rng.integers(0, 1 << 63, size=(4, 2), dtype=np.uint64)
        bits = unpack_bits(mat)
        assert bits.shape == (4, 128)
        for r in range(4):
            assert np.array_equal(bits[r], unpack_bits(mat[r]))

    @given(st.lists(st.integers(0, 1), min_size=64, max_size=64))
    def test_pack_inverts_unpack(self, raw):
        bits = np.array(raw, dtype=np.uint8)
        assert np.array_equal(unpack_bits(pack_bits(bits)), bits)


class TestProjectAndQuantize:
    SPEC = SignatureSpec(dimension=128, code_sparsity=8, global_seed=7)

    def test_empty_document_is_all_zero(self):
        # empty accumulator ties at zero everywhere, and ties quantize to 0
        sig = project_and_quantize(TermVector("d0", {}), self.SPEC)
        assert sig.doc_id == "d0"
        assert not sig.words.any()

    def test_single_term_sets_positive_code_positions(self):
        sig = project_and_quantize(TermVector("d1", {"cat": 1.0}), self.SPEC)
        bits = unpack_bits(sig.words)
        expect = np.zeros(self.SPEC.dimension, dtype=np.uint8)
        for idx, sign in term_code("cat", self.SPEC):
            if sign > 0:
                expect[idx] = 1
        assert np.array_equal(bits, expect)

    def test_matches_dense_accumulator_oracle(self):
        spec = SignatureSpec(dimension=64, code_sparsity=4, global_seed=3)
        entries = {"cat": 2.0, "dog": 1.5, "eel": 0.25, "fox": 3.0}
        acc = np.zeros(64)
        for term, weight in entries.items():
            for idx, sign in term_code(term, spec):
                acc[idx] += sign * weight
        sig = project_and_quantize(TermVector("d2", entries), spec)
        assert np.array_equal(unpack_bits(sig.words), (acc > 0).astype(np.uint8))

    def test_exact_tie_quantizes_to_zero(self):
        # find two terms whose codes share a slot with opposite signs,
        # then weight them equally so that slot cancels to exactly 0
        spec = SignatureSpec(dimension=64, code_sparsity=8, global_seed=1)
        found = None
        pool = [f"w{i}" for i in range(200)]
        for a in pool:
            pos = {i for i, s in term_code(a, spec) if s > 0}
            for b in pool:
                if b == a:
                    continue
                neg = {i for i, s in term_code(b, spec) if s < 0}
                both = pos & neg
                joint = {i for i, _ in term_code(a, spec)} & {i for i, _ in term_code(b, spec)}
                if both and both == joint:
                    found = (a, b, both)
                    break
            if found:
                break
        assert found, "no cancelling term pair in pool"
        a, b, slots = found
        sig = project_and_quantize(TermVector("d", {a: 1.0, b: 1.0}), spec)
        bits = unpack_bits(sig.words)
        for slot in slots:
            assert bits[slot] == 0

    def test_deterministic(self):
        tv = TermVector("d", {"alpha": 1.0, "beta": 2.0})
        a = project_and_quantize(tv, self.SPEC)
        b = project_and_quantize(tv, self.SPEC)
        assert np.array_equal(a.words, b.words)

    @given(st.dictionaries(st.sampled_from([f"t{i}" for i in range(30)]),
                           st.floats(0.1, 10.0), max_size=10))
    @settings(max_examples=50, deadline=None)
    def test_support_limited_to_code_positions(self, entries):
        sig = project_and_quantize(TermVector("d", entries), self.SPEC)
        bits = unpack_bits(sig.words)
        allowed = set()
        for term in entries:
            allowed.update(i for i, _ in term_code(term, self.SPEC))
        set_positions = set(np.flatnonzero(bits).tolist())
        assert set_positions <= allowed


def _random_words(rng: np.random.Generator, w: int) -> np.ndarray:
    lo = rng.integers(0, 1 << 62, size=w, dtype=np.uint64)
    hi = rng.integers(0, 4, size=w, dtype=np.uint64) << np.uint64(62)
    return lo | hi


class TestHamming:
    def test_identity_zero(self):
        rng = np.random.default_rng(11)
        a = Signature("a", _random_words(rng, 2))
        assert hamming(a, a) == 0

    def test_complement_is_dimension(self):
        rng = np.random.default_rng(12)
        words = _random_words(rng, 2)
        a = Signature("a", words)
        b = Signature("b", ~words)
        assert hamming(a, b) == 128

    def test_known_value(self):
        a = np.array([0b1011], dtype=np.uint64)
        b = np.array([0b0001], dtype=np.uint64)
        assert hamming_words(a, b) == 2

    def test_matches_per_bit_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            a = _random_words(rng, 2)
            b = _random_words(rng, 2)
            oracle = int((unpack_bits(a) != unpack_bits(b)).sum())
            assert hamming_words(a, b) == oracle

    def test_width_mismatch_raises(self):
        with pytest.raises(DimensionMismatchError):
            hamming_words(np.zeros(2, dtype=np.uint64), np.zeros(3, dtype=np.uint64))

    @given(st.integers(0, (1 << 64) - 1), st.integers(0, (1 << 64) - 1),
           st.integers(0, (1 << 64) - 1))
    def test_metric_properties(self, x, y, z):
        a = np.array([x], dtype=np.uint64)
        b = np.array([y], dtype=np.uint64)
        c = np.array([z], dtype=np.uint64)
        ab = hamming_words(a, b)
        assert ab == hamming_words(b, a)
        assert (ab == 0) == (x == y)
        assert ab <= hamming_words(a, c) + hamming_words(c, b)


class TestHammingMatrix:
    def test_matches_pairwise_loop(self):
        rng = np.random.default_rng(14)
        points = np.stack([_random_words(rng, 4) for _ in range(6)])
        keys = np.stack([_random_words(rng, 4) for _ in range(3)])
        got = hamming_matrix(points, keys)
        assert got.shape == (6, 3)
        assert got.dtype == np.int32
        for i in range(6):
            for j in range(3):
                assert got[i, j] == hamming_words(points[i], keys[j])

    def test_width_mismatch_raises(self):
        with pytest.raises(DimensionMismatchError):
            hamming_matrix(np.zeros((2, 2), dtype=np.uint64), np.zeros((2, 3), dtype=np.uint64))


class TestSignatureCollection:
    SPEC = SignatureSpec(dimension=128, code_sparsity=8, global_seed=0)

    def test_duplicate_ids_rejected(self):
        words = np.zeros((2, 2), dtype=np.uint64)
        with pytest.raises(DuplicateDocIdError):
            SignatureCollection(self.SPEC, ["d1", "d1"], words)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            SignatureCollection(self.SPEC, ["d1"], np.zeros((1, 3), dtype=np.uint64))
        with pytest.raises(ValueError):
            SignatureCollection(self.SPEC, ["d1", "d2"], np.zeros((1, 2), dtype=np.uint64))

    def test_from_signatures_empty(self):
        coll = SignatureCollection.from_signatures(self.SPEC, [])
        assert len(coll) == 0
        assert coll.words.shape == (0, 2)

    def test_round_trip_access(self):
        rng = np.random.default_rng(15)
        sigs = [Signature(f"d{i}", _random_words(rng, 2)) for i in range(4)]
        coll = SignatureCollection.from_signatures(self.SPEC, sigs)
        assert len(coll) == 4
        assert [s.doc_id for s in coll] == ["d0", "d1", "d2", "d3"]
        got = coll[2]
        assert got.doc_id == "d2"
        assert np.array_equal(got.words, sigs[2].words)
        assert got.dimension == 128

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fakenews.forest import _mulhi, _partial_shuffle
from fakenews.rng import Rng


class TestStream:
    def test_same_seed_same_words(self):
        assert np.array_equal(Rng(7).raw(50), Rng(7).raw(50))

    def test_seeds_differ(self):
        assert not np.array_equal(Rng(7).raw(8), Rng(8).raw(8))

    def test_pinned_first_words(self):
        # frozen from the PCG64 raw stream; a change here breaks every seeded result
        expected = [int(w) for w in np.random.PCG64(42).random_raw(3)]
        assert Rng(42).raw(3).tolist() == expected

    def test_negative_seed(self):
        with pytest.raises(ValueError):
            Rng(-1)

    def test_random_in_unit_interval(self):
        u = Rng(1).random(10_000)
        assert u.min() >= 0.0 and u.max() < 1.0
        assert abs(u.mean() - 0.5) < 0.02

    def test_random_is_top_53_bits(self):
        w = Rng(3).raw(5)
        u = Rng(3).random(5)
        assert u.tolist() == [(int(x) >> 11) / 2.0 ** 53 for x in w]

    def test_below_bound(self):
        r = Rng(5)
        draws = [r.below(3) for _ in range(300)]
        assert set(draws) == {0, 1, 2}

    def test_integers_range(self):
        v = Rng(9).integers(7, 1000)
        assert v.min() == 0 and v.max() == 6


class TestPermutation:
    @given(st.integers(0, 60), st.integers(0, 2**32))
    def test_is_permutation(self, n, seed):
        p = Rng(seed).permutation(n)
        assert sorted(p.tolist()) == list(range(n))

    def test_matches_reference_walk(self):
        n = 9
        words = [int(w) for w in Rng(11).raw(n - 1)]
        ref = list(range(n))
        for k, i in enumerate(range(n - 1, 0, -1)):
            j = words[k] * (i + 1) // 2**64
            ref[i], ref[j] = ref[j], ref[i]
        assert Rng(11).permutation(n).tolist() == ref

    @settings(max_examples=50)
    @given(st.integers(1, 40), st.integers(0, 40), st.integers(0, 1000))
    def test_partial_shuffle_subset(self, n, k, seed):
        pool = np.arange(n)
        front = Rng(seed).partial_shuffle(pool, k).copy()
        assert len(front) == min(k, n)
        assert len(set(front.tolist())) == len(front)
        assert sorted(pool.tolist()) == list(range(n))

    def test_partial_shuffle_matches_compiled_kernel(self):
        for seed in range(20):
            a = np.arange(30, dtype=np.int64)
            b = a.copy()
            Rng(seed).partial_shuffle(a, 7)
            _partial_shuffle(b, Rng(seed).raw(7), 7)
            assert np.array_equal(a, b)


class TestMulhi:
    @given(st.integers(0, 2**64 - 1), st.integers(0, 2**64 - 1))
    def test_matches_python_ints(self, word, bound):
        assert _mulhi(np.uint64(word), np.uint64(bound)) == (word * bound) >> 64

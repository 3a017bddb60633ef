import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.encode import (
    CorpusEncoding,
    FeatureSchema,
    Standardizer,
    encode_txn,
    fit_standardizer,
    sample_windows,
    window_offsets,
)
from src.errors import ConfigurationError, EncodingError
from src.schemas import DuvParams


@pytest.fixture
def schema(params):
    return FeatureSchema.for_params(params)


class TestSchema:
    def test_default_width(self, schema):
        assert schema.onehot_dim == 15
        assert schema.encoded_dim == 25

    def test_width_follows_params(self):
        schema = FeatureSchema.for_params(DuvParams(M=6, S=2))
        assert schema.encoded_dim == 2 + 6 + 2 + 3 + 2 + 10

    def test_onehot_blocks(self, schema, make_txn):
        txn = make_txn(ttype="WRITE", master=2, slave=3, burst_kind="WRAP", burst_len=4, priority="HIGH")
        row = schema.onehot([txn])[0]
        expected = np.zeros(15)
        expected[[1, 2 + 2, 6 + 3, 10 + 2, 13 + 1]] = 1.0
        np.testing.assert_array_equal(row, expected)

    def test_unknown_category(self, schema, make_txn):
        with pytest.raises(EncodingError):
            schema.onehot([make_txn(master=5)])


class TestStandardizer:
    def test_two_values(self):
        std = Standardizer(np.array([[0.0], [2.0]]))
        assert std.mean[0] == pytest.approx(1.0)
        assert std.stddev[0] == pytest.approx(1.0)
        np.testing.assert_allclose(std.transform(np.array([[0.0], [2.0]])), [[-1.0], [1.0]])

    def test_constant_attribute_is_centered_only(self):
        std = Standardizer(np.array([[5.0, 0.0], [5.0, 4.0]]))
        assert std.constant.tolist() == [True, False]
        np.testing.assert_allclose(std.transform(np.array([[5.0, 2.0]])), [[0.0, 0.0]])

    def test_empty_rejected(self):
        with pytest.raises(ConfigurationError):
            fit_standardizer([])

    def test_standardized_population_statistics(self, small_corpus, schema):
        std = fit_standardizer(small_corpus, schema)
        txns = [t for test in small_corpus for t in test.txns]
        z = std.transform(schema.raw_numeric(txns))
        live = ~std.constant
        np.testing.assert_allclose(z.mean(axis=0), 0.0, atol=1e-9)
        np.testing.assert_allclose(z[:, live].std(axis=0), 1.0, atol=1e-9)

    def test_encode_txn_layout(self, small_corpus, schema):
        std = fit_standardizer(small_corpus, schema)
        txn = small_corpus[0].txns[0]
        vec = encode_txn(txn, schema, std)
        assert vec.shape == (25,)
        assert vec[:15].sum() == 5.0


class TestWindows:
    @pytest.mark.parametrize(
        "length, L, step, expected",
        [(6, 3, 3, [0, 3]), (7, 3, 3, [0, 3, 4]), (6, 3, 2, [0, 2, 3]), (3, 3, 1, [0]), (2, 5, 1, [0])],
    )
    def test_offsets(self, length, L, step, expected):
        assert window_offsets(length, L, step) == expected

    @pytest.mark.parametrize("L, step", [(0, 1), (3, 0)])
    def test_bad_window(self, L, step):
        with pytest.raises(ConfigurationError):
            window_offsets(10, L, step)

    @given(length=st.integers(1, 60), L=st.integers(1, 25), step_frac=st.floats(0.0, 1.0))
    def test_every_position_is_sampled(self, length, L, step_frac):
        step = max(1, round(step_frac * L))
        offsets = window_offsets(length, L, step)
        assert offsets == sorted(set(offsets))
        assert all(o + L <= max(length, L) for o in offsets)
        covered = set()
        for o in offsets:
            covered.update(range(o, min(o + L, length)))
        assert covered == set(range(length))

    def test_short_test_is_left_padded(self, make_test, schema, small_corpus):
        std = fit_standardizer(small_corpus, schema)
        test = make_test({}, {"ttype": "WRITE"}, test_id=9)
        windows = sample_windows(test, 4, 2, schema, std)
        assert len(windows) == 1
        vectors = windows[0].vectors
        assert vectors.shape == (4, 25)
        np.testing.assert_array_equal(vectors[:2], 0.0)
        assert vectors[3, 1] == 1.0
        assert windows[0].test_id == 9

    def test_windows_match_encoded_slices(self, small_corpus, schema):
        std = fit_standardizer(small_corpus, schema)
        test = small_corpus[4]
        windows = sample_windows(test, 5, 2, schema, std)
        full = np.stack([encode_txn(t, schema, std) for t in test.txns])
        for w in windows:
            np.testing.assert_allclose(w.vectors, full[w.offset : w.offset + 5])


class TestCorpusEncoding:
    def test_matches_per_test_encoding(self, small_corpus, schema):
        enc = CorpusEncoding(small_corpus, schema)
        std = enc.fit_standardizer([t.test_id for t in small_corpus])
        reference = fit_standardizer(small_corpus, schema)
        np.testing.assert_allclose(std.mean, reference.mean)
        test = small_corpus[7]
        windows, owners = enc.windows([test.test_id], std, 5, 3)
        expected = np.stack([w.vectors for w in sample_windows(test, 5, 3, schema, reference)])
        np.testing.assert_allclose(windows, expected)
        assert set(owners.tolist()) == {0}

    def test_owners_index_positions(self, small_corpus, schema):
        enc = CorpusEncoding(small_corpus, schema)
        std = enc.fit_standardizer([0, 1, 2])
        ids = [5, 2, 11]
        windows, owners = enc.windows(ids, std, 4, 4)
        assert windows.shape[1:] == (4, 25)
        assert np.array_equal(np.unique(owners), [0, 1, 2])
        assert np.all(np.diff(owners) >= 0)

    def test_coarse_granularity(self, small_corpus, schema):
        enc = CorpusEncoding(small_corpus, schema)
        std = enc.fit_standardizer([0])
        windows, owners = enc.windows([3, 4], std, 10, 5, granularity="coarse")
        assert windows.shape == (2, 1, 25)
        np.testing.assert_allclose(windows[0, 0], enc.encoded(3, std).mean(axis=0))
        assert owners.tolist() == [0, 1]

    def test_no_tests(self, small_corpus, schema):
        enc = CorpusEncoding(small_corpus, schema)
        windows, owners = enc.windows([], enc.fit_standardizer([0]), 6, 3)
        assert windows.shape == (0, 6, 25) and owners.shape == (0,)

    def test_standardizer_needs_tests(self, small_corpus, schema):
        with pytest.raises(ConfigurationError):
            CorpusEncoding(small_corpus, schema).fit_standardizer([])

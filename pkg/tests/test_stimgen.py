import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from src.errors import ConfigurationError, CorpusParseError, EmptyCorpusError, StimulusValidationError
from src.schemas import PROFILE_NAMES, WRAP_LENGTHS, DuvParams, GenProfile, Test
from src.stimgen import (
    gen_corpus,
    gen_test,
    get_profile,
    load_corpus,
    parse_mix,
    save_corpus,
    split_counts,
    validate_test,
)

DEFAULT_MIX = {"UNIFORM": 0.78, "BURSTY": 0.11, "SPARSE_PACING": 0.11}


class TestGenTest:
    def test_degenerate_length_range(self):
        test = gen_test(7, get_profile("UNIFORM"), (1, 1))
        assert len(test.txns) == 1

    def test_same_inputs_give_identical_tests(self):
        a = gen_test(7, get_profile("BURSTY"), (60, 100))
        b = gen_test(7, get_profile("BURSTY"), (60, 100))
        assert a.model_dump_json() == b.model_dump_json()

    def test_different_seeds_differ(self):
        a = gen_test(1, get_profile("UNIFORM"), (20, 20))
        b = gen_test(2, get_profile("UNIFORM"), (20, 20))
        assert a != b

    def test_length_within_range(self):
        lengths = {len(gen_test(s, get_profile("UNIFORM"), (3, 5)).txns) for s in range(200)}
        assert lengths == {3, 4, 5}

    def test_sparse_pacing_waits_are_mostly_zero(self):
        profile = get_profile("SPARSE_PACING")
        waits = np.array(
            [t.waits for seed in range(1000) for t in gen_test(seed, profile, (60, 100)).txns]
        )
        assert np.mean(waits == 0) >= 0.90

    def test_stall_depth_by_profile(self):
        def waits(name):
            profile = get_profile(name)
            return np.array([t.waits for seed in range(200) for t in gen_test(seed, profile, (60, 100)).txns])

        uniform, bursty = waits("UNIFORM"), waits("BURSTY")
        # UNIFORM: P(w >= 2) = 5/85, P(w = 3) = 1/85; BURSTY decays by 0.65 per cycle
        assert np.mean(uniform >= 2) < 0.08
        assert np.mean(uniform == 3) < 0.02
        assert np.mean(bursty >= 2) > 0.25
        assert np.mean(bursty == 3) > 0.08

    def test_large_corpus_conforms(self, params):
        corpus = gen_corpus(seed=5, n_tests=200, mix=DEFAULT_MIX, len_range=(60, 100))
        assert sum(len(t) for t in corpus) >= 10_000
        for test in corpus:
            validate_test(test, params)

    @pytest.mark.parametrize("bad", [(0, 5), (5, 4), (-1, 3)])
    def test_invalid_length_range(self, bad):
        with pytest.raises(ConfigurationError):
            gen_test(1, get_profile("UNIFORM"), bad)

    def test_profile_params_mismatch(self):
        profile = get_profile("UNIFORM", DuvParams(M=2))
        with pytest.raises(ConfigurationError):
            gen_test(1, profile, (5, 5), DuvParams(M=4))

    @settings(max_examples=60, deadline=None)
    @given(
        seed=st.integers(0, 2**32 - 1),
        name=st.sampled_from(PROFILE_NAMES),
        M=st.integers(1, 5),
        S=st.integers(1, 5),
        W=st.integers(1, 4),
        B=st.integers(1, 9),
    )
    def test_schema_conformance(self, seed, name, M, S, W, B):
        params = DuvParams(M=M, S=S, W=W, B=B)
        test = gen_test(seed, get_profile(name, params), (100, 200), params)
        validate_test(test, params)
        for txn in test.txns:
            if txn.burst_kind == "SINGLE":
                assert txn.burst_len == 1
            if txn.burst_kind == "WRAP":
                assert txn.burst_len in WRAP_LENGTHS and txn.burst_len <= B
            assert 1 <= txn.burst_len <= B


class TestProfiles:
    @pytest.mark.parametrize("name", PROFILE_NAMES)
    @pytest.mark.parametrize("params", [DuvParams(), DuvParams(M=1, S=2, W=1, B=1), DuvParams(M=6, W=5, B=16)])
    def test_builtin_profiles_are_valid(self, name, params):
        profile = get_profile(name, params)
        assert len(profile.weights["wait"]) == params.W + 1
        assert len(profile.weights["master"]) == params.M
        for probs in profile.weights.values():
            assert sum(probs) == pytest.approx(1.0, abs=1e-9)

    def test_aliases(self):
        assert get_profile("sparse").name == "SPARSE_PACING"

    def test_unknown_profile(self):
        with pytest.raises(ConfigurationError):
            get_profile("GOLDEN")

    def test_weights_must_sum_to_one(self):
        weights = dict(get_profile("UNIFORM").weights)
        weights["ttype"] = (0.7, 0.7)
        with pytest.raises(ValidationError):
            GenProfile(name="UNIFORM", weights=weights)

    def test_negative_weight_rejected(self):
        weights = dict(get_profile("UNIFORM").weights)
        weights["ttype"] = (1.5, -0.5)
        with pytest.raises(ValidationError):
            GenProfile(name="UNIFORM", weights=weights)


class TestCorpus:
    def test_single_profile_ids(self):
        corpus = gen_corpus(seed=1, n_tests=10, mix={"UNIFORM": 1.0}, len_range=(5, 9))
        assert [t.test_id for t in corpus] == list(range(10))
        assert all(5 <= len(t.txns) <= 9 for t in corpus)

    def test_largest_remainder_split(self):
        assert split_counts(2000, DEFAULT_MIX) == {"UNIFORM": 1560, "BURSTY": 220, "SPARSE_PACING": 220}

    def test_remainder_goes_to_largest_fraction(self):
        # 10·(0.34, 0.33, 0.33) = 3.4, 3.3, 3.3 -> floors 3,3,3 and the spare goes first
        assert split_counts(10, {"UNIFORM": 0.34, "BURSTY": 0.33, "SPARSE_PACING": 0.33}) == {
            "UNIFORM": 4,
            "BURSTY": 3,
            "SPARSE_PACING": 3,
        }

    def test_zero_tests_rejected(self):
        with pytest.raises(ConfigurationError):
            gen_corpus(seed=1, n_tests=0, mix={"UNIFORM": 1.0}, len_range=(5, 9))

    def test_fractions_must_sum_to_one(self):
        with pytest.raises(ConfigurationError):
            gen_corpus(seed=1, n_tests=10, mix={"UNIFORM": 0.5, "BURSTY": 0.4}, len_range=(5, 9))

    def test_corpus_is_deterministic(self):
        a = gen_corpus(seed=4, n_tests=12, mix=DEFAULT_MIX, len_range=(3, 6))
        b = gen_corpus(seed=4, n_tests=12, mix=DEFAULT_MIX, len_range=(3, 6))
        assert a == b

    def test_parse_mix(self):
        assert parse_mix("uniform=0.78,bursty=0.11,sparse=0.11") == DEFAULT_MIX

    @pytest.mark.parametrize("text", ["uniform", "golden=1.0", "uniform=abc"])
    def test_parse_mix_errors(self, text):
        with pytest.raises(ConfigurationError):
            parse_mix(text)


class TestCorpusFiles:
    def test_round_trip(self, tmp_path):
        corpus = gen_corpus(seed=1, n_tests=10, mix=DEFAULT_MIX, len_range=(5, 9))
        path = tmp_path / "corpus.jsonl"
        save_corpus(path, corpus)
        assert load_corpus(path) == corpus
        assert len(path.read_text().splitlines()) == 10

    def test_truncated_last_line(self, tmp_path):
        corpus = gen_corpus(seed=1, n_tests=10, mix=DEFAULT_MIX, len_range=(5, 9))
        path = tmp_path / "corpus.jsonl"
        save_corpus(path, corpus)
        text = path.read_text()
        path.write_text(text[: len(text) - 40])
        with pytest.raises(CorpusParseError) as info:
            load_corpus(path)
        assert info.value.line_no == 10
        assert "line 10" in str(info.value)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        with pytest.raises(EmptyCorpusError):
            load_corpus(path)

    def test_duplicate_ids(self, tmp_path):
        test = gen_test(1, get_profile("UNIFORM"), (2, 2))
        path = tmp_path / "dup.jsonl"
        save_corpus(path, [test, test])
        with pytest.raises(CorpusParseError) as info:
            load_corpus(path)
        assert info.value.line_no == 2


class TestValidation:
    def test_names_offending_index(self, make_test):
        test = make_test({}, {"master": 5})
        with pytest.raises(StimulusValidationError) as info:
            validate_test(test, DuvParams())
        assert info.value.index == 1

    def test_wait_above_w(self, make_test):
        with pytest.raises(StimulusValidationError):
            validate_test(make_test({"w1": 3}), DuvParams(W=2))

    def test_single_burst_length_rule(self, make_txn):
        with pytest.raises(ValidationError):
            make_txn(burst_kind="SINGLE", burst_len=2)

    def test_wrap_length_rule(self, make_txn):
        with pytest.raises(ValidationError):
            make_txn(burst_kind="WRAP", burst_len=3)

    def test_empty_test_rejected(self):
        with pytest.raises(ValidationError):
            Test(test_id=0, txns=())

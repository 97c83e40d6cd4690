import math

import numpy as np
import pytest

from src.hbf.domain import events, model
from src.hbf.domain.exceptions import (
    DuplicateKey,
    DuplicateLabel,
    EmptyMemory,
    InvalidArgument,
    UnsupportedDimension,
)
from src.hbf.domain.hypervector import clear_codebook_caches, fft_tolerance
from src.hbf.service_layer import experiments

THREE_RECORDS = [(b"x1", b"y1"), (b"x2", b"y2"), (b"x3", b"y3")]
THREE_LABELS = [b"y1", b"y2", b"y3"]


class TestBuild:
    @staticmethod
    def test_worked_example_decodes_the_second_record(argmax):
        mem = model.build(THREE_RECORDS, 10000)
        outcome = model.decode(mem, b"x2", argmax, THREE_LABELS)
        assert isinstance(outcome, model.Hit)
        assert outcome.label == b"y2"
        assert outcome.best_score > outcome.runner_up

    @staticmethod
    def test_absent_key_is_rejected_with_a_calibrated_threshold():
        mem = model.build(THREE_RECORDS, 8192)
        decoder = experiments.calibrate_decoder(mem, THREE_LABELS, 1000, 0.01, seed=1)
        outcomes = [
            model.decode(mem, b"absent-%04d" % i, decoder, THREE_LABELS)
            for i in range(1000)
        ]
        rejected = sum(isinstance(outcome, model.Reject) for outcome in outcomes)
        assert rejected >= 990

    @staticmethod
    def test_build_order_does_not_change_the_memory():
        records = [(b"k%03d" % i, b"v%d" % (i % 7)) for i in range(50)]
        forward = model.build(records, 512)
        backward = model.build(list(reversed(records)), 512)
        assert forward == backward
        assert forward.vector.tobytes() == backward.vector.tobytes()

    @staticmethod
    def test_insert_matches_build():
        records = [(b"k%03d" % i, b"v%d" % (i % 5)) for i in range(20)]
        built = model.build(records, 256)
        mem = model.HbfMemory.zeros(256)
        for key, value in sorted(records):
            mem = model.insert(mem, key, value)
        assert mem.item_count == built.item_count == 20
        tol = 20 * fft_tolerance(np.ones(256), np.ones(256))
        assert np.max(np.abs(mem.vector - built.vector)) <= tol

    @staticmethod
    def test_empty_build_is_the_zero_memory():
        mem = model.build([], 64)
        assert mem.item_count == 0
        assert not np.any(mem.vector)

    @staticmethod
    def test_normalize_scales_the_gain():
        records = [(b"k%d" % i, b"v") for i in range(16)]
        mem = model.build(records, 128, gain=2.0, normalize=True)
        assert mem.gain == pytest.approx(0.5)
        plain = model.build(records, 128, gain=0.5)
        assert np.allclose(mem.vector, plain.vector)

    @staticmethod
    def test_duplicate_keys_are_rejected():
        with pytest.raises(DuplicateKey):
            model.build([(b"k", b"a"), (b"k", b"b")], 64)

    @staticmethod
    @pytest.mark.parametrize("dim", [0, 1])
    def test_tiny_dimensions_are_rejected(dim):
        with pytest.raises(UnsupportedDimension):
            model.build([(b"k", b"v")], dim)

    @staticmethod
    @pytest.mark.parametrize("gain", [0.0, -1.0, math.inf])
    def test_gain_must_be_positive_and_finite(gain):
        with pytest.raises(InvalidArgument):
            model.build([(b"k", b"v")], 64, gain=gain)

    @staticmethod
    def test_memory_vector_is_read_only():
        mem = model.build([(b"k", b"v")], 64)
        with pytest.raises(ValueError):
            mem.vector[0] = 1.0

    @staticmethod
    def test_inserting_a_pair_twice_doubles_its_score():
        records = [(b"k%d" % i, b"v%d" % i) for i in range(4)]
        mem = model.build(records, 8192)
        value = mem.value_codebook.vector(b"v0")
        once = model.correlate_query(mem, b"k0") @ value
        twice_mem = model.insert(mem, b"k0", b"v0")
        twice = model.correlate_query(twice_mem, b"k0") @ value
        assert twice_mem.item_count == 5
        assert twice / once == pytest.approx(2.0, rel=0.05)

    @staticmethod
    def test_zero_memory_correlates_to_zero():
        z = model.correlate_query(model.HbfMemory.zeros(256), b"anything")
        assert z.shape == (256,)
        assert not np.any(z)

    @staticmethod
    def test_repeated_runs_decode_bit_identically(argmax):
        records = [(b"k%02d" % i, b"v%d" % (i % 6)) for i in range(30)]
        labels = sorted({value for _, value in records})

        def run():
            clear_codebook_caches()
            mem = model.build(records, 1024)
            return [model.decode(mem, key, argmax, labels) for key, _ in records]

        first, again = run(), run()
        assert first == again
        assert [o.best_score for o in first] == [o.best_score for o in again]
        assert repr(first) == repr(again)


class TestRetrieval:
    @staticmethod
    def test_many_small_memories_over_a_large_label_universe(argmax):
        d, label_count, per_memory, memories = 4096, 1000, 20, 50
        labels = [b"label-%04d" % j for j in range(label_count)]
        rng = np.random.default_rng(4096)
        correct = total = 0
        for m in range(memories):
            picks = rng.integers(0, label_count, size=per_memory)
            records = [
                (b"m%02d-key-%02d" % (m, i), labels[j]) for i, j in enumerate(picks)
            ]
            mem = model.build(records, d)
            for key, value in records:
                outcome = model.decode(mem, key, argmax, labels)
                correct += isinstance(outcome, model.Hit) and outcome.label == value
                total += 1
        assert total == 1000
        assert correct / total >= 0.99

    @staticmethod
    def test_match_score_scales_with_the_gain(argmax):
        records = [(b"k%d" % i, b"v%d" % i) for i in range(4)]
        labels = [value for _, value in records]
        low = model.build(records, 1024, gain=1.0)
        high = model.build(records, 1024, gain=3.0)
        s_low = model.decode(low, b"k0", argmax, labels).best_score
        s_high = model.decode(high, b"k0", argmax, labels).best_score
        assert s_high == pytest.approx(3.0 * s_low)


class TestScoring:
    @staticmethod
    def test_ties_break_towards_the_smaller_label():
        mem = model.HbfMemory.zeros(64)
        labels = [b"c", b"a", b"b"]
        scores = model.score_codebook(np.zeros(64), labels, mem.value_codebook)
        assert [label for label, _ in scores] == [b"a", b"b", b"c"]
        assert all(score == 0.0 for _, score in scores)

    @staticmethod
    def test_zero_margin_tie_is_a_hit_only_without_a_margin():
        scores = [(b"a", 5.0), (b"b", 5.0)]
        hit = model.decide(scores, model.DecoderConfig(tau=1.0, delta=0.0))
        assert hit == model.Hit(b"a", 5.0, 5.0, tuple(scores))
        reject = model.decide(scores, model.DecoderConfig(tau=1.0, delta=0.1))
        assert reject == model.Reject(5.0, 5.0, tuple(scores))

    @staticmethod
    def test_threshold_sentinels():
        scores = [(b"a", 1e9), (b"b", -1e9)]
        never = model.DecoderConfig(tau=math.inf)
        always = model.DecoderConfig(tau=-math.inf)
        assert isinstance(model.decide(scores, never), model.Reject)
        assert isinstance(model.decide(scores, always), model.Hit)

    @staticmethod
    def test_top_k_reports_the_ranked_prefix():
        scores = [(b"a", 3.0), (b"b", 2.0), (b"c", 1.0), (b"d", 0.0)]
        outcome = model.decide(scores, model.DecoderConfig(tau=0.0, top_k=3))
        assert outcome.top_k == tuple(scores[:3])

    @staticmethod
    def test_needs_at_least_top_k_labels(argmax):
        mem = model.build([(b"k", b"v")], 64)
        with pytest.raises(InvalidArgument, match="top_k"):
            model.decode(mem, b"k", argmax, [b"v"])

    @staticmethod
    def test_duplicate_labels_are_rejected():
        mem = model.HbfMemory.zeros(64)
        with pytest.raises(DuplicateLabel):
            model.score_codebook(np.zeros(64), [b"a", b"a"], mem.value_codebook)

    @staticmethod
    def test_decoder_config_validation():
        with pytest.raises(InvalidArgument):
            model.DecoderConfig(tau=math.nan)
        with pytest.raises(InvalidArgument):
            model.DecoderConfig(tau=0.0, delta=-1.0)
        with pytest.raises(InvalidArgument):
            model.DecoderConfig(tau=0.0, top_k=1)


class TestRenormalize:
    @staticmethod
    def test_rescales_vector_and_gain():
        mem = model.build([(b"k", b"v"), (b"j", b"w")], 128, gain=2.0)
        half = model.renormalize(mem, 1.0)
        assert half.gain == 1.0
        assert np.allclose(half.vector, mem.vector / 2.0)
        assert half.item_count == 2

    @staticmethod
    def test_empty_memory_cannot_be_renormalized():
        with pytest.raises(EmptyMemory):
            model.renormalize(model.HbfMemory.zeros(64), 2.0)

    @staticmethod
    def test_ranking_survives_renormalization(argmax):
        records = [(b"k%02d" % i, b"v%d" % (i % 8)) for i in range(20)]
        labels = sorted({value for _, value in records})
        mem = model.build(records, 1024)
        queries = [key for key, _ in records] + [b"q%03d" % i for i in range(80)]
        for gain in (1 / math.sqrt(20), 7.3):
            scaled = model.renormalize(mem, gain)
            for key in queries:
                before = model.decode(mem, key, argmax, labels)
                after = model.decode(scaled, key, argmax, labels)
                assert after.label == before.label
                assert [w for w, _ in after.top_k] == [w for w, _ in before.top_k]


class TestIndex:
    @staticmethod
    def test_insert_records_an_event_and_grows_the_label_universe():
        index = model.Index("idx.hbf", model.HbfMemory.zeros(64), [b"a"])
        index.insert(b"k", b"b")
        assert index.labels == [b"a", b"b"]
        assert index.memory.item_count == 1
        assert index.version_number == 1
        assert index.events == [events.RecordInserted("idx.hbf", b"k", b"b", 1)]

    @staticmethod
    def test_calibrate_records_an_event():
        index = model.Index("idx.hbf", model.HbfMemory.zeros(64))
        decoder = model.DecoderConfig(10.0, 2.0)
        index.calibrate(decoder)
        assert index.decoder == decoder
        assert index.events[-1] == events.DecoderCalibrated("idx.hbf", 10.0, 2.0, 2)

    @staticmethod
    def test_empty_index_answers_bottom(argmax):
        index = model.Index("idx.hbf", model.HbfMemory.zeros(64))
        assert index.query(b"anything", argmax) is model.NOTHING_STORED

    @staticmethod
    def test_indexes_are_identified_by_path():
        one = model.Index("a.hbf", model.HbfMemory.zeros(64))
        other = model.Index("a.hbf", model.HbfMemory.zeros(128))
        assert one == other
        assert len({one, other}) == 1

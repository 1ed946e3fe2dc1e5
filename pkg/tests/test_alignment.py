"""Aligner unit tests: cost model constants, tie-breaking, oracle agreement."""

import math
import random

import pytest

from oracle import enumerate_best
from tmforge.alignment import (
    DEFAULT_PRIORS,
    TIE_ORDER,
    AlignParams,
    AnchorTerm,
    align,
    alignment_from_dict,
    alignment_to_dict,
    bead_confidence,
    bead_cost,
)
from tmforge.extraction import SegmentedDoc, Sentence


def doc(texts, lang, key="k"):
    return SegmentedDoc(key, lang, [Sentence(i, t, len(t)) for i, t in enumerate(texts)])


def word(rng, lo=3, hi=9):
    return "".join(rng.choice("abcdefghilmnoprstuvy") for _ in range(rng.randint(lo, hi)))


def sentence(rng, words_lo=2, words_hi=10):
    return " ".join(word(rng) for _ in range(rng.randint(words_lo, words_hi)))


class TestParams:
    def test_defaults(self):
        p = AlignParams()
        assert p.c == 1.0
        assert p.s2 == 6.8
        assert p.anchor_bonus == 2.0
        assert p.confidence_threshold == 0.5
        assert p.bead_priors == DEFAULT_PRIORS

    def test_default_priors_values(self):
        assert DEFAULT_PRIORS == {
            "1-1": 0.89,
            "1-0": 0.0099,
            "0-1": 0.0099,
            "2-1": 0.0445,
            "1-2": 0.0445,
            "2-2": 0.011,
        }

    @pytest.mark.parametrize(
        "kwargs,message",
        [
            ({"c": 0.0}, "c and s2 must be positive"),
            ({"s2": -1.0}, "c and s2 must be positive"),
            ({"bead_priors": {"1-1": 0.9}}, "bead_priors missing entries"),
            ({"anchor_bonus": 0.5}, "anchor_bonus must be >= 1"),
            ({"confidence_threshold": 1.5}, "confidence_threshold must be in"),
        ],
    )
    def test_rejects_bad_values(self, kwargs, message):
        with pytest.raises(ValueError, match=message):
            AlignParams(**kwargs)

    def test_rejects_nonpositive_prior(self):
        priors = dict(DEFAULT_PRIORS)
        priors["2-2"] = 0.0
        with pytest.raises(ValueError, match="priors must be positive"):
            AlignParams(bead_priors=priors)


class TestBeadCost:
    def test_equal_lengths_cost_is_neg_log_prior(self):
        assert bead_cost(100, 100, "1-1") == 0.11653381625595151
        assert bead_cost(100, 100, "1-1") == -math.log(0.89)

    def test_anchor_bonus_subtracts_log_two(self):
        assert bead_cost(100, 100, "1-1", anchor_hit=True) == -0.5766133643039938
        base = bead_cost(100, 100, "1-1")
        assert bead_cost(100, 100, "1-1", anchor_hit=True) == base - math.log(2.0)

    def test_length_mismatch_penalty(self):
        # delta = 20 / sqrt(100 * 6.8); cost = delta^2 / 2 - ln 0.89
        assert bead_cost(100, 120, "1-1") == 0.410651463314775

    def test_contraction_cost(self):
        # delta over the combined source length, prior 0.0445
        assert bead_cost(120, 125, "2-1") == 3.127584717260923

    def test_deletion_cost_caps_length(self):
        # (min(L, 20) / 2)^2 / (2 * s2) - ln 0.0099
        assert bead_cost(40, 0, "1-0") == 11.968161698312182
        assert bead_cost(40, 0, "1-0") == bead_cost(20, 0, "1-0")
        assert bead_cost(10, 0, "1-0") == 6.45345581595924
        assert bead_cost(0, 10, "0-1") == bead_cost(10, 0, "1-0")

    def test_deletion_ignores_other_side_length(self):
        assert bead_cost(10, 999, "1-0") == bead_cost(10, 0, "1-0")

    def test_zero_source_length_guard(self):
        # max(src_len, 1) keeps the variance positive for empty sentences
        expected = (10.0 / math.sqrt(6.8)) ** 2 / 2.0 - math.log(0.89)
        assert bead_cost(0, 10, "1-1") == pytest.approx(expected, rel=1e-12)

    def test_custom_scale_c(self):
        p = AlignParams(c=1.2)
        assert bead_cost(100, 120, "1-1", p) == -math.log(0.89)

    def test_rejects_unknown_type_and_negative_length(self):
        with pytest.raises(ValueError, match="unknown bead type"):
            bead_cost(1, 1, "3-1")
        with pytest.raises(ValueError, match="non-negative"):
            bead_cost(-1, 1, "1-1")


class TestBeadConfidence:
    def test_perfect_one_to_one(self):
        assert bead_confidence(100, 100, "1-1") == 1.0

    def test_contraction_prior_ratio(self):
        # exp(-delta^2/2) * (0.0445 / 0.89)
        assert bead_confidence(120, 125, "2-1") == 0.049239905294874424

    def test_anchor_boost_clipped_at_one(self):
        assert bead_confidence(100, 100, "1-1", anchor_hit=True) == 1.0

    def test_anchor_boost_doubles_below_clip(self):
        base = bead_confidence(120, 125, "2-1")
        assert bead_confidence(120, 125, "2-1", anchor_hit=True) == base * 2.0

    def test_wild_mismatch_is_nearly_zero(self):
        assert 0.0 <= bead_confidence(100, 300, "1-1") < 1e-12

    def test_range_random(self):
        rng = random.Random(20260814)
        for _ in range(500):
            sl = rng.randint(0, 400)
            tl = rng.randint(0, 400)
            bt = rng.choice(TIE_ORDER)
            conf = bead_confidence(sl, tl, bt, anchor_hit=rng.random() < 0.5)
            assert 0.0 <= conf <= 1.0


class TestAlignValidation:
    def test_doc_key_mismatch(self):
        with pytest.raises(ValueError, match="must share a doc_key"):
            align(doc(["a"], "tr", key="x"), doc(["b"], "en", key="y"))

    def test_same_language(self):
        with pytest.raises(ValueError, match="language must differ"):
            align(doc(["a"], "en"), doc(["b"], "en"))

    def test_both_empty(self):
        res = align(doc([], "tr"), doc([], "en"))
        assert res.beads == []
        assert res.total_cost == 0.0
        assert res.warnings == ["both sides empty"]

    def test_one_side_empty_warns_and_deletes(self):
        res = align(doc([], "tr"), doc(["One.", "Two."], "en"))
        assert res.warnings == ["degenerate input: source side empty"]
        assert [b.bead_type for b in res.beads] == ["0-1", "0-1"]
        res = align(doc(["Bir."], "tr"), doc([], "en"))
        assert res.warnings == ["degenerate input: target side empty"]
        assert [b.bead_type for b in res.beads] == ["1-0"]


class TestAlignBehaviour:
    def test_diagonal_one_to_one(self):
        src = ["Hastalar incelendi.", "Sonuçlar anlamlıydı.", "Çalışma tamamlandı."]
        tgt = ["The patients were examined.", "The results were significant.", "The study was completed."]
        res = align(doc(src, "tr"), doc(tgt, "en"))
        assert [b.bead_type for b in res.beads] == ["1-1", "1-1", "1-1"]
        assert res.warnings == []
        for k, b in enumerate(res.beads):
            assert b.src_indices == [k]
            assert b.tgt_indices == [k]

    def test_two_to_one_contraction(self):
        # two short source sentences translated as one target sentence
        src = ["Kanama görülmedi.", "Komplikasyon olmadı."]
        tgt = ["No bleeding or other complications were observed in any patient."]
        res = align(doc(src, "tr"), doc(tgt, "en"))
        assert [b.bead_type for b in res.beads] == ["2-1"]
        assert res.beads[0].src_indices == [0, 1]
        assert res.beads[0].tgt_indices == [0]

    def test_unmatched_target_sentence(self):
        src = ["Hastalar üç ay boyunca izlendi ve kontrole çağrıldı."]
        tgt = [
            "The patients were followed for three months and recalled.",
            "This work was supported by a grant from the national cardiology "
            "research foundation programme for young investigators.",
        ]
        res = align(doc(src, "tr"), doc(tgt, "en"))
        assert [b.bead_type for b in res.beads] == ["1-1", "0-1"]

    def test_total_cost_is_right_fold_of_bead_costs(self):
        rng = random.Random(5)
        src = [sentence(rng) for _ in range(6)]
        tgt = [sentence(rng) for _ in range(5)]
        res = align(doc(src, "tr"), doc(tgt, "en"))
        folded = 0.0
        for b in reversed(res.beads):
            folded = b.cost + folded
        assert res.total_cost == folded

    def test_needs_review_tracks_threshold(self):
        params = AlignParams(confidence_threshold=1.0)
        res = align(doc(["Bir iki üç."], "tr"), doc(["One two three."], "en"), params=params)
        assert all(b.needs_review == (b.confidence < 1.0) for b in res.beads)
        params = AlignParams(confidence_threshold=0.0)
        res = align(doc(["Bir iki üç."], "tr"), doc(["One two three."], "en"), params=params)
        assert not any(b.needs_review for b in res.beads)

    def test_indices_partition_both_sides(self):
        rng = random.Random(99)
        for _ in range(50):
            m, n = rng.randint(0, 7), rng.randint(0, 7)
            src = [sentence(rng) for _ in range(m)]
            tgt = [sentence(rng) for _ in range(n)]
            res = align(doc(src, "tr"), doc(tgt, "en"))
            got_src = [i for b in res.beads for i in b.src_indices]
            got_tgt = [j for b in res.beads for j in b.tgt_indices]
            assert got_src == list(range(m))
            assert got_tgt == list(range(n))


class TestAnchors:
    SRC = ["AMAÇ: Bu çalışmada stend takılan hastalar incelendi."]
    TGT = ["OBJECTIVE: Patients who received stents were examined in this study."]

    def test_anchor_lowers_cost_and_raises_confidence(self):
        plain = align(doc(self.SRC, "tr"), doc(self.TGT, "en"))
        hit = align(
            doc(self.SRC, "tr"),
            doc(self.TGT, "en"),
            anchors=[AnchorTerm("AMAÇ", "OBJECTIVE")],
        )
        assert hit.total_cost == plain.total_cost - math.log(2.0)
        assert hit.beads[0].confidence >= plain.beads[0].confidence

    def test_anchor_match_is_case_insensitive(self):
        anchors = [AnchorTerm("amaç", "objective")]
        res = align(doc(self.SRC, "tr"), doc(self.TGT, "en"), anchors=anchors)
        plain = align(doc(self.SRC, "tr"), doc(self.TGT, "en"))
        assert res.total_cost == plain.total_cost - math.log(2.0)

    def test_anchor_must_match_both_sides(self):
        anchors = [AnchorTerm("AMAÇ", "NOSUCHWORD")]
        res = align(doc(self.SRC, "tr"), doc(self.TGT, "en"), anchors=anchors)
        plain = align(doc(self.SRC, "tr"), doc(self.TGT, "en"))
        assert res.total_cost == plain.total_cost

    def test_anchor_never_applies_to_deletions(self):
        anchors = [AnchorTerm("amaç", "objective")]
        res = align(doc(self.SRC, "tr"), doc([], "en"), anchors=anchors)
        assert [b.bead_type for b in res.beads] == ["1-0"]
        assert res.beads[0].cost == bead_cost(len(self.SRC[0]), 0, "1-0")

    def test_anchor_spans_joined_sentences(self):
        # the term pair sits in the second source sentence of a 2-1 bead
        src = ["Kanama görülmedi.", "SONUÇ: işlem güvenlidir."]
        tgt = ["CONCLUSION: No bleeding was seen and the procedure is safe."]
        anchors = [AnchorTerm("SONUÇ", "CONCLUSION")]
        res = align(doc(src, "tr"), doc(tgt, "en"), anchors=anchors)
        assert [b.bead_type for b in res.beads] == ["2-1"]
        plain = align(doc(src, "tr"), doc(tgt, "en"))
        assert res.total_cost == plain.total_cost - math.log(2.0)


class TestSerialization:
    def test_round_trip(self):
        rng = random.Random(3)
        src = [sentence(rng) for _ in range(5)]
        tgt = [sentence(rng) for _ in range(6)]
        res = align(doc(src, "tr"), doc(tgt, "en"), anchors=[AnchorTerm(src[0][:4], tgt[0][:4])])
        back = alignment_from_dict(alignment_to_dict(res))
        assert back == res

    def test_dict_shape(self):
        res = align(doc(["Bir."], "tr"), doc(["One."], "en"))
        data = alignment_to_dict(res)
        assert set(data) == {"doc_key", "total_cost", "beads", "warnings"}
        assert set(data["beads"][0]) == {
            "type",
            "src",
            "tgt",
            "cost",
            "confidence",
            "needs_review",
        }


class TestOracleAgreement:
    """The DP must reproduce the exhaustive enumerator bit for bit."""

    def check(self, rng, m, n, with_anchor):
        src = [sentence(rng) for _ in range(m)]
        tgt = [sentence(rng) for _ in range(n)]
        anchors = []
        if with_anchor and m and n:
            s = rng.choice(src)
            t = rng.choice(tgt)
            anchors.append(AnchorTerm(s[: rng.randint(2, 4)], t[: rng.randint(2, 4)]))
        params = AlignParams()
        res = align(doc(src, "tr"), doc(tgt, "en"), anchors=anchors, params=params)
        folded = 0.0
        for b in reversed(res.beads):
            folded = b.cost + folded
        exp_total, exp_types = enumerate_best(src, tgt, anchors, params)
        assert [b.bead_type for b in res.beads] == exp_types
        assert folded == exp_total

    def test_small_instances(self):
        rng = random.Random(101)
        for _ in range(150):
            m, n = rng.randint(0, 5), rng.randint(0, 5)
            if m == 0 and n == 0:
                continue
            self.check(rng, m, n, rng.random() < 0.5)

    def test_skewed_instances(self):
        rng = random.Random(202)
        for m, n in [(8, 1), (1, 8), (8, 4), (4, 8), (7, 2), (2, 7)]:
            self.check(rng, m, n, True)
            self.check(rng, m, n, False)

    def test_full_size_instances(self):
        rng = random.Random(303)
        for _ in range(10):
            self.check(rng, 8, 8, rng.random() < 0.5)

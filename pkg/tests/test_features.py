import datetime
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cohort_miner import wordlists
from cohort_miner.features import (
    FEATURE_NAMES,
    CorpusStats,
    FeatureError,
    FeatureExtractor,
    FeatureVector,
    bigram_share,
    build_corpus_stats,
    common_weighted,
    feature_csv_text,
    is_english_ratio,
    read_feature_csv,
    separation_power,
    similarity,
    similarity_ratio,
    write_feature_csv,
)
from cohort_miner.ingest import TweetRecord, tokenize
from cohort_miner.postag import PosLexicon


def rec(text, tweet_id=1, user_id=1):
    return TweetRecord(
        tweet_id=tweet_id, user_id=user_id, date=datetime.date(2012, 1, 1),
        text=text, user_lang="en",
    )


@pytest.fixture(scope="module")
def stats():
    labeled = [
        (rec("i took my atripla and i feel dizzy", 1), "signal"),
        (rec("my truvada gives me nightmares", 2), "signal"),
        (rec("i cant sleep on atripla", 3), "signal"),
        (rec("new hiv drug approved by fda", 4), "noise"),
        (rec("hiv treatment prices fall says report", 5), "noise"),
        (rec("study shows truvada reduces infection", 6), "noise"),
        (rec("el tratamiento del vih es nuevo", 7), "not_english"),
        (rec("la vida sigue igual para todos", 8), "not_english"),
    ]
    return build_corpus_stats(labeled)


@pytest.fixture(scope="module")
def extractor(stats):
    return FeatureExtractor(stats)


class TestCountFeatures:
    def test_personalcount_hand_counted(self, extractor):
        v = extractor.extract(rec("i took my atripla and i feel dizzy"))
        assert v.personalcount == 3  # i, my, i

    def test_empty_tweet_convention(self, extractor):
        v = extractor.extract(rec(" ", 99))
        row = v.as_dict()
        assert row.pop("is_english") == 1.0
        assert row.pop("ncharacters") == 1.0  # one whitespace character
        assert all(value == 0.0 for value in row.values())

    def test_percent_counts_characters(self, extractor):
        v = extractor.extract(rec("rates fell 5% then 3% more"))
        assert v.percent == 2

    def test_suffix_counts(self, extractor):
        v = extractor.extract(rec("treated dreaming treatment wonderfull"))
        assert v.regularpast == 1  # treated
        assert v.gerund == 1  # dreaming
        assert v.nment == 1  # treatment
        assert v.nful == 1  # wonderfull (suffix "full")

    def test_isolation_counts_distinct_keywords_minus_one(self, extractor):
        assert extractor.extract(rec("no drugs named here at all")).isolation == 0
        assert extractor.extract(rec("truvada post")).isolation == 0
        assert extractor.extract(rec("switching truvada for atripla")).isolation == 1

    def test_wordcount_and_ncharacters(self, extractor):
        text = "three little words"
        v = extractor.extract(rec(text))
        assert v.wordcount == 3
        assert v.ncharacters == len(text)

    def test_tag_ratios_bounded(self, extractor):
        v = extractor.extract(rec("i took my atripla and i feel dizzy today"))
        tags = [v.tagadj, v.tagverb, v.tagprep, v.tagnoun, v.tagconj,
                v.tagadv, v.tagto, v.tagdeterm]
        assert all(0.0 <= t <= 1.0 for t in tags)
        assert sum(tags) <= 1.0 + 1e-12

    def test_in_notenglish_bounded_by_wordcount(self, extractor):
        v = extractor.extract(rec("la vida para todos"))
        assert v.in_notenglish <= v.wordcount
        assert v.in_notenglish > 0


class TestOracleReimplementation:
    """Field-by-field naive recomputation on synthetic tweets."""

    WORD_LISTS = {
        "modalcount": ["should", "shoulda", "can", "could", "may", "might",
                       "must", "ought", "shall", "would", "woulda"],
        "futurecount": ["going", "will", "gonna", "should", "shoulda",
                        "ll", "d"],
        "personalcount": ["i", "me", "my", "mine", "ill", "im", "id",
                          "myself"],
        "negative": ["not", "wont", "nt", "shouldnt", "couldnt"],
        "secondpron": ["you", "youll", "yours", "yourself"],
        "thirdpron": ["he", "she", "it", "his", "her", "its", "himself",
                      "him", "herself", "itself", "they", "their", "them",
                      "themselves"],
        "relatpron": ["that", "which", "who", "whose", "whichever",
                      "whoever"],
        "dempron": ["this", "these", "that", "those"],
        "indpron": ["anybody", "anyone", "anything", "each", "either",
                    "everyone", "everything", "neither", "nobody",
                    "somebody", "something", "both", "few", "many",
                    "several", "all", "any", "most", "none", "some"],
        "intpron": ["what", "who", "which", "whom", "whose"],
        "posnoise": ["new", "pill", "state", "states", "stats", "drug",
                     "people", "approved", "approve", "approves",
                     "approval", "approach", "prevention", "prevent",
                     "prevents", "prevented"],
    }

    def _naive_vector(self, text, stats, lexicon, keywords, english, foreign):
        tokens = list(tokenize(text).tokens)
        n = len(tokens)
        out = {}
        for name, words in self.WORD_LISTS.items():
            out[name] = float(sum(tokens.count(w) for w in set(words)))
        out["percent"] = float(text.count("%"))
        out["in_notenglish"] = float(
            len([t for t in tokens if t in stats.notenglish_words])
        )
        out["regularpast"] = float(len([t for t in tokens if t[-2:] == "ed"]))
        out["gerund"] = float(len([t for t in tokens if t[-3:] == "ing"]))
        out["nment"] = float(len([t for t in tokens if t[-4:] == "ment"]))
        out["nful"] = float(len([t for t in tokens if t[-4:] == "full"]))
        tags = [lexicon.tag(t) for t in tokens]
        for tag, field in (("adj", "tagadj"), ("verb", "tagverb"),
                           ("prep", "tagprep"), ("noun", "tagnoun"),
                           ("conj", "tagconj"), ("adv", "tagadv"),
                           ("to", "tagto"), ("determiner", "tagdeterm")):
            out[field] = tags.count(tag) / n if n else 0.0
        for field, sparsity, elements in (
            ("sis_noise", stats.noise_sparsity, stats.noise_elements),
            ("sis_signal", stats.signal_sparsity, stats.signal_elements),
        ):
            total = sum(sparsity.get(t, 0) for t in tokens)
            s = total / elements
            out[field] = (s / (math.sqrt(total) / elements)) if total else 0.0
        eng = len([t for t in tokens if t in english])
        foreign_hits = 0
        for wl in foreign:
            foreign_hits += len([t for t in tokens if t in wl])
        out["is_english"] = (1 + eng) / (1 + foreign_hits)
        for field, bigrams, total in (
            ("bigrams_noise", stats.noise_bigrams, stats.noise_bigram_total),
            ("bigrams_signal", stats.signal_bigrams, stats.signal_bigram_total),
        ):
            pairs = list(zip(tokens, tokens[1:]))
            out[field] = len([p for p in pairs if p in bigrams]) / total
        matched = len([k for k in keywords.keywords
                       if k in tokenize(text).lexemes])
        out["isolation"] = float(max(0, matched - 1))
        out["common_noise"] = sum(
            stats.noise_token_weights.get(t, 0.0) for t in tokens
        )
        out["common_signal"] = sum(
            stats.signal_token_weights.get(t, 0.0) for t in tokens
        )
        out["wordcount"] = float(n)
        out["ncharacters"] = float(len(text))
        negs = [t for t in tokens if t.endswith("n't") or t in
                ("cant", "wont", "dont", "didnt", "doesnt", "isnt", "arent",
                 "wasnt", "werent", "couldnt", "shouldnt", "wouldnt", "aint",
                 "hasnt", "havent", "mustnt", "neednt", "shant")]
        out["ncount"] = float(len(negs))
        out["pharmacy"] = float(sum(
            tokens.count(w) for w in ("pharmacy", "pharma", "rx",
                                      "prescription")
        ))
        return out

    def test_fifty_synthetic_tweets_match(self, stats, extractor):
        rng = np.random.default_rng(11)
        vocab = ("i my you they took will should news drug pill today dizzy "
                 "la vida que approved 5% treatment dreaming wonderfull to "
                 "the and on atripla truvada don't cant http t.co hiv "
                 "prevention anti-hiv").split()
        english, foreign = wordlists.load_all()
        lexicon = PosLexicon.bundled()
        for i in range(50):
            nwords = int(rng.integers(1, 15))
            text = " ".join(
                vocab[int(rng.integers(0, len(vocab)))] for _ in range(nwords)
            )
            got = extractor.extract(rec(text, i)).as_dict()
            want = self._naive_vector(
                text, stats, lexicon, extractor.keywords, english, foreign
            )
            for name in FEATURE_NAMES:
                assert got[name] == pytest.approx(want[name], abs=1e-12), (
                    f"{name} differs on {text!r}"
                )


class TestSimilarity:
    def test_disjoint_is_zero(self):
        assert similarity_ratio(("zebra",), {"hiv": 4}, 4) == 0.0

    def test_hand_computation(self):
        ratio = similarity_ratio(("hiv",), {"hiv": 4}, 4)
        assert ratio == pytest.approx(2.0)
        s, sigma = similarity(("hiv",), {"hiv": 4}, 4)
        assert s == pytest.approx(1.0)
        assert sigma == pytest.approx(0.5)

    def test_raw_similarity_scale_invariant(self):
        tokens = ("hiv", "drug", "hiv")
        sparsity = {"hiv": 4, "drug": 2, "news": 10}
        s1, _ = similarity(tokens, sparsity, 16)
        s2, _ = similarity(tokens, {k: 2 * v for k, v in sparsity.items()}, 32)
        assert s1 == pytest.approx(s2)

    def test_empty_corpus_errors(self):
        with pytest.raises(FeatureError):
            similarity_ratio(("hiv",), {}, 0)


class TestIsEnglish:
    def test_empty_is_one(self):
        eng, foreign = wordlists.load_all()
        assert is_english_ratio((), eng, foreign) == 1.0

    def test_five_english_words(self):
        eng, foreign = wordlists.load_all()
        tokens = ("today", "people", "good", "morning", "friend")
        assert all(t in eng for t in tokens)
        assert is_english_ratio(tokens, eng, foreign) == 6.0

    def test_mixed_tweet_matches_hand_count(self):
        eng = frozenset({"the", "cat"})
        foreign = [frozenset({"la", "el"}), frozenset({"la", "vita"})]
        tokens = ("the", "la", "cat", "vita", "zzz")
        # english hits 2; foreign hits: la in 2 lists, vita in 1 -> 3
        assert is_english_ratio(tokens, eng, foreign) == pytest.approx(3 / 4)


class TestBigramShare:
    def test_single_word_tweet(self):
        assert bigram_share(("hiv",), frozenset({("a", "b")}), 10) == 0.0

    def test_two_of_ten(self):
        bigrams = frozenset({("took", "my"), ("my", "pill")})
        share = bigram_share(("took", "my", "pill"), bigrams, 10)
        assert share == pytest.approx(0.2)

    def test_disjoint(self):
        assert bigram_share(("x", "y"), frozenset({("a", "b")}), 5) == 0.0

    def test_zero_total_errors(self):
        with pytest.raises(FeatureError):
            bigram_share(("x", "y"), frozenset(), 0)


class TestCommonWeighted:
    def test_all_miss(self):
        assert common_weighted(("x", "y"), {"hiv": 0.5}) == 0.0

    def test_single_hit(self):
        assert common_weighted(("hiv",), {"hiv": 0.5}) == 0.5

    def test_random_oracle(self):
        rng = np.random.default_rng(5)
        weights = {f"w{i}": float(rng.random()) for i in range(20)}
        tokens = tuple(f"w{int(rng.integers(0, 30))}" for _ in range(50))
        expected = sum(weights.get(t, 0.0) for t in tokens)
        assert common_weighted(tokens, weights) == pytest.approx(expected)


class TestSeparationPower:
    def test_identical_samples(self):
        xs = list(np.random.default_rng(0).normal(size=500))
        assert separation_power(xs, xs) == 0.0

    def test_disjoint_supports(self):
        assert separation_power([0.0, 0.1, 0.2], [5.0, 5.1, 5.2]) == pytest.approx(1.0)

    def test_gaussian_overlap_matches_quadrature(self):
        rng = np.random.default_rng(42)
        mu = 1.5
        sig = rng.normal(0.0, 1.0, 10_000)
        noi = rng.normal(mu, 1.0, 10_000)

        # quadrature oracle on the closed-form densities
        xs = np.linspace(-8, 8 + mu, 20_001)
        f0 = np.exp(-0.5 * xs**2) / np.sqrt(2 * np.pi)
        f1 = np.exp(-0.5 * (xs - mu) ** 2) / np.sqrt(2 * np.pi)
        integrand = np.where(f0 + f1 > 0, (f0 - f1) ** 2 / (f0 + f1), 0.0)
        oracle = 0.5 * np.trapezoid(integrand, xs)

        est = separation_power(sig, noi)
        assert est == pytest.approx(oracle, abs=0.02)

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        a = list(rng.normal(0, 1, 400))
        b = list(rng.normal(1, 1, 400))
        assert separation_power(a, b) == pytest.approx(separation_power(b, a))

    def test_monotone_transform_invariance_with_quantile_bins(self):
        rng = np.random.default_rng(2)
        a = rng.normal(0, 1, 600)
        b = rng.normal(1.2, 1, 600)
        before = separation_power(a, b, nbins=20, binning="quantile")
        after = separation_power(
            np.exp(a), np.exp(b), nbins=20, binning="quantile"
        )
        assert after == pytest.approx(before, abs=1e-12)

    def test_increases_with_translation(self):
        rng = np.random.default_rng(3)
        base = rng.normal(0, 1, 3000)
        seps = [
            separation_power(base, base + shift)
            for shift in (0.0, 0.7, 1.5, 3.0)
        ]
        assert seps == sorted(seps)

    def test_bounds_and_errors(self):
        with pytest.raises(FeatureError):
            separation_power([], [1.0])
        with pytest.raises(FeatureError):
            separation_power([1.0], [2.0], nbins=1)

    @settings(max_examples=30)
    @given(
        st.lists(st.floats(-100, 100), min_size=2, max_size=50),
        st.lists(st.floats(-100, 100), min_size=2, max_size=50),
    )
    def test_always_in_unit_interval(self, a, b):
        sep = separation_power(a, b, nbins=10)
        assert -1e-12 <= sep <= 1.0 + 1e-12


class TestCorpusStats:
    def test_single_noise_tweet_tokens_all_common(self):
        labeled = [
            (rec("alpha beta gamma delta", 1), "noise"),
            (rec("i feel fine", 2), "signal"),
            (rec("hola que tal", 3), "not_english"),
        ]
        stats = build_corpus_stats(labeled)
        assert set(stats.noise_token_weights) == {"alpha", "beta", "gamma", "delta"}

    def test_order_invariance(self):
        labeled = [
            (rec("a b c", 1), "noise"),
            (rec("d e f", 2), "noise"),
            (rec("i feel", 3), "signal"),
            (rec("hola", 4), "not_english"),
        ]
        s1 = build_corpus_stats(labeled)
        s2 = build_corpus_stats(list(reversed(labeled)))
        assert s1.to_json() == s2.to_json()

    def test_missing_class_named_in_error(self):
        with pytest.raises(FeatureError, match="not_english"):
            build_corpus_stats([
                (rec("a", 1), "noise"), (rec("i", 2), "signal"),
            ])

    def test_fixture_recount_oracle(self):
        rng = np.random.default_rng(9)
        vocab = [f"tok{i}" for i in range(30)]
        labeled = []
        for i in range(200):
            label = ("noise", "signal", "not_english")[int(rng.integers(0, 3))]
            text = " ".join(
                vocab[int(rng.integers(0, len(vocab)))]
                for _ in range(int(rng.integers(1, 10)))
            )
            labeled.append((rec(text, i), label))
        stats = build_corpus_stats(labeled)

        # oracle: recount noise tokens, rank, take top quarter with ties
        from collections import Counter

        noise_counts = Counter()
        noise_bigrams = set()
        noise_bigram_total = 0
        for r, label in labeled:
            toks = list(tokenize(r.text).tokens)
            if label == "noise":
                noise_counts.update(toks)
                pairs = list(zip(toks, toks[1:]))
                noise_bigrams.update(pairs)
                noise_bigram_total += len(pairs)
        total = sum(noise_counts.values())
        ranked = sorted(noise_counts.items(), key=lambda kv: (-kv[1], kv[0]))
        k = math.ceil(0.25 * len(ranked))
        cutoff = ranked[k - 1][1]
        expected_weights = {
            t: c / total for t, c in ranked if c >= cutoff
        }
        assert stats.noise_token_weights == pytest.approx(expected_weights)
        assert stats.noise_elements == total
        assert stats.noise_bigrams == frozenset(noise_bigrams)
        assert stats.noise_bigram_total == noise_bigram_total

    def test_json_round_trip_and_checksum(self, stats):
        text = stats.to_json()
        back = CorpusStats.from_json(text)
        assert back.to_json() == text
        assert back.checksum() == stats.checksum()


@pytest.fixture(scope="module")
def lex():
    return PosLexicon.bundled()


class TestPosTagger:

    def test_closed_classes(self, lex):
        assert lex.tag("the") == "determiner"
        assert lex.tag("and") == "conj"
        assert lex.tag("on") == "prep"
        assert lex.tag("to") == "to"
        assert lex.tag("i") == "other"

    def test_suffix_rules(self, lex):
        assert lex.tag("zorbing") == "verb"  # unknown + ing
        assert lex.tag("zorbed") == "verb"
        assert lex.tag("zorbly") == "adv"
        assert lex.tag("zorbous") == "adj"
        assert lex.tag("takes") == "verb"  # take is a lexicon verb
        assert lex.tag("cats") == "noun"  # cat is not a lexicon verb

    def test_default_noun(self, lex):
        assert lex.tag("atripla") == "noun"

    def test_exactly_one_tag_per_token(self, lex):
        counts = lex.tag_counts(("i", "took", "my", "pill", "to", "sleep"))
        assert sum(counts.values()) == 6


class TestFeatureCsv:
    def test_round_trip(self, extractor):
        rows = [
            (1, extractor.extract(rec("i took my atripla", 1))),
            (2, extractor.extract(rec("new drug approved", 2))),
        ]
        text = feature_csv_text(rows)
        assert text.splitlines()[0] == "tweet_id," + ",".join(FEATURE_NAMES)

        import tempfile, os

        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, "features.csv")
            write_feature_csv(rows, path)
            back = read_feature_csv(path)
        assert [tid for tid, _ in back] == [1, 2]
        for (_, vec_in), (_, vec_out) in zip(rows, back):
            assert vec_out.as_row() == pytest.approx(vec_in.as_row())

    def test_header_is_37_names(self):
        assert len(FEATURE_NAMES) == 37


class TestExtractionProperties:
    @settings(max_examples=60, deadline=None)
    @given(st.text(
        alphabet=st.characters(whitelist_categories=("Ll", "Nd", "Zs"),
                               whitelist_characters="'-.%"),
        max_size=140,
    ))
    def test_tag_ratios_and_notenglish_bounds(self, text):
        labeled = [
            (rec("i took my atripla", 1), "signal"),
            (rec("new hiv drug approved", 2), "noise"),
            (rec("el tratamiento sigue", 3), "not_english"),
        ]
        extractor = FeatureExtractor(build_corpus_stats(labeled))
        v = extractor.extract(rec(text if text.strip() else "x", 50))
        tags = [v.tagadj, v.tagverb, v.tagprep, v.tagnoun, v.tagconj,
                v.tagadv, v.tagto, v.tagdeterm]
        assert all(0.0 <= t <= 1.0 for t in tags)
        assert sum(tags) <= 1.0 + 1e-12
        assert v.in_notenglish <= v.wordcount
        assert v.is_english > 0

"""Hand-crafted linguistic features: 37 numbers per tweet.

Counts are exact token matches against fixed word lists, suffix counts,
POS-ratio features from the deterministic tagger, similarity and bigram
overlap against annotated-corpus statistics, and the English/foreign word
ratio. Corpus statistics are built once from agreement-resolved labels
and shared verbatim between training and scoring.
"""

import csv
import hashlib
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, fields

import numpy as np

from .ingest import KeywordSet, tokenize
from .postag import PosLexicon
from . import wordlists

# Exact word lists for the count features.
MODAL_WORDS = ("should", "shoulda", "can", "could", "may", "might", "must",
               "ought", "shall", "would", "woulda")
FUTURE_WORDS = ("going", "will", "gonna", "should", "shoulda", "ll", "d")
PERSONAL_WORDS = ("i", "me", "my", "mine", "ill", "im", "id", "myself")
NEGATIVE_WORDS = ("not", "wont", "nt", "shouldnt", "couldnt")
SECOND_PRONOUNS = ("you", "youll", "yours", "yourself")
THIRD_PRONOUNS = ("he", "she", "it", "his", "her", "its", "himself", "him",
                  "herself", "itself", "they", "their", "them", "themselves")
RELATIVE_PRONOUNS = ("that", "which", "who", "whose", "whichever", "whoever")
DEMONSTRATIVE_PRONOUNS = ("this", "these", "that", "those")
INDEFINITE_PRONOUNS = ("anybody", "anyone", "anything", "each", "either",
                       "everyone", "everything", "neither", "nobody",
                       "somebody", "something", "both", "few", "many",
                       "several", "all", "any", "most", "none", "some")
INTERROGATIVE_PRONOUNS = ("what", "who", "which", "whom", "whose")
POS_NOISE_WORDS = ("new", "pill", "state", "states", "stats", "drug",
                   "people", "approved", "approve", "approves", "approval",
                   "approach", "prevention", "prevent", "prevents",
                   "prevented")

# Reconstructed features with no published definition; kept out of the
# default classifier inputs.
PHARMACY_WORDS = ("pharmacy", "pharma", "rx", "prescription")
NEGATION_CONTRACTIONS = frozenset((
    "cant", "wont", "dont", "didnt", "doesnt", "isnt", "arent", "wasnt",
    "werent", "couldnt", "shouldnt", "wouldnt", "aint", "hasnt", "havent",
    "mustnt", "neednt", "shant",
))

FEATURE_NAMES = (
    "modalcount", "futurecount", "personalcount", "negative", "secondpron",
    "thirdpron", "relatpron", "dempron", "indpron", "intpron", "percent",
    "posnoise", "in_notenglish", "regularpast", "gerund", "nment", "nful",
    "tagadj", "tagverb", "tagprep", "tagnoun", "tagconj", "tagadv", "tagto",
    "tagdeterm", "sis_noise", "sis_signal", "is_english", "bigrams_noise",
    "bigrams_signal", "isolation", "common_noise", "common_signal",
    "wordcount", "ncharacters", "ncount", "pharmacy",
)

# Names the source material also uses for some features.
FEATURE_ALIASES = {
    "is_notenglish": "in_notenglish",
    "wordscount": "wordcount",
    "tweetlength": "ncharacters",
    "nfull": "nful",
    "commonnoise": "common_noise",
    "commonsignal": "common_signal",
}

CATEGORIES = ("signal", "noise", "not_english")


class FeatureError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureVector:
    modalcount: float = 0.0
    futurecount: float = 0.0
    personalcount: float = 0.0
    negative: float = 0.0
    secondpron: float = 0.0
    thirdpron: float = 0.0
    relatpron: float = 0.0
    dempron: float = 0.0
    indpron: float = 0.0
    intpron: float = 0.0
    percent: float = 0.0
    posnoise: float = 0.0
    in_notenglish: float = 0.0
    regularpast: float = 0.0
    gerund: float = 0.0
    nment: float = 0.0
    nful: float = 0.0
    tagadj: float = 0.0
    tagverb: float = 0.0
    tagprep: float = 0.0
    tagnoun: float = 0.0
    tagconj: float = 0.0
    tagadv: float = 0.0
    tagto: float = 0.0
    tagdeterm: float = 0.0
    sis_noise: float = 0.0
    sis_signal: float = 0.0
    is_english: float = 1.0
    bigrams_noise: float = 0.0
    bigrams_signal: float = 0.0
    isolation: float = 0.0
    common_noise: float = 0.0
    common_signal: float = 0.0
    wordcount: float = 0.0
    ncharacters: float = 0.0
    ncount: float = 0.0
    pharmacy: float = 0.0

    def as_dict(self):
        return {name: getattr(self, name) for name in FEATURE_NAMES}

    def as_row(self):
        return [getattr(self, name) for name in FEATURE_NAMES]

    def get(self, name):
        name = FEATURE_ALIASES.get(name, name)
        if name not in FEATURE_NAMES:
            raise FeatureError(f"unknown feature: {name}")
        return getattr(self, name)


assert tuple(f.name for f in fields(FeatureVector)) == FEATURE_NAMES


@dataclass(frozen=True)
class CorpusStats:
    """Statistics of the agreement-resolved annotated corpus.

    Token weights cover the most frequent quarter of each class's
    vocabulary (ties at the cutoff included), weighted by corpus frequency
    over the class token total. Sparsity maps hold raw token counts with
    the class token totals; bigram sets come with the total bigram count
    of the class corpus.
    """

    noise_token_weights: dict
    signal_token_weights: dict
    noise_bigrams: frozenset
    signal_bigrams: frozenset
    noise_bigram_total: int
    signal_bigram_total: int
    noise_sparsity: dict
    signal_sparsity: dict
    noise_elements: int
    signal_elements: int
    notenglish_words: frozenset

    VERSION = 1

    def to_json(self):
        payload = {
            "version": self.VERSION,
            "noise_token_weights": dict(sorted(self.noise_token_weights.items())),
            "signal_token_weights": dict(sorted(self.signal_token_weights.items())),
            "noise_bigrams": sorted(" ".join(b) for b in self.noise_bigrams),
            "signal_bigrams": sorted(" ".join(b) for b in self.signal_bigrams),
            "noise_bigram_total": self.noise_bigram_total,
            "signal_bigram_total": self.signal_bigram_total,
            "noise_sparsity": dict(sorted(self.noise_sparsity.items())),
            "signal_sparsity": dict(sorted(self.signal_sparsity.items())),
            "noise_elements": self.noise_elements,
            "signal_elements": self.signal_elements,
            "notenglish_words": sorted(self.notenglish_words),
        }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        payload = json.loads(text)
        if payload.get("version") != cls.VERSION:
            raise FeatureError(f"unsupported stats version: {payload.get('version')}")
        return cls(
            noise_token_weights=payload["noise_token_weights"],
            signal_token_weights=payload["signal_token_weights"],
            noise_bigrams=frozenset(tuple(b.split(" ")) for b in payload["noise_bigrams"]),
            signal_bigrams=frozenset(tuple(b.split(" ")) for b in payload["signal_bigrams"]),
            noise_bigram_total=payload["noise_bigram_total"],
            signal_bigram_total=payload["signal_bigram_total"],
            noise_sparsity=payload["noise_sparsity"],
            signal_sparsity=payload["signal_sparsity"],
            noise_elements=payload["noise_elements"],
            signal_elements=payload["signal_elements"],
            notenglish_words=frozenset(payload["notenglish_words"]),
        )

    def checksum(self):
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()


def _bigrams(tokens):
    return [(tokens[i], tokens[i + 1]) for i in range(len(tokens) - 1)]


def _top_quarter_weights(token_counts):
    """Weights for the most frequent 25% of tokens, ties included."""
    if not token_counts:
        return {}
    total = sum(token_counts.values())
    ranked = sorted(token_counts.items(), key=lambda kv: (-kv[1], kv[0]))
    cutoff_rank = max(1, math.ceil(0.25 * len(ranked)))
    cutoff_count = ranked[cutoff_rank - 1][1]
    return {
        tok: count / total for tok, count in ranked if count >= cutoff_count
    }


def build_corpus_stats(labeled):
    """Build CorpusStats from (record, category) pairs with resolved labels."""
    token_counts = {c: Counter() for c in CATEGORIES}
    bigram_sets = {c: set() for c in CATEGORIES}
    bigram_totals = {c: 0 for c in CATEGORIES}
    n_tweets = {c: 0 for c in CATEGORIES}

    for rec, category in labeled:
        if category not in CATEGORIES:
            raise FeatureError(f"unknown category: {category}")
        tokens = tokenize(rec.text).tokens
        n_tweets[category] += 1
        token_counts[category].update(tokens)
        bg = _bigrams(list(tokens))
        bigram_sets[category].update(bg)
        bigram_totals[category] += len(bg)

    for category in CATEGORIES:
        if n_tweets[category] == 0:
            raise FeatureError(f"no tweets labeled {category!r} in annotated corpus")

    return CorpusStats(
        noise_token_weights=_top_quarter_weights(token_counts["noise"]),
        signal_token_weights=_top_quarter_weights(token_counts["signal"]),
        noise_bigrams=frozenset(bigram_sets["noise"]),
        signal_bigrams=frozenset(bigram_sets["signal"]),
        noise_bigram_total=bigram_totals["noise"],
        signal_bigram_total=bigram_totals["signal"],
        noise_sparsity=dict(token_counts["noise"]),
        signal_sparsity=dict(token_counts["signal"]),
        noise_elements=sum(token_counts["noise"].values()),
        signal_elements=sum(token_counts["signal"].values()),
        notenglish_words=frozenset(token_counts["not_english"]),
    )


def similarity(tokens, corpus_sparsity, corpus_elements):
    """Raw similarity of a token sequence to an annotated corpus.

    s sums the corpus count of every tweet token over the corpus element
    total; its Poisson uncertainty propagates the summed counts.
    Returns (s, sigma).
    """
    if corpus_elements <= 0:
        raise FeatureError("corpus has no elements")
    summed = sum(corpus_sparsity.get(t, 0) for t in tokens)
    s = summed / corpus_elements
    sigma = math.sqrt(summed) / corpus_elements
    return s, sigma


def similarity_ratio(tokens, corpus_sparsity, corpus_elements):
    """similarity divided by its uncertainty; 0 when nothing overlaps."""
    s, sigma = similarity(tokens, corpus_sparsity, corpus_elements)
    if s == 0:
        return 0.0
    return s / sigma


def is_english_ratio(tokens, english_words, foreign_wordlists):
    """(1 + English-list hits) / (1 + per-list foreign hits)."""
    eng = sum(1 for t in tokens if t in english_words)
    foreign = sum(
        1 for t in tokens for wl in foreign_wordlists if t in wl
    )
    return (1 + eng) / (1 + foreign)


def bigram_share(tokens, bigram_set, corpus_bigram_total):
    """Tweet bigrams found in the corpus set over the corpus bigram total."""
    if corpus_bigram_total <= 0:
        raise FeatureError("bigram corpus is empty")
    hits = sum(1 for bg in _bigrams(list(tokens)) if bg in bigram_set)
    return hits / corpus_bigram_total


def common_weighted(tokens, token_weights):
    """Sum of weights of tweet tokens present in the common-word map."""
    return sum(token_weights.get(t, 0.0) for t in tokens)


class FeatureExtractor:
    """Bundles corpus stats, tagger, keywords and wordlists for extraction."""

    def __init__(self, stats, pos_lexicon=None, keywords=None,
                 english_words=None, foreign_wordlists=None):
        self.stats = stats
        self.pos_lexicon = pos_lexicon or PosLexicon.bundled()
        if keywords is None:
            from .config import bundled_keywords

            keywords = bundled_keywords()
        self.keywords = keywords
        if english_words is None or foreign_wordlists is None:
            english_words, foreign_wordlists = wordlists.load_all()
        self.english_words = english_words
        self.foreign_wordlists = foreign_wordlists

    def extract(self, rec):
        text = rec.text if hasattr(rec, "text") else str(rec)
        lex = tokenize(text)
        tokens = lex.tokens
        wordcount = len(tokens)
        counts = Counter(tokens)

        def count_of(words):
            return float(sum(counts[w] for w in words))

        tag_counts = self.pos_lexicon.tag_counts(tokens)

        def ratio(tag):
            return tag_counts[tag] / wordcount if wordcount else 0.0

        stats = self.stats
        n_keywords = len(lex.lexemes & self.keywords.keywords)

        return FeatureVector(
            modalcount=count_of(MODAL_WORDS),
            futurecount=count_of(FUTURE_WORDS),
            personalcount=count_of(PERSONAL_WORDS),
            negative=count_of(NEGATIVE_WORDS),
            secondpron=count_of(SECOND_PRONOUNS),
            thirdpron=count_of(THIRD_PRONOUNS),
            relatpron=count_of(RELATIVE_PRONOUNS),
            dempron=count_of(DEMONSTRATIVE_PRONOUNS),
            indpron=count_of(INDEFINITE_PRONOUNS),
            intpron=count_of(INTERROGATIVE_PRONOUNS),
            percent=float(text.count("%")),
            posnoise=count_of(POS_NOISE_WORDS),
            in_notenglish=float(sum(1 for t in tokens if t in stats.notenglish_words)),
            regularpast=float(sum(1 for t in tokens if t.endswith("ed"))),
            gerund=float(sum(1 for t in tokens if t.endswith("ing"))),
            nment=float(sum(1 for t in tokens if t.endswith("ment"))),
            nful=float(sum(1 for t in tokens if t.endswith("full"))),
            tagadj=ratio("adj"),
            tagverb=ratio("verb"),
            tagprep=ratio("prep"),
            tagnoun=ratio("noun"),
            tagconj=ratio("conj"),
            tagadv=ratio("adv"),
            tagto=ratio("to"),
            tagdeterm=ratio("determiner"),
            sis_noise=similarity_ratio(tokens, stats.noise_sparsity, stats.noise_elements),
            sis_signal=similarity_ratio(tokens, stats.signal_sparsity, stats.signal_elements),
            is_english=is_english_ratio(tokens, self.english_words, self.foreign_wordlists),
            bigrams_noise=bigram_share(tokens, stats.noise_bigrams, stats.noise_bigram_total),
            bigrams_signal=bigram_share(tokens, stats.signal_bigrams, stats.signal_bigram_total),
            isolation=float(max(0, n_keywords - 1)),
            common_noise=common_weighted(tokens, stats.noise_token_weights),
            common_signal=common_weighted(tokens, stats.signal_token_weights),
            wordcount=float(wordcount),
            ncharacters=float(lex.ncharacters),
            ncount=float(sum(
                1 for t in tokens
                if t.endswith("n't") or t in NEGATION_CONTRACTIONS
            )),
            pharmacy=count_of(PHARMACY_WORDS),
        )


def extract_features(rec, stats, pos_lexicon=None, keywords=None):
    """One-shot extraction; build a FeatureExtractor for corpus-scale work."""
    return FeatureExtractor(stats, pos_lexicon, keywords).extract(rec)


def separation_power(signal_values, noise_values, nbins=40, binning="uniform"):
    """Histogram-overlap separation of two samples, in [0, 1].

    Both samples are histogrammed over the pooled range with unit-mass
    normalization; the statistic is half the summed squared difference
    over the summed mass per bin. 0 for identical histograms, 1 for
    disjoint supports. binning="quantile" uses pooled-quantile bin edges,
    which makes the statistic invariant under strictly monotone
    transforms of both samples.
    """
    sig = np.asarray(list(signal_values), dtype=float)
    noi = np.asarray(list(noise_values), dtype=float)
    if sig.size == 0 or noi.size == 0:
        raise FeatureError("separation_power needs non-empty samples")
    if nbins < 2:
        raise FeatureError("nbins must be >= 2")

    pooled = np.concatenate([sig, noi])
    lo, hi = pooled.min(), pooled.max()
    if lo == hi:
        return 0.0
    if binning == "uniform":
        edges = np.linspace(lo, hi, nbins + 1)
    elif binning == "quantile":
        edges = np.unique(np.quantile(pooled, np.linspace(0, 1, nbins + 1)))
        if edges.size < 2:
            return 0.0
    else:
        raise FeatureError(f"unknown binning mode: {binning}")

    hs, _ = np.histogram(sig, bins=edges)
    hb, _ = np.histogram(noi, bins=edges)
    ps = hs / hs.sum()
    pb = hb / hb.sum()
    mask = (ps + pb) > 0
    return float(0.5 * np.sum((ps[mask] - pb[mask]) ** 2 / (ps[mask] + pb[mask])))


def rank_features(vectors_by_class, nbins=40, names=FEATURE_NAMES):
    """Rank features by separation power between signal and noise vectors."""
    sig_vectors = vectors_by_class["signal"]
    noi_vectors = vectors_by_class["noise"]
    ranking = []
    for name in names:
        sep = separation_power(
            [v.get(name) for v in sig_vectors],
            [v.get(name) for v in noi_vectors],
            nbins=nbins,
        )
        ranking.append((name, sep))
    ranking.sort(key=lambda kv: (-kv[1], kv[0]))
    return ranking


def write_feature_csv(rows, path_or_file, *, id_column=True):
    """Rows of (tweet_id, FeatureVector) (or bare vectors) to CSV."""

    def _write(f):
        w = csv.writer(f, lineterminator="\n")
        header = (["tweet_id"] if id_column else []) + list(FEATURE_NAMES)
        w.writerow(header)
        for row in rows:
            if id_column:
                tweet_id, vec = row
                w.writerow([tweet_id] + [repr(x) for x in vec.as_row()])
            else:
                w.writerow([repr(x) for x in row.as_row()])

    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
        with open(path_or_file, "w", encoding="utf-8", newline="") as f:
            _write(f)
    else:
        _write(path_or_file)


def read_feature_csv(path):
    """Read back (tweet_id, FeatureVector) rows written by write_feature_csv."""
    out = []
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header[0] == "tweet_id":
            names = header[1:]
            offset = 1
        else:
            names = header
            offset = 0
        if tuple(names) != FEATURE_NAMES:
            raise FeatureError("feature CSV header does not match the 37 names")
        for row in reader:
            vec = FeatureVector(**{
                n: float(v) for n, v in zip(names, row[offset:])
            })
            out.append((int(row[0]) if offset else None, vec))
    return out


def feature_csv_text(rows, **kwargs):
    buf = io.StringIO()
    write_feature_csv(rows, buf, **kwargs)
    return buf.getvalue()

"""Time-binned drug mentions, side-effect pair tables and sentiment series.

Dates map into 60-day bins anchored at 2010-09-09. Mentions are
lexeme-level matches against a drug synonym lexicon; a tweet naming k
drugs counts once for each. Sentiment per bin is the plain sum of the
integer tweet sentiments with uncertainty sqrt(N) from the unit
systematic assigned to each rating.
"""

import csv
import datetime
import io
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .ingest import tokenize
from .stemmer import stem

logger = logging.getLogger(__name__)

BIN_ORIGIN = datetime.date(2010, 9, 9)
BIN_DAYS = 60
DEFAULT_END = datetime.date(2013, 8, 28)

NO_EFFECT_TAGS = frozenset(("none", "no side effects", "no_side_effects"))


class AnalyticsError(ValueError):
    pass


@dataclass(frozen=True)
class TimeBins:
    origin: datetime.date = BIN_ORIGIN
    width_days: int = BIN_DAYS
    end: datetime.date = DEFAULT_END

    def index(self, date):
        """Bin index of a date; None outside the study window."""
        if date < self.origin or date > self.end:
            return None
        return (date - self.origin).days // self.width_days

    def start_of(self, index):
        return self.origin + datetime.timedelta(days=index * self.width_days)

    @property
    def nbins(self):
        return (self.end - self.origin).days // self.width_days + 1


@dataclass(frozen=True)
class DrugLexicon:
    """Drug name -> stemmed synonym lexemes; synonym sets are disjoint."""

    drugs: dict

    @classmethod
    def from_mapping(cls, mapping):
        drugs = {}
        seen = {}
        for name, synonyms in mapping.items():
            lexemes = frozenset(stem(s.lower()) for s in synonyms)
            for lex in lexemes:
                if lex in seen:
                    raise AnalyticsError(
                        f"synonym {lex!r} appears under both "
                        f"{seen[lex]!r} and {name!r}"
                    )
                seen[lex] = name
            drugs[name] = lexemes
        return cls(drugs=drugs)

    def mentions(self, lexemes):
        """Drug names whose synonym set intersects the tweet's lexemes."""
        return sorted(
            name for name, syns in self.drugs.items()
            if not syns.isdisjoint(lexemes)
        )


def is_retweet(rec):
    """Record retweet flag when present, else a leading `rt` token."""
    flag = rec.extra.get("retweet")
    if flag is not None:
        return bool(flag)
    tokens = tokenize(rec.text).tokens
    return bool(tokens) and tokens[0] == "rt"


def _effects_of(rec):
    effects = rec.extra.get("effects") or []
    return [str(e).lower() for e in effects]


def has_side_effects(rec):
    """True when the record carries at least one real side-effect tag."""
    return any(e not in NO_EFFECT_TAGS for e in _effects_of(rec))


def _sort_key(rec):
    return (rec.date, rec.tweet_id)


@dataclass
class MentionFilters:
    exclude_retweets: bool = False
    require_side_effects: bool = False
    unique_users_only: bool = False


def drug_mention_series(corpus, lexicon, bins=TimeBins(), filters=None,
                        top_n=7):
    """Per-drug per-bin mention counts, the busiest top_n drugs kept
    apart and the rest grouped under "Other".

    unique_users_only counts each user once per drug, in the bin of their
    first qualifying tweet. Returns (rows, totals) where rows is a sorted
    list of (drug, bin_start_iso, count) and totals maps drug -> total.
    """
    filters = filters or MentionFilters()
    counts = defaultdict(Counter)  # drug -> bin -> count
    seen_user_drug = set()
    for rec in sorted(corpus, key=_sort_key):
        if filters.exclude_retweets and is_retweet(rec):
            continue
        if filters.require_side_effects and not has_side_effects(rec):
            continue
        idx = bins.index(rec.date)
        if idx is None:
            logger.warning(
                "tweet %s dated %s outside the binning window; skipped",
                rec.tweet_id, rec.date,
            )
            continue
        lexemes = tokenize(rec.text).lexemes
        for drug in lexicon.mentions(lexemes):
            if filters.unique_users_only:
                key = (rec.user_id, drug)
                if key in seen_user_drug:
                    continue
                seen_user_drug.add(key)
            counts[drug][idx] += 1

    totals = {drug: sum(c.values()) for drug, c in counts.items()}
    ranked = sorted(totals, key=lambda d: (-totals[d], d))
    top = set(ranked[:top_n])

    grouped = defaultdict(Counter)
    for drug, per_bin in counts.items():
        target = drug if drug in top else "Other"
        for idx, n in per_bin.items():
            grouped[target][idx] += n

    rows = []
    for drug in sorted(grouped):
        for idx in sorted(grouped[drug]):
            rows.append((drug, bins.start_of(idx).isoformat(), grouped[drug][idx]))
    out_totals = {d: sum(c.values()) for d, c in grouped.items()}
    return rows, out_totals


@dataclass(frozen=True)
class DrugEffectTable:
    rows: tuple  # (drug, effect, unique_user_count), count >= min_users
    drug_totals: dict  # drug -> tweets mentioning it

    def as_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["drug", "effect", "users"])
        for drug, effect, users in self.rows:
            w.writerow([drug, effect, users])
        return buf.getvalue()


def side_effect_pairs(corpus, lexicon, min_users=3):
    """Per-user deduplicated (drug, effect) pairs above the user threshold.

    A pair counts once per user no matter how often they repeat it.
    Totals report how many tweets mention each drug.
    """
    pair_users = defaultdict(set)  # (drug, effect) -> {user_id}
    drug_totals = Counter()
    for rec in sorted(corpus, key=_sort_key):
        lexemes = tokenize(rec.text).lexemes
        drugs = lexicon.mentions(lexemes)
        for drug in drugs:
            drug_totals[drug] += 1
        for effect in _effects_of(rec):
            for drug in drugs:
                pair_users[(drug, effect)].add(rec.user_id)
    rows = tuple(
        (drug, effect, len(users))
        for (drug, effect), users in sorted(pair_users.items())
        if len(users) >= min_users
    )
    return DrugEffectTable(rows=rows, drug_totals=dict(drug_totals))


@dataclass(frozen=True)
class SentimentBin:
    bin_start: datetime.date
    psi: int
    n: int
    sigma: float


@dataclass(frozen=True)
class SentimentSeries:
    bins: tuple
    skipped: int = 0

    def psi_values(self):
        return [b.psi for b in self.bins]

    def n_values(self):
        return [b.n for b in self.bins]

    def as_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_start", "psi", "n", "sigma"])
        for b in self.bins:
            w.writerow([b.bin_start.isoformat(), b.psi, b.n, repr(b.sigma)])
        return buf.getvalue()


def sentiment_series(corpus, bins=TimeBins(), filters=None, lexicon=None,
                     drug=None):
    """Per-bin sentiment sum with sqrt(N) uncertainty.

    Records without a resolved integer sentiment are skipped and counted.
    Passing drug (with its lexicon) restricts to tweets mentioning it.
    """
    filters = filters or MentionFilters()
    if drug is not None and lexicon is None:
        raise AnalyticsError("a drug filter needs the drug lexicon")
    psi = Counter()
    n = Counter()
    skipped = 0
    for rec in corpus:
        raw = rec.extra.get("sentiment")
        try:
            value = float(raw)
        except (TypeError, ValueError):
            skipped += 1
            continue
        if not value.is_integer():
            skipped += 1
            continue
        sentiment = int(value)
        if filters.exclude_retweets and is_retweet(rec):
            continue
        if filters.require_side_effects and not has_side_effects(rec):
            continue
        if drug is not None:
            lexemes = tokenize(rec.text).lexemes
            if drug not in lexicon.mentions(lexemes):
                continue
        idx = bins.index(rec.date)
        if idx is None:
            logger.warning(
                "tweet %s dated %s outside the binning window; skipped",
                rec.tweet_id, rec.date,
            )
            continue
        psi[idx] += sentiment
        n[idx] += 1
    series = tuple(
        SentimentBin(
            bin_start=bins.start_of(i),
            psi=psi.get(i, 0),
            n=n.get(i, 0),
            sigma=math.sqrt(n.get(i, 0)),
        )
        for i in range(bins.nbins)
    )
    return SentimentSeries(bins=series, skipped=skipped)


def pearson(xs, ys):
    """Plain Pearson correlation; None when either variance vanishes."""
    if len(xs) != len(ys) or len(xs) < 2:
        raise AnalyticsError("correlation needs two equal-length series")
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0 or syy == 0:
        return None
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / math.sqrt(sxx * syy)


def sentiment_drug_correlation(series, mention_totals):
    """Pearson correlation between per-bin sentiment and mention counts.

    mention_totals: bin_start_iso -> count (missing bins are zero).
    Returns None when either series has no variance.
    """
    populated = [b for b in series.bins if b.n > 0]
    if len(populated) < 3:
        raise AnalyticsError("need at least 3 populated bins")
    xs = [float(b.psi) for b in populated]
    ys = [float(mention_totals.get(b.bin_start.isoformat(), 0)) for b in populated]
    return pearson(xs, ys)


@dataclass(frozen=True)
class NeutralityFlag:
    bin_start: datetime.date
    z: float
    compatible: bool


def neutrality_test(series, max_abs_z=1.0):
    """Per-bin z = psi / sqrt(N); bins beyond max_abs_z are flagged."""
    flags = []
    for b in series.bins:
        if b.n == 0:
            continue
        z = b.psi / math.sqrt(b.n)
        flags.append(
            NeutralityFlag(bin_start=b.bin_start, z=z, compatible=abs(z) <= max_abs_z)
        )
    return flags


def mentions_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["drug", "bin_start", "count"])
    for drug, bin_start, count in rows:
        w.writerow([drug, bin_start, count])
    return buf.getvalue()

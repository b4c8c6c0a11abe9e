"""Tweet ingestion: record parsing, lexeme tokenization and the keyword gate.

Records arrive as JSONL (default) or CSV with the five attributes
tweet_id, user_id, date, text, user_lang. Tweets are tokenized into
lowercase tokens plus a deduplicated set of stemmed lexemes; a tweet
enters the working corpus only when at least one of its lexemes equals a
keyword lexeme. Matching is exact on whole lexemes, so compound words
(e.g. "giftcard") never trigger a shorter keyword embedded inside them.
"""

import csv
import datetime
import io
import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field

from .stemmer import STEMMER_NAME, stem

logger = logging.getLogger(__name__)

REQUIRED_FIELDS = ("tweet_id", "user_id", "date", "text", "user_lang")

# Study window defaults: the collection period of the source corpus.
DEFAULT_WINDOW_START = datetime.date(2010, 9, 9)
DEFAULT_WINDOW_END = datetime.date(2013, 8, 28)

# Alphanumeric runs; apostrophes and intra-word hyphens/periods stay inside
# one token so anti-hiv, bit.ly and t.co survive whole. Underscore is
# treated as punctuation.
_TOKEN_RE = re.compile(r"[^\W_]+(?:['\-.][^\W_]+)*", re.UNICODE)


class CorpusError(ValueError):
    """Invalid record or corpus-level constraint violation."""


@dataclass(frozen=True)
class TweetRecord:
    """One ingested post (the five corpus attributes plus pass-through extras).

    extra holds optional downstream fields (label, sentiment, effects,
    retweet) untouched by ingestion.
    """

    tweet_id: int
    user_id: int
    date: datetime.date
    text: str
    user_lang: str
    extra: dict = field(default_factory=dict, compare=False)

    def to_json_dict(self):
        d = {
            "tweet_id": self.tweet_id,
            "user_id": self.user_id,
            "date": self.date.isoformat(),
            "text": self.text,
            "user_lang": self.user_lang,
        }
        d.update(self.extra)
        return d


@dataclass(frozen=True)
class LexemeList:
    """Ordered tokens of one tweet plus its deduplicated stemmed lexemes."""

    tokens: tuple
    lexemes: frozenset
    ncharacters: int


def tokenize(text):
    """Split text into lowercase tokens and stemmed unique lexemes.

    Full URLs are split on "/" first so the host part (t.co, bit.ly)
    remains a targetable token.
    """
    lowered = text.lower().replace("/", " ")
    tokens = tuple(_TOKEN_RE.findall(lowered))
    lexemes = frozenset(stem(t) for t in tokens)
    return LexemeList(tokens=tokens, lexemes=lexemes, ncharacters=len(text))


@dataclass(frozen=True)
class KeywordSet:
    """Stemmed keyword lexemes; multiword terms contribute one lexeme each."""

    keywords: frozenset

    @classmethod
    def from_terms(cls, terms):
        lexemes = set()
        for term in terms:
            for token in _TOKEN_RE.findall(term.lower()):
                lexemes.add(stem(token))
        if not lexemes:
            raise CorpusError("keyword set is empty")
        return cls(keywords=frozenset(lexemes))

    @classmethod
    def from_file(cls, path):
        terms = []
        with open(path, encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if line and not line.startswith("#"):
                    terms.append(line)
        return cls.from_terms(terms)


def keyword_gate(rec, kw, lexemes=None):
    """True iff at least one stemmed lexeme of the tweet is a keyword lexeme."""
    if lexemes is None:
        lexemes = tokenize(rec.text).lexemes
    return not kw.keywords.isdisjoint(lexemes)


def _parse_date(value):
    if isinstance(value, datetime.date):
        return value
    return datetime.date.fromisoformat(str(value).strip())


def _build_record(raw, max_text_chars, window):
    missing = [k for k in REQUIRED_FIELDS if k not in raw or raw[k] is None]
    if missing:
        raise CorpusError(f"missing required field(s): {', '.join(missing)}")
    text = str(raw["text"])
    if not text.strip():
        raise CorpusError("empty text")
    if max_text_chars is not None and len(text) > max_text_chars:
        raise CorpusError(f"text longer than {max_text_chars} characters")
    try:
        tweet_id = int(raw["tweet_id"])
        user_id = int(raw["user_id"])
    except (TypeError, ValueError) as exc:
        raise CorpusError(f"non-integer id: {exc}") from None
    try:
        date = _parse_date(raw["date"])
    except ValueError as exc:
        raise CorpusError(f"bad date: {exc}") from None
    if window is not None:
        start, end = window
        if not (start <= date <= end):
            raise CorpusError(f"date {date} outside study window {start}..{end}")
    extra = {k: v for k, v in raw.items() if k not in REQUIRED_FIELDS}
    return TweetRecord(
        tweet_id=tweet_id,
        user_id=user_id,
        date=date,
        text=text,
        user_lang=str(raw["user_lang"]),
        extra=extra,
    )


@dataclass
class ParseStats:
    accepted: int = 0
    rejected: int = 0


def parse_corpus(
    lines,
    fmt="jsonl",
    *,
    max_text_chars=None,
    window=(DEFAULT_WINDOW_START, DEFAULT_WINDOW_END),
    on_duplicate="reject",
    stats=None,
):
    """Yield TweetRecords from an iterable of lines, skipping bad ones.

    Malformed lines, missing fields and out-of-window dates are logged with
    their line number and counted in stats.rejected. Duplicate tweet_ids are
    rejected by default ("reject") or passed through ("allow").
    """
    if fmt not in ("jsonl", "csv"):
        raise CorpusError(f"unknown corpus format: {fmt}")
    if on_duplicate not in ("reject", "allow"):
        raise CorpusError(f"unknown duplicate policy: {on_duplicate}")
    if stats is None:
        stats = ParseStats()

    if fmt == "csv":
        reader = csv.DictReader(lines)
        numbered = enumerate(reader, start=2)  # header is line 1
    else:
        numbered = enumerate(lines, start=1)

    seen_ids = set()
    for lineno, raw in numbered:
        try:
            if fmt == "jsonl":
                raw = raw.strip()
                if not raw:
                    continue
                obj = json.loads(raw)
                if not isinstance(obj, dict):
                    raise CorpusError("line is not a JSON object")
            else:
                obj = {k: v for k, v in raw.items() if k is not None}
            rec = _build_record(obj, max_text_chars, window)
            if on_duplicate == "reject":
                if rec.tweet_id in seen_ids:
                    raise CorpusError(f"duplicate tweet_id {rec.tweet_id}")
                seen_ids.add(rec.tweet_id)
        except (CorpusError, json.JSONDecodeError) as exc:
            stats.rejected += 1
            logger.warning("line %d skipped: %s", lineno, exc)
            continue
        stats.accepted += 1
        yield rec


def read_corpus(path, fmt=None, **kwargs):
    """Load a whole corpus file into a list of records."""
    if fmt is None:
        fmt = "csv" if str(path).endswith(".csv") else "jsonl"
    with open(path, encoding="utf-8") as f:
        return list(parse_corpus(f, fmt, **kwargs))


def write_corpus(records, path, *, index_path=None):
    """Persist records as JSONL plus an optional sidecar lexeme index.

    The index maps each lexeme to the sorted tweet_ids containing it,
    replicating an indexed lexeme query without an external database.
    """
    index = {}
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec.to_json_dict(), sort_keys=True))
            f.write("\n")
            if index_path is not None:
                for lex in tokenize(rec.text).lexemes:
                    index.setdefault(lex, []).append(rec.tweet_id)
    if index_path is not None:
        payload = {
            "stemmer": STEMMER_NAME,
            "lexemes": {k: sorted(v) for k, v in sorted(index.items())},
        }
        with open(index_path, "w", encoding="utf-8") as f:
            json.dump(payload, f, sort_keys=True, indent=0)
            f.write("\n")


def token_frequency(corpus):
    """Per-lexeme (rows, total): tweets containing it and summed occurrences.

    Sorted by rows descending, ties by lexeme for a stable table.
    """
    rows = Counter()
    totals = Counter()
    for rec in corpus:
        toks = tokenize(rec.text)
        counts = Counter(stem(t) for t in toks.tokens)
        for lex, n in counts.items():
            rows[lex] += 1
            totals[lex] += n
    table = [(lex, rows[lex], totals[lex]) for lex in rows]
    table.sort(key=lambda r: (-r[1], r[0]))
    return table


def write_frequency_csv(table, path_or_file):
    def _write(f):
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["lexeme", "rows", "total"])
        for lex, nrows, total in table:
            w.writerow([lex, nrows, total])

    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
        with open(path_or_file, "w", encoding="utf-8", newline="") as f:
            _write(f)
    else:
        _write(path_or_file)


def frequency_csv_text(table):
    buf = io.StringIO()
    write_frequency_csv(table, buf)
    return buf.getvalue()

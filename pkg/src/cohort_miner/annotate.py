"""Two-rater annotation pool with agreement resolution.

Every tweet is rated by at most two raters; a tweet's ground truth
exists only when both raters chose the same category. Sentiment (signal
tweets only) is an integer in [-5, 5]; two ratings combine as their mean
rounded half away from zero. Accepted annotations append to a JSONL log
from which the whole pool state, and therefore every export, can be
replayed byte for byte.
"""

import json
import math
import re
import threading
import time
from dataclasses import dataclass

CATEGORIES = ("signal", "noise", "not_english")
SENTIMENT_MIN, SENTIMENT_MAX = -5, 5

_RATER_RE = re.compile(r"^[\w.\-]{1,64}$")


class AnnotationError(ValueError):
    """Invalid annotation payload (sentiment range, category, serving)."""


class DuplicateAnnotation(AnnotationError):
    """Second submission by the same rater for the same tweet."""


class UnknownRater(AnnotationError):
    pass


@dataclass(frozen=True)
class Annotation:
    tweet_id: int
    rater_id: str
    category: str
    sentiment: int | None = None
    timestamp: float = 0.0

    def validate(self):
        if self.category not in CATEGORIES:
            raise AnnotationError(f"unknown category: {self.category!r}")
        if self.sentiment is not None:
            if self.category != "signal":
                raise AnnotationError("sentiment is rated only for signal tweets")
            if not isinstance(self.sentiment, int) or isinstance(self.sentiment, bool):
                raise AnnotationError("sentiment must be an integer")
            if not SENTIMENT_MIN <= self.sentiment <= SENTIMENT_MAX:
                raise AnnotationError(
                    f"sentiment outside [{SENTIMENT_MIN}, {SENTIMENT_MAX}]"
                )

    def to_json_dict(self):
        d = {
            "tweet_id": self.tweet_id,
            "rater": self.rater_id,
            "category": self.category,
            "timestamp": self.timestamp,
        }
        if self.sentiment is not None:
            d["sentiment"] = self.sentiment
        return d


@dataclass(frozen=True)
class ResolvedLabel:
    tweet_id: int
    status: str  # agreed | disagreed | pending
    category: str | None = None
    sentiment: int | None = None


def _round_half_away(x):
    return int(math.floor(x + 0.5)) if x >= 0 else int(math.ceil(x - 0.5))


def resolve(tweet_id, annotations):
    """Pure resolution of a tweet's annotations.

    Two ratings agree when their categories match. A third rating (only
    collected when disagreed tweets are re-queued) resolves by majority.
    Sentiment combines the agreeing raters' values as a mean rounded
    half away from zero.
    """
    if len(annotations) < 2:
        return ResolvedLabel(tweet_id=tweet_id, status="pending")
    counts = {}
    for a in annotations:
        counts[a.category] = counts.get(a.category, 0) + 1
    top_category, top_count = max(counts.items(), key=lambda kv: kv[1])
    if top_count < 2:
        return ResolvedLabel(tweet_id=tweet_id, status="disagreed")
    present = [
        a.sentiment for a in annotations
        if a.category == top_category and a.sentiment is not None
    ]
    sentiment = None
    if present:
        sentiment = _round_half_away(sum(present) / len(present))
    return ResolvedLabel(
        tweet_id=tweet_id,
        status="agreed",
        category=top_category,
        sentiment=sentiment,
    )


class AnnotationPool:
    """Serves tweets to raters and stores their ratings.

    Task assignment and resolution are serialized under one lock, so a
    tweet is never handed to the same rater twice and resolution sees
    both ratings atomically.
    """

    def __init__(self, tweets, log_path=None, clock=time.time,
                 requeue_disagreed=False):
        self.tweets = {t.tweet_id: t for t in tweets}
        self.order = sorted(self.tweets)
        self.log_path = log_path
        self.clock = clock
        self.requeue_disagreed = requeue_disagreed
        self.annotations = {}  # tweet_id -> {rater_id: Annotation}
        self.served = set()  # (tweet_id, rater_id)
        self.lock = threading.RLock()

    # -- task assignment ---------------------------------------------------

    def _check_rater(self, rater_id):
        if not isinstance(rater_id, str) or not _RATER_RE.match(rater_id or ""):
            raise UnknownRater(f"invalid rater id: {rater_id!r}")

    def _open_for(self, tid, rater_id):
        existing = self.annotations.get(tid, {})
        if rater_id in existing:
            return False
        if len(existing) < 2:
            return True
        return (
            self.requeue_disagreed
            and len(existing) == 2
            and self.resolve(tid).status == "disagreed"
        )

    def next_task(self, rater_id):
        """A tweet the rater has not seen; single-rated tweets come first."""
        self._check_rater(rater_id)
        with self.lock:
            single, fresh = None, None
            for tid in self.order:
                if (tid, rater_id) in self.served:
                    continue
                if not self._open_for(tid, rater_id):
                    continue
                n_ratings = len(self.annotations.get(tid, {}))
                if n_ratings >= 1 and single is None:
                    single = tid
                    break
                if n_ratings == 0 and fresh is None:
                    fresh = tid
            tid = single if single is not None else fresh
            if tid is None:
                return None
            self.served.add((tid, rater_id))
            return self.tweets[tid]

    # -- submission --------------------------------------------------------

    def submit(self, annotation):
        """Store one rating; returns the tweet's resolution status."""
        annotation.validate()
        self._check_rater(annotation.rater_id)
        tid = annotation.tweet_id
        if tid not in self.tweets:
            raise AnnotationError(f"unknown tweet_id: {tid}")
        with self.lock:
            if (tid, annotation.rater_id) not in self.served:
                raise AnnotationError(
                    f"tweet {tid} was not served to rater {annotation.rater_id}"
                )
            existing = self.annotations.setdefault(tid, {})
            if annotation.rater_id in existing:
                raise DuplicateAnnotation(
                    f"rater {annotation.rater_id} already rated tweet {tid}"
                )
            if len(existing) >= 2 and not (
                self.requeue_disagreed
                and len(existing) == 2
                and self.resolve(tid).status == "disagreed"
            ):
                raise DuplicateAnnotation(f"tweet {tid} already has two ratings")
            if annotation.timestamp == 0.0:
                annotation = Annotation(
                    tweet_id=annotation.tweet_id,
                    rater_id=annotation.rater_id,
                    category=annotation.category,
                    sentiment=annotation.sentiment,
                    timestamp=float(self.clock()),
                )
            existing[annotation.rater_id] = annotation
            if self.log_path is not None:
                with open(self.log_path, "a", encoding="utf-8") as f:
                    f.write(json.dumps(annotation.to_json_dict(), sort_keys=True))
                    f.write("\n")
            return self.resolve(tid)

    def resolve(self, tweet_id):
        anns = list(self.annotations.get(tweet_id, {}).values())
        anns.sort(key=lambda a: (a.timestamp, a.rater_id))
        return resolve(tweet_id, anns)

    # -- statistics and export ----------------------------------------------

    def agreement_rate(self):
        """Fraction of multi-rated tweets whose first two ratings matched."""
        with self.lock:
            doubly = [
                tid for tid, anns in self.annotations.items() if len(anns) >= 2
            ]
            if not doubly:
                raise AnnotationError("no doubly-rated tweets yet")
            agreed = 0
            for tid in doubly:
                anns = sorted(
                    self.annotations[tid].values(),
                    key=lambda a: (a.timestamp, a.rater_id),
                )
                agreed += anns[0].category == anns[1].category
            return agreed / len(doubly)

    def stats(self):
        with self.lock:
            rated = sum(1 for anns in self.annotations.values() if anns)
            doubly = sum(
                1 for anns in self.annotations.values() if len(anns) >= 2
            )
            try:
                rate = self.agreement_rate()
            except AnnotationError:
                rate = None
            return {
                "total": len(self.tweets),
                "rated": rated,
                "doubly_rated": doubly,
                "agreement_rate": rate,
            }

    def export_labels(self):
        """Agreed resolutions only, ordered by tweet_id."""
        with self.lock:
            out = []
            for tid in self.order:
                if len(self.annotations.get(tid, {})) >= 2:
                    res = self.resolve(tid)
                    if res.status == "agreed":
                        out.append(res)
            return out

    def export_jsonl(self):
        """Labeled corpus: agreed tweets joined back to their records."""
        lines = []
        for res in self.export_labels():
            rec = self.tweets[res.tweet_id]
            row = rec.to_json_dict()
            row["label"] = res.category
            if res.sentiment is not None:
                row["sentiment"] = res.sentiment
            lines.append(json.dumps(row, sort_keys=True))
        return "\n".join(lines) + ("\n" if lines else "")

    # -- durability ----------------------------------------------------------

    @classmethod
    def replay(cls, tweets, log_path, clock=time.time, requeue_disagreed=False):
        """Rebuild a pool from its append-only annotation log."""
        pool = cls(tweets, log_path=None, clock=clock,
                   requeue_disagreed=requeue_disagreed)
        try:
            f = open(log_path, encoding="utf-8")
        except FileNotFoundError:
            pool.log_path = log_path
            return pool
        with f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                d = json.loads(line)
                ann = Annotation(
                    tweet_id=d["tweet_id"],
                    rater_id=d["rater"],
                    category=d["category"],
                    sentiment=d.get("sentiment"),
                    timestamp=d.get("timestamp", 0.0),
                )
                pool.served.add((ann.tweet_id, ann.rater_id))
                pool.annotations.setdefault(ann.tweet_id, {})[ann.rater_id] = ann
        pool.log_path = log_path
        return pool

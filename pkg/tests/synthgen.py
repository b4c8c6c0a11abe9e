"""Deterministic synthetic fixtures shared across the test suite.

Text corpora are assembled from the bundled language wordlists so the
language filter sees realistic vocabulary; feature-space corpora draw
the nine classifier features from overlapping but separated
distributions.
"""

import datetime
import json

import numpy as np

from cohort_miner.features import FeatureVector
from cohort_miner.ingest import TweetRecord
from cohort_miner import wordlists

DRUGS = ("atripla", "truvada", "complera", "isentress", "sustiva", "viread",
         "kaletra", "norvir", "stribild", "prezista")
EFFECTS = ("nightmares", "vivid dreams", "insomnia", "nausea", "headache",
           "fatigue", "dizziness", "none")

_SIGNAL_TEMPLATES = (
    "i took my {drug} and i feel {adj}",
    "my {drug} gave me {effect} again",
    "im so {adj} since starting {drug}",
    "day three on {drug} and i cant sleep",
    "i hate the {effect} from my {drug} dose",
    "feeling {adj} today my {drug} is rough",
    "started {drug} last week and my dreams are so vivid",
    "my doctor switched me to {drug} i hope it helps",
)
_SIGNAL_ADJ = ("dizzy", "tired", "sick", "weird", "fine", "awful", "happy")

_NOISE_TEMPLATES = (
    "new study shows {drug} reduces infection rates",
    "fda approves {drug} for treatment",
    "breaking {drug} sales rise this quarter",
    "health officials discuss hiv treatment access",
    "{drug} maker announces new pricing for treatment",
    "report says hiv drug prices fall worldwide",
    "clinic offers hiv treatment screening this weekend",
)


def _date_in_window(rng):
    start = datetime.date(2010, 9, 9)
    span = (datetime.date(2013, 8, 28) - start).days
    return start + datetime.timedelta(days=int(rng.integers(0, span + 1)))


def _foreign_text(rng, words_by_lang, nwords):
    lang = list(words_by_lang)[int(rng.integers(0, len(words_by_lang)))]
    pool = words_by_lang[lang]
    return " ".join(pool[int(rng.integers(0, len(pool)))] for _ in range(nwords))


def make_text_corpus(n_signal=60, n_noise=120, n_foreign=40, seed=0,
                     with_labels=True, with_sentiment=True,
                     with_effects=True):
    """TweetRecords with class labels in extra; ids and users deterministic."""
    rng = np.random.default_rng(seed)
    english, foreign_sets = wordlists.load_all()
    foreign_pools = {
        name: sorted(wordlists.load_wordlist(name))
        for name in wordlists.FOREIGN[:4]
    }
    records = []
    tid = 1
    for _ in range(n_signal):
        template = _SIGNAL_TEMPLATES[int(rng.integers(0, len(_SIGNAL_TEMPLATES)))]
        drug = DRUGS[int(rng.integers(0, len(DRUGS)))]
        effect = EFFECTS[int(rng.integers(0, len(EFFECTS) - 1))]
        text = template.format(
            drug=drug, effect=effect,
            adj=_SIGNAL_ADJ[int(rng.integers(0, len(_SIGNAL_ADJ)))],
        )
        extra = {}
        if with_labels:
            extra["label"] = "signal"
        if with_sentiment:
            extra["sentiment"] = int(rng.integers(-5, 6))
        if with_effects and rng.random() < 0.7:
            extra["effects"] = [effect]
        if rng.random() < 0.15:
            text = "rt " + text
            extra["retweet"] = True
        records.append(TweetRecord(
            tweet_id=tid, user_id=int(rng.integers(1, max(4, n_signal // 3))),
            date=_date_in_window(rng), text=text, user_lang="en", extra=extra,
        ))
        tid += 1
    for _ in range(n_noise):
        template = _NOISE_TEMPLATES[int(rng.integers(0, len(_NOISE_TEMPLATES)))]
        drug = DRUGS[int(rng.integers(0, len(DRUGS)))]
        text = template.format(drug=drug)
        extra = {"label": "noise"} if with_labels else {}
        records.append(TweetRecord(
            tweet_id=tid, user_id=int(rng.integers(1000, 1000 + n_noise)),
            date=_date_in_window(rng), text=text, user_lang="en", extra=extra,
        ))
        tid += 1
    for i in range(n_foreign):
        text = _foreign_text(rng, foreign_pools, int(rng.integers(5, 12)))
        if rng.random() < 0.6:  # foreign posts naming a drug pass the gate
            drug = DRUGS[int(rng.integers(0, len(DRUGS)))]
            text = f"{text} {drug}"
        extra = {"label": "not_english"} if with_labels else {}
        # half come from English-labeled accounts, dodging the account rule
        lang = "en" if i % 2 == 0 else ["es", "pt", "fr", "de"][int(rng.integers(0, 4))]
        records.append(TweetRecord(
            tweet_id=tid, user_id=int(rng.integers(5000, 5000 + n_foreign)),
            date=_date_in_window(rng), text=text,
            user_lang=lang,
            extra=extra,
        ))
        tid += 1
    return records


def write_jsonl(records, path):
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec.to_json_dict(), sort_keys=True))
            f.write("\n")


def make_feature_corpus(n_signal=300, n_noise=1809, seed=0):
    """Nine-feature vectors from overlapping class-conditional distributions."""
    rng = np.random.default_rng(seed)

    def signal_row():
        return dict(
            personalcount=float(rng.poisson(1.5)),
            tagnoun=float(rng.beta(2.5, 4.0)),
            sis_noise=float(abs(rng.normal(1.1, 0.8))),
            sis_signal=float(abs(rng.normal(1.9, 0.9))),
            bigrams_noise=float(rng.exponential(0.003)),
            is_english=float(1.0 + rng.gamma(2.0, 0.5)),
            common_noise=float(abs(rng.normal(0.14, 0.05))),
            common_signal=float(abs(rng.normal(0.20, 0.07))),
            ncharacters=float(np.clip(rng.normal(92, 26), 10, 150)),
        )

    def noise_row():
        return dict(
            personalcount=float(rng.poisson(0.2)),
            tagnoun=float(rng.beta(4.0, 2.5)),
            sis_noise=float(abs(rng.normal(1.9, 0.9))),
            sis_signal=float(abs(rng.normal(1.1, 0.8))),
            bigrams_noise=float(rng.exponential(0.006)),
            is_english=float(1.0 + rng.gamma(2.0, 0.5)),
            common_noise=float(abs(rng.normal(0.22, 0.06))),
            common_signal=float(abs(rng.normal(0.12, 0.05))),
            ncharacters=float(np.clip(rng.normal(112, 24), 10, 150)),
        )

    vectors = []
    labels = []
    for _ in range(n_signal):
        vectors.append(FeatureVector(**signal_row()))
        labels.append("signal")
    for _ in range(n_noise):
        vectors.append(FeatureVector(**noise_row()))
        labels.append("noise")
    return vectors, labels

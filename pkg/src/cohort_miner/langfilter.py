"""Four-threshold cut that removes non-English tweets.

A tweet passes when its English/foreign word ratio is at least 1, it is
shorter than 150 characters, fewer than 14 of its words appear in the
not-English word list, and its words outnumber the not-English matches.
Zero not-English matches means no foreign evidence, so the ratio
condition passes by definition.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class LangCut:
    min_is_english: float = 1.0
    max_ncharacters: int = 150
    max_in_notenglish: int = 14
    min_ratio_wordcount_over_notenglish: float = 1.0

    def __post_init__(self):
        for name in (
            "min_is_english",
            "max_ncharacters",
            "max_in_notenglish",
            "min_ratio_wordcount_over_notenglish",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def pass_langcut(v, cut=LangCut()):
    """True iff the feature vector survives all four requirements."""
    if not v.is_english >= cut.min_is_english:
        return False
    if not v.ncharacters < cut.max_ncharacters:
        return False
    if not v.in_notenglish < cut.max_in_notenglish:
        return False
    if v.in_notenglish > 0:
        if not v.wordcount / v.in_notenglish > cut.min_ratio_wordcount_over_notenglish:
            return False
    return True


def yield_report(labeled_vectors, cut=LangCut()):
    """Per-class (class, before, after) counts for the cut.

    labeled_vectors: iterable of (FeatureVector, class_label).
    Classes appear in first-seen order.
    """
    before = {}
    after = {}
    order = []
    for vec, label in labeled_vectors:
        if label not in before:
            before[label] = 0
            after[label] = 0
            order.append(label)
        before[label] += 1
        if pass_langcut(vec, cut):
            after[label] += 1
    return [(label, before[label], after[label]) for label in order]

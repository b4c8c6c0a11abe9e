"""Deterministic part-of-speech tagging from a lexicon plus suffix rules.

Each token receives exactly one tag. Lookup order: lexicon, then ordered
suffix rules, then the noun default. Pronouns and interjections live in
the lexicon under "other" so they never inflate the noun ratio.
"""

from importlib.resources import files

TAGS = ("noun", "verb", "adj", "adv", "prep", "conj", "determiner", "to", "other")

# (suffix, tag, require_verb_stem): applied in order on lexicon miss.
# The "s" rule fires only when the token minus s is a lexicon verb.
DEFAULT_SUFFIX_RULES = (
    ("ly", "adv", False),
    ("ing", "verb", False),
    ("ed", "verb", False),
    ("s", "verb", True),
    ("ous", "adj", False),
    ("ful", "adj", False),
    ("ive", "adj", False),
    ("al", "adj", False),
)


class PosLexicon:
    def __init__(self, word_tags, suffix_rules=DEFAULT_SUFFIX_RULES, default="noun"):
        for word, tag in word_tags.items():
            if tag not in TAGS:
                raise ValueError(f"unknown tag {tag!r} for word {word!r}")
        self.word_tags = dict(word_tags)
        self.suffix_rules = tuple(suffix_rules)
        self.default = default

    @classmethod
    def from_file(cls, path):
        word_tags = {}
        with open(path, encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                word, tag = line.split()
                word_tags.setdefault(word, tag)
        return cls(word_tags)

    @classmethod
    def bundled(cls):
        word_tags = {}
        text = files("cohort_miner.data").joinpath("pos_lexicon.txt").read_text("utf-8")
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            word, tag = line.split()
            word_tags.setdefault(word, tag)
        return cls(word_tags)

    def tag(self, token):
        hit = self.word_tags.get(token)
        if hit is not None:
            return hit
        if token == "to":
            return "to"
        for suffix, tag, need_verb_stem in self.suffix_rules:
            if len(token) > len(suffix) and token.endswith(suffix):
                if need_verb_stem:
                    if self.word_tags.get(token[: -len(suffix)]) == "verb":
                        return tag
                    continue
                return tag
        return self.default

    def tag_counts(self, tokens):
        counts = {t: 0 for t in TAGS}
        for tok in tokens:
            counts[self.tag(tok)] += 1
        return counts

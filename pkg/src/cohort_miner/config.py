"""Access to the bundled default configuration data."""

import json
from importlib.resources import files

from .ingest import KeywordSet


def _read(name):
    return files("cohort_miner.data").joinpath(name).read_text("utf-8")


def bundled_keywords():
    terms = [
        line.strip()
        for line in _read("keywords.txt").splitlines()
        if line.strip() and not line.startswith("#")
    ]
    return KeywordSet.from_terms(terms)


def bundled_side_effects():
    return [
        line.strip().lower()
        for line in _read("side_effects.txt").splitlines()
        if line.strip() and not line.startswith("#")
    ]


def bundled_drug_lexicon():
    from .analytics import DrugLexicon

    return DrugLexicon.from_mapping(json.loads(_read("drug_lexicon.json")))

"""Bundled per-language common-word lists used by the English-ratio feature.

Lists are plain text, one word per line; a checksum manifest guards
against silent edits so train and apply always see identical data.
"""

import hashlib
import json
from importlib.resources import files

ENGLISH = "english"
FOREIGN = (
    "spanish",
    "portuguese",
    "french",
    "german",
    "dutch",
    "italian",
    "russian",
    "swedish",
    "danish",
)


class WordlistError(RuntimeError):
    """Missing or corrupted wordlist data."""


def _data_dir():
    return files("cohort_miner.data").joinpath("wordlists")


def load_wordlist(name, verify=True):
    """Return one language's words as a frozenset."""
    path = _data_dir().joinpath(f"{name}.txt")
    try:
        text = path.read_text("utf-8")
    except FileNotFoundError:
        raise WordlistError(f"no wordlist for language {name!r}") from None
    if verify:
        manifest = json.loads(_data_dir().joinpath("checksums.json").read_text("utf-8"))
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        if manifest.get(name) != digest:
            raise WordlistError(f"wordlist {name!r} checksum mismatch")
    return frozenset(text.split())


def load_all(verify=True):
    """(english_words, [nine foreign word sets in canonical order])."""
    english = load_wordlist(ENGLISH, verify=verify)
    foreign = [load_wordlist(name, verify=verify) for name in FOREIGN]
    return english, foreign

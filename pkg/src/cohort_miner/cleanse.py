"""Rule-based noise removal and the loss bounds that justify each rule.

A rule removes a tweet when a listed word appears as a whole token (never
as a substring), when the first token is a given word, or when the
account language is not English. Removal decisions are independent
predicates, so rule order changes per-rule attribution but never the
kept set. The probability of having discarded real signal is bounded by
scaling annotated subsample counts Poisson-style and converting the
z-score of the expected loss into an upper-tail normal probability.
"""

import csv
import io
import math
from dataclasses import dataclass

from .ingest import tokenize

RULE_KINDS = (
    "contains_token",
    "starts_with",
    "user_lang_not_english",
    "contains_any_of_list",
)


class RuleError(ValueError):
    """Malformed rule line or rule set."""


@dataclass(frozen=True)
class CleanseRule:
    stage: int
    kind: str
    payload: tuple = ()

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise RuleError(f"unknown rule kind: {self.kind}")
        if self.kind == "user_lang_not_english":
            if self.payload:
                raise RuleError("user_lang_not_english takes no payload")
        elif not self.payload:
            raise RuleError(f"{self.kind} needs a payload")
        if any(p != p.lower() for p in self.payload):
            raise RuleError("rule payload must be lowercase")

    def matches(self, rec, tokens=None):
        if self.kind == "user_lang_not_english":
            return not rec.user_lang.lower().startswith("en")
        if tokens is None:
            tokens = tokenize(rec.text).tokens
        if self.kind == "starts_with":
            return bool(tokens) and tokens[0] == self.payload[0]
        if self.kind == "contains_token":
            return self.payload[0] in tokens
        return any(p in tokens for p in self.payload)  # contains_any_of_list

    def label(self):
        if self.kind == "user_lang_not_english":
            return f"{self.stage}:user_lang_not_english"
        return f"{self.stage}:{self.kind}:{','.join(self.payload)}"


def parse_rules(lines):
    """Parse `stage kind payload...` lines; # comments and blanks skipped."""
    rules = []
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 2:
            raise RuleError(f"line {lineno}: expected `stage kind payload...`")
        try:
            stage = int(parts[0])
        except ValueError:
            raise RuleError(f"line {lineno}: stage must be an integer") from None
        kind = parts[1]
        payload = tuple(p.lower() for p in parts[2:])
        rules.append(CleanseRule(stage=stage, kind=kind, payload=payload))
    stages = [r.stage for r in rules]
    if len(set(stages)) != len(stages):
        raise RuleError("stages must be strictly ordered and unique")
    rules.sort(key=lambda r: r.stage)
    return rules


def load_rules(path):
    with open(path, encoding="utf-8") as f:
        return parse_rules(f)


def default_rules():
    from importlib.resources import files

    text = files("cohort_miner.data").joinpath("default.rules").read_text("utf-8")
    return parse_rules(text.splitlines())


def apply_rules(corpus, rules):
    """Partition a corpus into (kept, removed counts per rule).

    Each removed tweet is attributed to the first matching rule in stage
    order. kept + removed partition the input exactly.
    """
    counts = {r.label(): 0 for r in rules}
    kept = []
    for rec in corpus:
        tokens = tokenize(rec.text).tokens
        for rule in rules:
            if rule.matches(rec, tokens):
                counts[rule.label()] += 1
                break
        else:
            kept.append(rec)
    return kept, counts


def removal_report_csv(counts):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rule", "removed_count"])
    for label in counts:
        w.writerow([label, counts[label]])
    return buf.getvalue()


@dataclass(frozen=True)
class LossEstimate:
    """Expected signal tweets lost to a rule group plus its tail probability."""

    expected: float
    sigma: float
    n_samples: int
    observed: float
    z: float
    prob: float

    def to_json_dict(self):
        return {
            "expected": self.expected,
            "sigma": self.sigma,
            "n_samples": self.n_samples,
            "observed": self.observed,
            "z": self.z,
            "prob": self.prob,
        }


def poisson_scale(found, n_found_in, n_target):
    """Scale a count found in one sample size to another, Poisson style.

    Returns (expected, sigma) with expected = found * n_target / n_found_in
    and sigma = sqrt(expected).
    """
    if n_found_in <= 0:
        raise ValueError("n_found_in must be positive")
    expected = found * n_target / n_found_in
    return expected, math.sqrt(expected)


def loss_report(groups):
    """LossEstimate block per justified rule group.

    Each group dict carries `name`, `rules` (labels it justifies),
    `n_samples`, optional `observed` (default 0), and either raw counts
    (`found`, `n_found_in`, `n_target`) for Poisson scaling or a direct
    (`expected`, `sigma`) pair.
    """
    out = {}
    for group in groups:
        name = group["name"]
        observed = float(group.get("observed", 0.0))
        n_samples = int(group["n_samples"])
        if "found" in group:
            expected, sigma = poisson_scale(
                group["found"], group["n_found_in"], group["n_target"]
            )
        else:
            expected, sigma = float(group["expected"]), float(group["sigma"])
        est = loss_probability(expected, sigma, n_samples, observed)
        out[name] = {"rules": list(group.get("rules", ())),
                     **est.to_json_dict()}
    return out


def default_loss_groups():
    from importlib.resources import files

    text = files("cohort_miner.data").joinpath("default_loss.json").read_text("utf-8")
    import json

    return json.loads(text)


def loss_probability(expected, sigma, n_samples, observed=0.0):
    """Upper-tail normal probability of the expected-vs-observed z-score.

    z = (expected - observed) / (sigma / sqrt(n_samples)); prob = P(Z > z)
    evaluated through erfc, accurate to well under 1e-10 absolute.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    z = (expected - observed) / (sigma / math.sqrt(n_samples))
    prob = 0.5 * math.erfc(z / math.sqrt(2.0))
    return LossEstimate(
        expected=expected,
        sigma=sigma,
        n_samples=n_samples,
        observed=observed,
        z=z,
        prob=prob,
    )

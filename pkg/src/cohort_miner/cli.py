"""Command-line pipeline: composable stages over persisted artifacts.

Every stage reads and writes the documented file formats, verifies its
inputs against the pipeline manifest, and exits 0 on success, 1 on
validation errors and 2 on I/O errors.
"""

import json
import logging
import os
import sys
from pathlib import Path

import click

from . import analytics as ana
from . import cleanse as cl
from . import config
from . import features as feat
from . import ingest as ing
from . import langfilter as lf
from .annotate import AnnotationPool
from .classifier import (
    KernelSpec,
    ScoringError,
    SvmModel,
    TrainSplit,
    pick_threshold,
    roc_from_scores,
    score_many,
    train_svm,
)
from .manifest import ManifestError, PipelineManifest
from .svm import TrainingError

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2

logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")


def _data_dir():
    return Path(os.environ.get("COHORT_MINER_DATA", "."))


def _manifest(path=None):
    return PipelineManifest(path or _data_dir() / "manifest.json")


class _Fail(SystemExit):
    def __init__(self, code, message):
        click.echo(f"error: {message}", err=True)
        super().__init__(code)


def _guard(fn):
    """Map domain and I/O errors onto the documented exit codes."""
    import functools

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (OSError, json.JSONDecodeError) as exc:
            raise _Fail(EXIT_IO, str(exc))
        except (ing.CorpusError, cl.RuleError, feat.FeatureError,
                TrainingError, ScoringError, ana.AnalyticsError,
                ManifestError, ValueError) as exc:
            raise _Fail(EXIT_VALIDATION, str(exc))

    return wrapper


def _read_labeled(path):
    """Records carrying a `label` extra -> (record, label) pairs."""
    pairs = []
    for rec in ing.read_corpus(path):
        label = rec.extra.get("label")
        if label is None:
            raise ing.CorpusError(f"record {rec.tweet_id} has no label field")
        pairs.append((rec, label))
    return pairs


def _extractor(stats_path):
    with open(stats_path, encoding="utf-8") as f:
        stats = feat.CorpusStats.from_json(f.read())
    return feat.FeatureExtractor(stats), stats


class PipelineGroup(click.Group):
    """Group with the documented exit codes: usage/validation errors are 1."""

    def main(self, args=None, prog_name=None, complete_var=None,
             standalone_mode=True, **extra):
        try:
            rv = super().main(
                args=args, prog_name=prog_name, complete_var=complete_var,
                standalone_mode=False, **extra,
            )
        except click.UsageError as exc:
            if exc.ctx is not None:
                click.echo(exc.ctx.get_usage(), err=True)
            click.echo(f"error: {exc.format_message()}", err=True)
            sys.exit(EXIT_VALIDATION)
        except click.ClickException as exc:
            exc.show()
            sys.exit(EXIT_VALIDATION)
        except click.exceptions.Abort:
            sys.exit(EXIT_VALIDATION)
        if standalone_mode:
            sys.exit(EXIT_OK)
        return rv


@click.group(cls=PipelineGroup)
def main():
    """Keyword-filtered tweet mining pipeline."""


@main.command("ingest")
@click.argument("src", type=click.Path())
@click.argument("dst", type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["jsonl", "csv"]), default=None)
@click.option("--keywords", "keywords_path", type=click.Path())
@click.option("--frequency-csv", type=click.Path())
@click.option("--index", "index_path", type=click.Path())
@click.option("--no-gate", is_flag=True, help="skip the keyword gate")
@click.option("--manifest", "manifest_path", type=click.Path())
@_guard
def ingest_cmd(src, dst, fmt, keywords_path, frequency_csv, index_path,
               no_gate, manifest_path):
    """Parse records, apply the keyword gate, persist the working corpus."""
    man = _manifest(manifest_path)
    man.verify_input("raw_corpus", src)
    kw = (
        ing.KeywordSet.from_file(keywords_path)
        if keywords_path
        else config.bundled_keywords()
    )
    stats = ing.ParseStats()
    if fmt is None:
        fmt = "csv" if str(src).endswith(".csv") else "jsonl"
    with open(src, encoding="utf-8") as f:
        records = list(ing.parse_corpus(f, fmt, stats=stats))
    kept = [
        r for r in records
        if no_gate or ing.keyword_gate(r, kw)
    ]
    ing.write_corpus(kept, dst, index_path=index_path)
    if frequency_csv:
        ing.write_frequency_csv(ing.token_frequency(kept), frequency_csv)
    man.record_artifact("raw_corpus", src)
    man.record_artifact("corpus", dst)
    man.complete_stage(
        "ingest",
        accepted=stats.accepted,
        rejected=stats.rejected,
        gated=len(kept),
    )
    man.save()
    click.echo(
        f"ingest: {stats.accepted} parsed, {stats.rejected} rejected, "
        f"{len(kept)} past keyword gate"
    )


@main.command("cleanse")
@click.argument("src", type=click.Path())
@click.argument("dst", type=click.Path())
@click.option("--rules", "rules_path", type=click.Path())
@click.option("--report", "report_path", type=click.Path())
@click.option("--loss-spec", "loss_spec_path", type=click.Path(),
              help="rule-group loss parameters (default: bundled)")
@click.option("--loss-report", "loss_report_path", type=click.Path(),
              help="write per-group LossEstimate blocks as JSON")
@click.option("--manifest", "manifest_path", type=click.Path())
@_guard
def cleanse_cmd(src, dst, rules_path, report_path, loss_spec_path,
                loss_report_path, manifest_path):
    """Apply the rule set; write kept corpus and per-rule removal counts."""
    man = _manifest(manifest_path)
    man.verify_input("corpus", src)
    rules = cl.load_rules(rules_path) if rules_path else cl.default_rules()
    corpus = ing.read_corpus(src)
    kept, counts = cl.apply_rules(corpus, rules)
    ing.write_corpus(kept, dst)
    if report_path:
        with open(report_path, "w", encoding="utf-8", newline="") as f:
            f.write(cl.removal_report_csv(counts))
    if loss_report_path:
        if loss_spec_path:
            with open(loss_spec_path, encoding="utf-8") as f:
                groups = json.load(f)
        else:
            groups = cl.default_loss_groups()
        with open(loss_report_path, "w", encoding="utf-8") as f:
            json.dump(cl.loss_report(groups), f, indent=2, sort_keys=True)
            f.write("\n")
    man.record_artifact("corpus", src)
    man.record_artifact("cleansed", dst)
    man.complete_stage("cleanse", kept=len(kept), removed=len(corpus) - len(kept))
    man.save()
    click.echo(f"cleanse: kept {len(kept)} of {len(corpus)}")


@main.group("features")
def features_group():
    """Corpus statistics and feature extraction."""


@features_group.command("build-stats")
@click.argument("labeled_src", type=click.Path())
@click.argument("stats_dst", type=click.Path())
@click.option("--manifest", "manifest_path", type=click.Path())
@_guard
def build_stats_cmd(labeled_src, stats_dst, manifest_path):
    """Build the annotated-corpus statistics bundle from agreed labels."""
    man = _manifest(manifest_path)
    man.verify_input("labeled", labeled_src)
    stats = feat.build_corpus_stats(_read_labeled(labeled_src))
    with open(stats_dst, "w", encoding="utf-8") as f:
        f.write(stats.to_json())
        f.write("\n")
    man.record_artifact("labeled", labeled_src)
    man.record_artifact("stats", stats_dst)
    man.complete_stage("build-stats", checksum=stats.checksum())
    man.save()
    click.echo(f"build-stats: checksum {stats.checksum()[:12]}")


@features_group.command("extract")
@click.argument("src", type=click.Path())
@click.argument("stats_src", type=click.Path())
@click.argument("dst", type=click.Path())
@click.option("--manifest", "manifest_path", type=click.Path())
@_guard
def extract_cmd(src, stats_src, dst, manifest_path):
    """Extract the 37-feature vector of every tweet to CSV."""
    man = _manifest(manifest_path)
    man.verify_input("stats", stats_src)
    extractor, _ = _extractor(stats_src)
    rows = [
        (rec.tweet_id, extractor.extract(rec)) for rec in ing.read_corpus(src)
    ]
    feat.write_feature_csv(rows, dst)
    man.record_artifact("features", dst)
    man.complete_stage("extract", vectors=len(rows))
    man.save()
    click.echo(f"extract: {len(rows)} vectors")


@main.command("langfilter")
@click.argument("src", type=click.Path())
@click.argument("stats_src", type=click.Path())
@click.argument("dst", type=click.Path())
@click.option("--min-is-english", type=float, default=1.0, show_default=True)
@click.option("--max-nchars", type=int, default=150, show_default=True)
@click.option("--max-notenglish", type=int, default=14, show_default=True)
@click.option("--min-word-ratio", type=float, default=1.0, show_default=True)
@click.option("--report", "report_path", type=click.Path())
@click.option("--manifest", "manifest_path", type=click.Path())
@_guard
def langfilter_cmd(src, stats_src, dst, min_is_english, max_nchars,
                   max_notenglish, min_word_ratio, report_path, manifest_path):
    """Drop non-English tweets with the four-threshold cut."""
    man = _manifest(manifest_path)
    man.verify_input("stats", stats_src)
    cut = lf.LangCut(
        min_is_english=min_is_english,
        max_ncharacters=max_nchars,
        max_in_notenglish=max_notenglish,
        min_ratio_wordcount_over_notenglish=min_word_ratio,
    )
    extractor, _ = _extractor(stats_src)
    corpus = ing.read_corpus(src)
    kept = [rec for rec in corpus if lf.pass_langcut(extractor.extract(rec), cut)]
    ing.write_corpus(kept, dst)
    if report_path:
        labeled = [
            (extractor.extract(rec), rec.extra.get("label", "unlabeled"))
            for rec in corpus
        ]
        with open(report_path, "w", encoding="utf-8", newline="") as f:
            f.write("class,before,after\n")
            for cls_name, before, after in lf.yield_report(labeled, cut):
                f.write(f"{cls_name},{before},{after}\n")
    man.record_artifact("langfiltered", dst)
    man.complete_stage("langfilter", kept=len(kept), dropped=len(corpus) - len(kept))
    man.save()
    click.echo(f"langfilter: kept {len(kept)} of {len(corpus)}")


@main.command("train")
@click.argument("labeled_src", type=click.Path())
@click.argument("stats_src", type=click.Path())
@click.argument("model_dst", type=click.Path())
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--gamma", type=float, default=None)
@click.option("--cost", "c_value", type=float, default=1.0, show_default=True)
@click.option("--manifest", "manifest_path", type=click.Path())
@_guard
def train_cmd(labeled_src, stats_src, model_dst, seed, gamma, c_value,
              manifest_path):
    """Train the nine-feature SVM on agreement-labeled tweets."""
    man = _manifest(manifest_path)
    man.verify_input("stats", stats_src)
    man.verify_input("labeled", labeled_src)
    extractor, stats = _extractor(stats_src)
    pairs = [(rec, label) for rec, label in _read_labeled(labeled_src)
             if label in ("signal", "noise")]
    if not pairs:
        raise ing.CorpusError("no signal/noise labels to train on")
    vectors = [extractor.extract(rec) for rec, _ in pairs]
    labels = [label for _, label in pairs]
    split = TrainSplit.make(labels, seed=seed)
    model = train_svm(
        vectors, labels, split,
        hyper=KernelSpec(gamma=gamma, C=c_value),
        seed=seed, stats_checksum=stats.checksum(),
    )
    model.extra["split"] = {
        "train": list(split.train),
        "test": list(split.test),
        "validation": list(split.validation),
    }
    model.save(model_dst)
    man.record_artifact("model", model_dst)
    man.complete_stage("train", n_train=model.extra["n_train"], seed=seed)
    man.save()
    click.echo(
        f"train: {model.extra['n_train']} examples, "
        f"{len(model.dual_coef)} support vectors, gamma {model.gamma:.6g}"
    )


@main.command("score")
@click.argument("src", type=click.Path())
@click.argument("stats_src", type=click.Path())
@click.argument("model_src", type=click.Path())
@click.argument("dst", type=click.Path())
@click.option("--threshold", type=float, default=None,
              help="keep only tweets scoring at least this")
@click.option("--scores-csv", type=click.Path())
@click.option("--manifest", "manifest_path", type=click.Path())
@_guard
def score_cmd(src, stats_src, model_src, dst, threshold, scores_csv,
              manifest_path):
    """Score tweets with a trained model; optionally apply a threshold."""
    man = _manifest(manifest_path)
    man.verify_input("model", model_src)
    man.verify_input("stats", stats_src)
    extractor, stats = _extractor(stats_src)
    model = SvmModel.load(model_src)
    corpus = ing.read_corpus(src)
    vectors = [extractor.extract(rec) for rec in corpus]
    scores = score_many(model, vectors, stats_checksum=stats.checksum())
    if scores_csv:
        with open(scores_csv, "w", encoding="utf-8", newline="") as f:
            f.write("tweet_id,score\n")
            for rec, s in zip(corpus, scores):
                f.write(f"{rec.tweet_id},{s!r}\n")
    kept = [
        rec for rec, s in zip(corpus, scores)
        if threshold is None or s >= threshold
    ]
    ing.write_corpus(kept, dst)
    man.record_artifact("scored", dst)
    man.complete_stage("score", kept=len(kept), threshold=threshold)
    man.save()
    click.echo(f"score: kept {len(kept)} of {len(corpus)}")


@main.command("roc")
@click.argument("labeled_src", type=click.Path())
@click.argument("stats_src", type=click.Path())
@click.argument("model_src", type=click.Path())
@click.argument("dst", type=click.Path())
@click.option("--nthresholds", type=int, default=101, show_default=True)
@click.option("--target-eff", type=float, default=0.9, show_default=True,
              help="also report the threshold keeping this signal fraction")
@click.option("--manifest", "manifest_path", type=click.Path())
@_guard
def roc_cmd(labeled_src, stats_src, model_src, dst, nthresholds, target_eff,
            manifest_path):
    """Sweep signal efficiency vs noise rejection on a labeled sample."""
    man = _manifest(manifest_path)
    man.verify_input("model", model_src)
    extractor, stats = _extractor(stats_src)
    model = SvmModel.load(model_src)
    pairs = [(rec, label) for rec, label in _read_labeled(labeled_src)
             if label in ("signal", "noise")]
    vectors = [extractor.extract(rec) for rec, _ in pairs]
    scores = score_many(model, vectors, stats_checksum=stats.checksum())
    sig = [s for s, (_, l) in zip(scores, pairs) if l == "signal"]
    noi = [s for s, (_, l) in zip(scores, pairs) if l == "noise"]
    curve = roc_from_scores(sig, noi, nthresholds)
    with open(dst, "w", encoding="utf-8", newline="") as f:
        f.write("threshold,signal_efficiency,noise_rejection,eff_err,rej_err\n")
        for t, eff, rej, ee, re_ in curve.as_rows():
            f.write(f"{t!r},{eff!r},{rej!r},{ee!r},{re_!r}\n")
    thr = pick_threshold(sig, target_eff)
    man.record_artifact("roc", dst)
    man.complete_stage("roc", threshold=thr)
    man.save()
    click.echo(f"roc: {len(curve.points)} points; "
               f"{target_eff:.0%} signal-efficiency threshold {thr!r}")


@main.command("serve")
@click.argument("pool_src", type=click.Path())
@click.option("--log", "log_path", type=click.Path(), required=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--ui-dir", type=click.Path(), default=None,
              help="static assets for the rating interface")
@_guard
def serve_cmd(pool_src, log_path, host, port, ui_dir):
    """Run the annotation service over a tweet pool."""
    from .service import serve

    tweets = ing.read_corpus(pool_src)
    pool = AnnotationPool.replay(tweets, log_path)
    click.echo(f"serving {len(tweets)} tweets on {host}:{port}")
    serve(pool, host=host, port=port, ui_dir=ui_dir)


@main.command("export-labels")
@click.argument("pool_src", type=click.Path())
@click.option("--log", "log_path", type=click.Path(), required=True)
@click.argument("dst", type=click.Path())
@click.option("--manifest", "manifest_path", type=click.Path())
@_guard
def export_labels_cmd(pool_src, log_path, dst, manifest_path):
    """Replay the annotation log and export the agreed labeled corpus."""
    man = _manifest(manifest_path)
    tweets = ing.read_corpus(pool_src)
    pool = AnnotationPool.replay(tweets, log_path)
    with open(dst, "w", encoding="utf-8") as f:
        f.write(pool.export_jsonl())
    man.record_artifact("labeled", dst)
    man.complete_stage("export-labels", agreed=len(pool.export_labels()))
    man.save()
    click.echo(f"export-labels: {len(pool.export_labels())} agreed tweets")


@main.group("analyze")
def analyze_group():
    """Descriptive outputs over the labeled signal corpus."""


def _filters(exclude_retweets, require_side_effects, unique_users):
    return ana.MentionFilters(
        exclude_retweets=exclude_retweets,
        require_side_effects=require_side_effects,
        unique_users_only=unique_users,
    )


_filter_options = [
    click.option("--exclude-retweets", is_flag=True),
    click.option("--require-side-effects", is_flag=True),
    click.option("--unique-users", is_flag=True),
]


def _with_filters(fn):
    for opt in reversed(_filter_options):
        fn = opt(fn)
    return fn


@analyze_group.command("mentions")
@click.argument("src", type=click.Path())
@click.argument("dst", type=click.Path())
@_with_filters
@click.option("--drug-lexicon", "lexicon_path", type=click.Path())
@_guard
def mentions_cmd(src, dst, exclude_retweets, require_side_effects,
                 unique_users, lexicon_path):
    """Per-drug 60-day mention counts (top 7 + Other)."""
    lexicon = _load_lexicon(lexicon_path)
    corpus = ing.read_corpus(src)
    rows, totals = ana.drug_mention_series(
        corpus, lexicon,
        filters=_filters(exclude_retweets, require_side_effects, unique_users),
    )
    with open(dst, "w", encoding="utf-8", newline="") as f:
        f.write(ana.mentions_csv(rows))
    click.echo(f"mentions: {sum(totals.values())} total over {len(totals)} drugs")


def _load_lexicon(lexicon_path):
    if lexicon_path:
        with open(lexicon_path, encoding="utf-8") as f:
            return ana.DrugLexicon.from_mapping(json.load(f))
    return config.bundled_drug_lexicon()


@analyze_group.command("effects")
@click.argument("src", type=click.Path())
@click.argument("dst", type=click.Path())
@click.option("--min-users", type=int, default=3, show_default=True)
@click.option("--drug-lexicon", "lexicon_path", type=click.Path())
@_guard
def effects_cmd(src, dst, min_users, lexicon_path):
    """Per-user deduplicated drug/side-effect pairs."""
    lexicon = _load_lexicon(lexicon_path)
    table = ana.side_effect_pairs(ing.read_corpus(src), lexicon, min_users)
    with open(dst, "w", encoding="utf-8", newline="") as f:
        f.write(table.as_csv())
    click.echo(f"effects: {len(table.rows)} pairs at >= {min_users} users")


@analyze_group.command("sentiment")
@click.argument("src", type=click.Path())
@click.argument("dst", type=click.Path())
@_with_filters
@click.option("--drug", default=None, help="restrict to one drug's mentions")
@click.option("--drug-lexicon", "lexicon_path", type=click.Path())
@_guard
def sentiment_cmd(src, dst, exclude_retweets, require_side_effects,
                  unique_users, drug, lexicon_path):
    """Per-bin sentiment sums with sqrt(N) uncertainties."""
    lexicon = _load_lexicon(lexicon_path) if drug else None
    series = ana.sentiment_series(
        ing.read_corpus(src),
        filters=_filters(exclude_retweets, require_side_effects, unique_users),
        lexicon=lexicon, drug=drug,
    )
    with open(dst, "w", encoding="utf-8", newline="") as f:
        f.write(series.as_csv())
    click.echo(f"sentiment: {series.skipped} skipped without resolved sentiment")


@analyze_group.command("correlation")
@click.argument("src", type=click.Path())
@_with_filters
@click.option("--drug-lexicon", "lexicon_path", type=click.Path())
@_guard
def correlation_cmd(src, exclude_retweets, require_side_effects, unique_users,
                    lexicon_path):
    """Correlation between per-bin sentiment and drug mentions."""
    lexicon = _load_lexicon(lexicon_path)
    corpus = ing.read_corpus(src)
    filters = _filters(exclude_retweets, require_side_effects, unique_users)
    series = ana.sentiment_series(corpus, filters=filters)
    rows, _ = ana.drug_mention_series(corpus, lexicon, filters=filters)
    per_bin = {}
    for _, bin_start, count in rows:
        per_bin[bin_start] = per_bin.get(bin_start, 0) + count
    corr = ana.sentiment_drug_correlation(series, per_bin)
    if corr is None:
        click.echo("correlation: undefined (zero variance)")
    else:
        click.echo(f"correlation: {corr!r}")


if __name__ == "__main__":
    main()

"""cohort-miner: keyword-filtered tweet mining pipeline.

Stages: ingest and keyword-gate records, cleanse by rule, extract 37
linguistic features, cut non-English tweets, train/apply an SVM scorer,
collect two-rater annotations, and aggregate drug-mention and sentiment
analytics over 60-day bins.
"""

__version__ = "0.1.0"

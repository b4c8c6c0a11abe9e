"""Margin classifier over nine linguistic features with a [0, 1] score.

Features are standardized with training-split statistics, an RBF-kernel
SVM is solved by SMO, and decision values are squashed through a sigmoid
fitted on the training split so the output reads as a signal
probability. A model refuses to score vectors built from a different
stats bundle than it was trained on.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .svm import (
    TrainingError,
    fit_sigmoid,
    kkt_violation,
    median_sq_distance,
    rbf_kernel,
    sigmoid_transform,
    solve_smo,
)

CLASSIFIER_FEATURES = (
    "personalcount", "tagnoun", "sis_noise", "sis_signal", "bigrams_noise",
    "is_english", "common_noise", "common_signal", "ncharacters",
)

# train/test/validation proportions per class, from the reference sample
# sizes (noise 603/603/603, signal 49/30/30).
SPLIT_PROPORTIONS = {
    "noise": (603, 603, 603),
    "signal": (49, 30, 30),
}

SIGNAL, NOISE = "signal", "noise"


class ScoringError(ValueError):
    pass


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"
    gamma: float | None = None  # None: 1 / (9 * median pairwise sq distance)
    C: float = 1.0
    kkt_tol: float = 1e-3

    def __post_init__(self):
        if self.kind != "rbf":
            raise TrainingError(f"unsupported kernel: {self.kind}")


@dataclass(frozen=True)
class TrainSplit:
    """Disjoint per-class index sets into one labeled vector list."""

    train: tuple
    test: tuple
    validation: tuple

    def __post_init__(self):
        sets = [set(self.train), set(self.test), set(self.validation)]
        total = sum(len(s) for s in sets)
        if len(set().union(*sets)) != total:
            raise TrainingError("split index sets overlap")

    @classmethod
    def make(cls, labels, seed=0, proportions=None):
        """Split indices per class by the reference proportions."""
        proportions = proportions or SPLIT_PROPORTIONS
        rng = np.random.default_rng(seed)
        parts = {"train": [], "test": [], "validation": []}
        for cls_name in sorted(set(labels)):
            idx = np.array([i for i, l in enumerate(labels) if l == cls_name])
            rng.shuffle(idx)
            weights = proportions.get(cls_name, (1, 1, 1))
            total_w = sum(weights)
            n = len(idx)
            n_train = round(n * weights[0] / total_w)
            n_test = round(n * weights[1] / total_w)
            parts["train"].extend(idx[:n_train])
            parts["test"].extend(idx[n_train:n_train + n_test])
            parts["validation"].extend(idx[n_train + n_test:])
        return cls(
            train=tuple(sorted(int(i) for i in parts["train"])),
            test=tuple(sorted(int(i) for i in parts["test"])),
            validation=tuple(sorted(int(i) for i in parts["validation"])),
        )


@dataclass
class SvmModel:
    feature_names: tuple
    means: np.ndarray
    sds: np.ndarray
    gamma: float
    C: float
    kkt_tol: float
    support_vectors: np.ndarray  # standardized coordinates
    dual_coef: np.ndarray  # alpha_i * y_i
    bias: float
    platt_a: float
    platt_b: float
    seed: int
    stats_checksum: str | None = None
    extra: dict = field(default_factory=dict)

    def _standardize(self, X):
        return (np.asarray(X, dtype=float) - self.means) / self.sds

    def decision_values(self, X):
        Xs = self._standardize(X)
        K = rbf_kernel(Xs, self.support_vectors, self.gamma)
        return K @ self.dual_coef + self.bias

    def score_matrix(self, X):
        return sigmoid_transform(self.decision_values(X), self.platt_a, self.platt_b)

    def to_json(self):
        payload = {
            "format": "cohort-miner-svm",
            "version": 1,
            "feature_names": list(self.feature_names),
            "means": self.means.tolist(),
            "sds": self.sds.tolist(),
            "gamma": self.gamma,
            "C": self.C,
            "kkt_tol": self.kkt_tol,
            "support_vectors": self.support_vectors.tolist(),
            "dual_coef": self.dual_coef.tolist(),
            "bias": self.bias,
            "platt_a": self.platt_a,
            "platt_b": self.platt_b,
            "seed": self.seed,
            "stats_checksum": self.stats_checksum,
            "extra": self.extra,
        }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        p = json.loads(text)
        if p.get("format") != "cohort-miner-svm" or p.get("version") != 1:
            raise ScoringError("not a recognized model file")
        return cls(
            feature_names=tuple(p["feature_names"]),
            means=np.array(p["means"], dtype=float),
            sds=np.array(p["sds"], dtype=float),
            gamma=p["gamma"],
            C=p["C"],
            kkt_tol=p["kkt_tol"],
            support_vectors=np.array(p["support_vectors"], dtype=float),
            dual_coef=np.array(p["dual_coef"], dtype=float),
            bias=p["bias"],
            platt_a=p["platt_a"],
            platt_b=p["platt_b"],
            seed=p["seed"],
            stats_checksum=p.get("stats_checksum"),
            extra=p.get("extra", {}),
        )

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json())
            f.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as f:
            return cls.from_json(f.read())


def _vector_matrix(vectors, feature_names=CLASSIFIER_FEATURES):
    rows = []
    for i, vec in enumerate(vectors):
        if hasattr(vec, "get"):
            row = [vec.get(name) for name in feature_names]
        else:
            row = list(vec)
        for name, value in zip(feature_names, row):
            if not math.isfinite(value):
                raise TrainingError(
                    f"non-finite feature {name!r} in record index {i}"
                )
        rows.append(row)
    return np.asarray(rows, dtype=float)


def _to_pm1(labels):
    y = np.empty(len(labels))
    for i, l in enumerate(labels):
        if l in (SIGNAL, 1, 1.0, True, "+1"):
            y[i] = 1.0
        elif l in (NOISE, -1, -1.0, 0, False, "-1"):
            y[i] = -1.0
        else:
            raise TrainingError(f"unknown class label: {l!r}")
    return y


def train_svm(vectors, labels, split=None, hyper=KernelSpec(), seed=0,
              stats_checksum=None):
    """Train on the split's train indices; returns a calibrated SvmModel."""
    X_all = _vector_matrix(vectors)
    y_all = _to_pm1(labels)
    if split is None:
        split = TrainSplit(
            train=tuple(range(len(labels))), test=(), validation=()
        )
    idx = np.asarray(split.train, dtype=int)
    X, y = X_all[idx], y_all[idx]
    if len(np.unique(y)) < 2:
        raise TrainingError("training split does not contain both classes")
    if min((y == 1).sum(), (y == -1).sum()) < 2:
        raise TrainingError("need at least 2 examples per class to train")

    means = X.mean(axis=0)
    sds = X.std(axis=0, ddof=0)
    sds = np.where(sds > 0, sds, 1.0)  # constant feature carries no scale
    Xs = (X - means) / sds

    gamma = hyper.gamma
    if gamma is None:
        gamma = 1.0 / (len(CLASSIFIER_FEATURES) * median_sq_distance(Xs))

    K = rbf_kernel(Xs, Xs, gamma)
    sol = solve_smo(K, y, C=hyper.C, tol=hyper.kkt_tol, seed=seed)

    keep = sol.alpha > 1e-12
    dual_coef = (sol.alpha * y)[keep]
    svs = Xs[keep]

    decisions = K[:, keep] @ dual_coef + sol.bias
    a, b = fit_sigmoid(decisions, y > 0)

    return SvmModel(
        feature_names=CLASSIFIER_FEATURES,
        means=means,
        sds=sds,
        gamma=gamma,
        C=hyper.C,
        kkt_tol=hyper.kkt_tol,
        support_vectors=svs,
        dual_coef=dual_coef,
        bias=sol.bias,
        platt_a=a,
        platt_b=b,
        seed=seed,
        stats_checksum=stats_checksum,
        extra={"n_train": int(len(y)), "smo_steps": sol.steps},
    )


def grid_search(vectors, labels, split, gammas=(0.01, 0.05, 0.1, 0.5, 1.0),
                costs=(0.5, 1.0, 5.0), target_eff=0.9, seed=0):
    """Pick (gamma, C) maximizing noise rejection at the target signal
    efficiency on the validation split. Ties break toward the first grid
    entry, so the search is deterministic. Returns (KernelSpec, report).
    """
    val_idx = list(split.validation)
    if not val_idx:
        raise TrainingError("grid search needs a validation split")
    val_v = [vectors[i] for i in val_idx]
    val_l = [labels[i] for i in val_idx]
    best = None
    report = []
    for gamma in gammas:
        for c in costs:
            hyper = KernelSpec(gamma=gamma, C=c)
            model = train_svm(vectors, labels, split, hyper=hyper, seed=seed)
            curve = roc(model, val_v, val_l)
            rejection = curve.best_rejection_at(target_eff)
            report.append({"gamma": gamma, "C": c, "rejection": rejection})
            if best is None or rejection > best[0]:
                best = (rejection, hyper)
    return best[1], report


def score(model, vector, stats_checksum=None):
    """Score one feature vector in [0, 1]; higher means more signal-like."""
    if stats_checksum is not None and model.stats_checksum is not None:
        if stats_checksum != model.stats_checksum:
            raise ScoringError(
                "feature-stats checksum does not match the model's"
            )
    if hasattr(vector, "get"):
        row = [vector.get(name) for name in model.feature_names]
    else:
        row = list(vector)
        if len(row) != len(model.feature_names):
            raise ScoringError(
                f"expected {len(model.feature_names)} features, got {len(row)}"
            )
    for name, value in zip(model.feature_names, row):
        if value is None or not math.isfinite(value):
            raise ScoringError(f"missing or non-finite feature: {name}")
    return float(model.score_matrix(np.asarray([row]))[0])


def score_many(model, vectors, stats_checksum=None):
    if stats_checksum is not None and model.stats_checksum is not None:
        if stats_checksum != model.stats_checksum:
            raise ScoringError(
                "feature-stats checksum does not match the model's"
            )
    X = _vector_matrix(vectors, model.feature_names)
    return model.score_matrix(X)


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    signal_efficiency: float
    noise_rejection: float
    efficiency_err: float
    rejection_err: float


@dataclass(frozen=True)
class RocCurve:
    points: tuple

    def as_rows(self):
        return [
            (
                p.threshold,
                p.signal_efficiency,
                p.noise_rejection,
                p.efficiency_err,
                p.rejection_err,
            )
            for p in self.points
        ]

    def best_rejection_at(self, min_efficiency):
        """Largest noise rejection among points with efficiency >= target."""
        eligible = [
            p.noise_rejection
            for p in self.points
            if p.signal_efficiency >= min_efficiency
        ]
        return max(eligible) if eligible else 0.0


def _binomial_err(p, n):
    return math.sqrt(p * (1.0 - p) / n) if n > 0 else 0.0


def roc_from_scores(signal_scores, noise_scores, nthresholds=101):
    """ROC swept over the pooled score range; keep rule is score >= t.

    Endpoints (eff 1, rej 0) and (eff 0, rej 1) are always included.
    """
    sig = np.asarray(signal_scores, dtype=float)
    noi = np.asarray(noise_scores, dtype=float)
    if sig.size == 0 or noi.size == 0:
        raise ScoringError("roc needs a non-empty test set per class")
    lo = min(sig.min(), noi.min())
    hi = max(sig.max(), noi.max())
    thresholds = np.linspace(lo, hi, nthresholds) if hi > lo else np.array([lo])
    points = []
    eps = 1e-9 * max(1.0, abs(hi))
    sweep = np.concatenate([[lo - eps], thresholds, [hi + eps]])
    for t in sweep:
        eff = float((sig >= t).mean())
        rej = float((noi < t).mean())
        points.append(
            RocPoint(
                threshold=float(t),
                signal_efficiency=eff,
                noise_rejection=rej,
                efficiency_err=_binomial_err(eff, sig.size),
                rejection_err=_binomial_err(rej, noi.size),
            )
        )
    return RocCurve(points=tuple(points))


def roc(model, vectors, labels, nthresholds=101):
    y = _to_pm1(labels)
    scores = score_many(model, vectors)
    return roc_from_scores(scores[y > 0], scores[y < 0], nthresholds)


def pick_threshold(signal_scores, target_signal_eff=0.9):
    """Score threshold keeping at least the target fraction of signal.

    The threshold is the empirical (1 - target) quantile: the k-th
    smallest score with k = ceil((1 - target) * n), clamped to the lowest
    score. Keeping score >= threshold then retains at least
    target - 1/n of the sample.
    """
    if not 0.0 < target_signal_eff <= 1.0:
        raise ScoringError("target efficiency must be in (0, 1]")
    scores = np.sort(np.asarray(list(signal_scores), dtype=float))
    if scores.size == 0:
        raise ScoringError("no annotated signal scores")
    k = max(1, math.ceil((1.0 - target_signal_eff) * scores.size))
    return float(scores[k - 1])


def model_threshold(model, annotated_signal_vectors, target_signal_eff=0.9):
    """pick_threshold over a model's scores of an annotated signal set."""
    return pick_threshold(
        score_many(model, annotated_signal_vectors), target_signal_eff
    )


def apply_threshold(scores, threshold):
    """Keep mask for score >= threshold."""
    return np.asarray(scores, dtype=float) >= threshold


@dataclass(frozen=True)
class ComparisonPoint:
    threshold: float
    eff_a: float
    eff_b: float
    eff_sigma: float
    rej_a: float
    rej_b: float
    rej_sigma: float
    flagged: bool


@dataclass(frozen=True)
class ComparisonReport:
    points: tuple
    n_flagged: int

    @property
    def compatible(self):
        return self.n_flagged == 0


def compare_testing_samples(model, vectors_a, labels_a, vectors_b, labels_b,
                            nthresholds=41, max_sigma=3.0):
    """Per-threshold efficiency agreement of two test samples.

    Differences are expressed in units of the combined binomial sigma;
    points beyond max_sigma (for either efficiency or rejection) are
    flagged.
    """
    ya, yb = _to_pm1(labels_a), _to_pm1(labels_b)
    sa = score_many(model, vectors_a)
    sb = score_many(model, vectors_b)
    sig_a, noi_a = sa[ya > 0], sa[ya < 0]
    sig_b, noi_b = sb[yb > 0], sb[yb < 0]
    for part, name in ((sig_a, "A signal"), (noi_a, "A noise"),
                       (sig_b, "B signal"), (noi_b, "B noise")):
        if part.size == 0:
            raise ScoringError(f"empty class in comparison: {name}")

    thresholds = np.linspace(0.0, 1.0, nthresholds)
    points = []
    n_flagged = 0
    for t in thresholds:
        eff_a = float((sig_a >= t).mean())
        eff_b = float((sig_b >= t).mean())
        rej_a = float((noi_a < t).mean())
        rej_b = float((noi_b < t).mean())
        eff_sigma = math.hypot(
            _binomial_err(eff_a, sig_a.size), _binomial_err(eff_b, sig_b.size)
        )
        rej_sigma = math.hypot(
            _binomial_err(rej_a, noi_a.size), _binomial_err(rej_b, noi_b.size)
        )

        def beyond(diff, sigma):
            if sigma == 0.0:
                return diff != 0.0
            return abs(diff) > max_sigma * sigma

        flagged = beyond(eff_a - eff_b, eff_sigma) or beyond(rej_a - rej_b, rej_sigma)
        n_flagged += flagged
        points.append(
            ComparisonPoint(
                threshold=float(t),
                eff_a=eff_a, eff_b=eff_b, eff_sigma=eff_sigma,
                rej_a=rej_a, rej_b=rej_b, rej_sigma=rej_sigma,
                flagged=flagged,
            )
        )
    return ComparisonReport(points=tuple(points), n_flagged=n_flagged)

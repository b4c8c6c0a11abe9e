"""Soft-margin kernel SVM trained by sequential minimal optimization.

The dual problem is solved by repeatedly optimizing one pair of
multipliers in closed form (Platt's SMO) until no example violates the
KKT conditions beyond tolerance. Training is deterministic: examples are
visited in a fixed order derived from a seeded shuffle, and the
second-choice heuristic breaks ties by index.
"""

from dataclasses import dataclass

import numpy as np


class TrainingError(RuntimeError):
    pass


def rbf_kernel(a, b, gamma):
    """exp(-gamma * ||a_i - b_j||^2) for row vectors."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    sq = (
        np.sum(a * a, axis=1)[:, None]
        + np.sum(b * b, axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


def median_sq_distance(x):
    """Median pairwise squared distance, ignoring coincident points."""
    x = np.asarray(x, dtype=float)
    sq = (
        np.sum(x * x, axis=1)[:, None]
        + np.sum(x * x, axis=1)[None, :]
        - 2.0 * (x @ x.T)
    )
    iu = np.triu_indices(len(x), k=1)
    vals = np.maximum(sq[iu], 0.0)
    vals = vals[vals > 0]
    if vals.size == 0:
        return 1.0
    return float(np.median(vals))


@dataclass
class SmoSolution:
    alpha: np.ndarray
    bias: float
    steps: int
    kkt_tol: float


class _Smo:
    def __init__(self, K, y, C, tol):
        self.K = K
        self.y = y.astype(float)
        self.C = float(C)
        self.tol = float(tol)
        self.n = len(y)
        self.alpha = np.zeros(self.n)
        self.b = 0.0
        # error cache: E_i = f(x_i) - y_i with f == 0 initially
        self.E = -self.y.copy()
        self.steps = 0
        self.eps = 1e-12

    def _take_step(self, i, j):
        if i == j:
            return False
        ai, aj = self.alpha[i], self.alpha[j]
        yi, yj = self.y[i], self.y[j]
        Ei, Ej = self.E[i], self.E[j]
        if yi == yj:
            L = max(0.0, ai + aj - self.C)
            H = min(self.C, ai + aj)
        else:
            L = max(0.0, aj - ai)
            H = min(self.C, self.C + aj - ai)
        if H - L < self.eps:
            return False
        kii, kjj, kij = self.K[i, i], self.K[j, j], self.K[i, j]
        eta = kii + kjj - 2.0 * kij
        if eta > 0:
            aj_new = aj + yj * (Ei - Ej) / eta
            aj_new = min(H, max(L, aj_new))
        else:
            # degenerate curvature: evaluate the objective at both ends
            f1 = yi * (Ei + self.b) - ai * kii - yi * yj * aj * kij
            f2 = yj * (Ej + self.b) - aj * kjj - yi * yj * ai * kij
            L1 = ai + yi * yj * (aj - L)
            H1 = ai + yi * yj * (aj - H)
            obj_l = (L1 * f1 + L * f2 + 0.5 * L1 * L1 * kii
                     + 0.5 * L * L * kjj + yi * yj * L * L1 * kij)
            obj_h = (H1 * f1 + H * f2 + 0.5 * H1 * H1 * kii
                     + 0.5 * H * H * kjj + yi * yj * H * H1 * kij)
            if obj_l < obj_h - self.eps:
                aj_new = L
            elif obj_l > obj_h + self.eps:
                aj_new = H
            else:
                return False
        if abs(aj_new - aj) < self.eps * (aj_new + aj + self.eps):
            return False
        ai_new = ai + yi * yj * (aj - aj_new)

        b1 = (self.b - Ei - yi * (ai_new - ai) * kii
              - yj * (aj_new - aj) * kij)
        b2 = (self.b - Ej - yi * (ai_new - ai) * kij
              - yj * (aj_new - aj) * kjj)
        if 0.0 < ai_new < self.C:
            b_new = b1
        elif 0.0 < aj_new < self.C:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)

        self.E += (
            yi * (ai_new - ai) * self.K[i]
            + yj * (aj_new - aj) * self.K[j]
            + (b_new - self.b)
        )
        self.alpha[i] = ai_new
        self.alpha[j] = aj_new
        self.b = b_new
        self.steps += 1
        return True

    def _examine(self, i):
        r = self.E[i] * self.y[i]
        if not (
            (r < -self.tol and self.alpha[i] < self.C)
            or (r > self.tol and self.alpha[i] > 0)
        ):
            return False
        non_bound = np.flatnonzero((self.alpha > 0) & (self.alpha < self.C))
        if non_bound.size > 1:
            j = int(non_bound[np.argmax(np.abs(self.E[i] - self.E[non_bound]))])
            if self._take_step(i, j):
                return True
        for j in non_bound:
            if self._take_step(i, int(j)):
                return True
        for j in range(self.n):
            j2 = (i + 1 + j) % self.n
            if self._take_step(i, j2):
                return True
        return False

    def solve(self, order, max_steps):
        examine_all = True
        num_changed = 1
        while num_changed > 0 or examine_all:
            num_changed = 0
            if examine_all:
                candidates = order
            else:
                mask = (self.alpha > 0) & (self.alpha < self.C)
                candidates = [i for i in order if mask[i]]
            for i in candidates:
                if self._examine(int(i)):
                    num_changed += 1
                if self.steps > max_steps:
                    raise TrainingError(
                        f"SMO did not converge within {max_steps} steps"
                    )
            if examine_all:
                examine_all = False
            elif num_changed == 0:
                examine_all = True
        return SmoSolution(
            alpha=self.alpha, bias=self.b, steps=self.steps, kkt_tol=self.tol
        )


def solve_smo(K, y, C=1.0, tol=1e-3, seed=0, max_steps=None):
    """Solve the dual on a precomputed kernel matrix.

    y must be +/-1. The visiting order is a shuffle seeded by `seed` so a
    rerun with the same seed reproduces the same solution bit for bit.
    """
    K = np.asarray(K, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    if K.shape != (n, n):
        raise TrainingError("kernel matrix shape does not match labels")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise TrainingError("labels must be +1/-1")
    if np.all(y == y[0]):
        raise TrainingError("training set has a single class")
    if max_steps is None:
        max_steps = max(200_000, 500 * n)
    order = np.arange(n)
    np.random.default_rng(seed).shuffle(order)
    return _Smo(K, y, C, tol).solve([int(i) for i in order], max_steps)


def kkt_violation(K, y, alpha, bias, C, atol=1e-9):
    """Worst KKT residual of a dual solution (0 means exactly optimal).

    For alpha=0 points the residual is max(0, 1 - y f); at the box it is
    max(0, y f - 1); for free vectors it is |y f - 1|.
    """
    f = (alpha * y) @ K + bias
    margin = y * f
    res = np.zeros(len(y))
    at_zero = alpha <= atol
    at_c = alpha >= C - atol
    free = ~(at_zero | at_c)
    res[at_zero] = np.maximum(0.0, 1.0 - margin[at_zero])
    res[at_c] = np.maximum(0.0, margin[at_c] - 1.0)
    res[free] = np.abs(margin[free] - 1.0)
    return float(res.max()) if len(res) else 0.0


def fit_sigmoid(decision_values, is_positive, max_iter=200, min_step=1e-10,
                sigma=1e-12):
    """Fit p = 1/(1 + exp(a*f + b)) to decision values by Newton descent.

    Regularized target probabilities avoid the overfitting of hard 0/1
    targets. Returns (a, b).
    """
    f = np.asarray(decision_values, dtype=float)
    pos = np.asarray(is_positive, dtype=bool)
    prior1 = float(pos.sum())
    prior0 = float(len(pos) - prior1)
    if prior1 == 0 or prior0 == 0:
        raise TrainingError("sigmoid fit needs both classes")
    hi = (prior1 + 1.0) / (prior1 + 2.0)
    lo = 1.0 / (prior0 + 2.0)
    t = np.where(pos, hi, lo)

    def objective(a, b):
        z = a * f + b
        # stable log(1 + exp(z)) pieces
        pos_z = z > 0
        obj = np.empty_like(z)
        obj[pos_z] = t[pos_z] * z[pos_z] + np.log1p(np.exp(-z[pos_z]))
        obj[~pos_z] = (t[~pos_z] - 1.0) * z[~pos_z] + np.log1p(np.exp(z[~pos_z]))
        return float(obj.sum())

    a, b = 0.0, np.log((prior0 + 1.0) / (prior1 + 1.0))
    fval = objective(a, b)
    for _ in range(max_iter):
        z = a * f + b
        p = np.where(z >= 0, np.exp(-z) / (1 + np.exp(-z)), 1 / (1 + np.exp(z)))
        d1 = t - p
        d2 = p * (1 - p)
        # gradient and Hessian of the negative log likelihood
        g1 = float(np.sum(f * d1))
        g2 = float(np.sum(d1))
        if abs(g1) < 1e-5 and abs(g2) < 1e-5:
            break
        h11 = float(np.sum(f * f * d2)) + sigma
        h22 = float(np.sum(d2)) + sigma
        h21 = float(np.sum(f * d2))
        det = h11 * h22 - h21 * h21
        da = -(h22 * g1 - h21 * g2) / det
        db = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * da + g2 * db
        step = 1.0
        while step >= min_step:
            a_new, b_new = a + step * da, b + step * db
            f_new = objective(a_new, b_new)
            if f_new < fval + 1e-4 * step * gd:
                a, b, fval = a_new, b_new, f_new
                break
            step /= 2.0
        else:
            break
    return a, b


def sigmoid_transform(decision_values, a, b):
    z = np.atleast_1d(a * np.asarray(decision_values, dtype=float) + b)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = np.exp(-z[pos]) / (1.0 + np.exp(-z[pos]))
    out[~pos] = 1.0 / (1.0 + np.exp(z[~pos]))
    return out if np.ndim(decision_values) else out[0]

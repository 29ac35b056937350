"""Generate the bundled surrogate benchmark files.

The real UCI files (statlog heart, BUPA liver disorders, Pima diabetes)
cannot be redistributed from this environment, so the repo ships surrogate
datasets with identical shapes, label encodings, and file formats.  Each
feature is sampled from a class-conditional distribution whose location,
spread, and discreteness follow the published UCI attribute documentation.
A single separation knob per dataset is calibrated by bisection until a
batch logistic-regression baseline (5-fold CV on standardized features)
matches the accuracy commonly reported for the real dataset.  That keeps
the surrogates honest: same dimensionality, same value ranges, same class
priors, and comparable linear separability -- without fitting anything to
downstream results.

Run from the repo root:

    python tools/generate_surrogate_data.py

Outputs land in src/dynscale/data/ and are committed to the repo.
sklearn is used only here, for the calibration baseline; it is not a
package dependency.
"""

from __future__ import annotations

import pathlib

import numpy as np
from sklearn.linear_model import LogisticRegression
from sklearn.model_selection import cross_val_score
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

OUT_DIR = pathlib.Path(__file__).resolve().parent.parent / "src" / "dynscale" / "data"


def _blend(pooled, conditional, gamma):
    """Move a class-conditional parameter toward/away from the pooled one."""
    pooled = np.asarray(pooled, dtype=float)
    conditional = np.asarray(conditional, dtype=float)
    return pooled + gamma * (conditional - pooled)


class Normal:
    def __init__(self, pooled_mean, sd, class_means, lo=None, hi=None, decimals=0):
        self.pooled_mean = pooled_mean
        self.sd = sd
        self.class_means = class_means  # {class: mean}
        self.lo, self.hi = lo, hi
        self.decimals = decimals

    def sample(self, rng, labels, gamma):
        means = np.array([_blend(self.pooled_mean, self.class_means[c], gamma) for c in labels])
        x = rng.normal(means, self.sd)
        if self.lo is not None:
            x = np.clip(x, self.lo, self.hi)
        return np.round(x, self.decimals)


class LogNormal:
    """Positive, right-skewed feature parameterized by target mean and sd."""

    def __init__(self, pooled_mean, sd, class_means, lo=None, hi=None, decimals=0):
        self.pooled_mean = pooled_mean
        self.sd = sd
        self.class_means = class_means
        self.lo, self.hi = lo, hi
        self.decimals = decimals

    def sample(self, rng, labels, gamma):
        means = np.array([_blend(self.pooled_mean, self.class_means[c], gamma) for c in labels])
        # moment-match a lognormal to (mean, sd)
        var = self.sd**2
        sigma2 = np.log1p(var / means**2)
        mu = np.log(means) - sigma2 / 2.0
        x = rng.lognormal(mu, np.sqrt(sigma2))
        if self.lo is not None:
            x = np.clip(x, self.lo, self.hi)
        return np.round(x, self.decimals)


class Categorical:
    def __init__(self, values, pooled_probs, class_probs):
        self.values = np.asarray(values, dtype=float)
        self.pooled_probs = pooled_probs
        self.class_probs = class_probs  # {class: probs}

    def sample(self, rng, labels, gamma):
        out = np.empty(len(labels))
        for i, c in enumerate(labels):
            p = _blend(self.pooled_probs, self.class_probs[c], gamma)
            p = np.clip(p, 1e-6, None)
            p = p / p.sum()
            out[i] = rng.choice(self.values, p=p)
        return out


class Bernoulli(Categorical):
    def __init__(self, pooled_p, class_p):
        super().__init__(
            [0.0, 1.0],
            [1 - pooled_p, pooled_p],
            {c: [1 - p, p] for c, p in class_p.items()},
        )


class ZeroInflated:
    """Wraps another distribution, replacing a class-dependent share with 0."""

    def __init__(self, inner, zero_prob):
        self.inner = inner
        self.zero_prob = zero_prob  # {class: prob}

    def sample(self, rng, labels, gamma):
        x = self.inner.sample(rng, labels, gamma)
        zp = np.array([self.zero_prob[c] for c in labels])
        x[rng.random(len(labels)) < zp] = 0.0
        return x


def make_labels(rng, counts):
    labels = np.concatenate([np.full(n, c) for c, n in counts.items()])
    rng.shuffle(labels)
    return labels


def build_matrix(rng, labels, features, gamma):
    cols = [f.sample(rng, labels, gamma) for f in features]
    return np.column_stack(cols)


def calibrate(seed, counts, features, positive, target_acc, lo=0.1, hi=2.5, iters=14):
    """Bisect the separation knob until batch logistic CV hits target_acc."""

    def cv_accuracy(gamma):
        rng = np.random.default_rng(seed)
        labels = make_labels(rng, counts)
        X = build_matrix(rng, labels, features, gamma)
        y = (labels == positive).astype(int)
        model = make_pipeline(StandardScaler(), LogisticRegression(max_iter=2000))
        return cross_val_score(model, X, y, cv=5, scoring="accuracy").mean()

    if cv_accuracy(lo) > target_acc:
        return lo
    if cv_accuracy(hi) < target_acc:
        return hi
    for _ in range(iters):
        mid = (lo + hi) / 2.0
        if cv_accuracy(mid) < target_acc:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


# ----------------------------------------------------------------------
# statlog-heart-like: 270 rows, 13 attributes, labels 1 (neg) / 2 (pos).
# Attribute stats follow the UCI statlog/Cleveland documentation.
# ----------------------------------------------------------------------

HEART_FEATURES = [
    Normal(54.4, 9.1, {1: 52.6, 2: 56.6}, lo=29, hi=77),
    Bernoulli(0.68, {1: 0.56, 2: 0.83}),
    Categorical([1, 2, 3, 4], [0.07, 0.19, 0.28, 0.46],
                {1: [0.09, 0.28, 0.38, 0.25], 2: [0.05, 0.07, 0.14, 0.74]}),
    Normal(131.3, 17.9, {1: 129.0, 2: 134.4}, lo=94, hi=200),
    Normal(249.7, 51.7, {1: 244.2, 2: 256.5}, lo=126, hi=564),
    Bernoulli(0.15, {1: 0.14, 2: 0.16}),
    Categorical([0, 1, 2], [0.52, 0.02, 0.46],
                {1: [0.58, 0.02, 0.40], 2: [0.44, 0.02, 0.54]}),
    Normal(149.7, 23.2, {1: 158.4, 2: 139.0}, lo=71, hi=202),
    Bernoulli(0.33, {1: 0.14, 2: 0.55}),
    Normal(1.05, 1.15, {1: 0.60, 2: 1.60}, lo=0.0, hi=6.2, decimals=1),
    Categorical([1, 2, 3], [0.46, 0.46, 0.08],
                {1: [0.60, 0.33, 0.07], 2: [0.27, 0.62, 0.11]}),
    Categorical([0, 1, 2, 3], [0.57, 0.21, 0.14, 0.08],
                {1: [0.73, 0.17, 0.07, 0.03], 2: [0.37, 0.26, 0.22, 0.15]}),
    Categorical([3, 6, 7], [0.59, 0.07, 0.34],
                {1: [0.79, 0.04, 0.17], 2: [0.33, 0.10, 0.57]}),
]


def write_heart(gamma, seed=20240711):
    rng = np.random.default_rng(seed)
    labels = make_labels(rng, {1: 150, 2: 120})
    X = build_matrix(rng, labels, HEART_FEATURES, gamma)
    lines = []
    for row, lab in zip(X, labels):
        feats = " ".join(f"{v:.1f}" for v in row)
        lines.append(f"{feats} {int(lab)}")
    (OUT_DIR / "heart.dat").write_text("\n".join(lines) + "\n")
    return X, labels


# ----------------------------------------------------------------------
# BUPA-liver-like: 345 rows, 6 blood-test attributes, selector 1/2.
# The real selector is only weakly predictable (~0.70 linear accuracy).
# ----------------------------------------------------------------------

LIVER_FEATURES = [
    Normal(90.2, 4.5, {1: 90.0, 2: 90.3}, lo=65, hi=103),
    Normal(69.9, 18.3, {1: 68.8, 2: 70.7}, lo=23, hi=138),
    LogNormal(30.4, 19.5, {1: 27.5, 2: 32.5}, lo=4, hi=155),
    LogNormal(24.6, 10.1, {1: 23.5, 2: 25.4}, lo=5, hi=82),
    LogNormal(38.3, 39.3, {1: 31.0, 2: 43.5}, lo=5, hi=297),
    LogNormal(3.46, 3.34, {1: 2.9, 2: 3.9}, lo=0.5, hi=20, decimals=1),
]


def write_liver(gamma, seed=20240712):
    rng = np.random.default_rng(seed)
    labels = make_labels(rng, {1: 145, 2: 200})
    X = build_matrix(rng, labels, LIVER_FEATURES, gamma)
    lines = []
    for row, lab in zip(X, labels):
        feats = ",".join(f"{int(v)}" for v in row[:5])
        lines.append(f"{feats},{row[5]:.1f},{int(lab)}")
    (OUT_DIR / "bupa.data").write_text("\n".join(lines) + "\n")
    return X, labels


# ----------------------------------------------------------------------
# Pima-diabetes-like: 768 rows, 8 attributes, labels 0/1 (500/268).
# Zero-inflation mimics the well-known missing-as-zero columns.
# ----------------------------------------------------------------------

DIABETES_FEATURES = [
    LogNormal(3.85, 3.37, {0: 3.30, 1: 4.87}, lo=0, hi=17),
    ZeroInflated(Normal(120.9, 30.5, {0: 110.6, 1: 142.3}, lo=44, hi=199),
                 {0: 0.007, 1: 0.006}),
    ZeroInflated(Normal(72.4, 12.4, {0: 70.9, 1: 75.3}, lo=24, hi=122),
                 {0: 0.045, 1: 0.045}),
    ZeroInflated(Normal(29.2, 10.5, {0: 27.2, 1: 33.0}, lo=7, hi=99),
                 {0: 0.278, 1: 0.328}),
    ZeroInflated(LogNormal(155.5, 118.8, {0: 130.3, 1: 206.8}, lo=14, hi=846),
                 {0: 0.473, 1: 0.515}),
    ZeroInflated(Normal(32.5, 6.9, {0: 30.9, 1: 35.4}, lo=18.2, hi=67.1, decimals=1),
                 {0: 0.015, 1: 0.012}),
    LogNormal(0.472, 0.331, {0: 0.430, 1: 0.550}, lo=0.078, hi=2.42, decimals=3),
    LogNormal(33.2, 11.8, {0: 31.2, 1: 37.1}, lo=21, hi=81),
]


def write_diabetes(gamma, seed=20240713):
    rng = np.random.default_rng(seed)
    labels = make_labels(rng, {0: 500, 1: 268})
    X = build_matrix(rng, labels, DIABETES_FEATURES, gamma)
    lines = []
    for row, lab in zip(X, labels):
        vals = [f"{int(row[0])}", f"{int(row[1])}", f"{int(row[2])}", f"{int(row[3])}",
                f"{int(row[4])}", f"{row[5]:.1f}", f"{row[6]:.3f}", f"{int(row[7])}"]
        lines.append(",".join(vals) + f",{int(lab)}")
    (OUT_DIR / "pima-indians-diabetes.data").write_text("\n".join(lines) + "\n")
    return X, labels


def report(name, X, labels, positive, gamma):
    y = (labels == positive).astype(int)
    model = make_pipeline(StandardScaler(), LogisticRegression(max_iter=2000))
    acc = cross_val_score(model, X, y, cv=5, scoring="accuracy").mean()
    print(f"{name}: shape={X.shape} positives={y.sum()} gamma={gamma:.4f} "
          f"batch-logistic 5-fold CV accuracy={acc:.4f}")


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)

    g = calibrate(20240711, {1: 150, 2: 120}, HEART_FEATURES, 2, target_acc=0.84)
    X, labels = write_heart(g)
    report("heart", X, labels, 2, g)

    g = calibrate(20240712, {1: 145, 2: 200}, LIVER_FEATURES, 2, target_acc=0.70)
    X, labels = write_liver(g)
    report("liver", X, labels, 2, g)

    g = calibrate(20240713, {0: 500, 1: 268}, DIABETES_FEATURES, 1, target_acc=0.77)
    X, labels = write_diabetes(g)
    report("diabetes", X, labels, 1, g)


if __name__ == "__main__":
    main()

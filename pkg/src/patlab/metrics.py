"""Model-agnostic heatmap evaluation.

Heatmaps arrive from files (or any array source); nothing here computes
attributions. The pieces: normalization and absolute-value post-processing,
Spearman rank correlation with average-rank ties, the cascading
randomization harness (per-stage mean correlation against a fixed
reference, raw and absolute variants), most-relevant-first pixel
orderings, the perturbation-curve area (AOPC), pixel hit/miss error
percentages for label lattices, and a nearest-centroid scorer so the
perturbation metrics run end to end without any learned model.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CountMismatch, DimensionMismatch, LabelOutOfRange, LTooLarge, MissingClass

ZERO_FALLBACK_SCALE = 1e-6  # all-zero heatmaps are refilled at this amplitude


@dataclass(frozen=True)
class Heatmap:
    """A real-valued attribution lattice plus its processing state."""

    values: np.ndarray = field(repr=False)
    normalized: bool = False
    abs_applied: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise DimensionMismatch("heatmaps must be 2-D lattices")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def shape(self):
        return self.values.shape


def normalize_heatmap(h: Heatmap, rng) -> Heatmap:
    """Scale so the largest magnitude is 1.

    An all-zero map is first refilled with small signed uniform noise from
    ``rng`` (attribution collapse happens under heavy randomization), then
    scaled like any other input.
    """
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    values = h.values
    peak = np.abs(values).max()
    if peak == 0.0:
        values = rng.uniform(-ZERO_FALLBACK_SCALE, ZERO_FALLBACK_SCALE, size=values.shape)
        peak = np.abs(values).max()
    return replace(h, values=values / peak, normalized=True)


def to_abs(h: Heatmap) -> Heatmap:
    """Element-wise absolute value."""
    return replace(h, values=np.abs(h.values), abs_applied=True)


def average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks of the flattened array; ties share their mean rank."""
    flat = np.asarray(values).ravel()
    uniq, inverse, counts = np.unique(flat, return_inverse=True, return_counts=True)
    upper = np.cumsum(counts).astype(np.float64)
    mean_rank = upper - (counts - 1) / 2.0
    del uniq
    return mean_rank[inverse]


def spearman_rank_correlation(a: Heatmap, b: Heatmap) -> float:
    """Pearson correlation of average ranks; 0 when either side is constant."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"heatmap shapes differ: {a.shape} vs {b.shape}")
    ra = average_ranks(a.values)
    rb = average_ranks(b.values)
    ra -= ra.mean()
    rb -= rb.mean()
    va = float(ra @ ra)
    vb = float(rb @ rb)
    if va == 0.0 or vb == 0.0:
        return 0.0
    return float(ra @ rb) / np.sqrt(va * vb)


def cascade_src(reference, stages, rng=0) -> list[dict]:
    """Mean correlation of each randomization stage against the reference.

    Every heatmap is normalized first. Each stage yields two means over
    samples: one on the signed maps, one after taking absolute values on
    both sides. ``rng`` only feeds the all-zero normalization fallback.
    """
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    reference = list(reference)
    ref_norm = [normalize_heatmap(h, rng) for h in reference]
    results = []
    for stage in stages:
        stage = list(stage)
        if len(stage) != len(reference):
            raise CountMismatch(
                f"stage has {len(stage)} heatmaps, reference has {len(reference)}"
            )
        stage_norm = [normalize_heatmap(h, rng) for h in stage]
        raw = [spearman_rank_correlation(r, s) for r, s in zip(ref_norm, stage_norm)]
        absed = [
            spearman_rank_correlation(to_abs(r), to_abs(s))
            for r, s in zip(ref_norm, stage_norm)
        ]
        results.append({"no_abs": float(np.mean(raw)), "abs": float(np.mean(absed))})
    return results


@dataclass(frozen=True)
class MorfOrdering:
    """Distinct sites in descending attribution order."""

    sites: tuple[tuple[int, int], ...]

    def __len__(self):
        return len(self.sites)


def morf_ordering(h: Heatmap, count: int) -> MorfOrdering:
    """Top ``count`` sites by value, ties resolved in row-major order."""
    height, width = h.shape
    total = height * width
    if count > total:
        raise LTooLarge(f"requested {count} sites from a {total}-site lattice")
    flat = h.values.ravel()
    order = np.argsort(-flat, kind="stable")[:count]
    return MorfOrdering(sites=tuple((int(i) // width, int(i) % width) for i in order))


class Scorer:
    """Deterministic image -> per-class confidence mapping."""

    def scores(self, image: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict(self, image: np.ndarray) -> int:
        return int(np.argmax(self.scores(image)))


class CentroidScorer(Scorer):
    """Confidence is a softmax over negated distances to class-mean images."""

    def __init__(self, centroids: np.ndarray):
        centroids = np.asarray(centroids, dtype=np.float64)
        self.centroids = centroids.reshape(centroids.shape[0], -1)

    @classmethod
    def from_samples(cls, images, labels) -> "CentroidScorer":
        images = np.asarray(images, dtype=np.float64)
        labels = np.asarray(labels)
        classes = np.arange(10)
        missing = [int(c) for c in classes if not np.any(labels == c)]
        if missing:
            raise MissingClass(f"no training samples for classes {missing}")
        centroids = np.stack(
            [images[labels == c].reshape(np.sum(labels == c), -1).mean(axis=0)
             for c in classes]
        )
        return cls(centroids)

    def scores(self, image: np.ndarray) -> np.ndarray:
        x = np.asarray(image, dtype=np.float64).ravel()
        dists = np.sqrt(((self.centroids - x) ** 2).sum(axis=1))
        z = -dists
        z = z - z.max()
        e = np.exp(z)
        return e / e.sum()


def build_centroid_scorer(samples) -> CentroidScorer:
    """Fit a centroid scorer from SampleRecords (one mean image per class)."""
    images = [rec.image for rec in samples]
    labels = [rec.class_label for rec in samples]
    return CentroidScorer.from_samples(images, labels)


def aopc_curve(scorer: Scorer, image: np.ndarray, h: Heatmap, count: int,
               rng, repeats: int = 8, target=None) -> np.ndarray:
    """Perturbation-curve areas for every prefix length 0..count.

    Pixels are removed most-relevant-first; each removal replaces one pixel
    with a fresh uniform(0, 1) draw. Entry ``L`` of the result is the mean
    over ``repeats`` of (1/(L+1)) * sum of the first L confidence gaps
    (the 0-removal gap is identically 0).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    ordering = morf_ordering(h, count)
    image = np.asarray(image, dtype=np.float64)
    if target is None:
        target = int(np.argmax(scorer.scores(image)))
    f0 = float(scorer.scores(image)[target])
    total = np.zeros(count + 1, dtype=np.float64)
    for _ in range(repeats):
        x = image.copy()
        deltas = np.empty(count + 1, dtype=np.float64)
        deltas[0] = 0.0
        for k, site in enumerate(ordering.sites, start=1):
            x[site] = rng.uniform(0.0, 1.0)
            deltas[k] = f0 - float(scorer.scores(x)[target])
        total += np.cumsum(deltas) / (np.arange(count + 1) + 1.0)
    return total / repeats


def aopc(scorer: Scorer, image: np.ndarray, h: Heatmap, count: int, rng,
         repeats: int = 8, target=None) -> float:
    """Area over the perturbation curve at prefix length ``count``."""
    return float(aopc_curve(scorer, image, h, count, rng, repeats, target)[count])


def segmentation_error_metrics(pred, truth, num_classes: int) -> dict:
    """Pixel hit/miss errors in percent.

    Accuracy is micro over pixels; recall averages over classes present in
    the truth, precision over classes present in the prediction. Each
    metric m is reported as 100 * (1 - m).
    """
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise DimensionMismatch(f"shapes differ: {pred.shape} vs {truth.shape}")
    for name, arr in (("pred", pred), ("truth", truth)):
        if arr.min() < 0 or arr.max() >= num_classes:
            raise LabelOutOfRange(f"{name} labels fall outside 0..{num_classes - 1}")
    confusion = np.bincount(
        truth.ravel().astype(np.int64) * num_classes + pred.ravel().astype(np.int64),
        minlength=num_classes * num_classes,
    ).reshape(num_classes, num_classes)
    total = confusion.sum()
    accuracy = confusion.trace() / total
    truth_counts = confusion.sum(axis=1)
    pred_counts = confusion.sum(axis=0)
    diag = np.diag(confusion)
    recall = (diag[truth_counts > 0] / truth_counts[truth_counts > 0]).mean()
    precision = (diag[pred_counts > 0] / pred_counts[pred_counts > 0]).mean()
    return {
        "accuracy_err": 100.0 * (1.0 - accuracy),
        "recall_err": 100.0 * (1.0 - recall),
        "precision_err": 100.0 * (1.0 - precision),
    }

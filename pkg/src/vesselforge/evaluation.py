"""Pixel-wise ROC/AUC and pipeline-vs-baseline comparison.

ROC CSV columns: ``threshold,fpr,tpr`` (thresholds ``inf`` / ``-inf`` for the
sentinel points). Report JSON::

    {"records": [{"image_id", "auc_pipeline", "auc_baseline", "auc_delta",
                  "config_fingerprint"}, ...],
     "aggregate": {"n_images", "win_count", "mean_auc_delta",
                   "mean_auc_pipeline", "mean_auc_baseline"}}

Records are sorted by ``image_id``.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List

import numpy as np

from .pipeline import PipelineConfig, enhance_full, frangi_only


class DegenerateGroundTruthError(ValueError):
    pass


@dataclass
class RocCurve:
    """Operating points for decreasing thresholds.

    ``tp`` / ``fp`` keep the integer counts so the area can be formed
    exactly from them.
    """

    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    tp: np.ndarray
    fp: np.ndarray
    positives: int
    negatives: int

    @property
    def points(self):
        return list(zip(self.thresholds.tolist(), self.fpr.tolist(), self.tpr.tolist()))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["threshold", "fpr", "tpr"])
            for t, f, p in self.points:
                w.writerow([repr(float(t)), repr(float(f)), repr(float(p))])


def _as_scores(scores):
    values = getattr(scores, "values", scores)
    return np.asarray(values, dtype=np.float64)


def roc_curve(scores, mask) -> RocCurve:
    """Sweep every distinct score; a pixel is positive when ``score >= threshold``."""
    s = _as_scores(scores).ravel()
    m = np.asarray(mask, dtype=bool)
    if m.shape != _as_scores(scores).shape:
        raise ValueError("score and mask dimensions differ")
    m = m.ravel()
    n_pos = int(m.sum())
    n_neg = int(m.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise DegenerateGroundTruthError("degenerate ground truth")
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    m_sorted = m[order]
    tp_cum = np.cumsum(m_sorted)
    fp_cum = np.cumsum(~m_sorted)
    # last index of each run of equal scores
    last = np.flatnonzero(np.r_[s_sorted[1:] != s_sorted[:-1], True])
    tp = np.r_[0, tp_cum[last], n_pos].astype(np.int64)
    fp = np.r_[0, fp_cum[last], n_neg].astype(np.int64)
    thresholds = np.r_[np.inf, s_sorted[last], -np.inf]
    return RocCurve(thresholds, fp / n_neg, tp / n_pos, tp, fp, n_pos, n_neg)


def auc(curve: RocCurve) -> float:
    """Trapezoidal area under the curve, evaluated on integer counts."""
    dfp = np.diff(curve.fp)
    tp_sum = curve.tp[1:] + curve.tp[:-1]
    numerator = int(np.sum(dfp * tp_sum))
    return numerator / (2 * curve.positives * curve.negatives)


def roc_auc(scores, mask) -> float:
    return auc(roc_curve(scores, mask))


@dataclass
class EvalRecord:
    image_id: str
    auc_pipeline: float
    auc_baseline: float
    auc_delta: float
    config_fingerprint: str


@dataclass
class EvalReport:
    records: List[EvalRecord]

    @property
    def aggregate(self) -> dict:
        deltas = [r.auc_delta for r in self.records]
        return {
            "n_images": len(self.records),
            "win_count": sum(1 for r in self.records if r.auc_pipeline > r.auc_baseline),
            "mean_auc_delta": float(np.mean(deltas)) if deltas else 0.0,
            "mean_auc_pipeline": float(np.mean([r.auc_pipeline for r in self.records]))
            if deltas else 0.0,
            "mean_auc_baseline": float(np.mean([r.auc_baseline for r in self.records]))
            if deltas else 0.0,
        }

    def to_dict(self) -> dict:
        records = sorted(self.records, key=lambda r: r.image_id)
        return {"records": [asdict(r) for r in records], "aggregate": self.aggregate}

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


def compare(image, mask, config: PipelineConfig = PipelineConfig(), image_id: str = "image",
            return_curves: bool = False):
    """Run baseline and full pipeline on one image and score both against ``mask``."""
    baseline = frangi_only(image, config.frangi)
    _, vessels = enhance_full(image, config)
    roc_base = roc_curve(baseline, mask)
    roc_pipe = roc_curve(vessels, mask)
    a_pipe, a_base = auc(roc_pipe), auc(roc_base)
    record = EvalRecord(image_id, a_pipe, a_base, a_pipe - a_base, config.fingerprint())
    if return_curves:
        return record, roc_pipe, roc_base
    return record


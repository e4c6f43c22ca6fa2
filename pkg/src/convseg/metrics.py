"""Segmentation metrics: Pk over the unit lattice, boundary P/R/F1 with
exact offset matching, per-document step statistics, and corpus aggregates.
"""

import csv
import json
import math
from dataclasses import asdict, dataclass, field

from . import textproc
from .corpus import cut_text
from .errors import EvalMismatchError, MetricError


def unit_lattice(doc, gold_breaks):
    """Sorted union of candidate offsets and gold breaks.

    Gold breaks that miss the candidate set still shape the reference
    segmentation; hypothesis breaks always live on the candidate subset.
    """
    return sorted(set(doc.candidates) | set(gold_breaks))


def _segment_ids(n_units, boundary_indices):
    ids = []
    current = 0
    for u in range(n_units):
        ids.append(current)
        if u in boundary_indices:
            current += 1
    return ids


def pk_lattice(n_units, ref_boundaries, hyp_boundaries, k=None):
    """Pk over an abstract unit sequence.

    Boundaries are unit indices: index u means a break between unit u and
    u+1 (valid values 0..n_units-2). Default k is half the mean reference
    segment length, at least 1.
    """
    if n_units < 1:
        raise MetricError("unit sequence is empty")
    ref = set(ref_boundaries)
    hyp = set(hyp_boundaries)
    for b in ref | hyp:
        if not 0 <= b < n_units - 1:
            raise MetricError(f"boundary index {b} outside unit range")
    if k is None:
        mean_len = n_units / (len(ref) + 1)
        k = max(1, round(mean_len / 2))
    if n_units <= k:
        raise MetricError(f"document too short for window k={k} ({n_units} units)")
    ref_ids = _segment_ids(n_units, ref)
    hyp_ids = _segment_ids(n_units, hyp)
    disagreements = 0
    positions = n_units - k
    for i in range(positions):
        same_ref = ref_ids[i] == ref_ids[i + k]
        same_hyp = hyp_ids[i] == hyp_ids[i + k]
        if same_ref != same_hyp:
            disagreements += 1
    return disagreements / positions


def pk(doc, gold_breaks, pred_breaks, k=None):
    """Pk of a predicted segmentation against gold breaks on one document."""
    lattice = unit_lattice(doc, gold_breaks)
    index = {off: i for i, off in enumerate(lattice)}
    missing = [b for b in pred_breaks if b not in index]
    if missing:
        raise MetricError(f"predicted breaks off the lattice: {missing[:3]}")
    n_units = len(lattice) + 1
    ref = {index[b] for b in gold_breaks}
    hyp = {index[b] for b in pred_breaks}
    return pk_lattice(n_units, ref, hyp, k=k)


def prf(gold_breaks, pred_breaks):
    """Boundary precision/recall/F1 with exact character-offset matching.

    Empty-side conventions mirror each other so that swapping gold and
    predictions swaps precision and recall.
    """
    gold = set(gold_breaks)
    pred = set(pred_breaks)
    tp = len(gold & pred)
    if not pred:
        precision = 1.0 if not gold else 0.0
    else:
        precision = tp / len(pred)
    if not gold:
        recall = 1.0 if not pred else 0.0
    else:
        recall = tp / len(gold)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return precision, recall, f1


def step_stats(doc, gold_breaks, pred_breaks):
    """Step-count comparison between gold and predicted segmentations."""
    n_gold = len(gold_breaks) + 1
    n_pred = len(pred_breaks) + 1
    if n_pred == n_gold:
        category = "="
    elif n_pred > n_gold:
        category = "+"
    else:
        category = "-"
    pred_steps = cut_text(doc.text, sorted(pred_breaks))
    token_counts = [len(textproc.tokenize(s)) for s in pred_steps]
    return {
        "n_gold_steps": n_gold,
        "n_pred_steps": n_pred,
        "exact_match": sorted(gold_breaks) == sorted(pred_breaks),
        "category": category,
        "delta_le1": abs(n_pred - n_gold) <= 1,
        "tokens_per_pred_step": sum(token_counts) / len(token_counts),
    }


@dataclass
class DocRecord:
    doc_id: str
    pk: float
    precision: float
    recall: float
    f1: float
    n_gold_steps: int
    n_pred_steps: int
    exact_match: bool
    category: str
    delta_le1: bool
    tokens_per_pred_step: float
    tp: int = 0
    n_pred_breaks: int = 0
    n_gold_breaks: int = 0


@dataclass
class EvalReport:
    per_doc: list = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "per_doc": [asdict(r) for r in self.per_doc],
            "aggregate": dict(self.aggregate),
        }


def evaluate_document(doc, gold_breaks, pred_breaks, k=None):
    p, r, f1 = prf(gold_breaks, pred_breaks)
    stats = step_stats(doc, gold_breaks, pred_breaks)
    gold = set(gold_breaks)
    pred = set(pred_breaks)
    return DocRecord(
        doc_id=doc.id,
        pk=pk(doc, gold_breaks, pred_breaks, k=k),
        precision=p,
        recall=r,
        f1=f1,
        tp=len(gold & pred),
        n_pred_breaks=len(pred),
        n_gold_breaks=len(gold),
        **stats,
    )


def aggregate(records):
    """Corpus-level aggregates: macro Pk, micro P/R/F1, and Table-style
    step statistics as percentages."""
    records = list(records)
    if not records:
        raise MetricError("no records to aggregate")
    n = len(records)
    tp = sum(r.tp for r in records)
    n_pred = sum(r.n_pred_breaks for r in records)
    n_gold = sum(r.n_gold_breaks for r in records)
    if n_pred == 0:
        micro_p = 1.0 if n_gold == 0 else 0.0
    else:
        micro_p = tp / n_pred
    if n_gold == 0:
        micro_r = 1.0 if n_pred == 0 else 0.0
    else:
        micro_r = tp / n_gold
    micro_f1 = (
        0.0 if micro_p + micro_r == 0 else 2 * micro_p * micro_r / (micro_p + micro_r)
    )
    agg = {
        "n_documents": n,
        "pk_mean": sum(r.pk for r in records) / n,
        "precision_micro": micro_p,
        "recall_micro": micro_r,
        "f1_micro": micro_f1,
        "mean_pred_steps": sum(r.n_pred_steps for r in records) / n,
        "mean_gold_steps": sum(r.n_gold_steps for r in records) / n,
        "mean_tokens_per_step": sum(r.tokens_per_pred_step for r in records) / n,
        "exact_match_pct": 100.0 * sum(r.exact_match for r in records) / n,
        "equal_steps_pct": 100.0 * sum(r.category == "=" for r in records) / n,
        "more_steps_pct": 100.0 * sum(r.category == "+" for r in records) / n,
        "less_steps_pct": 100.0 * sum(r.category == "-" for r in records) / n,
        "delta_le1_pct": 100.0 * sum(r.delta_le1 for r in records) / n,
    }
    return EvalReport(per_doc=records, aggregate=agg)


def evaluate_corpus(docs, predictions, k=None):
    """Evaluate a {doc_id: breaks} prediction map against gold breaks.

    Doc-id mismatches between corpus and predictions are an error.
    """
    doc_ids = {d.id for d in docs}
    pred_ids = set(predictions)
    if doc_ids != pred_ids:
        missing = sorted(doc_ids - pred_ids)[:3]
        extra = sorted(pred_ids - doc_ids)[:3]
        raise EvalMismatchError(
            f"doc id mismatch (missing predictions: {missing}, unknown ids: {extra})"
        )
    records = [
        evaluate_document(doc, doc.step_offsets, predictions[doc.id], k=k)
        for doc in docs
    ]
    return aggregate(records)


_RUN_FIELDS = [
    "pk_mean",
    "precision_micro",
    "recall_micro",
    "f1_micro",
    "mean_pred_steps",
    "mean_gold_steps",
    "mean_tokens_per_step",
    "exact_match_pct",
    "equal_steps_pct",
    "more_steps_pct",
    "less_steps_pct",
    "delta_le1_pct",
]

_RATE_FIELDS = {"pk_mean", "precision_micro", "recall_micro", "f1_micro"}


def format_mean_std(mean, std, scale=1.0, digits=1):
    return f"{mean * scale:.{digits}f} ± {std * scale:.{digits}f}"


def aggregate_runs(reports, seeds=None):
    """Mean and sample standard deviation of aggregates across seeded runs."""
    reports = list(reports)
    if not reports:
        raise MetricError("no reports to aggregate")
    out = {"runs": len(reports), "seed_list": list(seeds or []), "aggregate": {}}
    for name in _RUN_FIELDS:
        values = [r.aggregate[name] for r in reports]
        mean = sum(values) / len(values)
        if len(values) > 1:
            std = math.sqrt(sum((v - mean) ** 2 for v in values) / (len(values) - 1))
        else:
            std = 0.0
        scale = 100.0 if name in _RATE_FIELDS else 1.0
        out["aggregate"][name] = {
            "mean": mean,
            "std": std,
            "formatted": format_mean_std(mean, std, scale=scale),
        }
    return out


CSV_COLUMNS = [
    ("Pk", "pk_mean"),
    ("Precision", "precision_micro"),
    ("Recall", "recall_micro"),
    ("F1", "f1_micro"),
    ("Steps", "mean_pred_steps"),
    ("Tokens", "mean_tokens_per_step"),
    ("ExactMatch", "exact_match_pct"),
    ("EqualSteps", "equal_steps_pct"),
    ("MoreSteps", "more_steps_pct"),
    ("LessSteps", "less_steps_pct"),
    ("DeltaStepsLe1", "delta_le1_pct"),
]


def report_to_json(report, path, runs=None):
    payload = report.to_dict()
    if runs is not None:
        payload["runs"] = runs["runs"]
        payload["seed_list"] = runs["seed_list"]
        payload["across_runs"] = runs["aggregate"]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def report_to_csv(report, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([name for name, _ in CSV_COLUMNS])
        writer.writerow([f"{report.aggregate[key]:.6f}" for _, key in CSV_COLUMNS])

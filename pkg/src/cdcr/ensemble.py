"""Difficulty-routed model ensembling, grid search, and hard-pair analysis.

Each registered model is a full prediction set over the evaluation
pairs. A routing policy sends easy pairs to one model and hard
positives/negatives to (possibly different) models; the grid search
scores every candidate combination end to end (route, cluster,
evaluate) against the gold clusters.

The routing categories derive from gold labels, so grid-search results
are an oracle-routing upper bound, not a deployable predictor; the
report generated by the CLI repeats this caveat.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from pathlib import Path

from . import metrics
from .clusterer import ClusterSet, cluster
from .corpus import COREFERENT
from .difficulty import EASY_NEG, EASY_POS, HARD_CATEGORIES, HARD_NEG, HARD_POS, CategorizedPair
from .errors import ValidationError
from .scorer import PairScore

GRID_CSV_COLUMNS = (
    "easy_id", "hardpos_id", "hardneg_id", "muc_f1", "b3_f1", "ceafe_f1", "conll_f1",
)


@dataclass(frozen=True)
class RoutingPolicy:
    easy_model: str
    hard_pos_model: str
    hard_neg_model: str

    def model_for(self, category: str) -> str:
        if category in (EASY_POS, EASY_NEG):
            return self.easy_model
        if category == HARD_POS:
            return self.hard_pos_model
        if category == HARD_NEG:
            return self.hard_neg_model
        raise ValidationError(f"unknown category {category!r}")

    def key(self) -> tuple[str, str, str]:
        return (self.easy_model, self.hard_pos_model, self.hard_neg_model)


@dataclass(frozen=True)
class PredictionSet:
    model_id: str
    scores: dict[tuple[str, str], PairScore]

    def score_for(self, pair_key: tuple[str, str]) -> PairScore:
        try:
            return self.scores[pair_key]
        except KeyError:
            raise ValidationError(
                f"model {self.model_id!r} has no score for pair {pair_key}"
            ) from None


@dataclass(frozen=True)
class ProportionReport:
    """Fraction of hard pairs among TP / FP / FN; 0 when the set is empty."""

    tp_hard: float
    fp_hard: float
    fn_hard: float
    n_tp: int
    n_fp: int
    n_fn: int


def route_and_merge(
    categorized: list[CategorizedPair],
    policy: RoutingPolicy,
    registry: dict[str, PredictionSet],
) -> PredictionSet:
    """Assemble one prediction set by per-category routing."""
    for model_id in policy.key():
        if model_id not in registry:
            raise ValidationError(f"policy references unregistered model {model_id!r}")
    merged: dict[tuple[str, str], PairScore] = {}
    for cp in categorized:
        source = registry[policy.model_for(cp.category)]
        merged[cp.pair.key] = source.score_for(cp.pair.key)
    name = "+".join(policy.key())
    return PredictionSet(model_id=f"routed({name})", scores=merged)


def _evaluate_policy(
    policy: RoutingPolicy,
    categorized: list[CategorizedPair],
    registry: dict[str, PredictionSet],
    gold: ClusterSet,
    threshold: float,
) -> dict:
    merged = route_and_merge(categorized, policy, registry)
    predicted = cluster(gold.covers, list(merged.scores.values()), threshold)
    report = metrics.evaluate(gold, predicted)
    return {
        "easy_id": policy.easy_model,
        "hardpos_id": policy.hard_pos_model,
        "hardneg_id": policy.hard_neg_model,
        "muc_f1": report["muc"]["f1"],
        "b3_f1": report["b3"]["f1"],
        "ceafe_f1": report["ceaf_e"]["f1"],
        "conll_f1": report["conll_f1"],
    }


def grid_search(
    categorized: list[CategorizedPair],
    registry: dict[str, PredictionSet],
    easy_candidates: list[str],
    hard_pos_candidates: list[str],
    hard_neg_candidates: list[str],
    gold: ClusterSet,
    threshold: float,
    jobs: int = 1,
) -> tuple[RoutingPolicy, list[dict]]:
    """Evaluate every slot combination; return the CoNLL-F1 argmax and the
    full score table. Ties break lexicographically on the model-id triple.
    """
    if not easy_candidates or not hard_pos_candidates or not hard_neg_candidates:
        raise ValidationError("every routing slot needs at least one candidate model")
    policies = [
        RoutingPolicy(e, hp, hn)
        for e, hp, hn in product(
            sorted(easy_candidates), sorted(hard_pos_candidates), sorted(hard_neg_candidates)
        )
    ]

    def run(policy: RoutingPolicy) -> dict:
        return _evaluate_policy(policy, categorized, registry, gold, threshold)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            table = list(pool.map(run, policies))
    else:
        table = [run(policy) for policy in policies]

    # Policies were generated in lexicographic order, so the first row
    # achieving the maximum is the deterministic tie-break winner.
    best_conll = max(row["conll_f1"] for row in table)
    best_row = next(row for row in table if row["conll_f1"] == best_conll)
    best = RoutingPolicy(best_row["easy_id"], best_row["hardpos_id"], best_row["hardneg_id"])
    return best, table


def hard_proportions(
    predictions: PredictionSet,
    categorized: list[CategorizedPair],
    threshold: float,
) -> ProportionReport:
    """Hard-pair share of TP, FP, and FN at the given decision threshold.

    Gold labels and categories come from the categorized pair list; an
    empty outcome set reports 0 by convention.
    """
    tp = fp = fn = 0
    tp_hard = fp_hard = fn_hard = 0
    for cp in categorized:
        score = predictions.score_for(cp.pair.key)
        predicted_pos = score.s_mean >= threshold
        gold_pos = cp.pair.label == COREFERENT
        hard = cp.category in HARD_CATEGORIES
        if predicted_pos and gold_pos:
            tp += 1
            tp_hard += hard
        elif predicted_pos and not gold_pos:
            fp += 1
            fp_hard += hard
        elif not predicted_pos and gold_pos:
            fn += 1
            fn_hard += hard
    return ProportionReport(
        tp_hard=tp_hard / tp if tp else 0.0,
        fp_hard=fp_hard / fp if fp else 0.0,
        fn_hard=fn_hard / fn if fn else 0.0,
        n_tp=tp,
        n_fp=fp,
        n_fn=fn,
    )


def write_scores_csv(predictions: PredictionSet, path: str | Path) -> None:
    """Registry entry: one row per pair with both directional scores."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pair_a", "pair_b", "s_ab", "s_ba", "s_mean"])
        for key in sorted(predictions.scores):
            score = predictions.scores[key]
            writer.writerow([key[0], key[1], repr(score.s_ab), repr(score.s_ba), repr(score.s_mean)])


def read_scores_csv(path: str | Path, model_id: str | None = None) -> PredictionSet:
    path = Path(path)
    scores: dict[tuple[str, str], PairScore] = {}
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"pair_a", "pair_b", "s_ab", "s_ba"}
        missing = required - set(reader.fieldnames or ())
        if missing:
            raise ValidationError(f"{path.name}: missing columns {sorted(missing)}")
        for row in reader:
            key = (row["pair_a"], row["pair_b"])
            scores[key] = PairScore(pair=key, s_ab=float(row["s_ab"]), s_ba=float(row["s_ba"]))
    return PredictionSet(model_id=model_id or path.stem, scores=scores)


def load_registry(directory: str | Path) -> dict[str, PredictionSet]:
    """Model id -> predictions, one score CSV per model in the directory."""
    directory = Path(directory)
    registry = {}
    for path in sorted(directory.glob("*.csv")):
        registry[path.stem] = read_scores_csv(path)
    if not registry:
        raise ValidationError(f"no score CSVs found in {directory}")
    return registry


def write_grid_csv(table: list[dict], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(GRID_CSV_COLUMNS)
        for row in table:
            writer.writerow(
                [row["easy_id"], row["hardpos_id"], row["hardneg_id"],
                 repr(row["muc_f1"]), repr(row["b3_f1"]),
                 repr(row["ceafe_f1"]), repr(row["conll_f1"])]
            )

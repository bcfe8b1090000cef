"""Command-line pipeline driver.

Every subcommand validates all inputs before writing anything, writes
through a temp-file-then-rename step so failures never leave partial
artifacts, and echoes its resolved configuration (flags > config file >
defaults) next to each output for provenance. Exit codes: 0 success,
1 data/validation error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import ensemble as ens
from . import metrics, pipeline
from .clusterer import ClusterSet, cluster, read_clusters_jsonl, write_clusters_jsonl, write_conll
from .corpus import (
    COREFERENT,
    MentionPair,
    PruningConfig,
    generate_pairs,
    load_corpus,
    load_synonym_pairs,
)
from .difficulty import difficulty_histogram, read_categories_csv, write_categories_csv
from .embedstore import TEXT, VISION, EmbeddingStore, load_store
from .errors import CdcrError, ValidationError
from .linmap import fit_bidirectional, load_map, save_map
from .scorer import ScorerConfig, load_scorer, save_scorer
from .synthetic import generate_transfer_fixture
from .taxonomy import load_taxonomy

PAIRS_CSV_COLUMNS = ("pair_a", "pair_b", "label", "same_doc", "same_topic")


# ---------------------------------------------------------------------------
# config resolution and output plumbing


def _parse_config_value(raw: str):
    raw = raw.strip()
    if raw.lower() in ("true", "false"):
        return raw.lower() == "true"
    for caster in (int, float):
        try:
            return caster(raw)
        except ValueError:
            pass
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "'\"":
        return raw[1:-1]
    return raw


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    out = {}
    config_path = Path(path)
    if not config_path.exists():
        raise ValidationError(f"config file not found: {path}")
    for lineno, line in enumerate(config_path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{config_path.name} line {lineno}: expected key = value")
        key, raw = line.split("=", 1)
        out[key.strip()] = _parse_config_value(raw)
    return out


class Resolver:
    """flags > config file > defaults, remembering what was resolved."""

    def __init__(self, config_path: str | None) -> None:
        self.file_values = _load_config_file(config_path)
        self.resolved: dict = {}

    def get(self, key: str, flag_value, default):
        if flag_value is not None:
            value = flag_value
        elif key in self.file_values:
            value = self.file_values[key]
        else:
            value = default
        self.resolved[key] = value
        return value


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _staged(path: Path):
    """(tmp_path, finalize) pair for writers that take a filename."""
    tmp = path.with_name(path.name + ".tmp")

    def finalize() -> None:
        os.replace(tmp, path)

    return tmp, finalize


def _provenance(command: str, params: dict, inputs: dict) -> dict:
    return {"command": command, "params": params, "inputs": inputs}


def _write_sidecar(out_path: Path, provenance: dict) -> None:
    _atomic_write_text(
        out_path.with_name(out_path.name + ".run.json"),
        json.dumps(provenance, sort_keys=True, indent=2) + "\n",
    )


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# shared input readers


def _read_pairs_csv(path: str) -> list[MentionPair]:
    pairs = []
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(PAIRS_CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValidationError(f"{Path(path).name}: missing columns {sorted(missing)}")
        for row in reader:
            pairs.append(
                MentionPair(
                    a=row["pair_a"],
                    b=row["pair_b"],
                    label=row["label"],
                    same_doc=row["same_doc"] == "1",
                    same_topic=row["same_topic"] == "1",
                )
            )
    return pairs


def _write_pairs_csv(pairs: list[MentionPair], path: Path) -> None:
    tmp, finalize = _staged(path)
    with tmp.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PAIRS_CSV_COLUMNS)
        for p in pairs:
            writer.writerow([p.a, p.b, p.label, int(p.same_doc), int(p.same_topic)])
    finalize()


def _load_emb_files(paths: list[str]) -> EmbeddingStore:
    if not paths:
        raise ValidationError("no embedding files given")
    store = EmbeddingStore()
    for p in paths:
        store.add_file(p)
    return store


def _resolve_encoder(store: EmbeddingStore, modality: str, flag: str | None) -> str:
    names = sorted({e for (m, e, _) in store.series() if m == modality})
    if flag is not None:
        if flag not in names:
            raise ValidationError(
                f"encoder {flag!r} not present for modality {modality} (have {names})"
            )
        return flag
    if len(names) != 1:
        raise ValidationError(
            f"modality {modality} has {len(names)} encoders loaded ({names}); "
            "pass an explicit encoder name"
        )
    return names[0]


def _read_cluster_or_corpus(path: str) -> ClusterSet:
    """Cluster JSONL, or a corpus JSONL whose gold clusters are taken."""
    with Path(path).open("r", encoding="utf-8") as fh:
        first = ""
        for line in fh:
            if line.strip():
                first = line
                break
    if not first:
        raise ValidationError(f"{path}: empty file")
    obj = json.loads(first)
    if isinstance(obj, dict) and "cluster_id" in obj:
        return read_clusters_jsonl(path)
    if isinstance(obj, dict) and "gold_cluster" in obj:
        corpus = load_corpus(path, "test")
        return ClusterSet.from_groups(corpus.gold_clusters().values())
    raise ValidationError(
        f"{path}: expected cluster JSONL ('cluster_id') or corpus JSONL ('gold_cluster')"
    )


# ---------------------------------------------------------------------------
# subcommands


def _cmd_pairs(args) -> int:
    resolver = Resolver(args.config)
    oracle = resolver.get("oracle", args.oracle, True)
    within_topic = resolver.get("within_topic", args.within_topic, True)
    split = resolver.get("split", args.split, "test")

    corpus = load_corpus(args.corpus, split)
    synonyms = load_synonym_pairs(args.synonyms) if args.synonyms else frozenset()
    config = PruningConfig(
        synonym_pairs=synonyms,
        oracle_keep_positives=oracle,
        within_topic_only=within_topic,
    )
    pairs = generate_pairs(corpus, config)

    out = Path(args.out)
    _write_pairs_csv(pairs, out)
    _write_sidecar(
        out,
        _provenance(
            "pairs",
            {"oracle": oracle, "within_topic": within_topic, "split": split,
             "n_pairs": len(pairs), "n_positive": sum(p.label == COREFERENT for p in pairs)},
            {"corpus": args.corpus, "synonyms": args.synonyms},
        ),
    )
    print(f"wrote {len(pairs)} candidate pairs to {out}")
    return 0


def _cmd_fitmap(args) -> int:
    resolver = Resolver(args.config)
    lam = resolver.get("lambda", args.lam, 1.0)
    pair_source = resolver.get("map_pairs", args.map_pairs, "all")
    fallback = resolver.get("pair_fallback", args.pair_fallback, "error")
    if pair_source not in ("all", "positives"):
        raise ValidationError(f"--map-pairs must be 'all' or 'positives', got {pair_source!r}")

    pairs = _read_pairs_csv(args.pairs)
    if pair_source == "positives":
        pairs = [p for p in pairs if p.label == COREFERENT]
    if not pairs:
        raise ValidationError("no pairs left to fit the maps on")
    store = _load_emb_files(args.text_emb + args.vision_emb)
    text_encoder = _resolve_encoder(store, TEXT, args.text_encoder)
    vision_encoder = _resolve_encoder(store, VISION, args.vision_encoder)

    X_text = pipeline.representation_matrix(store, pairs, TEXT, text_encoder, fallback)
    X_vision = pipeline.representation_matrix(store, pairs, VISION, vision_encoder, fallback)
    t2v, v2t, t2v_report, v2t_report = fit_bidirectional(
        X_text, X_vision, lam, text_encoder, vision_encoder
    )

    params = {"lambda": lam, "map_pairs": pair_source, "pair_fallback": fallback,
              "text_encoder": text_encoder, "vision_encoder": vision_encoder}
    inputs = {"pairs": args.pairs, "text_emb": args.text_emb, "vision_emb": args.vision_emb}

    out_t2v, out_v2t = Path(args.out_t2v), Path(args.out_v2t)
    tmp, fin = _staged(out_t2v)
    save_map(t2v, tmp)
    fin()
    tmp, fin = _staged(out_v2t)
    save_map(v2t, tmp)
    fin()
    _write_sidecar(out_t2v, _provenance("fitmap", params, inputs))
    _write_sidecar(out_v2t, _provenance("fitmap", params, inputs))

    report = {
        "config": _provenance("fitmap", params, inputs),
        "text_to_vision": {
            "n_samples": t2v_report.n_samples,
            "train_residual": t2v_report.train_residual,
            "normal_eq_residual": t2v_report.normal_eq_residual,
        },
        "vision_to_text": {
            "n_samples": v2t_report.n_samples,
            "train_residual": v2t_report.train_residual,
            "normal_eq_residual": v2t_report.normal_eq_residual,
        },
    }
    if args.report:
        _atomic_write_text(Path(args.report), _dump_json(report))
    print(
        f"fitted {t2v.dim}x{t2v.dim} bridges (lambda={lam}); train residuals "
        f"{t2v_report.train_residual:.4f} / {v2t_report.train_residual:.4f}"
    )
    return 0


def _scorer_config_from(resolver: Resolver, args, input_dim: int) -> ScorerConfig:
    return ScorerConfig(
        input_dim=input_dim,
        hidden1=resolver.get("hidden1", args.hidden1, 768),
        hidden2=resolver.get("hidden2", args.hidden2, 128),
        epochs=resolver.get("epochs", args.epochs, 10),
        learning_rate=resolver.get("learning_rate", args.learning_rate, 1e-4),
        batch_size=resolver.get("batch_size", args.batch_size, 32),
        seed=resolver.get("seed", args.seed, 0),
    )


def _cmd_train(args) -> int:
    resolver = Resolver(args.config)
    fallback = resolver.get("pair_fallback", args.pair_fallback, "error")
    modality = resolver.get("modality", args.modality, TEXT)

    pairs = _read_pairs_csv(args.pairs)
    store = _load_emb_files(args.emb)
    encoder = _resolve_encoder(store, modality, args.encoder)
    input_dim = 4 * store.dim(modality, encoder)
    config = _scorer_config_from(resolver, args, input_dim)

    params, trace = pipeline.train_scorer_on_pairs(store, pairs, modality, encoder, config, fallback)

    out = Path(args.out)
    tmp, fin = _staged(out)
    save_scorer(params, tmp)
    fin()
    provenance = _provenance(
        "train",
        {**{k: resolver.resolved[k] for k in
            ("hidden1", "hidden2", "epochs", "learning_rate", "batch_size", "seed",
             "pair_fallback", "modality")},
         "input_dim": input_dim, "encoder": encoder, "loss_trace": trace},
        {"pairs": args.pairs, "emb": args.emb},
    )
    _write_sidecar(out, provenance)
    print(f"trained scorer ({params.n_parameters()} parameters); "
          f"final epoch BCE {trace[-1]:.4f} -> {out}")
    return 0


def _cmd_score(args) -> int:
    resolver = Resolver(args.config)
    fallback = resolver.get("pair_fallback", args.pair_fallback, "error")
    modality = resolver.get("modality", args.modality, TEXT)

    pairs = _read_pairs_csv(args.pairs)
    store = _load_emb_files(args.emb)
    encoder = _resolve_encoder(store, modality, args.encoder)
    params = load_scorer(args.scorer)
    linear_map = load_map(args.map) if args.map else None

    scores = pipeline.score_pairs(params, store, pairs, modality, encoder, linear_map, fallback)
    model_id = args.model_id or Path(args.out).stem
    predictions = ens.PredictionSet(model_id=model_id, scores=scores)

    out = Path(args.out)
    tmp, fin = _staged(out)
    ens.write_scores_csv(predictions, tmp)
    fin()
    _write_sidecar(
        out,
        _provenance(
            "score",
            {"modality": modality, "encoder": encoder, "pair_fallback": fallback,
             "model_id": model_id, "mapped": bool(args.map)},
            {"pairs": args.pairs, "emb": args.emb, "scorer": args.scorer, "map": args.map},
        ),
    )
    print(f"scored {len(scores)} pairs -> {out}")
    return 0


def _cmd_cluster(args) -> int:
    resolver = Resolver(args.config)
    threshold = resolver.get("threshold", args.threshold, 0.5)

    predictions = ens.read_scores_csv(args.scores)
    doc_of: dict[str, str] = {}
    if args.mentions_from:
        corpus = load_corpus(args.mentions_from, "test")
        mentions = set(corpus.mention_ids())
        doc_of = {m.mention_id: m.doc_id for m in corpus.mentions}
    else:
        mentions = {m for key in predictions.scores for m in key}

    clusters = cluster(mentions, list(predictions.scores.values()), threshold)

    out = Path(args.out)
    tmp, fin = _staged(out)
    write_clusters_jsonl(clusters, tmp)
    fin()
    if args.conll:
        tmp, fin = _staged(Path(args.conll))
        write_conll(clusters, tmp, doc_of)
        fin()
    _write_sidecar(
        out,
        _provenance(
            "cluster",
            {"threshold": threshold, "n_clusters": len(clusters),
             "n_mentions": len(clusters.covers)},
            {"scores": args.scores, "mentions_from": args.mentions_from},
        ),
    )
    print(f"{len(clusters)} clusters over {len(clusters.covers)} mentions -> {out}")
    return 0


def _cmd_eval(args) -> int:
    resolver = Resolver(args.config)
    aggregation = resolver.get("aggregation", args.aggregation, "micro")
    if aggregation not in ("micro", "macro"):
        raise ValidationError(f"aggregation must be micro or macro, got {aggregation!r}")

    key = _read_cluster_or_corpus(args.key)
    response = _read_cluster_or_corpus(args.response)
    if aggregation == "macro":
        if not args.corpus:
            raise ValidationError("macro aggregation needs --corpus for the topic map")
        corpus = load_corpus(args.corpus, "test")
        group_of = {m.mention_id: m.topic_id for m in corpus.mentions}
        report = metrics.evaluate_macro(key, response, group_of)
    else:
        report = metrics.evaluate(key, response)

    report["config"] = _provenance(
        "eval",
        {"aggregation": aggregation},
        {"key": args.key, "response": args.response, "corpus": args.corpus},
    )
    text = _dump_json(report)
    if args.out:
        _atomic_write_text(Path(args.out), text)
    sys.stdout.write(text)
    return 0


def _cmd_categorize(args) -> int:
    resolver = Resolver(args.config)
    bins = resolver.get("bins", args.bins, 10)

    corpus = load_corpus(args.corpus, "test")
    pairs = _read_pairs_csv(args.pairs)
    taxonomy = load_taxonomy(args.taxonomy)
    store = _load_emb_files(args.sent_emb)
    sentence_encoder = _resolve_encoder(store, TEXT, args.sentence_encoder)

    categorized, means = pipeline.categorize_corpus_pairs(
        corpus, pairs, taxonomy, store, sentence_encoder
    )

    out = Path(args.out)
    tmp, fin = _staged(out)
    write_categories_csv(categorized, tmp)
    fin()
    provenance = _provenance(
        "categorize",
        {"sentence_encoder": sentence_encoder,
         "mean_pos": means.mean_pos, "mean_neg": means.mean_neg,
         "counts": {c: sum(cp.category == c for cp in categorized)
                    for c in ("easy_pos", "hard_pos", "easy_neg", "hard_neg")}},
        {"corpus": args.corpus, "pairs": args.pairs, "taxonomy": args.taxonomy,
         "sent_emb": args.sent_emb},
    )
    _write_sidecar(out, provenance)
    if args.means_out:
        _atomic_write_text(
            Path(args.means_out),
            _dump_json({"mean_pos": means.mean_pos, "mean_neg": means.mean_neg,
                        "corpus": means.corpus, "config": provenance}),
        )
    if args.histogram:
        rows = difficulty_histogram(categorized, bins)
        tmp, fin = _staged(Path(args.histogram))
        with tmp.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["category", "bin_lo", "bin_hi", "count"])
            for row in rows:
                writer.writerow([row["category"], repr(row["bin_lo"]),
                                 repr(row["bin_hi"]), row["count"]])
        fin()
    print(
        f"categorized {len(categorized)} pairs "
        f"(mean_pos {means.mean_pos:.4f}, mean_neg {means.mean_neg:.4f}) -> {out}"
    )
    return 0


def _cmd_ensemble(args) -> int:
    resolver = Resolver(args.config)
    threshold = resolver.get("threshold", args.threshold, 0.5)
    jobs = resolver.get("jobs", args.jobs, 1)

    categorized = read_categories_csv(args.categories)
    registry = ens.load_registry(args.registry)
    gold = _read_cluster_or_corpus(args.gold)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.grid:
        easy_c = (args.easy_candidates or args.easy or ",".join(sorted(registry))).split(",")
        hp_c = (args.hard_pos_candidates or ",".join(sorted(registry))).split(",")
        hn_c = (args.hard_neg_candidates or ",".join(sorted(registry))).split(",")
        policy, table = ens.grid_search(
            categorized, registry, easy_c, hp_c, hn_c, gold, threshold, jobs
        )
        tmp, fin = _staged(out_dir / "grid.csv")
        ens.write_grid_csv(table, tmp)
        fin()
    else:
        for name, value in (("--easy", args.easy), ("--hard-pos", args.hard_pos),
                            ("--hard-neg", args.hard_neg)):
            if value is None:
                raise ValidationError(f"{name} is required unless --grid is given")
        policy = ens.RoutingPolicy(args.easy, args.hard_pos, args.hard_neg)

    merged = ens.route_and_merge(categorized, policy, registry)
    predicted = cluster(gold.covers, list(merged.scores.values()), threshold)
    report = metrics.evaluate(gold, predicted)
    proportions = {
        model_id: ens.hard_proportions(registry[model_id], categorized, threshold)
        for model_id in sorted(registry)
    }

    provenance = _provenance(
        "ensemble",
        {"threshold": threshold, "grid": bool(args.grid),
         "policy": {"easy": policy.easy_model, "hard_pos": policy.hard_pos_model,
                    "hard_neg": policy.hard_neg_model}},
        {"categories": args.categories, "registry": args.registry, "gold": args.gold},
    )
    tmp, fin = _staged(out_dir / "merged-scores.csv")
    ens.write_scores_csv(merged, tmp)
    fin()
    tmp, fin = _staged(out_dir / "clusters.jsonl")
    write_clusters_jsonl(predicted, tmp)
    fin()
    payload = {
        "note": (
            "Routing uses gold-label-derived difficulty categories; treat these "
            "numbers as an oracle-routing upper bound, not a deployable result."
        ),
        "policy": provenance["params"]["policy"],
        "metrics": report,
        "hard_proportions": {
            model_id: {"tp_hard": p.tp_hard, "fp_hard": p.fp_hard, "fn_hard": p.fn_hard,
                       "n_tp": p.n_tp, "n_fp": p.n_fp, "n_fn": p.n_fn}
            for model_id, p in proportions.items()
        },
        "config": provenance,
    }
    _atomic_write_text(out_dir / "ensemble-report.json", _dump_json(payload))
    print(f"policy {policy.key()} -> CoNLL F1 {report['conll_f1']:.4f} "
          f"(oracle-routing upper bound); report in {out_dir}")
    return 0


def _cmd_emb_info(args) -> int:
    store = load_store(args.file)
    series = store.series()
    payload = {
        "file": args.file,
        "series": [
            {
                "modality": m,
                "encoder": e,
                "dim": d,
                "mention_records": len(store.mention_ids(m, e)),
                "pair_records": len(store.pair_keys(m, e)),
            }
            for (m, e, d) in series
        ],
        "warnings": [],
    }
    text = _dump_json(payload)
    if args.out:
        _atomic_write_text(Path(args.out), text)
    sys.stdout.write(text)
    return 0


def _cmd_synth(args) -> int:
    resolver = Resolver(args.config)
    seed = resolver.get("seed", args.seed, 2024)
    paths = generate_transfer_fixture(
        args.out_dir,
        seed=seed,
        n_clusters=resolver.get("clusters", args.clusters, 12),
        mentions_per_cluster=resolver.get("mentions_per_cluster", args.mentions_per_cluster, 5),
        hidden_dim=resolver.get("hidden_dim", args.hidden_dim, 16),
    )
    print(f"synthetic fixture written under {paths.base}")
    return 0


def _cmd_run_all(args) -> int:
    resolver = Resolver(args.config)
    lam = resolver.get("lambda", args.lam, 1.0)
    threshold = resolver.get("threshold", args.threshold, 0.5)
    fallback = resolver.get("pair_fallback", args.pair_fallback, "error")
    oracle = resolver.get("oracle", args.oracle, True)
    within_topic = resolver.get("within_topic", args.within_topic, True)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    # Load and validate every input up front.
    train_corpus = load_corpus(args.train_corpus, "train")
    eval_corpus = load_corpus(args.eval_corpus, "test")
    taxonomy = load_taxonomy(args.taxonomy)
    synonyms = load_synonym_pairs(args.synonyms) if args.synonyms else frozenset()
    store = _load_emb_files(
        [args.text_train, args.vision_train, args.text_eval, args.vision_eval]
    )
    sent_store = _load_emb_files([args.sent_emb])
    text_encoder = _resolve_encoder(store, TEXT, args.text_encoder)
    vision_encoder = _resolve_encoder(store, VISION, args.vision_encoder)
    sentence_encoder = _resolve_encoder(sent_store, TEXT, args.sentence_encoder)

    prune = PruningConfig(synonyms, oracle, within_topic)
    train_pairs = generate_pairs(train_corpus, prune)
    eval_pairs = generate_pairs(eval_corpus, prune)
    _write_pairs_csv(train_pairs, out_dir / "pairs-train.csv")
    _write_pairs_csv(eval_pairs, out_dir / "pairs-eval.csv")

    # Bridge maps on training pairs.
    X_text = pipeline.representation_matrix(store, train_pairs, TEXT, text_encoder, fallback)
    X_vision = pipeline.representation_matrix(store, train_pairs, VISION, vision_encoder, fallback)
    t2v, v2t, t2v_rep, v2t_rep = fit_bidirectional(X_text, X_vision, lam,
                                                   text_encoder, vision_encoder)
    tmp, fin = _staged(out_dir / "map-t2v.lsem")
    save_map(t2v, tmp)
    fin()
    tmp, fin = _staged(out_dir / "map-v2t.lsem")
    save_map(v2t, tmp)
    fin()

    # Scorer on text-space training representations.
    config = _scorer_config_from(resolver, args, input_dim=X_text.shape[1])
    params, trace = pipeline.train_scorer_on_pairs(
        store, train_pairs, TEXT, text_encoder, config, fallback
    )
    tmp, fin = _staged(out_dir / "scorer.psc")
    save_scorer(params, tmp)
    fin()

    # Score the evaluation pairs with the text model and the bridged vision model.
    text_scores = pipeline.score_pairs(params, store, eval_pairs, TEXT, text_encoder,
                                       None, fallback)
    v2t_scores = pipeline.score_pairs(params, store, eval_pairs, VISION, vision_encoder,
                                      v2t, fallback)
    registry = {
        "text": ens.PredictionSet("text", text_scores),
        "v2t": ens.PredictionSet("v2t", v2t_scores),
    }
    for model_id, predictions in registry.items():
        tmp, fin = _staged(out_dir / f"scores-{model_id}.csv")
        ens.write_scores_csv(predictions, tmp)
        fin()

    # Difficulty categories over the evaluation pairs.
    categorized, means = pipeline.categorize_corpus_pairs(
        eval_corpus, eval_pairs, taxonomy, sent_store, sentence_encoder
    )
    tmp, fin = _staged(out_dir / "categories.csv")
    write_categories_csv(categorized, tmp)
    fin()

    gold = ClusterSet.from_groups(eval_corpus.gold_clusters().values())
    doc_of = {m.mention_id: m.doc_id for m in eval_corpus.mentions}
    reports = {}
    for model_id, predictions in sorted(registry.items()):
        predicted = cluster(gold.covers, list(predictions.scores.values()), threshold)
        tmp, fin = _staged(out_dir / f"clusters-{model_id}.jsonl")
        write_clusters_jsonl(predicted, tmp)
        fin()
        tmp, fin = _staged(out_dir / f"clusters-{model_id}.conll")
        write_conll(predicted, tmp, doc_of)
        fin()
        reports[model_id] = metrics.evaluate(gold, predicted)

    # Routed ensemble plus grid search over both models.
    policy, table = ens.grid_search(
        categorized, registry, ["text"], sorted(registry), sorted(registry),
        gold, threshold, resolver.get("jobs", args.jobs, 1),
    )
    tmp, fin = _staged(out_dir / "grid.csv")
    ens.write_grid_csv(table, tmp)
    fin()
    merged = ens.route_and_merge(categorized, policy, registry)
    ens_pred = cluster(gold.covers, list(merged.scores.values()), threshold)
    tmp, fin = _staged(out_dir / "clusters-ensemble.jsonl")
    write_clusters_jsonl(ens_pred, tmp)
    fin()
    reports["ensemble"] = metrics.evaluate(gold, ens_pred)
    proportions = {
        model_id: ens.hard_proportions(registry[model_id], categorized, threshold)
        for model_id in sorted(registry)
    }

    params_echo = {
        "lambda": lam, "threshold": threshold, "pair_fallback": fallback,
        "oracle": oracle, "within_topic": within_topic,
        **{k: resolver.resolved[k] for k in
           ("hidden1", "hidden2", "epochs", "learning_rate", "batch_size", "seed")},
        "text_encoder": text_encoder, "vision_encoder": vision_encoder,
        "sentence_encoder": sentence_encoder,
    }
    inputs_echo = {
        "train_corpus": args.train_corpus, "eval_corpus": args.eval_corpus,
        "text_train": args.text_train, "vision_train": args.vision_train,
        "text_eval": args.text_eval, "vision_eval": args.vision_eval,
        "sent_emb": args.sent_emb, "taxonomy": args.taxonomy, "synonyms": args.synonyms,
    }
    summary = {
        "note": (
            "Ensemble routing uses gold-label-derived difficulty categories; its "
            "scores are an oracle-routing upper bound."
        ),
        "config": _provenance("run-all", params_echo, inputs_echo),
        "fit": {
            "text_to_vision": {"train_residual": t2v_rep.train_residual,
                               "normal_eq_residual": t2v_rep.normal_eq_residual},
            "vision_to_text": {"train_residual": v2t_rep.train_residual,
                               "normal_eq_residual": v2t_rep.normal_eq_residual},
        },
        "scorer_loss_trace": trace,
        "difficulty_means": {"mean_pos": means.mean_pos, "mean_neg": means.mean_neg},
        "policy": {"easy": policy.easy_model, "hard_pos": policy.hard_pos_model,
                   "hard_neg": policy.hard_neg_model},
        "metrics": reports,
        "hard_proportions": {
            model_id: {"tp_hard": p.tp_hard, "fp_hard": p.fp_hard, "fn_hard": p.fn_hard}
            for model_id, p in proportions.items()
        },
    }
    _atomic_write_text(out_dir / "run-summary.json", _dump_json(summary))
    for model_id in sorted(reports):
        print(f"{model_id}: CoNLL F1 {reports[model_id]['conll_f1']:.4f}")
    print(f"artifacts in {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# parser wiring


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key = value config file (flags take precedence)")
    sub.add_argument("--json", action="store_true", help="machine-readable errors on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdcr",
        description="Cross-document event coreference pipeline",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("pairs", help="generate pruned candidate pairs")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", default=None, choices=["train", "dev", "test"])
    p.add_argument("--synonyms")
    p.add_argument("--oracle", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--within-topic", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("-o", "--out", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_pairs)

    p = subs.add_parser("fitmap", help="fit bidirectional ridge bridge maps")
    p.add_argument("--pairs", required=True)
    p.add_argument("--text-emb", action="append", required=True)
    p.add_argument("--vision-emb", action="append", required=True)
    p.add_argument("--text-encoder")
    p.add_argument("--vision-encoder")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--map-pairs", choices=["all", "positives"], default=None)
    p.add_argument("--pair-fallback", choices=["error", "mean"], default=None)
    p.add_argument("--out-t2v", required=True)
    p.add_argument("--out-v2t", required=True)
    p.add_argument("--report")
    _add_common(p)
    p.set_defaults(func=_cmd_fitmap)

    p = subs.add_parser("train", help="train the pairwise scorer")
    p.add_argument("--pairs", required=True)
    p.add_argument("--emb", action="append", required=True)
    p.add_argument("--modality", choices=[TEXT, VISION], default=None)
    p.add_argument("--encoder")
    p.add_argument("--hidden1", type=int, default=None)
    p.add_argument("--hidden2", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--learning-rate", type=float, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--pair-fallback", choices=["error", "mean"], default=None)
    p.add_argument("-o", "--out", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_train)

    p = subs.add_parser("score", help="score pairs with a trained scorer")
    p.add_argument("--scorer", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--emb", action="append", required=True)
    p.add_argument("--modality", choices=[TEXT, VISION], default=None)
    p.add_argument("--encoder")
    p.add_argument("--map", help="LSEM bridge to apply before scoring")
    p.add_argument("--model-id")
    p.add_argument("--pair-fallback", choices=["error", "mean"], default=None)
    p.add_argument("-o", "--out", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_score)

    p = subs.add_parser("cluster", help="threshold scores into clusters")
    p.add_argument("--scores", required=True)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--mentions-from", help="corpus JSONL supplying the mention universe")
    p.add_argument("--conll", help="also emit CoNLL-style brackets here")
    p.add_argument("-o", "--out", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_cluster)

    p = subs.add_parser("eval", help="score a response against a key")
    p.add_argument("--key", required=True)
    p.add_argument("--response", required=True)
    p.add_argument("--aggregation", choices=["micro", "macro"], default=None)
    p.add_argument("--corpus", help="needed for macro aggregation (topic map)")
    p.add_argument("-o", "--out")
    _add_common(p)
    p.set_defaults(func=_cmd_eval)

    p = subs.add_parser("categorize", help="difficulty-score and bucket pairs")
    p.add_argument("--corpus", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--taxonomy", required=True)
    p.add_argument("--sent-emb", action="append", required=True)
    p.add_argument("--sentence-encoder")
    p.add_argument("--means-out")
    p.add_argument("--histogram")
    p.add_argument("--bins", type=int, default=None)
    p.add_argument("-o", "--out", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_categorize)

    p = subs.add_parser("ensemble", help="route pairs through per-category models")
    p.add_argument("--categories", required=True)
    p.add_argument("--registry", required=True, help="directory of score CSVs")
    p.add_argument("--gold", required=True)
    p.add_argument("--easy")
    p.add_argument("--hard-pos")
    p.add_argument("--hard-neg")
    p.add_argument("--grid", action="store_true")
    p.add_argument("--easy-candidates")
    p.add_argument("--hard-pos-candidates")
    p.add_argument("--hard-neg-candidates")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out-dir", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_ensemble)

    p = subs.add_parser("emb-info", help="validate and summarize an embedding file")
    p.add_argument("file")
    p.add_argument("-o", "--out")
    _add_common(p)
    p.set_defaults(func=_cmd_emb_info)

    p = subs.add_parser("synth", help="generate the synthetic transfer fixture")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--clusters", type=int, default=None)
    p.add_argument("--mentions-per-cluster", type=int, default=None)
    p.add_argument("--hidden-dim", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_synth)

    p = subs.add_parser("run-all", help="run the whole pipeline end to end")
    p.add_argument("--train-corpus", required=True)
    p.add_argument("--eval-corpus", required=True)
    p.add_argument("--text-train", required=True)
    p.add_argument("--vision-train", required=True)
    p.add_argument("--text-eval", required=True)
    p.add_argument("--vision-eval", required=True)
    p.add_argument("--sent-emb", required=True)
    p.add_argument("--taxonomy", required=True)
    p.add_argument("--synonyms")
    p.add_argument("--text-encoder")
    p.add_argument("--vision-encoder")
    p.add_argument("--sentence-encoder")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--pair-fallback", choices=["error", "mean"], default=None)
    p.add_argument("--oracle", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--within-topic", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--hidden1", type=int, default=None)
    p.add_argument("--hidden2", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--learning-rate", type=float, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out-dir", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_run_all)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CdcrError as exc:
        if getattr(args, "json", False):
            sys.stderr.write(
                json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
            )
        else:
            sys.stderr.write(f"error: {exc}\n")
        return 1
    except OSError as exc:
        if getattr(args, "json", False):
            sys.stderr.write(json.dumps({"error": "OSError", "message": str(exc)}) + "\n")
        else:
            sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())

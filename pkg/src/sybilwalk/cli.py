"""Command-line entry point.

    sybilwalk [--config FILE] [--seed N] [--verbose] COMMAND [ARGS] [--section.key VALUE ...]

Exit codes: 0 success, 2 input/config error, 3 data degeneracy, 4 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from sybilwalk import io as sio
from sybilwalk.config import (
    SEED_KEYS,
    PipelineConfig,
    apply_overrides,
    load_config,
    split_overrides,
)
from sybilwalk.errors import InputError, InvariantViolation, SybilWalkError
from sybilwalk.evaluation import (
    VARIANTS,
    evaluate,
    format_table,
    reports_to_json,
    run_experiment,
    score_to_label,
)
from sybilwalk.features import (
    as_matrix,
    extract_features,
    fit_normalization,
    normalize_matrix,
)
from sybilwalk.graph import build_graph, connected_components
from sybilwalk.propagation import ScoreVector, initialize_scores, sybilwalk
from sybilwalk.svm import LinearModel, load_model, model_to_json, train
from sybilwalk.synthgen import generate

log = logging.getLogger("sybilwalk")


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)


# Each step returns the exact text written to disk, so the pipeline command
# and the individual commands produce identical bytes.


def step_extract(accounts: Path):
    vectors = [extract_features(r) for r in sio.read_accounts(accounts)]
    return vectors, sio.features_csv(vectors)


def step_train(features: Path, labels: Path, cfg: PipelineConfig):
    vectors = sio.read_features(features)
    label_map = sio.read_labels(labels)
    labeled = [v for v in vectors if v.account_id in label_map]
    skipped = len(label_map) - len(labeled)
    if skipped:
        log.warning("%d labeled node(s) have no feature row and are ignored", skipped)
    if not labeled:
        raise InputError("no feature rows carry a label")
    stats = fit_normalization(labeled)
    X = normalize_matrix(as_matrix(labeled), stats)
    model = train(X, [label_map[v.account_id] for v in labeled], cfg.train_config(), stats)
    return model, model_to_json(model)


def step_score(model: LinearModel, features: Path):
    vectors = sio.read_features(features)
    probs = model.sybil_probabilities(as_matrix(vectors))
    priors = dict(zip((v.account_id for v in vectors), probs.tolist()))
    return priors, sio.priors_csv(priors)


def step_walk(edges: Path, labels: Path, priors: dict[str, float] | None, cfg: PipelineConfig):
    label_map = sio.read_labels(labels)
    graph = build_graph(
        sio.read_edges(edges),
        label_map,
        nodes=priors or (),
        strict=cfg["graph.strict_weights"],
    )
    walk_cfg = cfg.walk_config()
    init = initialize_scores(graph, priors, walk_cfg.seed_mode)
    result = sybilwalk(graph, init, walk_cfg)
    if result.iteration_count >= walk_cfg.max_iterations:
        log.warning("sybilwalk hit max_iterations=%d before converging", walk_cfg.max_iterations)
    unreachable = int((~result.reachable).sum())
    if unreachable:
        log.warning("%d node(s) cannot reach a label node; kept their prior", unreachable)
    return graph, result, sio.scores_csv(result)


def _walk_summary(graph, result: ScoreVector, threshold: float) -> dict:
    preds = {u: score_to_label(s, threshold) for u, s in result.as_dict().items()}
    return {
        "users": graph.n_users,
        "user_edges": len(graph.user_edges),
        "labeled": len(graph.labels),
        "components": len(connected_components(graph)),
        "iterations": result.iteration_count,
        "final_residual": result.final_residual,
        "unreachable": int((~result.reachable).sum()),
        "threshold": threshold,
        "predicted_fake": sum(1 for p in preds.values() if p == "fake"),
    }


def cmd_extract(args, cfg: PipelineConfig) -> None:
    _, text = step_extract(cfg.input_path("accounts"))
    _emit(text, cfg.path("features", required=False))


def cmd_train(args, cfg: PipelineConfig) -> None:
    _, text = step_train(cfg.input_path("features"), cfg.input_path("labels"), cfg)
    _emit(text, cfg.path("model", required=False))


def cmd_score(args, cfg: PipelineConfig) -> None:
    model = load_model(cfg.input_path("model"))
    _, text = step_score(model, cfg.input_path("features"))
    _emit(text, cfg.path("priors", required=False))


def cmd_walk(args, cfg: PipelineConfig) -> None:
    priors = None
    if cfg["walk.seed_mode"] == "svm" or cfg["paths.priors"] is not None:
        priors = sio.read_priors(cfg.input_path("priors"))
    _, _, text = step_walk(cfg.input_path("edges"), cfg.input_path("labels"), priors, cfg)
    _emit(text, cfg.path("scores", required=False))


def cmd_pipeline(args, cfg: PipelineConfig) -> None:
    accounts, edges, labels = (cfg.input_path(k) for k in ("accounts", "edges", "labels"))
    scores_path = cfg.path("scores")

    _, features_text = step_extract(accounts)
    features_path = cfg.path("features", required=False)
    tmp_dir = None
    if features_path is None:
        import tempfile

        tmp_dir = tempfile.TemporaryDirectory()
        features_path = Path(tmp_dir.name) / "features.csv"
    try:
        _emit(features_text, features_path)
        model, model_text = step_train(features_path, labels, cfg)
        if cfg["paths.model"] is not None:
            _emit(model_text, cfg.path("model"))
        priors, priors_text = step_score(model, features_path)
    finally:
        if tmp_dir is not None:
            tmp_dir.cleanup()
    if cfg["paths.priors"] is not None:
        _emit(priors_text, cfg.path("priors"))
    graph, result, scores_text = step_walk(edges, labels, priors, cfg)
    _emit(scores_text, scores_path)

    threshold = cfg["eval.threshold"]
    report: dict = {"walk": _walk_summary(graph, result, threshold)}
    if cfg["paths.ground_truth"] is not None:
        truth = sio.read_labels(cfg.input_path("ground_truth"))
        known = sio.read_labels(labels)
        hidden = {u: lab for u, lab in truth.items() if u not in known and u in priors}
        if hidden:
            walked = result.as_dict()
            for name, scores in (("svm_only", priors), ("hybrid", walked)):
                preds = {u: score_to_label(scores[u], threshold) for u in hidden}
                report[name] = evaluate(preds, hidden, threshold).to_dict()
    report_path = cfg.path("report", required=False) or scores_path.with_name("report.json")
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", report_path)


def cmd_synth(args, cfg: PipelineConfig) -> None:
    out_dir = cfg.path("out_dir")
    paths = sio.write_dataset(generate(cfg.synth_config()), out_dir)
    for key, path in paths.items():
        log.info("wrote %s: %s", key, path)


def cmd_eval(args, cfg: PipelineConfig) -> None:
    dataset = sio.read_dataset(
        *(cfg.input_path(k) for k in ("accounts", "edges", "labels", "ground_truth"))
    )
    variants = [v.strip() for v in cfg["eval.variants"].split(",") if v.strip()]
    bad = [v for v in variants if v not in VARIANTS]
    if bad:
        raise InputError(f"unknown variant(s) in eval.variants: {bad}")
    reports = {}
    for variant in variants:
        reports[variant] = run_experiment(
            dataset,
            variant,
            cfg["eval.k"],
            cfg["eval.rng_seed"],
            train_config=cfg.train_config(),
            walk_config=cfg.walk_config(),
            threshold=cfg["eval.threshold"],
            strict_weights=cfg["graph.strict_weights"],
        )
    tables = [format_table(r, f"[{name}] pooled over {cfg['eval.k']} folds") for name, r in reports.items()]
    sys.stdout.write("\n\n".join(tables) + "\n")
    report_path = cfg.path("report", required=False)
    if report_path is not None:
        _emit(reports_to_json(reports), report_path)


COMMANDS = {
    "extract": (cmd_extract, ["accounts"], "features", "accounts JSONL -> features CSV"),
    "train": (cmd_train, ["features", "labels"], "model", "features CSV + labels TSV -> model JSON"),
    "score": (cmd_score, ["model", "features"], "priors", "model + features -> prior scores CSV"),
    "walk": (cmd_walk, ["edges", "labels", "priors"], "scores", "SybilWalk over the labeled graph"),
    "pipeline": (cmd_pipeline, [], None, "extract, train, score and walk in one run"),
    "synth": (cmd_synth, [], "out_dir", "write a synthetic dataset directory"),
    "eval": (cmd_eval, [], "report", "k-fold comparison of svm_only / hybrid / uniform prior"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sybilwalk",
        description="Hybrid SVM + SybilWalk fake-account detection.",
        epilog="Any config key can be overridden with --section.key VALUE.",
    )
    parser.add_argument("--config", help="flat 'section.key = value' config file")
    parser.add_argument("--seed", type=int, help="override every rng seed in the config")
    parser.add_argument("--verbose", "-v", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, inputs, output, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        for key in inputs:
            p.add_argument(key, nargs="?", help=f"overrides paths.{key}")
        if output is not None:
            flag = ["-o", "--out"]
            p.add_argument(*flag, dest=output, help=f"overrides paths.{output}")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        rest, overrides = split_overrides(argv)
    except SybilWalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    args = build_parser().parse_args(rest)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        cfg = load_config(args.config)
        apply_overrides(cfg, overrides)
        if args.seed is not None:
            for key in SEED_KEYS:
                cfg.set(key, str(args.seed))
        handler, inputs, output, _ = COMMANDS[args.command]
        for key in inputs + ([output] if output else []):
            value = getattr(args, key, None)
            if value is not None:
                cfg.set(f"paths.{key}", value)
        handler(args, cfg)
    except SybilWalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (AssertionError, FloatingPointError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return InvariantViolation.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())

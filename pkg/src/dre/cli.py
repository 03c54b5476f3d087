"""Command-line entry point: train / eval / predict / mine / ablate / gradcheck.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
Every command with an --out directory writes a manifest.json next to its
artifacts and never writes outside that directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .train import (
    TrainingDiverged,
    ablate,
    ablation_table_tsv,
    evaluate,
    predict_pair,
    table8_grid,
    train as run_training,
)
from .checkpoint import CheckpointError, load_model
from .config import (
    ConfigError,
    TrainConfig,
    build_train_config,
    config_to_dict,
    parse_config_file,
)
from .data import DatasetError, load_dataset
from .embeddings import StoreFormatError, load_contextual_store
from .gradcheck import build_tiny_matcher, grad_check
from .manifest import utc_now, write_manifest
from .tfidf import DEFAULT_BAND, mine_negatives

__all__ = ["main", "run", "build_parser"]

GRADCHECK_TOLERANCE = 1e-4


def _add_model_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--seed", type=int, help="run seed (overrides train.seed)")
    p.add_argument("--layers", type=int, help="encoder layer count")
    p.add_argument("--hidden", type=int, help="encoder hidden size per direction")
    p.add_argument("--residual", choices=["on", "off"], help="dense residual wiring")
    p.add_argument("--mode", choices=["lookup", "contextual"], help="embedding provider")
    p.add_argument("--embeddings", help="contextual store path (DREE file)")
    p.add_argument("--max-len", type=int, dest="max_len", help="max joint sequence length")
    p.add_argument("--batch-size", type=int, dest="batch_size", help="batch size")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dre", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a matcher and write a checkpoint")
    _add_model_flags(p)
    p.add_argument("--train", dest="train_path", help="training set (overrides data.train_path)")
    p.add_argument("--dev", dest="dev_path", help="dev set (overrides data.dev_path)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--format", default="jsonl", choices=["jsonl", "tsv"])
    p.add_argument("--embeddings", help="contextual store path for contextual checkpoints")
    p.add_argument("--max-len", type=int, dest="max_len", default=100)
    p.add_argument("--batch-size", type=int, dest="batch_size", default=64)
    p.add_argument("--out", help="output directory for metrics.json")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="classify one text pair")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--text-a", required=True)
    p.add_argument("--text-b", required=True)
    p.add_argument("--max-len", type=int, dest="max_len", default=100)
    p.add_argument("--out", help="output directory for prediction.json")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("mine", help="mine similarity-band negative pairs")
    p.add_argument("--input", required=True, help="questions: .txt (one per line) or jsonl dataset")
    p.add_argument("--band", nargs=2, type=float, default=list(DEFAULT_BAND), metavar=("LOW", "HIGH"))
    p.add_argument("--label", default="not_match", help="label for emitted pairs")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("ablate", help="run the 9-row architecture ablation grid")
    _add_model_flags(p)
    p.add_argument("--train", dest="train_path")
    p.add_argument("--dev", dest="dev_path")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("gradcheck", help="finite-difference check of the full model gradient")
    p.add_argument("--dims", default="tiny", choices=["tiny"], help="model size preset")
    p.add_argument("--eps", type=float, default=3e-4)
    p.add_argument("--samples", type=int, default=8, help="coordinates sampled per parameter")
    p.add_argument("--out", help="output directory for gradcheck.json")
    p.set_defaults(func=cmd_gradcheck)

    return parser


def _resolve_config(args, require_data: bool) -> TrainConfig:
    file_values = parse_config_file(args.config) if getattr(args, "config", None) else {}
    overrides = {
        "seed": getattr(args, "seed", None),
        "num_layers": getattr(args, "layers", None),
        "hidden_size": getattr(args, "hidden", None),
        "mode": getattr(args, "mode", None),
        "embeddings_path": getattr(args, "embeddings", None),
        "max_len": getattr(args, "max_len", None),
        "batch_size": getattr(args, "batch_size", None),
        "train_path": getattr(args, "train_path", None),
        "dev_path": getattr(args, "dev_path", None),
    }
    if getattr(args, "residual", None) is not None:
        overrides["residual"] = args.residual == "on"
    cfg = build_train_config(file_values, overrides)
    cfg.validate(require_data=require_data)
    return cfg


def _load_split(cfg: TrainConfig):
    train_examples, train_labels = load_dataset(cfg.train_path, cfg.data_format)
    dev_examples, _ = load_dataset(cfg.dev_path, cfg.data_format)
    return train_examples, dev_examples, train_labels


def cmd_train(args) -> int:
    started = utc_now()
    cfg = _resolve_config(args, require_data=True)
    train_examples, dev_examples, labels = _load_split(cfg)
    result = run_training(cfg, train_examples, dev_examples, labels, out_dir=args.out)
    print(
        f"trained {cfg.max_epochs}-epoch budget: ran {len(result.log)} epochs, "
        f"best dev macro-F1 {result.best_dev_macro_f1:.4f} at epoch {result.best_epoch}"
    )
    print(f"checkpoint: {result.checkpoint_path}")
    write_manifest(
        args.out,
        "train",
        config_to_dict(cfg),
        cfg.seed,
        started,
        [result.checkpoint_path or "", result.log_path or ""],
        [cfg.train_path, cfg.dev_path, cfg.embeddings_path, getattr(args, "config", None)],
    )
    return 0


def cmd_eval(args) -> int:
    started = utc_now()
    model = load_model(args.checkpoint)
    examples, _ = load_dataset(args.data, args.format)
    store = None
    if model.config.mode == "contextual":
        if not args.embeddings:
            raise ConfigError("data.embeddings_path: contextual checkpoint needs --embeddings")
        store = load_contextual_store(args.embeddings, expected_dim=model.config.embedding_dim)
    metrics = evaluate(model, examples, args.batch_size, args.max_len, store)
    print(f"accuracy {metrics.accuracy:.4f}  macro-F1 {metrics.macro_f1:.4f}  n={metrics.total}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "metrics.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(metrics.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        write_manifest(
            args.out,
            "eval",
            {"checkpoint": args.checkpoint, "data": args.data, "format": args.format,
             "batch_size": args.batch_size, "max_len": args.max_len},
            model.config.seed,
            started,
            [path],
            [args.checkpoint, args.data, args.embeddings],
        )
    return 0


def cmd_predict(args) -> int:
    started = utc_now()
    model = load_model(args.checkpoint)
    label, probs = predict_pair(model, args.text_a, args.text_b, args.max_len)
    record = {
        "label": label,
        "probabilities": {lab: float(p) for lab, p in zip(model.config.labels, probs)},
    }
    print(json.dumps(record, sort_keys=True))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "prediction.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(record, fh, indent=2, sort_keys=True)
            fh.write("\n")
        write_manifest(
            args.out, "predict",
            {"checkpoint": args.checkpoint, "max_len": args.max_len},
            model.config.seed, started, [path], [args.checkpoint],
        )
    return 0


def _read_questions(path):
    if str(path).endswith((".jsonl", ".json")):
        examples, _ = load_dataset(path, "jsonl")
        return [ex.text_a for ex in examples], [ex.id for ex in examples]
    questions = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                questions.append(line)
    return questions, [f"q{i:05d}" for i in range(len(questions))]


def cmd_mine(args) -> int:
    started = utc_now()
    low, high = args.band
    questions, ids = _read_questions(args.input)
    pairs, unmatched = mine_negatives(questions, (low, high), ids=ids, label=args.label)
    os.makedirs(args.out, exist_ok=True)
    pairs_path = os.path.join(args.out, "negatives.jsonl")
    with open(pairs_path, "w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(json.dumps(
                {"id": p.id, "text_a": p.text_a, "text_b": p.text_b, "label": p.label},
                ensure_ascii=False) + "\n")
    unmatched_path = os.path.join(args.out, "unmatched.jsonl")
    with open(unmatched_path, "w", encoding="utf-8") as fh:
        for rec in unmatched:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    print(f"mined {len(pairs)} negatives in band [{low}, {high}]; {len(unmatched)} anchors unmatched")
    write_manifest(
        args.out, "mine",
        {"input": args.input, "band": [low, high], "label": args.label},
        0, started, [pairs_path, unmatched_path], [args.input],
    )
    return 0


def cmd_ablate(args) -> int:
    started = utc_now()
    cfg = _resolve_config(args, require_data=True)
    train_examples, dev_examples, labels = _load_split(cfg)
    grid = table8_grid(base_layers=3, base_hidden=cfg.hidden_size)
    rows = ablate(cfg, grid, train_examples, dev_examples, labels)
    table = ablation_table_tsv(rows, cfg)
    os.makedirs(args.out, exist_ok=True)
    table_path = os.path.join(args.out, "ablation.tsv")
    with open(table_path, "w", encoding="utf-8") as fh:
        fh.write(table)
    sys.stdout.write(table)
    write_manifest(
        args.out, "ablate", config_to_dict(cfg), cfg.seed, started,
        [table_path], [cfg.train_path, cfg.dev_path, getattr(args, "config", None)],
    )
    return 0


def cmd_gradcheck(args) -> int:
    started = utc_now()
    loss_fn, params, model = build_tiny_matcher()
    error = grad_check(loss_fn, params, eps=args.eps, samples_per_param=args.samples)
    ok = error < GRADCHECK_TOLERANCE
    print(f"max relative error {error:.3e} over {model.parameter_count()} parameters "
          f"({'PASS' if ok else 'FAIL'} at {GRADCHECK_TOLERANCE:.0e})")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "gradcheck.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"max_relative_error": error, "tolerance": GRADCHECK_TOLERANCE,
                       "passed": ok, "eps": args.eps, "samples_per_param": args.samples},
                      fh, indent=2, sort_keys=True)
            fh.write("\n")
        write_manifest(args.out, "gradcheck",
                       {"dims": args.dims, "eps": args.eps, "samples": args.samples},
                       model.config.seed, started, [path], [])
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (DatasetError, CheckpointError, StoreFormatError, TrainingDiverged,
            OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def run():  # console-script entry point
    raise SystemExit(main())

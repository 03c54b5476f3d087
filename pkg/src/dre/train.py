"""Training loop, evaluation, and the ablation grid runner."""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .checkpoint import save_model
from .config import ConfigError, TrainConfig
from .data import Batch, DatasetError, make_batches, make_contextual_batches
from .embeddings import ContextualStore, load_contextual_store
from .metrics import Metrics, compute_metrics
from .model import DreModel, ForwardResult, ModelConfig
from .optim import Adam, clip_gradients
from .sequence import build_joint_sequence
from .tokenization import tokenize
from .vocab import Vocabulary, build_vocabulary

__all__ = [
    "EpochRecord",
    "TrainResult",
    "TrainingDiverged",
    "train",
    "evaluate_model",
    "evaluate",
    "predict_pair",
    "AblationConfig",
    "AblationRow",
    "table8_grid",
    "ablate",
    "ablation_table_tsv",
]

CHECKPOINT_NAME = "checkpoint.dre1"
LOG_NAME = "log.jsonl"


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    dev_acc: float
    dev_macro_f1: float
    seconds: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "epoch": self.epoch,
                "train_loss": self.train_loss,
                "dev_acc": self.dev_acc,
                "dev_macro_f1": self.dev_macro_f1,
                "seconds": self.seconds,
            }
        )


@dataclass
class TrainResult:
    model: DreModel  # best-dev parameters restored
    log: list[EpochRecord]
    best_epoch: int
    best_dev_macro_f1: float
    checkpoint_path: str | None = None
    log_path: str | None = None


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; the best checkpoint so far is retained."""

    def __init__(self, message: str, result: TrainResult):
        super().__init__(message)
        self.result = result


def _epoch_seed(seed: int, epoch: int) -> int:
    return (seed * 1_000_003 + epoch) & 0x7FFFFFFF


def _build_model(config: TrainConfig, train_examples, labels):
    vocab = None
    store = None
    embedding_dim = config.embedding_dim
    if config.mode == "lookup":
        vocab = build_vocabulary(train_examples, config.min_frequency)
    else:
        if not config.embeddings_path:
            raise ConfigError("data.embeddings_path: contextual mode needs a store path")
        store = load_contextual_store(config.embeddings_path)
        embedding_dim = store.dim
    model_config = ModelConfig(
        labels=list(labels),
        mode=config.mode,
        embedding_dim=embedding_dim,
        num_layers=config.num_layers,
        hidden_size=config.hidden_size,
        residual=config.residual,
        dropout_retention=config.dropout_retention,
        head_hidden=config.head_hidden,
        seed=config.seed,
    )
    return DreModel(model_config, vocab), vocab, store


def _batches_for(model: DreModel, store, examples, batch_size, max_len, label_map, shuffle_seed=None):
    if model.config.mode == "lookup":
        return make_batches(examples, model.vocab, batch_size, max_len, label_map, shuffle_seed)
    return make_contextual_batches(examples, store, batch_size, max_len, label_map, shuffle_seed)


def train(
    config: TrainConfig,
    train_examples,
    dev_examples,
    labels,
    out_dir=None,
) -> TrainResult:
    """Adam training with per-epoch dev evaluation and best-F1 checkpointing.

    Stops at max_epochs or when dev macro-F1 has not improved for
    ``patience`` epochs. Divergence (non-finite loss) raises
    TrainingDiverged carrying the result; the best checkpoint written so
    far stays on disk. Fully reproducible under a fixed seed.
    """
    config.validate()
    labels = list(labels)
    label_map = {lab: i for i, lab in enumerate(labels)}
    for ex in dev_examples:
        if ex.label not in label_map:
            raise DatasetError(f"dev example '{ex.id}': unseen label '{ex.label}'")

    model, _, store = _build_model(config, train_examples, labels)
    optimizer = Adam(model.params, learning_rate=config.resolved_learning_rate())
    dev_batches = _batches_for(
        model, store, dev_examples, config.batch_size, config.max_len, label_map
    )

    ckpt_path = log_path = None
    log_fh = None
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        ckpt_path = os.path.join(out_dir, CHECKPOINT_NAME)
        log_path = os.path.join(out_dir, LOG_NAME)
        log_fh = open(log_path, "w", encoding="utf-8")

    best = model.snapshot()
    best_f1 = -1.0
    best_epoch = 0
    stale = 0
    log: list[EpochRecord] = []
    diverged_at = None

    try:
        for epoch in range(1, config.max_epochs + 1):
            t0 = time.perf_counter()
            batches = _batches_for(
                model,
                store,
                train_examples,
                config.batch_size,
                config.max_len,
                label_map,
                shuffle_seed=_epoch_seed(config.seed, epoch),
            )
            total_loss = 0.0
            seen = 0
            for batch in batches:
                model.zero_grad()
                out = model.forward_batch(batch, train=True)
                loss_value = float(out.loss.data)
                if not np.isfinite(loss_value):
                    diverged_at = epoch
                    break
                out.loss.backward()
                clip_gradients(model.params, config.clip_norm)
                optimizer.step()
                total_loss += loss_value * batch.size
                seen += batch.size
            if diverged_at is not None:
                break

            dev_metrics, _ = evaluate_model(model, dev_batches)
            record = EpochRecord(
                epoch=epoch,
                train_loss=total_loss / max(seen, 1),
                dev_acc=dev_metrics.accuracy,
                dev_macro_f1=dev_metrics.macro_f1,
                seconds=time.perf_counter() - t0,
            )
            log.append(record)
            if log_fh is not None:
                log_fh.write(record.to_json() + "\n")
                log_fh.flush()

            if dev_metrics.macro_f1 > best_f1:
                best_f1 = dev_metrics.macro_f1
                best_epoch = epoch
                best = model.snapshot()
                stale = 0
                if ckpt_path is not None:
                    save_model(ckpt_path, model)
            else:
                stale += 1
                if config.patience > 0 and stale >= config.patience:
                    break
    finally:
        if log_fh is not None:
            log_fh.close()

    model.load_arrays(best)
    if ckpt_path is not None:
        save_model(ckpt_path, model)  # also covers the zero-epoch case
    result = TrainResult(
        model=model,
        log=log,
        best_epoch=best_epoch,
        best_dev_macro_f1=max(best_f1, 0.0) if log else 0.0,
        checkpoint_path=ckpt_path,
        log_path=log_path,
    )
    if diverged_at is not None:
        raise TrainingDiverged(
            f"loss became non-finite in epoch {diverged_at}; "
            f"best checkpoint (epoch {best_epoch}) retained",
            result,
        )
    return result


def evaluate_model(model: DreModel, batches: list[Batch]):
    """Deterministic eval pass; returns (Metrics, list of (id, true, pred))."""
    y_true: list[int] = []
    y_pred: list[int] = []
    records = []
    for batch in batches:
        out = model.infer_batch(batch)
        preds = out.predictions
        for i, ex_id in enumerate(batch.example_ids):
            y_true.append(int(batch.labels[i]))
            y_pred.append(int(preds[i]))
            records.append((ex_id, y_true[-1], y_pred[-1]))
    metrics = compute_metrics(y_true, y_pred, model.config.n_classes)
    return metrics, records


def evaluate(
    model: DreModel,
    examples,
    batch_size: int = 64,
    max_len: int = 100,
    store: ContextualStore | None = None,
) -> Metrics:
    """Evaluate on a dataset; unseen labels are an error, order never matters."""
    label_map = {lab: i for i, lab in enumerate(model.config.labels)}
    for ex in examples:
        if ex.label not in label_map:
            raise DatasetError(f"example '{ex.id}': unseen label '{ex.label}'")
    batches = _batches_for(model, store, examples, batch_size, max_len, label_map)
    metrics, _ = evaluate_model(model, batches)
    return metrics


def predict_pair(model: DreModel, text_a: str, text_b: str, max_len: int = 100):
    """Label and probability vector for one text pair (lookup mode only)."""
    if not text_a.strip() or not text_b.strip():
        raise ValueError("predict_pair: empty text")
    if model.config.mode != "lookup":
        raise ValueError(
            "predict_pair needs lookup mode: contextual stores hold vectors "
            "only for exported example ids, not for new text"
        )
    q, p = tokenize(text_a), tokenize(text_b)
    seq = build_joint_sequence(q, p, model.vocab, max_len, pad_to=0)
    batch = Batch(
        token_ids=np.asarray([seq.token_ids], dtype=np.int64),
        segment_ids=np.asarray([seq.segment_ids], dtype=np.int64),
        mask=np.asarray([seq.mask], dtype=bool),
        labels=None,
        example_ids=["query"],
    )
    out = model.infer_batch(batch)
    probs = out.probs[0]
    return model.config.labels[int(probs.argmax())], probs


# -- ablation grid -----------------------------------------------------------


@dataclass
class AblationConfig:
    row_id: str
    description: str
    num_layers: int
    hidden_size: int
    residual: bool


@dataclass
class AblationRow:
    row_id: str
    description: str
    parameter_count: int
    train_macro_f1: float
    dev_macro_f1: float
    epochs_run: int


def table8_grid(base_layers: int = 3, base_hidden: int = 128, hidden_sizes=None, max_layers: int = 5):
    """The 9-row grid: layer sweep, hidden sweep, and the no-residual row."""
    if hidden_sizes is None:
        hidden_sizes = (base_hidden // 2, base_hidden, base_hidden * 2)
    grid = []
    for i, layers in enumerate(range(1, max_layers + 1)):
        grid.append(
            AblationConfig(f"1{chr(ord('a') + i)}", f"{layers}Layer-Lstm", layers, base_hidden, True)
        )
    for i, hidden in enumerate(hidden_sizes):
        grid.append(
            AblationConfig(f"2{chr(ord('a') + i)}", f"{base_layers}Lstm-{hidden}Hidden", base_layers, hidden, True)
        )
    grid.append(
        AblationConfig("3", f"{base_layers}Lstm_no_residual", base_layers, base_hidden, False)
    )
    return grid


def ablate(
    base_config: TrainConfig,
    grid: list[AblationConfig],
    train_examples,
    dev_examples,
    labels,
) -> list[AblationRow]:
    """Train and evaluate every grid row under the same seed and data."""
    rows = []
    for entry in grid:
        cfg = replace(
            base_config,
            num_layers=entry.num_layers,
            hidden_size=entry.hidden_size,
            residual=entry.residual,
        )
        result = train(cfg, train_examples, dev_examples, labels)
        train_metrics = evaluate(
            result.model, train_examples, batch_size=cfg.batch_size, max_len=cfg.max_len
        )
        dev_metrics = evaluate(
            result.model, dev_examples, batch_size=cfg.batch_size, max_len=cfg.max_len
        )
        rows.append(
            AblationRow(
                row_id=entry.row_id,
                description=entry.description,
                parameter_count=result.model.parameter_count(),
                train_macro_f1=train_metrics.macro_f1,
                dev_macro_f1=dev_metrics.macro_f1,
                epochs_run=len(result.log),
            )
        )
    return rows


def ablation_table_tsv(rows: list[AblationRow], base_config: TrainConfig) -> str:
    """TSV mirroring the ablation table layout; header notes artifact choices."""
    lines = [
        "# epochs/patience/seed are artifact choices: "
        f"max_epochs={base_config.max_epochs} patience={base_config.patience} seed={base_config.seed}",
        "id\tparameters\tparam_count\ttrain_f1\tdev_f1\tepochs",
    ]
    for r in rows:
        lines.append(
            f"{r.row_id}\t{r.description}\t{r.parameter_count}"
            f"\t{r.train_macro_f1:.4f}\t{r.dev_macro_f1:.4f}\t{r.epochs_run}"
        )
    return "\n".join(lines) + "\n"

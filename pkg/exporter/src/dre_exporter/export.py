"""Export jobs: dataset in, DREE store + report out."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .encoders import make_encoder
from .store import write_store

_FIELDS = ("id", "text_a", "text_b", "label")


class DatasetError(ValueError):
    pass


@dataclass
class ExportJob:
    dataset_path: str
    model_identifier: str
    output_path: str
    max_len: int = 100
    batch_size: int = 8
    data_format: str = "jsonl"


def read_pairs(path, fmt: str = "jsonl"):
    """Minimal reader for the shared dataset schema (jsonl or 4-column tsv)."""
    if fmt not in ("jsonl", "tsv"):
        raise DatasetError(f"unknown dataset format '{fmt}'")
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if fmt == "jsonl":
                record = json.loads(line)
                missing = [f for f in _FIELDS if f not in record]
                if missing:
                    raise DatasetError(f"{path}:{lineno}: missing field '{missing[0]}'")
                rows.append(tuple(str(record[f]) for f in _FIELDS))
            else:
                cols = line.split("\t")
                if len(cols) != 4:
                    raise DatasetError(f"{path}:{lineno}: expected 4 columns, got {len(cols)}")
                rows.append(tuple(cols))
    return rows


def export(job: ExportJob):
    """Encode every pair and write the store; returns the report dict.

    Deterministic given the model identifier and the dataset: inference
    mode, no dropout, ids emitted in file order.
    """
    encoder = make_encoder(job.model_identifier)
    rows = read_pairs(job.dataset_path, job.data_format)
    items = []
    lengths = []
    for ex_id, text_a, text_b, _label in rows:
        mat = encoder.encode_pair(text_a, text_b, job.max_len)
        if mat.shape[1] != encoder.hidden_size:
            raise RuntimeError(
                f"encoder emitted width {mat.shape[1]} for '{ex_id}', "
                f"declared hidden size is {encoder.hidden_size}"
            )
        items.append((ex_id, mat))
        lengths.append(mat.shape[0])
    count = write_store(job.output_path, encoder.hidden_size, items)
    return {
        "examples": count,
        "k": encoder.hidden_size,
        "mean_length": sum(lengths) / len(lengths) if lengths else 0.0,
        "max_length": max(lengths) if lengths else 0,
        "model": job.model_identifier,
        "dataset": str(job.dataset_path),
        "store": str(job.output_path),
    }

"""Small file-writing helpers shared by CLI and acceptance tests."""

import json


def write_jsonl_dataset(path, examples):
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(
                json.dumps(
                    {"id": ex.id, "text_a": ex.text_a, "text_b": ex.text_b, "label": ex.label},
                    ensure_ascii=False,
                )
                + "\n"
            )
    return path


def read_log_without_walltime(path):
    """Epoch log records with the wall-time field stripped, for byte-stable comparison."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            rec.pop("seconds", None)
            records.append(rec)
    return records


def read_manifest_without_timestamps(path):
    with open(path, encoding="utf-8") as fh:
        rec = json.load(fh)
    rec.pop("started_at", None)
    rec.pop("finished_at", None)
    return rec

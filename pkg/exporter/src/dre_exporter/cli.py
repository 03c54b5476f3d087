"""dre-export: write a DREE contextual store for a pair dataset."""

from __future__ import annotations

import argparse
import json
import sys

from .encoders import EncoderError
from .export import DatasetError, ExportJob, export
from .store import StoreWriteError


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dre-export", description=__doc__)
    p.add_argument("--dataset", required=True, help="pair dataset (jsonl or tsv)")
    p.add_argument("--format", default="jsonl", choices=["jsonl", "tsv"])
    p.add_argument(
        "--model",
        default="hash-64",
        help="encoder identifier: hash-<dim> (offline baseline) or hf:<model name>",
    )
    p.add_argument("--out", required=True, help="output store path (.dree)")
    p.add_argument("--max-len", type=int, dest="max_len", default=100)
    p.add_argument("--batch-size", type=int, dest="batch_size", default=8)
    p.add_argument("--report", help="also write the report as JSON here")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = ExportJob(
        dataset_path=args.dataset,
        model_identifier=args.model,
        output_path=args.out,
        max_len=args.max_len,
        batch_size=args.batch_size,
        data_format=args.format,
    )
    try:
        report = export(job)
    except (DatasetError, EncoderError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (StoreWriteError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(json.dumps(report, sort_keys=True))
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def run():
    raise SystemExit(main())

"""Contextual-vector exporter for the matcher's frozen embedding mode."""

from .encoders import EncoderError, HashProjectionEncoder, TransformersEncoder, make_encoder
from .export import DatasetError, ExportJob, export, read_pairs
from .sequence import joint_tokens, tokenize
from .store import MAGIC, StoreWriteError, write_store

__version__ = "0.1.0"

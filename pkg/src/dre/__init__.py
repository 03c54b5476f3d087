"""Sequence-pair matching toolkit.

A densely connected recursive Bi-LSTM encoder over token embeddings with
scalar attention, concatenated max/mean pooling, and a two-layer softmax
head, trained end to end with Adam on a from-scratch reverse-mode autodiff
core. Includes a TF-IDF similarity-band negative-pair miner, an ablation
grid runner, and a CLI (``dre``).
"""

from .attention import (
    apply_attention,
    assemble_attention_input,
    attention_input_width,
    attention_weights,
    pool,
)
from .autodiff import ShapeError, Tensor, no_grad, parameter, tensor
from .checkpoint import load_checkpoint, load_model, save_checkpoint, save_model
from .config import ConfigError, TrainConfig, build_train_config, parse_config_file
from .data import Batch, DatasetError, PairExample, load_dataset, make_batches, make_contextual_batches
from .embeddings import (
    ContextualStore,
    LookupEmbedding,
    StoreFormatError,
    load_contextual_store,
    write_contextual_store,
)
from .encoder import (
    EncoderConfig,
    LstmLayerParams,
    bilstm_layer,
    encode,
    encoder_param_count,
    init_encoder_params,
    layer_input_width,
    lstm_cell_step,
)
from .gradcheck import build_tiny_matcher, grad_check
from .head import HeadParams, head_logits, init_head_params, predict
from .metrics import Metrics, compute_metrics
from .model import DreModel, ModelConfig
from .optim import Adam, OptimizerError, clip_gradients
from .sequence import TokenSequence, build_joint_sequence
from .tfidf import DEFAULT_BAND, TfidfModel, cosine, mine_negatives, tfidf_fit
from .tokenization import tokenize
from .train import (
    AblationConfig,
    AblationRow,
    TrainingDiverged,
    TrainResult,
    ablate,
    ablation_table_tsv,
    evaluate,
    evaluate_model,
    predict_pair,
    table8_grid,
    train,
)
from .vocab import CLS_ID, PAD_ID, SEP_ID, UNK_ID, Vocabulary, build_vocabulary

__version__ = "0.1.0"

"""The 9-row architecture ablation: layer count, hidden width, residual switch."""

import random

from dre.config import TrainConfig
from dre.data import PairExample
from dre.train import ablate, ablation_table_tsv, table8_grid

rng = random.Random(1)
words = [f"w{i:02d}" for i in range(25)]
examples = []
for i in range(32):
    base = rng.sample(words, rng.randint(3, 5))
    if i % 2 == 0:
        other = base[:]
        rng.shuffle(other)
        label = "match"
    else:
        other = rng.sample(words, rng.randint(3, 5))
        label = "not_match"
    examples.append(PairExample(f"ex{i}", " ".join(base), " ".join(other), label))

base_config = TrainConfig(
    seed=5, embedding_dim=16, hidden_size=8, head_hidden=16,
    learning_rate=1e-3, batch_size=8, max_epochs=6, patience=0,
    dropout_retention=0.8, max_len=30,
)

# Rows 1a-1e sweep the layer count, 2a-2c the hidden width, row 3 drops the
# dense residual wiring. Every row trains under the same seed and data.
grid = table8_grid(base_layers=3, base_hidden=base_config.hidden_size)
rows = ablate(base_config, grid, examples, examples, ["match", "not_match"])
print(ablation_table_tsv(rows, base_config))

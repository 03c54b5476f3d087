"""Inside the model: dense residual wiring widths, attention weights, pooling."""

import numpy as np

from dre import autodiff as ad
from dre.attention import apply_attention, assemble_attention_input, attention_weights, pool
from dre.encoder import EncoderConfig, encode, encoder_param_count, init_encoder_params, layer_input_width

k, H, L = 16, 8, 3
on = EncoderConfig(num_layers=L, hidden_size=H, residual=True, dropout_retention=1.0)
off = EncoderConfig(num_layers=L, hidden_size=H, residual=False, dropout_retention=1.0)

# With the dense residual on, layer l sees the embeddings plus every earlier
# layer's output; off, it sees only its predecessor.
print("input widths, residual on: ", [layer_input_width(k, l, on) for l in (1, 2, 3)])
print("input widths, residual off:", [layer_input_width(k, l, off) for l in (1, 2, 3)])
print("encoder parameters on/off: ",
      encoder_param_count(k, on), "/", encoder_param_count(k, off))

rng = np.random.default_rng(0)
layers = init_encoder_params(k, on, rng)
T = 6
emb = np.zeros((1, T, k), dtype=np.float32)
emb[0, :4] = rng.normal(size=(4, k)).astype(np.float32)  # 4 real tokens, 2 padding
mask = np.array([[True] * 4 + [False] * 2])

outputs = encode(ad.tensor(emb), mask, on, layers)
print("per-layer output shapes:", [o.data.shape for o in outputs])
print("padded rows stay exactly zero:", bool(np.all(outputs[-1].data[0, 4:] == 0)))

# Attention scores one scalar per token over [emb; H1; H2; H3], then pooling
# concatenates the elementwise max and mean over the real tokens.
h_cat = assemble_attention_input(ad.tensor(emb), outputs)
w_a = ad.tensor(rng.normal(size=h_cat.data.shape[-1]).astype(np.float32))
a = attention_weights(h_cat, w_a, mask)
print("attention weights:", np.round(a.data[0], 3), "sum:", float(a.data.sum()))

x = pool(apply_attention(h_cat, a), mask)
print("pooled vector width:", x.data.shape[-1], "= 2 x", h_cat.data.shape[-1])

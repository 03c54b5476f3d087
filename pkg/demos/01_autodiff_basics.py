"""A tour of the autodiff core: build a graph, run backward, check it numerically."""

import numpy as np

from dre import autodiff as ad
from dre.gradcheck import grad_check

# Tensors wrap numpy arrays. Parameters track gradients; constants do not.
x = ad.parameter(np.array([[1.0, -2.0], [0.5, 3.0]]))
w = ad.parameter(np.array([[0.3], [-0.7]]))

# Ops execute eagerly and record the graph as they go.
h = ad.tanh(ad.matmul(x, w))      # (2, 1)
loss = ad.sum_all(ad.mul(h, h))   # scalar

print("loss =", float(loss.data))
loss.backward()
print("d loss / d w =\n", w.grad)

# The finite-difference checker replays the same computation with nudged
# parameters and reports the worst relative disagreement.
def loss_fn():
    hh = ad.tanh(ad.matmul(x, w))
    return ad.sum_all(ad.mul(hh, hh))

err = grad_check(loss_fn, {"x": x, "w": w}, eps=1e-5)
print(f"max relative error vs central differences: {err:.2e}")

# The fused softmax cross-entropy is the training loss: stable at extreme logits.
logits = ad.parameter(np.array([[30.0, -30.0, 0.0]]))
print("cross-entropy at label 0:", float(ad.cross_entropy_logits(logits, [0]).data))

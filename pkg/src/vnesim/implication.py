"""Learned fuzzy-implication operator and its training machinery.

Per substrate node, the 3x5 grid of antecedent membership values is
flattened into a single-channel 15-sample signal and pushed through two
convolutional layers and two fully connected layers.  The sigmoid head emits
one consequent membership value per output label, shared weights across
nodes, so the node count can vary freely.

Training minimizes a cross-entropy objective computed after center-of-gravity
defuzzification and sum-normalization of the per-node scores, so the backward
pass here propagates through that whole scoring tail before reaching the conv
and FC parameters.  The optimizer is plain SGD.

Two target modes exist:

* ``literal-eq20``: the defuzzified scores themselves are the (stop-gradient)
  target.  Because sum-normalized probabilities already minimize
  cross-entropy against a target proportional to the scores, this objective
  sits at a stationary point and its gradient is identically zero; it is kept
  for completeness and verified by tests.
* ``one-hot``: the target is the normalized indicator of the substrate nodes
  chosen in a successful embedding, which reinforces placements that worked.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .defuzz import ConsequentScale

LOG_EPS = 1e-12
TARGET_MODES = ("literal-eq20", "one-hot")


class NonFiniteError(RuntimeError):
    """A forward pass produced NaN/inf; carries the offending layer name."""

    def __init__(self, layer: str):
        super().__init__(f"non-finite values at layer {layer}")
        self.layer = layer


class TapeError(ValueError):
    """Backward was called without a recorded forward tape."""


class CheckpointError(ValueError):
    """Checkpoint file malformed or incompatible with the declared shape."""


@dataclass
class NetworkShape:
    feature_dims: int = 3
    labels_per_dim: int = 5
    conv_channels: tuple[int, int] = (8, 16)
    kernel_width: int = 3
    hidden_units: int = 64
    consequent_count: int = 5

    @property
    def signal_len(self) -> int:
        return self.feature_dims * self.labels_per_dim

    @property
    def flat_len(self) -> int:
        return self.conv_channels[1] * self.signal_len


PARAM_NAMES = ("w1", "b1", "w2", "b2", "w3", "b3", "w4", "b4")


@dataclass
class ImplicationNetwork:
    shape: NetworkShape
    w1: np.ndarray  # (c1, 1, k)
    b1: np.ndarray
    w2: np.ndarray  # (c2, c1, k)
    b2: np.ndarray
    w3: np.ndarray  # (flat, hidden)
    b3: np.ndarray
    w4: np.ndarray  # (hidden, q)
    b4: np.ndarray

    def params(self):
        return [(name, getattr(self, name)) for name in PARAM_NAMES]

    def copy(self) -> "ImplicationNetwork":
        return ImplicationNetwork(self.shape,
                                  *(getattr(self, n).copy() for n in PARAM_NAMES))


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    max_iterations: int = 50
    seed: int = 0
    target_mode: str = "literal-eq20"

    def validate(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.target_mode not in TARGET_MODES:
            raise ValueError(f"unknown target mode {self.target_mode!r}")


def truncated_normal(rng: np.random.Generator, size, std: float) -> np.ndarray:
    """Normal(0, std) samples redrawn until all fall inside +-3 std."""
    out = rng.normal(0.0, std, size)
    while True:
        bad = np.abs(out) > 3.0 * std
        if not bad.any():
            return out
        out[bad] = rng.normal(0.0, std, int(bad.sum()))


def init_weights(shape: NetworkShape, seed: int) -> ImplicationNetwork:
    """Truncated-normal weights with std sqrt(2 / fan_in); zero biases."""
    rng = np.random.default_rng(seed)
    c1, c2 = shape.conv_channels
    k = shape.kernel_width

    def draw(size, fan_in):
        return truncated_normal(rng, size, np.sqrt(2.0 / fan_in))

    return ImplicationNetwork(
        shape,
        w1=draw((c1, 1, k), 1 * k), b1=np.zeros(c1),
        w2=draw((c2, c1, k), c1 * k), b2=np.zeros(c2),
        w3=draw((shape.flat_len, shape.hidden_units), shape.flat_len),
        b3=np.zeros(shape.hidden_units),
        w4=draw((shape.hidden_units, shape.consequent_count), shape.hidden_units),
        b4=np.zeros(shape.consequent_count),
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _conv1d(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Same-padding 1-D convolution; x (n, c_in, L), w (c_out, c_in, K)."""
    K = w.shape[2]
    pad = (K - 1) // 2
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad)))
    windows = np.lib.stride_tricks.sliding_window_view(xp, K, axis=2)
    return np.einsum("nilk,oik->nol", windows, w) + b[None, :, None]


def _conv1d_backward(x: np.ndarray, w: np.ndarray, dout: np.ndarray):
    K = w.shape[2]
    pad = (K - 1) // 2
    L = x.shape[2]
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad)))
    windows = np.lib.stride_tricks.sliding_window_view(xp, K, axis=2)
    dw = np.einsum("nilk,nol->oik", windows, dout)
    db = dout.sum(axis=(0, 2))
    dxp = np.zeros_like(xp)
    for k in range(K):
        dxp[:, :, k:k + L] += np.einsum("nol,oi->nil", dout, w[:, :, k])
    return dw, db, dxp[:, :, pad:pad + L]


def _check_finite(arr: np.ndarray, layer: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(layer)


def forward(net: ImplicationNetwork, fuzzified: np.ndarray,
            record_tape: bool = False):
    """Per-node consequent memberships in (0, 1).

    ``fuzzified`` is (n, dims, labels) or a single (dims, labels) row.
    Returns the (n, q) output, plus the tape when ``record_tape`` is set.
    """
    f = np.asarray(fuzzified, dtype=float)
    single = f.ndim == 2
    if single:
        f = f[None, :, :]
    _check_finite(f, "input")
    n = f.shape[0]
    x0 = f.reshape(n, 1, net.shape.signal_len)

    z1 = _conv1d(x0, net.w1, net.b1)
    _check_finite(z1, "conv1")
    a1 = np.maximum(z1, 0.0)
    z2 = _conv1d(a1, net.w2, net.b2)
    _check_finite(z2, "conv2")
    a2 = np.maximum(z2, 0.0)
    flat = a2.reshape(n, net.shape.flat_len)
    z3 = flat @ net.w3 + net.b3
    _check_finite(z3, "fc1")
    a3 = np.maximum(z3, 0.0)
    z4 = a3 @ net.w4 + net.b4
    _check_finite(z4, "fc2")
    out = _sigmoid(z4)

    result = out[0] if single else out
    if not record_tape:
        return result
    tape = {"x0": x0, "z1": z1, "a1": a1, "z2": z2, "a2": a2,
            "flat": flat, "z3": z3, "a3": a3, "out": out}
    return result, tape


@dataclass
class Gradients:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray
    w4: np.ndarray
    b4: np.ndarray

    def params(self):
        return [(name, getattr(self, name)) for name in PARAM_NAMES]

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(g))) for _, g in self.params())


def loss(p, target) -> float:
    """Cross entropy -sum(target * log p), log clamped at LOG_EPS."""
    p = np.asarray(p, dtype=float)
    t = np.asarray(target, dtype=float)
    return float(-(t * np.log(np.maximum(p, LOG_EPS))).sum())


def backward(net: ImplicationNetwork, tape: dict, d_out: np.ndarray) -> Gradients:
    """Reverse-mode gradients given dLoss/dOutput at the sigmoid head."""
    if not isinstance(tape, dict) or "out" not in tape:
        raise TapeError("forward pass was not recorded")
    out = tape["out"]
    n = out.shape[0]

    dz4 = d_out * out * (1.0 - out)
    dw4 = tape["a3"].T @ dz4
    db4 = dz4.sum(axis=0)
    da3 = dz4 @ net.w4.T
    dz3 = da3 * (tape["z3"] > 0)
    dw3 = tape["flat"].T @ dz3
    db3 = dz3.sum(axis=0)
    dflat = dz3 @ net.w3.T
    da2 = dflat.reshape(n, net.shape.conv_channels[1], net.shape.signal_len)
    dz2 = da2 * (tape["z2"] > 0)
    dw2, db2, da1 = _conv1d_backward(tape["a1"], net.w2, dz2)
    dz1 = da1 * (tape["z1"] > 0)
    dw1, db1, _ = _conv1d_backward(tape["x0"], net.w1, dz1)
    return Gradients(dw1, db1, dw2, db2, dw3, db3, dw4, db4)


def scoring_tail(memberships: np.ndarray, scale: ConsequentScale):
    """Defuzzified scores o and probabilities p from consequent memberships."""
    v = scale.as_array()
    den = memberships.sum(axis=1)
    o = (memberships @ v) / den
    p = o / o.sum()
    return o, p, den


def episode_loss_and_gradients(net: ImplicationNetwork,
                               fuzzified: np.ndarray,
                               scale: ConsequentScale,
                               target: np.ndarray | None = None,
                               target_mode: str = "one-hot",
                               chosen: list[int] | None = None,
                               tape: dict | None = None):
    """Loss, probabilities and full parameter gradients for one episode.

    The gradient flows loss -> probabilities -> defuzzified scores ->
    consequent memberships -> conv/FC parameters.  ``target`` overrides the
    target construction; otherwise ``target_mode`` selects it (``one-hot``
    requires ``chosen``, the substrate nodes used by the embedding).
    """
    if tape is None:
        _, tape = forward(net, fuzzified, record_tape=True)
    out = tape["out"]
    v = scale.as_array()
    o, p, den = scoring_tail(out, scale)

    if target is None:
        if target_mode == "literal-eq20":
            target = o.copy()
        elif target_mode == "one-hot":
            if not chosen:
                raise ValueError("one-hot target needs the chosen nodes")
            target = np.zeros_like(o)
            target[list(chosen)] = 1.0 / len(chosen)
        else:
            raise ValueError(f"unknown target mode {target_mode!r}")
    t = np.asarray(target, dtype=float)

    value = loss(p, t)

    # d loss / d p, honoring the log clamp
    dp = np.where(p >= LOG_EPS, -t / np.maximum(p, LOG_EPS), 0.0)
    # p = o / sum(o)
    total = o.sum()
    do = dp / total - (dp * o).sum() / total ** 2
    # o_i = sum_l v_l m_il / sum_l m_il
    d_out = do[:, None] * (v[None, :] - o[:, None]) / den[:, None]

    grads = backward(net, tape, d_out)
    return value, p, grads


def sgd_step(net: ImplicationNetwork, grads: Gradients, mu: float) -> None:
    """In-place vanilla gradient descent update of every parameter."""
    for name, g in grads.params():
        getattr(net, name)[...] -= mu * g


def gradient_check(net: ImplicationNetwork, fuzzified: np.ndarray,
                   target: np.ndarray, scale: ConsequentScale | None = None,
                   eps: float = 1e-5, samples: int = 50,
                   seed: int = 0) -> float:
    """Max relative error between analytic and central-difference gradients.

    Samples parameter coordinates across every weight and bias array and
    perturbs each by +-eps on the full episode loss.
    """
    scale = scale or ConsequentScale()
    rng = np.random.default_rng(seed)
    analytic_val, _, grads = episode_loss_and_gradients(
        net, fuzzified, scale, target=target)
    del analytic_val

    def loss_at() -> float:
        m = forward(net, fuzzified)
        _, p, _ = scoring_tail(m, scale)
        return loss(p, target)

    names = list(PARAM_NAMES)
    worst = 0.0
    for _ in range(samples):
        name = names[rng.integers(len(names))]
        arr = getattr(net, name)
        flat_idx = int(rng.integers(arr.size))
        idx = np.unravel_index(flat_idx, arr.shape)
        orig = arr[idx]
        arr[idx] = orig + eps
        up = loss_at()
        arr[idx] = orig - eps
        down = loss_at()
        arr[idx] = orig
        numeric = (up - down) / (2.0 * eps)
        analytic = getattr(grads, name)[idx]
        rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)
        worst = max(worst, rel)
    return worst


CHECKPOINT_FORMAT = "vnesim-implication"
CHECKPOINT_VERSION = 1


def save_checkpoint(net: ImplicationNetwork, path: str) -> None:
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "shape": {
            "feature_dims": net.shape.feature_dims,
            "labels_per_dim": net.shape.labels_per_dim,
            "conv_channels": list(net.shape.conv_channels),
            "kernel_width": net.shape.kernel_width,
            "hidden_units": net.shape.hidden_units,
            "consequent_count": net.shape.consequent_count,
        },
        "params": {name: arr.tolist() for name, arr in net.params()},
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_checkpoint(path: str) -> ImplicationNetwork:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError("not an implication-network checkpoint")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported version {payload.get('version')}")
    s = payload["shape"]
    shape = NetworkShape(feature_dims=s["feature_dims"],
                         labels_per_dim=s["labels_per_dim"],
                         conv_channels=tuple(s["conv_channels"]),
                         kernel_width=s["kernel_width"],
                         hidden_units=s["hidden_units"],
                         consequent_count=s["consequent_count"])
    c1, c2 = shape.conv_channels
    expected = {
        "w1": (c1, 1, shape.kernel_width), "b1": (c1,),
        "w2": (c2, c1, shape.kernel_width), "b2": (c2,),
        "w3": (shape.flat_len, shape.hidden_units), "b3": (shape.hidden_units,),
        "w4": (shape.hidden_units, shape.consequent_count),
        "b4": (shape.consequent_count,),
    }
    arrays = {}
    for name in PARAM_NAMES:
        arr = np.asarray(payload["params"][name], dtype=float)
        if arr.shape != expected[name]:
            raise CheckpointError(
                f"shape mismatch for {name}: file {arr.shape}, "
                f"declared {expected[name]}")
        arrays[name] = arr
    return ImplicationNetwork(shape, **arrays)

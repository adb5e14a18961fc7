"""From-scratch CNN engine: forward, backprop, SGD, and local training.

Everything is plain numpy. Convolutions are valid-padding stride-1,
implemented as im2col + one GEMM; max pooling is 2x2 stride-2 floor-mode
with a first-max (row-major window order) tie-break; the loss is softmax
cross-entropy. Arithmetic runs in the dtype of the parameters, float32 by
default — cast params and batch to float64 for verification work such as
finite-difference gradient checks.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import EmptyShardError, ShapeMismatchError
from .params import FINGERPRINT_BYTES, ParamSet


@dataclass(frozen=True)
class Conv:
    filters: int
    kernel: int = 3


@dataclass(frozen=True)
class ReLU:
    pass


@dataclass(frozen=True)
class MaxPool:
    pass  # fixed 2x2 window, stride 2, floor mode


@dataclass(frozen=True)
class Flatten:
    pass


@dataclass(frozen=True)
class Dense:
    units: int


@dataclass(frozen=True)
class SoftmaxOutput:
    pass


Layer = Conv | ReLU | MaxPool | Flatten | Dense | SoftmaxOutput


@dataclass(frozen=True)
class ModelArch:
    layers: tuple[Layer, ...]
    input_shape: tuple[int, int, int] = (28, 28, 1)

    def shape_chain(self) -> list[tuple[int, ...]]:
        """Output shape after each layer, starting from input_shape.

        Raises ShapeMismatchError if consecutive layers do not chain legally
        or if a SoftmaxOutput appears anywhere but last.
        """
        shape: tuple[int, ...] = self.input_shape
        chain = [shape]
        for i, layer in enumerate(self.layers):
            if isinstance(layer, Conv):
                if len(shape) != 3:
                    raise ShapeMismatchError(f"conv needs a 3-d input, got {shape}")
                h, w, _ = shape
                if h < layer.kernel or w < layer.kernel:
                    raise ShapeMismatchError(
                        f"conv kernel {layer.kernel} too large for input {shape}"
                    )
                shape = (h - layer.kernel + 1, w - layer.kernel + 1, layer.filters)
            elif isinstance(layer, MaxPool):
                if len(shape) != 3 or shape[0] < 2 or shape[1] < 2:
                    raise ShapeMismatchError(f"maxpool needs >= 2x2 input, got {shape}")
                shape = (shape[0] // 2, shape[1] // 2, shape[2])
            elif isinstance(layer, ReLU):
                pass
            elif isinstance(layer, Flatten):
                if len(shape) != 3:
                    raise ShapeMismatchError(f"flatten needs a 3-d input, got {shape}")
                shape = (shape[0] * shape[1] * shape[2],)
            elif isinstance(layer, Dense):
                if len(shape) != 1:
                    raise ShapeMismatchError(f"dense needs a flat input, got {shape}")
                shape = (layer.units,)
            elif isinstance(layer, SoftmaxOutput):
                if i != len(self.layers) - 1:
                    raise ShapeMismatchError("softmax output must be the last layer")
                if len(shape) != 1:
                    raise ShapeMismatchError(f"softmax needs a flat input, got {shape}")
            else:  # pragma: no cover - descriptor set is closed
                raise ShapeMismatchError(f"unknown layer {layer!r}")
            chain.append(shape)
        return chain

    def param_names(self) -> list[tuple[str, Layer]]:
        """Stable (name, layer) pairs for every parameterized layer."""
        names = []
        counters = {"conv": 0, "dense": 0}
        for layer in self.layers:
            if isinstance(layer, Conv):
                counters["conv"] += 1
                names.append((f"conv{counters['conv']}", layer))
            elif isinstance(layer, Dense):
                counters["dense"] += 1
                names.append((f"dense{counters['dense']}", layer))
        return names

    def output_width(self) -> int:
        chain = self.shape_chain()
        return int(chain[-1][0])


def default_arch() -> ModelArch:
    """Conv16-ReLU-Pool-Conv12-ReLU-Pool-Conv10-ReLU-Flatten-Dense10-Softmax.

    Shape chain: 28x28x1 -> 26x26x16 -> 13x13x16 -> 11x11x12 -> 5x5x12
    -> 3x3x10 -> 90 -> 10.
    """
    return ModelArch(
        layers=(
            Conv(16),
            ReLU(),
            MaxPool(),
            Conv(12),
            ReLU(),
            MaxPool(),
            Conv(10),
            ReLU(),
            Flatten(),
            Dense(10),
            SoftmaxOutput(),
        )
    )


def arch_fingerprint(arch: ModelArch) -> bytes:
    """8-byte digest of the canonical architecture string."""
    parts = ["in:" + "x".join(str(d) for d in arch.input_shape)]
    for layer in arch.layers:
        if isinstance(layer, Conv):
            parts.append(f"conv:f{layer.filters}:k{layer.kernel}")
        elif isinstance(layer, ReLU):
            parts.append("relu")
        elif isinstance(layer, MaxPool):
            parts.append("pool2")
        elif isinstance(layer, Flatten):
            parts.append("flatten")
        elif isinstance(layer, Dense):
            parts.append(f"dense:{layer.units}")
        elif isinstance(layer, SoftmaxOutput):
            parts.append("softmax")
    canon = "|".join(parts).encode("ascii")
    return hashlib.sha256(canon).digest()[:FINGERPRINT_BYTES]


def init_params(arch: ModelArch, seed: int) -> ParamSet:
    """He-uniform weights (bound sqrt(6/fan_in)), zero biases, float32."""
    rng = np.random.default_rng(seed)
    chain = arch.shape_chain()
    entries: list[tuple[str, np.ndarray]] = []
    name_iter = iter(arch.param_names())
    shape = arch.input_shape
    for i, layer in enumerate(arch.layers):
        if isinstance(layer, Conv):
            name, _ = next(name_iter)
            c_in = shape[2]
            fan_in = layer.kernel * layer.kernel * c_in
            bound = math.sqrt(6.0 / fan_in)
            w = rng.uniform(
                -bound, bound, size=(layer.kernel, layer.kernel, c_in, layer.filters)
            ).astype(np.float32)
            entries.append((f"{name}.w", w))
            entries.append((f"{name}.b", np.zeros(layer.filters, dtype=np.float32)))
        elif isinstance(layer, Dense):
            name, _ = next(name_iter)
            fan_in = shape[0]
            bound = math.sqrt(6.0 / fan_in)
            w = rng.uniform(-bound, bound, size=(fan_in, layer.units)).astype(
                np.float32
            )
            entries.append((f"{name}.w", w))
            entries.append((f"{name}.b", np.zeros(layer.units, dtype=np.float32)))
        shape = chain[i + 1]
    return ParamSet(entries)


# --------------------------------------------------------------------------
# forward / backward primitives


def _pool_views(x: np.ndarray) -> list[np.ndarray]:
    """The four strided window-corner views of a 2x2/2 pooling, floor-cropped."""
    ho, wo = x.shape[1] // 2, x.shape[2] // 2
    return [x[:, u : ho * 2 : 2, v : wo * 2 : 2, :] for u in (0, 1) for v in (0, 1)]


def _conv_forward(x, w, b):
    kh, kw, c_in, f = w.shape
    batch, h, width, _ = x.shape
    ho, wo = h - kh + 1, width - kw + 1
    cols = sliding_window_view(x, (kh, kw, c_in), axis=(1, 2, 3)).reshape(
        batch * ho * wo, kh * kw * c_in
    )
    out = (cols @ w.reshape(-1, f)).reshape(batch, ho, wo, f) + b
    return out, cols


def _conv_backward(x_shape, w, cols, dout, need_dx):
    kh, kw, c_in, f = w.shape
    batch = x_shape[0]
    ho, wo = dout.shape[1], dout.shape[2]
    dout2 = dout.reshape(-1, f)
    dw = (cols.T @ dout2).reshape(w.shape)
    db = dout.sum(axis=(0, 1, 2))
    dx = None
    if need_dx:
        dcols = (dout2 @ w.reshape(-1, f).T).reshape(batch, ho, wo, kh, kw, c_in)
        dx = np.zeros(x_shape, dtype=dout.dtype)
        for u in range(kh):
            for v in range(kw):
                dx[:, u : u + ho, v : v + wo, :] += dcols[:, :, :, u, v, :]
    return dx, dw, db


def _pool_forward(x):
    views = _pool_views(x)
    out = np.maximum(np.maximum(views[0], views[1]), np.maximum(views[2], views[3]))
    return out


def _pool_backward(x, out, dout):
    # route each output gradient to the first maximal position in row-major
    # window order; the cascading "unclaimed" mask enforces exactly one hit
    dx = np.zeros_like(x)
    unclaimed = np.ones(out.shape, dtype=bool)
    for xv, dv in zip(_pool_views(x), _pool_views(dx)):
        hit = (xv == out) & unclaimed
        dv += dout * hit
        unclaimed &= ~hit
    return dx


def _check_batch(arch: ModelArch, batch: np.ndarray) -> None:
    if batch.ndim != 4 or batch.shape[1:] != arch.input_shape:
        raise ShapeMismatchError(
            f"batch shape {batch.shape} does not match (B, {arch.input_shape})"
        )


def _run_forward(arch: ModelArch, params: ParamSet, batch: np.ndarray, keep: bool):
    """Walk the layer stack; with keep=True, retain per-layer backward caches."""
    _check_batch(arch, batch)
    x = batch
    caches: list[tuple] = []
    name_iter = iter(arch.param_names())
    for layer in arch.layers:
        if isinstance(layer, Conv):
            name, _ = next(name_iter)
            w, b = params[f"{name}.w"], params[f"{name}.b"]
            out, cols = _conv_forward(x, w, b)
            caches.append((name, x.shape, cols if keep else None))
            x = out
        elif isinstance(layer, ReLU):
            caches.append((x if keep else None,))
            x = np.maximum(x, 0)
        elif isinstance(layer, MaxPool):
            out = _pool_forward(x)
            caches.append((x if keep else None, out if keep else None))
            x = out
        elif isinstance(layer, Flatten):
            caches.append((x.shape,))
            x = x.reshape(x.shape[0], -1)
        elif isinstance(layer, Dense):
            name, _ = next(name_iter)
            w, b = params[f"{name}.w"], params[f"{name}.b"]
            caches.append((name, x if keep else None))
            x = x @ w + b
        elif isinstance(layer, SoftmaxOutput):
            caches.append(())
    return x, caches


def forward(arch: ModelArch, params: ParamSet, batch: np.ndarray) -> np.ndarray:
    """Logits of shape (B, output_width); softmax itself lives in the loss."""
    logits, _ = _run_forward(arch, params, batch, keep=False)
    return logits


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def _loss_grad_logits(arch, params, batch, labels):
    labels = np.asarray(labels)
    if labels.ndim != 1 or len(labels) != len(batch):
        raise ShapeMismatchError(
            f"labels shape {labels.shape} does not match batch of {len(batch)}"
        )
    width = arch.output_width()
    if labels.size and (labels.min() < 0 or labels.max() >= width):
        raise ShapeMismatchError(f"labels must lie in [0, {width - 1}]")
    logits, caches = _run_forward(arch, params, batch, keep=True)
    probs = softmax(logits)
    n = len(batch)
    eps = np.finfo(logits.dtype).tiny
    loss = float(-np.log(probs[np.arange(n), labels] + eps).mean())
    dlogits = probs.copy()
    dlogits[np.arange(n), labels] -= 1
    dlogits /= n

    grads: dict[str, np.ndarray] = {}
    g = dlogits
    for index in range(len(arch.layers) - 1, -1, -1):
        layer = arch.layers[index]
        cache = caches[index]
        if isinstance(layer, SoftmaxOutput):
            continue
        if isinstance(layer, Dense):
            name, x_in = cache
            w = params[f"{name}.w"]
            grads[f"{name}.w"] = x_in.T @ g
            grads[f"{name}.b"] = g.sum(axis=0)
            g = g @ w.T
        elif isinstance(layer, Flatten):
            g = g.reshape(cache[0])
        elif isinstance(layer, MaxPool):
            x_in, out = cache
            g = _pool_backward(x_in, out, g)
        elif isinstance(layer, ReLU):
            g = g * (cache[0] > 0)
        elif isinstance(layer, Conv):
            name, x_shape, cols = cache
            w = params[f"{name}.w"]
            dx, dw, db = _conv_backward(x_shape, w, cols, g, need_dx=index > 0)
            grads[f"{name}.w"] = dw
            grads[f"{name}.b"] = db
            g = dx
    grad_set = ParamSet((name, grads[name]) for name in params.names)
    return loss, grad_set, logits


def loss_and_grad(
    arch: ModelArch, params: ParamSet, batch: np.ndarray, labels: np.ndarray
) -> tuple[float, ParamSet]:
    """Mean softmax cross-entropy and its gradient w.r.t. every parameter."""
    loss, grads, _ = _loss_grad_logits(arch, params, batch, labels)
    return loss, grads


def sgd_step(params: ParamSet, grads: ParamSet, lr: float) -> ParamSet:
    """out = params - lr * grads, elementwise; lr = 0 is the exact identity."""
    params.require_same_structure(grads)
    if lr < 0:
        raise ValueError(f"learning rate must be >= 0, got {lr}")
    return ParamSet(
        (name, p - lr * g)
        for (name, p), (_, g) in zip(params.items(), grads.items())
    )


@dataclass(frozen=True)
class TrainReport:
    """Per-epoch mean loss and on-the-fly training accuracy."""

    epoch_loss: tuple[float, ...] = field(default_factory=tuple)
    epoch_accuracy: tuple[float, ...] = field(default_factory=tuple)


def train_local(
    arch: ModelArch,
    params: ParamSet,
    images: np.ndarray,
    labels: np.ndarray,
    epochs: int,
    lr: float,
    batch_size: int,
    seed: int,
) -> tuple[ParamSet, TrainReport]:
    """Mini-batch SGD with a seeded per-epoch reshuffle; inputs untouched."""
    n = len(images)
    if n == 0:
        raise EmptyShardError("cannot train on an empty shard")
    if epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {epochs}")
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    rng = np.random.default_rng(seed)
    current = params
    losses, accuracies = [], []
    for _ in range(epochs):
        order = rng.permutation(n)
        loss_sum = 0.0
        correct = 0
        for start in range(0, n, batch_size):
            take = order[start : start + batch_size]
            batch, batch_labels = images[take], labels[take]
            loss, grads, logits = _loss_grad_logits(arch, current, batch, batch_labels)
            current = sgd_step(current, grads, lr)
            loss_sum += loss * len(take)
            correct += int((np.argmax(logits, axis=1) == batch_labels).sum())
        losses.append(loss_sum / n)
        accuracies.append(correct / n)
    return current, TrainReport(tuple(losses), tuple(accuracies))


def predict(
    arch: ModelArch, params: ParamSet, images: np.ndarray, batch_size: int = 512
) -> np.ndarray:
    """Argmax class per sample; ties resolve to the lower class index."""
    out = np.empty(len(images), dtype=np.int64)
    for start in range(0, len(images), batch_size):
        logits = forward(arch, params, images[start : start + batch_size])
        out[start : start + len(logits)] = np.argmax(logits, axis=1)
    return out


def evaluate(
    arch: ModelArch,
    params: ParamSet,
    images: np.ndarray,
    labels: np.ndarray,
    batch_size: int = 512,
) -> tuple[float, float]:
    """(accuracy, mean loss) over a dataset, streamed in batches."""
    n = len(images)
    if n == 0:
        raise EmptyShardError("cannot evaluate on an empty set")
    correct = 0
    loss_sum = 0.0
    for start in range(0, n, batch_size):
        batch = images[start : start + batch_size]
        batch_labels = labels[start : start + batch_size]
        logits = forward(arch, params, batch)
        probs = softmax(logits)
        eps = np.finfo(logits.dtype).tiny
        picked = probs[np.arange(len(batch)), batch_labels]
        loss_sum += float(-np.log(picked + eps).sum())
        correct += int((np.argmax(logits, axis=1) == batch_labels).sum())
    return correct / n, loss_sum / n

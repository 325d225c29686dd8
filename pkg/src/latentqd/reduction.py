"""Dimensionality reduction from sensory data to latent descriptors.

A fully-connected autoencoder (tanh hidden layers, linear outputs) trained
online with Adam on mean squared reconstruction error, plus a PCA-based
linear alternative expressed in the same model structure. Training is
incremental: the model is initialised once and never reset, each call to
`train` fine-tunes the current parameters.
"""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
GRAD_CLIP_NORM = 10.0
MAX_TRAIN_SAMPLES = 10_000

_ACTIVATIONS = ("tanh", "linear")


@dataclass
class Layer:
    weights: np.ndarray  # (fan_in, fan_out)
    biases: np.ndarray  # (fan_out,)
    activation: str  # "tanh" | "linear"

    def __post_init__(self):
        if self.activation not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")


class Autoencoder:
    """Encoder/decoder stack of dense layers mapping input_dim -> n -> input_dim."""

    def __init__(self, encoder_layers: list[Layer], decoder_layers: list[Layer]):
        self.encoder_layers = encoder_layers
        self.decoder_layers = decoder_layers
        self.input_dim = encoder_layers[0].weights.shape[0]
        self.latent_dim = encoder_layers[-1].weights.shape[1]
        if decoder_layers[0].weights.shape[0] != self.latent_dim:
            raise ValueError("decoder input dim must equal latent dim")
        if decoder_layers[-1].weights.shape[1] != self.input_dim:
            raise ValueError("decoder output dim must equal input dim")

    @property
    def layers(self) -> list[Layer]:
        return self.encoder_layers + self.decoder_layers

    def parameters(self) -> list[np.ndarray]:
        params = []
        for layer in self.layers:
            params.append(layer.weights)
            params.append(layer.biases)
        return params

    # -- forward passes ------------------------------------------------------

    def _forward(self, x: np.ndarray, layers: list[Layer]) -> np.ndarray:
        h = x
        for layer in layers:
            h = h @ layer.weights + layer.biases
            if layer.activation == "tanh":
                h = np.tanh(h)
        return h

    def encode(self, sd: np.ndarray) -> np.ndarray:
        """Deterministic projection of sensory data into the latent space.

        Accepts a single vector (dim,) or a batch (count, dim).
        """
        x = np.asarray(sd, dtype=np.float64)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        if x.shape[1] != self.input_dim:
            raise ValueError(f"input dim {x.shape[1]} != model dim {self.input_dim}")
        z = self._forward(x, self.encoder_layers)
        return z[0] if single else z

    def decode(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        single = z.ndim == 1
        if single:
            z = z[None, :]
        if z.shape[1] != self.latent_dim:
            raise ValueError(f"latent dim {z.shape[1]} != model dim {self.latent_dim}")
        out = self._forward(z, self.decoder_layers)
        return out[0] if single else out

    def reconstruction_error(self, sd: np.ndarray) -> float | np.ndarray:
        """Mean squared error between input and its reconstruction.

        Scalar for a single vector, per-sample vector for a batch. This is
        the surprise score used by surprise-proportional selection.
        """
        x = np.asarray(sd, dtype=np.float64)
        single = x.ndim == 1
        recon = self.decode(self.encode(x))
        err = np.mean((recon - x) ** 2, axis=-1)
        return float(err) if single else err


def fc_autoencoder(
    input_dim: int,
    hidden: list[int],
    latent_dim: int,
    rng: np.random.Generator,
) -> Autoencoder:
    """Build a tanh/linear autoencoder with mirrored hidden sizes.

    Encoder: input -> hidden... -> latent (linear output); decoder mirrors
    the hidden stack back to input (linear output). Weights are drawn
    uniformly in +/- sqrt(6 / (fan_in + fan_out)), biases start at zero.
    """

    def make_layers(sizes: list[int]) -> list[Layer]:
        layers = []
        for i in range(len(sizes) - 1):
            fan_in, fan_out = sizes[i], sizes[i + 1]
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            w = rng.uniform(-limit, limit, size=(fan_in, fan_out))
            b = np.zeros(fan_out)
            act = "linear" if i == len(sizes) - 2 else "tanh"
            layers.append(Layer(w, b, act))
        return layers

    enc = make_layers([input_dim] + list(hidden) + [latent_dim])
    dec = make_layers([latent_dim] + list(reversed(hidden)) + [input_dim])
    return Autoencoder(enc, dec)


# -- gradients -------------------------------------------------------------------


def gradient(model: Autoencoder, minibatch: np.ndarray) -> list[np.ndarray]:
    """Analytic gradient of the mean squared reconstruction error.

    Loss = mean over batch entries and dimensions of (output - input)^2.
    Returns one array per parameter, aligned with `model.parameters()`.
    Computation runs in the dtype of the model parameters.
    """
    x = np.asarray(minibatch, dtype=model.encoder_layers[0].weights.dtype)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[0] == 0:
        raise ValueError("empty minibatch")
    layers = model.layers
    # forward, keeping inputs and post-activation outputs of each layer
    inputs = []
    h = x
    for layer in layers:
        inputs.append(h)
        h = h @ layer.weights + layer.biases
        if layer.activation == "tanh":
            h = np.tanh(h)
        # keep activated output for the tanh derivative on the way back
        inputs.append(h)
    out = h
    batch, dim = x.shape
    delta = 2.0 * (out - x) / (batch * dim)  # dL/d(out)
    grads: list[np.ndarray] = [np.empty(0)] * (2 * len(layers))
    for li in range(len(layers) - 1, -1, -1):
        layer = layers[li]
        layer_in = inputs[2 * li]
        layer_out = inputs[2 * li + 1]
        if layer.activation == "tanh":
            delta = delta * (1.0 - layer_out**2)
        grads[2 * li] = layer_in.T @ delta
        grads[2 * li + 1] = delta.sum(axis=0)
        if li > 0:
            delta = delta @ layer.weights.T
    return grads


def clip_gradients(grads: list[np.ndarray], max_norm: float = GRAD_CLIP_NORM) -> float:
    """Scale gradients in place so their global L2 norm is at most max_norm."""
    total = np.sqrt(sum(float(np.sum(g**2)) for g in grads))
    if total > max_norm and total > 0.0:
        scale = max_norm / total
        for g in grads:
            g *= scale
    return total


# -- Adam ------------------------------------------------------------------------


@dataclass
class AdamState:
    """First/second-moment accumulators, one pair per parameter array."""

    learning_rate: float
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)
    step_count: int = 0
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps_hat: float = ADAM_EPS

    @classmethod
    def for_model(cls, model: Autoencoder, learning_rate: float) -> "AdamState":
        params = model.parameters()
        return cls(
            learning_rate=learning_rate,
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
        )

    def apply(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        self.step_count += 1
        t = self.step_count
        lr = self.learning_rate
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g**2
            m_hat = m / (1.0 - self.beta1**t)
            v_hat = v / (1.0 - self.beta2**t)
            p -= lr * m_hat / (np.sqrt(v_hat) + self.eps_hat)


@dataclass
class TrainConfig:
    epochs: int = 25
    minibatch: int = 64
    learning_rate: float = 1e-3
    dtype: str = "float64"  # "float32" runs the update loop in single precision

    def __post_init__(self):
        if self.epochs < 0 or self.minibatch < 1 or self.learning_rate <= 0:
            raise ValueError("invalid training configuration")
        if self.dtype not in ("float32", "float64"):
            raise ValueError(f"unsupported training dtype {self.dtype!r}")


def train(
    model: Autoencoder,
    dataset: np.ndarray | list,
    cfg: TrainConfig,
    adam: AdamState,
    rng: np.random.Generator,
) -> tuple[Autoencoder, AdamState]:
    """Minibatch Adam on MSE reconstruction loss, continuing from the
    current parameters. Mutates model and adam in place and returns them.

    Datasets above MAX_TRAIN_SAMPLES are subsampled uniformly to bound the
    cost of one update.
    """
    data = np.asarray(dataset, dtype=np.float64)
    if data.ndim == 1:
        data = data[None, :]
    if data.shape[0] == 0:
        log.warning("train called with empty dataset; skipping update")
        return model, adam
    if data.shape[1] != model.input_dim:
        raise ValueError(f"dataset dim {data.shape[1]} != model dim {model.input_dim}")
    if data.shape[0] > MAX_TRAIN_SAMPLES:
        keep = rng.choice(data.shape[0], size=MAX_TRAIN_SAMPLES, replace=False)
        data = data[np.sort(keep)]

    single = cfg.dtype == "float32" and cfg.epochs > 0
    if single:
        # run the whole update in float32, then publish float64 parameters
        data = data.astype(np.float32)
        for layer in model.layers:
            layer.weights = layer.weights.astype(np.float32)
            layer.biases = layer.biases.astype(np.float32)
        adam.m = [a.astype(np.float32) for a in adam.m]
        adam.v = [a.astype(np.float32) for a in adam.v]

    params = model.parameters()
    n = data.shape[0]
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.minibatch):
            batch = data[order[start : start + cfg.minibatch]]
            grads = gradient(model, batch)
            clip_gradients(grads)
            adam.apply(params, grads)

    if single:
        for layer in model.layers:
            layer.weights = layer.weights.astype(np.float64)
            layer.biases = layer.biases.astype(np.float64)
        adam.m = [a.astype(np.float64) for a in adam.m]
        adam.v = [a.astype(np.float64) for a in adam.v]
    return model, adam


# -- PCA alternative -------------------------------------------------------------


def pca_fit(dataset: np.ndarray | list, n: int) -> Autoencoder:
    """Linear encoder from the top-n principal components of the dataset.

    encode(x) = (x - mean) @ V_n, decode(z) = z @ V_n^T + mean, with V_n the
    orthonormal leading components. Signs are fixed so each component's
    largest-magnitude entry is positive.
    """
    data = np.asarray(dataset, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError("pca_fit expects a (samples, dim) dataset")
    if data.shape[0] < n:
        raise ValueError(f"need at least {n} samples to fit {n} components")
    mean = data.mean(axis=0)
    _, _, vt = np.linalg.svd(data - mean, full_matrices=False)
    comps = vt[:n]
    flips = np.sign(comps[np.arange(n), np.argmax(np.abs(comps), axis=1)])
    comps = comps * flips[:, None]
    v = comps.T  # (dim, n)
    enc = [Layer(v.copy(), -mean @ v, "linear")]
    dec = [Layer(v.T.copy(), mean.copy(), "linear")]
    return Autoencoder(enc, dec)


# -- update schedule -------------------------------------------------------------


def encoder_update_schedule(k: int) -> int:
    """Iteration of the k-th encoder update: 10, 30, 60, 100, 150, ...

    Gaps grow linearly: update k+1 happens 10*(k+1) iterations after k.
    """
    if k < 1:
        raise ValueError("update index starts at 1")
    return 5 * k * (k + 1)


def schedule_iterations(max_iteration: int) -> list[int]:
    """All encoder-update iterations up to and including max_iteration."""
    out = []
    k = 1
    while encoder_update_schedule(k) <= max_iteration:
        out.append(encoder_update_schedule(k))
        k += 1
    return out


# -- checkpoint format -----------------------------------------------------------

_CKPT_MAGIC = b"LQAE"
_CKPT_VERSION = 1


def save_model(model: Autoencoder, path) -> None:
    """Versioned header (json) followed by row-major float64 parameter arrays."""
    header = {
        "version": _CKPT_VERSION,
        "input_dim": model.input_dim,
        "latent_dim": model.latent_dim,
        "encoder": [
            {"shape": list(l.weights.shape), "activation": l.activation}
            for l in model.encoder_layers
        ],
        "decoder": [
            {"shape": list(l.weights.shape), "activation": l.activation}
            for l in model.decoder_layers
        ],
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(_CKPT_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for layer in model.layers:
            fh.write(np.ascontiguousarray(layer.weights, dtype=np.float64).tobytes())
            fh.write(np.ascontiguousarray(layer.biases, dtype=np.float64).tobytes())


def load_model(path) -> Autoencoder:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _CKPT_MAGIC:
            raise ValueError(f"{path}: not a model checkpoint")
        (blob_len,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(blob_len))
        if header["version"] != _CKPT_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {header['version']}")

        def read_layers(specs):
            layers = []
            for spec in specs:
                fan_in, fan_out = spec["shape"]
                w = np.frombuffer(fh.read(8 * fan_in * fan_out)).reshape(fan_in, fan_out)
                b = np.frombuffer(fh.read(8 * fan_out))
                layers.append(Layer(w.copy(), b.copy(), spec["activation"]))
            return layers

        enc = read_layers(header["encoder"])
        dec = read_layers(header["decoder"])
    return Autoencoder(enc, dec)

"""Pairwise coreference scorer: a two-layer MLP with a sigmoid output.

Trained from scratch with binary cross-entropy and Adam over shuffled
minibatches; scoring a pair evaluates both directional representations
and averages the two probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .binio import Reader, Writer
from .embedstore import AB, BA, FusedRepresentation, PairRepresentation
from .errors import FormatError, TrainingDivergedError, ValidationError

_MAGIC = b"PSC1"
_VERSION = 1
_ACTIVATIONS = {"relu": 0}
_ACTIVATION_NAMES = {0: "relu"}

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

# Probabilities are clamped into the open interval so downstream code
# can rely on 0 < s < 1 even for saturating logits.
_P_LO = np.nextafter(0.0, 1.0)
_P_HI = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class ScorerConfig:
    input_dim: int
    hidden1: int = 768
    hidden2: int = 128
    activation: str = "relu"
    epochs: int = 10
    learning_rate: float = 1e-4
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("input_dim", "hidden1", "hidden2", "epochs", "batch_size"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive, got {getattr(self, name)}")
        if self.learning_rate <= 0:
            raise ValidationError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.activation not in _ACTIVATIONS:
            raise ValidationError(f"unsupported activation {self.activation!r}")


@dataclass(frozen=True)
class ScorerParams:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    W3: np.ndarray
    b3: np.ndarray
    config: ScorerConfig

    def __post_init__(self) -> None:
        c = self.config
        expected = {
            "W1": (c.hidden1, c.input_dim),
            "b1": (c.hidden1,),
            "W2": (c.hidden2, c.hidden1),
            "b2": (c.hidden2,),
            "W3": (1, c.hidden2),
            "b3": (1,),
        }
        for name, shape in expected.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValidationError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"non-finite values in {name}")

    def blocks(self) -> dict[str, np.ndarray]:
        return {"W1": self.W1, "b1": self.b1, "W2": self.W2,
                "b2": self.b2, "W3": self.W3, "b3": self.b3}

    def n_parameters(self) -> int:
        return sum(arr.size for arr in self.blocks().values())


@dataclass(frozen=True)
class PairScore:
    pair: tuple[str, str]
    s_ab: float
    s_ba: float

    @property
    def s_mean(self) -> float:
        return (self.s_ab + self.s_ba) / 2.0


def init_scorer(config: ScorerConfig) -> ScorerParams:
    """Scaled-uniform fan-in initialization; biases zero; seeded."""
    rng = np.random.default_rng(config.seed)

    def layer(fan_out: int, fan_in: int) -> np.ndarray:
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=(fan_out, fan_in))

    return ScorerParams(
        W1=layer(config.hidden1, config.input_dim),
        b1=np.zeros(config.hidden1),
        W2=layer(config.hidden2, config.hidden1),
        b2=np.zeros(config.hidden2),
        W3=layer(1, config.hidden2),
        b3=np.zeros(1),
        config=config,
    )


def _as_batch(x: np.ndarray, input_dim: int) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != input_dim:
        raise ValidationError(f"input shape {x.shape} incompatible with input_dim {input_dim}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("non-finite values in scorer input")
    return x, single


def _forward_trace(weights: dict[str, np.ndarray], X: np.ndarray):
    Z1 = X @ weights["W1"].T + weights["b1"]
    A1 = np.maximum(Z1, 0.0)
    Z2 = A1 @ weights["W2"].T + weights["b2"]
    A2 = np.maximum(Z2, 0.0)
    z3 = (A2 @ weights["W3"].T + weights["b3"]).ravel()
    return Z1, A1, Z2, A2, z3


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return np.clip(out, _P_LO, _P_HI)


def forward(params: ScorerParams, x: np.ndarray) -> float | np.ndarray:
    """Coreference probability for one input vector or a batch of rows."""
    X, single = _as_batch(x, params.config.input_dim)
    probs = _sigmoid(_forward_trace(params.blocks(), X)[4])
    return float(probs[0]) if single else probs


def _raw_loss_and_grads(
    weights: dict[str, np.ndarray], X: np.ndarray, y: np.ndarray
) -> tuple[float, dict[str, np.ndarray]]:
    n = X.shape[0]
    Z1, A1, Z2, A2, z3 = _forward_trace(weights, X)
    softplus = np.where(z3 > 30, z3, np.log1p(np.exp(np.minimum(z3, 30.0))))
    loss = float(np.mean(softplus - y * z3))

    dz3 = (_sigmoid(z3) - y) / n
    gW3 = dz3[None, :] @ A2
    gb3 = np.array([dz3.sum()])
    dA2 = np.outer(dz3, weights["W3"].ravel())
    dZ2 = dA2 * (Z2 > 0)
    gW2 = dZ2.T @ A1
    gb2 = dZ2.sum(axis=0)
    dA1 = dZ2 @ weights["W2"]
    dZ1 = dA1 * (Z1 > 0)
    gW1 = dZ1.T @ X
    gb1 = dZ1.sum(axis=0)
    return loss, {"W1": gW1, "b1": gb1, "W2": gW2, "b2": gb2, "W3": gW3, "b3": gb3}


def bce_loss_and_grads(
    params: ScorerParams, X: np.ndarray, y: np.ndarray
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean binary cross-entropy and its gradient for every parameter block.

    Computed via the logits for numerical stability:
    bce = softplus(z) - y*z.
    """
    X, _ = _as_batch(X, params.config.input_dim)
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.shape[0] != X.shape[0]:
        raise ValidationError(f"{X.shape[0]} inputs but {y.shape[0]} labels")
    return _raw_loss_and_grads(params.blocks(), X, y)


def _coerce_dataset(dataset, input_dim: int) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(dataset, tuple) and len(dataset) == 2:
        X, y = dataset
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64).ravel()
    else:
        rows = list(dataset)
        if not rows:
            raise ValidationError("empty training dataset")
        X = np.stack([np.asarray(vec, dtype=np.float64) for vec, _ in rows])
        y = np.array([float(label) for _, label in rows])
    if X.size == 0:
        raise ValidationError("empty training dataset")
    if X.ndim != 2 or X.shape[1] != input_dim:
        raise ValidationError(f"training inputs have shape {X.shape}, expected (n, {input_dim})")
    if y.shape[0] != X.shape[0]:
        raise ValidationError(f"{X.shape[0]} inputs but {y.shape[0]} labels")
    if not np.all(np.isfinite(X)):
        raise ValidationError("non-finite values in training inputs")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ValidationError("labels must be 0 or 1")
    return X, y


def train(
    params: ScorerParams,
    dataset,
    config: ScorerConfig | None = None,
) -> tuple[ScorerParams, list[float]]:
    """Adam training over shuffled minibatches; returns new params and
    the per-epoch mean BCE trace.

    `dataset` is either a list of (vector, label) rows or an (X, y) pair.
    Epoch shuffling is seeded from the config, so identical inputs give
    identical traces and identical final weights. A non-finite loss
    aborts with TrainingDivergedError.
    """
    config = config or params.config
    X, y = _coerce_dataset(dataset, params.config.input_dim)
    n = X.shape[0]

    weights = {name: arr.copy() for name, arr in params.blocks().items()}
    adam_m = {name: np.zeros_like(arr) for name, arr in weights.items()}
    adam_v = {name: np.zeros_like(arr) for name, arr in weights.items()}
    step = 0
    rng = np.random.default_rng([config.seed, 0x5C0E])

    trace: list[float] = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            loss, grads = _raw_loss_and_grads(weights, X[batch], y[batch])
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch + 1}, sample offset {start}"
                )
            epoch_loss += loss * batch.shape[0]
            step += 1
            for name in weights:
                g = grads[name]
                adam_m[name] = ADAM_BETA1 * adam_m[name] + (1 - ADAM_BETA1) * g
                adam_v[name] = ADAM_BETA2 * adam_v[name] + (1 - ADAM_BETA2) * g * g
                m_hat = adam_m[name] / (1 - ADAM_BETA1**step)
                v_hat = adam_v[name] / (1 - ADAM_BETA2**step)
                weights[name] = weights[name] - config.learning_rate * m_hat / (
                    np.sqrt(v_hat) + ADAM_EPS
                )
        trace.append(epoch_loss / n)

    return ScorerParams(config=params.config, **weights), trace


def score_pair(
    params: ScorerParams,
    rep_ab: PairRepresentation | FusedRepresentation,
    rep_ba: PairRepresentation | FusedRepresentation,
    pair: tuple[str, str] = ("", ""),
) -> PairScore:
    """Score both directional representations and average the probabilities."""
    if rep_ab.direction != AB or rep_ba.direction != BA:
        raise ValidationError(
            f"expected directions ({AB}, {BA}), got "
            f"({rep_ab.direction}, {rep_ba.direction})"
        )
    expected = params.config.input_dim
    for rep in (rep_ab, rep_ba):
        if rep.vec.shape[0] != expected:
            raise ValidationError(
                f"representation dim {rep.vec.shape[0]} does not match "
                f"scorer input_dim {expected}"
            )
    return PairScore(
        pair=pair,
        s_ab=forward(params, rep_ab.vec),
        s_ba=forward(params, rep_ba.vec),
    )


def save_scorer(params: ScorerParams, path: str | Path) -> None:
    c = params.config
    writer = Writer()
    writer.raw(_MAGIC)
    writer.u32(_VERSION)
    writer.u32(c.input_dim)
    writer.u32(c.hidden1)
    writer.u32(c.hidden2)
    writer.u8(_ACTIVATIONS[c.activation])
    writer.u32(c.epochs)
    writer.f64(c.learning_rate)
    writer.u32(c.batch_size)
    writer.u64(c.seed)
    for name in ("W1", "b1", "W2", "b2", "W3", "b3"):
        arr = np.ascontiguousarray(getattr(params, name), dtype="<f8")
        writer.u64(arr.size)
        writer.raw(arr.tobytes())
    Path(path).write_bytes(writer.finish())


def load_scorer(path: str | Path) -> ScorerParams:
    path = Path(path)
    reader = Reader(path.read_bytes(), path.name)
    reader.expect_magic(_MAGIC)
    version = reader.u32()
    if version != _VERSION:
        raise FormatError(f"{path.name}: unsupported version {version}")
    input_dim = reader.u32()
    hidden1 = reader.u32()
    hidden2 = reader.u32()
    activation_code = reader.u8()
    if activation_code not in _ACTIVATION_NAMES:
        raise FormatError(f"{path.name}: unknown activation code {activation_code}")
    epochs = reader.u32()
    learning_rate = reader.f64()
    batch_size = reader.u32()
    seed = reader.u64()
    config = ScorerConfig(
        input_dim=input_dim,
        hidden1=hidden1,
        hidden2=hidden2,
        activation=_ACTIVATION_NAMES[activation_code],
        epochs=epochs,
        learning_rate=learning_rate,
        batch_size=batch_size,
        seed=seed,
    )
    shapes = {
        "W1": (hidden1, input_dim),
        "b1": (hidden1,),
        "W2": (hidden2, hidden1),
        "b2": (hidden2,),
        "W3": (1, hidden2),
        "b3": (1,),
    }
    blocks = {}
    for name, shape in shapes.items():
        count = reader.u64()
        expected = int(np.prod(shape))
        if count != expected:
            raise FormatError(
                f"{path.name}: block {name} has {count} values, expected {expected}"
            )
        raw = reader.raw(8 * count)
        blocks[name] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
    reader.expect_end()
    return ScorerParams(config=config, **blocks)

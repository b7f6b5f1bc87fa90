"""Encoder-decoder LSTM trained from scratch with BPTT, for 7-day-block forecasts.

The encoder consumes the look-back window one scalar per step; its final
state seeds the decoder, which is unrolled once per forecast day with
zero inputs.  Each decoder step feeds its own ReLU fully connected
branch ending in a scalar output unit.  The only recurrent input weights
are the encoder's: the decoder sees no inputs, so it carries recurrent
weights and biases only.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels

CHECKPOINT_FORMAT = "busyhour-lstm-v1"


@dataclass(frozen=True)
class LstmConfig:
    encoder_cells: int = 200
    decoder_cells: int = 200
    fc_branches: int = 7
    fc_width: int = 100
    input_len: int = 14
    output_len: int = 7
    learning_rate: float = 1e-3
    epochs: int = 150
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self) -> None:
        if self.output_len != self.fc_branches:
            raise ValueError("output_len must equal fc_branches (one branch per forecast step)")
        if self.input_len < 1:
            raise ValueError("input_len must be positive")
        if self.encoder_cells != self.decoder_cells:
            raise ValueError("decoder state is seeded by the encoder: cell counts must match")

    @classmethod
    def preset(cls, name: str, **overrides) -> "LstmConfig":
        """Named size profiles: ``paper`` (200/200, 7x100) or ``test`` (8/8, 7x4)."""
        if name == "paper":
            base = cls()
        elif name == "test":
            base = cls(encoder_cells=8, decoder_cells=8, fc_width=4, epochs=800)
        else:
            raise ValueError(f"unknown profile {name!r} (expected 'paper' or 'test')")
        return replace(base, **overrides)


@dataclass
class LstmNetwork:
    """All weight arrays; see the module docstring for the wiring."""

    config: LstmConfig
    enc_wx: np.ndarray  # (4H,)
    enc_wh: np.ndarray  # (4H, H)
    enc_b: np.ndarray  # (4H,)
    dec_wh: np.ndarray  # (4H, H)
    dec_b: np.ndarray  # (4H,)
    fc_w: np.ndarray  # (k, M, H)
    fc_b: np.ndarray  # (k, M)
    out_w: np.ndarray  # (k, M)
    out_b: np.ndarray  # (k,)

    _FIELDS = ("enc_wx", "enc_wh", "enc_b", "dec_wh", "dec_b", "fc_w", "fc_b", "out_w", "out_b")

    def parameters(self) -> list[np.ndarray]:
        return [getattr(self, name) for name in self._FIELDS]

    @property
    def param_count(self) -> int:
        return sum(p.size for p in self.parameters())

    def all_finite(self) -> bool:
        return all(np.isfinite(p).all() for p in self.parameters())

    @classmethod
    def initialize(cls, config: LstmConfig) -> "LstmNetwork":
        """Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, forget-gate bias +1."""
        rng = np.random.default_rng([config.seed, 0])
        H = config.encoder_cells
        k = config.fc_branches
        M = config.fc_width

        def u(shape, fan_in):
            bound = 1.0 / np.sqrt(fan_in)
            return rng.uniform(-bound, bound, size=shape)

        enc_b = np.zeros(4 * H)
        enc_b[H : 2 * H] = 1.0
        dec_b = np.zeros(4 * H)
        dec_b[H : 2 * H] = 1.0
        return cls(
            config=config,
            enc_wx=u(4 * H, 1),
            enc_wh=u((4 * H, H), H),
            enc_b=enc_b,
            dec_wh=u((4 * H, H), H),
            dec_b=dec_b,
            fc_w=u((k, M, H), H),
            fc_b=np.zeros((k, M)),
            out_w=u((k, M), M),
            out_b=np.zeros(k),
        )

    def save(self, path) -> None:
        payload = {
            "format": CHECKPOINT_FORMAT,
            "config": self.config.__dict__,
            "weights": {name: getattr(self, name).tolist() for name in self._FIELDS},
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)

    @classmethod
    def load(cls, path) -> "LstmNetwork":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("format") != CHECKPOINT_FORMAT:
            raise ValueError(f"unsupported checkpoint format {payload.get('format')!r}")
        config = LstmConfig(**payload["config"])
        weights = {name: np.array(payload["weights"][name]) for name in cls._FIELDS}
        return cls(config=config, **weights)


@dataclass(frozen=True)
class TrainingReport:
    epoch_mse: list[float]
    final_mse: float
    wall_clock_s: float
    seed: int


class TrainingDiverged(RuntimeError):
    """Raised when the loss or a parameter stops being finite; carries the report."""

    def __init__(self, message: str, report: TrainingReport):
        super().__init__(message)
        self.report = report


def make_windows(series: np.ndarray, input_len: int = 14, output_len: int = 7):
    """Stride-1 sliding supervised pairs: (n_pairs, input_len) and (n_pairs, output_len)."""
    x = np.asarray(series, dtype=np.float64)
    total = input_len + output_len
    if x.size < total:
        raise ValueError(f"series of length {x.size} is shorter than one window ({total})")
    n_pairs = x.size - total + 1
    X = np.empty((n_pairs, input_len))
    Y = np.empty((n_pairs, output_len))
    for j in range(n_pairs):
        X[j] = x[j : j + input_len]
        Y[j] = x[j + input_len : j + total]
    return X, Y


def _kernel_args(net: LstmNetwork):
    return (
        net.enc_wx,
        net.enc_wh,
        net.enc_b,
        net.dec_wh,
        net.dec_b,
        net.fc_w,
        net.fc_b,
        net.out_w,
        net.out_b,
    )


def forward(net: LstmNetwork, windows: np.ndarray) -> np.ndarray:
    """Predictions for one window (input_len,) or a batch (B, input_len)."""
    X = np.asarray(windows, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.shape[1] != net.config.input_len:
        raise ValueError(f"window length {X.shape[1]} != configured input_len {net.config.input_len}")
    Y = _kernels.lstm_forward(*_kernel_args(net), X)
    return Y[0] if single else Y


def gradients(net: LstmNetwork, X: np.ndarray, T: np.ndarray):
    """Loss and analytic parameter gradients of the batch-mean MSE."""
    X = np.asarray(X, dtype=np.float64)
    T = np.asarray(T, dtype=np.float64)
    if X.shape[0] == 0:
        raise ValueError("empty batch")
    loss, grads = _kernels.lstm_loss_grads(*_kernel_args(net), X, T)
    if not np.isfinite(loss):
        raise FloatingPointError("non-finite training loss; aborting")
    return loss, list(grads)


def fd_gradients(net: LstmNetwork, X: np.ndarray, T: np.ndarray, eps: float = 1e-6):
    """Central finite-difference gradients of the same loss, parameter by parameter.

    Independent of the backpropagation path: uses only the forward pass.
    """

    def loss_of(n: LstmNetwork) -> float:
        Y = _kernels.lstm_forward(*_kernel_args(n), np.asarray(X, dtype=np.float64))
        r = Y - T
        return float(np.mean(r * r))

    grads = []
    for name in LstmNetwork._FIELDS:
        base = getattr(net, name)
        g = np.zeros_like(base)
        flat = base.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            hi = loss_of(net)
            flat[i] = orig - eps
            lo = loss_of(net)
            flat[i] = orig
            gflat[i] = (hi - lo) / (2.0 * eps)
        grads.append(g)
    return grads


def train(net: LstmNetwork, X: np.ndarray, Y: np.ndarray, config: LstmConfig | None = None) -> TrainingReport:
    """Mini-batch Adam on the mean MSE; mutates ``net`` in place.

    Shuffling and updates are pure functions of ``config.seed``; the
    epoch MSE recorded is the pair-weighted mean of the batch losses.
    """
    config = config or net.config
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.shape[0] < 1:
        raise ValueError("need at least one training pair")
    rng = np.random.default_rng([config.seed, 1])
    params = net.parameters()
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    beta1, beta2, adam_eps = 0.9, 0.999, 1e-8
    step = 0
    epoch_mse: list[float] = []
    t0 = time.perf_counter()
    n = X.shape[0]
    for _epoch in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for lo in range(0, n, config.batch_size):
            idx = order[lo : lo + config.batch_size]
            try:
                loss, grads = gradients(net, X[idx], Y[idx])
            except FloatingPointError as exc:
                report = TrainingReport(
                    epoch_mse, float("nan"), time.perf_counter() - t0, config.seed
                )
                raise TrainingDiverged(f"training diverged at epoch {_epoch}", report) from exc
            total += loss * idx.size
            step += 1
            for p, g, mi, vi in zip(params, grads, m, v):
                mi *= beta1
                mi += (1.0 - beta1) * g
                vi *= beta2
                vi += (1.0 - beta2) * g * g
                mhat = mi / (1.0 - beta1**step)
                vhat = vi / (1.0 - beta2**step)
                p -= config.learning_rate * mhat / (np.sqrt(vhat) + adam_eps)
        epoch = total / n
        epoch_mse.append(epoch)
        if not np.isfinite(epoch) or not net.all_finite():
            report = TrainingReport(epoch_mse, epoch_mse[-1], time.perf_counter() - t0, config.seed)
            raise TrainingDiverged(f"training diverged at epoch {_epoch}", report)
    return TrainingReport(
        epoch_mse=epoch_mse,
        final_mse=epoch_mse[-1] if epoch_mse else float("nan"),
        wall_clock_s=time.perf_counter() - t0,
        seed=config.seed,
    )


def forecast_lstm(net: LstmNetwork, recent: np.ndarray) -> np.ndarray:
    """Forecast one output block from the most recent look-back window."""
    recent = np.asarray(recent, dtype=np.float64)
    if recent.size < net.config.input_len:
        raise ValueError(f"need {net.config.input_len} recent samples, got {recent.size}")
    return forward(net, recent[-net.config.input_len :])

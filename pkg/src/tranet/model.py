"""TraNet assembly, encoder/decoder views and checkpoint serialization.

TraNet is a fixed 4-layer dense network: d_in -> 1000 ReLU -> 40 sigmoid
-> 1000 ReLU -> 1450 sigmoid.  The 40-unit sigmoid layer is the
bottleneck that can host the digit-wise one-hot code.  The encoder view
is layers 1-2, the decoder view layers 3-4; both alias the parent's
parameter arrays, so decode(encode(x)) is bitwise identical to
forward(x) and training a view trains the shared parameters.
"""

import os
import tempfile

import numpy as np

from . import nn
from .encoding import DIGIT_CODE_LEN, TEXT_CODE_LEN

TRANSLATION = "translation"
TRANSCRIPTION = "transcription"
TASKS = (TRANSLATION, TRANSCRIPTION)

TASK_INPUT_DIM = {TRANSLATION: TEXT_CODE_LEN, TRANSCRIPTION: 1024}
HIDDEN_WIDTH = 1000
BOTTLENECK_WIDTH = DIGIT_CODE_LEN

CHECKPOINT_MAGIC = "TRANET"
CHECKPOINT_VERSION = 1


class CheckpointError(ValueError):
    pass


class BadMagic(CheckpointError):
    pass


class DimensionMismatch(CheckpointError):
    pass


class TruncatedFile(CheckpointError):
    pass


def task_dims(task: str) -> list[int]:
    if task not in TASK_INPUT_DIM:
        raise ValueError(f"unknown task: {task!r}")
    return [TASK_INPUT_DIM[task], HIDDEN_WIDTH, BOTTLENECK_WIDTH, HIDDEN_WIDTH, TEXT_CODE_LEN]


_ACTIVATION_CHAIN = [nn.RELU, nn.SIGMOID, nn.RELU, nn.SIGMOID]


class TraNet:
    def __init__(self, task: str, network: nn.Network):
        dims = task_dims(task)
        actual = [network.layers[0].fan_in] + [l.fan_out for l in network.layers]
        if actual != dims:
            raise DimensionMismatch(f"task {task!r} expects dims {dims}, got {actual}")
        self.task = task
        self.network = network

    @property
    def encoder(self) -> nn.Network:
        return self.network.view(0, 2)

    @property
    def decoder(self) -> nn.Network:
        return self.network.view(2, 4)

    def forward(self, x: np.ndarray) -> np.ndarray:
        return self.network.forward(x)

    def encode(self, x: np.ndarray) -> np.ndarray:
        return self.encoder.forward(x)

    def decode(self, codes: np.ndarray) -> np.ndarray:
        return self.decoder.forward(codes)

    def n_parameters(self) -> int:
        return self.network.n_parameters()


def build_tranet(task: str, rng: nn.RngStream, dtype=np.float32) -> TraNet:
    dims = task_dims(task)
    layers = [
        nn.make_dense(dims[i], dims[i + 1], _ACTIVATION_CHAIN[i], rng.child(i), dtype=dtype)
        for i in range(4)
    ]
    return TraNet(task, nn.Network(layers))


def save_checkpoint(net: TraNet, path: str) -> None:
    """ASCII header (magic/dims/activations) followed by raw little-endian
    float32 parameters, W row-major then b per layer.  Written atomically.
    """
    dims = task_dims(net.task)
    header = (
        f"{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION} {net.task} {len(net.network.layers)}\n"
        + " ".join(str(d) for d in dims) + "\n"
        + " ".join(l.activation for l in net.network.layers) + "\n"
    )
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".ckpt-")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(header.encode("ascii"))
            for layer in net.network.layers:
                f.write(np.ascontiguousarray(layer.W, dtype="<f4").tobytes())
                f.write(np.ascontiguousarray(layer.b, dtype="<f4").tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(path: str, expected_task: str | None = None) -> TraNet:
    with open(path, "rb") as f:
        data = f.read()

    lines = data.split(b"\n", 3)
    if len(lines) < 4:
        raise TruncatedFile(f"{path}: missing header lines")
    magic_line = lines[0].decode("ascii", errors="replace").split()
    if len(magic_line) != 4 or magic_line[0] != CHECKPOINT_MAGIC:
        raise BadMagic(f"{path}: not a TRANET checkpoint")
    if magic_line[1] != str(CHECKPOINT_VERSION):
        raise BadMagic(f"{path}: unsupported version {magic_line[1]!r}")
    task = magic_line[2]
    try:
        n_layers = int(magic_line[3])
        dims = [int(t) for t in lines[1].split()]
    except ValueError as e:
        raise BadMagic(f"{path}: malformed header: {e}") from None
    activations = lines[2].decode("ascii", errors="replace").split()

    if task not in TASKS or dims != task_dims(task) or n_layers != 4 \
            or activations != _ACTIVATION_CHAIN:
        raise DimensionMismatch(f"{path}: header does not describe a {task!r} TraNet")
    if expected_task is not None and task != expected_task:
        raise DimensionMismatch(f"{path}: checkpoint is for task {task!r}, expected {expected_task!r}")

    blob = lines[3]
    layers = []
    offset = 0
    for i in range(4):
        fan_in, fan_out = dims[i], dims[i + 1]
        n = (fan_in * fan_out + fan_out) * 4
        if offset + n > len(blob):
            raise TruncatedFile(f"{path}: parameter data ends early in layer {i}")
        W = np.frombuffer(blob, dtype="<f4", count=fan_in * fan_out, offset=offset)
        offset += fan_in * fan_out * 4
        b = np.frombuffer(blob, dtype="<f4", count=fan_out, offset=offset)
        offset += fan_out * 4
        layers.append(nn.DenseLayer(
            W=W.reshape(fan_in, fan_out).copy(),
            b=b.copy(),
            activation=activations[i],
        ))
    if offset != len(blob):
        raise TruncatedFile(f"{path}: {len(blob) - offset} trailing bytes")
    return TraNet(task, nn.Network(layers))

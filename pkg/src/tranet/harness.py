"""Training, evaluation and the repeated-experiment protocol.

Two training regimes over the same TraNet:

- conventional: end-to-end BCE between forward(input) and the letter code
  of the target string.
- encouraged: phase A trains the encoder view to emit the digit-wise
  one-hot code of the number; phase B trains the decoder view to map
  digit codes to the target letter code.  The phases touch disjoint
  parameter sets and the composed net is evaluated as-is, feeding raw
  encoder sigmoids into the decoder.

Experiments repeat over consecutive seeds with fresh splits and report
exact-match rate, per-slot character accuracy and mean Levenshtein
distance, aggregated as mean/std of exact-match.
"""

import json
import os
import tempfile
from dataclasses import dataclass, field, replace

import numpy as np

from . import datasets, encoding, model, nn

CONVENTIONAL = "conventional"
ENCOURAGED = "encouraged"
MODES = (CONVENTIONAL, ENCOURAGED)

FULL = "full"
SMOKE = "smoke"

PHASE_END2END = "end2end"
PHASE_ENCODER = "encoder"
PHASE_DECODER = "decoder"

# child keys of RngStream(seed); datasets claims 0..2
_KEY_INIT = 10
_KEY_TRAIN = 20
_KEY_ENCODER = 21
_KEY_DECODER = 22

EVAL_BATCH = 512


class NonFiniteLoss(RuntimeError):
    def __init__(self, phase: str, epoch: int, batch: int, loss: float):
        super().__init__(
            f"non-finite loss {loss} in phase {phase!r}, epoch {epoch}, batch {batch}")
        self.phase = phase
        self.epoch = epoch
        self.batch = batch


@dataclass
class TrainConfig:
    task: str
    mode: str
    epochs: int = 100
    batch_size: int = 32
    seed: int = 0
    alpha: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    preset: str = FULL

    def __post_init__(self):
        if self.task not in model.TASKS:
            raise ValueError(f"unknown task: {self.task!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode: {self.mode!r}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")


@dataclass(frozen=True)
class EpochMetrics:
    phase: str
    epoch: int
    loss: float


@dataclass(frozen=True)
class EvalMetrics:
    exact_match_rate: float
    char_accuracy: float
    mean_levenshtein: float
    n_test: int
    exact_match_snapped: float


def preset_config(task: str, mode: str, preset: str, seed: int = 0) -> TrainConfig:
    cfg = TrainConfig(task=task, mode=mode, seed=seed, preset=preset)
    if preset == SMOKE:
        cfg = replace(cfg, epochs=10 if task == model.TRANSLATION else 20)
    elif preset != FULL:
        raise ValueError(f"unknown preset: {preset!r}")
    return cfg


def preset_repeats(preset: str) -> int:
    return 5 if preset == FULL else 2


# ---------------------------------------------------------------------------
# Code tables: all 10,000 numbers are known up front, so letter/digit codes
# are precomputed once as uint8 rows and gathered per batch.

def _letter_table(language: str) -> np.ndarray:
    from .numword import to_words
    return np.stack([
        encoding.encode_text(to_words(n, language), dtype=np.uint8)
        for n in range(datasets.N_NUMBERS)
    ])


def _digit_table() -> np.ndarray:
    return np.stack([
        encoding.encode_digits(n, dtype=np.uint8) for n in range(datasets.N_NUMBERS)
    ])


_TABLE_CACHE: dict[str, np.ndarray] = {}


def code_table(name: str) -> np.ndarray:
    if name not in _TABLE_CACHE:
        if name == "digits":
            _TABLE_CACHE[name] = _digit_table()
        else:
            _TABLE_CACHE[name] = _letter_table(name)
    return _TABLE_CACHE[name]


@dataclass
class TaskData:
    """Everything one repeat needs, with inputs/targets as compact uint8 rows."""

    task: str
    train_x: np.ndarray             # (N, d_in) uint8: letter codes or images
    train_n: np.ndarray             # (N,) numbers shown to the network
    train_targets: np.ndarray       # (N, 1450) uint8 letter codes of targets
    decoder_numbers: np.ndarray     # numbers the decoder phase trains on
    test_x: np.ndarray
    test_n: np.ndarray
    test_targets: list[str]         # target strings for evaluation
    target_language: str


def translation_task_data(train_pairs, test_pairs) -> TaskData:
    en = code_table("english")
    de = code_table("german")
    train_n = np.array([p.n for p in train_pairs])
    test_n = np.array([p.n for p in test_pairs])
    return TaskData(
        task=model.TRANSLATION,
        train_x=en[train_n],
        train_n=train_n,
        train_targets=de[train_n],
        decoder_numbers=train_n,    # only training numbers: no target leakage
        test_x=en[test_n],
        test_n=test_n,
        test_targets=[p.target for p in test_pairs],
        target_language="german",
    )


def transcription_task_data(train_set: datasets.TranscriptionSet,
                            test_set: datasets.TranscriptionSet) -> TaskData:
    en = code_table("english")
    # split is by digit image, not by number, so the decoder may see all values
    return TaskData(
        task=model.TRANSCRIPTION,
        train_x=train_set.images,
        train_n=train_set.numbers,
        train_targets=en[train_set.numbers],
        decoder_numbers=np.arange(datasets.N_NUMBERS),
        test_x=test_set.images,
        test_n=test_set.numbers,
        test_targets=[test_set.label_text(i) for i in range(len(test_set))],
        target_language="english",
    )


def load_task_data(seed: int, task: str, semeion_records=None,
                   n_train: int | None = None, n_test: int | None = None) -> TaskData:
    if task == model.TRANSLATION:
        train, test = datasets.gen_translation_dataset(seed)
        return translation_task_data(train, test)
    if semeion_records is None:
        raise ValueError("transcription requires Semeion records")
    train, test = datasets.gen_transcription_dataset(
        semeion_records, seed,
        n_train=n_train or datasets.N_TRANSCRIPTION_TRAIN,
        n_test=n_test or datasets.N_TRANSCRIPTION_TEST)
    return transcription_task_data(train, test)


# ---------------------------------------------------------------------------
# Training loops

def _train_network(network: nn.Network, x_rows: np.ndarray, t_rows: np.ndarray,
                   cfg: TrainConfig, shuffle_stream: nn.RngStream,
                   phase: str) -> list[EpochMetrics]:
    """Epochs x ceil(N/batch) ADAM steps over a seeded shuffle of the rows."""
    params = network.parameters()
    state = nn.AdamState.for_params(
        params, alpha=cfg.alpha, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps)
    n = len(x_rows)
    history = []
    for epoch in range(cfg.epochs):
        order = shuffle_stream.child(epoch).generator().permutation(n)
        total = 0.0
        for b, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start:start + cfg.batch_size]
            x = x_rows[idx].astype(np.float32)
            t = t_rows[idx].astype(np.float32)
            loss, grads = nn.backward(network, x, t)
            if not np.isfinite(loss):
                raise NonFiniteLoss(phase, epoch, b, loss)
            nn.adam_step(state, params, grads)
            total += loss * len(idx)
        history.append(EpochMetrics(phase=phase, epoch=epoch, loss=total / n))
    return history


def train_conventional(net: model.TraNet, data: TaskData,
                       cfg: TrainConfig) -> list[EpochMetrics]:
    stream = nn.RngStream(cfg.seed).child(_KEY_TRAIN)
    return _train_network(net.network, data.train_x, data.train_targets,
                          cfg, stream, PHASE_END2END)


def train_encouraged(net: model.TraNet, data: TaskData,
                     cfg: TrainConfig) -> list[EpochMetrics]:
    digits = code_table("digits")
    stream = nn.RngStream(cfg.seed)
    history = _train_network(
        net.encoder, data.train_x, digits[data.train_n],
        cfg, stream.child(_KEY_ENCODER), PHASE_ENCODER)
    target_table = code_table(data.target_language)
    history += _train_network(
        net.decoder, digits[data.decoder_numbers], target_table[data.decoder_numbers],
        cfg, stream.child(_KEY_DECODER), PHASE_DECODER)
    return history


def train(net: model.TraNet, data: TaskData, cfg: TrainConfig) -> list[EpochMetrics]:
    if cfg.mode == CONVENTIONAL:
        return train_conventional(net, data, cfg)
    return train_encouraged(net, data, cfg)


# ---------------------------------------------------------------------------
# Evaluation

def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        for j, cb in enumerate(b, 1):
            current.append(min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (ca != cb),
            ))
        previous = current
    return previous[-1]


def _snap_codes(codes: np.ndarray) -> np.ndarray:
    """Replace each 10-wide block with the exact one-hot of its argmax."""
    blocks = codes.reshape(len(codes), encoding.N_DIGITS, 10)
    snapped = np.zeros_like(blocks)
    idx = blocks.argmax(axis=2)
    rows = np.arange(len(codes))[:, None]
    snapped[rows, np.arange(encoding.N_DIGITS)[None, :], idx] = 1.0
    return snapped.reshape(len(codes), encoding.DIGIT_CODE_LEN)


def _decoded_strings(outputs: np.ndarray) -> list[str]:
    return [encoding.decode_text(row) for row in outputs]


def evaluate(net: model.TraNet, data: TaskData) -> EvalMetrics:
    targets = data.test_targets
    target_slots = np.stack([
        encoding.decode_text_slots(encoding.encode_text(s)) for s in targets])

    decoded = []
    snapped_decoded = []
    slot_hits = 0
    for start in range(0, len(targets), EVAL_BATCH):
        x = data.test_x[start:start + EVAL_BATCH].astype(np.float32)
        codes = net.encode(x)
        out = net.decode(codes)
        decoded_batch = _decoded_strings(out)
        decoded.extend(decoded_batch)
        snapped_decoded.extend(_decoded_strings(net.decode(_snap_codes(codes))))
        out_slots = np.stack([encoding.decode_text_slots(row) for row in out])
        slot_hits += (out_slots == target_slots[start:start + EVAL_BATCH]).sum()

    n = len(targets)
    exact = sum(d == t for d, t in zip(decoded, targets))
    snapped_exact = sum(d == t for d, t in zip(snapped_decoded, targets))
    lev = sum(levenshtein(d, t) for d, t in zip(decoded, targets))
    return EvalMetrics(
        exact_match_rate=exact / n,
        char_accuracy=float(slot_hits) / (n * encoding.MAX_LEN),
        mean_levenshtein=lev / n,
        n_test=n,
        exact_match_snapped=snapped_exact / n,
    )


def inspect_representation(net: model.TraNet, x: np.ndarray, n_true: int) -> dict:
    """Bottleneck diagnostics for one input: the 40 activations, their
    per-block argmax digits and the L-inf distance to the true digit code.
    """
    codes = net.encode(np.atleast_2d(np.asarray(x, dtype=np.float32)))[0]
    digits = tuple(int(d) for d in codes.reshape(encoding.N_DIGITS, 10).argmax(axis=1))
    target = encoding.encode_digits(n_true)
    return {
        "activations": codes,
        "digits": digits,
        "predicted_n": int("".join(str(d) for d in digits)),
        "true_n": int(n_true),
        "true_digits": tuple(int(c) for c in f"{n_true:04d}"),
        "linf_distance": float(np.abs(codes - target).max()),
    }


# ---------------------------------------------------------------------------
# Repeated experiments

def run_single(cfg: TrainConfig, data: TaskData):
    """Train one fresh net under cfg; returns (net, history, eval metrics)."""
    net = model.build_tranet(cfg.task, nn.RngStream(cfg.seed).child(_KEY_INIT))
    history = train(net, data, cfg)
    metrics = evaluate(net, data)
    return net, history, metrics


def run_experiment(task: str, mode: str, preset: str = FULL, base_seed: int = 1,
                   semeion_records=None, out_path: str | None = None,
                   epochs: int | None = None, repeats: int | None = None) -> dict:
    """Repeat (split, train, evaluate) over consecutive seeds and aggregate."""
    n_repeats = repeats if repeats is not None else preset_repeats(preset)
    seeds = list(range(base_seed, base_seed + n_repeats))
    n_train = None
    if task == model.TRANSCRIPTION and preset == SMOKE:
        n_train = 10_000

    repeat_reports = []
    exact_rates = []
    for seed in seeds:
        cfg = preset_config(task, mode, preset, seed=seed)
        if epochs is not None:
            cfg = replace(cfg, epochs=epochs)
        data = load_task_data(seed, task, semeion_records=semeion_records, n_train=n_train)
        try:
            _, history, metrics = run_single(cfg, data)
        except NonFiniteLoss as e:
            raise RuntimeError(f"repeat with seed {seed} failed: {e}") from e
        exact_rates.append(metrics.exact_match_rate)
        repeat_reports.append({
            "seed": seed,
            "history": [
                {"phase": h.phase, "epoch": h.epoch, "loss": h.loss} for h in history
            ],
            "eval": {
                "exact_match": metrics.exact_match_rate,
                "char_accuracy": metrics.char_accuracy,
                "mean_levenshtein": metrics.mean_levenshtein,
                "exact_match_snapped": metrics.exact_match_snapped,
                "n_test": metrics.n_test,
            },
        })

    rates = np.array(exact_rates, dtype=np.float64)
    report = {
        "task": task,
        "mode": mode,
        "preset": preset,
        "seeds": seeds,
        "repeats": repeat_reports,
        "aggregate": {
            "mean_exact": float(rates.mean()),
            "std_exact": float(rates.std()),
        },
    }
    if out_path:
        write_report(report, out_path)
    return report


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def write_report(report: dict, path: str) -> None:
    data = report_to_json(report).encode("utf-8")
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".report-")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

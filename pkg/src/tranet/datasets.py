"""Task data: the Translation corpus and the Semeion-based Transcription corpus.

Translation pairs cover all 10,000 numbers; a seeded split holds out 100
test numbers.  Transcription composites stack four 16x16 Semeion digit
images into one 64x16 binary image; train composites draw only from the
first 1493 Semeion records, test composites only from the last 100, so
no digit image leaks across the split.
"""

import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .nn import RngStream
from .numword import to_english, to_german

N_NUMBERS = 10000
N_TEST_NUMBERS = 100

SEMEION_N = 1593
SEMEION_TRAIN_END = 1493          # records [0, 1493) feed training composites
SEMEION_FIELDS = 256 + 10
DEFAULT_SEMEION_URL = (
    "https://archive.ics.uci.edu/ml/machine-learning-databases/semeion/semeion.data"
)
SEMEION_URL_ENV = "TRANET_SEMEION_URL"

N_TRANSCRIPTION_TRAIN = 100_000
N_TRANSCRIPTION_TEST = 1_000


class DatasetError(ValueError):
    pass


class BadFieldCount(DatasetError):
    pass


class NonBinaryPixel(DatasetError):
    pass


class BadLabel(DatasetError):
    pass


class BadRecordCount(DatasetError):
    pass


def atomic_write_bytes(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# Translation

@dataclass(frozen=True)
class TranslationPair:
    n: int
    source: str     # English
    target: str     # German


def translation_pair(n: int) -> TranslationPair:
    return TranslationPair(n=n, source=to_english(n), target=to_german(n))


def gen_translation_dataset(seed: int):
    """(train, test) translation pairs: 100 uniformly held-out numbers, rest train."""
    gen = RngStream(seed).child(0).generator()
    test_numbers = set(gen.choice(N_NUMBERS, size=N_TEST_NUMBERS, replace=False).tolist())
    train = [translation_pair(n) for n in range(N_NUMBERS) if n not in test_numbers]
    test = [translation_pair(n) for n in sorted(test_numbers)]
    return train, test


def write_translation_file(pairs, path: str) -> None:
    lines = [f"{p.n}\t{p.source}\t{p.target}\n" for p in pairs]
    atomic_write_bytes(path, "".join(lines).encode("utf-8"))


def read_translation_file(path: str) -> list[TranslationPair]:
    pairs = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 3:
                raise BadFieldCount(f"{path}:{lineno}: expected 3 fields, got {len(fields)}")
            pairs.append(TranslationPair(int(fields[0]), fields[1], fields[2]))
    return pairs


# ---------------------------------------------------------------------------
# Semeion

@dataclass(frozen=True)
class SemeionRecord:
    image: np.ndarray       # (16, 16) uint8, values 0/1
    label: int              # digit 0..9
    source_index: int       # 0..1592, position in the file


def parse_semeion(path: str, expected_count: int | None = SEMEION_N) -> list[SemeionRecord]:
    """Parse the whitespace-separated Semeion file: 256 binary pixels
    (row-major 16x16) then 10 one-hot label fields per line.
    """
    records = []
    with open(path, encoding="ascii") as f:
        for lineno, line in enumerate(f):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != SEMEION_FIELDS:
                raise BadFieldCount(
                    f"{path}:{lineno + 1}: expected {SEMEION_FIELDS} fields, got {len(fields)}"
                )
            pixels = np.array([float(v) for v in fields[:256]])
            if not np.isin(pixels, (0.0, 1.0)).all():
                raise NonBinaryPixel(f"{path}:{lineno + 1}: pixel values outside {{0, 1}}")
            labels = [int(float(v)) for v in fields[256:]]
            if sorted(labels) != [0] * 9 + [1]:
                raise BadLabel(f"{path}:{lineno + 1}: label fields are not one-hot")
            records.append(SemeionRecord(
                image=pixels.astype(np.uint8).reshape(16, 16),
                label=labels.index(1),
                source_index=len(records),
            ))
    if expected_count is not None and len(records) != expected_count:
        raise BadRecordCount(f"{path}: expected {expected_count} records, got {len(records)}")
    return records


def fetch_semeion(dest: str, url: str | None = None) -> str:
    """Download the Semeion file and structurally validate it before keeping it."""
    import requests

    url = url or os.environ.get(SEMEION_URL_ENV) or DEFAULT_SEMEION_URL
    response = requests.get(url, timeout=60)
    response.raise_for_status()
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(dest)), prefix=".semeion-")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(response.content)
        parse_semeion(tmp)          # raises on structural problems
        os.replace(tmp, dest)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return dest


# ---------------------------------------------------------------------------
# Transcription

@dataclass(frozen=True)
class TranscriptionExample:
    image: np.ndarray               # (16, 64) uint8; flatten row-major for the net
    n: int
    label_text: str                 # English verbal form
    source_indices: tuple[int, int, int, int]


def compose_image(d1: SemeionRecord, d2: SemeionRecord, d3: SemeionRecord,
                  d4: SemeionRecord) -> TranscriptionExample:
    """Stack four digit images horizontally, most significant digit leftmost."""
    digits = (d1, d2, d3, d4)
    image = np.concatenate([d.image for d in digits], axis=1)
    n = d1.label * 1000 + d2.label * 100 + d3.label * 10 + d4.label
    return TranscriptionExample(
        image=image,
        n=n,
        label_text=to_english(n),
        source_indices=tuple(d.source_index for d in digits),
    )


@dataclass
class TranscriptionSet:
    """Array-of-structs view of a composite corpus, kept compact in uint8."""

    images: np.ndarray              # (N, 1024) uint8, row-major 16x64
    numbers: np.ndarray             # (N,) int
    source_indices: np.ndarray      # (N, 4) int

    def __len__(self):
        return len(self.numbers)

    def label_text(self, i: int) -> str:
        return to_english(int(self.numbers[i]))

    def example(self, i: int) -> TranscriptionExample:
        return TranscriptionExample(
            image=self.images[i].reshape(16, 64),
            n=int(self.numbers[i]),
            label_text=self.label_text(i),
            source_indices=tuple(int(j) for j in self.source_indices[i]),
        )


def _compose_batch(records, indices: np.ndarray) -> TranscriptionSet:
    pixels = np.stack([r.image for r in records])          # (1593, 16, 16)
    labels = np.array([r.label for r in records])
    digits = pixels[indices]                               # (N, 4, 16, 16)
    images = digits.transpose(0, 2, 1, 3).reshape(len(indices), 1024)
    numbers = labels[indices] @ np.array([1000, 100, 10, 1])
    return TranscriptionSet(images=images, numbers=numbers, source_indices=indices.copy())


def gen_transcription_dataset(records, seed: int,
                              n_train: int = N_TRANSCRIPTION_TRAIN,
                              n_test: int = N_TRANSCRIPTION_TEST):
    """(train, test) composite sets; digit images drawn uniformly with
    replacement, train from records [0, 1493), test from [1493, 1593).
    """
    if len(records) != SEMEION_N:
        raise BadRecordCount(f"expected {SEMEION_N} Semeion records, got {len(records)}")
    stream = RngStream(seed)
    train_idx = stream.child(1).generator().integers(
        0, SEMEION_TRAIN_END, size=(n_train, 4))
    test_idx = stream.child(2).generator().integers(
        SEMEION_TRAIN_END, SEMEION_N, size=(n_test, 4))
    return _compose_batch(records, train_idx), _compose_batch(records, test_idx)


def write_transcription_files(dataset: TranscriptionSet, image_path: str,
                              index_path: str) -> None:
    """Raw 1024 bytes per image plus a tab-separated sidecar index."""
    atomic_write_bytes(image_path, dataset.images.astype(np.uint8).tobytes())
    lines = []
    for i in range(len(dataset)):
        srcs = ",".join(str(int(j)) for j in dataset.source_indices[i])
        lines.append(f"{int(dataset.numbers[i])}\t{dataset.label_text(i)}\t{srcs}\n")
    atomic_write_bytes(index_path, "".join(lines).encode("utf-8"))


def read_transcription_files(image_path: str, index_path: str) -> TranscriptionSet:
    raw = np.fromfile(image_path, dtype=np.uint8)
    if raw.size % 1024:
        raise DatasetError(f"{image_path}: size {raw.size} is not a multiple of 1024")
    images = raw.reshape(-1, 1024)
    numbers = []
    sources = []
    with open(index_path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 3:
                raise BadFieldCount(f"{index_path}:{lineno}: expected 3 fields")
            numbers.append(int(fields[0]))
            sources.append([int(v) for v in fields[2].split(",")])
    if len(numbers) != len(images):
        raise DatasetError(
            f"index has {len(numbers)} entries but image file has {len(images)} images")
    return TranscriptionSet(
        images=images,
        numbers=np.array(numbers),
        source_indices=np.array(sources),
    )

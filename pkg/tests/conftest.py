import numpy as np
import pytest

from tranet import datasets
from tranet.nn import RngStream


def make_synthetic_semeion_records(seed: int = 99) -> list[datasets.SemeionRecord]:
    """1593 records in the Semeion shape: per-digit glyph prototypes with a
    few flipped pixels, so the digit class is learnable from the image."""
    gen = RngStream(seed).child(0).generator()
    prototypes = (gen.random((10, 16, 16)) > 0.6).astype(np.uint8)
    records = []
    for i in range(datasets.SEMEION_N):
        label = i % 10
        image = prototypes[label].copy()
        flips = gen.integers(0, 256, size=6)
        image.reshape(-1)[flips] ^= 1
        records.append(datasets.SemeionRecord(image=image, label=label, source_index=i))
    return records


def write_semeion_file(records, path) -> None:
    with open(path, "w") as f:
        for r in records:
            pixels = " ".join(f"{float(p):.4f}" for p in r.image.reshape(-1))
            labels = " ".join("1" if d == r.label else "0" for d in range(10))
            f.write(f"{pixels} {labels} \n")


@pytest.fixture(scope="session")
def semeion_records():
    return make_synthetic_semeion_records()


@pytest.fixture(scope="session")
def semeion_file(tmp_path_factory, semeion_records):
    path = tmp_path_factory.mktemp("semeion") / "semeion.data"
    write_semeion_file(semeion_records, path)
    return str(path)

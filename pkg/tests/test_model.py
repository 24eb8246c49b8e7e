import numpy as np
import pytest

from tranet import model, nn
from tranet.model import (
    BadMagic, DimensionMismatch, TraNet, TruncatedFile, build_tranet,
    load_checkpoint, save_checkpoint,
)


@pytest.fixture(scope="module")
def translation_net():
    return build_tranet(model.TRANSLATION, nn.RngStream(1).child(10))


@pytest.fixture(scope="module")
def transcription_net():
    return build_tranet(model.TRANSCRIPTION, nn.RngStream(1).child(10))


def test_parameter_counts(translation_net, transcription_net):
    assert translation_net.n_parameters() == 2_983_490
    assert transcription_net.n_parameters() == 2_557_490


def test_architecture(translation_net):
    dims = [l.fan_out for l in translation_net.network.layers]
    assert dims == [1000, 40, 1000, 1450]
    acts = [l.activation for l in translation_net.network.layers]
    assert acts == [nn.RELU, nn.SIGMOID, nn.RELU, nn.SIGMOID]
    assert transcription_input_dim() == 1024


def transcription_input_dim():
    return model.TASK_INPUT_DIM[model.TRANSCRIPTION]


def test_same_seed_bitwise_identical():
    a = build_tranet(model.TRANSLATION, nn.RngStream(3).child(10))
    b = build_tranet(model.TRANSLATION, nn.RngStream(3).child(10))
    for pa, pb in zip(a.network.parameters(), b.network.parameters()):
        assert np.array_equal(pa, pb)


@pytest.mark.parametrize("task", model.TASKS)
def test_composition_identity_bitwise(task):
    net = build_tranet(task, nn.RngStream(2).child(10))
    gen = nn.RngStream(2).child(99).generator()
    x = gen.random((100, net.network.d_in), dtype=np.float32)
    assert np.array_equal(net.decode(net.encode(x)), net.forward(x))


def test_output_ranges(translation_net):
    gen = nn.RngStream(4).generator()
    x = gen.random((8, 1450), dtype=np.float32)
    codes = translation_net.encode(x)
    out = translation_net.forward(x)
    assert codes.shape == (8, 40)
    assert ((codes > 0) & (codes < 1)).all()
    assert out.shape == (8, 1450)
    assert ((out > 0) & (out < 1)).all()


def test_checkpoint_round_trip(tmp_path, translation_net):
    path = str(tmp_path / "net.ckpt")
    save_checkpoint(translation_net, path)
    loaded = load_checkpoint(path)
    assert loaded.task == model.TRANSLATION
    for pa, pb in zip(translation_net.network.parameters(), loaded.network.parameters()):
        assert np.array_equal(pa, pb)


def test_checkpoint_bad_magic(tmp_path, translation_net):
    path = str(tmp_path / "net.ckpt")
    save_checkpoint(translation_net, path)
    data = bytearray(open(path, "rb").read())
    data[:6] = b"NOTANC"
    bad = str(tmp_path / "bad.ckpt")
    open(bad, "wb").write(bytes(data))
    with pytest.raises(BadMagic):
        load_checkpoint(bad)


def test_checkpoint_task_mismatch(tmp_path, translation_net):
    path = str(tmp_path / "net.ckpt")
    save_checkpoint(translation_net, path)
    with pytest.raises(DimensionMismatch):
        load_checkpoint(path, expected_task=model.TRANSCRIPTION)


def test_checkpoint_header_dims_must_match_task(tmp_path, translation_net):
    path = str(tmp_path / "net.ckpt")
    save_checkpoint(translation_net, path)
    data = open(path, "rb").read()
    # claim transcription in the header while dims stay 1450-input
    tampered = data.replace(b" translation ", b" transcription ", 1)
    bad = str(tmp_path / "tampered.ckpt")
    open(bad, "wb").write(tampered)
    with pytest.raises(DimensionMismatch):
        load_checkpoint(bad)


def test_checkpoint_truncated(tmp_path, translation_net):
    path = str(tmp_path / "net.ckpt")
    save_checkpoint(translation_net, path)
    data = open(path, "rb").read()
    short = str(tmp_path / "short.ckpt")
    open(short, "wb").write(data[:-100])
    with pytest.raises(TruncatedFile):
        load_checkpoint(short)


def test_views_alias_parameters(translation_net):
    enc_w = translation_net.encoder.layers[0].W
    assert enc_w is translation_net.network.layers[0].W
    dec_w = translation_net.decoder.layers[0].W
    assert dec_w is translation_net.network.layers[2].W


def test_wrong_dims_rejected():
    rng = nn.RngStream(1)
    layers = [
        nn.make_dense(1450, 1000, nn.RELU, rng.child(0)),
        nn.make_dense(1000, 39, nn.SIGMOID, rng.child(1)),
        nn.make_dense(39, 1000, nn.RELU, rng.child(2)),
        nn.make_dense(1000, 1450, nn.SIGMOID, rng.child(3)),
    ]
    with pytest.raises(DimensionMismatch):
        TraNet(model.TRANSLATION, nn.Network(layers))

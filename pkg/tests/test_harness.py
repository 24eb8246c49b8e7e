import json

import numpy as np
import pytest

from tranet import datasets, encoding, harness, model, nn
from tranet.harness import (
    EvalMetrics, NonFiniteLoss, TrainConfig, evaluate, inspect_representation,
    levenshtein, run_experiment, run_single, train_conventional, train_encouraged,
)


def small_translation_data(n_train=256, n_test=20, seed=1):
    train, test = datasets.gen_translation_dataset(seed)
    return harness.translation_task_data(train[:n_train], test[:n_test])


@pytest.fixture(scope="module")
def tiny_data():
    return small_translation_data()


class FakeNet:
    """Duck-typed net whose decoder emits fixed strings, for metric tests."""

    def __init__(self, outputs):
        self.outputs = list(outputs)
        self.cursor = 0

    def encode(self, x):
        return np.zeros((len(x), encoding.DIGIT_CODE_LEN), dtype=np.float32)

    def decode(self, codes):
        rows = [encoding.encode_text(s)
                for s in self.outputs[self.cursor:self.cursor + len(codes)]]
        self.cursor = (self.cursor + len(codes)) % len(self.outputs)
        return np.stack(rows)


class TestLevenshtein:
    def test_identity(self):
        assert levenshtein("abc", "abc") == 0

    def test_paper_typo_pair(self):
        assert levenshtein("einhundert einundneenzig", "einhundert einundneunzig") == 1

    def test_insert_delete(self):
        assert levenshtein("", "abc") == 3
        assert levenshtein("kitten", "sitting") == 3


class TestEvaluate:
    def test_perfect_outputs(self, tiny_data):
        net = FakeNet(list(tiny_data.test_targets))
        m = evaluate(net, tiny_data)
        assert m.exact_match_rate == 1.0
        assert m.mean_levenshtein == 0.0
        assert m.char_accuracy == 1.0
        assert m.n_test == 20

    def test_wrong_outputs(self, tiny_data):
        net = FakeNet(["null"] * 40)  # consumed twice: raw and snapped pass
        m = evaluate(net, tiny_data)
        assert m.exact_match_rate == 0.0
        assert m.mean_levenshtein > 0

    def test_untrained_net_scores_zero(self, tiny_data):
        net = model.build_tranet(model.TRANSLATION, nn.RngStream(1).child(10))
        m = evaluate(net, tiny_data)
        assert m.exact_match_rate == 0.0


class TestTraining:
    def test_loss_decreases_first_epoch(self, tiny_data):
        cfg = TrainConfig(task="translation", mode="conventional", epochs=2, seed=2)
        net = model.build_tranet(model.TRANSLATION, nn.RngStream(2).child(10))
        x = tiny_data.train_x.astype(np.float32)
        t = tiny_data.train_targets.astype(np.float32)
        initial = nn.bce_loss(net.forward(x), t)
        history = train_conventional(net, tiny_data, cfg)
        assert history[0].loss < initial
        assert history[1].loss < history[0].loss
        assert all(h.phase == "end2end" and np.isfinite(h.loss) and h.loss >= 0
                   for h in history)

    def test_step_count(self, tiny_data):
        # epochs * ceil(N/batch) optimizer steps, partial batch included
        cfg = TrainConfig(task="translation", mode="conventional", epochs=3,
                          batch_size=100, seed=2)
        net = model.build_tranet(model.TRANSLATION, nn.RngStream(2).child(10))
        params = net.network.parameters()
        counted = []
        orig = nn.adam_step

        def counting(state, p, g):
            counted.append(state.t + 1)
            return orig(state, p, g)

        harness.nn.adam_step = counting
        try:
            train_conventional(net, tiny_data, cfg)
        finally:
            harness.nn.adam_step = orig
        assert len(counted) == 3 * -(-256 // 100)

    def test_bitwise_determinism(self, tiny_data):
        cfg = TrainConfig(task="translation", mode="encouraged", epochs=2, seed=3)
        nets = []
        for _ in range(2):
            net = model.build_tranet(model.TRANSLATION, nn.RngStream(3).child(10))
            train_encouraged(net, tiny_data, cfg)
            nets.append(net)
        for pa, pb in zip(nets[0].network.parameters(), nets[1].network.parameters()):
            assert np.array_equal(pa, pb)

    def test_memorizes_single_example(self):
        data = small_translation_data(n_train=1, n_test=1)
        cfg = TrainConfig(task="translation", mode="conventional", epochs=200, seed=4)
        net = model.build_tranet(model.TRANSLATION, nn.RngStream(4).child(10))
        history = train_conventional(net, data, cfg)
        assert history[-1].loss < 0.01

    def test_phase_isolation(self, tiny_data):
        cfg = TrainConfig(task="translation", mode="encouraged", epochs=1, seed=5)
        net = model.build_tranet(model.TRANSLATION, nn.RngStream(5).child(10))
        dec_before = [p.copy() for p in net.decoder.parameters()]
        digits = harness.code_table("digits")
        harness._train_network(net.encoder, tiny_data.train_x,
                               digits[tiny_data.train_n], cfg,
                               nn.RngStream(5).child(21), "encoder")
        for before, after in zip(dec_before, net.decoder.parameters()):
            assert np.array_equal(before, after)
        enc_after_a = [p.copy() for p in net.encoder.parameters()]
        de = harness.code_table("german")
        harness._train_network(net.decoder, digits[tiny_data.decoder_numbers],
                               de[tiny_data.decoder_numbers], cfg,
                               nn.RngStream(5).child(22), "decoder")
        for before, after in zip(enc_after_a, net.encoder.parameters()):
            assert np.array_equal(before, after)

    def test_decoder_memorizes_one_hot_inputs(self):
        # the decoder's job is a finite function from 40-dim one-hots
        data = small_translation_data(n_train=300, n_test=10)
        cfg = TrainConfig(task="translation", mode="encouraged", epochs=350, seed=6)
        net = model.build_tranet(model.TRANSLATION, nn.RngStream(6).child(10))
        digits = harness.code_table("digits")
        de = harness.code_table("german")
        harness._train_network(net.decoder, digits[data.decoder_numbers],
                               de[data.decoder_numbers], cfg,
                               nn.RngStream(6).child(22), "decoder")
        out = net.decode(digits[data.decoder_numbers].astype(np.float32))
        from tranet.numword import to_german
        hits = sum(encoding.decode_text(row) == to_german(int(n))
                   for row, n in zip(out, data.decoder_numbers))
        assert hits / len(data.decoder_numbers) > 0.99

    def test_non_finite_loss_raises(self, tiny_data):
        cfg = TrainConfig(task="translation", mode="conventional", epochs=1, seed=7)
        net = model.build_tranet(model.TRANSLATION, nn.RngStream(7).child(10))
        net.network.layers[0].W[:] = np.nan
        with pytest.raises(NonFiniteLoss):
            train_conventional(net, tiny_data, cfg)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(task="translation", mode="magic")
        with pytest.raises(ValueError):
            TrainConfig(task="poetry", mode="conventional")
        with pytest.raises(ValueError):
            TrainConfig(task="translation", mode="conventional", epochs=0)


class TestInspectRepresentation:
    def test_exact_one_hot_bottleneck(self):
        class SnappedNet:
            def encode(self, x):
                return encoding.encode_digits(42)[None, :]

        report = inspect_representation(SnappedNet(), np.zeros(1450), 42)
        assert report["digits"] == (0, 0, 4, 2)
        assert report["linf_distance"] == 0.0
        assert report["predicted_n"] == 42
        assert report["true_digits"] == (0, 0, 4, 2)

    def test_total_on_untrained_net(self, tiny_data):
        net = model.build_tranet(model.TRANSLATION, nn.RngStream(8).child(10))
        report = inspect_representation(net, tiny_data.test_x[0].astype(np.float32), 7)
        assert report["activations"].shape == (40,)
        assert all(0 <= d <= 9 for d in report["digits"])
        assert report["linf_distance"] >= 0


class TestTranscriptionPath:
    def test_small_transcription_training_runs(self, semeion_records):
        train, test = datasets.gen_transcription_dataset(
            semeion_records, seed=1, n_train=512, n_test=64)
        data = harness.transcription_task_data(train, test)
        cfg = TrainConfig(task="transcription", mode="encouraged", epochs=1,
                          seed=1)
        net = model.build_tranet(model.TRANSCRIPTION, nn.RngStream(1).child(10))
        digits = harness.code_table("digits")
        history = harness._train_network(net.encoder, data.train_x,
                                         digits[data.train_n], cfg,
                                         nn.RngStream(1).child(21), "encoder")
        assert len(history) == 1 and np.isfinite(history[0].loss)
        metrics = evaluate(net, data)
        assert metrics.n_test == 64


class TestRunExperiment:
    def test_report_schema_and_aggregate(self, tmp_path):
        out = str(tmp_path / "report.json")
        report = run_experiment("translation", "encouraged", preset="smoke",
                                base_seed=1, repeats=2, epochs=1, out_path=out)
        assert report["task"] == "translation"
        assert report["mode"] == "encouraged"
        assert report["seeds"] == [1, 2]
        assert len(report["repeats"]) == 2
        first = report["repeats"][0]
        assert {"seed", "history", "eval"} <= set(first)
        assert {"exact_match", "char_accuracy", "mean_levenshtein"} <= set(first["eval"])
        phases = {h["phase"] for h in first["history"]}
        assert phases == {"encoder", "decoder"}
        rates = [r["eval"]["exact_match"] for r in report["repeats"]]
        assert report["aggregate"]["mean_exact"] == pytest.approx(np.mean(rates))
        assert report["aggregate"]["std_exact"] == pytest.approx(np.std(rates))
        on_disk = json.loads(open(out).read())
        assert on_disk == json.loads(harness.report_to_json(report))

    def test_fresh_split_per_repeat(self, tmp_path):
        report = run_experiment("translation", "conventional", preset="smoke",
                                base_seed=1, repeats=2, epochs=1)
        # different seeds see different losses (fresh splits and inits)
        l1 = report["repeats"][0]["history"][0]["loss"]
        l2 = report["repeats"][1]["history"][0]["loss"]
        assert l1 != l2

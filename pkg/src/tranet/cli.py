"""Command-line surface: data generation, training, evaluation, demos,
the repeated-experiment protocol, and SVG/PGM figure emission.

Exit codes: 0 ok, 2 usage error, 3 data error, 4 training failure.
All file outputs are written atomically (temp file + rename).
"""

import argparse
import json
import os
import sys

import numpy as np

from . import datasets, encoding, harness, model, nn, numword

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_TRAINING = 4

TRANSLATION_FILES = ("train.tsv", "test.tsv")
TRANSCRIPTION_FILES = ("train-images.bin", "train-index.tsv",
                       "test-images.bin", "test-index.tsv")

PHASE_COLORS = {
    harness.PHASE_END2END: "#1f77b4",
    harness.PHASE_ENCODER: "#d62728",
    harness.PHASE_DECODER: "#2ca02c",
}


def _print_config(args: argparse.Namespace) -> None:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    print("config: " + json.dumps(resolved, sort_keys=True, default=str))


# ---------------------------------------------------------------------------
# Data loading shared by train/eval

def _load_dir_data(task: str, data_dir: str) -> harness.TaskData:
    if task == model.TRANSLATION:
        train = datasets.read_translation_file(os.path.join(data_dir, "train.tsv"))
        test = datasets.read_translation_file(os.path.join(data_dir, "test.tsv"))
        return harness.translation_task_data(train, test)
    train = datasets.read_transcription_files(
        os.path.join(data_dir, "train-images.bin"),
        os.path.join(data_dir, "train-index.tsv"))
    test = datasets.read_transcription_files(
        os.path.join(data_dir, "test-images.bin"),
        os.path.join(data_dir, "test-index.tsv"))
    return harness.transcription_task_data(train, test)


def _eval_report(task: str, metrics: harness.EvalMetrics) -> dict:
    return {
        "task": task,
        "eval": {
            "exact_match": metrics.exact_match_rate,
            "char_accuracy": metrics.char_accuracy,
            "mean_levenshtein": metrics.mean_levenshtein,
            "exact_match_snapped": metrics.exact_match_snapped,
            "n_test": metrics.n_test,
        },
    }


# ---------------------------------------------------------------------------
# Subcommands

def cmd_gen_data(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    if args.task == model.TRANSLATION:
        train, test = datasets.gen_translation_dataset(args.seed)
        datasets.write_translation_file(train, os.path.join(args.out, "train.tsv"))
        datasets.write_translation_file(test, os.path.join(args.out, "test.tsv"))
        print(f"wrote {len(train)} train / {len(test)} test translation pairs to {args.out}")
        return EXIT_OK
    if not args.semeion:
        print("gen-data: transcription requires --semeion PATH", file=sys.stderr)
        return EXIT_DATA
    records = datasets.parse_semeion(args.semeion)
    train, test = datasets.gen_transcription_dataset(
        records, args.seed, n_train=args.n_train, n_test=args.n_test)
    datasets.write_transcription_files(
        train, os.path.join(args.out, "train-images.bin"),
        os.path.join(args.out, "train-index.tsv"))
    datasets.write_transcription_files(
        test, os.path.join(args.out, "test-images.bin"),
        os.path.join(args.out, "test-index.tsv"))
    print(f"wrote {len(train)} train / {len(test)} test composites to {args.out}")
    return EXIT_OK


def cmd_fetch_semeion(args) -> int:
    if args.offline:
        print("fetch-semeion: --offline forbids network access; "
              "provide an existing file via --semeion to other commands", file=sys.stderr)
        return EXIT_DATA
    dest = datasets.fetch_semeion(args.out, url=args.url)
    records = datasets.parse_semeion(dest)
    print(f"fetched {len(records)} records to {dest}")
    return EXIT_OK


def cmd_train(args) -> int:
    data = _load_dir_data(args.task, args.data)
    cfg = harness.TrainConfig(
        task=args.task, mode=args.mode, epochs=args.epochs,
        batch_size=args.batch, seed=args.seed)
    net, history, metrics = harness.run_single(cfg, data)
    model.save_checkpoint(net, args.out_model)
    report = {
        "task": args.task,
        "mode": args.mode,
        "seed": args.seed,
        "epochs": args.epochs,
        "batch_size": args.batch,
        "history": [{"phase": h.phase, "epoch": h.epoch, "loss": h.loss} for h in history],
        "eval": _eval_report(args.task, metrics)["eval"],
    }
    harness.write_report(report, args.out_report)
    print(f"model -> {args.out_model}; exact_match = {metrics.exact_match_rate:.3f}")
    return EXIT_OK


def cmd_eval(args) -> int:
    net = model.load_checkpoint(args.model)
    data = _load_dir_data(net.task, args.data)
    metrics = harness.evaluate(net, data)
    harness.write_report(_eval_report(net.task, metrics), args.out_report)
    print(f"exact_match = {metrics.exact_match_rate:.3f}, "
          f"char_accuracy = {metrics.char_accuracy:.3f}, "
          f"mean_levenshtein = {metrics.mean_levenshtein:.3f}")
    return EXIT_OK


def _load_demo_input(args, net: model.TraNet):
    if args.input is not None:
        if net.task != model.TRANSLATION:
            raise datasets.DatasetError("--input needs a translation model")
        x = encoding.encode_text(args.input)
        try:
            n_true = numword.parse_english(args.input)
        except numword.ParseError:
            n_true = None
        return x, n_true
    raw = np.fromfile(args.image, dtype=np.uint8)
    if raw.size != 1024:
        raise datasets.DatasetError(f"{args.image}: expected 1024 bytes, got {raw.size}")
    if net.task != model.TRANSCRIPTION:
        raise datasets.DatasetError("--image needs a transcription model")
    return (raw > 0).astype(np.float32), None


def cmd_demo(args) -> int:
    net = model.load_checkpoint(args.model)
    x, n_true = _load_demo_input(args, net)
    out = net.forward(np.atleast_2d(x))[0]
    decoded = encoding.decode_text(out)
    codes = net.encode(np.atleast_2d(x))[0]
    digits = codes.reshape(encoding.N_DIGITS, 10).argmax(axis=1)
    predicted_n = int("".join(str(d) for d in digits))
    report = harness.inspect_representation(
        net, x, n_true if n_true is not None else predicted_n)
    print(f"decoded: {decoded!r}")
    print(f"bottleneck digits: {','.join(str(d) for d in report['digits'])} "
          f"(reference n = {report['true_n']}, "
          f"L-inf distance to its code = {report['linf_distance']:.4f})")
    print("block  digit  max-activation")
    blocks = codes.reshape(encoding.N_DIGITS, 10)
    for k in range(encoding.N_DIGITS):
        print(f"{k:5d}  {blocks[k].argmax():5d}  {blocks[k].max():14.4f}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    records = None
    if args.task == model.TRANSCRIPTION:
        if not args.semeion:
            print("experiment: transcription requires --semeion PATH", file=sys.stderr)
            return EXIT_DATA
        records = datasets.parse_semeion(args.semeion)
    report = harness.run_experiment(
        args.task, args.mode, preset=args.preset, base_seed=args.seed,
        semeion_records=records, out_path=args.out)
    agg = report["aggregate"]
    print(f"mean exact_match = {agg['mean_exact']:.4f} (std {agg['std_exact']:.4f}) "
          f"over {len(report['seeds'])} repeats -> {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Plotting

def _svg_loss_curves(report: dict) -> str:
    width, height = 800, 500
    margin = 60
    points = []          # (phase, step, loss)
    for repeat in report["repeats"]:
        step_by_phase = {}
        for entry in repeat["history"]:
            phase = entry["phase"]
            step_by_phase.setdefault(phase, []).append(entry["loss"])
        for phase, losses in step_by_phase.items():
            points.append((repeat["seed"], phase, losses))
    if not points:
        raise datasets.DatasetError("report contains no training history")

    all_losses = [l for _, _, losses in points for l in losses]
    max_epochs = max(len(losses) for _, _, losses in points)
    lo, hi = 0.0, max(all_losses) or 1.0

    def sx(e):
        return margin + (width - 2 * margin) * (e / max(1, max_epochs - 1))

    def sy(l):
        return height - margin - (height - 2 * margin) * ((l - lo) / (hi - lo))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<text x="{width // 2}" y="{height - 15}" text-anchor="middle">epoch</text>',
        f'<text x="15" y="{height // 2}" text-anchor="middle" '
        f'transform="rotate(-90 15 {height // 2})">mean training loss</text>',
        f'<text x="{width // 2}" y="25" text-anchor="middle">'
        f'{report["task"]} / {report["mode"]} / {report["preset"]}</text>',
    ]
    seen_phases = []
    for seed, phase, losses in points:
        color = PHASE_COLORS.get(phase, "#777777")
        coords = " ".join(f"{sx(e):.2f},{sy(l):.2f}" for e, l in enumerate(losses))
        parts.append(f'<polyline fill="none" stroke="{color}" points="{coords}"/>')
        if phase not in seen_phases:
            seen_phases.append(phase)
    for i, phase in enumerate(seen_phases):
        y = margin + 18 * i
        color = PHASE_COLORS.get(phase, "#777777")
        parts.append(f'<line x1="{width - margin - 120}" y1="{y}" '
                     f'x2="{width - margin - 90}" y2="{y}" stroke="{color}"/>')
        parts.append(f'<text x="{width - margin - 82}" y="{y + 4}">{phase}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_plot(args) -> int:
    if args.dump_image is not None:
        raw = np.fromfile(args.dump_image, dtype=np.uint8)
        if raw.size % 1024:
            raise datasets.DatasetError(
                f"{args.dump_image}: size {raw.size} is not a multiple of 1024")
        images = raw.reshape(-1, 1024)
        if not 0 <= args.index < len(images):
            raise datasets.DatasetError(
                f"--index {args.index} out of range [0, {len(images)})")
        pixels = (images[args.index].reshape(16, 64) * 255).astype(np.uint8)
        datasets.atomic_write_bytes(args.out, b"P5\n64 16\n255\n" + pixels.tobytes())
        print(f"wrote PGM image {args.index} -> {args.out}")
        return EXIT_OK
    if args.report is None:
        print("plot: either --report or --dump-image is required", file=sys.stderr)
        return EXIT_USAGE
    with open(args.report, encoding="utf-8") as f:
        report = json.load(f)
    datasets.atomic_write_bytes(args.out, _svg_loss_curves(report).encode("utf-8"))
    print(f"wrote loss curves -> {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tranet",
        description="Number translation/transcription experiments with encouraged "
                    "bottleneck representations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate dataset files")
    p.add_argument("--task", choices=model.TASKS, required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--semeion", help="path to semeion.data (transcription only)")
    p.add_argument("--n-train", type=int, default=datasets.N_TRANSCRIPTION_TRAIN)
    p.add_argument("--n-test", type=int, default=datasets.N_TRANSCRIPTION_TEST)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("fetch-semeion", help="download and validate semeion.data")
    p.add_argument("--out", required=True)
    p.add_argument("--url", help=f"override source URL (or set ${datasets.SEMEION_URL_ENV})")
    p.add_argument("--offline", action="store_true", help="forbid network access")
    p.set_defaults(func=cmd_fetch_semeion)

    p = sub.add_parser("train", help="train one model")
    p.add_argument("--task", choices=model.TASKS, required=True)
    p.add_argument("--mode", choices=harness.MODES, required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--data", required=True, help="dataset directory from gen-data")
    p.add_argument("--out-model", required=True)
    p.add_argument("--out-report", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out-report", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("demo", help="decode one input and inspect the bottleneck")
    p.add_argument("--model", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--input", help="English verbal form (translation models)")
    group.add_argument("--image", help="raw 1024-byte composite image (transcription models)")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("experiment", help="run the repeated protocol and aggregate")
    p.add_argument("--task", choices=model.TASKS, required=True)
    p.add_argument("--mode", choices=harness.MODES, required=True)
    p.add_argument("--preset", choices=(harness.FULL, harness.SMOKE), default=harness.FULL)
    p.add_argument("--seed", type=int, default=1, help="base seed; repeats use seed..seed+k")
    p.add_argument("--semeion", help="path to semeion.data (transcription only)")
    p.add_argument("--out", required=True, help="report JSON path")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("plot", help="emit SVG loss curves or a PGM composite image")
    p.add_argument("--report", help="report JSON from train/experiment")
    p.add_argument("--dump-image", help="transcription images.bin to dump from")
    p.add_argument("--index", type=int, default=0, help="image index for --dump-image")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _print_config(args)
    try:
        return args.func(args)
    except (datasets.DatasetError, model.CheckpointError, numword.ParseError,
            encoding.EncodingError, FileNotFoundError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except harness.NonFiniteLoss as e:
        print(f"training failed: {e}", file=sys.stderr)
        return EXIT_TRAINING


if __name__ == "__main__":
    sys.exit(main())

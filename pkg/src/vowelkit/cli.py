"""Command-line entry point: extract, train, predict, evaluate, grid, report."""

import argparse
import configparser
import json
import os
import sys
from dataclasses import replace

import numpy as np

from .corpus import VOWELS, load_audio, load_phn
from .errors import FormatError, InvalidInput, TooShort, VowelkitError
from .experiment import (
    ExperimentConfig,
    RunReport,
    build_dataset,
    config_fingerprint,
    emit_report,
    evaluate,
    extract_token_features,
    frontend_for,
    grid_search,
    selection_for,
)
from .frontend import FrontendConfig
from .kernels import make_kernel
from .multiclass import load_model, predict_phoneme, save_model, train_ovo
from .preprocessing import apply_scaler
from .svm import SvmParams

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _default_workers():
    env = os.environ.get("VOWELKIT_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"VOWELKIT_WORKERS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _parse_frames(spec: str):
    """"middle:3" or "fcm:5" -> (method name, K)."""
    method, _, count = spec.partition(":")
    if method not in ("middle", "fcm") or not count.isdigit() or int(count) < 1:
        raise UsageError(f"bad --frames value {spec!r}; expected middle:K or fcm:K")
    return method, int(count)


def _split_list(raw, convert=str):
    return tuple(convert(v) for v in raw.replace(",", " ").split())


def _load_config_file(path) -> dict:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise UsageError(f"cannot read config file {path}")
    out = {}
    exp = parser["experiment"] if parser.has_section("experiment") else {}
    out["corpus_root"] = exp.get("corpus_root")
    if "phonemes" in exp:
        out["phonemes"] = _split_list(exp["phonemes"])
    if "seed" in exp:
        out["seed"] = int(exp["seed"])
    if "workers" in exp:
        out["workers"] = int(exp["workers"])
    if parser.has_section("frontend"):
        fe = parser["frontend"]
        out["frontend"] = FrontendConfig(
            pre_emphasis=fe.getfloat("pre_emphasis", 0.95),
            frame_len=fe.getint("frame_len", 256),
            hop=fe.getint("hop", 128),
            num_ceps=fe.getint("num_ceps", 12),
            num_mel_filters=fe.getint("num_mel_filters", 26),
            lp_order=fe.getint("lp_order", 12),
        )
    if parser.has_section("grid"):
        grid = parser["grid"]
        if "kernels" in grid:
            out["kernels"] = _split_list(grid["kernels"])
        if "features" in grid:
            out["features"] = _split_list(grid["features"])
        if "c" in grid:
            out["c_values"] = _split_list(grid["c"], float)
        if "sigma" in grid:
            out["sigmas"] = _split_list(grid["sigma"], float)
        if "k" in grid:
            out["k_values"] = _split_list(grid["k"], int)
        if "methods" in grid:
            out["methods"] = _split_list(grid["methods"])
    if parser.has_section("svm"):
        svm = parser["svm"]
        if "kkt_tol" in svm:
            out["kkt_tol"] = float(svm["kkt_tol"])
        if "max_passes" in svm:
            out["max_passes"] = int(svm["max_passes"])
        if "max_iter" in svm:
            out["max_iter"] = int(svm["max_iter"])
    return out


def _echo_config(pairs, stream=None):
    stream = stream or sys.stdout
    print("# config", file=stream)
    for key, value in pairs.items():
        print(f"# {key} = {value}", file=stream)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vowelkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--feature", default="mfcc36",
                       help="mfcc12, mfcc36, plp12 or plp36")
        p.add_argument("--frames", default="middle:3", help="middle:K or fcm:K")
        p.add_argument("--phonemes", default=None,
                       help="space/comma-separated whitelist (default: 20 vowels)")

    p = sub.add_parser("extract", help="corpus to feature cache (.npz)")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    add_common(p)

    p = sub.add_parser("train", help="train a one-vs-one model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--kernel", default="rbf",
                   choices=["rbf", "polynomial", "sigmoid", "linear"])
    p.add_argument("--sigma", type=float, default=0.027)
    p.add_argument("--C", type=float, default=10.0, dest="c_value")
    p.add_argument("--psd-check", action="store_true",
                   help="report the training Gram's minimum eigenvalue per pair")
    add_common(p)

    p = sub.add_parser("predict", help="label phoneme tokens in one utterance")
    p.add_argument("--model", required=True)
    p.add_argument("--audio", required=True)
    p.add_argument("--phn", required=True)
    p.add_argument("--sample-rate", type=int, default=None)
    add_common(p)

    p = sub.add_parser("evaluate", help="score a model on the test split")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    add_common(p)

    p = sub.add_parser("grid", help="full parameter sweep, reports to a directory")
    p.add_argument("--config", default=None)
    p.add_argument("--corpus", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--save-best", action="store_true")

    p = sub.add_parser("report", help="re-render a stored report")
    p.add_argument("--infile", required=True, dest="infile")
    p.add_argument("--out", required=True)
    p.add_argument("--format", default="markdown", choices=["csv", "markdown"])
    return parser


def _pipeline_pieces(args):
    frontend = frontend_for(args.feature)
    method, k = _parse_frames(args.frames)
    selection = selection_for(method, k, seed=args.seed)
    phonemes = _split_list(args.phonemes) if args.phonemes else VOWELS
    return frontend, selection, phonemes


def _cmd_extract(args):
    from .corpus import load_corpus_tokens

    frontend, _selection, phonemes = _pipeline_pieces(args)
    tokens = load_corpus_tokens(args.corpus, whitelist=phonemes)
    if not tokens:
        raise InvalidInput(f"no usable tokens under {args.corpus}")
    token_feats = extract_token_features(tokens, frontend)
    arrays = {}
    meta = []
    for idx, (token, feats) in enumerate(token_feats):
        meta.append({
            "utterance_id": token.utterance_id, "label": token.label,
            "begin": token.begin, "end": token.end, "split": token.split,
            "skipped": feats is None,
        })
        if feats is not None:
            arrays[f"feat_{idx}"] = feats
    arrays["meta"] = np.array(json.dumps({"feature": args.feature, "tokens": meta}))
    np.savez(args.out, **arrays)
    _echo_config({"command": "extract", "corpus": args.corpus, "feature": args.feature,
                  "phonemes": " ".join(phonemes), "seed": args.seed, "out": args.out})
    kept = sum(1 for m in meta if not m["skipped"])
    print(f"wrote {kept} token feature matrices ({len(meta) - kept} skipped) to {args.out}")
    return EXIT_OK


def _cmd_train(args):
    from .corpus import load_corpus_tokens

    frontend, selection, phonemes = _pipeline_pieces(args)
    tokens = [t for t in load_corpus_tokens(args.corpus, whitelist=phonemes)
              if t.split == "train"]
    if not tokens:
        raise InvalidInput(f"no training tokens under {args.corpus}")
    train, _test, scaler = build_dataset(tokens, frontend, selection)
    kernel = make_kernel(args.kernel, args.sigma)
    params = SvmParams(C=args.c_value, kernel=kernel)
    model = train_ovo(train.as_labeled(), params, fingerprint=train.fingerprint, scaler=scaler)
    if args.psd_check:
        from .kernels import gram_matrix, psd_check

        _is_psd, min_eig = psd_check(gram_matrix(kernel, train.X), tol=1e-8)
        print(f"# training Gram minimum eigenvalue: {min_eig:.6g}")
    save_model(model, args.out)
    _echo_config({"command": "train", "corpus": args.corpus, "kernel": args.kernel,
                  "sigma": args.sigma, "C": args.c_value, "feature": args.feature,
                  "frames": args.frames, "phonemes": " ".join(phonemes),
                  "seed": args.seed, "out": args.out})
    bad = model.diagnostics["not_converged"]
    print(f"trained {len(model.binaries)} binary models "
          f"({len(model.binaries) - len(bad)} converged) on {train.n_tokens} tokens")
    return EXIT_OK


def _cmd_predict(args):
    frontend, selection, phonemes = _pipeline_pieces(args)
    model = load_model(args.model)
    expected = config_fingerprint(frontend, selection, model.label_names)
    if model.fingerprint and model.fingerprint != expected:
        raise InvalidInput(
            "model was built with a different frontend/selection configuration; "
            "pass matching --feature/--frames"
        )
    signal = load_audio(args.audio, sample_rate=args.sample_rate)
    tokens = load_phn(args.phn, whitelist=phonemes, n_samples=signal.samples.size,
                      audio_path=args.audio)
    _echo_config({"command": "predict", "model": args.model, "audio": args.audio,
                  "phn": args.phn, "feature": args.feature, "frames": args.frames,
                  "seed": args.seed})
    from .frontend import RawSignal, extract_features
    from .frame_select import select_frames

    for token in tokens:
        piece = RawSignal(signal.samples[token.begin : token.end], signal.sample_rate)
        try:
            feats = extract_features(piece, frontend)
        except TooShort:
            print(f"{token.utterance_id} {token.begin} {token.end} {token.label} -")
            continue
        picked = select_frames(feats, selection)
        scaled = apply_scaler(model.scaler, picked) if model.scaler else picked
        pred = model.label_names[predict_phoneme(model, scaled)]
        print(f"{token.utterance_id} {token.begin} {token.end} {token.label} {pred}")
    return EXIT_OK


def _cmd_evaluate(args):
    from .corpus import load_corpus_tokens

    frontend, selection, phonemes = _pipeline_pieces(args)
    model = load_model(args.model)
    tokens = load_corpus_tokens(args.corpus, whitelist=phonemes)
    _train, test, _scaler = build_dataset(tokens, frontend, selection,
                                          label_names=model.label_names)
    metrics = evaluate(model, test)
    _echo_config({"command": "evaluate", "model": args.model, "corpus": args.corpus,
                  "feature": args.feature, "frames": args.frames, "seed": args.seed})
    print(f"frame_accuracy: {metrics['frame_accuracy']:.2f}")
    print(f"phoneme_accuracy: {metrics['phoneme_accuracy']:.2f}")
    print(f"n_test_tokens: {test.n_tokens}")
    print(f"skipped_tokens: {test.skipped}")
    return EXIT_OK


def _cmd_grid(args):
    overrides = {}
    if args.config:
        overrides = _load_config_file(args.config)
    if args.corpus:
        overrides["corpus_root"] = args.corpus
    if args.seed is not None:
        overrides["seed"] = args.seed
    overrides["workers"] = args.workers if args.workers is not None else \
        overrides.get("workers", _default_workers())
    if not overrides.get("corpus_root"):
        raise UsageError("grid needs --corpus or a config file with corpus_root")
    config = ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})
    os.makedirs(args.out, exist_ok=True)
    save_best = os.path.join(args.out, "best.svmodel") if args.save_best else None
    report = grid_search(config, save_best=save_best)
    emit_report(report, "csv", os.path.join(args.out, "report.csv"))
    emit_report(report, "markdown", os.path.join(args.out, "report.md"))
    emit_report(report, "json", os.path.join(args.out, "report.json"))
    _echo_config(report.config_echo)
    failed = sum(1 for c in report.cells if c.error)
    print(f"{len(report.cells)} cells ({failed} failed) -> {args.out}")
    return EXIT_OK


def _cmd_report(args):
    try:
        with open(args.infile, "r", encoding="utf-8") as fh:
            report = RunReport.from_dict(json.load(fh))
    except (OSError, KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot parse report {args.infile}: {exc}") from exc
    os.makedirs(args.out, exist_ok=True)
    ext = "md" if args.format == "markdown" else "csv"
    out_path = os.path.join(args.out, f"report.{ext}")
    emit_report(report, args.format, out_path)
    print(f"re-rendered {args.infile} -> {out_path}")
    return EXIT_OK


_COMMANDS = {
    "extract": _cmd_extract,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "grid": _cmd_grid,
    "report": _cmd_report,
}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, TooShort) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InvalidInput as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except VowelkitError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()

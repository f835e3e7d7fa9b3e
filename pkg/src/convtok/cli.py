"""Command-line interface.

Subcommands: ingest, train, encode, fertility, exp1, exp2, exp3, report,
samples. Successful runs exit 0 and print a JSON summary line; failures exit
nonzero with a machine-readable JSON error line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .corpus import (
    RoleFilter,
    SplitSpec,
    extract_text,
    language_histogram,
    load_conversations,
    load_documents,
)
from .errors import ConvtokError
from .experiments import (
    ExperimentSpec,
    Workspace,
    emit_plot_data,
    load_report,
    run_experiment1,
    run_experiment2,
    run_experiment3,
    write_report,
)
from .metrics import fertility
from .samples import DEFAULT_CONV_BYTES, DEFAULT_DOC_BYTES, DEFAULT_SEED, write_sample_corpora
from .tokenizer import PretokenScheme, TokenizerMode, encode, load_model, save_model
from .trainer import TrainConfig, train_bpe

EXPERIMENTS = {"exp1": run_experiment1, "exp2": run_experiment2, "exp3": run_experiment3}


def _emit(obj: dict) -> None:
    print(json.dumps(obj, ensure_ascii=False))


def _load_corpus_texts(path: str, fmt: str, role_filter: str, lmsys: bool) -> list[str]:
    """Texts from a corpus path that is either conversations or documents."""
    if fmt == "auto":
        fmt = "conversations" if _sniff_conversations(path, lmsys) else "documents"
    if fmt == "conversations":
        conversations = load_conversations(path, lmsys=lmsys)
        return extract_text(conversations, RoleFilter(role_filter))
    return list(load_documents(path).documents)


def _sniff_conversations(path: str, lmsys: bool) -> bool:
    key = "conversation" if lmsys else "turns"
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for line in fh:
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                return False
            return isinstance(obj, dict) and key in obj
    return False


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_ingest(args) -> None:
    summary: dict = {}
    if args.conversations:
        conversations = load_conversations(args.conversations, lmsys=args.lmsys)
        histogram = language_histogram(conversations)
        summary["conversations"] = len(conversations)
        summary["languages"] = dict(sorted(histogram.items(), key=lambda kv: (-kv[1], kv[0])))
        if args.out:
            out = Path(args.out)
            out.parent.mkdir(parents=True, exist_ok=True)
            with open(out, "w", encoding="utf-8") as fh:
                for r in conversations.records:
                    fh.write(json.dumps({
                        "id": r.id,
                        "model": r.model_name,
                        "language": r.language,
                        "turns": [{"role": role, "content": content} for role, content in r.turns],
                    }, ensure_ascii=False, separators=(",", ":")) + "\n")
            summary["out"] = str(out)
    if args.documents:
        summary["documents"] = len(load_documents(args.documents))
    if not summary:
        raise ConvtokError("nothing to ingest: pass --conversations and/or --documents")
    _emit(summary)


def _cmd_train(args) -> None:
    corpus = _load_corpus_texts(args.corpus, args.format, args.role_filter, args.lmsys)
    config = TrainConfig(
        vocab_size=args.vocab_size,
        mode=TokenizerMode(args.mode),
        scheme=PretokenScheme(args.scheme),
        min_pair_frequency=args.min_pair_frequency,
    )
    model = train_bpe(corpus, config)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_model(model, args.out)
    _emit({"out": args.out, "vocab_size": len(model.vocab), "merges": len(model.merges)})


def _cmd_encode(args) -> None:
    model = load_model(args.model)
    if args.text is not None:
        text = args.text
    elif args.input:
        text = Path(args.input).read_text(encoding="utf-8")
    else:
        text = sys.stdin.read()
    ids = encode(model, text)
    if args.count_only:
        _emit({"n_tokens": len(ids)})
    else:
        print(json.dumps(ids))


def _cmd_fertility(args) -> None:
    model = load_model(args.model)
    texts = _load_corpus_texts(args.input, args.format, args.role_filter, args.lmsys)
    result = fertility(model, texts)
    _emit({
        "n_tokens": result.n_tokens,
        "n_words": result.n_words,
        "fertility": round(result.fertility, 6),
    })


def _experiment_spec(args) -> ExperimentSpec:
    return ExperimentSpec(
        conversations_path=Path(args.conversations),
        documents_path=Path(args.documents),
        output_dir=Path(args.out),
        split=SplitSpec(train_fraction=args.train_fraction, seed=args.seed),
        base_model_path=Path(args.base_model) if args.base_model else None,
        role_filters=tuple(dict.fromkeys(RoleFilter(f) for f in args.role_filter))
        if args.role_filter
        else (RoleFilter.USER_ONLY, RoleFilter.ASSISTANT_ONLY, RoleFilter.BOTH),
        vocab_size=args.vocab_size,
        mode=TokenizerMode(args.mode),
        scheme=PretokenScheme(args.scheme),
        min_pair_frequency=args.min_pair_frequency,
        language_threshold=args.threshold,
        doc_sample_bytes=args.doc_sample_bytes,
        lmsys_format=args.lmsys,
    )


def _cmd_experiment(args) -> None:
    spec = _experiment_spec(args)
    report = EXPERIMENTS[args.command](spec)
    # models live under <out>/models and are shared by exp1/exp2/exp3;
    # report files get a subdirectory per experiment so they never clobber
    out = Path(args.out) / report.experiment
    files = write_report(report, out) + emit_plot_data(report, out)
    _emit({
        "experiment": report.experiment,
        "rows": len(report.rows),
        "config_hash": report.provenance.config_hash,
        "files": [str(p) for p in files],
    })


def _cmd_report(args) -> None:
    report = load_report(args.report)
    out = Path(args.out)
    files = write_report(report, out) + emit_plot_data(report, out)
    _emit({"experiment": report.experiment, "files": [str(p) for p in files]})


def _cmd_samples(args) -> None:
    docs_path, convs_path = write_sample_corpora(
        args.out, seed=args.seed, doc_bytes=args.doc_bytes, conv_bytes=args.conv_bytes
    )
    _emit({"documents": str(docs_path), "conversations": str(convs_path)})


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_model_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mode", choices=[m.value for m in TokenizerMode],
                        default=TokenizerMode.BYTE_LEVEL.value)
    parser.add_argument("--scheme", choices=[s.value for s in PretokenScheme],
                        default=PretokenScheme.CATEGORY_SPLIT.value)
    parser.add_argument("--vocab-size", type=int, default=8192)
    parser.add_argument("--min-pair-frequency", type=int, default=2)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convtok",
        description="Train and evaluate conversation-optimized BPE tokenizers.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate corpora and report statistics")
    p.add_argument("--conversations")
    p.add_argument("--documents")
    p.add_argument("--lmsys", action="store_true", help="map LMSYS field names")
    p.add_argument("--out", help="write normalized conversation JSONL here")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("train", help="train a tokenizer on a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=["auto", "conversations", "documents"], default="auto")
    p.add_argument("--role-filter", choices=[f.value for f in RoleFilter], default="both")
    p.add_argument("--lmsys", action="store_true")
    _add_model_config_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("encode", help="encode text with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--text")
    p.add_argument("--input", help="read text from this file (default: stdin)")
    p.add_argument("--count-only", action="store_true")
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("fertility", help="tokens per word of a model on a corpus")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["auto", "conversations", "documents"], default="auto")
    p.add_argument("--role-filter", choices=[f.value for f in RoleFilter], default="both")
    p.add_argument("--lmsys", action="store_true")
    p.set_defaults(func=_cmd_fertility)

    for name, help_text in (
        ("exp1", "baseline fertility: documents vs conversations"),
        ("exp2", "retrain on conversations, measure reduction on held-out split"),
        ("exp3", "retrained tokenizers back on the document corpus"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--conversations", required=True)
        p.add_argument("--documents", required=True)
        p.add_argument("--base-model")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--train-fraction", type=float, default=0.8)
        p.add_argument("--threshold", type=int, default=1000,
                       help="per-language rows need more conversations than this")
        p.add_argument("--doc-sample-bytes", type=int, default=8 << 20)
        p.add_argument("--role-filter", action="append",
                       choices=[f.value for f in RoleFilter],
                       help="repeatable; default: user, assistant, both")
        p.add_argument("--lmsys", action="store_true")
        _add_model_config_args(p)
        p.add_argument("--out", required=True)
        p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("report", help="regenerate CSV and plot files from report.json")
    p.add_argument("--report", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("samples", help="write deterministic sample corpora")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--doc-bytes", type=int, default=DEFAULT_DOC_BYTES)
    p.add_argument("--conv-bytes", type=int, default=DEFAULT_CONV_BYTES)
    p.set_defaults(func=_cmd_samples)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ConvtokError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1
    except OSError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

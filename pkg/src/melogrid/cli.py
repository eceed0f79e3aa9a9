"""Command-line entry point: ``melogrid <command> ...``.

Data goes to files (or stdout when no output path is given); diagnostics go
to stderr. The exit status is 1 when any record failed, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .codec import TokenSequence, decode, encode, truncate_tokens
from .corpus import (
    Corpus,
    SplitSpec,
    filter_four_four,
    format_id_file,
    format_token_file,
    load_any,
    melody_to_record,
    split,
    write_atomic,
)
from .errors import InsufficientDataError, MalformedSequenceError, RecordError, TokenLookupError
from .melody import quantize
from .metrics import METRIC_NAMES, MetricReport, report
from .stats import DistributionComparison, TestOutcome, compare_sets, holm_bonferroni, paired_t_test, wilcoxon_signed_rank
from .vocab import EncodingConfig, build_vocabulary

log = logging.getLogger("melogrid")

TOKEN_SUFFIXES = (".tok", ".tokens", ".txt")
TABLE_SUFFIXES = (".tsv",)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _render(header: Sequence[str], rows: list[Sequence], style: str) -> str:
    if style == "delimited":
        return "".join("\t".join(_fmt(v) for v in row) + "\n" for row in [header, *rows])

    def cell(v):
        return f"{v:.3g}" if isinstance(v, float) else _fmt(v)

    cells = [list(header)] + [[cell(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n" for r in cells)


def _emit(text: str, out: str | None, config: dict | None = None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
        return
    write_atomic(out, text)
    if config is not None:
        _echo_config(Path(out).with_name(Path(out).name + ".config.json"), config)


def _echo_config(path: Path, config: dict) -> None:
    write_atomic(path, json.dumps(config, indent=2, sort_keys=True) + "\n")


def _config(args) -> EncodingConfig:
    return EncodingConfig.make(args.pitch, args.pc, args.pr, args.dr)


def _report_diagnostics(source, diagnostics) -> int:
    for lineno, msg in diagnostics:
        print(f"{source}:{lineno}: {msg}", file=sys.stderr)
    return len(diagnostics)


def _input_kind(path: str, forced: str) -> str:
    if forced != "auto":
        return forced
    p = Path(path)
    if p.suffix.lower() in TABLE_SUFFIXES:
        return "metrics"
    if p.suffix.lower() in TOKEN_SUFFIXES:
        return "tokens"
    return "melodies"


def _read_tokens(path: str, vocab) -> tuple[list[tuple[int, TokenSequence]], list[tuple[int, str]]]:
    seqs, diagnostics = [], []
    stem = Path(path).stem
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            try:
                seqs.append((lineno, TokenSequence.from_text(line, vocab, f"{stem}-{lineno}")))
            except TokenLookupError as exc:
                diagnostics.append((lineno, str(exc)))
    return seqs, diagnostics


def _quantized_input(path: str, kind: str, cfg: EncodingConfig):
    """Quantized melodies from a melody/MIDI file or a token file."""
    failures = 0
    if kind == "tokens":
        vocab = build_vocabulary(cfg)
        seqs, diagnostics = _read_tokens(path, vocab)
        failures += _report_diagnostics(path, diagnostics)
        out = []
        for lineno, seq in seqs:
            try:
                out.append(decode(seq, vocab))
            except MalformedSequenceError as exc:
                failures += _report_diagnostics(path, [(lineno, str(exc))])
        return out, failures
    corpus, diagnostics = load_any(path)
    failures += _report_diagnostics(path, diagnostics)
    return [quantize(m, cfg.dr) for m in corpus], failures


def _read_metric_table(path: str) -> list[MetricReport]:
    reports = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header[1:] != list(METRIC_NAMES):
            raise RecordError(path, [(1, f"expected columns id, {', '.join(METRIC_NAMES)}")])
        for line in fh:
            cols = line.rstrip("\n").split("\t")
            reports.append(MetricReport(*(float(c) if c else None for c in cols[1:])))
    return reports


def _reports(path: str, kind: str, cfg: EncodingConfig) -> tuple[list[MetricReport], int]:
    if kind == "metrics":
        return _read_metric_table(path), 0
    qs, failures = _quantized_input(path, kind, cfg)
    return [report(q) for q in qs], failures


# -- commands ------------------------------------------------------------------

def cmd_prepare(args) -> int:
    corpus, diagnostics = load_any(args.input)
    failures = _report_diagnostics(args.input, diagnostics)
    loaded = len(corpus) + failures
    kept = filter_four_four(corpus, bar_check=args.bar_check)
    counts = [("records", loaded), ("invalid", failures), ("valid", len(corpus)),
              ("filtered", len(corpus) - len(kept)), ("kept", len(kept))]
    out = Path(args.out_dir)
    if len(kept):
        train, test = split(kept, SplitSpec(args.train_fraction, args.seed))
    else:
        train, test = Corpus(), Corpus()
    for name, part in (("train", train), ("test", test)):
        write_atomic(out / f"{name}.jsonl", "".join(melody_to_record(m) + "\n" for m in part))
    counts += [("train", len(train)), ("test", len(test))]
    _echo_config(out / "config.json", {
        "command": "prepare", "input": str(args.input), "train_fraction": args.train_fraction,
        "seed": args.seed, "bar_check": args.bar_check})
    sys.stdout.write(_render(("stage", "count"), counts, args.format))
    return 1 if failures else 0


def cmd_encode(args) -> int:
    cfg = _config(args)
    vocab = build_vocabulary(cfg)
    corpus, diagnostics = load_any(args.input)
    failures = _report_diagnostics(args.input, diagnostics)
    seqs = [encode(quantize(m, cfg.dr), vocab) for m in corpus]
    if args.max_len:
        seqs = [truncate_tokens(s, args.max_len) for s in seqs]
    meta = {"command": "encode", "input": str(args.input), **cfg.as_dict(), "max_len": args.max_len}
    _emit(format_token_file(seqs), args.output, meta)
    if args.ids:
        _emit(format_id_file(seqs, vocab), args.ids, meta)
    return 1 if failures else 0


def cmd_decode(args) -> int:
    cfg = _config(args)
    qs, failures = _quantized_input(args.input, "tokens", cfg)
    text = "".join(melody_to_record(q.to_melody()) + "\n" for q in qs)
    _emit(text, args.output, {"command": "decode", "input": str(args.input), **cfg.as_dict()})
    return 1 if failures else 0


def cmd_metrics(args) -> int:
    cfg = _config(args)
    qs, failures = _quantized_input(args.input, _input_kind(args.input, args.input_format), cfg)
    rows = [[q.id, *report(q, harmonic_minor=args.harmonic_minor).as_tuple()] for q in qs]
    for j, name in enumerate(METRIC_NAMES, 1):
        missing = sum(row[j] is None for row in rows)
        if missing:
            log.warning("%s undefined for %d of %d melodies", name, missing, len(rows))
    _emit(_render(("id", *METRIC_NAMES), rows, args.format), args.output,
          {"command": "metrics", "input": str(args.input), **cfg.as_dict(),
           "harmonic_minor": args.harmonic_minor})
    return 1 if failures else 0


def comparison_rows(comps: Sequence[DistributionComparison]) -> list[list]:
    return [[c.metric_name, c.oa, c.w1, c.n_model, c.n_reference] for c in comps]


def cmd_compare(args) -> int:
    cfg = _config(args)
    model, f1 = _reports(args.model, _input_kind(args.model, args.input_format), cfg)
    ref, f2 = _reports(args.reference, _input_kind(args.reference, args.input_format), cfg)
    if not model or not ref:
        print("compare: both inputs must contain at least one melody", file=sys.stderr)
        return 1
    comps = compare_sets(model, ref)
    _emit(_render(("metric", "oa", "w1", "n_model", "n_reference"), comparison_rows(comps), args.format),
          args.output, {"command": "compare", "model": str(args.model),
                        "reference": str(args.reference), **cfg.as_dict()})
    return 1 if f1 or f2 else 0


def _read_oa(path: str) -> dict[str, float | None]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header[:2] != ["metric", "oa"]:
            raise RecordError(path, [(1, "expected a comparison table (metric, oa, ...)")])
        out = {}
        for line in fh:
            cols = line.rstrip("\n").split("\t")
            out[cols[0]] = float(cols[1]) if cols[1] else None
    return out


def run_tests(group_a: Sequence[dict], group_b: Sequence[dict], alpha: float = 0.05,
              method: str = "wilcoxon") -> list[TestOutcome]:
    """Paired test of OA per metric across runs, Holm-corrected over the family."""
    outcomes = []
    for name in METRIC_NAMES:
        pairs = [(a.get(name), b.get(name)) for a, b in zip(group_a, group_b)]
        pairs = [(x, y) for x, y in pairs if x is not None and y is not None]
        xs, ys = [p[0] for p in pairs], [p[1] for p in pairs]
        try:
            if method == "ttest":
                outcomes.append(paired_t_test(xs, ys, name))
            else:
                outcomes.append(wilcoxon_signed_rank(xs, ys, name))
        except InsufficientDataError as exc:
            log.warning("skipping %s: %s", name, exc)
    return holm_bonferroni(outcomes, alpha) if outcomes else []


def cmd_test(args) -> int:
    if len(args.group_a) != len(args.group_b):
        print(f"test: {len(args.group_a)} tables in group A but {len(args.group_b)} in group B",
              file=sys.stderr)
        return 2
    a = [_read_oa(p) for p in args.group_a]
    b = [_read_oa(p) for p in args.group_b]
    outcomes = run_tests(a, b, args.alpha, args.method)
    rows = [[t.metric_name, t.statistic, t.p_value, t.adjusted_alpha, t.rejected] for t in outcomes]
    _emit(_render(("metric", "statistic", "p", "adjusted_alpha", "rejected"), rows, args.format),
          args.output, {"command": "test", "alpha": args.alpha, "method": args.method,
                        "group_a": args.group_a, "group_b": args.group_b})
    return 0


def cmd_vocab(args) -> int:
    vocab = build_vocabulary(_config(args))
    _emit(vocab.dump(), args.output)
    return 0


# -- argument parsing ------------------------------------------------------------

def _add_config(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("encoding")
    g.add_argument("--pitch", choices=["number", "class_octave"], default="number")
    g.add_argument("--pc", choices=["single", "multiple"], default="single",
                   help="position complexity (ignored when --pr <= 1)")
    g.add_argument("--pr", type=int, default=16, help="grid positions per bar")
    g.add_argument("--dr", type=int, default=4, help="steps per quarter note")


def _add_format(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=["delimited", "table"], default="delimited")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="melogrid", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="validate, filter and split a corpus")
    p.add_argument("input", help="melody file, MIDI file, or directory of them")
    p.add_argument("out_dir")
    p.add_argument("--train-fraction", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-bar-check", dest="bar_check", action="store_false",
                   help="keep melodies that declare a meter other than 4/4")
    _add_format(p)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("encode", help="melodies -> token file")
    p.add_argument("input")
    p.add_argument("output", nargs="?")
    p.add_argument("--ids", help="also write vocabulary ids to this file")
    p.add_argument("--max-len", type=int, default=0, help="truncate sequences (0 = no limit)")
    _add_config(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="token file -> melodies (tpqn = dr)")
    p.add_argument("input")
    p.add_argument("output", nargs="?")
    _add_config(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("metrics", help="per-melody metric table")
    p.add_argument("input")
    p.add_argument("output", nargs="?")
    p.add_argument("--input-format", choices=["auto", "melodies", "tokens"], default="auto")
    p.add_argument("--harmonic-minor", action="store_true",
                   help="use harmonic instead of natural minor for scale consistency")
    _add_config(p)
    _add_format(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("compare", help="OA and W1 per metric between two sets")
    p.add_argument("model")
    p.add_argument("reference")
    p.add_argument("output", nargs="?")
    p.add_argument("--input-format", choices=["auto", "melodies", "tokens", "metrics"], default="auto")
    _add_config(p)
    _add_format(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("test", help="paired tests on OA across runs, Holm-Bonferroni corrected")
    p.add_argument("-a", "--group-a", nargs="+", required=True, help="comparison tables, group A")
    p.add_argument("-b", "--group-b", nargs="+", required=True, help="comparison tables, group B (same order)")
    p.add_argument("-o", "--output")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--method", choices=["wilcoxon", "ttest"], default="wilcoxon")
    _add_format(p)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("vocab", help="dump the vocabulary as <id>TAB<token>")
    p.add_argument("output", nargs="?")
    _add_config(p)
    p.set_defaults(func=cmd_vocab)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (OSError, RecordError, ValueError) as exc:
        print(f"{parser.prog} {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

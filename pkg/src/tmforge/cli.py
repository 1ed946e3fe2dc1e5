"""forge: command line interface to the TM building pipeline."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from . import alignment as al
from . import extraction as ex
from .cleaning import DEFAULT_CHECKS, clean
from .crawler import crawl, prune_noise
from .manifest import (
    ManifestError,
    load_anchors_tsv,
    load_chain_file,
    load_crawl_manifest,
    load_project_manifest,
)
from .pairing import RenameRule, batch_rename, detect_duplicates, pair_documents
from .pipeline import PipelineError, run_pipeline
from .review import make_server
from .tmx_store import (
    TmHeader,
    compile_alignments,
    corpus_stats,
    format_stats_table,
    read_tmx,
    to_parallel_text,
    write_tmx,
)

log = logging.getLogger("tmforge")


def _print_json(data) -> None:
    print(json.dumps(data, indent=2, ensure_ascii=False))


def cmd_crawl(args) -> int:
    manifest = load_crawl_manifest(args.manifest)
    files, report = crawl(manifest)
    _print_json(report.to_dict())
    return 0 if not report.failures or args.ignore_failures else 1


def cmd_prune(args) -> int:
    report = prune_noise(Path(args.directory), args.keep, force=args.force)
    _print_json({"kept": len(report.kept), "quarantined": len(report.quarantined)})
    return 0


def cmd_rename(args) -> int:
    rule = RenameRule(find=args.find, replace=args.replace, regex=args.regex)
    report = batch_rename(Path(args.directory), rule)
    _print_json(report.renames)
    return 0


def cmd_dedup(args) -> int:
    report = detect_duplicates(Path(args.directory))
    _print_json(
        {
            "removed": report.removed_count,
            "groups": [
                {"kept": g.kept, "quarantined": g.quarantined} for g in report.groups
            ],
            "skipped_unreadable": report.skipped_unreadable,
        }
    )
    return 0


def cmd_pair(args) -> int:
    pairs = pair_documents(
        Path(args.source_dir), Path(args.target_dir), args.source_prefix, args.target_prefix
    )
    data = {
        "pairs": [
            {"key": p.key, "source": str(p.source_path), "target": str(p.target_path)}
            for p in pairs.pairs
        ],
        "unpaired_source": pairs.unpaired_source,
        "unpaired_target": pairs.unpaired_target,
    }
    if args.out:
        Path(args.out).write_text(
            json.dumps(data, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
    _print_json(
        {
            "pairs": len(pairs.pairs),
            "unpaired_source": pairs.unpaired_source,
            "unpaired_target": pairs.unpaired_target,
        }
    )
    return 0


def cmd_extract(args) -> int:
    chains = load_chain_file(args.chain)
    pairs = json.loads(Path(args.pairs).read_text(encoding="utf-8"))["pairs"]
    root = Path(args.root) if args.root else Path(".")
    langs = {"source": args.source_lang, "target": args.target_lang}
    out = {"source": {}, "target": {}, "meta": {}}
    for pair in pairs:
        key = pair["key"]
        out["meta"][key] = {}
        for side in ("source", "target"):
            raw = (root / pair[side]).read_bytes()
            decoded = ex.decode_bytes(raw, chains[side].encoding)
            result = ex.extract(decoded.text, chains[side].chain)
            if not result.matched:
                log.warning("no span rule matched %s side of %s", side, key)
            doc = ex.segment_sentences(result.blocks, langs[side], doc_key=key)
            out[side][key] = ex.segmented_to_dict(doc)
            out["meta"][key][side] = {
                "encoding": decoded.encoding_used,
                "replacements": decoded.replacements,
                "matched": result.matched,
            }
    Path(args.out).write_text(
        json.dumps(out, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    print("segmented %d pairs -> %s" % (len(pairs), args.out))
    return 0


def cmd_align(args) -> int:
    segments = json.loads(Path(args.segments).read_text(encoding="utf-8"))
    anchors = load_anchors_tsv(args.anchors) if args.anchors else []
    params = al.AlignParams(
        c=args.c,
        s2=args.s2,
        anchor_bonus=args.anchor_bonus,
        confidence_threshold=args.confidence_threshold,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    total = review = 0
    for key in sorted(segments["source"]):
        src = ex.segmented_from_dict(segments["source"][key])
        tgt = ex.segmented_from_dict(segments["target"][key])
        result = al.align(src, tgt, anchors, params)
        (out_dir / ("%s.json" % key)).write_text(
            json.dumps(al.alignment_to_dict(result), indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        total += len(result.beads)
        review += sum(b.needs_review for b in result.beads)
    print("aligned %d documents: %d beads, %d need review" % (len(segments["source"]), total, review))
    return 0


def cmd_compile(args) -> int:
    segments = json.loads(Path(args.segments).read_text(encoding="utf-8"))
    align_dir = Path(args.alignments)
    alignments, src_docs, tgt_docs = [], [], []
    for key in sorted(segments["source"]):
        alignments.append(
            al.alignment_from_dict(
                json.loads((align_dir / ("%s.json" % key)).read_text(encoding="utf-8"))
            )
        )
        src_docs.append(ex.segmented_from_dict(segments["source"][key]))
        tgt_docs.append(ex.segmented_from_dict(segments["target"][key]))
    header = TmHeader(src_lang=args.source_lang, tgt_lang=args.target_lang)
    tm, report = compile_alignments(alignments, src_docs, tgt_docs, header)
    write_tmx(tm, Path(args.out))
    print("compiled %d units (%d beads dropped) -> %s" % (report.tu_count, report.dropped_beads, args.out))
    return 0


def cmd_clean(args) -> int:
    tm = read_tmx(Path(args.tmx))
    checks = tuple(int(c) for c in args.checks.split(",")) if args.checks else DEFAULT_CHECKS
    cleaned, report = clean(tm, checks=checks, max_tokens=args.max_tokens)
    write_tmx(cleaned, Path(args.out))
    if args.report:
        Path(args.report).write_text(
            json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
    print(
        "cleaned %d -> %d units (%d removed) -> %s"
        % (report.input_count, report.output_count, report.removed_total, args.out)
    )
    return 0


def cmd_convert(args) -> int:
    tm = read_tmx(Path(args.tmx))
    src_lines, tgt_lines = to_parallel_text(tm)
    Path(args.source_out).write_text("\n".join(src_lines) + "\n", encoding="utf-8")
    Path(args.target_out).write_text("\n".join(tgt_lines) + "\n", encoding="utf-8")
    print("wrote %d aligned lines to %s / %s" % (len(src_lines), args.source_out, args.target_out))
    return 0


def cmd_stats(args) -> int:
    tm = read_tmx(Path(args.tmx))
    print(format_stats_table(corpus_stats(tm, name=args.name or Path(args.tmx).stem)))
    return 0


def cmd_run(args) -> int:
    manifest = load_project_manifest(args.manifest)
    report = run_pipeline(manifest, from_stage=args.from_stage)
    _print_json(report.to_dict())
    return 0


def cmd_review(args) -> int:
    server = make_server(
        Path(args.tmx),
        Path(args.log),
        host=args.host,
        port=args.port,
        ui_dir=Path(args.ui) if args.ui else None,
        threshold=args.threshold,
    )
    host, port = server.server_address[:2]
    print("review service at http://%s:%d/ (decision log: %s)" % (host, port, args.log))
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forge", description="Build translation memories from bilingual websites."
    )
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("crawl", help="mirror a website per a crawl manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--ignore-failures", action="store_true")
    p.set_defaults(func=cmd_crawl)

    p = sub.add_parser("prune", help="quarantine files not matching keep patterns")
    p.add_argument("directory")
    p.add_argument("--keep", action="append", default=[], help="glob or re: pattern (repeatable)")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("rename", help="batch rename basenames in a directory")
    p.add_argument("directory")
    p.add_argument("--find", required=True)
    p.add_argument("--replace", required=True)
    p.add_argument("--regex", action="store_true")
    p.set_defaults(func=cmd_rename)

    p = sub.add_parser("dedup", help="quarantine byte-identical duplicate files")
    p.add_argument("directory")
    p.set_defaults(func=cmd_dedup)

    p = sub.add_parser("pair", help="pair documents by prefixed filenames")
    p.add_argument("source_dir")
    p.add_argument("target_dir")
    p.add_argument("--source-prefix", required=True)
    p.add_argument("--target-prefix", required=True)
    p.add_argument("--out", help="write pairs JSON here")
    p.set_defaults(func=cmd_pair)

    p = sub.add_parser("extract", help="decode, filter and segment paired documents")
    p.add_argument("--chain", required=True, help="YAML with source/target extraction settings")
    p.add_argument("--pairs", required=True)
    p.add_argument("--root", help="directory pair paths are relative to")
    p.add_argument("--source-lang", required=True)
    p.add_argument("--target-lang", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("align", help="align segmented documents")
    p.add_argument("--segments", required=True)
    p.add_argument("--anchors", help="TSV of source<TAB>target anchor terms")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--s2", type=float, default=6.8)
    p.add_argument("--anchor-bonus", type=float, default=2.0)
    p.add_argument("--confidence-threshold", type=float, default=0.5)
    p.add_argument("--out-dir", required=True, help="one alignment JSON per pair")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("compile", help="compile alignments into a TMX document")
    p.add_argument("--segments", required=True)
    p.add_argument("--alignments", required=True, help="directory of alignment JSON files")
    p.add_argument("--source-lang", required=True)
    p.add_argument("--target-lang", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("clean", help="run cleaning checks over a TMX file")
    p.add_argument("tmx")
    p.add_argument("--out", required=True)
    p.add_argument("--checks", help="comma-separated check numbers, default 1-11")
    p.add_argument("--max-tokens", type=int, default=120)
    p.add_argument("--report", help="write the cleaning report JSON here")
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("convert", help="export a TMX file as aligned plain text")
    p.add_argument("tmx")
    p.add_argument("--source-out", required=True)
    p.add_argument("--target-out", required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("stats", help="print corpus statistics for a TMX file")
    p.add_argument("tmx")
    p.add_argument("--name")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("run", help="run the whole pipeline from a project manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--from-stage", default="crawl")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("review", help="serve the review API (and UI, if built)")
    p.add_argument("--tmx", required=True)
    p.add_argument("--log", required=True, help="decision log (JSONL, append-only)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--ui", help="directory of static UI assets to serve")
    p.add_argument("--threshold", type=float, default=0.5)
    p.set_defaults(func=cmd_review)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ManifestError, PipelineError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())

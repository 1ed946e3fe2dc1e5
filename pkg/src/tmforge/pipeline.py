"""Pipeline orchestration and review decisions.

Each stage reads its inputs from the previous stage's on-disk artifact and
writes its own, so a run can resume from any stage whose prerequisites exist.
Artifacts are checksummed; re-running a pipeline over unchanged inputs must
reproduce every checksum.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import alignment as al
from . import extraction as ex
from .cleaning import clean
from .crawler import crawl, prune_noise
from .manifest import ProjectManifest
from .pairing import batch_rename, detect_duplicates, pair_documents
from .tmx_store import (
    TmDocument,
    TmHeader,
    TranslationUnit,
    compile_alignments,
    corpus_stats,
    read_tmx,
    write_tmx,
)

log = logging.getLogger(__name__)

STAGES = (
    "crawl",
    "prune",
    "rename",
    "dedup",
    "pair",
    "extract",
    "align",
    "compile",
    "clean",
    "stats",
)

# Artifact names per stage, relative to the project output directory.
ARTIFACTS = {
    "crawl": ("mirror",),
    "prune": ("prune_report.json",),
    "rename": ("rename_report.json",),
    "dedup": ("dedup_report.json",),
    "pair": ("pairs.json",),
    "extract": ("segments.json",),
    "align": ("alignments",),
    "compile": ("compiled.tmx",),
    "clean": ("corpus.tmx", "cleaning_report.json"),
    "stats": ("stats.json",),
}


class PipelineError(RuntimeError):
    pass


@dataclass
class StageResult:
    name: str
    counts: dict
    artifacts: dict[str, str]  # artifact relpath -> sha256
    duration_s: float


@dataclass
class PipelineReport:
    project: str
    stages: list[StageResult] = field(default_factory=list)
    totals: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "project": self.project,
            "totals": self.totals,
            "stages": [
                {
                    "name": s.name,
                    "counts": s.counts,
                    "artifacts": s.artifacts,
                    "duration_s": round(s.duration_s, 3),
                }
                for s in self.stages
            ],
        }


def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def checksum_artifact(path: Path) -> str:
    """Checksum of a file, or of a directory's sorted (relpath, sha256) list."""
    if path.is_file():
        return _sha256_file(path)
    digest = hashlib.sha256()
    for root, dirs, files in os.walk(path):
        dirs.sort()
        for name in sorted(files):
            file_path = Path(root) / name
            rel = file_path.relative_to(path).as_posix()
            digest.update(rel.encode("utf-8"))
            digest.update(b"\0")
            digest.update(_sha256_file(file_path).encode("ascii"))
            digest.update(b"\0")
    return digest.hexdigest()


def _write_json(path: Path, data) -> None:
    path.write_text(
        json.dumps(data, indent=2, ensure_ascii=False, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def _read_json(path: Path):
    return json.loads(path.read_text(encoding="utf-8"))


class _Run:
    def __init__(self, manifest: ProjectManifest) -> None:
        self.m = manifest
        self.out = Path(manifest.output_dir)
        self.mirror = self.out / "mirror"

    # -- stages ------------------------------------------------------------

    def stage_crawl(self) -> dict:
        if self.m.crawl is None:
            if not self.mirror.is_dir():
                raise PipelineError(
                    "manifest has no crawl section and %s does not exist" % self.mirror
                )
            return {"provided_mirror": True}
        files, report = crawl(self.m.crawl)
        return {
            "fetched": len(files),
            "skipped": len(report.skipped),
            "failed": len(report.failures),
        }

    def stage_prune(self) -> dict:
        if not self.m.prune_keep_patterns:
            return {"skipped": True}
        report = prune_noise(self.mirror, self.m.prune_keep_patterns)
        _write_json(
            self.out / "prune_report.json",
            {"kept": report.kept, "quarantined": report.quarantined},
        )
        return {"kept": len(report.kept), "quarantined": len(report.quarantined)}

    def stage_rename(self) -> dict:
        renames = {}
        for side, rule in (("source", self.m.rename_source), ("target", self.m.rename_target)):
            if rule is None:
                continue
            renames[side] = batch_rename(self.mirror, rule).renames
        _write_json(self.out / "rename_report.json", renames)
        return {side: len(r) for side, r in renames.items()}

    def stage_dedup(self) -> dict:
        report = detect_duplicates(self.mirror)
        _write_json(
            self.out / "dedup_report.json",
            {
                "groups": [
                    {"digest": g.digest, "kept": g.kept, "quarantined": g.quarantined}
                    for g in report.groups
                ],
                "skipped_unreadable": report.skipped_unreadable,
            },
        )
        return {"groups": len(report.groups), "removed": report.removed_count}

    def stage_pair(self) -> dict:
        pairs = pair_documents(
            self.mirror, self.mirror, self.m.source_prefix, self.m.target_prefix
        )
        _write_json(
            self.out / "pairs.json",
            {
                "pairs": [
                    {
                        "key": p.key,
                        "source": str(p.source_path.relative_to(self.out)),
                        "target": str(p.target_path.relative_to(self.out)),
                    }
                    for p in pairs.pairs
                ],
                "unpaired_source": pairs.unpaired_source,
                "unpaired_target": pairs.unpaired_target,
            },
        )
        return {
            "pairs": len(pairs.pairs),
            "unpaired_source": len(pairs.unpaired_source),
            "unpaired_target": len(pairs.unpaired_target),
        }

    def stage_extract(self) -> dict:
        if self.m.extraction_source is None or self.m.extraction_target is None:
            raise PipelineError("manifest needs extraction sections for both sides")
        pairs = _read_json(self.out / "pairs.json")["pairs"]
        sides = {
            "source": (self.m.extraction_source, self.m.source_lang),
            "target": (self.m.extraction_target, self.m.target_lang),
        }
        docs: dict[str, dict] = {"source": {}, "target": {}}
        meta: dict[str, dict] = {}
        counts = {"documents": 0, "no_match": 0, "sentences_source": 0, "sentences_target": 0}
        for pair in pairs:
            key = pair["key"]
            meta[key] = {}
            for side, (side_chain, lang) in sides.items():
                raw = (self.out / pair[side]).read_bytes()
                decoded = ex.decode_bytes(raw, side_chain.encoding)
                result = ex.extract(decoded.text, side_chain.chain)
                if not result.matched:
                    log.warning("no span rule matched %s side of %s", side, key)
                    counts["no_match"] += 1
                doc = ex.segment_sentences(result.blocks, lang, doc_key=key)
                docs[side][key] = ex.segmented_to_dict(doc)
                counts["sentences_%s" % side] += len(doc.sentences)
                counts["documents"] += 1
                meta[key][side] = {
                    "encoding": decoded.encoding_used,
                    "replacements": decoded.replacements,
                    "matched": result.matched,
                }
        _write_json(
            self.out / "segments.json",
            {"source": docs["source"], "target": docs["target"], "meta": meta},
        )
        return counts

    def stage_align(self) -> dict:
        pairs = _read_json(self.out / "pairs.json")["pairs"]
        segments = _read_json(self.out / "segments.json")
        align_dir = self.out / "alignments"
        align_dir.mkdir(parents=True, exist_ok=True)
        counts = {"beads": 0, "needs_review": 0}
        for pair in pairs:
            key = pair["key"]
            src = ex.segmented_from_dict(segments["source"][key])
            tgt = ex.segmented_from_dict(segments["target"][key])
            result = al.align(src, tgt, self.m.anchors, self.m.align_params)
            _write_json(align_dir / ("%s.json" % key), al.alignment_to_dict(result))
            counts["beads"] += len(result.beads)
            counts["needs_review"] += sum(b.needs_review for b in result.beads)
        return counts

    def stage_compile(self) -> dict:
        pairs = _read_json(self.out / "pairs.json")["pairs"]
        segments = _read_json(self.out / "segments.json")
        alignments = []
        src_docs, tgt_docs = [], []
        for pair in pairs:
            key = pair["key"]
            alignments.append(
                al.alignment_from_dict(_read_json(self.out / "alignments" / ("%s.json" % key)))
            )
            src_docs.append(ex.segmented_from_dict(segments["source"][key]))
            tgt_docs.append(ex.segmented_from_dict(segments["target"][key]))
        header = TmHeader(
            src_lang=self.m.source_lang,
            tgt_lang=self.m.target_lang,
            adminlang=self.m.adminlang,
        )
        tm, report = compile_alignments(alignments, src_docs, tgt_docs, header)
        write_tmx(tm, self.out / "compiled.tmx")
        return {"tu_count": report.tu_count, "dropped_beads": report.dropped_beads}

    def stage_clean(self) -> dict:
        tm = read_tmx(self.out / "compiled.tmx")
        cfg = self.m.clean_config
        cleaned, report = clean(
            tm,
            checks=cfg.checks,
            max_tokens=cfg.max_tokens,
            max_ratio=cfg.max_ratio,
            min_ratio_tokens=cfg.min_ratio_tokens,
        )
        write_tmx(cleaned, self.out / "corpus.tmx")
        _write_json(self.out / "cleaning_report.json", report.to_dict())
        return {
            "input": report.input_count,
            "output": report.output_count,
            "removed": report.removed_total,
        }

    def stage_stats(self) -> dict:
        tm = read_tmx(self.out / "corpus.tmx")
        stats = corpus_stats(tm, name=self.m.project)
        data = {
            "name": stats.name,
            "tu_count": stats.tu_count,
            "src_words": stats.src_words,
            "tgt_words": stats.tgt_words,
            "src_rate": stats.src_rate,
            "tgt_rate": stats.tgt_rate,
            "empty": stats.empty,
        }
        _write_json(self.out / "stats.json", data)
        return data


def run_pipeline(manifest: ProjectManifest, from_stage: str = "crawl") -> PipelineReport:
    """Run the pipeline stages from from_stage onward.

    Artifacts of every earlier stage that this manifest would have produced
    must already exist; the error names the first stage whose artifact is
    missing.
    """
    if from_stage not in STAGES:
        raise PipelineError("unknown stage %r; stages are %s" % (from_stage, ", ".join(STAGES)))
    run = _Run(manifest)
    run.out.mkdir(parents=True, exist_ok=True)
    start_idx = STAGES.index(from_stage)

    def stage_applies(name: str) -> bool:
        if name == "prune":
            return bool(manifest.prune_keep_patterns)
        if name == "rename":
            return manifest.rename_source is not None or manifest.rename_target is not None
        return True

    for earlier in STAGES[:start_idx]:
        if not stage_applies(earlier):
            continue
        for artifact in ARTIFACTS[earlier]:
            if not (run.out / artifact).exists():
                raise PipelineError(
                    "cannot resume from %r: missing artifact %s from stage %r"
                    % (from_stage, run.out / artifact, earlier)
                )

    report = PipelineReport(project=manifest.project)
    for name in STAGES[start_idx:]:
        if not stage_applies(name):
            report.stages.append(StageResult(name, {"skipped": True}, {}, 0.0))
            continue
        started = time.monotonic()
        counts = getattr(run, "stage_%s" % name)()
        duration = time.monotonic() - started
        artifacts = {}
        for artifact in ARTIFACTS[name]:
            path = run.out / artifact
            if path.exists():
                artifacts[artifact] = checksum_artifact(path)
        report.stages.append(StageResult(name, counts, artifacts, duration))
        log.info("stage %-8s %s", name, counts)

    by_name = {s.name: s.counts for s in report.stages}
    report.totals = {
        "pairs": by_name.get("pair", {}).get("pairs", 0),
        "unpaired": by_name.get("pair", {}).get("unpaired_source", 0)
        + by_name.get("pair", {}).get("unpaired_target", 0),
        "duplicates_removed": by_name.get("dedup", {}).get("removed", 0),
        "tu_count": by_name.get("clean", {}).get("output", by_name.get("compile", {}).get("tu_count", 0)),
    }
    _write_json(run.out / "pipeline_report.json", report.to_dict())
    return report


# ---------------------------------------------------------------------------
# review decisions

ACTIONS = ("accept", "edit", "merge", "split", "reject")


@dataclass
class Decision:
    tu_id: str
    action: str
    actor: str = "reviewer"
    timestamp: float = 0.0
    src_text: str | None = None
    tgt_text: str | None = None
    with_tu_id: str | None = None
    src_boundary: int | None = None
    tgt_boundary: int | None = None

    def validate(self) -> None:
        if not self.tu_id:
            raise ValueError("decision needs a tu_id")
        if self.action not in ACTIONS:
            raise ValueError("unknown action %r" % self.action)
        if self.action == "edit":
            if not (self.src_text or "").strip() or not (self.tgt_text or "").strip():
                raise ValueError("edit needs non-empty src_text and tgt_text")
        if self.action == "merge" and not self.with_tu_id:
            raise ValueError("merge needs with_tu_id")
        if self.action == "split":
            if not isinstance(self.src_boundary, int) or not isinstance(self.tgt_boundary, int):
                raise ValueError("split needs integer src_boundary and tgt_boundary")

    def to_dict(self) -> dict:
        data = {
            "tu_id": self.tu_id,
            "action": self.action,
            "actor": self.actor,
            "timestamp": self.timestamp,
        }
        for key in ("src_text", "tgt_text", "with_tu_id", "src_boundary", "tgt_boundary"):
            value = getattr(self, key)
            if value is not None:
                data[key] = value
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "Decision":
        return cls(
            tu_id=data.get("tu_id", ""),
            action=data.get("action", ""),
            actor=data.get("actor", "reviewer"),
            timestamp=float(data.get("timestamp", 0.0)),
            src_text=data.get("src_text"),
            tgt_text=data.get("tgt_text"),
            with_tu_id=data.get("with_tu_id"),
            src_boundary=data.get("src_boundary"),
            tgt_boundary=data.get("tgt_boundary"),
        )


def apply_decisions(
    tm: TmDocument, decisions: list[Decision]
) -> tuple[TmDocument, list[dict]]:
    """Left fold of decisions over the document; later decisions win.

    Inapplicable decisions (unknown unit, non-adjacent merge, out-of-range
    split) are skipped and reported, never fatal: the log is append-only and
    may reference units a later decision already removed.
    """
    units = [replace(u) for u in tm.units]
    skipped: list[dict] = []

    def skip(decision: Decision, reason: str) -> None:
        skipped.append({"tu_id": decision.tu_id, "action": decision.action, "reason": reason})

    for decision in decisions:
        try:
            decision.validate()
        except ValueError as exc:
            skip(decision, str(exc))
            continue
        index = {u.id: i for i, u in enumerate(units)}
        if decision.tu_id not in index:
            skip(decision, "unknown tu_id")
            continue
        i = index[decision.tu_id]
        unit = units[i]

        if decision.action == "accept":
            units[i] = replace(unit, status="confirmed")
        elif decision.action == "reject":
            units[i] = replace(unit, status="rejected")
        elif decision.action == "edit":
            units[i] = replace(
                unit, src_text=decision.src_text, tgt_text=decision.tgt_text, status="edited"
            )
        elif decision.action == "merge":
            j = index.get(decision.with_tu_id)
            if j is None:
                skip(decision, "unknown with_tu_id")
                continue
            if abs(i - j) != 1:
                skip(decision, "merge target not adjacent")
                continue
            first, second = (units[min(i, j)], units[max(i, j)])
            merged = replace(
                unit,
                src_text=first.src_text + " " + second.src_text,
                tgt_text=first.tgt_text + " " + second.tgt_text,
                bead_type="%s+%s" % (first.bead_type, second.bead_type),
                confidence=min(first.confidence, second.confidence),
                status="edited",
            )
            units[min(i, j) : max(i, j) + 1] = [merged]
        elif decision.action == "split":
            b_src, b_tgt = decision.src_boundary, decision.tgt_boundary
            if not (0 < b_src < len(unit.src_text)) or not (0 < b_tgt < len(unit.tgt_text)):
                skip(decision, "split boundary out of range")
                continue
            parts = [
                (unit.src_text[:b_src].strip(), unit.tgt_text[:b_tgt].strip()),
                (unit.src_text[b_src:].strip(), unit.tgt_text[b_tgt:].strip()),
            ]
            if any(not s or not t for s, t in parts):
                skip(decision, "split would create an empty side")
                continue
            if any("%s.%d" % (unit.id, n) in index for n in (1, 2)):
                skip(decision, "split ids already exist")
                continue
            units[i : i + 1] = [
                replace(unit, id="%s.%d" % (unit.id, n), src_text=s, tgt_text=t, status="edited")
                for n, (s, t) in enumerate(parts, 1)
            ]
    return TmDocument(tm.header, units), skipped


def append_decision(path: Path, decision: Decision) -> None:
    """Append one decision to the JSONL log, durably."""
    with open(path, "a", encoding="utf-8") as handle:
        handle.write(json.dumps(decision.to_dict(), ensure_ascii=False) + "\n")
        handle.flush()
        os.fsync(handle.fileno())


def read_decision_log(path: Path) -> list[Decision]:
    decisions = []
    if not Path(path).exists():
        return decisions
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            decisions.append(Decision.from_dict(json.loads(line)))
        except (json.JSONDecodeError, TypeError, ValueError) as exc:
            raise ValueError("%s:%d: bad decision record: %s" % (path, lineno, exc)) from None
    return decisions

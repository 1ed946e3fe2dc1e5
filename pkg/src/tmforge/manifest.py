"""Project manifest: one YAML file describing a whole corpus-building run.

Relative paths inside a manifest resolve against the manifest's directory so
a project stays self-contained and can be checked into version control.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .alignment import AlignParams, AnchorTerm
from .crawler import CrawlManifest
from .extraction import EncodingPolicy, FilterChain, SpanRule, DEFAULT_BREAK_TAGS
from .pairing import RenameRule


class ManifestError(ValueError):
    """Raised when a manifest file is missing or malformed."""


@dataclass
class SideChain:
    """Per-language-side extraction settings."""

    encoding: EncodingPolicy
    chain: FilterChain


@dataclass
class CleanConfig:
    checks: tuple[int, ...] = tuple(range(1, 12))
    max_tokens: int = 120
    max_ratio: float = 3.0
    min_ratio_tokens: int = 5


@dataclass
class ProjectManifest:
    project: str
    source_lang: str
    target_lang: str
    output_dir: Path
    crawl: CrawlManifest | None = None
    prune_keep_patterns: list[str] = field(default_factory=list)
    rename_source: RenameRule | None = None
    rename_target: RenameRule | None = None
    source_prefix: str = ""
    target_prefix: str = ""
    extraction_source: SideChain | None = None
    extraction_target: SideChain | None = None
    anchors: list[AnchorTerm] = field(default_factory=list)
    align_params: AlignParams = field(default_factory=AlignParams)
    clean_config: CleanConfig = field(default_factory=CleanConfig)
    adminlang: str = "en"
    license_note: str = ""


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ManifestError("%s: missing required key %r" % (context, key))
    return mapping[key]


def _load_yaml(path: Path) -> dict:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ManifestError("manifest not found: %s" % path) from None
    except yaml.YAMLError as exc:
        raise ManifestError("%s: invalid YAML: %s" % (path, exc)) from None
    if not isinstance(data, dict):
        raise ManifestError("%s: top level must be a mapping" % path)
    return data


def parse_span_rule(entry) -> SpanRule:
    if isinstance(entry, str):
        return SpanRule(pattern=entry)
    if isinstance(entry, dict):
        return SpanRule(
            pattern=_require(entry, "pattern", "span rule"),
            lazy=bool(entry.get("lazy", True)),
            description=entry.get("description", ""),
        )
    raise ManifestError("span rule must be a string or a mapping: %r" % (entry,))


def parse_side_chain(data: dict, context: str) -> SideChain:
    if not isinstance(data, dict):
        raise ManifestError("%s: must be a mapping" % context)
    enc = data.get("encoding", {}) or {}
    try:
        policy = EncodingPolicy(
            override=enc.get("override"), fallback=enc.get("fallback", "utf-8")
        )
    except ValueError as exc:
        raise ManifestError("%s: %s" % (context, exc)) from None
    rules = [parse_span_rule(r) for r in data.get("span_rules", [])]
    chain = FilterChain(
        span_rules=rules,
        break_tags=frozenset(data.get("break_tags", DEFAULT_BREAK_TAGS)),
        entity_decode=bool(data.get("entity_decode", True)),
    )
    return SideChain(encoding=policy, chain=chain)


def load_chain_file(path: Path) -> dict[str, SideChain]:
    """Chain file for standalone extraction: {source: ..., target: ...}."""
    data = _load_yaml(path)
    return {
        side: parse_side_chain(_require(data, side, str(path)), "%s:%s" % (path, side))
        for side in ("source", "target")
    }


def load_anchors_tsv(path: Path) -> list[AnchorTerm]:
    """Anchor terms, one tab-separated source/target pair per line; # comments."""
    anchors = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
            raise ManifestError(
                "%s:%d: expected 'source<TAB>target', got %r" % (path, lineno, line)
            )
        anchors.append(AnchorTerm(parts[0].strip(), parts[1].strip()))
    return anchors


def _parse_rename_rule(data: dict, context: str) -> RenameRule:
    if not isinstance(data, dict):
        raise ManifestError("%s: must be a mapping" % context)
    return RenameRule(
        find=_require(data, "find", context),
        replace=_require(data, "replace", context),
        regex=bool(data.get("regex", False)),
    )


def load_crawl_section(data: dict, output_dir: Path, context: str) -> CrawlManifest:
    try:
        return CrawlManifest(
            seed_urls=list(_require(data, "seed_urls", context)),
            output_dir=output_dir,
            same_host_only=bool(data.get("same_host_only", True)),
            max_depth=int(data.get("max_depth", 3)),
            max_file_bytes=int(data.get("max_file_bytes", 10 * 1024 * 1024)),
            include_patterns=list(data.get("include_patterns", [])),
            exclude_patterns=list(data.get("exclude_patterns", [])),
            rate_limit=float(data.get("rate_limit", 2.0)),
            obey_robots=bool(data.get("obey_robots", True)),
            workers=int(data.get("workers", 4)),
            timeout=float(data.get("timeout", 20.0)),
        )
    except ValueError as exc:
        raise ManifestError("%s: %s" % (context, exc)) from None


def load_crawl_manifest(path: Path) -> CrawlManifest:
    """Standalone crawl manifest; output_dir is required here."""
    data = _load_yaml(path)
    base = Path(path).parent
    output_dir = base / _require(data, "output_dir", str(path))
    return load_crawl_section(data, output_dir, str(path))


def load_project_manifest(path: Path) -> ProjectManifest:
    path = Path(path)
    data = _load_yaml(path)
    base = path.parent
    context = str(path)

    output_dir = base / _require(data, "output_dir", context)
    crawl = None
    if "crawl" in data:
        crawl = load_crawl_section(data["crawl"], output_dir / "mirror", context + ":crawl")

    rename_source = rename_target = None
    if "rename" in data:
        rename_source = _parse_rename_rule(
            _require(data["rename"], "source", context + ":rename"), context + ":rename:source"
        )
        rename_target = _parse_rename_rule(
            _require(data["rename"], "target", context + ":rename"), context + ":rename:target"
        )

    pair = _require(data, "pair", context)
    extraction = _require(data, "extraction", context)

    anchors: list[AnchorTerm] = []
    if "anchors" in data and data["anchors"]:
        anchors = load_anchors_tsv(base / data["anchors"])

    align_data = data.get("align", {}) or {}
    try:
        params = AlignParams(
            c=float(align_data.get("c", 1.0)),
            s2=float(align_data.get("s2", 6.8)),
            anchor_bonus=float(align_data.get("anchor_bonus", 2.0)),
            confidence_threshold=float(align_data.get("confidence_threshold", 0.5)),
            **(
                {"bead_priors": {k: float(v) for k, v in align_data["bead_priors"].items()}}
                if "bead_priors" in align_data
                else {}
            ),
        )
    except ValueError as exc:
        raise ManifestError("%s:align: %s" % (context, exc)) from None

    clean_data = data.get("clean", {}) or {}
    clean_config = CleanConfig(
        checks=tuple(clean_data.get("checks", tuple(range(1, 12)))),
        max_tokens=int(clean_data.get("max_tokens", 120)),
        max_ratio=float(clean_data.get("max_ratio", 3.0)),
        min_ratio_tokens=int(clean_data.get("min_ratio_tokens", 5)),
    )

    return ProjectManifest(
        project=_require(data, "project", context),
        source_lang=_require(data, "source_lang", context),
        target_lang=_require(data, "target_lang", context),
        output_dir=output_dir,
        crawl=crawl,
        prune_keep_patterns=list((data.get("prune") or {}).get("keep_patterns", [])),
        rename_source=rename_source,
        rename_target=rename_target,
        source_prefix=_require(pair, "source_prefix", context + ":pair"),
        target_prefix=_require(pair, "target_prefix", context + ":pair"),
        extraction_source=parse_side_chain(
            _require(extraction, "source", context + ":extraction"), context + ":extraction:source"
        ),
        extraction_target=parse_side_chain(
            _require(extraction, "target", context + ":extraction"), context + ":extraction:target"
        ),
        anchors=anchors,
        align_params=params,
        clean_config=clean_config,
        adminlang=data.get("adminlang", "en"),
        license_note=data.get("license_note", ""),
    )

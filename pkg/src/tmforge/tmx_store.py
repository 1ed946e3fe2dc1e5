"""Translation memory document, TMX 1.4b serialization, conversion, stats.

The TMX writer is deterministic (fixed attribute order, no timestamps) so two
runs over the same corpus produce byte-identical files. Unit provenance,
confidence and review status ride along as x- properties and survive a round
trip; rejected units never serialize.
"""

from __future__ import annotations

import logging
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import __version__

log = logging.getLogger(__name__)

XML_LANG = "{http://www.w3.org/XML/1998/namespace}lang"

STATUSES = ("auto", "confirmed", "edited", "rejected")


class TmxFormatError(ValueError):
    """Raised when a TMX file cannot be parsed into a TmDocument."""


@dataclass
class TranslationUnit:
    id: str
    src_text: str
    tgt_text: str
    src_lang: str
    tgt_lang: str
    doc_key: str = ""
    bead_type: str = ""
    confidence: float = 1.0
    status: str = "auto"

    def __post_init__(self) -> None:
        if self.status not in STATUSES:
            raise ValueError("unknown status %r" % self.status)


@dataclass
class TmHeader:
    src_lang: str
    tgt_lang: str
    adminlang: str = "en"
    segtype: str = "sentence"
    datatype: str = "plaintext"
    creationtool: str = "tmforge"
    creationtoolversion: str = __version__


@dataclass
class TmDocument:
    header: TmHeader
    units: list[TranslationUnit] = field(default_factory=list)

    def active_units(self) -> list[TranslationUnit]:
        """Units that count: everything not rejected by a reviewer."""
        return [u for u in self.units if u.status != "rejected"]


# ---------------------------------------------------------------------------
# compile


@dataclass
class CompileReport:
    tu_count: int
    dropped_beads: int
    per_doc: dict[str, int]


def compile_alignments(alignments, src_docs, tgt_docs, header: TmHeader) -> tuple[TmDocument, CompileReport]:
    """Build a TmDocument from alignments over segmented documents.

    One unit per non-deletion bead, texts joined with single spaces; 1-0 and
    0-1 beads are dropped and counted. Unit ids are deterministic:
    doc_key:bead-ordinal.
    """
    src_by_key = {d.doc_key: d for d in src_docs}
    tgt_by_key = {d.doc_key: d for d in tgt_docs}
    units: list[TranslationUnit] = []
    dropped = 0
    per_doc: dict[str, int] = {}
    for alignment in sorted(alignments, key=lambda a: a.doc_key):
        src = src_by_key[alignment.doc_key]
        tgt = tgt_by_key[alignment.doc_key]
        count = 0
        for ordinal, bead in enumerate(alignment.beads):
            if not bead.src_indices or not bead.tgt_indices:
                dropped += 1
                continue
            units.append(
                TranslationUnit(
                    id="%s:%04d" % (alignment.doc_key, ordinal),
                    src_text=" ".join(src.sentences[i].text for i in bead.src_indices),
                    tgt_text=" ".join(tgt.sentences[i].text for i in bead.tgt_indices),
                    src_lang=src.lang,
                    tgt_lang=tgt.lang,
                    doc_key=alignment.doc_key,
                    bead_type=bead.bead_type,
                    confidence=bead.confidence,
                    status="auto",
                )
            )
            count += 1
        per_doc[alignment.doc_key] = count
    tm = TmDocument(header, units)
    return tm, CompileReport(len(units), dropped, per_doc)


# ---------------------------------------------------------------------------
# TMX 1.4b


def tmx_bytes(tm: TmDocument) -> bytes:
    root = ET.Element("tmx", {"version": "1.4"})
    h = tm.header
    ET.SubElement(
        root,
        "header",
        {
            "creationtool": h.creationtool,
            "creationtoolversion": h.creationtoolversion,
            "segtype": h.segtype,
            "o-tmf": "tmforge",
            "adminlang": h.adminlang,
            "srclang": h.src_lang,
            "datatype": h.datatype,
        },
    )
    body = ET.SubElement(root, "body")
    for unit in tm.active_units():
        tu = ET.SubElement(body, "tu", {"tuid": unit.id})
        props = [
            ("x-doc-key", unit.doc_key),
            ("x-bead-type", unit.bead_type),
            ("x-confidence", repr(unit.confidence)),
            ("x-status", unit.status),
        ]
        for prop_type, value in props:
            if value:
                prop = ET.SubElement(tu, "prop", {"type": prop_type})
                prop.text = value
        for lang, text in ((unit.src_lang, unit.src_text), (unit.tgt_lang, unit.tgt_text)):
            tuv = ET.SubElement(tu, "tuv", {"xml:lang": lang})
            seg = ET.SubElement(tuv, "seg")
            seg.text = text
    tree = ET.ElementTree(root)
    ET.indent(tree, space="  ")
    return ET.tostring(root, encoding="UTF-8", xml_declaration=True) + b"\n"


def write_tmx(tm: TmDocument, path: Path) -> None:
    Path(path).write_bytes(tmx_bytes(tm))


def _parse_tu(tu: ET.Element, index: int, header: TmHeader) -> TranslationUnit:
    seg_by_lang: list[tuple[str, str]] = []
    props: dict[str, str] = {}
    for child in tu:
        if child.tag == "prop":
            props[child.get("type", "")] = child.text or ""
        elif child.tag == "tuv":
            lang = child.get(XML_LANG) or child.get("lang") or ""
            seg = child.find("seg")
            if seg is None:
                raise TmxFormatError(
                    "tu %s (index %d): tuv %r has no seg" % (tu.get("tuid"), index, lang)
                )
            if len(seg) > 0:
                log.warning("tu %s: inline elements in seg flattened", tu.get("tuid"))
            seg_by_lang.append((lang, "".join(seg.itertext())))
        else:
            log.debug("ignoring unknown element %r in tu", child.tag)
    if len(seg_by_lang) < 2:
        raise TmxFormatError(
            "tu %s (index %d): expected 2 tuv elements, found %d"
            % (tu.get("tuid"), index, len(seg_by_lang))
        )
    if len(seg_by_lang) > 2:
        log.warning("tu %s: %d tuv elements, keeping first two", tu.get("tuid"), len(seg_by_lang))

    src_lang = header.src_lang.lower()
    source = next((p for p in seg_by_lang if p[0].lower() == src_lang), seg_by_lang[0])
    target = next(p for p in seg_by_lang if p is not source)
    confidence = 1.0
    if "x-confidence" in props:
        try:
            confidence = float(props["x-confidence"])
        except ValueError:
            log.warning("tu %s: bad x-confidence %r", tu.get("tuid"), props["x-confidence"])
    status = props.get("x-status", "auto")
    if status not in STATUSES:
        log.warning("tu %s: unknown x-status %r, treating as auto", tu.get("tuid"), status)
        status = "auto"
    return TranslationUnit(
        id=tu.get("tuid") or "tu-%04d" % index,
        src_text=source[1],
        tgt_text=target[1],
        src_lang=source[0],
        tgt_lang=target[0],
        doc_key=props.get("x-doc-key", ""),
        bead_type=props.get("x-bead-type", ""),
        confidence=confidence,
        status=status,
    )


def read_tmx(path: Path) -> TmDocument:
    try:
        tree = ET.parse(path)
    except ET.ParseError as exc:
        raise TmxFormatError("%s: malformed XML: %s" % (path, exc)) from None
    root = tree.getroot()
    if root.tag != "tmx":
        raise TmxFormatError("%s: root element is %r, expected tmx" % (path, root.tag))
    header_el = root.find("header")
    if header_el is None:
        raise TmxFormatError("%s: missing header" % path)
    body = root.find("body")
    if body is None:
        raise TmxFormatError("%s: missing body" % path)

    header = TmHeader(
        src_lang=header_el.get("srclang", ""),
        tgt_lang="",
        adminlang=header_el.get("adminlang", "en"),
        segtype=header_el.get("segtype", "sentence"),
        datatype=header_el.get("datatype", "plaintext"),
        creationtool=header_el.get("creationtool", ""),
        creationtoolversion=header_el.get("creationtoolversion", ""),
    )
    units = []
    for index, tu in enumerate(body.iter("tu")):
        units.append(_parse_tu(tu, index, header))
    if units and not header.tgt_lang:
        header.tgt_lang = units[0].tgt_lang
    return TmDocument(header, units)


# ---------------------------------------------------------------------------
# conversion and stats


def to_parallel_text(tm: TmDocument) -> tuple[list[str], list[str]]:
    """Aligned plain-text lines: line i of each side belongs to unit i."""
    src_lines, tgt_lines = [], []
    for unit in tm.active_units():
        if "\n" in unit.src_text or "\n" in unit.tgt_text:
            raise ValueError(
                "unit %s contains a newline; clean the corpus before converting" % unit.id
            )
        src_lines.append(unit.src_text)
        tgt_lines.append(unit.tgt_text)
    return src_lines, tgt_lines


@dataclass
class CorpusStats:
    name: str
    tu_count: int
    src_words: int
    tgt_words: int
    src_rate: float
    tgt_rate: float
    empty: bool = False


def truncated_rate(words: int, tu_count: int) -> float:
    """Words per sentence, truncated (not rounded) to two decimals."""
    if tu_count <= 0:
        return 0.0
    return (words * 100 // tu_count) / 100


def corpus_stats(tm: TmDocument, name: str = "") -> CorpusStats:
    units = tm.active_units()
    src_words = sum(len(u.src_text.split()) for u in units)
    tgt_words = sum(len(u.tgt_text.split()) for u in units)
    count = len(units)
    return CorpusStats(
        name=name,
        tu_count=count,
        src_words=src_words,
        tgt_words=tgt_words,
        src_rate=truncated_rate(src_words, count),
        tgt_rate=truncated_rate(tgt_words, count),
        empty=count == 0,
    )


def format_stats_table(stats: CorpusStats) -> str:
    rows = [
        ("Name", stats.name or "-"),
        ("Source Word Count", str(stats.src_words)),
        ("Target Word Count", str(stats.tgt_words)),
        ("Sentence Count", str(stats.tu_count)),
        ("Source Word / Sentence Rate", "%.2f" % stats.src_rate),
        ("Target Word / Sentence Rate", "%.2f" % stats.tgt_rate),
    ]
    if stats.empty:
        rows.append(("Note", "empty corpus"))
    width = max(len(label) for label, _ in rows) + 2
    return "\n".join(label.ljust(width) + value for label, value in rows)


def clone_unit(unit: TranslationUnit, **changes) -> TranslationUnit:
    return replace(unit, **changes)

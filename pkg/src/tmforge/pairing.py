"""Pair bilingual documents by filename.

Mirrored journal pages carry the language in the URL-derived filename
(plng=tur / plng=eng). Renaming each side to a short prefix (tr-, en-) makes
the shared remainder a pairing key. Byte-identical duplicates are quarantined
first so a repeated abstract cannot pair twice.
"""

from __future__ import annotations

import hashlib
import logging
import os
import re
import shutil
from dataclasses import dataclass, field
from pathlib import Path

log = logging.getLogger(__name__)

# Reversible holding area used by prune and dedup; never scanned again.
QUARANTINE_DIR = "_quarantine"


class RenameCollisionError(ValueError):
    """Renaming would map two files onto one name; nothing was renamed."""


@dataclass
class RenameRule:
    """find/replace over basenames; find is a regex when regex=True.

    Regex replacements may use $1 or \\1 for capture groups.
    """

    find: str
    replace: str
    regex: bool = False

    def apply(self, name: str) -> str:
        if not self.regex:
            return name.replace(self.find, self.replace)
        replacement = re.sub(r"\$(\d+)", r"\\\1", self.replace)
        return re.sub(self.find, replacement, name)


@dataclass
class RenameReport:
    renames: dict[str, str] = field(default_factory=dict)  # old relpath -> new relpath


@dataclass
class DuplicateGroup:
    digest: str
    kept: str
    quarantined: list[str]


@dataclass
class DedupReport:
    groups: list[DuplicateGroup] = field(default_factory=list)
    skipped_unreadable: list[str] = field(default_factory=list)

    @property
    def removed_count(self) -> int:
        return sum(len(g.quarantined) for g in self.groups)


@dataclass
class DocumentPair:
    key: str
    source_path: Path
    target_path: Path


@dataclass
class PairSet:
    pairs: list[DocumentPair] = field(default_factory=list)
    unpaired_source: list[str] = field(default_factory=list)
    unpaired_target: list[str] = field(default_factory=list)


def _walk_files(directory: Path) -> list[Path]:
    """All files under directory, skipping the quarantine area; sorted for determinism."""
    out = []
    for root, dirs, files in os.walk(directory):
        dirs[:] = sorted(d for d in dirs if d != QUARANTINE_DIR)
        for name in sorted(files):
            out.append(Path(root) / name)
    return out


def batch_rename(directory: Path, rule: RenameRule) -> RenameReport:
    """Apply the rule to every basename under directory.

    All target names are computed first; any collision (two sources mapping
    to one target, or a target that already exists untouched) aborts before
    a single rename happens.
    """
    directory = Path(directory)
    files = _walk_files(directory)
    planned: list[tuple[Path, Path]] = []
    for path in files:
        new_name = rule.apply(path.name)
        if new_name != path.name:
            planned.append((path, path.with_name(new_name)))

    targets: dict[Path, Path] = {}
    untouched = set(files) - {old for old, _ in planned}
    collisions = []
    for old, new in planned:
        if new in targets:
            collisions.append("%s and %s both rename to %s" % (targets[new], old, new))
        elif new in untouched:
            collisions.append("%s renames onto existing %s" % (old, new))
        else:
            targets[new] = old
    if collisions:
        raise RenameCollisionError("; ".join(collisions))

    # Two phases so a rename chain (a -> b while b -> c) cannot clobber.
    report = RenameReport()
    temps = []
    for idx, (old, new) in enumerate(planned):
        temp = old.with_name(".rename-tmp-%d" % idx)
        os.rename(old, temp)
        temps.append((temp, new))
    for temp, new in temps:
        os.rename(temp, new)
    for old, new in planned:
        report.renames[str(old.relative_to(directory))] = str(new.relative_to(directory))
    if not report.renames:
        log.info("rename rule %r matched nothing under %s", rule.find, directory)
    return report


def detect_duplicates(directory: Path) -> DedupReport:
    """Quarantine byte-identical files, keeping the lexicographically smallest name."""
    directory = Path(directory)
    report = DedupReport()
    by_digest: dict[str, list[Path]] = {}
    for path in _walk_files(directory):
        try:
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
        except OSError as exc:
            log.warning("skipping unreadable file %s: %s", path, exc)
            report.skipped_unreadable.append(str(path.relative_to(directory)))
            continue
        by_digest.setdefault(digest, []).append(path)

    for digest, paths in sorted(by_digest.items()):
        if len(paths) < 2:
            continue
        paths = sorted(paths, key=lambda p: str(p.relative_to(directory)))
        kept, extras = paths[0], paths[1:]
        quarantined = []
        for extra in extras:
            rel = extra.relative_to(directory)
            dest = directory / QUARANTINE_DIR / "duplicates" / rel
            dest.parent.mkdir(parents=True, exist_ok=True)
            shutil.move(str(extra), str(dest))
            quarantined.append(str(rel))
        report.groups.append(
            DuplicateGroup(digest, str(kept.relative_to(directory)), quarantined)
        )
    return report


def pair_documents(
    source_dir: Path,
    target_dir: Path,
    source_prefix: str,
    target_prefix: str,
) -> PairSet:
    """Pair files whose basenames share a key once the language prefix is cut.

    The two directories may be the same; the prefixes pick the sides apart.
    """
    if not source_prefix or not target_prefix:
        raise ValueError("both prefixes must be non-empty")

    def keyed(directory: Path, prefix: str) -> dict[str, Path]:
        out: dict[str, Path] = {}
        for path in _walk_files(Path(directory)):
            if not path.name.startswith(prefix):
                continue
            key = path.name[len(prefix):]
            if key in out:
                raise ValueError(
                    "duplicate pairing key %r: %s and %s" % (key, out[key], path)
                )
            out[key] = path
        return out

    src = keyed(source_dir, source_prefix)
    tgt = keyed(target_dir, target_prefix)
    shared = sorted(set(src) & set(tgt))
    pairs = PairSet(
        pairs=[DocumentPair(k, src[k], tgt[k]) for k in shared],
        unpaired_source=sorted(set(src) - set(tgt)),
        unpaired_target=sorted(set(tgt) - set(src)),
    )
    if not pairs.pairs:
        raise ValueError(
            "no pairs found (prefixes %r / %r); wrong prefixes or wrong directories?"
            % (source_prefix, target_prefix)
        )
    return pairs

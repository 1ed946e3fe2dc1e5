"""Polite breadth-first website mirroring.

Fetched pages land on disk under names derived from their URL, query string
included, because on dynamic journal sites (page.aspx?un=ARTICLE-ID) the query
is the only part that identifies the page. Noise is never deleted, only moved
to a quarantine directory, so every pruning step is reversible.
"""

from __future__ import annotations

import fnmatch
import json
import logging
import os
import re
import threading
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from html.parser import HTMLParser
from pathlib import Path
from urllib import robotparser
from urllib.parse import urljoin, urlsplit

import requests

from .pairing import QUARANTINE_DIR

log = logging.getLogger(__name__)

USER_AGENT = "tmforge/0.1 (+corpus building; contact site owner before large crawls)"


# ---------------------------------------------------------------------------
# URL -> relative path

# Superset of characters some filesystem rejects; percent-encoded so mirrors
# stay portable. '&' and '=' survive because pairing keys depend on them.
_ILLEGAL = set('<>:"|?*\\')


def _encode_component(component: str) -> str:
    out = []
    for ch in component:
        if ch in _ILLEGAL or ord(ch) < 0x20 or ch == "\x7f" or ch == "/":
            out.extend("%%%02X" % b for b in ch.encode("utf-8"))
        else:
            out.append(ch)
    return "".join(out)


def _remove_dot_segments(path: str) -> str:
    # RFC 3986 section 5.2.4
    segments: list[str] = []
    for seg in path.split("/"):
        if seg == "..":
            if segments:
                segments.pop()
        elif seg != ".":
            segments.append(seg)
    return "/".join(segments)


def sanitize_url_to_path(url: str) -> str:
    """Deterministic relative POSIX path for a URL.

    Host becomes the top directory; the query keeps '&' and '=' readable with
    the leading '?' turned into '_'; anything a filesystem might reject is
    percent-encoded. An empty terminal path segment becomes index.html.
    """
    parts = urlsplit(url)
    host = parts.netloc.rsplit("@", 1)[-1].lower()
    if not host:
        raise ValueError("URL has no host: %r" % url)
    path = _remove_dot_segments(parts.path)
    segments = [s for s in path.split("/") if s]
    terminal = segments.pop() if segments and not path.endswith("/") else "index.html"
    if parts.query:
        terminal += "_" + parts.query
    pieces = [host] + segments + [terminal]
    return "/".join(_encode_component(p) for p in pieces)


def match_patterns(value: str, patterns: list[str]) -> bool:
    """True when value matches any pattern; 're:' prefixes a regex, else glob."""
    for pattern in patterns:
        if pattern.startswith("re:"):
            if re.search(pattern[3:], value):
                return True
        elif fnmatch.fnmatch(value, pattern):
            return True
    return False


# ---------------------------------------------------------------------------
# manifest / report types


@dataclass
class CrawlManifest:
    seed_urls: list[str]
    output_dir: Path
    same_host_only: bool = True
    max_depth: int = 3
    max_file_bytes: int = 10 * 1024 * 1024
    include_patterns: list[str] = field(default_factory=list)
    exclude_patterns: list[str] = field(default_factory=list)
    rate_limit: float = 2.0  # requests per second
    obey_robots: bool = True
    workers: int = 4
    timeout: float = 20.0

    def __post_init__(self) -> None:
        if not self.seed_urls:
            raise ValueError("seed_urls must not be empty")
        for url in self.seed_urls:
            scheme = urlsplit(url).scheme
            if scheme not in ("http", "https"):
                raise ValueError("seed URL must be absolute http(s): %r" % url)
        if self.rate_limit <= 0:
            raise ValueError("rate_limit must be positive")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.max_file_bytes <= 0:
            raise ValueError("max_file_bytes must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        self.output_dir = Path(self.output_dir)


@dataclass
class FetchedFile:
    url: str
    path: str  # relative to output_dir
    status: int
    content_type: str
    size: int
    depth: int


@dataclass
class CrawlReport:
    fetched: list[FetchedFile] = field(default_factory=list)
    skipped: list[dict] = field(default_factory=list)  # {url, reason}
    failures: list[dict] = field(default_factory=list)  # {url, error}
    total_bytes: int = 0
    elapsed_s: float = 0.0

    def to_dict(self, include_timing: bool = True) -> dict:
        data = {
            "fetched_count": len(self.fetched),
            "skipped_count": len(self.skipped),
            "failed_count": len(self.failures),
            "total_bytes": self.total_bytes,
            "files": [
                {
                    "url": f.url,
                    "path": f.path,
                    "status": f.status,
                    "content_type": f.content_type,
                    "size": f.size,
                    "depth": f.depth,
                }
                for f in sorted(self.fetched, key=lambda f: f.url)
            ],
            "skipped": sorted(self.skipped, key=lambda s: s["url"]),
            "failures": sorted(self.failures, key=lambda f: f["url"]),
        }
        if include_timing:
            data["elapsed_s"] = round(self.elapsed_s, 3)
        return data


class _RateLimiter:
    """Serializes request start times to at most rate per second."""

    def __init__(self, rate: float) -> None:
        self._interval = 1.0 / rate
        self._lock = threading.Lock()
        self._next = 0.0

    def wait(self) -> None:
        with self._lock:
            now = time.monotonic()
            slot = max(now, self._next)
            self._next = slot + self._interval
        delay = slot - now
        if delay > 0:
            time.sleep(delay)


class _LinkParser(HTMLParser):
    """Collects href/src links from anchors and embedded assets."""

    COLLECT = {"a": "href", "link": "href", "img": "src", "script": "src", "iframe": "src"}

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.links: list[str] = []

    def handle_starttag(self, tag, attrs):
        wanted = self.COLLECT.get(tag)
        if not wanted:
            return
        for name, value in attrs:
            if name == wanted and value:
                self.links.append(value)


def extract_links(base_url: str, html_text: str) -> list[str]:
    parser = _LinkParser()
    try:
        parser.feed(html_text)
    except Exception as exc:  # tolerate broken markup; links so far still count
        log.debug("link parse stopped early for %s: %s", base_url, exc)
    seen = set()
    out = []
    for link in parser.links:
        absolute = urljoin(base_url, link.strip())
        absolute = absolute.split("#", 1)[0]
        if absolute and absolute not in seen:
            seen.add(absolute)
            out.append(absolute)
    return out


def crawl(manifest: CrawlManifest) -> tuple[list[FetchedFile], CrawlReport]:
    """Mirror the site breadth-first under manifest.output_dir.

    Seeds are always attempted (exclude patterns still apply); discovered
    links must pass host, robots, pattern and depth checks. The report is
    also written to output_dir/crawl_report.json without timing data so a
    re-crawl of unchanged content produces an identical tree.
    """
    started = time.monotonic()
    report = CrawlReport()
    limiter = _RateLimiter(manifest.rate_limit)
    session = requests.Session()
    session.headers["User-Agent"] = USER_AGENT
    seed_hosts = {urlsplit(u).netloc.lower() for u in manifest.seed_urls}
    robots: dict[str, robotparser.RobotFileParser] = {}
    lock = threading.Lock()

    def robots_for(url: str) -> robotparser.RobotFileParser | None:
        host = urlsplit(url).netloc.lower()
        with lock:
            if host in robots:
                return robots[host]
        parser = robotparser.RobotFileParser()
        robots_url = "%s://%s/robots.txt" % (urlsplit(url).scheme, host)
        limiter.wait()
        try:
            resp = session.get(robots_url, timeout=manifest.timeout)
            if resp.status_code >= 400:
                parser.parse([])  # no robots.txt: everything allowed
            else:
                parser.parse(resp.text.splitlines())
        except requests.RequestException as exc:
            log.debug("robots fetch failed for %s: %s", host, exc)
            parser.parse([])
        with lock:
            robots[host] = parser
        return parser

    def allowed_by_robots(url: str) -> bool:
        if not manifest.obey_robots:
            return True
        parser = robots_for(url)
        return parser.can_fetch(USER_AGENT, url)

    def filtered_reason(url: str, is_seed: bool) -> str | None:
        if urlsplit(url).scheme not in ("http", "https"):
            return "scheme"
        if manifest.exclude_patterns and match_patterns(url, manifest.exclude_patterns):
            return "excluded"
        if not is_seed:
            if manifest.same_host_only and urlsplit(url).netloc.lower() not in seed_hosts:
                return "other-host"
            if manifest.include_patterns and not match_patterns(url, manifest.include_patterns):
                return "not-included"
        if not allowed_by_robots(url):
            return "robots"
        return None

    def fetch(url: str, depth: int) -> tuple[str, int, list[str]] | None:
        limiter.wait()
        try:
            resp = session.get(url, timeout=manifest.timeout, stream=True)
        except requests.RequestException as exc:
            with lock:
                report.failures.append({"url": url, "error": str(exc)})
            return None
        with resp:
            if resp.status_code >= 400:
                with lock:
                    report.failures.append({"url": url, "error": "HTTP %d" % resp.status_code})
                return None
            try:
                declared = int(resp.headers.get("Content-Length", ""))
            except ValueError:
                declared = 0
            if declared > manifest.max_file_bytes:
                with lock:
                    report.skipped.append({"url": url, "reason": "size"})
                return None
            chunks = []
            size = 0
            for chunk in resp.iter_content(65536):
                size += len(chunk)
                if size > manifest.max_file_bytes:
                    with lock:
                        report.skipped.append({"url": url, "reason": "size"})
                    return None
                chunks.append(chunk)
            body = b"".join(chunks)
            content_type = resp.headers.get("Content-Type", "").split(";")[0].strip()

        rel = sanitize_url_to_path(url)
        dest = manifest.output_dir / rel
        dest.parent.mkdir(parents=True, exist_ok=True)
        tmp = dest.with_name(dest.name + ".part")
        tmp.write_bytes(body)
        os.replace(tmp, dest)

        links: list[str] = []
        if "html" in content_type:
            links = extract_links(url, body.decode("utf-8", errors="replace"))
        with lock:
            report.fetched.append(
                FetchedFile(url, rel, resp.status_code, content_type, size, depth)
            )
            report.total_bytes += size
        return (url, depth, links)

    manifest.output_dir.mkdir(parents=True, exist_ok=True)
    seen: set[str] = set()
    frontier: deque[tuple[str, int]] = deque()
    for url in manifest.seed_urls:
        url = url.split("#", 1)[0]
        if url in seen:
            continue
        seen.add(url)
        reason = filtered_reason(url, is_seed=True)
        if reason:
            report.skipped.append({"url": url, "reason": reason})
        else:
            frontier.append((url, 0))

    with ThreadPoolExecutor(max_workers=manifest.workers) as pool:
        while frontier:
            level = list(frontier)
            frontier.clear()
            for result in pool.map(lambda item: fetch(*item), level):
                if result is None:
                    continue
                url, depth, links = result
                if depth >= manifest.max_depth:
                    continue
                for link in links:
                    if link in seen:
                        continue
                    seen.add(link)
                    reason = filtered_reason(link, is_seed=False)
                    if reason:
                        report.skipped.append({"url": link, "reason": reason})
                    else:
                        frontier.append((link, depth + 1))

    report.elapsed_s = time.monotonic() - started
    report_path = manifest.output_dir / "crawl_report.json"
    report_path.write_text(
        json.dumps(report.to_dict(include_timing=False), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    files = sorted(report.fetched, key=lambda f: f.path)
    return files, report


# ---------------------------------------------------------------------------
# pruning


@dataclass
class PruneReport:
    kept: list[str] = field(default_factory=list)
    quarantined: list[str] = field(default_factory=list)


def prune_noise(directory: Path, keep_patterns: list[str], force: bool = False) -> PruneReport:
    """Move files not matching any keep pattern into the quarantine directory.

    Patterns match the basename or the relative POSIX path ('re:' prefixes a
    regex, otherwise glob). An empty pattern list would quarantine the whole
    mirror, so it is rejected unless force is set.
    """
    directory = Path(directory)
    if not keep_patterns and not force:
        raise ValueError("keep_patterns is empty; pass force=True to quarantine everything")
    report = PruneReport()
    for root, dirs, files in os.walk(directory):
        dirs[:] = sorted(d for d in dirs if d != QUARANTINE_DIR)
        for name in sorted(files):
            path = Path(root) / name
            rel = path.relative_to(directory).as_posix()
            if match_patterns(name, keep_patterns) or match_patterns(rel, keep_patterns):
                report.kept.append(rel)
            else:
                dest = directory / QUARANTINE_DIR / rel
                dest.parent.mkdir(parents=True, exist_ok=True)
                os.replace(path, dest)
                report.quarantined.append(rel)
    return report

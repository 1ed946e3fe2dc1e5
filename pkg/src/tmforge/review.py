"""JSON-over-HTTP review service for a compiled translation memory.

Reviewers page through units (usually sorted by ascending confidence), submit
accept/edit/merge/split/reject decisions, and export the reviewed TMX. Every
decision is appended to a JSONL log and fsynced before it is acknowledged, so
a crashed session replays losslessly on restart. Multiple reviewers are
tolerated with last-write-wins semantics; the log keeps all entries.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, unquote, urlsplit

from .pipeline import Decision, append_decision, apply_decisions, read_decision_log
from .tmx_store import TmDocument, corpus_stats, read_tmx, tmx_bytes

log = logging.getLogger(__name__)

DEFAULT_PAGE_SIZE = 50
MAX_PAGE_SIZE = 500


class ReviewState:
    """Current TM view: the compiled document with the decision log folded in."""

    def __init__(self, base_tm: TmDocument, log_path: Path, threshold: float = 0.5) -> None:
        self.base_tm = base_tm
        self.log_path = Path(log_path)
        self.threshold = threshold
        self.lock = threading.RLock()
        decisions = read_decision_log(self.log_path)
        self.tm, skipped = apply_decisions(base_tm, decisions)
        if decisions:
            log.info("replayed %d decisions (%d skipped)", len(decisions), len(skipped))

    def needs_review(self, unit) -> bool:
        return unit.status == "auto" and unit.confidence < self.threshold

    def unit_view(self, unit, position: int) -> dict:
        return {
            "tu_id": unit.id,
            "src_text": unit.src_text,
            "tgt_text": unit.tgt_text,
            "src_lang": unit.src_lang,
            "tgt_lang": unit.tgt_lang,
            "doc_key": unit.doc_key,
            "bead_type": unit.bead_type,
            "confidence": unit.confidence,
            "status": unit.status,
            "needs_review": self.needs_review(unit),
            "position": position,
        }

    def list_units(self, query: dict) -> dict:
        status = query.get("status")
        doc_key = query.get("doc_key")
        min_conf = float(query["min_confidence"]) if "min_confidence" in query else None
        max_conf = float(query["max_confidence"]) if "max_confidence" in query else None
        page = max(1, int(query.get("page", 1)))
        page_size = min(MAX_PAGE_SIZE, max(1, int(query.get("page_size", DEFAULT_PAGE_SIZE))))
        sort = query.get("sort", "position")
        if sort not in ("position", "confidence"):
            raise ValueError("sort must be 'position' or 'confidence'")
        if status and status not in ("auto", "confirmed", "edited", "rejected", "needs_review"):
            raise ValueError("unknown status filter %r" % status)

        with self.lock:
            views = [self.unit_view(u, i) for i, u in enumerate(self.tm.units)]
        if status == "needs_review":
            views = [v for v in views if v["needs_review"]]
        elif status:
            views = [v for v in views if v["status"] == status]
        if doc_key:
            views = [v for v in views if v["doc_key"] == doc_key]
        if min_conf is not None:
            views = [v for v in views if v["confidence"] >= min_conf]
        if max_conf is not None:
            views = [v for v in views if v["confidence"] <= max_conf]
        if sort == "confidence":
            views.sort(key=lambda v: (v["confidence"], v["position"]))
        total = len(views)
        start = (page - 1) * page_size
        return {
            "units": views[start : start + page_size],
            "total": total,
            "page": page,
            "page_size": page_size,
        }

    def get_unit(self, tu_id: str) -> dict | None:
        with self.lock:
            for i, unit in enumerate(self.tm.units):
                if unit.id == tu_id:
                    return {
                        "unit": self.unit_view(unit, i),
                        "prev": self.tm.units[i - 1].id if i > 0 else None,
                        "next": self.tm.units[i + 1].id if i + 1 < len(self.tm.units) else None,
                    }
        return None

    def submit(self, decision: Decision) -> dict:
        """Persist the decision, then fold it into the current view."""
        decision.validate()
        with self.lock:
            before_ids = [u.id for u in self.tm.units]
            if decision.tu_id not in before_ids:
                raise KeyError(decision.tu_id)
            append_decision(self.log_path, decision)
            self.tm, skipped = apply_decisions(self.tm, [decision])
            if skipped:
                # logged but inapplicable (e.g. non-adjacent merge): report why
                return {"applied": False, "reason": skipped[0]["reason"]}
            after = {u.id: i for i, u in enumerate(self.tm.units)}
            removed = [tu_id for tu_id in before_ids if tu_id not in after]
            created = [tu_id for tu_id in after if tu_id not in before_ids]
            unit = None
            if decision.tu_id in after:
                i = after[decision.tu_id]
                unit = self.unit_view(self.tm.units[i], i)
            return {"applied": True, "unit": unit, "removed": removed, "created": created}

    def export_tmx(self) -> bytes:
        with self.lock:
            return tmx_bytes(self.tm)

    def stats(self, name: str = "") -> dict:
        with self.lock:
            stats = corpus_stats(self.tm, name=name)
        counts = {status: 0 for status in ("auto", "confirmed", "edited", "rejected")}
        with self.lock:
            for unit in self.tm.units:
                counts[unit.status] += 1
            pending = sum(1 for u in self.tm.units if self.needs_review(u))
        return {
            "tu_count": stats.tu_count,
            "src_words": stats.src_words,
            "tgt_words": stats.tgt_words,
            "src_rate": stats.src_rate,
            "tgt_rate": stats.tgt_rate,
            "empty": stats.empty,
            "status_counts": counts,
            "needs_review": pending,
        }


class ReviewHandler(BaseHTTPRequestHandler):
    server_version = "tmforge-review/0.1"

    # -- plumbing ----------------------------------------------------------

    def log_message(self, fmt, *args):
        log.debug("%s %s", self.address_string(), fmt % args)

    def _send(self, code: int, body: bytes, content_type: str) -> None:
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.end_headers()
        self.wfile.write(body)

    def _json(self, code: int, data) -> None:
        self._send(code, json.dumps(data, ensure_ascii=False).encode("utf-8"), "application/json")

    def _error(self, code: int, message: str) -> None:
        self._json(code, {"error": message})

    @property
    def state(self) -> ReviewState:
        return self.server.state  # type: ignore[attr-defined]

    # -- routes ------------------------------------------------------------

    def do_OPTIONS(self):
        self._send(204, b"", "text/plain")

    def do_GET(self):
        parts = urlsplit(self.path)
        segments = [unquote(s) for s in parts.path.split("/") if s]
        query = {k: v[-1] for k, v in parse_qs(parts.query).items()}
        try:
            if segments == ["units"]:
                return self._json(200, self.state.list_units(query))
            if len(segments) == 2 and segments[0] == "units":
                view = self.state.get_unit(segments[1])
                if view is None:
                    return self._error(404, "no unit %r" % segments[1])
                return self._json(200, view)
            if segments == ["export"]:
                body = self.state.export_tmx()
                return self._send(200, body, "application/xml; charset=utf-8")
            if segments == ["stats"]:
                return self._json(200, self.state.stats())
            return self._static(parts.path)
        except ValueError as exc:
            return self._error(400, str(exc))

    def do_POST(self):
        parts = urlsplit(self.path)
        segments = [unquote(s) for s in parts.path.split("/") if s]
        if len(segments) != 3 or segments[0] != "units" or segments[2] != "decision":
            return self._error(404, "unknown endpoint %r" % parts.path)
        try:
            length = int(self.headers.get("Content-Length", 0))
            payload = json.loads(self.rfile.read(length) or b"{}")
            if not isinstance(payload, dict):
                raise ValueError("decision payload must be a JSON object")
        except (ValueError, json.JSONDecodeError) as exc:
            return self._error(400, "bad JSON body: %s" % exc)

        payload["tu_id"] = segments[1]
        payload.setdefault("timestamp", time.time())
        try:
            decision = Decision.from_dict(payload)
            result = self.state.submit(decision)
        except KeyError:
            return self._error(404, "no unit %r" % segments[1])
        except (TypeError, ValueError) as exc:
            return self._error(400, str(exc))
        return self._json(200 if result.get("applied") else 409, result)

    # -- static UI ---------------------------------------------------------

    def _static(self, path: str) -> None:
        ui_dir = getattr(self.server, "ui_dir", None)  # type: ignore[attr-defined]
        if ui_dir is None:
            if path in ("/", "/index.html"):
                return self._json(
                    200,
                    {
                        "service": "tmforge review",
                        "endpoints": ["/units", "/units/{id}", "/units/{id}/decision", "/export", "/stats"],
                    },
                )
            return self._error(404, "not found (no UI directory configured)")
        rel = unquote(path).lstrip("/") or "index.html"
        target = (ui_dir / rel).resolve()
        if not str(target).startswith(str(ui_dir.resolve())) or not target.is_file():
            return self._error(404, "not found")
        content_type = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        self._send(200, target.read_bytes(), content_type)


class ReviewServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, state: ReviewState, ui_dir: Path | None = None) -> None:
        super().__init__(address, ReviewHandler)
        self.state = state
        self.ui_dir = Path(ui_dir) if ui_dir else None


def make_server(
    tmx_path: Path,
    log_path: Path,
    host: str = "127.0.0.1",
    port: int = 8765,
    ui_dir: Path | None = None,
    threshold: float = 0.5,
) -> ReviewServer:
    state = ReviewState(read_tmx(tmx_path), log_path, threshold=threshold)
    return ReviewServer((host, port), state, ui_dir=ui_dir)

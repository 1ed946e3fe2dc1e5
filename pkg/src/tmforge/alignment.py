"""Length-based sentence alignment.

Sentences are aligned with a dynamic program over six bead types (1-1, 1-0,
0-1, 2-1, 1-2, 2-2). A bead's cost combines a character-length term with the
log prior of its type; beads whose two sides share a known anchor term pair
get a bonus. Each bead also receives a confidence score in [0, 1] so that
low-confidence beads can be queued for human review.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

# Bead type -> (source sentences consumed, target sentences consumed).
BEAD_ARITY = {
    "1-1": (1, 1),
    "1-0": (1, 0),
    "0-1": (0, 1),
    "2-1": (2, 1),
    "1-2": (1, 2),
    "2-2": (2, 2),
}

# Preference order when two beadings have exactly equal cost: substitutions
# first, then contractions/expansions, deletions last.
TIE_ORDER = ("1-1", "2-1", "1-2", "2-2", "1-0", "0-1")
TIE_RANK = {t: i for i, t in enumerate(TIE_ORDER)}

DEFAULT_PRIORS = {
    "1-1": 0.89,
    "1-0": 0.0099,
    "0-1": 0.0099,
    "2-1": 0.0445,
    "1-2": 0.0445,
    "2-2": 0.011,
}

# A deletion bead has nothing on the other side to compare lengths against,
# so its length penalty uses the present side's length, capped.
DELETION_LENGTH_CAP = 20


@dataclass
class AlignParams:
    """Parameters of the length model and the bead search."""

    c: float = 1.0  # expected target chars per source char
    s2: float = 6.8  # per-character variance of the length difference
    bead_priors: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_PRIORS)
    )
    anchor_bonus: float = 2.0
    confidence_threshold: float = 0.5

    def __post_init__(self) -> None:
        if self.c <= 0 or self.s2 <= 0:
            raise ValueError("c and s2 must be positive")
        missing = sorted(set(BEAD_ARITY) - set(self.bead_priors))
        if missing:
            raise ValueError("bead_priors missing entries for %s" % missing)
        if any(p <= 0 for p in self.bead_priors.values()):
            raise ValueError("bead priors must be positive")
        if self.anchor_bonus < 1.0:
            raise ValueError("anchor_bonus must be >= 1")
        if not 0.0 <= self.confidence_threshold <= 1.0:
            raise ValueError("confidence_threshold must be in [0, 1]")


@dataclass
class AnchorTerm:
    """A known term pair; matching both sides of a bead earns the bonus."""

    source_term: str
    target_term: str


@dataclass
class Bead:
    bead_type: str
    src_indices: list[int]
    tgt_indices: list[int]
    cost: float
    confidence: float
    needs_review: bool


@dataclass
class Alignment:
    doc_key: str
    beads: list[Bead]
    total_cost: float
    warnings: list[str] = field(default_factory=list)


def _length_term(src_len: int, tgt_len: int, bead_type: str, params: AlignParams) -> float:
    if bead_type in ("1-0", "0-1"):
        present = src_len if bead_type == "1-0" else tgt_len
        capped = min(present, DELETION_LENGTH_CAP)
        return (capped / 2.0) ** 2 / (2.0 * params.s2)
    delta = (tgt_len - src_len * params.c) / math.sqrt(max(src_len, 1) * params.s2)
    return delta * delta / 2.0


def bead_cost(
    src_len: int,
    tgt_len: int,
    bead_type: str,
    params: AlignParams | None = None,
    anchor_hit: bool = False,
) -> float:
    """Cost of one bead: length term minus log prior, minus log bonus on an anchor hit."""
    params = params or AlignParams()
    if bead_type not in BEAD_ARITY:
        raise ValueError("unknown bead type %r" % bead_type)
    if src_len < 0 or tgt_len < 0:
        raise ValueError("lengths must be non-negative")
    cost = _length_term(src_len, tgt_len, bead_type, params)
    cost -= math.log(params.bead_priors[bead_type])
    if anchor_hit:
        cost -= math.log(params.anchor_bonus)
    return cost


def bead_confidence(
    src_len: int,
    tgt_len: int,
    bead_type: str,
    params: AlignParams | None = None,
    anchor_hit: bool = False,
) -> float:
    """Confidence in [0, 1]: length fit times prior ratio, boosted by anchors."""
    params = params or AlignParams()
    conf = math.exp(-_length_term(src_len, tgt_len, bead_type, params))
    conf *= params.bead_priors[bead_type] / max(params.bead_priors.values())
    if anchor_hit:
        conf *= params.anchor_bonus
    return min(max(conf, 0.0), 1.0)


def align(src_doc, tgt_doc, anchors=None, params=None) -> Alignment:
    """Align two segmented documents into a minimum-cost bead sequence.

    Exhaustive O(m*n) dynamic program; abstracts are short, so no banding.
    Exact cost ties are broken by TIE_ORDER on the earliest differing bead.
    """
    params = params or AlignParams()
    if src_doc.doc_key != tgt_doc.doc_key:
        raise ValueError(
            "documents must share a doc_key: %r vs %r"
            % (src_doc.doc_key, tgt_doc.doc_key)
        )
    if src_doc.lang == tgt_doc.lang:
        raise ValueError("source and target language must differ (%r)" % src_doc.lang)

    src, tgt = src_doc.sentences, tgt_doc.sentences
    m, n = len(src), len(tgt)
    warnings = []
    if m == 0 and n == 0:
        warnings.append("both sides empty")
        return Alignment(src_doc.doc_key, [], 0.0, warnings)
    if m == 0 or n == 0:
        warnings.append("degenerate input: %s side empty" % ("source" if m == 0 else "target"))

    pre_s = [0]
    for s in src:
        pre_s.append(pre_s[-1] + s.char_len)
    pre_t = [0]
    for t in tgt:
        pre_t.append(pre_t[-1] + t.char_len)

    anchor_pairs = [
        (a.source_term.lower(), a.target_term.lower()) for a in (anchors or [])
    ]
    src_low = [s.text.lower() for s in src]
    tgt_low = [t.text.lower() for t in tgt]
    span_cache: dict[tuple[int, int, int], str] = {}

    def span_text(side: int, i: int, count: int) -> str:
        key = (side, i, count)
        got = span_cache.get(key)
        if got is None:
            sents = src_low if side == 0 else tgt_low
            got = " ".join(sents[i : i + count])
            span_cache[key] = got
        return got

    def anchor_hit(i: int, s_cnt: int, j: int, t_cnt: int) -> bool:
        if not anchor_pairs or s_cnt == 0 or t_cnt == 0:
            return False
        a = span_text(0, i, s_cnt)
        b = span_text(1, j, t_cnt)
        return any(sa in a and ta in b for sa, ta in anchor_pairs)

    # Step costs are cached so the reconstruction below sees bit-identical
    # floats to the ones the table was filled with.
    step_cache: dict[tuple[int, int, str], tuple[float, bool]] = {}

    def step(i: int, j: int, bead_type: str) -> tuple[float, bool]:
        key = (i, j, bead_type)
        got = step_cache.get(key)
        if got is None:
            s_cnt, t_cnt = BEAD_ARITY[bead_type]
            sl = pre_s[i + s_cnt] - pre_s[i]
            tl = pre_t[j + t_cnt] - pre_t[j]
            hit = anchor_hit(i, s_cnt, j, t_cnt)
            got = (bead_cost(sl, tl, bead_type, params, hit), hit)
            step_cache[key] = got
        return got

    # best[i][j] = minimum cost to align the suffixes src[i:], tgt[j:].
    inf = math.inf
    best = [[inf] * (n + 1) for _ in range(m + 1)]
    best[m][n] = 0.0
    for i in range(m, -1, -1):
        for j in range(n, -1, -1):
            if i == m and j == n:
                continue
            b = inf
            for bead_type, (s_cnt, t_cnt) in BEAD_ARITY.items():
                ni, nj = i + s_cnt, j + t_cnt
                if ni > m or nj > n:
                    continue
                cand = step(i, j, bead_type)[0] + best[ni][nj]
                if cand < b:
                    b = cand
            best[i][j] = b

    # Walk forward, taking the lowest-ranked bead that achieves the optimum;
    # this yields the lexicographically earliest optimal bead sequence.
    beads: list[Bead] = []
    i = j = 0
    while (i, j) != (m, n):
        chosen = None
        for bead_type in TIE_ORDER:
            s_cnt, t_cnt = BEAD_ARITY[bead_type]
            ni, nj = i + s_cnt, j + t_cnt
            if ni > m or nj > n:
                continue
            cost, hit = step(i, j, bead_type)
            if cost + best[ni][nj] == best[i][j]:
                chosen = (bead_type, s_cnt, t_cnt, ni, nj, cost, hit)
                break
        if chosen is None:  # pragma: no cover - table and walk use the same floats
            raise AssertionError("alignment table inconsistent at (%d, %d)" % (i, j))
        bead_type, s_cnt, t_cnt, ni, nj, cost, hit = chosen
        sl = pre_s[ni] - pre_s[i]
        tl = pre_t[nj] - pre_t[j]
        conf = bead_confidence(sl, tl, bead_type, params, hit)
        beads.append(
            Bead(
                bead_type=bead_type,
                src_indices=list(range(i, ni)),
                tgt_indices=list(range(j, nj)),
                cost=cost,
                confidence=conf,
                needs_review=conf < params.confidence_threshold,
            )
        )
        i, j = ni, nj

    return Alignment(src_doc.doc_key, beads, best[0][0], warnings)


def alignment_to_dict(alignment: Alignment) -> dict:
    return {
        "doc_key": alignment.doc_key,
        "total_cost": alignment.total_cost,
        "warnings": list(alignment.warnings),
        "beads": [
            {
                "type": b.bead_type,
                "src": b.src_indices,
                "tgt": b.tgt_indices,
                "cost": b.cost,
                "confidence": b.confidence,
                "needs_review": b.needs_review,
            }
            for b in alignment.beads
        ],
    }


def alignment_from_dict(data: dict) -> Alignment:
    return Alignment(
        doc_key=data["doc_key"],
        beads=[
            Bead(
                bead_type=b["type"],
                src_indices=list(b["src"]),
                tgt_indices=list(b["tgt"]),
                cost=b["cost"],
                confidence=b["confidence"],
                needs_review=b["needs_review"],
            )
            for b in data["beads"]
        ],
        total_cost=data["total_cost"],
        warnings=list(data.get("warnings", [])),
    )

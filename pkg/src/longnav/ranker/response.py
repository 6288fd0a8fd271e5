"""``[robot mode], [ranked numbers], reason`` responses: parsing with repair,
and the canonical serializer."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

log = logging.getLogger(__name__)

MODES = ("Normal", "Slow", "Stop")
FALLBACK_MODE = "Slow"

_MODE_RE = re.compile(r"\b(normal|slow|stop)\b", re.IGNORECASE)
_BRACKET_RE = re.compile(r"\[([^\[\]]*)\]")
_INT_RE = re.compile(r"-?\d+")
_BARE_LIST_RE = re.compile(r"-?\d+(?:\s*[,;\s]\s*-?\d+)*")
_LEAD_SEP = " \t\r\n,;:-"


class Unparseable(ValueError):
    pass


@dataclass(frozen=True)
class RankResponse:
    mode: str
    ranking: tuple[int, ...]
    reason: str = ""
    repairs: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "ranking", tuple(int(i) for i in self.ranking))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if sorted(self.ranking) != list(range(len(self.ranking))):
            raise ValueError(f"ranking {self.ranking} is not a permutation")

    def position_of(self, label: int) -> int:
        return self.ranking.index(label)


def canonical_reason(reason: str) -> str:
    return reason.lstrip(_LEAD_SEP).rstrip()


def build_response(r: RankResponse) -> str:
    """Canonical text form; ``parse_response`` inverts it exactly."""
    return f"{r.mode}, [{', '.join(map(str, r.ranking))}], {r.reason}"


def _find_list(text: str):
    """(start, end, ints) of the first bracketed group holding integers, else
    the first bare run of integers."""
    for m in _BRACKET_RE.finditer(text):
        ints = _INT_RE.findall(m.group(1))
        if ints:
            return m.start(), m.end(), [int(i) for i in ints]
    m = _BARE_LIST_RE.search(text)
    if m:
        return m.start(), m.end(), [int(i) for i in _INT_RE.findall(m.group(0))]
    return None


def parse_response(text: str, n: int) -> RankResponse:
    """Extract mode, ranking and reason, repairing the ranking into a
    permutation of ``range(n)``.

    Repairs: out-of-range and duplicate labels are dropped (first occurrence
    wins), missing labels are appended in ascending order, an absent or
    unknown mode becomes ``Slow``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    text = text or ""
    found = _find_list(text)
    if found is not None:
        start, end, ints = found
        mode_m = _MODE_RE.search(text, 0, start)
        reason = canonical_reason(text[end:])
    else:
        ints = []
        mode_m = _MODE_RE.search(text)
        if mode_m is None:
            raise Unparseable(f"no mode token or ranking in {text[:80]!r}")
        reason = canonical_reason(text[mode_m.end():])

    repairs = []
    if mode_m is None:
        mode = FALLBACK_MODE
        repairs.append(f"no recognised mode, using {FALLBACK_MODE}")
    else:
        mode = mode_m.group(1).capitalize()

    ranking, seen = [], set()
    for i in ints:
        if not 0 <= i < n:
            repairs.append(f"dropped out-of-range label {i}")
        elif i in seen:
            repairs.append(f"dropped duplicate label {i}")
        else:
            seen.add(i)
            ranking.append(i)
    missing = [i for i in range(n) if i not in seen]
    if missing:
        repairs.append(f"appended missing labels {missing}")
        ranking.extend(missing)
    for msg in repairs:
        log.info("ranker response repair: %s", msg)
    return RankResponse(mode, tuple(ranking), reason, tuple(repairs))

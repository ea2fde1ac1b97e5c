"""Ratings ingestion and densification for real dating-style data.

Input is two CSVs: ``rater,rated,rating`` (1..10) and ``id,gender``.  Users
of unknown gender and same-gender ratings are dropped; males form B and
females G.  A rating above 2 is a like, anything else (including absence)
is a dislike.  Users with the fewest ratings are then removed one at a time
until the surviving like count reaches c * min(|B|, |G|)^(3/2); survivors
are reindexed densely and the smaller side is padded with all-dislike
phantom users so the core model's square matrices apply (phantoms never
match and are excluded from reported metrics).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from pathlib import Path

from .core import PreferenceMatrices, build_matching_graph
from .errors import InputError, ParseError

LIKE_THRESHOLD = 2  # strictly greater is a like

COUNT_MODES = ("both", "given", "received")


@dataclass
class RawRatings:
    """Cross-gender ratings with known-gender raters and rated users."""

    triples: list[tuple[int, int, int]]  # (rater, rated, rating)
    genders: dict[int, str]              # id -> "M" | "F"

    def males(self) -> list[int]:
        return sorted(u for u in self._users() if self.genders[u] == "M")

    def females(self) -> list[int]:
        return sorted(u for u in self._users() if self.genders[u] == "F")

    def _users(self) -> set[int]:
        out = set()
        for a, b, _ in self.triples:
            out.add(a)
            out.add(b)
        return out


def _read_lines(path):
    text = Path(path).read_text()
    for i, line in enumerate(text.split("\n"), start=1):
        line = line.strip("\r").strip()
        if line:
            yield i, line


def parse_ratings(ratings_path, genders_path) -> RawRatings:
    """Load the two CSVs, dropping unknown genders and same-gender ratings."""
    genders: dict[int, str] = {}
    for i, line in _read_lines(genders_path):
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(genders_path, i, f"expected 'id,gender', got {line!r}")
        try:
            uid = int(parts[0])
        except ValueError:
            raise ParseError(genders_path, i, f"bad user id {parts[0]!r}") from None
        g = parts[1].strip().upper()
        if g in ("M", "F"):
            genders[uid] = g

    triples = []
    for i, line in _read_lines(ratings_path):
        parts = line.split(",")
        if len(parts) != 3:
            raise ParseError(ratings_path, i, f"expected 'rater,rated,rating', got {line!r}")
        try:
            rater, rated, rating = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError:
            raise ParseError(ratings_path, i, f"non-integer field in {line!r}") from None
        if not 1 <= rating <= 10:
            raise ParseError(ratings_path, i, f"rating {rating} outside [1, 10]")
        ga = genders.get(rater)
        gb = genders.get(rated)
        if ga is None or gb is None or ga == gb:
            continue
        triples.append((rater, rated, rating))
    return RawRatings(triples, genders)


@dataclass
class BinaryLikes:
    """Binarized cross-gender preferences plus rating-count bookkeeping."""

    boys: list[int]                       # male ids, sorted
    girls: list[int]
    likes_bg: dict[int, set[int]]         # male -> females he likes
    likes_gb: dict[int, set[int]]
    rated_by: dict[int, list[int]]        # id -> raters (for count updates)
    rated_of: dict[int, list[int]]        # id -> users they rated
    like_count: int = 0


def binarize(raw: RawRatings) -> BinaryLikes:
    """Like iff rating > 2; missing ratings are dislikes by convention."""
    boys = raw.males()
    girls = raw.females()
    likes_bg: dict[int, set[int]] = {b: set() for b in boys}
    likes_gb: dict[int, set[int]] = {g: set() for g in girls}
    rated_by: dict[int, list[int]] = {u: [] for u in boys + girls}
    rated_of: dict[int, list[int]] = {u: [] for u in boys + girls}
    nlikes = 0
    for rater, rated, rating in raw.triples:
        rated_of[rater].append(rated)
        rated_by[rated].append(rater)
        if rating > LIKE_THRESHOLD:
            if raw.genders[rater] == "M":
                if rated not in likes_bg[rater]:
                    likes_bg[rater].add(rated)
                    nlikes += 1
            else:
                if rated not in likes_gb[rater]:
                    likes_gb[rater].add(rated)
                    nlikes += 1
    return BinaryLikes(boys, girls, likes_bg, likes_gb, rated_by, rated_of, nlikes)


@dataclass
class DensifyReport:
    """Replayable record of the densification pass."""

    coefficient: float
    count_mode: str
    removals: list[tuple[int, str, int]] = field(default_factory=list)  # (id, gender, count)
    final_boys: int = 0
    final_girls: int = 0
    like_count: int = 0
    match_count: int = 0
    phantoms: int = 0
    n: int = 0

    def threshold(self) -> float:
        return self.coefficient * min(self.final_boys, self.final_girls) ** 1.5


def densify(bin_likes: BinaryLikes, c: float, count_mode: str = "both"):
    """Remove minimum-rating-count users until the like density target holds.

    Ties break toward the lowest id.  Returns (PreferenceMatrices, report);
    raises if one side would empty before the target is reached.
    """
    if c <= 0:
        raise InputError("coefficient must be positive")
    if count_mode not in COUNT_MODES:
        raise InputError(f"count_mode must be one of {COUNT_MODES}")

    genders = {b: "M" for b in bin_likes.boys}
    genders.update({g: "F" for g in bin_likes.girls})
    alive = set(bin_likes.boys) | set(bin_likes.girls)
    n_boys = len(bin_likes.boys)
    n_girls = len(bin_likes.girls)
    like_count = bin_likes.like_count

    def count_of(u):
        given = sum(1 for v in bin_likes.rated_of[u] if v in alive)
        received = sum(1 for v in bin_likes.rated_by[u] if v in alive)
        if count_mode == "given":
            return given
        if count_mode == "received":
            return received
        return given + received

    counts = {u: count_of(u) for u in alive}
    heap = [(cnt, u) for u, cnt in counts.items()]
    heapq.heapify(heap)
    report = DensifyReport(coefficient=c, count_mode=count_mode)

    def satisfied():
        if n_boys == 0 or n_girls == 0:
            return False
        return like_count >= c * min(n_boys, n_girls) ** 1.5

    while not satisfied():
        while heap:
            cnt, u = heapq.heappop(heap)
            if u in alive and counts[u] == cnt:
                break
        else:
            raise InputError("densification removed everyone before reaching the target")
        alive.discard(u)
        report.removals.append((u, genders[u], cnt))
        if genders[u] == "M":
            n_boys -= 1
            like_count -= sum(1 for v in bin_likes.likes_bg[u] if v in alive)
            like_count -= sum(1 for g in bin_likes.girls if g in alive and u in bin_likes.likes_gb[g])
        else:
            n_girls -= 1
            like_count -= sum(1 for v in bin_likes.likes_gb[u] if v in alive)
            like_count -= sum(1 for b in bin_likes.boys if b in alive and u in bin_likes.likes_bg[b])
        if n_boys == 0 or n_girls == 0:
            raise InputError("densification removed a whole side before reaching the target")
        for v in set(bin_likes.rated_of[u]) | set(bin_likes.rated_by[u]):
            if v in alive:
                counts[v] = count_of(v)
                heapq.heappush(heap, (counts[v], v))

    boys = [b for b in bin_likes.boys if b in alive]
    girls = [g for g in bin_likes.girls if g in alive]
    b_index = {b: i for i, b in enumerate(boys)}
    g_index = {g: i for i, g in enumerate(girls)}
    n = max(len(boys), len(girls))
    boy_rows = [0] * n
    girl_rows = [0] * n
    for b in boys:
        for g in bin_likes.likes_bg[b]:
            if g in alive:
                boy_rows[b_index[b]] |= 1 << g_index[g]
    for g in girls:
        for b in bin_likes.likes_gb[g]:
            if b in alive:
                girl_rows[g_index[g]] |= 1 << b_index[b]
    prefs = PreferenceMatrices(n, tuple(boy_rows), tuple(girl_rows))

    report.final_boys = len(boys)
    report.final_girls = len(girls)
    report.like_count = like_count
    report.match_count = build_matching_graph(prefs).match_count
    report.phantoms = n - min(len(boys), len(girls))
    report.n = n
    return prefs, report

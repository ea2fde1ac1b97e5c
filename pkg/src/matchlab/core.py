"""Ground-truth model: preference matrices, matching graph, overload statistic.

Both preference matrices are stored row-wise as Python-int bitsets, so the
mutual-like test for a whole row is one ``&`` and counting is one
``bit_count()``.  Bit ``j`` of ``boys_like[i]`` is boy i's sign for girl j
(1 = like); bit ``j`` of ``girls_like[i]`` is girl i's sign for boy j.

Everything here is immutable after construction and safe to share across
parallel runs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import InputError, ParseError


class Side(enum.Enum):
    BOY = "boy"
    GIRL = "girl"


@dataclass(frozen=True)
class UserRef:
    side: Side
    index: int


@dataclass(frozen=True)
class DirectedEdge:
    src: UserRef
    dst: UserRef

    def __post_init__(self):
        if self.src.side == self.dst.side:
            raise InputError("directed edges go across sides")


def _check_rows(rows, n, what):
    if len(rows) != n:
        raise InputError(f"{what}: expected {n} rows, got {len(rows)}")
    full = 1 << n
    for i, r in enumerate(rows):
        if not 0 <= r < full:
            raise InputError(f"{what}: row {i} has bits outside [0, {n})")


@dataclass(frozen=True)
class PreferenceMatrices:
    """The hidden sign assignment, one n x n boolean matrix per side."""

    n: int
    boys_like: tuple[int, ...]
    girls_like: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise InputError("population size must be >= 1")
        _check_rows(self.boys_like, self.n, "boys_like")
        _check_rows(self.girls_like, self.n, "girls_like")

    # -- sign function ------------------------------------------------
    def sign_bg(self, b: int, g: int) -> int:
        """Sign of the boy-to-girl edge (b, g): +1 like, -1 dislike."""
        return 1 if (self.boys_like[b] >> g) & 1 else -1

    def sign_gb(self, g: int, b: int) -> int:
        return 1 if (self.girls_like[g] >> b) & 1 else -1

    def boy_likes(self, b: int, g: int) -> bool:
        return bool((self.boys_like[b] >> g) & 1)

    def girl_likes(self, g: int, b: int) -> bool:
        return bool((self.girls_like[g] >> b) & 1)

    # -- conversions ---------------------------------------------------
    @staticmethod
    def from_bool_arrays(boys: np.ndarray, girls: np.ndarray) -> "PreferenceMatrices":
        boys = np.asarray(boys, dtype=bool)
        girls = np.asarray(girls, dtype=bool)
        n = boys.shape[0]
        if boys.shape != (n, n) or girls.shape != (n, n):
            raise InputError("preference matrices must both be n x n")
        return PreferenceMatrices(
            n, tuple(_row_to_mask(r) for r in boys), tuple(_row_to_mask(r) for r in girls)
        )

    def to_bool_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return (_masks_to_bool(self.boys_like, self.n), _masks_to_bool(self.girls_like, self.n))

    def boys_like_columns(self) -> list[int]:
        """Column bitsets of the boy matrix: feedback each girl receives."""
        return _transpose_masks(self.boys_like, self.n)

    def girls_like_columns(self) -> list[int]:
        """Column bitsets of the girl matrix: feedback each boy receives."""
        return _transpose_masks(self.girls_like, self.n)


def _row_to_mask(row) -> int:
    m = 0
    for j, v in enumerate(row):
        if v:
            m |= 1 << j
    return m


def _masks_to_bool(rows, n) -> np.ndarray:
    out = np.zeros((n, n), dtype=bool)
    for i, r in enumerate(rows):
        while r:
            low = r & -r
            out[i, low.bit_length() - 1] = True
            r ^= low
    return out


def _transpose_masks(rows, n) -> list[int]:
    cols = [0] * n
    for i, r in enumerate(rows):
        bit = 1 << i
        while r:
            low = r & -r
            cols[low.bit_length() - 1] |= bit
            r ^= low
    return cols


@dataclass(frozen=True)
class MatchingGraph:
    """Undirected bipartite graph of mutual likes; edge count is M."""

    n: int
    boy_rows: tuple[int, ...]  # bit g of boy_rows[b]: (b, g) is a match
    match_count: int

    def girl_rows(self) -> list[int]:
        return _transpose_masks(self.boy_rows, self.n)

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for b, r in enumerate(self.boy_rows):
            while r:
                low = r & -r
                out.append((b, low.bit_length() - 1))
                r ^= low
        return out


def build_matching_graph(prefs: PreferenceMatrices) -> MatchingGraph:
    """Edges are exactly the pairs liking each other in both directions."""
    n = prefs.n
    gcols = prefs.girls_like_columns()  # gcols[b]: girls that like boy b
    rows = tuple(prefs.boys_like[b] & gcols[b] for b in range(n))
    return MatchingGraph(n, rows, sum(r.bit_count() for r in rows))


def degree(mg: MatchingGraph, u: UserRef) -> int:
    if not 0 <= u.index < mg.n:
        raise InputError(f"user index {u.index} out of range for n={mg.n}")
    if u.side is Side.BOY:
        return mg.boy_rows[u.index].bit_count()
    return mg.girl_rows()[u.index].bit_count()


def all_degrees(mg: MatchingGraph) -> tuple[list[int], list[int]]:
    boy_deg = [r.bit_count() for r in mg.boy_rows]
    girl_deg = [c.bit_count() for c in mg.girl_rows()]
    return boy_deg, girl_deg


def delta_overload(mg: MatchingGraph, T: int) -> Fraction:
    """Total degree overload: sum over users of max(deg - T/n, 0), exact.

    Returned as a Fraction (numerator over n) so acceptance bands never see
    float drift.  Non-increasing in T; zero once T >= n * max degree.
    """
    if T < 0:
        raise InputError("T must be >= 0")
    n = mg.n
    boy_deg, girl_deg = all_degrees(mg)
    num = sum(max(d * n - T, 0) for d in boy_deg)
    num += sum(max(d * n - T, 0) for d in girl_deg)
    return Fraction(num, n)


# -- instance file format ----------------------------------------------
# line 1: n
# n lines of n chars in {0,1}: boys_like
# blank line
# n lines: girls_like


def write_instance(prefs: PreferenceMatrices, path) -> None:
    n = prefs.n
    lines = [str(n)]
    for r in prefs.boys_like:
        lines.append("".join("1" if (r >> j) & 1 else "0" for j in range(n)))
    lines.append("")
    for r in prefs.girls_like:
        lines.append("".join("1" if (r >> j) & 1 else "0" for j in range(n)))
    Path(path).write_text("\n".join(lines) + "\n")


def read_instance(path) -> PreferenceMatrices:
    path = Path(path)
    raw = path.read_text().splitlines()
    if not raw:
        raise ParseError(path, 1, "empty instance file")
    try:
        n = int(raw[0].strip())
    except ValueError:
        raise ParseError(path, 1, f"expected population size, got {raw[0]!r}") from None
    if n < 1:
        raise ParseError(path, 1, f"population size must be >= 1, got {n}")
    if len(raw) < 2 * n + 2:
        raise ParseError(path, len(raw), f"expected {2 * n + 2} lines for n={n}")

    def parse_block(start, what):
        rows = []
        for i in range(n):
            line = raw[start + i].strip()
            if len(line) != n or set(line) - {"0", "1"}:
                raise ParseError(path, start + i + 1, f"{what}: need {n} chars of 0/1")
            rows.append(int(line[::-1], 2))
        return tuple(rows)

    boys = parse_block(1, "boys_like")
    if raw[n + 1].strip():
        raise ParseError(path, n + 2, "expected blank separator line")
    girls = parse_block(n + 2, "girls_like")
    return PreferenceMatrices(n, boys, girls)

"""The round engine: arrivals, policy selections, sign revelation, accounting.

One round has two halves.  A uniformly random boy logs in, the policy picks a
girl for him, and the sign of that boy-to-girl edge is revealed; then the
mirrored girl half runs.  A match is credited at the round where the second
positive direction of a pair first enters the observed set.

Policies see only arrivals, their own selections and the revealed signs; the
engine is the sole reader of the hidden sign function (exactly two sign
lookups per round, which the test harness exploits to assert hygiene).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import PreferenceMatrices, Side, UserRef
from .errors import InputError, ProtocolError
from .rng import STREAM_POLICY, SubstreamRng, draw_arrivals


@dataclass(frozen=True)
class RoundRecord:
    t: int
    boy_arrival: UserRef
    girl_selected: UserRef
    sign_bg: int
    girl_arrival: UserRef
    boy_selected: UserRef
    sign_gb: int


@dataclass(frozen=True)
class RoundTrace:
    """Array-backed sequence of the T round records."""

    boy_arrivals: np.ndarray
    girls_selected: np.ndarray
    signs_bg: np.ndarray
    girl_arrivals: np.ndarray
    boys_selected: np.ndarray
    signs_gb: np.ndarray

    def __len__(self) -> int:
        return len(self.boy_arrivals)

    def record(self, t: int) -> RoundRecord:
        """Round record for 1-based round index t."""
        i = t - 1
        return RoundRecord(
            t,
            UserRef(Side.BOY, int(self.boy_arrivals[i])),
            UserRef(Side.GIRL, int(self.girls_selected[i])),
            int(self.signs_bg[i]),
            UserRef(Side.GIRL, int(self.girl_arrivals[i])),
            UserRef(Side.BOY, int(self.boys_selected[i])),
            int(self.signs_gb[i]),
        )

    def __iter__(self):
        for t in range(1, len(self) + 1):
            yield self.record(t)


@dataclass
class FeedbackLedger:
    """What has been revealed so far, and the uncovered-match accounting.

    Observed directed edges are kept as per-user bitsets.  A pair enters
    ``uncovered`` at the half-round where its second direction is revealed
    with both signs positive.  ``reciprocal_pairs`` counts unordered pairs
    with both directions observed regardless of sign.
    """

    n: int
    curve_stride: int = 1
    obs_bg: list[int] = field(default_factory=list)  # bit g of obs_bg[b]
    obs_gb: list[int] = field(default_factory=list)  # bit b of obs_gb[g]
    pos_bg: list[int] = field(default_factory=list)
    pos_gb: list[int] = field(default_factory=list)
    reciprocal_pairs: int = 0
    uncovered: set[tuple[int, int]] = field(default_factory=set)
    curve: np.ndarray | None = None
    auc_sum: int = 0

    def __post_init__(self):
        if not self.obs_bg:
            self.obs_bg = [0] * self.n
            self.obs_gb = [0] * self.n
            self.pos_bg = [0] * self.n
            self.pos_gb = [0] * self.n

    @property
    def matches(self) -> int:
        return len(self.uncovered)

    def observed_edge_count(self) -> int:
        return sum(r.bit_count() for r in self.obs_bg) + sum(
            r.bit_count() for r in self.obs_gb
        )

    def reciprocal_pair_set(self) -> set[tuple[int, int]]:
        """All (b, g) pairs with both directions observed."""
        out = set()
        for b, row in enumerate(self.obs_bg):
            m = row
            while m:
                low = m & -m
                g = low.bit_length() - 1
                if (self.obs_gb[g] >> b) & 1:
                    out.add((b, g))
                m ^= low
        return out


@dataclass(frozen=True)
class RunResult:
    trace: RoundTrace
    ledger: FeedbackLedger
    policy_name: str
    seed: int

    @property
    def T(self) -> int:
        return len(self.trace)


def run_protocol(
    prefs: PreferenceMatrices,
    policy,
    T: int,
    seed: int,
    curve_stride: int = 1,
) -> RunResult:
    """Run one seeded T-round protocol episode under the given policy.

    Deterministic function of (instance, policy + params, T, seed): arrivals
    come from the arrivals substream, the policy gets its own substream.
    ``curve_stride`` > 1 decimates the stored match curve for very long runs;
    the area-under-curve accumulator stays exact either way.
    """
    n = prefs.n
    if T < 1:
        raise InputError(f"T must be >= 1, got {T}")
    if curve_stride < 1:
        raise InputError("curve_stride must be >= 1")

    boy_arr, girl_arr = draw_arrivals(n, T, seed)
    policy.start(n, T, SubstreamRng(seed, STREAM_POLICY))

    ledger = FeedbackLedger(n, curve_stride)
    obs_bg = ledger.obs_bg
    obs_gb = ledger.obs_gb
    pos_bg = ledger.pos_bg
    pos_gb = ledger.pos_gb
    uncovered = ledger.uncovered

    sel_b = policy.select_for_boy
    sel_g = policy.select_for_girl
    obs_b = policy.observe_boy_feedback
    obs_g = policy.observe_girl_feedback
    sign_bg = prefs.sign_bg
    sign_gb = prefs.sign_gb

    girls_sel: list[int] = []
    boys_sel: list[int] = []
    s_bg: list[int] = []
    s_gb: list[int] = []
    curve: list[int] = []

    pairs = 0
    matches = 0
    auc_sum = 0
    stride = curve_stride

    for t in range(1, T + 1):
        # -- boy half: (1_B) arrival, (2_B) selection, (3_B) reveal
        b = boy_arr[t - 1]
        g1 = sel_b(b, t)
        if not 0 <= g1 < n:
            raise ProtocolError(
                f"{policy.name}: girl selection {g1} out of range at round {t}"
            )
        s1 = sign_bg(b, g1)
        bit = 1 << g1
        if not obs_bg[b] & bit:
            obs_bg[b] |= bit
            if s1 > 0:
                pos_bg[b] |= bit
            if (obs_gb[g1] >> b) & 1:
                pairs += 1
                if s1 > 0 and (pos_gb[g1] >> b) & 1:
                    matches += 1
                    uncovered.add((b, g1))
        obs_b(b, g1, s1, t)

        # -- girl half: (1_G), (2_G), (3_G)
        g = girl_arr[t - 1]
        b1 = sel_g(g, t)
        if not 0 <= b1 < n:
            raise ProtocolError(
                f"{policy.name}: boy selection {b1} out of range at round {t}"
            )
        s2 = sign_gb(g, b1)
        bit = 1 << b1
        if not obs_gb[g] & bit:
            obs_gb[g] |= bit
            if s2 > 0:
                pos_gb[g] |= bit
            if (obs_bg[b1] >> g) & 1:
                pairs += 1
                if s2 > 0 and (pos_bg[b1] >> g) & 1:
                    matches += 1
                    uncovered.add((b1, g))
        obs_g(g, b1, s2, t)

        girls_sel.append(g1)
        boys_sel.append(b1)
        s_bg.append(s1)
        s_gb.append(s2)
        auc_sum += matches
        if stride == 1 or t % stride == 0 or t == T:
            curve.append(matches)

    ledger.reciprocal_pairs = pairs
    ledger.auc_sum = auc_sum
    ledger.curve = np.asarray(curve, dtype=np.int64)

    trace = RoundTrace(
        np.asarray(boy_arr, dtype=np.int32),
        np.asarray(girls_sel, dtype=np.int32),
        np.asarray(s_bg, dtype=np.int8),
        np.asarray(girl_arr, dtype=np.int32),
        np.asarray(boys_sel, dtype=np.int32),
        np.asarray(s_gb, dtype=np.int8),
    )
    return RunResult(trace, ledger, policy.name, seed)


def matches_curve(run: RunResult) -> np.ndarray:
    """The stored match curve M_1..M_T (decimated iff the run was)."""
    return run.ledger.curve


def area_under_curve(run: RunResult) -> float:
    """Average number of uncovered matches over rounds: sum_t M_t / T."""
    T = run.T
    if T < 1:
        raise InputError("run has no rounds")
    return run.ledger.auc_sum / T


def run_batch(
    prefs: PreferenceMatrices,
    policy_factory,
    T: int,
    seeds,
    curve_stride: int = 1,
    threads: int = 1,
) -> list[RunResult]:
    """Independent seeded runs of one policy; results in seed order.

    ``policy_factory`` builds a fresh policy per run.  Threads only help when
    a policy releases the GIL (they mostly do not under CPython); results are
    merged deterministically by seed order either way.
    """
    seeds = list(seeds)
    if threads <= 1 or len(seeds) <= 1:
        return [run_protocol(prefs, policy_factory(), T, s, curve_stride) for s in seeds]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=threads) as ex:
        futs = [
            ex.submit(run_protocol, prefs, policy_factory(), T, s, curve_stride)
            for s in seeds
        ]
        return [f.result() for f in futs]

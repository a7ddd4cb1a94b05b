"""Brute-force audit of the optimality properties of causal states.

Every set partition of the positive-probability length-K histories is
scored for prescience (H[Future^L | R]), complexity (H[R]) and, for the
prescient ones, next-state entropy H[R'|R]. The truncated causal
partition must come out best on each count.

Next-state classes of a rival are read off the one-symbol history shift
(drop the oldest symbol, append the emitted one). For the causal states
the successor is the class matching the extended history's morph, which
is the transition structure the derived machine uses.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .derivation import (
    DEFAULT_TOL,
    UNMATCHED,
    HistoryFutureTable,
    extension_successors,
    history_future_table,
    partition_by_future_equivalence,
)
from .errors import TooManyHistories
from .information import entropy_of, excess_entropy_estimate
from .partition import Partition
from .process import ProcessSpec, future_matrix

MAX_HISTORIES = 10
PRESCIENCE_TOL = 1e-9


def bell_number(n: int) -> int:
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def restricted_growth_strings(n: int):
    """Yield every restricted growth string of length ``n`` in lexicographic order."""
    if n == 0:
        yield ()
        return
    a = [0] * n
    b = [1] * n  # b[i] = 1 + max(a[:i])

    while True:
        yield tuple(a)
        j = n - 1
        while j > 0 and a[j] == b[j]:
            j -= 1
        if j == 0:
            return
        a[j] += 1
        for i in range(j + 1, n):
            a[i] = 0
            b[i] = max(b[j], a[j] + 1)


def enumerate_partitions(histories):
    histories = sorted(histories)
    if len(histories) > MAX_HISTORIES:
        raise TooManyHistories(
            f"{len(histories)} histories; exhaustive enumeration is limited to {MAX_HISTORIES}"
        )
    for rgs in restricted_growth_strings(len(histories)):
        yield Partition.from_labels(histories, rgs)


def _labels(p: Partition, table: HistoryFutureTable) -> np.ndarray:
    try:
        return np.array([p.assignment[h] for h in table.histories])
    except KeyError as exc:
        raise ValueError(f"partition does not cover history {exc.args[0]}") from None


def _scores(labels, table):
    """(H[Future^L | R], H[R]) for integer class labels aligned with the table."""
    n = labels.max() + 1
    mass = np.bincount(labels, weights=table.probs, minlength=n)
    joint = np.zeros((n, table.futures.shape[1]))
    np.add.at(joint, labels, table.probs[:, None] * table.futures)
    h_r = entropy_of(mass)
    return max(0.0, entropy_of(joint) - h_r), h_r


def prescience(p: Partition, spec: ProcessSpec, L: int) -> float:
    """H[Future^L | R] for a partition of length-K histories."""
    K = len(next(iter(p.assignment)))
    table = history_future_table(spec, K, L)
    return _scores(_labels(p, table), table)[0]


def partition_complexity(p: Partition, spec: ProcessSpec) -> float:
    """H[R] with class masses summed from member-history probabilities."""
    K = len(next(iter(p.assignment)))
    table = history_future_table(spec, K, 1)
    return _scores(_labels(p, table), table)[1]


def suffix_partition(histories, order: int) -> Partition:
    """Group histories by their last ``order`` symbols (an order-r Markov rival)."""
    histories = sorted(histories)
    return Partition.from_labels(histories, [h[len(h) - order :] for h in histories])


def _shift_pairs(table: HistoryFutureTable):
    """(history row, shifted history row, P(h s)) for every positive extension."""
    k = len(table.spec.alphabet)
    M = table.spec.labeled
    rows, nxt, mass = [], [], []
    for r, h in enumerate(table.histories):
        p_sym = (table.beliefs[r] @ M).sum(axis=1)
        for s in range(k):
            if p_sym[s] > 0:
                rows.append(r)
                nxt.append(table.index[h[1:] + (s,)])
                mass.append(table.probs[r] * p_sym[s])
    return np.array(rows), np.array(nxt), np.array(mass)


def _next_entropy(labels, pairs):
    rows, nxt, mass = pairs
    a, b = labels[rows], labels[nxt]
    n = labels.max() + 1
    joint = np.zeros((n, n))
    np.add.at(joint, (a, b), mass)
    return max(0.0, entropy_of(joint) - entropy_of(joint.sum(axis=1)))


def causal_next_entropy(table, causal: Partition, tol=DEFAULT_TOL) -> float:
    """H[S'|S] with successors taken from extended-history morphs."""
    ext = extension_successors(table, causal, tol)
    n = len(causal)
    extra = []  # morphs of unmatched extensions, each a distinct successor label
    joint = {}
    for (h, s), j in ext.successor.items():
        if j == UNMATCHED:
            r = table.index[h]
            v = table.beliefs[r] @ table.spec.labeled[s]
            morph = future_matrix(table.spec, (v / v.sum())[None, :], table.L)[0]
            for idx, other in enumerate(extra):
                if 0.5 * np.abs(other - morph).sum() <= tol:
                    j = n + idx
                    break
            else:
                extra.append(morph)
                j = n + len(extra) - 1
        key = (causal.assignment[h], j)
        joint[key] = joint.get(key, 0.0) + ext.mass[(h, s)]
    table_arr = np.zeros((n, n + len(extra)))
    for (i, j), p in joint.items():
        table_arr[i, j] += p
    return max(0.0, entropy_of(table_arr) - entropy_of(table_arr.sum(axis=1)))


@dataclass
class Check:
    holds: bool
    detail: str = ""
    counterexample: Partition | None = None


@dataclass
class TheoremReport:
    process: str
    K: int
    L: int
    n_histories: int
    n_partitions: int
    causal: Partition
    history_prescience: float  # H[Future^L | Past^K]
    causal_prescience: float
    min_prescience: float
    causal_complexity: float
    min_prescient_complexity: float
    prescient_rivals: list
    causal_next_entropy: float
    causal_next_entropy_shift: float
    min_rival_next_entropy: float
    excess_entropy: float
    state_given_future: float  # H[S | Future^L]
    checks: dict = field(default_factory=dict)
    frontier: list = field(default_factory=list)  # (prescience, complexity) per partition

    @property
    def all_hold(self) -> bool:
        return all(c.holds for c in self.checks.values())

    def to_text(self, decode=str) -> str:
        def fmt(p):
            return " | ".join(",".join(decode(h) for h in c) for c in p.classes)

        lines = [
            f"process: {self.process}",
            f"K: {self.K}",
            f"L: {self.L}",
            f"histories: {self.n_histories}",
            f"partitions examined: {self.n_partitions}",
            f"causal partition: {fmt(self.causal)}",
            f"H[Future^L|Past^K]: {self.history_prescience:.6f}",
            f"H[Future^L|S]: {self.causal_prescience:.6f}",
            f"min H[Future^L|R]: {self.min_prescience:.6f}",
            f"C_mu(S): {self.causal_complexity:.6f}",
            f"min C_mu over prescient rivals: {self.min_prescient_complexity:.6f}",
            f"prescient rivals: {len(self.prescient_rivals)}",
            f"H[S'|S] (extension successors): {self.causal_next_entropy:.6f}",
            f"H[S'|S] (history shift): {self.causal_next_entropy_shift:.6f}",
            f"min H[R'|R] over prescient rivals (history shift): "
            f"{self.min_rival_next_entropy:.6f}",
            f"E(L): {self.excess_entropy:.6f}",
            f"H[S|Future^L]: {self.state_given_future:.6f}",
            "checks:",
        ]
        for name, c in self.checks.items():
            verdict = "holds" if c.holds else "COUNTEREXAMPLE"
            line = f"  {name}: {verdict}"
            if c.detail:
                line += f" ({c.detail})"
            lines.append(line)
            if c.counterexample is not None:
                lines.append(f"    partition: {fmt(c.counterexample)}")
        lines.append("all checks hold" if self.all_hold else "some checks FAILED")
        return "\n".join(lines) + "\n"


def verify_all(spec: ProcessSpec, K: int, L: int, tol: float = DEFAULT_TOL) -> TheoremReport:
    table = history_future_table(spec, K, L)
    histories = table.histories
    if len(histories) > MAX_HISTORIES:
        raise TooManyHistories(
            f"{len(histories)} positive-probability histories at K={K}; limit {MAX_HISTORIES}"
        )
    causal = partition_by_future_equivalence(table, tol)
    causal_labels = _labels(causal, table)
    causal_h, causal_c = _scores(causal_labels, table)
    history_h, _ = _scores(np.arange(len(histories)), table)
    pairs = _shift_pairs(table)
    causal_next = causal_next_entropy(table, causal, tol)
    causal_next_shift = _next_entropy(causal_labels, pairs)

    n_parts = 0
    min_h = np.inf
    rivals = []
    frontier = []
    first_bad = {}
    min_rival_c = np.inf
    min_rival_next = np.inf
    for rgs in restricted_growth_strings(len(histories)):
        n_parts += 1
        labels = np.asarray(rgs)
        h, c = _scores(labels, table)
        frontier.append((h, c))
        min_h = min(min_h, h)
        if h < causal_h - PRESCIENCE_TOL:
            first_bad.setdefault("maximal_prescience", rgs)
        if abs(h - causal_h) > PRESCIENCE_TOL:
            continue
        p = Partition.from_labels(histories, rgs)
        rivals.append(p)
        min_rival_c = min(min_rival_c, c)
        if c < causal_c - PRESCIENCE_TOL:
            first_bad.setdefault("minimal_complexity", rgs)
        if not p.refines(causal):
            first_bad.setdefault("refinement", rgs)
        if abs(c - causal_c) <= PRESCIENCE_TOL and not p.same_blocks(causal):
            first_bad.setdefault("uniqueness", rgs)
        nxt = _next_entropy(labels, pairs)
        min_rival_next = min(min_rival_next, nxt)
        if nxt < causal_next - PRESCIENCE_TOL:
            first_bad.setdefault("minimal_stochasticity", rgs)

    excess = excess_entropy_estimate(spec, L)
    joint_sf = np.zeros((len(causal), table.futures.shape[1]))
    np.add.at(joint_sf, causal_labels, table.probs[:, None] * table.futures)
    s_given_f = max(0.0, entropy_of(joint_sf) - entropy_of(joint_sf.sum(axis=0)))

    def check(name, ok, detail):
        rgs = first_bad.get(name)
        ce = Partition.from_labels(histories, rgs) if rgs is not None else None
        return Check(ok and rgs is None, detail, ce)

    checks = {
        "maximal_prescience": check(
            "maximal_prescience",
            abs(causal_h - history_h) <= PRESCIENCE_TOL and min_h >= causal_h - PRESCIENCE_TOL,
            f"min {min_h:.6f} vs causal {causal_h:.6f} vs histories {history_h:.6f}",
        ),
        "minimal_complexity": check(
            "minimal_complexity", True, f"{len(rivals)} prescient rivals, min C_mu {min_rival_c:.6f}"
        ),
        "refinement": check("refinement", True, "every prescient rival refines the causal states"),
        "uniqueness": check(
            "uniqueness",
            sum(abs(_scores(_labels(p, table), table)[1] - causal_c) <= PRESCIENCE_TOL for p in rivals)
            == 1,
            "one minimal-complexity prescient partition",
        ),
        "minimal_stochasticity": check(
            "minimal_stochasticity",
            True,
            f"min rival H[R'|R] {min_rival_next:.6f} vs H[S'|S] {causal_next:.6f}; "
            "rival successors by history shift",
        ),
        "excess_entropy_bound": check(
            "excess_entropy_bound",
            excess <= causal_c + PRESCIENCE_TOL,
            f"E(L) {excess:.6f} <= C_mu {causal_c:.6f}; H[S|Future^L] {s_given_f:.6f}",
        ),
    }
    return TheoremReport(
        process=spec.name,
        K=K,
        L=L,
        n_histories=len(histories),
        n_partitions=n_parts,
        causal=causal,
        history_prescience=history_h,
        causal_prescience=causal_h,
        min_prescience=float(min_h),
        causal_complexity=causal_c,
        min_prescient_complexity=float(min_rival_c),
        prescient_rivals=rivals,
        causal_next_entropy=causal_next,
        causal_next_entropy_shift=causal_next_shift,
        min_rival_next_entropy=float(min_rival_next),
        excess_entropy=excess,
        state_given_future=s_given_f,
        checks=checks,
        frontier=frontier,
    )

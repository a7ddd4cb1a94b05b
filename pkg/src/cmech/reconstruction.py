"""Batch epsilon-machine reconstruction from a symbol sequence.

Pipeline: sliding-window counts -> chi-square merging of length-K
histories -> successor assignment from length-(K+1) extended histories
-> state splitting until unifilar -> keep the closed recurrent class ->
maximum-likelihood transition estimates.

Family-wise error: each history is compared against up to several
classes, so the per-test level is ``alpha / (m - 1)`` for ``m`` tested
histories (Bonferroni). This keeps the chance of a spurious split of a
single true state below ``alpha``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2

from .derivation import UNMATCHED, closed_classes
from .errors import DeterminizationDiverged, NonDeterministicAtHorizon, SequenceTooShort
from .machine import EpsilonMachine, state_label, total_variation
from .partition import Partition
from .process import Alphabet, check_block, stationary_from_matrix

log = logging.getLogger(__name__)

MIN_EXPECTED = 5.0
FALLBACK_TV = 0.05
MAX_ITERATIONS = 32


@dataclass
class CountTable:
    K: int
    L: int
    k: int
    counts: dict  # history -> {future: count}
    total_windows: int

    def vector(self, h) -> np.ndarray:
        """Dense future-count vector (lexicographic future order)."""
        out = np.zeros(self.k**self.L)
        for f, c in self.counts[h].items():
            idx = 0
            for s in f:
                idx = idx * self.k + s
            out[idx] = c
        return out

    def history_total(self, h) -> int:
        return sum(self.counts[h].values())

    def next_symbol_counts(self, h) -> np.ndarray:
        out = np.zeros(self.k)
        for f, c in self.counts[h].items():
            out[f[0]] += c
        return out

    def merge(self, other: "CountTable") -> "CountTable":
        if (self.K, self.L, self.k) != (other.K, other.L, other.k):
            raise ValueError("count tables have different shapes")
        counts = {h: dict(fs) for h, fs in self.counts.items()}
        for h, fs in other.counts.items():
            row = counts.setdefault(h, {})
            for f, c in fs.items():
                row[f] = row.get(f, 0) + c
        return CountTable(self.K, self.L, self.k, counts, self.total_windows + other.total_windows)


def _decode(code, k, length):
    out = []
    for _ in range(length):
        code, r = divmod(code, k)
        out.append(r)
    return tuple(reversed(out))


def count_windows(data, K: int, L: int, k: int | None = None) -> CountTable:
    """Count every (length-K history, length-L future) window, stride 1."""
    x = np.asarray(data, dtype=np.int64)
    if x.size < K + L:
        raise SequenceTooShort(f"need at least K+L={K + L} symbols, got {x.size}")
    if k is None:
        k = int(x.max()) + 1 if x.size else 1
    check_block(k, K)
    check_block(k, L)
    n = x.size - K - L + 1
    hcode = np.zeros(n, dtype=np.int64)
    for i in range(K):
        hcode = hcode * k + x[i : i + n]
    fcode = np.zeros(n, dtype=np.int64)
    for i in range(K, K + L):
        fcode = fcode * k + x[i : i + n]
    codes, freq = np.unique(hcode * k**L + fcode, return_counts=True)
    counts = {}
    for code, c in zip(codes.tolist(), freq.tolist()):
        h, f = divmod(code, k**L)
        counts.setdefault(_decode(h, k, K), {})[_decode(f, k, L)] = c
    return CountTable(K, L, k, counts, n)


def thinned_vectors(data, K: int, L: int, k: int) -> dict:
    """Future-count vectors that keep only non-overlapping futures per history.

    Occurrences of a history closer than ``L`` symbols share future
    symbols, which breaks the multinomial model behind the chi-square
    test. Keeping an occurrence only when it starts at least ``L`` after the
    last kept occurrence of the same history restores independence.
    """
    x = np.asarray(data, dtype=np.int64)
    n = x.size - K - L + 1
    hcode = np.zeros(n, dtype=np.int64)
    for i in range(K):
        hcode = hcode * k + x[i : i + n]
    fcode = np.zeros(n, dtype=np.int64)
    for i in range(K, K + L):
        fcode = fcode * k + x[i : i + n]
    last = {}
    out = {}
    for pos, (h, f) in enumerate(zip(hcode.tolist(), fcode.tolist())):
        prev = last.get(h)
        if prev is not None and pos - prev < L:
            continue
        last[h] = pos
        vec = out.get(h)
        if vec is None:
            vec = out[h] = np.zeros(k**L)
        vec[f] += 1
    return {_decode(h, k, K): v for h, v in out.items()}


def count_windows_sharded(data, K, L, n_shards, k=None) -> CountTable:
    """Same result as :func:`count_windows`, counted over overlapping chunks."""
    x = np.asarray(data, dtype=np.int64)
    if k is None:
        k = int(x.max()) + 1
    n = x.size - K - L + 1
    if n < 1:
        raise SequenceTooShort(f"need at least K+L={K + L} symbols, got {x.size}")
    bounds = np.linspace(0, n, n_shards + 1).astype(int)
    table = None
    for a, b in zip(bounds, bounds[1:]):
        if b <= a:
            continue
        part = count_windows(x[a : b + K + L - 1], K, L, k)
        table = part if table is None else table.merge(part)
    return table


def homogeneity_pvalue(a, b) -> float:
    """Chi-square test that two count vectors share one multinomial.

    Cells are pooled (smallest first) while some expected count is below
    5, down to a floor of two cells. When the observed support is a single
    cell there are no degrees of freedom and the decision falls back to a
    total-variation threshold; the result is then 1.0 or 0.0.
    """
    a = np.array(a, float)
    b = np.array(b, float)
    keep = (a + b) > 0
    a, b = a[keep], b[keep]
    na, nb = a.sum(), b.sum()
    if na == 0 or nb == 0:
        return 1.0
    raw_a, raw_b = a / na, b / nb
    while a.size > 2:
        col = a + b
        ea, eb = na * col / (na + nb), nb * col / (na + nb)
        if min(ea.min(), eb.min()) >= MIN_EXPECTED:
            break
        order = np.argsort(col, kind="stable")
        i, j = order[0], order[1]
        a[j] += a[i]
        b[j] += b[i]
        a, b = np.delete(a, i), np.delete(b, i)
    if a.size < 2:
        # no degrees of freedom left: compare the raw empirical distributions
        return 1.0 if total_variation(raw_a, raw_b) <= FALLBACK_TV else 0.0
    col = a + b
    ea, eb = na * col / (na + nb), nb * col / (na + nb)
    stat = float(((a - ea) ** 2 / ea).sum() + ((b - eb) ** 2 / eb).sum())
    return float(chi2.sf(stat, a.size - 1))


def _bonferroni(alpha, m):
    return alpha / max(1, m - 1)


def merge_histories(
    t: CountTable, alpha: float = 0.05, min_count: int = 10, test_vectors=None
) -> Partition:
    """Group histories whose futures a chi-square test cannot tell apart.

    ``test_vectors`` (see :func:`thinned_vectors`) replaces the raw window
    counts inside the test when given.
    """
    labels, _ = _merge(t, alpha, min_count, test_vectors)
    return Partition.from_labels(sorted(t.counts), labels)


def _merge(t, alpha, min_count, test_vectors=None):
    histories = sorted(t.counts)
    if test_vectors is None:
        vectors = {h: t.vector(h) for h in histories}
    else:
        vectors = test_vectors
    frequent = [h for h in histories if t.history_total(h) >= min_count]
    rare = [h for h in histories if t.history_total(h) < min_count]
    if not frequent:
        frequent, rare = histories, []
    level = _bonferroni(alpha, len(frequent))
    pooled, assign = [], {}
    for h in frequent:
        for c, pool in enumerate(pooled):
            if homogeneity_pvalue(vectors[h], pool) >= level:
                pool += vectors[h]
                assign[h] = c
                break
        else:
            pooled.append(vectors[h].copy())
            assign[h] = len(pooled) - 1
    for h in rare:
        v = vectors[h] / vectors[h].sum()
        dists = [total_variation(v, pool / pool.sum()) for pool in pooled]
        assign[h] = int(np.argmin(dists))
    return [assign[h] for h in histories], level


@dataclass
class Diagnostics:
    initial_classes: int
    iterations: int = 0
    splits: list = field(default_factory=list)  # (iteration, class members, groups)
    discarded: list = field(default_factory=list)  # member lists of dropped transient classes
    std_errors: dict = field(default_factory=dict)  # (i, s, j) -> standard error
    test_level: float = 0.0
    merged: int = 0  # states folded together by minimization

    def lines(self, decode=str):
        out = [
            f"initial classes: {self.initial_classes}",
            f"determinization iterations: {self.iterations}",
            f"splits: {len(self.splits)}",
            f"per-test level: {self.test_level:.6g}",
        ]
        for it, groups in self.splits:
            out.append(
                f"  iteration {it}: "
                + " / ".join(",".join(decode(h) for h in g) for g in groups)
            )
        out.append(f"states merged by minimization: {self.merged}")
        out.append(f"discarded transient states: {len(self.discarded)}")
        for members in self.discarded:
            out.append("  " + ",".join(decode(h) for h in members))
        return out


def _signature_groups(members, succ_of, k):
    """First-fit grouping of histories whose observed successors agree."""
    groups, sigs = [], []
    for h in members:
        sig = [succ_of.get((h, s)) for s in range(k)]
        for g, gs in zip(groups, sigs):
            if all(a is None or b is None or a == b for a, b in zip(sig, gs)):
                g.append(h)
                for s in range(k):
                    if gs[s] is None:
                        gs[s] = sig[s]
                break
        else:
            groups.append([h])
            sigs.append(sig)
    return groups


def reconstruct(data, K: int, L: int, alpha: float = 0.05, min_count: int = 10, alphabet=None):
    """Reconstruct an epsilon-machine; returns ``(machine, diagnostics)``."""
    x = np.asarray(data, dtype=np.int64)
    if alphabet is None:
        k = int(x.max()) + 1 if x.size else 1
        alphabet = Alphabet(tuple(str(i) for i in range(k)))
    k = len(alphabet)
    t = count_windows(x, K, L, k)
    t_ext = count_windows(x, K + 1, L, k) if x.size >= K + L + 1 else None
    histories = sorted(t.counts)
    tests = thinned_vectors(x, K, L, k)
    labels, level = _merge(t, alpha, min_count, tests)
    assign = dict(zip(histories, labels))
    diag = Diagnostics(initial_classes=len(set(labels)), test_level=level)

    ext_vectors, ext_totals = {}, {}
    if t_ext is not None:
        ext_vectors = thinned_vectors(x, K + 1, L, k)
        ext_totals = {xh: t_ext.history_total(xh) for xh in t_ext.counts}
    ext_level = _bonferroni(alpha, sum(c >= min_count for c in ext_totals.values()))

    def pooled_vectors():
        n = max(assign.values()) + 1
        pools = np.zeros((n, k**L))
        for h, c in assign.items():
            pools[c] += tests[h]
        return pools

    for iteration in range(1, MAX_ITERATIONS + 1):
        diag.iterations = iteration
        pools = pooled_vectors()
        succ_of = {}
        for xh, v in ext_vectors.items():
            h, s, suffix = xh[:-1], xh[-1], xh[1:]
            home = assign.get(suffix)
            if ext_totals[xh] < min_count:
                succ_of[(h, s)] = home if home is not None else UNMATCHED
                continue
            if home is not None and homogeneity_pvalue(v, pools[home]) >= ext_level:
                succ_of[(h, s)] = home
                continue
            pvals = [homogeneity_pvalue(v, pool) for pool in pools]
            best = int(np.argmax(pvals))
            if pvals[best] >= ext_level:
                succ_of[(h, s)] = best
            else:
                # no class fits: keep the shifted history's class
                succ_of[(h, s)] = home if home is not None else UNMATCHED
        classes = {}
        for h in histories:
            classes.setdefault(assign[h], []).append(h)
        split_happened = False
        new_assign = {}
        next_label = 0
        for c in sorted(classes):
            groups = _signature_groups(classes[c], succ_of, k)
            if len(groups) > 1:
                split_happened = True
                diag.splits.append((iteration, groups))
            for g in groups:
                for h in g:
                    new_assign[h] = next_label
                next_label += 1
        assign = new_assign
        if not split_happened:
            break
    else:
        partial = _assemble(alphabet, K, L, t, assign, succ_of, diag, strict=False)
        raise DeterminizationDiverged(
            f"state splitting did not settle within {MAX_ITERATIONS} iterations", partial
        )
    assign, succ_of = _minimize(t, tests, assign, succ_of, level, k, diag)
    machine = _assemble(alphabet, K, L, t, assign, succ_of, diag)
    return machine, diag


def _minimize(t, tests, assign, succ_of, level, k, diag):
    """Merge interchangeable states (Moore-style partition refinement).

    Blocks start as groups of states with statistically compatible pooled
    futures and are refined until every state in a block moves to the
    same block on every symbol.
    """
    n = max(assign.values()) + 1
    pools = np.zeros((n, t.k**t.L))
    for h, c in assign.items():
        pools[c] += tests[h]
    succ = {}
    for (h, s), j in succ_of.items():
        succ[(assign[h], s)] = j
    block_pools, block = [], {}
    for c in range(n):
        for b, pool in enumerate(block_pools):
            if homogeneity_pvalue(pools[c], pool) >= level:
                pool += pools[c]
                block[c] = b
                break
        else:
            block_pools.append(pools[c].copy())
            block[c] = len(block_pools) - 1
    while True:
        sigs = {}
        for c in range(n):
            sig = (block[c],) + tuple(
                None if succ.get((c, s)) is None
                else ("out" if succ[(c, s)] == UNMATCHED else block[succ[(c, s)]])
                for s in range(k)
            )
            sigs[c] = sig
        relabel = {sig: i for i, sig in enumerate(dict.fromkeys(sigs[c] for c in range(n)))}
        refined = {c: relabel[sigs[c]] for c in range(n)}
        if len(set(refined.values())) == len(set(block.values())):
            block = refined
            break
        block = refined
    merged = n - len(set(block.values()))
    diag.merged = merged
    if not merged:
        return assign, succ_of
    new_assign = {h: block[c] for h, c in assign.items()}
    new_succ = {
        key: (j if j == UNMATCHED else block[j]) for key, j in succ_of.items()
    }
    return new_assign, new_succ


def _assemble(alphabet, K, L, t, assign, succ_of, diag, strict=True):
    k = len(alphabet)
    histories = sorted(t.counts)
    n = max(assign.values()) + 1
    members = [[] for _ in range(n)]
    for h in histories:
        members[assign[h]].append(h)
    # class order: lexicographic minimum member
    order = sorted(range(n), key=lambda c: members[c][0])
    targets = {}
    for (h, s), j in succ_of.items():
        if h in assign:
            targets.setdefault((assign[h], s), set()).add(j)
    edges = [(i, j) for (i, _), js in targets.items() for j in js]
    closed = closed_classes(n, edges)
    if not closed:
        if strict:
            raise NonDeterministicAtHorizon(f"K={K}: no closed recurrent state set; adjust K")
        closed = [list(range(n))]
    mass = [sum(t.history_total(h) for h in members[c]) for c in range(n)]
    keep_set = set(max(closed, key=lambda cs: sum(mass[c] for c in cs)))
    keep = [c for c in order if c in keep_set]
    diag.discarded = [members[c] for c in order if c not in keep_set]
    relabel = {c: r for r, c in enumerate(keep)}

    trans_counts = {}
    state_totals = np.zeros(len(keep))
    for c in keep:
        i = relabel[c]
        for h in members[c]:
            sym = t.next_symbol_counts(h)
            for s in range(k):
                if sym[s] == 0:
                    continue
                j = succ_of.get((h, s))
                if j is None or j == UNMATCHED:
                    suffix = h[1:] + (s,)
                    j = assign.get(suffix, UNMATCHED)
                if j not in relabel:
                    continue
                key = (i, s, relabel[j])
                trans_counts[key] = trans_counts.get(key, 0.0) + sym[s]
                state_totals[i] += sym[s]
    transitions, std_errors = {}, {}
    for (i, s, j), c in trans_counts.items():
        p = c / state_totals[i]
        transitions[(i, s, j)] = p
        std_errors[(i, s, j)] = float(np.sqrt(p * (1 - p) / state_totals[i]))
    diag.std_errors = std_errors
    T = np.zeros((len(keep), len(keep)))
    for (i, _, j), p in transitions.items():
        T[i, j] += p
    try:
        stationary = stationary_from_matrix(T)
    except Exception:  # noqa: BLE001 - partial machines may be degenerate
        if strict:
            raise
        stationary = np.full(len(keep), 1.0 / max(1, len(keep)))
    states = tuple(state_label(r) for r in range(len(keep)))
    epsilon_map = {h: relabel[assign[h]] for h in histories if assign[h] in relabel}
    transient = tuple(h for h in histories if assign[h] not in relabel)
    return EpsilonMachine(alphabet, states, transitions, epsilon_map, (K, L), stationary, transient)


def transition_error(estimate: EpsilonMachine, truth: EpsilonMachine) -> float:
    """Stationary-weighted TV distance between estimated and true transition rows.

    Each estimated state is identified with the true state holding most of
    its member histories; rows are compared as distributions over
    (symbol, identified successor). Unidentifiable states count as 1.
    """
    ident = {}
    for i in range(len(estimate.states)):
        votes = {}
        for h, c in estimate.epsilon_map.items():
            if c == i and h in truth.epsilon_map:
                votes[truth.epsilon_map[h]] = votes.get(truth.epsilon_map[h], 0) + 1
        ident[i] = max(votes, key=votes.get) if votes else None
    err = 0.0
    for i, w in enumerate(estimate.stationary):
        ti = ident[i]
        if ti is None:
            err += w
            continue
        row_hat, row_true = {}, {}
        for (a, s, j), p in estimate.transitions.items():
            if a == i:
                key = (s, ident.get(j))
                row_hat[key] = row_hat.get(key, 0.0) + p
        for (a, s, j), p in truth.transitions.items():
            if a == ti:
                row_true[(s, j)] = row_true.get((s, j), 0.0) + p
        keys = set(row_hat) | set(row_true)
        err += w * 0.5 * sum(abs(row_hat.get(q, 0.0) - row_true.get(q, 0.0)) for q in keys)
    return float(err)

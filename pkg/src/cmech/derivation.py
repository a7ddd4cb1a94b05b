"""Exact truncated causal states of a known process.

Length-K histories are grouped by their length-L conditional future
distributions ("morphs"). The successor of a history ``h`` on symbol
``s`` is the class whose morph matches that of the extended history
``h + s``; histories whose extension matches no class sit outside the
recurrent structure. The machine keeps the single closed class of the
resulting transition graph.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import NonDeterministicAtHorizon
from .information import Distribution, entropy_of
from .machine import EpsilonMachine, state_label, statistical_complexity, total_variation
from .partition import Partition
from .process import (
    ProcessSpec,
    check_block,
    forward_vectors,
    future_matrix,
    stationary_from_matrix,
)

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
UNMATCHED = -1


class HistoryFutureTable(Mapping):
    """Map from positive-probability length-K history to its length-L morph.

    Besides the mapping interface the table keeps the arrays the other
    stages need: history probabilities, normalized generator beliefs and
    morphs, all aligned with ``histories`` (lexicographic order).
    """

    def __init__(self, spec, K, L, histories, probs, beliefs, futures):
        self.spec = spec
        self.K = K
        self.L = L
        self.histories = histories
        self.probs = probs
        self.beliefs = beliefs
        self.futures = futures
        self.index = {h: r for r, h in enumerate(histories)}
        self._words = None

    def __getitem__(self, h):
        if self._words is None:
            self._words = self.spec.alphabet.words(self.L)
        return Distribution(dict(zip(self._words, self.futures[self.index[h]].tolist())))

    def __iter__(self):
        return iter(self.histories)

    def __len__(self):
        return len(self.histories)

    def morph(self, h) -> np.ndarray:
        return self.futures[self.index[h]]


def history_future_table(spec: ProcessSpec, K: int, L: int) -> HistoryFutureTable:
    k = len(spec.alphabet)
    check_block(k, K)
    check_block(k, L)
    fwd = forward_vectors(spec, K)
    probs = fwd.sum(axis=1)
    keep = np.flatnonzero(probs > 0)
    words = spec.alphabet.words(K)
    histories = [words[r] for r in keep]
    beliefs = fwd[keep] / probs[keep, None]
    futures = future_matrix(spec, beliefs, L)
    return HistoryFutureTable(spec, K, L, histories, probs[keep], beliefs, futures)


def partition_by_future_equivalence(table, tol: float = DEFAULT_TOL) -> Partition:
    """First-fit grouping of histories whose morphs are within ``tol`` in TV.

    Histories are visited in lexicographic order and compared against each
    class's first member.
    """
    reps, classes = [], []
    for h in sorted(table):
        morph = _as_vector(table, h)
        for rep, members in zip(reps, classes):
            if total_variation(morph, rep) <= tol:
                members.append(h)
                break
        else:
            reps.append(morph)
            classes.append([h])
    return Partition(tuple(classes))


def _as_vector(table, h):
    if isinstance(table, HistoryFutureTable):
        return table.morph(h)
    d = table[h]
    return np.array([d[w] for w in sorted(d)])


def causal_partition(spec, K, L, tol=DEFAULT_TOL) -> Partition:
    return partition_by_future_equivalence(history_future_table(spec, K, L), tol)


@dataclass
class Extensions:
    """Successor classes of every (history, symbol) pair with positive mass."""

    successor: dict  # (h, s) -> class index or UNMATCHED
    mass: dict  # (h, s) -> P(h s)
    unmatched_morphs: list = field(default_factory=list)


def extension_successors(table: HistoryFutureTable, partition: Partition, tol=DEFAULT_TOL):
    spec = table.spec
    M = spec.labeled
    k = len(spec.alphabet)
    reps = np.array([table.morph(c[0]) for c in partition.classes])
    successor, mass = {}, {}
    unmatched = []
    for r, h in enumerate(table.histories):
        v = table.beliefs[r] @ M  # (k, n)
        p_sym = v.sum(axis=1)
        live = [s for s in range(k) if p_sym[s] > 0]
        if not live:
            continue
        morphs = future_matrix(spec, v[live] / p_sym[live, None], table.L)
        for s, morph in zip(live, morphs):
            shifted = h[1:] + (s,)
            dists = 0.5 * np.abs(reps - morph).sum(axis=1)
            target = UNMATCHED
            pref = partition.assignment.get(shifted)
            if pref is not None and dists[pref] <= tol:
                target = pref
            elif dists.min() <= tol:
                target = int(dists.argmin())
            else:
                unmatched.append(morph)
            successor[(h, s)] = target
            mass[(h, s)] = float(table.probs[r] * p_sym[s])
    return Extensions(successor, mass, unmatched)


def closed_classes(n: int, edges) -> list:
    """Closed strongly connected components of a graph on ``n`` nodes.

    ``edges`` holds ``(a, b)`` pairs; ``b == UNMATCHED`` counts as an exit.
    """
    adj = np.zeros((n + 1, n + 1), dtype=int)
    for a, b in edges:
        adj[a, n if b == UNMATCHED else b] = 1
    adj[n, n] = 1
    ncomp, labels = connected_components(adj, directed=True, connection="strong")
    out = []
    for c in range(ncomp):
        members = np.flatnonzero(labels == c)
        if n in members:
            continue
        inside = labels == c
        if not np.any(adj[members][:, ~inside]):
            out.append([int(x) for x in members])
    return out


def derive_epsilon_machine(spec: ProcessSpec, K: int, L: int, tol: float = DEFAULT_TOL):
    table = history_future_table(spec, K, L)
    part = partition_by_future_equivalence(table, tol)
    ext = extension_successors(table, part, tol)
    n = len(part)
    targets = {}
    for (h, s), j in ext.successor.items():
        targets.setdefault((part.assignment[h], s), set()).add(j)
    edges = [(i, j) for (i, _), js in targets.items() for j in js]
    closed = closed_classes(n, edges)
    if len(closed) != 1:
        raise NonDeterministicAtHorizon(
            f"K={K}, L={L}: {len(closed)} closed state sets; increase K"
        )
    keep = sorted(closed[0])
    for (i, s), js in targets.items():
        if i in keep and len(js) > 1:
            raise NonDeterministicAtHorizon(
                f"K={K}, L={L}: class {i} has successors {sorted(js)} on symbol "
                f"{spec.alphabet.symbols[s]!r}; increase K"
            )
    relabel = {c: r for r, c in enumerate(keep)}
    class_mass = np.zeros(n)
    for h, c in part.assignment.items():
        class_mass[c] += table.probs[table.index[h]]
    transitions = {}
    for (h, s), j in ext.successor.items():
        i = part.assignment[h]
        if i not in relabel:
            continue
        key = (relabel[i], s, relabel[j])
        transitions[key] = transitions.get(key, 0.0) + ext.mass[(h, s)] / class_mass[i]
    states = tuple(state_label(r) for r in range(len(keep)))
    T = np.zeros((len(keep), len(keep)))
    for (i, _, j), p in transitions.items():
        T[i, j] += p
    stationary = stationary_from_matrix(T)
    epsilon_map = {h: relabel[c] for h, c in part.assignment.items() if c in relabel}
    transient = tuple(h for h, c in sorted(part.assignment.items()) if c not in relabel)
    return EpsilonMachine(
        spec.alphabet, states, transitions, epsilon_map, (K, L), stationary, transient
    )


def captures_pattern(partition_or_machine, spec: ProcessSpec, L: int):
    """Whether H[Future^L | R] < L H[S]; returns ``(verdict, margin)``."""
    from .information import block_entropy
    from .machine import state_morphs
    from .oracle import prescience

    if isinstance(partition_or_machine, EpsilonMachine):
        m = partition_or_machine
        morphs = state_morphs(m, L)
        h = float(sum(pi * entropy_of(row) for pi, row in zip(m.stationary, morphs)))
    else:
        h = prescience(partition_or_machine, spec, L)
    margin = L * block_entropy(spec, 1) - h
    return margin > DEFAULT_TOL, margin


@dataclass
class ScanReport:
    K_max: int
    L_max: int
    entries: dict  # (K, L) -> (state count, C_mu) or None when derivation failed
    stable_from: tuple | None

    def lines(self):
        out = ["K  L  states  C_mu"]
        for (K, L), v in sorted(self.entries.items()):
            out.append(f"{K}  {L}  " + ("-  -" if v is None else f"{v[0]}  {v[1]:.6f}"))
        out.append(f"stable from: {self.stable_from}")
        return out


def stabilization_scan(spec, K_max, L_max, tol=DEFAULT_TOL) -> ScanReport:
    entries = {}
    for K in range(1, K_max + 1):
        for L in range(1, L_max + 1):
            try:
                m = derive_epsilon_machine(spec, K, L, tol)
            except NonDeterministicAtHorizon as exc:
                log.debug("scan K=%d L=%d: %s", K, L, exc)
                entries[(K, L)] = None
                continue
            entries[(K, L)] = (len(m.states), statistical_complexity(m))
    final = entries[(K_max, L_max)]

    def agrees(v):
        return v is not None and v[0] == final[0] and abs(v[1] - final[1]) <= 1e-9

    stable = None
    if final is not None:
        for K in range(1, K_max + 1):
            for L in range(1, L_max + 1):
                block = [
                    entries[(a, b)]
                    for a in range(K, K_max + 1)
                    for b in range(L, L_max + 1)
                ]
                if all(agrees(v) for v in block):
                    stable = (K, L)
                    break
            if stable:
                break
    return ScanReport(K_max, L_max, entries, stable)

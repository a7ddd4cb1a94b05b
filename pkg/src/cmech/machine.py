"""The epsilon-machine: causal states, labeled transitions, history map.

Transitions are stored as ``{(i, s, j): p}`` so that a hand-built,
non-deterministic table can still be represented and diagnosed by
:func:`check_determinism`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import InvalidSpec, NonDeterministicAtHorizon
from .information import entropy_of
from .process import Alphabet, ProcessSpec, stationary_from_matrix

STOCHASTIC_TOL = 1e-9


def state_label(idx: int) -> str:
    if idx < 26:
        return chr(ord("A") + idx)
    return f"S{idx}"


@dataclass(frozen=True, eq=False)
class EpsilonMachine:
    alphabet: Alphabet
    states: tuple
    transitions: dict
    epsilon_map: dict = field(default_factory=dict)
    horizon: tuple = (0, 0)
    stationary: np.ndarray = None
    transient_histories: tuple = ()

    def __post_init__(self):
        n, k = len(self.states), len(self.alphabet)
        for (i, s, j), p in self.transitions.items():
            if not (0 <= i < n and 0 <= j < n and 0 <= s < k):
                raise InvalidSpec(f"transition ({i}, {s}, {j}) out of range")
            if not (0.0 <= p <= 1.0 + STOCHASTIC_TOL):
                raise InvalidSpec(f"transition probability {p} outside [0, 1]")
        if self.stationary is None:
            pi = stationary_from_matrix(self.labeled.sum(axis=0))
        else:
            pi = np.asarray(self.stationary, float)
        object.__setattr__(self, "stationary", pi)

    @property
    def labeled(self) -> np.ndarray:
        n = len(self.states)
        M = np.zeros((len(self.alphabet), n, n))
        for (i, s, j), p in self.transitions.items():
            M[s, i, j] += p
        return M

    def successor(self, i: int, s: int):
        """Unique successor of state ``i`` on symbol ``s``, or None."""
        targets = [j for (a, b, j), p in self.transitions.items() if a == i and b == s and p > 0]
        if len(targets) > 1:
            raise NonDeterministicAtHorizon(f"state {self.states[i]} has several {s}-successors")
        return targets[0] if targets else None

    def symbol_probability(self, i: int, s: int) -> float:
        return sum(p for (a, b, _), p in self.transitions.items() if a == i and b == s)

    def summary(self) -> str:
        from .information import excess_entropy_estimate

        lines = [
            f"states: {len(self.states)}",
            f"C_mu: {statistical_complexity(self):.6f}",
            f"branching entropy H[S'|S]: {state_transition_entropy(self):.6f}",
        ]
        L = self.horizon[1] or 1
        try:
            lines.append(f"E({L}): {excess_entropy_estimate(as_process(self), L):.6f}")
        except Exception:  # noqa: BLE001 - summary must not fail on guard errors
            pass
        for (i, s, j), p in sorted(self.transitions.items()):
            lines.append(
                f"  {self.states[i]} --{self.alphabet.symbols[s]} : {p:.6f}--> {self.states[j]}"
            )
        return "\n".join(lines)


def check_determinism(m: EpsilonMachine):
    """List ``(state, symbol, successors)`` for every non-unifilar pair."""
    targets = {}
    for (i, s, j), p in m.transitions.items():
        if p > 0:
            targets.setdefault((i, s), set()).add(j)
    violations = []
    for (i, s), js in sorted(targets.items()):
        if len(js) > 1:
            violations.append(
                (m.states[i], m.alphabet.symbols[s], frozenset(m.states[j] for j in js))
            )
    return violations


def check_stochasticity(m: EpsilonMachine, tol: float = STOCHASTIC_TOL):
    """States whose outgoing probabilities do not sum to one."""
    rows = m.labeled.sum(axis=(0, 2))
    return [m.states[i] for i in np.flatnonzero(np.abs(rows - 1.0) > tol)]


def statistical_complexity(m: EpsilonMachine) -> float:
    return entropy_of(m.stationary)


def state_transition_entropy(m: EpsilonMachine) -> float:
    """H[S'|S] under the stationary distribution."""
    T = m.labeled.sum(axis=0)
    return float(sum(pi * entropy_of(row) for pi, row in zip(m.stationary, T)))


def as_process(m: EpsilonMachine) -> ProcessSpec:
    if check_determinism(m):
        raise NonDeterministicAtHorizon("only deterministic machines convert to a generator")
    edges = [
        (m.states[i], m.alphabet.symbols[s], p, m.states[j])
        for (i, s, j), p in sorted(m.transitions.items())
        if p > 0
    ]
    return ProcessSpec.from_edges(m.alphabet, m.states, edges, name="machine")


def state_morphs(m: EpsilonMachine, L: int) -> np.ndarray:
    """Row ``i``: distribution of the next ``L`` symbols from state ``i``."""
    M = m.labeled
    n = len(m.states)
    out = np.empty((n, len(m.alphabet) ** L))
    for i in range(n):
        v = np.zeros((1, n))
        v[0, i] = 1.0
        for _ in range(L):
            v = np.einsum("wn,snm->wsm", v, M).reshape(-1, n)
        out[i] = v.sum(axis=1)
    return out


def total_variation(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def check_distinct_morphs(m: EpsilonMachine, L: int | None = None, tol: float = 1e-9):
    """Pairs of states whose length-L futures cannot be told apart."""
    L = L or m.horizon[1] or 1
    morphs = state_morphs(m, L)
    return [
        (m.states[a], m.states[b])
        for a, b in combinations(range(len(m.states)), 2)
        if total_variation(morphs[a], morphs[b]) <= tol
    ]


def markov_violation(m: EpsilonMachine) -> float:
    """Largest |P(S2|S1,S0) - P(S2|S1)| over 3-step stationary state paths.

    The path distribution is built symbol by symbol from the labeled
    matrices, so the check exercises the full emission structure.
    """
    M = m.labeled
    pi = m.stationary
    n = len(m.states)
    paths = np.zeros((n, n, n))
    for s1 in range(M.shape[0]):
        for s2 in range(M.shape[0]):
            paths += pi[:, None, None] * M[s1][:, :, None] * M[s2][None, :, :]
    pair = paths.sum(axis=0)
    worst = 0.0
    for a in range(n):
        for b in range(n):
            mass = paths[a, b].sum()
            if mass <= 0:
                continue
            given_both = paths[a, b] / mass
            given_last = pair[b] / pair[b].sum()
            worst = max(worst, float(np.abs(given_both - given_last).max()))
    return worst


def isomorphism(m1: EpsilonMachine, m2: EpsilonMachine, tol: float = 1e-9):
    """State bijection preserving labeled transitions, or None."""
    if len(m1.states) != len(m2.states) or m1.alphabet != m2.alphabet:
        return None
    n, k = len(m1.states), len(m1.alphabet)

    def edges(m):
        out = {}
        for (i, s, j), p in m.transitions.items():
            if p > tol:
                out[(i, s)] = (p, j)
        return out

    e1, e2 = edges(m1), edges(m2)
    if check_determinism(m1) or check_determinism(m2):
        return None
    def grow(mapping, a0, b0):
        mapping = dict(mapping)
        mapping[a0] = b0
        queue = [a0]
        while queue:
            a = queue.pop()
            b = mapping[a]
            for s in range(k):
                t1, t2 = e1.get((a, s)), e2.get((b, s))
                if (t1 is None) != (t2 is None):
                    return None
                if t1 is None:
                    continue
                if abs(t1[0] - t2[0]) > tol:
                    return None
                j1, j2 = t1[1], t2[1]
                if j1 in mapping:
                    if mapping[j1] != j2:
                        return None
                elif j2 in mapping.values():
                    return None
                else:
                    mapping[j1] = j2
                    queue.append(j1)
        return mapping

    def search(mapping):
        free = [a for a in range(n) if a not in mapping]
        if not free:
            return mapping
        used = set(mapping.values())
        for b in range(n):
            if b in used:
                continue
            grown = grow(mapping, free[0], b)
            found = grown and search(grown)
            if found:
                return found
        return None

    found = search({})
    if found is None:
        return None
    return {m1.states[a]: m2.states[b] for a, b in sorted(found.items())}


def to_dict(m: EpsilonMachine) -> dict:
    a = m.alphabet
    return {
        "alphabet": list(a.symbols),
        "states": list(m.states),
        "transitions": [
            {"from": m.states[i], "symbol": a.symbols[s], "prob": p, "to": m.states[j]}
            for (i, s, j), p in sorted(m.transitions.items())
        ],
        "stationary": {lab: float(p) for lab, p in zip(m.states, m.stationary)},
        "horizon": {"K": m.horizon[0], "L": m.horizon[1]},
        "epsilon_map": {a.decode(h): m.states[i] for h, i in sorted(m.epsilon_map.items())},
        "transient_histories": [a.decode(h) for h in m.transient_histories],
    }


def from_dict(doc: dict) -> EpsilonMachine:
    alphabet = Alphabet(tuple(doc["alphabet"]))
    states = tuple(doc["states"])
    index = {s: i for i, s in enumerate(states)}
    transitions = {}
    for t in doc["transitions"]:
        key = (index[t["from"]], alphabet.index(t["symbol"]), index[t["to"]])
        transitions[key] = float(t["prob"])
    stationary = np.array([float(doc["stationary"][s]) for s in states])
    horizon = (int(doc["horizon"]["K"]), int(doc["horizon"]["L"]))
    emap = {alphabet.encode(h): index[s] for h, s in doc.get("epsilon_map", {}).items()}
    transient = tuple(alphabet.encode(h) for h in doc.get("transient_histories", []))
    return EpsilonMachine(alphabet, states, transitions, emap, horizon, stationary, transient)


def dumps(m: EpsilonMachine) -> str:
    return json.dumps(to_dict(m), indent=2) + "\n"


def loads(text: str) -> EpsilonMachine:
    return from_dict(json.loads(text))


def to_dot(m: EpsilonMachine) -> str:
    """Graphviz source: nodes carry pi_i, edges are labeled ``s : p``."""
    lines = ["digraph epsilon_machine {", "  rankdir=LR;"]
    for label, p in zip(m.states, m.stationary):
        lines.append(f'  "{label}" [label="{label}\\npi={p:.6f}"];')
    for (i, s, j), p in sorted(m.transitions.items()):
        if p > 0:
            sym = m.alphabet.symbols[s]
            lines.append(f'  "{m.states[i]}" -> "{m.states[j]}" [label="{sym} : {p:.6f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"

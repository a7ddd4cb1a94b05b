"""Finite-state unifilar sources of stationary symbolic processes.

A :class:`ProcessSpec` is the exact ground truth used throughout the
package. Words are tuples of symbol indices; the empty tuple is the null
word. Word distributions over ``A^L`` are held as flat arrays in
lexicographic order (first symbol most significant), which is the order
``itertools.product(range(k), repeat=L)`` produces.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import (
    AlphabetMismatch,
    BlockTooLarge,
    InvalidSpec,
    MultipleRecurrentClasses,
    ZeroProbabilityHistory,
)

DEFAULT_BLOCK_GUARD = 2**20

Word = tuple


def block_guard() -> int:
    """Largest number of words a block enumeration may touch."""
    value = os.environ.get("EM_BLOCK_GUARD")
    return int(value) if value else DEFAULT_BLOCK_GUARD


def check_block(k: int, L: int) -> None:
    if k**L > block_guard():
        raise BlockTooLarge(f"|A|^L = {k}^{L} exceeds the block guard {block_guard()}")


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]

    def __post_init__(self):
        symbols = tuple(str(s) for s in self.symbols)
        if not symbols:
            raise InvalidSpec("alphabet is empty")
        if len(set(symbols)) != len(symbols):
            raise InvalidSpec(f"duplicate symbols in alphabet {symbols}")
        if any(not s or any(c.isspace() for c in s) for s in symbols):
            raise InvalidSpec("symbols must be nonempty and contain no whitespace")
        object.__setattr__(self, "symbols", symbols)

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def index(self, token: str) -> int:
        try:
            return self.symbols.index(token)
        except ValueError:
            raise AlphabetMismatch(f"symbol {token!r} not in alphabet {self.symbols}") from None

    @property
    def single_char(self) -> bool:
        return all(len(s) == 1 for s in self.symbols)

    def encode(self, text: str | Iterable[str]) -> Word:
        """Turn a string (or token sequence) into a word of indices."""
        if isinstance(text, str):
            tokens = text.split() if (" " in text or not self.single_char) else list(text)
        else:
            tokens = list(text)
        return tuple(self.index(t) for t in tokens)

    def decode(self, word: Sequence[int]) -> str:
        sep = "" if self.single_char else " "
        return sep.join(self.symbols[i] for i in word)

    def words(self, L: int) -> list[Word]:
        return list(itertools.product(range(len(self)), repeat=L))


def word_index(word: Sequence[int], k: int) -> int:
    idx = 0
    for s in word:
        idx = idx * k + s
    return idx


@dataclass(frozen=True, eq=False)
class ProcessSpec:
    """Unifilar finite-state generator.

    ``emit`` maps ``(state, symbol)`` index pairs to ``(probability,
    successor)``; pairs that never occur are simply absent.
    """

    alphabet: Alphabet
    states: tuple[str, ...]
    emit: dict
    name: str = ""
    stationary: np.ndarray = field(init=False, repr=False)
    labeled: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n, k = len(self.states), len(self.alphabet)
        if n == 0:
            raise InvalidSpec("process has no states")
        if len(set(self.states)) != n:
            raise InvalidSpec("duplicate state labels")
        M = np.zeros((k, n, n))
        for (i, s), (p, j) in self.emit.items():
            if not (0 <= i < n and 0 <= j < n and 0 <= s < k):
                raise InvalidSpec(f"edge ({i}, {s}) -> {j} out of range")
            if not (0.0 <= p <= 1.0):
                raise InvalidSpec(f"probability {p} outside [0, 1]")
            M[s, i, j] = p
        rows = M.sum(axis=(0, 2))
        bad = np.flatnonzero(np.abs(rows - 1.0) > 1e-12)
        if bad.size:
            raise InvalidSpec(
                f"outgoing probabilities of state {self.states[bad[0]]!r} sum to {rows[bad[0]]!r}"
            )
        M.setflags(write=False)
        object.__setattr__(self, "labeled", M)
        pi = stationary_distribution(self)
        pi.setflags(write=False)
        object.__setattr__(self, "stationary", pi)

    @classmethod
    def from_edges(cls, symbols, states, edges, name=""):
        """Build from ``(state, symbol, probability, successor)`` label tuples."""
        alphabet = symbols if isinstance(symbols, Alphabet) else Alphabet(tuple(symbols))
        states = tuple(str(s) for s in states)
        emit = {}
        for state, symbol, p, succ in edges:
            try:
                i, j = states.index(str(state)), states.index(str(succ))
            except ValueError:
                raise InvalidSpec(f"unknown state in edge {state} {symbol} {p} {succ}") from None
            s = alphabet.index(str(symbol))
            if (i, s) in emit:
                raise InvalidSpec(f"state {state!r} has two successors on {symbol!r}")
            if float(p) > 0:
                emit[(i, s)] = (float(p), j)
        return cls(alphabet, states, emit, name=name)

    @property
    def transition_matrix(self) -> np.ndarray:
        return self.labeled.sum(axis=0)

    def edges(self):
        for (i, s), (p, j) in sorted(self.emit.items()):
            yield self.states[i], self.alphabet.symbols[s], p, self.states[j]

    def to_text(self) -> str:
        lines = [
            "alphabet: " + " ".join(self.alphabet),
            "states: " + " ".join(self.states),
        ]
        lines += [f"{i} {s} {p!r} {j}" for i, s, p, j in self.edges()]
        return "\n".join(lines) + "\n"


def stationary_distribution(spec: ProcessSpec) -> np.ndarray:
    """Unique stationary state distribution of the generator."""
    return stationary_from_matrix(spec.labeled.sum(axis=0))


def stationary_from_matrix(T) -> np.ndarray:
    """Solve pi = pi T on the single closed communicating class of ``T``.

    Transient states receive zero mass.
    """
    T = np.asarray(T, float)
    n = T.shape[0]
    adjacency = (T > 0).astype(int)
    ncomp, labels = connected_components(adjacency, directed=True, connection="strong")
    closed = []
    for c in range(ncomp):
        members = labels == c
        if not np.any(adjacency[members][:, ~members]):
            closed.append(members)
    if len(closed) != 1:
        raise MultipleRecurrentClasses(
            f"{len(closed)} recurrent classes; stationary distribution is not unique"
        )
    members = np.flatnonzero(closed[0])
    sub = T[np.ix_(members, members)]
    m = len(members)
    A = np.vstack([sub.T - np.eye(m), np.ones(m)])
    b = np.zeros(m + 1)
    b[-1] = 1.0
    x = np.linalg.lstsq(A, b, rcond=None)[0]
    pi = np.zeros(n)
    pi[members] = np.clip(x, 0.0, None)
    return pi / pi.sum()


def _check_word(spec, word):
    k = len(spec.alphabet)
    if any(not (0 <= s < k) for s in word):
        raise AlphabetMismatch(f"word {word} uses indices outside alphabet of size {k}")


def word_probability(spec: ProcessSpec, word: Sequence[int]) -> float:
    _check_word(spec, word)
    v = spec.stationary
    for s in word:
        v = v @ spec.labeled[s]
    return float(min(1.0, v.sum()))


def forward_vectors(spec: ProcessSpec, L: int, start=None) -> np.ndarray:
    """Unnormalized state vectors after every length-``L`` word.

    Row ``w`` (lexicographic word index) holds ``start @ M[w0] @ ... @ M[wL-1]``;
    row sums are the word probabilities.
    """
    n = len(spec.states)
    M = spec.labeled
    v = (spec.stationary if start is None else np.asarray(start, float))[None, :]
    for _ in range(L):
        v = np.einsum("wn,snm->wsm", v, M).reshape(-1, n)
    return v


def block_distribution(spec: ProcessSpec, L: int) -> np.ndarray:
    """Exact probabilities of all length-``L`` words, lexicographic order."""
    check_block(len(spec.alphabet), L)
    return forward_vectors(spec, L).sum(axis=1)


def belief_after(spec: ProcessSpec, history: Sequence[int]) -> np.ndarray:
    """Generator-state distribution conditioned on ``history``."""
    _check_word(spec, history)
    v = spec.stationary
    for s in history:
        v = v @ spec.labeled[s]
    total = v.sum()
    if total <= 0:
        raise ZeroProbabilityHistory(
            f"history {spec.alphabet.decode(history)!r} has probability zero"
        )
    return v / total


def future_vector(spec: ProcessSpec, belief: np.ndarray, L: int) -> np.ndarray:
    return forward_vectors(spec, L, start=belief).sum(axis=1)


def conditional_future_distribution(spec: ProcessSpec, history, L: int):
    """P(next L symbols | the past ends with ``history``) as a Distribution."""
    from .information import Distribution

    if isinstance(history, str):
        history = spec.alphabet.encode(history)
    check_block(len(spec.alphabet), L)
    probs = future_vector(spec, belief_after(spec, tuple(history)), L)
    return Distribution(dict(zip(spec.alphabet.words(L), probs.tolist())))


def sample(spec: ProcessSpec, n: int, seed: int) -> Word:
    """Draw ``n`` symbols starting from a stationary-distributed state."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    k = len(spec.alphabet)
    nstates = len(spec.states)
    cum = np.zeros((nstates, k))
    succ = np.zeros((nstates, k), dtype=int)
    for (i, s), (p, j) in spec.emit.items():
        cum[i, s] = p
        succ[i, s] = j
    cum = np.cumsum(cum, axis=1)
    cum[:, -1] = np.inf
    state = rng.choice(nstates, p=spec.stationary)
    u = rng.random(n)
    out = np.empty(n, dtype=np.int64)
    cum_rows = cum.tolist()
    succ_rows = succ.tolist()
    for t in range(n):
        row = cum_rows[state]
        s = 0
        while u[t] >= row[s]:
            s += 1
        out[t] = s
        state = succ_rows[state][s]
    return tuple(out.tolist())


PRESETS = {
    "fair-coin": (["0", "1"], ["A"], [("A", "0", 0.5, "A"), ("A", "1", 0.5, "A")]),
    "period2": (["0", "1"], ["A", "B"], [("A", "0", 1.0, "B"), ("B", "1", 1.0, "A")]),
    "golden-mean": (
        ["0", "1"],
        ["A", "B"],
        [("A", "0", 0.5, "A"), ("A", "1", 0.5, "B"), ("B", "0", 1.0, "A")],
    ),
    "even-process": (
        ["0", "1"],
        ["A", "B"],
        [("A", "0", 0.5, "A"), ("A", "1", 0.5, "B"), ("B", "1", 1.0, "A")],
    ),
}


def preset(name: str) -> ProcessSpec:
    try:
        symbols, states, edges = PRESETS[name]
    except KeyError:
        raise InvalidSpec(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return ProcessSpec.from_edges(symbols, states, edges, name=name)


def parse_spec(text: str, name: str = "") -> ProcessSpec:
    """Parse the declarative spec format.

    ::

        # golden mean
        alphabet: 0 1
        states: A B
        A 0 0.5 A
        A 1 0.5 B
        B 0 1.0 A
    """
    symbols = states = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        if sep and key.strip() in ("alphabet", "states"):
            if key.strip() == "alphabet":
                symbols = rest.split()
            else:
                states = rest.split()
            continue
        parts = line.split()
        if len(parts) != 4:
            raise InvalidSpec(f"line {lineno}: expected 'state symbol probability successor'")
        try:
            p = float(parts[2])
        except ValueError:
            raise InvalidSpec(f"line {lineno}: bad probability {parts[2]!r}") from None
        edges.append((parts[0], parts[1], p, parts[3]))
    if symbols is None or states is None:
        raise InvalidSpec("spec must declare 'alphabet:' and 'states:'")
    return ProcessSpec.from_edges(symbols, states, edges, name=name)


def load_process(ref: str) -> ProcessSpec:
    """Resolve a preset name or a path to a spec file."""
    if ref in PRESETS:
        return preset(ref)
    path = Path(ref)
    if not path.exists():
        raise InvalidSpec(f"{ref!r} is neither a preset nor an existing file")
    return parse_spec(path.read_text(), name=path.stem)


def future_matrix(spec: ProcessSpec, beliefs: np.ndarray, L: int) -> np.ndarray:
    """Row ``r``: distribution of the next ``L`` words from ``beliefs[r]``."""
    M = spec.labeled
    v = np.asarray(beliefs, float)[:, None, :]
    for _ in range(L):
        v = np.einsum("rwn,snm->rwsm", v, M).reshape(v.shape[0], -1, M.shape[1])
    return v.sum(axis=2)

"""Hypothesis strategies shared across test modules."""

from hypothesis import assume
from hypothesis import strategies as st

from cmech.errors import MultipleRecurrentClasses
from cmech.process import ProcessSpec


@st.composite
def unifilar_specs(draw, max_states=3, max_symbols=3):
    k = draw(st.integers(2, max_symbols))
    n = draw(st.integers(1, max_states))
    symbols = [str(s) for s in range(k)]
    states = [f"q{i}" for i in range(n)]
    edges = []
    for i in range(n):
        used = draw(st.lists(st.integers(0, k - 1), min_size=1, max_size=k, unique=True))
        weights = [draw(st.integers(1, 9)) for _ in used]
        total = sum(weights)
        for s, w in zip(used, weights):
            succ = draw(st.integers(0, n - 1))
            edges.append((states[i], symbols[s], w / total, states[succ]))
    try:
        return ProcessSpec.from_edges(symbols, states, edges, name="random")
    except MultipleRecurrentClasses:
        assume(False)


def words(k, max_len=5):
    return st.lists(st.integers(0, k - 1), max_size=max_len).map(tuple)

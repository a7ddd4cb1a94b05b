"""Entropies, conditional entropies and mutual information, in bits.

Convention: ``0 log 0 = 0``. Exact process measures enumerate word
blocks, so they are guarded by :func:`cmech.process.check_block`.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .process import ProcessSpec, block_distribution, check_block

MI_CLAMP = 1e-9


class Distribution(Mapping):
    """Immutable map from outcome to probability."""

    def __init__(self, weights, tol=1e-9):
        weights = dict(weights)
        if any(p < 0 for p in weights.values()):
            raise ValueError("negative probability")
        total = sum(weights.values())
        if abs(total - 1.0) > tol:
            raise ValueError(f"probabilities sum to {total}, not 1")
        self._weights = weights

    def __getitem__(self, key):
        return self._weights[key]

    def __iter__(self):
        return iter(self._weights)

    def __len__(self):
        return len(self._weights)

    def __repr__(self):
        return f"Distribution({self._weights!r})"

    def support(self):
        return {k: p for k, p in self._weights.items() if p > 0}


class JointTable(Distribution):
    """Distribution whose outcomes are ``(x, y)`` pairs."""

    def marginal_x(self) -> Distribution:
        out = {}
        for (x, _), p in self.items():
            out[x] = out.get(x, 0.0) + p
        return Distribution(out)

    def marginal_y(self) -> Distribution:
        out = {}
        for (_, y), p in self.items():
            out[y] = out.get(y, 0.0) + p
        return Distribution(out)

    @classmethod
    def from_array(cls, table):
        table = np.asarray(table, float)
        return cls({(i, j): float(table[i, j]) for i, j in np.ndindex(*table.shape)})


def entropy_of(p) -> float:
    """Entropy of a probability array (any shape)."""
    p = np.asarray(p, float).ravel()
    p = p[p > 0]
    if p.size == 0:
        return 0.0
    return float(max(0.0, -np.sum(p * np.log2(p))))


def _values(d):
    if isinstance(d, Mapping):
        return np.fromiter(d.values(), float, count=len(d))
    return np.asarray(d, float)


def entropy(d) -> float:
    return entropy_of(_values(d))


def conditional_entropy(j: JointTable) -> float:
    """H[X|Y] for a table keyed by ``(x, y)``."""
    if not isinstance(j, JointTable):
        j = JointTable(j)
    h = entropy(j) - entropy(j.marginal_y())
    return max(0.0, h)


def mutual_information(j: JointTable) -> float:
    if not isinstance(j, JointTable):
        j = JointTable(j)
    mi = entropy(j.marginal_x()) + entropy(j.marginal_y()) - entropy(j)
    if -MI_CLAMP <= mi < 0:
        return 0.0
    return mi


def conditional_entropy_array(joint) -> float:
    """H[row | column] for a 2-D joint probability array."""
    joint = np.asarray(joint, float)
    return max(0.0, entropy_of(joint) - entropy_of(joint.sum(axis=0)))


def mutual_information_array(joint) -> float:
    joint = np.asarray(joint, float)
    mi = entropy_of(joint.sum(axis=1)) + entropy_of(joint.sum(axis=0)) - entropy_of(joint)
    return 0.0 if -MI_CLAMP <= mi < 0 else mi


def block_entropy(spec: ProcessSpec, L: int) -> float:
    """H[Future^L] of the exact process."""
    if L < 0:
        raise ValueError("L must be nonnegative")
    if L == 0:
        return 0.0
    return entropy_of(block_distribution(spec, L))


def excess_entropy_estimate(spec: ProcessSpec, L: int) -> float:
    """I[Past^L; Future^L] from the exact length-2L block distribution."""
    if L < 1:
        raise ValueError("L must be positive")
    k = len(spec.alphabet)
    check_block(k, 2 * L)
    joint = block_distribution(spec, 2 * L).reshape(k**L, k**L)
    return mutual_information_array(joint)


@dataclass
class EntropyReport:
    """Block entropies, their increments and the E(L) series."""

    L_max: int
    block: list
    increments: list
    excess: list

    @property
    def excess_deltas(self):
        return [b - a for a, b in zip(self.excess, self.excess[1:])]

    def lines(self):
        out = ["L  H(L)  h(L)=H(L)-H(L-1)  E(L)  dE"]
        deltas = [float("nan")] + self.excess_deltas
        for L in range(1, self.L_max + 1):
            e = self.excess[L - 1]
            e_txt = "nan" if e is None else f"{e:.6f}"
            d = deltas[L - 1]
            d_txt = "-" if d != d else f"{round(d, 6) + 0.0:.6f}"
            out.append(
                f"{L}  {self.block[L]:.6f}  {self.increments[L - 1]:.6f}  {e_txt}  {d_txt}"
            )
        return out


def entropy_report(spec: ProcessSpec, L_max: int) -> EntropyReport:
    block = [block_entropy(spec, L) for L in range(L_max + 1)]
    excess = [excess_entropy_estimate(spec, L) for L in range(1, L_max + 1)]
    return _report(L_max, block, excess)


def _report(L_max, block, excess):
    increments = [b - a for a, b in zip(block, block[1:])]
    return EntropyReport(L_max, block, increments, excess)


def empirical_block_counts(data, k: int, L: int) -> np.ndarray:
    """Counts of every length-``L`` word in ``data`` (sliding, stride 1)."""
    check_block(k, L)
    x = np.asarray(data, dtype=np.int64)
    n = x.size - L + 1
    if n <= 0:
        return np.zeros(k**L)
    codes = np.zeros(n, dtype=np.int64)
    for i in range(L):
        codes = codes * k + x[i : i + n]
    return np.bincount(codes, minlength=k**L).astype(float)


def empirical_entropy_report(data, k: int, L_max: int) -> EntropyReport:
    """Plug-in estimates of H(L) and E(L) from a single sequence."""
    block = [0.0]
    for L in range(1, L_max + 1):
        c = empirical_block_counts(data, k, L)
        block.append(entropy_of(c / c.sum()) if c.sum() else 0.0)
    excess = []
    for L in range(1, L_max + 1):
        c = empirical_block_counts(data, k, 2 * L)
        if c.sum() == 0:
            excess.append(None)
            continue
        excess.append(mutual_information_array((c / c.sum()).reshape(k**L, k**L)))
    return _report(L_max, block, excess)

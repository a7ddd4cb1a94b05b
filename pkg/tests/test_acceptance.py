"""Acceptance criteria 1-7, each checked at its stated tolerance and time budget.

Run under pytest (one summary line per criterion is printed at the end of
the session) or directly: ``python3 tests/test_acceptance.py``.
"""

import time

import numpy as np
import pytest
import reference as ref

from cmech.derivation import causal_partition, derive_epsilon_machine, history_future_table
from cmech.errors import NonDeterministicAtHorizon
from cmech.information import entropy_of, excess_entropy_estimate
from cmech.machine import (
    as_process,
    check_determinism,
    check_distinct_morphs,
    check_stochasticity,
    isomorphism,
    markov_violation,
    state_morphs,
    state_transition_entropy,
    statistical_complexity,
)
from cmech.oracle import prescience, suffix_partition, verify_all
from cmech.process import PRESETS, preset, sample
from cmech.reconstruction import reconstruct, transition_error

CRITERIA = {}
RESULTS = {}


def criterion(num, title, budget):
    def wrap(fn):
        CRITERIA[num] = (title, budget, fn)
        return fn

    return wrap


def evaluate(num):
    title, budget, fn = CRITERIA[num]
    start = time.perf_counter()
    try:
        fn()
        ok, why = True, ""
    except AssertionError as exc:
        ok, why = False, str(exc).splitlines()[0] if str(exc) else "assertion failed"
    elapsed = time.perf_counter() - start
    if ok and elapsed >= budget:
        ok, why = False, f"over time budget {budget:g} s"
    line = f"criterion {num} {'PASS' if ok else 'FAIL'} ({elapsed:.2f} s / {budget:g} s) {title}"
    if why:
        line += f": {why}"
    RESULTS[num] = (ok, line)
    return ok, line


def _future_given_state(m, L):
    morphs = state_morphs(m, L)
    return float(sum(pi * entropy_of(row) for pi, row in zip(m.stationary, morphs)))


def _state_given_future(m, L):
    joint = m.stationary[:, None] * state_morphs(m, L)
    return entropy_of(joint) - entropy_of(joint.sum(axis=0))


@criterion(1, "fair coin: 1 state, C_mu = 0, E(L) = 0 for L <= 4", 1.0)
def fair_coin():
    spec = preset("fair-coin")
    m = derive_epsilon_machine(spec, 2, 2)
    assert len(m.states) == 1, f"{len(m.states)} states"
    assert abs(statistical_complexity(m)) <= 1e-9
    for L in range(1, 5):
        assert abs(excess_entropy_estimate(spec, L)) <= 1e-9, f"E({L}) nonzero"


@criterion(2, "period-2: 2 states, C_mu = 1, H[F|S] = 0, E(1) = 1, H[S|F] = 0", 1.0)
def period2():
    spec = preset("period2")
    m = derive_epsilon_machine(spec, 2, 2)
    assert len(m.states) == 2, f"{len(m.states)} states"
    assert abs(statistical_complexity(m) - 1.0) <= 1e-9
    assert abs(excess_entropy_estimate(spec, 1) - 1.0) <= 1e-9
    for L in range(1, 5):
        assert abs(_future_given_state(m, L)) <= 1e-9, f"H[Future^{L}|S] nonzero"
        assert abs(_state_given_future(m, L)) <= 1e-9, f"H[S|Future^{L}] nonzero"


@criterion(3, "golden mean K=L=3: C_mu, E(1), H[S'|S]", 1.0)
def golden_mean():
    spec = preset("golden-mean")
    m = derive_epsilon_machine(spec, 3, 3)
    assert len(m.states) == 2, f"{len(m.states)} states"
    cmu = ref.entropy([2 / 3, 1 / 3])
    e1 = ref.entropy([1 / 3, 2 / 3]) - 2 / 3
    assert abs(statistical_complexity(m) - cmu) <= 1e-6
    assert abs(cmu - 0.918296) <= 1e-6
    assert abs(excess_entropy_estimate(spec, 1) - e1) <= 1e-6
    assert abs(e1 - 0.251629) <= 1e-6
    assert abs(state_transition_entropy(m) - 2 / 3) <= 1e-9


@criterion(4, "even process: 2 recurrent states for K = 5..8; order-1 rival worse by >= 0.05", 5.0)
def even_process():
    spec = preset("even-process")
    for K in range(5, 9):
        for L in (1, 2, 3, 4):
            m = derive_epsilon_machine(spec, K, L)
            assert len(m.states) == 2, f"K={K} L={L}: {len(m.states)} states"
    hs = history_future_table(spec, 5, 2).histories
    gap = prescience(suffix_partition(hs, 1), spec, 2) - prescience(causal_partition(spec, 5, 2), spec, 2)
    assert gap >= 0.05, f"gap {gap:.6f}"


@criterion(5, "oracle: all six checks for every preset at K, L <= 3", 60.0)
def oracle():
    for name in sorted(PRESETS):
        for K in (1, 2, 3):
            for L in (1, 2, 3):
                rep = verify_all(preset(name), K, L)
                assert rep.all_hold, f"{name} K={K} L={L} failed"
                assert rep.n_partitions == ref.bell(rep.n_histories)
    assert verify_all(preset("golden-mean"), 2, 2).n_partitions == 5
    assert verify_all(preset("fair-coin"), 3, 1).n_partitions == 4140


@criterion(6, "reconstruction: golden mean N=1e5 fixed seed, consistency over 20 seeds", 30.0)
def consistency():
    spec = preset("golden-mean")
    m, _ = reconstruct(sample(spec, 100_000, 7), 3, 3, 0.05)
    truth = derive_epsilon_machine(spec, 3, 3)
    mapping = isomorphism(m, truth, tol=0.02)
    assert mapping is not None, f"{len(m.states)} states, not within 0.02 of truth"
    assert abs(statistical_complexity(m) - 0.918296) <= 0.05
    medians = {}
    for N in (1_000, 100_000):
        errs = [
            transition_error(reconstruct(sample(spec, N, seed), 3, 3, 0.05)[0], truth)
            for seed in range(20)
        ]
        medians[N] = float(np.median(errs))
    assert medians[100_000] < medians[1_000], f"medians {medians}"


def _structurally_sound(m, L):
    return (
        not check_determinism(m)
        and not check_stochasticity(m)
        and not check_distinct_morphs(m, L)
        and markov_violation(m) <= 1e-9
    )


@criterion(7, "structural invariants of every emitted machine; derive/as_process round trip", 60.0)
def structure():
    emitted = 0
    for name in sorted(PRESETS):
        spec = preset(name)
        for K in range(1, 7):
            for L in range(1, 5):
                try:
                    m = derive_epsilon_machine(spec, K, L)
                except NonDeterministicAtHorizon:
                    continue
                emitted += 1
                assert _structurally_sound(m, L), f"derive {name} K={K} L={L}"
                again = derive_epsilon_machine(as_process(m), K, L)
                assert isomorphism(m, again) is not None, f"round trip {name} K={K} L={L}"
        for seed in range(5):
            for N, K in [(1_000, 2), (10_000, 3), (100_000, 5)]:
                m, _ = reconstruct(sample(spec, N, seed), K, 3, alphabet=spec.alphabet)
                emitted += 1
                assert _structurally_sound(m, 3), f"reconstruct {name} N={N} seed={seed}"
    assert emitted > 100


@pytest.mark.parametrize("num", sorted(CRITERIA))
def test_criterion(num):
    ok, line = evaluate(num)
    print(line)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(n) for n in sorted(CRITERIA)]
    for _, line in results:
        print(line)
    raise SystemExit(0 if all(ok for ok, _ in results) else 1)

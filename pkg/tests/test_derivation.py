import pytest
import reference as ref
from hypothesis import assume, given
from strategies import unifilar_specs

from cmech.derivation import (
    captures_pattern,
    causal_partition,
    derive_epsilon_machine,
    history_future_table,
    partition_by_future_equivalence,
    stabilization_scan,
)
from cmech.errors import BlockTooLarge, NonDeterministicAtHorizon
from cmech.machine import (
    as_process,
    check_determinism,
    check_distinct_morphs,
    check_stochasticity,
    isomorphism,
    state_morphs,
    state_transition_entropy,
    statistical_complexity,
    total_variation,
)
from cmech.oracle import prescience, suffix_partition
from cmech.process import PRESETS, preset


def words(spec, *texts):
    return [spec.alphabet.encode(t) for t in texts]


def test_table_examples():
    fair = history_future_table(preset("fair-coin"), 2, 1)
    assert len(fair) == 4
    assert all(fair[h][(0,)] == pytest.approx(0.5) for h in fair)

    gm = preset("golden-mean")
    t = history_future_table(gm, 2, 1)
    assert sorted(t) == words(gm, "00", "01", "10")
    assert t[(0, 1)][(0,)] == pytest.approx(1.0)
    assert t[(1, 0)][(1,)] == pytest.approx(0.5)
    assert (1, 1) not in t

    p2 = history_future_table(preset("period2"), 1, 1)
    assert p2[(0,)][(1,)] == pytest.approx(1.0)
    assert p2[(1,)][(0,)] == pytest.approx(1.0)


def test_table_guard(monkeypatch):
    monkeypatch.setenv("EM_BLOCK_GUARD", "8")
    with pytest.raises(BlockTooLarge):
        history_future_table(preset("fair-coin"), 4, 1)


def test_partition_examples():
    assert len(partition_by_future_equivalence(history_future_table(preset("fair-coin"), 3, 2))) == 1
    gm = preset("golden-mean")
    p = partition_by_future_equivalence(history_future_table(gm, 3, 3), 1e-9)
    assert [sorted(gm.alphabet.decode(h)[-1] for h in c) for c in p.classes] == [
        ["0"] * 3,
        ["1"] * 2,
    ]
    assert len(partition_by_future_equivalence(history_future_table(gm, 3, 3), 1.0)) == 1


@pytest.mark.parametrize("name", sorted(PRESETS))
@pytest.mark.parametrize("K,L", [(1, 1), (2, 2), (3, 3), (4, 2)])
def test_partition_matches_exact_rational_grouping(name, K, L):
    got = causal_partition(preset(name), K, L)
    assert [list(c) for c in got.classes] == ref.causal_classes(name, K, L)


def test_derive_examples():
    fair = derive_epsilon_machine(preset("fair-coin"), 2, 2)
    assert len(fair.states) == 1 and statistical_complexity(fair) == 0.0

    p2 = derive_epsilon_machine(preset("period2"), 1, 1)
    assert len(p2.states) == 2
    assert statistical_complexity(p2) == pytest.approx(1.0, abs=1e-12)
    assert state_transition_entropy(p2) == 0.0

    gm_spec = preset("golden-mean")
    gm = derive_epsilon_machine(gm_spec, 3, 3)
    assert {k: pytest.approx(v) for k, v in gm.transitions.items()} == {
        (0, 0, 0): 0.5,
        (0, 1, 1): 0.5,
        (1, 0, 0): 1.0,
    }
    assert isomorphism(gm, derive_epsilon_machine(gm_spec, 1, 1)) is not None


def test_even_process_needs_longer_window():
    with pytest.raises(NonDeterministicAtHorizon):
        derive_epsilon_machine(preset("even-process"), 1, 2)
    m = derive_epsilon_machine(preset("even-process"), 3, 3)
    assert len(m.states) == 2
    # the all-ones history does not synchronize and stays outside the machine
    assert m.transient_histories == ((1, 1, 1),)


@pytest.mark.parametrize("name", sorted(PRESETS))
@pytest.mark.parametrize("K", [2, 3, 4, 6])
@pytest.mark.parametrize("L", [1, 3, 6])
def test_prescience_at_horizon(name, K, L):
    spec = preset(name)
    m = derive_epsilon_machine(spec, K, L)
    table = history_future_table(spec, K, L)
    discrete = suffix_partition(table.histories, K)
    states = causal_partition(spec, K, L)
    assert prescience(states, spec, L) == pytest.approx(prescience(discrete, spec, L), abs=1e-9)
    assert check_determinism(m) == []
    assert check_stochasticity(m) == []
    assert check_distinct_morphs(m, L) == []


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_member_histories_share_state_morph(name):
    spec = preset(name)
    K, L = 4, 3
    m = derive_epsilon_machine(spec, K, L)
    table = history_future_table(spec, K, L)
    morphs = state_morphs(m, L)
    for h, i in m.epsilon_map.items():
        assert total_variation(table.morph(h), morphs[i]) <= 1e-9


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_idempotence(name):
    m = derive_epsilon_machine(preset(name), 4, 4)
    again = derive_epsilon_machine(as_process(m), 4, 4)
    assert isomorphism(m, again) is not None


@given(unifilar_specs(max_states=3, max_symbols=2))
def test_random_specs_derive_cleanly(spec):
    try:
        m = derive_epsilon_machine(spec, 3, 3)
    except NonDeterministicAtHorizon:
        assume(False)
    assert check_determinism(m) == []
    assert check_stochasticity(m) == []
    assert m.stationary.sum() == pytest.approx(1.0)


def test_captures_pattern_examples():
    fair = preset("fair-coin")
    ok, margin = captures_pattern(causal_partition(fair, 2, 3), fair, 3)
    assert not ok and margin == pytest.approx(0.0, abs=1e-12)

    gm = preset("golden-mean")
    ok, margin = captures_pattern(causal_partition(gm, 2, 1), gm, 1)
    assert ok and margin == pytest.approx(ref.entropy([2 / 3, 1 / 3]) - 2 / 3, abs=1e-12)

    p2 = preset("period2")
    ok, margin = captures_pattern(derive_epsilon_machine(p2, 1, 1), p2, 1)
    assert ok and margin == pytest.approx(1.0, abs=1e-12)


def test_scan_examples():
    gm = stabilization_scan(preset("golden-mean"), 6, 6)
    assert gm.stable_from == (1, 1)
    assert all(v[0] == 2 for v in gm.entries.values())

    even = stabilization_scan(preset("even-process"), 8, 8)
    assert even.entries[(8, 8)][0] == 2
    assert even.stable_from == (2, 1)
    # order-1 suffix rival is strictly less predictive than the causal states
    spec = preset("even-process")
    histories = history_future_table(spec, 5, 2).histories
    worse = prescience(suffix_partition(histories, 1), spec, 2)
    assert worse > prescience(causal_partition(spec, 5, 2), spec, 2) + 0.05

    fair = stabilization_scan(preset("fair-coin"), 4, 4)
    assert {v[0] for v in fair.entries.values()} == {1}
    assert fair.stable_from == (1, 1)
    assert fair.lines()[-1] == "stable from: (1, 1)"

"""The even process has finitely many causal states but no finite Markov order.

Blocks of 1s come in even lengths, so a predictor must track the parity of
the current run. A run of K ones never reveals that parity, which is why
the all-ones history stays outside the recurrent machine at every K.
"""

from cmech.derivation import (
    causal_partition,
    derive_epsilon_machine,
    history_future_table,
    stabilization_scan,
)
from cmech.errors import NonDeterministicAtHorizon
from cmech.oracle import prescience, suffix_partition
from cmech.process import preset

spec = preset("even-process")

try:
    derive_epsilon_machine(spec, 1, 2)
except NonDeterministicAtHorizon as exc:
    print(f"K=1 is too short: {exc}")

scan = stabilization_scan(spec, 8, 4)
print("\nState count and C_mu over horizons:")
for line in scan.lines():
    print("  " + line)

m = derive_epsilon_machine(spec, 6, 3)
unsynced = ", ".join(spec.alphabet.decode(h) for h in m.transient_histories)
print(f"\nAt K=6 the histories left out of the machine: {unsynced}")

# a Markov model of order r uses the last r symbols as its state
K, L = 6, 2
hs = history_future_table(spec, K, L).histories
best = prescience(causal_partition(spec, K, L), spec, L)
print(f"\nH[next {L} symbols | causal states] = {best:.6f}")
for r in range(1, K + 1):
    h = prescience(suffix_partition(hs, r), spec, L)
    print(f"  order-{r} suffix model: {h:.6f}  (excess {h - best:.6f})")

"""Recover machines from sampled data and watch the estimates tighten."""

import numpy as np

from cmech.derivation import derive_epsilon_machine
from cmech.machine import statistical_complexity
from cmech.process import preset, sample
from cmech.reconstruction import reconstruct, transition_error

spec = preset("golden-mean")
truth = derive_epsilon_machine(spec, 3, 3)

data = sample(spec, 100_000, seed=7)
m, diag = reconstruct(data, K=3, L=3, alpha=0.05)
print(m.summary())
print("\n".join(diag.lines(spec.alphabet.decode)))
print("standard errors:")
for (i, s, j), se in sorted(diag.std_errors.items()):
    print(f"  {m.states[i]} --{spec.alphabet.symbols[s]}--> {m.states[j]}: {se:.6f}")

print("\nMedian transition error over 20 seeds:")
for n in (1_000, 10_000, 100_000):
    errs, cmus = [], []
    for seed in range(20):
        est, _ = reconstruct(sample(spec, n, seed), 3, 3)
        errs.append(transition_error(est, truth))
        cmus.append(statistical_complexity(est))
    print(f"  N={n:>7}: error {np.median(errs):.6f}   C_mu {np.median(cmus):.6f}")

even = preset("even-process")
m, diag = reconstruct(sample(even, 100_000, seed=2), K=5, L=3)
print(f"\nEven process at K=5: {len(m.states)} states, {len(diag.discarded)} transient class(es) dropped")

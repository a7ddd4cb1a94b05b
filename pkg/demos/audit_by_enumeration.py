"""Score every way of grouping histories and check that causal states win."""

from cmech.oracle import verify_all
from cmech.process import preset

for name, K, L in [("period2", 1, 2), ("golden-mean", 3, 2), ("even-process", 3, 3)]:
    spec = preset(name)
    report = verify_all(spec, K, L)
    print(f"=== {name}, K={K}, L={L}")
    print(report.to_text(spec.alphabet.decode))

# the raw (prescience, complexity) cloud shows the trade-off the causal states sit on
report = verify_all(preset("golden-mean"), 3, 2)
front = {}
for h, c in report.frontier:
    key = round(h, 6)
    front[key] = min(front.get(key, c), c)
print("lowest complexity reached at each prescience level (golden mean, K=3, L=2):")
for h in sorted(front)[:8]:
    print(f"  H[F|R] = {h:.6f}   min C_mu = {front[h]:.6f}")

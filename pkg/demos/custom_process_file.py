"""Write a process by hand, derive its machine, save it, and draw it."""

import tempfile
from pathlib import Path

from cmech.derivation import derive_epsilon_machine
from cmech.machine import dumps, loads, to_dot
from cmech.process import parse_spec

# three-phase clock that sometimes stutters in its first phase
TEXT = """
alphabet: a b c
states: P Q R
P a 0.7 Q
P c 0.3 P
Q b 1.0 R
R c 1.0 P
"""

spec = parse_spec(TEXT, name="stutter-clock")
m = derive_epsilon_machine(spec, K=3, L=3)
print(m.summary())

out = Path(tempfile.mkdtemp())
(out / "machine.json").write_text(dumps(m))
again = loads((out / "machine.json").read_text())
(out / "machine.dot").write_text(to_dot(again))
print(f"\nsaved {out / 'machine.json'} and {out / 'machine.dot'}")
print(to_dot(again))

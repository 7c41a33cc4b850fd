"""The PR box: no-signalling, maximally nonlocal, and a vertex.

Walks through the basic checks on the PR box and on a noisy version of it,
showing where the exact locality test switches from a Bell functional to
an explicit shared-randomness model.
"""
from fractions import Fraction

from nsbox import Scenario, is_extremal, is_local, is_nonsignaling, marginals, mix, pr_box, uniform_table
from nsbox.io import table_text
from nsbox.quantum import chsh_exact

pr = pr_box()
print("PR box (a XOR b = x*y, uniform marginals):")
print(table_text(pr))
print("nonsignaling:", is_nonsignaling(pr).ok)
print("marginals l =", [str(v) for v in marginals(pr).l], " m =", [str(v) for v in marginals(pr).m])
print("extremal:", is_extremal(pr).extremal)
print("CHSH:", chsh_exact(pr))

res = is_local(pr)
print("local:", res.local)
print("Bell functional certifying nonlocality (<= 0 on every local table):")
print(" ", " ".join(str(c) for c in res.bell))

# Mix in white noise.  The CHSH value is 4v, so the table is local exactly
# when v <= 1/2.
noise = uniform_table(Scenario(2, 2))
for v in (Fraction(3, 4), Fraction(1, 2), Fraction(1, 3)):
    t = mix([(v, pr), (1 - v, noise)])
    r = is_local(t)
    desc = f"local, {len(r.model.weights)} deterministic strategies" if r.local else "nonlocal"
    print(f"v = {v}: CHSH = {chsh_exact(t)}, {desc}")

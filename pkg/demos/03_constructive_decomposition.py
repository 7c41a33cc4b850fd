"""Decomposing a mixed table into catalog boxes, step by step.

Stage 1 splits each cell at the two ends of its feasible range so every
cell gets a zero; stage 2 moves one marginal at a time to the edge of its
range, tying it to a constant or to another marginal, until nothing is
free.  The result is compared with a Caratheodory decomposition.
"""
from fractions import Fraction

from nsbox import Scenario, caratheodory_decompose, deterministic_table, mix, pr_box, uniform_table
from nsbox.appendix import OneZeroForm, chain_split, decompose_to_table2

s = Scenario(2, 2)
corr = mix([(Fraction(1, 2), deterministic_table(s, [0, 0], [0, 0])),
            (Fraction(1, 2), deterministic_table(s, [1, 1], [1, 1]))])
t = mix([(Fraction(3, 4), pr_box()), (Fraction(1, 4), corr)])

d = decompose_to_table2(t, trace=True)
print("split trace:")
for line in d.trace[:25]:
    print("  " + line)
print(f"{len(d.components)} components, exact reconstruction: {d.reconstruct() == t}")
for c in d.components:
    kind = "local" if c.spec.is_local else "PR class"
    print(f"  weight {c.weight}: {kind}")
print("nonlocal weight:", d.nonlocal_weight())
print("Caratheodory reconstructs the same table:", caratheodory_decompose(t).reconstruct() == t)

# One column of three one-zero cells: l0 is squeezed between m0 and m2.
m0, m1, m2, l0 = Fraction(1, 5), Fraction(1, 2), Fraction(2, 5), Fraction(3, 10)
form = OneZeroForm.from_marginals([l0], [m0, m1, m2], [1, 0, 2])
step = chain_split(form)
print(f"\ncolumn example: l0 in [{step.lower.expr}, {step.upper.expr}], weight on l0 = m0: {step.step.weight}")
for w, child in step.children:
    print(f"  {w}: ties {child.chain}, zeros {child.n_zeros()} (parent {form.n_zeros()})")

noisy = mix([(Fraction(2, 3), pr_box()), (Fraction(1, 3), uniform_table(s))])
print("\nnoisy PR box (v = 2/3): weight on PR-class boxes in this decomposition:",
      decompose_to_table2(noisy).nonlocal_weight())

"""From a singlet experiment to PR boxes.

The CHSH measurements on the singlet give 2*sqrt(2).  The Born-rule table
is projected onto the no-signalling subspace and rounded to exact
rationals, certified nonlocal, decomposed, and the number of PR boxes that
suffice for an exact simulation is reported.
"""
from nsbox.quantum import preset, quantum_to_prbox_report

for name in ("singlet_chsh", "product_plus", "mixed_uniform"):
    rep = quantum_to_prbox_report(preset(name))
    print("\n".join(rep.lines()))
    print()

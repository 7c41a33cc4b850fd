"""Every vertex of the binary-output polytope is a relabeled catalog box.

Enumerates the vertices with the exact double-description oracle, groups
them into classes under local relabelings, and compares with the classes
generated from the catalog family.
"""
from nsbox import Scenario, canonical_form, enumerate_classes, enumerate_vertices, table2_box

for dx, dy in [(2, 2), (3, 2), (3, 3)]:
    verts = enumerate_vertices(Scenario(dx, dy))
    oracle = {canonical_form(v)[0] for v in verts}
    specs = enumerate_classes(dx, dy)
    catalog = {canonical_form(table2_box(s))[0] for s in specs}
    print(f"inputs {dx}x{dy}: {len(verts)} vertices in {len(oracle)} classes; "
          f"catalog gives {len(catalog)} classes; equal: {oracle == catalog}")
    for s in specs:
        kind = "local" if s.is_local else f"gx={s.gx} gy={s.gy} anticorrelated={sorted(s.anticorrelated)}"
        print("   ", kind)

"""Acceptance run: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or directly with ``python3 tests/test_acceptance.py``.
"""
import math
import os
import random
import sys
import time
from fractions import Fraction as F

sys.path.insert(0, os.path.dirname(__file__))

from nsbox import (  # noqa: E402
    BarrettSpec,
    Scenario,
    apply_relabeling,
    barrett_box,
    canonical_form,
    caratheodory_decompose,
    enumerate_classes,
    enumerate_specs,
    enumerate_vertices,
    is_extremal,
    is_local,
    is_nonsignaling,
    pr_box,
    table2_box,
    table_iii,
    validate,
)
from nsbox.appendix import decompose_to_table2  # noqa: E402
from nsbox.gf2 import n_bits  # noqa: E402
from nsbox.interconversion import box_count, extract_pr, simulate_exact, simulate_mixture, simulate_sampled  # noqa: E402
from nsbox.quantum import born_probabilities, chsh_value, preset, quantum_to_prbox_report  # noqa: E402

from conftest import random_ns_table  # noqa: E402

RESULTS = []  # (criterion, ok, message), read by the terminal-summary hook
SEED = 20261015
H = F(1, 2)


def record(n, ok, msg, t0):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {msg} ({time.time() - t0:.1f}s)"
    RESULTS.append((n, ok, line))
    print(line)
    assert ok, line


def nonlocal_sweep():
    return [
        s
        for dx in range(2, 6)
        for dy in range(2, 6)
        for s in enumerate_specs(dx, dy)
        if not s.is_local and s.gx <= 4 and s.gy <= 4
    ]


def test_criterion_1_golden_fixtures():
    t0 = time.time()
    pr = pr_box()
    display = {  # cell (x,y) -> (P00, P10, P01, P11) as (a,b)
        (0, 0): (H, 0, 0, H), (0, 1): (H, 0, 0, H), (1, 0): (H, 0, 0, H), (1, 1): (0, H, H, 0),
    }
    ok_pr = all(
        (pr[x, y, 0, 0], pr[x, y, 1, 0], pr[x, y, 0, 1], pr[x, y, 1, 1]) == v for (x, y), v in display.items()
    )
    ok_b2 = barrett_box(BarrettSpec(2)) == pr
    b3 = barrett_box(BarrettSpec(3))
    ok_b3 = all(
        b3[x, y, a, b] == (F(1, 3) if (b - a) % 3 == x * y else 0)
        for x in range(2) for y in range(2) for a in range(3) for b in range(3)
    )
    t3 = table_iii()
    ok_t3 = validate(t3).ok and is_nonsignaling(t3).ok and is_extremal(t3).extremal
    dt = time.time() - t0
    ok = ok_pr and ok_b2 and ok_b3 and ok_t3 and dt < 1.0
    record(1, ok, f"PR display={ok_pr} barrett2=PR:{ok_b2} barrett3 36 entries={ok_b3} 3-outcome fixture={ok_t3}", t0)


def test_criterion_2_result1_cross_check():
    t0 = time.time()
    parts = []
    ok = True
    for dx, dy in [(2, 2), (3, 2), (2, 3), (3, 3)]:
        verts = enumerate_vertices(Scenario(dx, dy))
        oracle = {canonical_form(v)[0] for v in verts}
        catalog = {canonical_form(table2_box(s))[0] for s in enumerate_classes(dx, dy)}
        same = oracle == catalog
        ok &= same
        if (dx, dy) == (2, 2):
            ok &= len(verts) == 24
        parts.append(f"({dx},{dy}) {len(verts)} vertices/{len(oracle)} classes {'match' if same else 'MISMATCH'}")
    record(2, ok, "; ".join(parts), t0)


def test_criterion_3_appendix_pipeline():
    t0 = time.time()
    rng = random.Random(SEED)
    extremal_cache = {}
    n_ok = 0
    leaves = 0
    for _ in range(200):
        t = random_ns_table(rng, 3, 3, k_max=6)
        d = decompose_to_table2(t)
        good = d.reconstruct() == t and sum(c.weight for c in d.components) == 1
        for c in d.components:
            leaves += 1
            if c.table not in extremal_cache:
                extremal_cache[c.table] = is_extremal(c.table).extremal
            good &= extremal_cache[c.table] and c.weight > 0
        good &= caratheodory_decompose(t).reconstruct() == d.reconstruct()
        n_ok += good
    record(3, n_ok == 200, f"{n_ok}/200 (3,3) tables exact, {leaves} extremal components checked", t0)


def test_criterion_4_result2_forward():
    t0 = time.time()
    specs = nonlocal_sweep()
    bad = 0
    for s in specs:
        box = table2_box(s)
        for x in range(s.dx):
            for y in range(s.dy):
                cell = simulate_exact(s, x, y)
                if any(cell[a][b] != box[x, y, a, b] for a in range(2) for b in range(2)):
                    bad += 1
        if box_count(s).slots != 2 ** n_bits(s.gy):
            bad += 1
    record(4, bad == 0, f"{len(specs)} nonlocal specs, every cell exact and slots = 2^ceil(log2 gy); {bad} failures", t0)


def test_criterion_5_result2_reverse():
    t0 = time.time()
    specs = nonlocal_sweep()
    bad = sum(extract_pr(s).table() != pr_box() for s in specs)
    record(5, bad == 0, f"extract_pr == pr_box() for {len(specs) - bad}/{len(specs)} specs", t0)


def test_criterion_6_result3_composition():
    t0 = time.time()
    rng = random.Random(SEED + 6)
    shapes = [(2, 2), (3, 2), (2, 3), (3, 3)]
    n_ok = 0
    for i in range(50):
        t = random_ns_table(rng, *shapes[i % 4], k_max=5)
        d = decompose_to_table2(t)
        n_ok += simulate_mixture((c.weight, c.spec, c.relabeling) for c in d.components) == t
    record(6, n_ok == 50, f"{n_ok}/50 tables reproduced exactly by mixed PR-box protocols", t0)


def test_criterion_7_sampling():
    t0 = time.time()
    from nsbox import PR_SPEC

    n = 10**5
    sigma = math.sqrt(0.25 / n)
    ok = True
    worst = 0.0
    for x in range(2):
        for y in range(2):
            res = simulate_sampled(PR_SPEC, x, y, n, seed=SEED + 2 * x + y)
            for run in res.runs:
                run.check()
            fr = res.frequencies()
            for a in range(2):
                for b in range(2):
                    if (a ^ b) == x * y:
                        z = abs(float(fr[a][b]) - 0.5) / sigma
                        worst = max(worst, z)
                        ok &= z < 5
                    else:
                        ok &= fr[a][b] == 0
    a = simulate_sampled(PR_SPEC, 1, 1, 1000, seed=SEED).transcript()
    b = simulate_sampled(PR_SPEC, 1, 1, 1000, seed=SEED).transcript()
    ok &= a.encode() == b.encode()
    record(7, ok, f"10^5 trials per input pair, worst deviation {worst:.2f} sigma, box law holds, transcripts reproducible", t0)


def test_criterion_8_quantum():
    t0 = time.time()
    chsh = chsh_value(born_probabilities(preset("singlet_chsh")))
    err = abs(chsh - 2 * math.sqrt(2))
    rep = quantum_to_prbox_report(preset("singlet_chsh"))
    singlet_ok = (
        err < 1e-9
        and not is_local(rep.table).local
        and rep.decomposition.reconstruct() == rep.table
        and rep.nonlocal_weight > 0
    )
    locals_ok = all(is_local(quantum_to_prbox_report(preset(n)).table).local for n in ("product_plus", "mixed_uniform"))
    record(
        8,
        singlet_ok and locals_ok,
        f"singlet CHSH error {err:.1e}, nonlocal weight {rep.nonlocal_weight} ~ {float(rep.nonlocal_weight):.4f}; "
        f"product_plus and mixed_uniform local={locals_ok}",
        t0,
    )


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)

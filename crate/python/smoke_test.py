#!/usr/bin/env python3
"""Smoke test for the bianchi_heights_py extension module.

Builds nothing itself: run `cargo build -p bianchi-heights-py` (or --release)
first, then `python3 python/smoke_test.py`. The script locates the compiled
cdylib under target/, stages it under the importable module name, and checks
a few known values end to end.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def stage_module() -> None:
    candidates = [
        REPO / "target" / "release" / "libbianchi_heights_py.so",
        REPO / "target" / "debug" / "libbianchi_heights_py.so",
    ]
    built = [p for p in candidates if p.exists()]
    if not built:
        sys.exit("no compiled module; run `cargo build -p bianchi-heights-py` first")
    newest = max(built, key=lambda p: p.stat().st_mtime)
    stage = Path(tempfile.mkdtemp(prefix="bianchi-py-"))
    shutil.copy2(newest, stage / "bianchi_heights_py.so")
    sys.path.insert(0, str(stage))


stage_module()

import bianchi_heights_py as bh  # noqa: E402

checks = 0


def check(cond: bool, what: str) -> None:
    global checks
    if not cond:
        sys.exit(f"FAIL: {what}")
    checks += 1
    print(f"ok: {what}")


# Ring and group basics.
spec = bh.GroupSpec.elementary(1)
check(spec.d == 1, "elementary spec carries its discriminant parameter")
check(len(spec.generators) >= 3, "generator list is inverse-closed, so at least 3 rows")
check(bh.height_of(1, [1, 0, 0, 0, 1, 0, 1, 0]) == 2, "height of a unipotent is 2")

# Ball enumeration against known counts for the full Gaussian group.
ball = spec.ball(4)
check(len(ball) == 2356, f"filtered ball at T=4 has 2356 rows, got {len(ball)}")
check(ball.saturated, "small ball saturates")
unfiltered = spec.ball(4, filtered=False)
check(len(unfiltered) == 2536, f"unfiltered ball at T=4 has 2536 elements, got {len(unfiltered)}")
check(len(unfiltered.filter_rows()) == len(ball), "filtering after the fact matches filtered enumeration")
mult, distinct = ball.row_multiplicity()
check(distinct == 628, f"628 distinct bottom rows in the T=4 window, got {distinct}")
check(mult >= 1, "row multiplicity is positive")

# The mod-4 obstruction is visible straight from the height list.
hs = ball.heights()
check(hs[0] >= 1, "filtered rows all have positive height")
check(all(h % 4 != 0 for h in hs), "no height is divisible by 4 over the Gaussian integers")
check({1, 2, 3} <= {h % 4 for h in hs}, "all three odd-ish classes mod 4 occur")

# Local structure: frozen modulus and membership.
ls = spec.local_structure(prime_bound=3)
check(ls.l == 4, f"stabilized modulus is 4, got {ls.l}")
check(ls.admissible_classes == [1, 2, 3], "admissible classes are 1, 2, 3 mod 4")
check(ls.bad_primes == [2], "only the even prime is flagged")
check(ls.is_admissible(7) and not ls.is_admissible(8), "membership follows the classes")

# Closed-form densities against the brute-force oracle.
for p in (3, 5, 7):
    for n in (0, 1, 2, p):
        check(bh.tau(1, p, n) == bh.tau_brute(1, p, n), f"tau closed form matches brute force at p={p}, n={n}")

# Exponential sums: exact Ramanujan values and the classical Gauss sum.
check(bh.ramanujan(4, 2) == -2, "c_4(2) = -2")
check(bh.ramanujan(6, 1) == 1, "c_6(1) = mu(6) = 1")
check(bh.ramanujan(9, 3) == -3, "c_9(3) = -3")
re, im = bh.gauss_sum(3, 1, 1, 0)
check(abs(re) < 1e-12 and abs(im - math.sqrt(3)) < 1e-12, "quadratic Gauss sum mod 3 is i*sqrt(3)")

# Membership oracle agrees with the obstruction.
rep = bh.represented(1, 20)
check(rep[1] and rep[2] and rep[5], "small admissible values are represented")
check(not any(rep[n] for n in (4, 8, 12, 16, 20)), "multiples of 4 are never represented")

# Group-file parsing and a thin subgroup.
thin_text = (REPO / "fixtures" / "thin_d1.spec").read_text()
thin = bh.GroupSpec.parse(thin_text, "thin")
tb = thin.ball(8)
check(len(tb) == 18, f"thin ball at T=8 has 18 rows, got {len(tb)}")
check(len(thin.ball(8, filtered=False)) == 25, "thin ball at T=8 has 25 elements")

# Growth exponent of the full group: slope near 4, critical exponent near 2.
slope, half = spec.delta([4, 6, 8])
check(abs(half - 2.0) < 0.35, f"lattice critical exponent estimate near 2, got {half:.3f}")

# Circle decomposition at a small scheduled point: rows are exact.
rows = spec.circle_table(256)
check(len(rows) == 257, "one row per n in [256, 512]")
for n, admissible, r_sharp, r_smooth, major, minor in rows:
    check_val = abs((r_smooth - major) - minor) < 1e-9
    if not check_val:
        sys.exit(f"FAIL: minor is not the residual at n={n}")
    if n % 4 == 0 and admissible:
        sys.exit(f"FAIL: n={n} is a multiple of 4 but flagged admissible")
checks += 1
print("ok: circle rows decompose exactly and respect admissibility")
admissible_rows = sum(1 for r in rows if r[1])
check(admissible_rows == 192, f"192 admissible n in [256, 512], got {admissible_rows}")

# One fast criterion from the verification battery through the bindings.
name, passed, detail = bh.run_criterion(3)
check(passed, f"battery criterion 3 ({name}) passes: {detail}")

print(f"\nsmoke test passed ({checks} checks)")

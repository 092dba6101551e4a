"""One test per acceptance criterion, each printing a single PASS/FAIL line.

A criterion passes when every report row it produces is within tolerance and
the whole check finishes inside its runtime budget.
"""

import time

import pytest

from ampbench.verify import CRITERIA, CRITERION_CHECKS

TITLES = {
    1: "headline values cft=0.5, f_prob=1, f_det=0.75",
    2: "squeezer fidelity formula vs Gauss-Laguerre quadrature",
    3: "truncated squeezer simulation vs pointwise fidelity",
    4: "A-operator norm vs closed form",
    5: "trace powers vs circulant determinant",
    6: "cross norm reaches the classical threshold",
    7: "filter fidelity convergence",
    8: "Monte-Carlo classical threshold and squeezer",
    9: "measure-and-prepare equals attenuated squeezer",
    10: "ordering of fidelities and vanishing gap",
}


@pytest.mark.parametrize("criterion", sorted(CRITERION_CHECKS))
def test_criterion(criterion, capsys):
    _, budget = CRITERIA[criterion]
    start = time.perf_counter()
    rows = CRITERION_CHECKS[criterion]()
    elapsed = time.perf_counter() - start
    failed = [r for r in rows if not r.passed]
    ok = rows and not failed and elapsed <= budget
    with capsys.disabled():
        print(f"\ncriterion {criterion:2d} {'PASS' if ok else 'FAIL'}: {TITLES[criterion]} "
              f"({len(rows) - len(failed)}/{len(rows)} rows, {elapsed:.3g} s of {budget:g} s)")
        for r in failed:
            print(f"    {r.name}: computed={r.computed:.12g} target={r.target:.12g} "
                  f"tol={r.tolerance:.3g} ({r.mode})")
    assert rows
    assert not failed, [r.name for r in failed]
    assert elapsed <= budget

"""Acceptance criteria 1-10, one PASS/FAIL line each.

Every comparison is exact (zero tolerance); the bracket after each line
shows the measured runtime against its budget.  Run as a script to print
the lines without pytest.
"""

import sys

import pytest

from redshift import verify

CRITERIA = [
    (1, "TC generator table", "tc-counts"),
    (2, "Poincare identity", "poincare"),
    (3, "height 0 and 1 families", "height-families"),
    (4, "C_p-Tate E^inf at p=3", "cp-tate-p3"),
    (5, "C_p^2-Tate displayed pages at p=3", "cp2-tate-p3"),
    (6, "circle E^inf vs A+B+C decompositions at p=3", "circle-p3"),
    (7, "derivation and algebra property suites", "properties"),
    (8, "torsion heights", "torsion-heights"),
    (9, "K-theory variants at p=7", "k-variants"),
    (10, "C_p-Tate spot check at p=7", "cp-tate-p7"),
]

_CHECKS = {name: (budget, fn) for name, budget, fn in verify.criteria("full")}


def run_criterion(number: int, title: str, check: str) -> verify.CheckResult:
    budget, fn = _CHECKS[check]
    res = verify.timed(check, budget, fn)
    res.name = f"criterion {number} ({title})"
    return res


@pytest.mark.parametrize("number,title,check", CRITERIA, ids=[c[2] for c in CRITERIA])
def test_criterion(number, title, check, capsys):
    res = run_criterion(number, title, check)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.ok, res.detail
    assert res.within_budget, f"{res.seconds:.1f}s exceeds the {res.budget}s budget"


def main() -> int:
    results = [run_criterion(*c) for c in CRITERIA]
    for res in results:
        print(res.line())
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())

"""Acceptance criteria at their stated tolerances, one test per criterion.

Every check is echoed in the terminal summary, followed by one PASS/FAIL
line per criterion. Report-only lines are informational and never fail.
"""
import pytest

from lgks_response import verification as V

from conftest import ACCEPTANCE_LINES

CRITERIA = [
    ("#1", V.criterion_1), ("#2", V.criterion_2), ("#3", V.criterion_3),
    ("#4", V.criterion_4), ("#5", V.criterion_5), ("#6", V.criterion_6),
    ("#7", V.criterion_7), ("#8", V.criterion_8), ("#9", V.criterion_9),
    ("#10", V.criterion_10), ("core", V.core_checks),
]


@pytest.mark.parametrize("label,fn", CRITERIA, ids=[c[0] for c in CRITERIA])
def test_criterion(label, fn):
    results = fn()
    failed = [r for r in results if not r.passed and not r.report_only]
    for r in results:
        ACCEPTANCE_LINES.append("    " + r.line())
    verdict = "FAIL" if failed else "PASS"
    ACCEPTANCE_LINES.append(f"criterion {label}: {verdict}")
    print(f"criterion {label}: {verdict}")
    assert not failed, "; ".join(r.line() for r in failed)

"""Bound audits: every default grid must pass with zero violations, and
the grids themselves must be the documented sizes."""

import pytest

from qnumdiff.audits import (
    SELECTORS,
    AuditReport,
    audit_bounds,
    audit_lemma1,
    audit_lemma2,
    audit_lemma3,
    audit_lemma5,
    audit_lemma6,
)


FROZEN_CHECK_COUNTS = {
    "lemma1": 400,
    "lemma2": 42,
    "lemma3": 461,
    "lemma5": 2000,
    "lemma6": 1717,
}


@pytest.mark.parametrize("selector", SELECTORS)
def test_default_grids_pass(selector):
    (report,) = audit_bounds(selector)
    assert isinstance(report, AuditReport)
    assert report.lemma == selector
    assert report.passed
    assert report.violations == ()
    assert report.checks == FROZEN_CHECK_COUNTS[selector]
    assert report.worst_margin >= 0.0


def test_all_selector_runs_everything():
    reports = audit_bounds("all")
    assert [r.lemma for r in reports] == list(SELECTORS)
    assert all(r.passed for r in reports)
    with pytest.raises(ValueError):
        audit_bounds("all", max_2n=4)


def test_unknown_selector_rejected():
    with pytest.raises(ValueError, match="unknown selector"):
        audit_bounds("lemma4")


def test_empty_grid_rejected():
    with pytest.raises(ValueError, match="empty grid"):
        audit_bounds("lemma1", hs=[])
    with pytest.raises(ValueError):
        audit_lemma2(max_2n=1)


def test_grid_overrides_change_check_count():
    (small,) = audit_bounds("lemma2", max_2n=4)
    assert small.checks < FROZEN_CHECK_COUNTS["lemma2"]
    assert small.passed
    (narrow,) = audit_bounds("lemma1", keys=[(1, 1)], xs=[0.0], hs=[0.125])
    assert narrow.checks == 1
    assert narrow.passed


def test_remainder_audit_reports_forced_violation():
    """Shrinking the claimed constant must surface violations, proving
    the audit can fail."""
    report = audit_lemma1(keys=[(1, 1)], xs=[0.7], hs=[0.125])
    assert report.passed
    # A bound this small cannot hold; check the machinery flags it.
    import qnumdiff.audits as audits_module

    original = audits_module.residual_bound
    audits_module.residual_bound = lambda M, key: 0.0
    try:
        broken = audit_lemma1(keys=[(1, 1)], xs=[0.7], hs=[0.125])
    finally:
        audits_module.residual_bound = original
    assert not broken.passed
    assert broken.worst_margin < 0
    assert broken.violations


def test_direct_audit_functions_match_dispatcher():
    for fn, name in (
        (audit_lemma1, "lemma1"),
        (audit_lemma2, "lemma2"),
        (audit_lemma3, "lemma3"),
        (audit_lemma5, "lemma5"),
        (audit_lemma6, "lemma6"),
    ):
        direct = fn()
        (dispatched,) = audit_bounds(name)
        assert direct.checks == dispatched.checks
        assert direct.passed == dispatched.passed
        assert direct.worst_margin == dispatched.worst_margin

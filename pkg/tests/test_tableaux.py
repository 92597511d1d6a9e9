from fractions import Fraction

import numpy as np
import pytest

from imexflow.tableaux import (
    RK_NAMES,
    TABLEAU_NAMES,
    builtin_tableau,
    tableau_csv,
    validate_structure,
)

# stages and order as published
PUBLISHED = {
    "RK-TR": (3, 2),
    "RK-CB2": (3, 2),
    "RK-CB3c": (4, 3),
    "RK-CB3e": (4, 3),
    "RK-CB4": (6, 4),
    "RK-ARS3": (5, 3),
}


@pytest.mark.parametrize("name", TABLEAU_NAMES)
def test_structure_residuals(name):
    report = validate_structure(builtin_tableau(name))
    assert report.ok, str(report)
    for key, (passed, resid) in report.checks.items():
        if not key.startswith("identity_"):
            assert resid <= 1e-14


@pytest.mark.parametrize("name", RK_NAMES)
def test_stage_count_and_order(name):
    tab = builtin_tableau(name)
    assert (tab.s, tab.declared_order) == PUBLISHED[name]


@pytest.mark.parametrize("name", TABLEAU_NAMES)
def test_exact_fractions_satisfy_row_sums(name):
    # published rationals are rounded, so sums hold to ~1e-16 rather than exactly
    ex = builtin_tableau(name).exact
    for key in ("a_im", "a_ex"):
        for row, ci in zip(ex[key], ex["c"]):
            assert abs(float(sum(row) - ci)) < 1e-15
    assert abs(float(sum(ex["b_im"]) - 1)) < 1e-15
    assert abs(float(sum(ex["b_ex"]) - 1)) < 1e-15


@pytest.mark.parametrize("name", [n for n in RK_NAMES if n != "RK-CB3c"])
def test_flags_match_declared(name):
    tab = builtin_tableau(name)
    report = validate_structure(tab)
    assert report.flags == tab.declared_flags


def test_cb3c_coefficients_are_stiffly_accurate():
    # the corrected coefficient set has a_im[s] == b_im although the method is
    # listed without that property
    tab = builtin_tableau("RK-CB3c")
    assert tab.stiffly_accurate
    assert not tab.declared_flags["stiffly_accurate"]


def test_cb3c_corrected_entries():
    ex = builtin_tableau("RK-CB3c").exact
    assert ex["a_im"][3][2] == Fraction(493801219040, 853653026979)
    assert ex["a_ex"][3][2] == Fraction(1660544566939, 2334033219546)


def test_order_conditions_cb3e():
    # third-order coupling conditions of an IMEX pair with shared b
    tab = builtin_tableau("RK-CB3e")
    b, c, Ai, Ae = tab.b_ex, tab.c, tab.a_im, tab.a_ex
    assert b @ c == pytest.approx(0.5, abs=1e-15)
    assert b @ c**2 == pytest.approx(1 / 3, abs=1e-15)
    for A1 in (Ai, Ae):
        for A2 in (Ai, Ae):
            assert b @ A1 @ (A2 @ np.ones(4)) == pytest.approx(1 / 6, abs=1e-15)


def test_perturbation_is_detected():
    tab = builtin_tableau("RK-CB2").perturbed("a_ex", 2, 1, 1e-10)
    report = validate_structure(tab)
    assert not report.ok
    assert "row_sum_ex" in report.failures


def test_unknown_name_lists_valid_names():
    with pytest.raises(KeyError, match="RK-CB3e"):
        builtin_tableau("RK-XYZ")


def test_csv_layout():
    text = tableau_csv(builtin_tableau("RK-TR"))
    lines = text.splitlines()
    assert lines[0] == "row,c,a_im_1,a_im_2,a_im_3,a_ex_1,a_ex_2,a_ex_3"
    assert lines[-2].startswith("b_im,,0.5,0,0.5")
    assert lines[-1] == "b_ex,,,,,0.5,0.5,0"
    assert not text.endswith("\r\n")

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from layercs.coherent import (
    CSClass,
    CSLabel,
    CSTag,
    action_identity_check,
    build_state,
    evolve,
    normalization,
    normalization_factors,
    normalization_series,
    overlap,
    overlap_closed_form,
    rho_energy,
    rho_fixed_m,
    rho_fixed_m_shifted,
    rho_fixed_n,
    rho_fixed_n_shifted,
    rho_landau,
    rho_layer,
    row_normalization,
    row_normalization_series,
)
from layercs.errors import ClassMismatch, DomainError, UnsupportedClass
from layercs.spectrum import LayerParams, energy_mn

PI = LayerParams(1.0, math.pi)

ONE_DEGREE = [
    CSClass("fixed-n", 0),
    CSClass("fixed-n", 2),
    CSClass("fixed-m", 0),
    CSClass("fixed-m", 3),
    CSClass("fixed-n-shifted", 0),
    CSClass("fixed-m-shifted", 0),
]
TWO_DEGREE = [CSClass(t) for t in ("product", "product-shifted", "nested", "nested-alt-phase", "nested-alt-phase-shifted")]


def _label(cls, J=1.3, J2=0.8, a1=0.0, a2=0.0):
    return CSLabel.one(J, a1) if cls.tag.one_degree else CSLabel.two(J, J2, a1, a2)


# --- classes and labels -------------------------------------------------------


@pytest.mark.parametrize("tag, idx", [("fixed-n", None), ("fixed-m", -1), ("fixed-n", 1.5), ("product", 0), ("nested", 2)])
def test_class_validation(tag, idx):
    with pytest.raises(DomainError):
        CSClass(tag, idx)


def test_tag_properties():
    assert CSTag.FIXED_N_SHIFTED.shifted and CSTag.FIXED_N_SHIFTED.one_degree
    assert CSTag.NESTED_ALT_PHASE_SHIFTED.nested and not CSTag.PRODUCT.nested
    assert len(list(CSTag)) == 9
    assert str(CSClass("fixed-m", 4)) == "fixed-m[4]"


@pytest.mark.parametrize("J, alpha", [((-1.0,), (0.0,)), ((math.inf,), (0.0,)), ((1.0, 2.0), (0.0,)), ((1.0,), (math.nan,))])
def test_label_validation(J, alpha):
    with pytest.raises(DomainError):
        CSLabel(J, alpha)


def test_label_arity_enforced():
    with pytest.raises(DomainError):
        build_state(CSClass("product"), CSLabel.one(1.0), PI)
    with pytest.raises(DomainError):
        build_state(CSClass("fixed-n", 0), CSLabel.two(1.0, 1.0), PI)


# --- rho ----------------------------------------------------------------------


def test_rho_fixed_n_example():
    # E(1,0) E(2,0) at B = 1, d = π
    assert rho_fixed_n(2, 0, PI) == pytest.approx(24.0, rel=1e-14)


def test_rho_fixed_m_example():
    # β = 2 + i at B = 1, d = π, m = 0: |β|² = 5 = E(0,1)
    assert rho_fixed_m(1, 0, PI) == pytest.approx(5.0, rel=1e-14)


@pytest.mark.parametrize("B, d", [(1.0, math.pi), (0.4, 1.7), (3.0, 2.5)])
@pytest.mark.parametrize("k", [0, 1, 4, 9])
def test_rho_is_product_of_energies(B, d, k):
    p = LayerParams(B, d)
    cases = [
        (rho_fixed_n(k, 1, p), [energy_mn(j, 1, p) for j in range(1, k + 1)]),
        (rho_fixed_m(k, 2, p), [energy_mn(2, j, p) for j in range(1, k + 1)]),
        (rho_landau(k, p), [B * (2 * j + 1) for j in range(1, k + 1)]),
        (rho_layer(k, p), [p.q * (j + 1) ** 2 for j in range(1, k + 1)]),
        (rho_fixed_n_shifted(k, p), [2 * B * j for j in range(1, k + 1)]),
        (rho_fixed_m_shifted(k, p), [p.q * j * (j + 2) for j in range(1, k + 1)]),
    ]
    for closed, factors in cases:
        assert closed == pytest.approx(math.prod(factors), rel=1e-12)


def test_rho_energy_nested_needs_row():
    with pytest.raises(DomainError):
        rho_energy(CSClass("nested"), PI, 2)
    f = rho_energy(CSClass("nested"), PI, 2, row=1)
    assert f(0) == pytest.approx(energy_mn(1, 0, PI))


# --- normalization ------------------------------------------------------------

# closed forms evaluated with mpmath at 30 digits


@pytest.mark.parametrize(
    "cls, label, p, expected",
    [
        (CSClass("fixed-n", 1), CSLabel.one(3.0), LayerParams(0.5, 1.0), 1.0788330819021258),
        (CSClass("fixed-m", 2), CSLabel.one(10.0), LayerParams(2.0, math.pi), 2.286863481732445),
        (CSClass("product"), CSLabel.two(1.5, 2.5), LayerParams(1.0, 2.0), 2.1673027654633138),
        (CSClass("fixed-m-shifted", 0), CSLabel.one(1.0), PI, 1.3778968953974764),
        (CSClass("nested"), CSLabel.two(2.0, 3.0), PI, 1.24136097000289),
    ],
)
def test_normalization_reference(cls, label, p, expected):
    assert normalization(cls, label, p) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("cls", ONE_DEGREE + TWO_DEGREE, ids=str)
def test_normalization_at_zero(cls):
    assert normalization(cls, _label(cls, 0.0, 0.0), PI) == pytest.approx(1.0, abs=1e-15)


def test_fixed_n_shifted_normalization_is_exponential():
    B = 0.75
    p = LayerParams(B, 2.0)
    assert normalization(CSClass("fixed-n-shifted", 0), CSLabel.one(2 * B), p) == pytest.approx(math.e, rel=1e-14)


@pytest.mark.parametrize("cls", ONE_DEGREE, ids=str)
@pytest.mark.parametrize("J", [0.2, 4.0, 35.0])
def test_closed_form_matches_series(cls, J):
    p = LayerParams(1.3, 2.2)
    label = CSLabel.one(J)
    assert normalization(cls, label, p) == pytest.approx(normalization_series(cls, label, p), rel=1e-10)


@pytest.mark.parametrize("cls", [CSClass("product"), CSClass("product-shifted")], ids=str)
def test_product_normalization_factors(cls):
    label = CSLabel.two(2.0, 5.0)
    f = normalization_factors(cls, label, PI)
    assert f["N1_2"] == pytest.approx(normalization_series(cls, label, PI, 1), rel=1e-11)
    assert f["N2_2"] == pytest.approx(normalization_series(cls, label, PI, 2), rel=1e-11)
    assert normalization(cls, label, PI) == pytest.approx(f["N1_2"] * f["N2_2"], rel=1e-15)


@pytest.mark.parametrize("cls", TWO_DEGREE[2:], ids=str)
@pytest.mark.parametrize("m", [0, 3])
def test_row_normalization_matches_series(cls, m):
    assert row_normalization(cls, m, 4.0, PI) == pytest.approx(row_normalization_series(cls, m, 4.0, PI), rel=1e-11)


def test_row_normalization_rejects_non_nested():
    with pytest.raises(UnsupportedClass):
        row_normalization(CSClass("product"), 0, 1.0, PI)
    with pytest.raises(UnsupportedClass):
        normalization_series(CSClass("nested"), CSLabel.two(1.0, 1.0), PI, 2)


# --- states -------------------------------------------------------------------


@pytest.mark.parametrize("cls", ONE_DEGREE, ids=str)
def test_state_at_zero_action(cls):
    s = build_state(cls, CSLabel.one(0.0, 0.7), PI)
    assert abs(s.coeffs[0]) == pytest.approx(1.0, abs=1e-15)
    assert np.all(s.coeffs[1:] == 0)


@pytest.mark.parametrize("cls", ONE_DEGREE + TWO_DEGREE, ids=str)
@pytest.mark.parametrize("eps", [1e-6, 1e-12])
def test_state_mass(cls, eps):
    s = build_state(cls, _label(cls, 3.0, 2.0, 0.4, -1.1), PI, eps_tail=eps)
    assert s.tail_bound <= eps
    assert 1.0 - eps - 1e-13 <= s.mass <= 1.0 + 1e-13


def test_state_is_readonly():
    s = build_state(CSClass("fixed-n", 0), CSLabel.one(1.0), PI)
    with pytest.raises(ValueError):
        s.coeffs[0] = 0.0


@pytest.mark.parametrize("eps", [0.0, 1e-2])
def test_eps_tail_range(eps):
    with pytest.raises(DomainError):
        build_state(CSClass("fixed-n", 0), CSLabel.one(1.0), PI, eps_tail=eps)


@pytest.mark.parametrize("cls", [CSClass("product"), CSClass("product-shifted")], ids=str)
def test_product_state_factorizes(cls):
    s = build_state(cls, CSLabel.two(2.0, 3.0, 0.3, 0.9), PI)
    c = s.coeffs
    # rank one: every 2x2 minor vanishes
    assert abs(c[1, 1] * c[0, 0] - c[1, 0] * c[0, 1]) < 1e-15
    assert np.linalg.matrix_rank(c, tol=1e-12) == 1


def test_fixed_n_coefficients_explicit():
    cls, p = CSClass("fixed-n", 0), LayerParams(0.5, 1.0)
    J, alpha = 2.0, 0.3
    s = build_state(cls, CSLabel.one(J, alpha), p)
    N = normalization(cls, CSLabel.one(J), p)
    for k in range(5):
        e = energy_mn(k, 0, p)
        expected = J ** (k / 2) / math.sqrt(rho_fixed_n(k, 0, p) * N) * cmath.exp(-1j * alpha * e)
        assert s.coeffs[k] == pytest.approx(expected, rel=1e-12)


def test_nested_rows_weighting():
    # row m carries total weight (J1^m/ρ₁(m)) / (N₂(m)² N₁²)
    cls = CSClass("nested")
    J1, J2 = 2.0, 3.0
    s = build_state(cls, CSLabel.two(J1, J2), PI, eps_tail=1e-14)
    N1 = normalization(cls, CSLabel.two(J1, J2), PI)
    for m in range(4):
        row = float(np.sum(np.abs(s.coeffs[m]) ** 2))
        w = J1**m / rho_landau(m, PI) / row_normalization(cls, m, J2, PI) / N1
        assert row == pytest.approx(w, rel=1e-10)


def test_to_dict_shapes():
    s = build_state(CSClass("product"), CSLabel.two(1.0, 1.0), PI)
    d = s.to_dict()
    assert d["class"] == "product"
    assert len(d["coefficients"]) == s.trunc[0]
    assert len(d["coefficients"][0][0]) == 2


# --- overlap ------------------------------------------------------------------


@pytest.mark.parametrize("cls", ONE_DEGREE + TWO_DEGREE, ids=str)
def test_self_overlap(cls):
    s = build_state(cls, _label(cls, 2.5, 1.5, 0.2, 0.6), PI)
    assert abs(overlap(s, s) - 1.0) <= 1e-11


@pytest.mark.parametrize(
    "cls, a, ap",
    [
        (CSClass("fixed-n", 0), 0.3, -0.5),
        (CSClass("fixed-n", 2), 1.1, 1.1),
        (CSClass("fixed-n-shifted", 0), 0.0, 2.0),
        (CSClass("fixed-m", 1), 0.4, 0.4),
        (CSClass("fixed-m-shifted", 0), 0.0, 0.0),
    ],
)
def test_overlap_closed_form_matches_sum(cls, a, ap):
    p = LayerParams(0.8, 2.3)
    l1, l2 = CSLabel.one(1.7, a), CSLabel.one(4.2, ap)
    direct = overlap(build_state(cls, l1, p, 1e-15), build_state(cls, l2, p, 1e-15))
    assert abs(overlap_closed_form(cls, l1, l2, p) - direct) <= 1e-10


def test_overlap_closed_form_restrictions():
    with pytest.raises(DomainError):
        overlap_closed_form(CSClass("fixed-m", 0), CSLabel.one(1.0, 0.0), CSLabel.one(1.0, 0.1), PI)
    with pytest.raises(UnsupportedClass):
        overlap_closed_form(CSClass("product"), CSLabel.two(1, 1), CSLabel.two(1, 1), PI)


def test_overlap_class_mismatch():
    a = build_state(CSClass("fixed-n", 0), CSLabel.one(1.0), PI)
    b = build_state(CSClass("fixed-n", 1), CSLabel.one(1.0), PI)
    c = build_state(CSClass("fixed-n", 0), CSLabel.one(1.0), LayerParams(2.0, math.pi))
    with pytest.raises(ClassMismatch):
        overlap(a, b)
    with pytest.raises(ClassMismatch):
        overlap(a, c)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 20.0), st.floats(0.0, 20.0), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
def test_overlap_hermitian_and_bounded(J1, J2, a1, a2):
    cls = CSClass("fixed-n", 1)
    s = build_state(cls, CSLabel.one(J1, a1), PI)
    t = build_state(cls, CSLabel.one(J2, a2), PI)
    st_ = overlap(s, t)
    assert st_ == pytest.approx(overlap(t, s).conjugate(), abs=1e-14)
    assert abs(st_) <= 1.0 + 1e-12


# --- evolution ----------------------------------------------------------------


@pytest.mark.parametrize("cls", ONE_DEGREE + TWO_DEGREE, ids=str)
def test_evolve_identity_at_zero(cls):
    s = build_state(cls, _label(cls, 1.0, 1.0, 0.3, 0.1), PI)
    assert np.array_equal(evolve(s, 0.0).coeffs, s.coeffs)


@pytest.mark.parametrize("cls", ONE_DEGREE + TWO_DEGREE, ids=str)
def test_evolve_composition(cls):
    s = build_state(cls, _label(cls, 2.0, 1.0, 0.1, 0.2), PI)
    a = evolve(evolve(s, 0.37), 1.21).coeffs
    b = evolve(s, 1.58).coeffs
    assert np.max(np.abs(a - b)) <= 1e-12


@pytest.mark.parametrize("cls", ONE_DEGREE + TWO_DEGREE, ids=str)
def test_evolve_is_temporally_stable(cls):
    # evolving shifts α and reproduces the state built at the shifted label
    p = LayerParams(0.9, 2.0)
    s = build_state(cls, _label(cls, 2.0, 1.5, 0.25, -0.4), p)
    e = evolve(s, 0.8)
    rebuilt = build_state(cls, e.label, p)
    assert e.coeffs.shape == rebuilt.coeffs.shape
    assert np.max(np.abs(e.coeffs - rebuilt.coeffs)) <= 1e-12


def test_evolve_moves_only_conjugate_alpha():
    s = build_state(CSClass("nested-alt-phase"), CSLabel.two(1.0, 1.0, 0.1, 0.2), PI)
    assert evolve(s, 1.0).label.alpha == (0.1, 1.2)
    s = build_state(CSClass("product"), CSLabel.two(1.0, 1.0, 0.1, 0.2), PI)
    assert evolve(s, 1.0).label.alpha == (1.1, 1.2)


# --- action identity ----------------------------------------------------------


@pytest.mark.parametrize(
    "cls, label, target",
    [
        (CSClass("fixed-n-shifted", 0), CSLabel.one(3.0), 3.0),
        (CSClass("fixed-m-shifted", 0), CSLabel.one(3.0), 3.0),
        (CSClass("fixed-n-shifted", 0), CSLabel.one(0.0), 0.0),
        (CSClass("nested-alt-phase-shifted"), CSLabel.two(0.7, 1.5), 1.5),
    ],
)
def test_action_identity(cls, label, target):
    rep = action_identity_check(cls, label, PI)
    assert rep.target == target
    assert rep.abs_err <= 1e-9


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 60.0), st.floats(0.2, 4.0), st.floats(0.5, 4.0))
def test_action_identity_property(J, B, d):
    for cls in (CSClass("fixed-n-shifted", 0), CSClass("fixed-m-shifted", 0)):
        rep = action_identity_check(cls, CSLabel.one(J), LayerParams(B, d))
        assert rep.abs_err <= 1e-9 * max(1.0, J)


@pytest.mark.parametrize("cls", [CSClass("fixed-n", 0), CSClass("product-shifted"), CSClass("nested")], ids=str)
def test_action_identity_unsupported(cls):
    with pytest.raises(UnsupportedClass):
        action_identity_check(cls, _label(cls), PI)


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from(ONE_DEGREE),
    st.floats(0.0, 40.0),
    st.floats(-5.0, 5.0),
    st.floats(0.2, 3.0),
    st.floats(0.5, 4.0),
)
def test_mass_property(cls, J, alpha, B, d):
    s = build_state(cls, CSLabel.one(J, alpha), LayerParams(B, d), eps_tail=1e-10)
    assert abs(s.mass - 1.0) <= 1e-10 + 1e-13

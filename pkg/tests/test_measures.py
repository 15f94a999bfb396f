import itertools
import math

import numpy as np
import pytest
from scipy import integrate, special

import layercs.measures as measures
from layercs.coherent import CSClass
from layercs.errors import DegenerateSpectrum, DomainError
from layercs.measures import (
    WeightForm,
    WeightSpec,
    density_sign_scan,
    gamma_diagonal_closed_form,
    gamma_shortcut_check,
    moment_check,
    resolution_diagonal_check,
    weight_density,
    weight_specs,
)
from layercs.spectrum import LayerParams

PI = LayerParams(1.0, math.pi)

ALL_CLASSES = [
    CSClass("fixed-n", 0),
    CSClass("fixed-n", 2),
    CSClass("fixed-m", 0),
    CSClass("fixed-m", 1),
    CSClass("fixed-n-shifted", 0),
    CSClass("fixed-m-shifted", 0),
    CSClass("product"),
    CSClass("product-shifted"),
    CSClass("nested"),
    CSClass("nested-alt-phase"),
    CSClass("nested-alt-phase-shifted"),
]


@pytest.mark.parametrize(
    "cls, forms",
    [
        (CSClass("fixed-n", 0), [WeightForm.GAMMA]),
        (CSClass("fixed-m", 0), [WeightForm.KL_BESSEL]),
        (CSClass("product"), [WeightForm.HALF_GAUSS, WeightForm.K0_BESSEL]),
        (CSClass("product-shifted"), [WeightForm.EXP_SHIFTED, WeightForm.MEIJER_G]),
        (CSClass("nested-alt-phase-shifted"), [WeightForm.HALF_GAUSS, WeightForm.MEIJER_G]),
    ],
)
def test_form_follows_class(cls, forms):
    assert [w.form for w in weight_specs(cls, PI)] == forms


def test_weight_spec_validation():
    with pytest.raises(DomainError):
        WeightSpec(CSClass("fixed-n", 0), PI, factor=2)
    with pytest.raises(DomainError):
        WeightSpec(CSClass("fixed-n", 0), PI, fixed_index=3)
    with pytest.raises(DomainError):
        WeightSpec(CSClass("nested"), PI, factor=2)


@pytest.mark.parametrize("J", [0.0, -1.0, [1.0, 0.0]])
def test_density_domain(J):
    with pytest.raises(DomainError):
        weight_density(WeightSpec(CSClass("product"), PI), J)


def test_half_gauss_vanishes_at_origin():
    w = WeightSpec(CSClass("product"), PI)
    assert weight_density(w, 1e-300) < 1e-150


@pytest.mark.parametrize(
    "w, J, full, expected",
    [
        # 2 K0(2) at d = π
        (WeightSpec(CSClass("product"), PI, 2), 1.0, False, 2 * special.k0(2.0)),
        (WeightSpec(CSClass("product"), PI, 2), 1.0, False, 0.22778774549906686),
        # γ = 2: J e^{-J/2}/4 times N² = ₁F₁(1;2;1) = e - 1
        (WeightSpec(CSClass("fixed-n", 0), PI), 2.0, False, 2 * math.exp(-1) / 4),
        (WeightSpec(CSClass("fixed-n", 0), PI), 2.0, True, 0.3160602794142794),
        (WeightSpec(CSClass("fixed-n-shifted", 0), LayerParams(0.5, 1.0)), 1.0, False, math.exp(-1)),
        (WeightSpec(CSClass("product"), LayerParams(2.0, 1.0)), 3.0, False, math.sqrt(3 / (16 * math.pi)) * math.exp(-0.75)),
    ],
)
def test_density_reference(w, J, full, expected):
    assert weight_density(w, J, full) == pytest.approx(expected, rel=1e-13)


def test_kl_density_against_scipy_integral_representation():
    # K_{iν}(x) = ∫_0^∞ e^{-x cosh t} cos(νt) dt
    p = LayerParams(1.0, math.pi)
    w = WeightSpec(CSClass("fixed-m", 0), p)
    J = 2.0
    x = 2 * math.sqrt(J)
    nu = 2.0  # 2 Im β with β = 2 + i
    kv, _ = integrate.quad(lambda t: math.exp(-x * math.cosh(t)) * math.cos(nu * t), 0, 20, limit=200, epsabs=1e-15)
    gg = abs(special.gamma(2 + 1j)) ** 2
    assert weight_density(w, J) == pytest.approx(2 * J * kv / gg, rel=1e-9)


def test_meijer_density_against_bessel_closed_form():
    # G^{20}_{02}(y|2,0) = 2 y K₂(2√y)
    w = WeightSpec(CSClass("fixed-m-shifted", 0), PI)
    y = 1.7
    assert weight_density(w, y) == pytest.approx(0.5 * 2 * y * special.kv(2, 2 * math.sqrt(y)), rel=1e-10)


@pytest.mark.parametrize(
    "w, k, target",
    [
        (WeightSpec(CSClass("product"), PI, 1), 1, 3.0),
        (WeightSpec(CSClass("product"), PI, 2), 1, 4.0),
        (WeightSpec(CSClass("fixed-m-shifted", 0), PI), 2, 24.0),
        (WeightSpec(CSClass("fixed-n-shifted", 0), PI), 3, 48.0),
    ],
)
def test_moment_examples(w, k, target):
    rep = moment_check(w, k)
    assert rep.target == pytest.approx(target, rel=1e-14)
    assert rep.rel_err <= 1e-8


def _all_weights(p):
    out = []
    for cls in ALL_CLASSES:
        out.extend(weight_specs(cls, p, row=1))
    return out


@pytest.mark.parametrize("B, d", list(itertools.product([0.5, 1.0, 2.0], [1.0, math.pi])))
def test_moment_grid(B, d):
    for w in _all_weights(LayerParams(B, d)):
        for k in range(7):
            rep = moment_check(w, k)
            assert rep.rel_err <= 1e-6, rep.label


def test_moment_negative_order():
    with pytest.raises(DomainError):
        moment_check(WeightSpec(CSClass("product"), PI), -1)


@pytest.mark.parametrize("n, k", [(0, 0), (0, 3), (2, 5), (1, 8)])
def test_gamma_shortcut(n, k):
    p = LayerParams(0.7, 1.9)
    assert gamma_diagonal_closed_form(n, k, p) == pytest.approx(1.0, rel=1e-12)
    rep = gamma_shortcut_check(n, k, p)
    assert rep.abs_err <= 1e-10


def test_sign_scan_reports_kl_findings():
    # K of imaginary order oscillates as x -> 0; the weight goes negative there
    scan = density_sign_scan(WeightSpec(CSClass("fixed-m", 0), PI))
    assert scan.grid.size == 400
    assert not scan.nonnegative
    assert scan.min_value < 0
    assert np.all(scan.negative_at < 1.0)
    assert np.all(scan.values[scan.grid > 1.0] > 0)


@pytest.mark.parametrize("cls", [CSClass("fixed-n", 0), CSClass("product"), CSClass("fixed-m-shifted", 0)], ids=str)
def test_sign_scan_nonnegative_elsewhere(cls):
    for w in weight_specs(cls, PI):
        assert density_sign_scan(w).nonnegative


@pytest.mark.parametrize(
    "cls, basis_range, tol",
    [
        (CSClass("fixed-n", 0), 1, 1e-7),
        (CSClass("fixed-m-shifted", 0), 3, 1e-6),
        (CSClass("product"), 2, 1e-6),
        (CSClass("fixed-m", 0), 4, 1e-6),
        (CSClass("nested"), 3, 1e-6),
        (CSClass("product-shifted"), 3, 1e-6),
    ],
)
def test_resolution_diagonal(cls, basis_range, tol):
    reps = resolution_diagonal_check(cls, basis_range, p=PI)
    expected = basis_range if cls.tag.one_degree else basis_range**2
    assert len(reps) == expected
    assert all(r.target == 1.0 and r.abs_err <= tol for r in reps)


@pytest.mark.parametrize("br", [0, 13])
def test_resolution_range(br):
    with pytest.raises(DomainError):
        resolution_diagonal_check(CSClass("fixed-n", 0), br)


def test_resolution_fixed_index_mismatch():
    with pytest.raises(DomainError):
        resolution_diagonal_check(CSClass("fixed-n", 0), 2, fixed_index=1)


def test_degenerate_parameters_do_not_block_distinct_frequencies():
    # B=2, d=π makes E(2,0) = E(0,2), yet product states keep distinct (α₁, α₂) frequencies
    p = LayerParams(2.0, math.pi)
    reps = resolution_diagonal_check(CSClass("product"), 3, p=p)
    assert all(r.abs_err <= 1e-6 for r in reps)


def test_guard_refuses_shared_frequencies(monkeypatch):
    # collapse both phase frequencies onto the full energy, as a single-phase labelling would
    from layercs.spectrum import energy_mn

    monkeypatch.setattr(measures, "phase_energy", lambda cls, p, f=1: lambda m, n: energy_mn(m, n, p))
    with pytest.raises(DegenerateSpectrum):
        resolution_diagonal_check(CSClass("product"), 3, p=LayerParams(2.0, math.pi))
    # without a collision the same collapse is harmless
    assert resolution_diagonal_check(CSClass("product"), 2, p=LayerParams(1.0, math.pi * 2**0.25))

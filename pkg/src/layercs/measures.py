"""Weight densities of each coherent-state class and their moment checks.

A resolution of the identity with measure N²(J) λ(J) dJ dα reduces, once the
α-average has removed the off-diagonal terms, to the Stieltjes moment
problem ∫_0^∞ J^k λ(J) dJ = ρ(k). The α-average is a Cesàro limit that is
exactly a Kronecker delta on distinct phase frequencies, so it is applied
symbolically and only the J-integrals are computed numerically.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .coherent import (
    CSClass,
    CSTag,
    _beta_fixed_m,
    _gamma_fixed_n,
    phase_energy,
    rho_energy,
)
from .errors import DegenerateSpectrum, DomainError, UnsupportedClass
from .quadrature import QuadratureConfig, integrate_semi_infinite
from .reports import VerificationReport
from .specfun import bessel_i, bessel_k_array, hyp1f1, hyp1f2, ln_gamma, meijer_g2002
from .spectrum import LayerParams

MOMENT_CONFIG = QuadratureConfig(rel_tol=1e-10)


class WeightForm(str, enum.Enum):
    GAMMA = "gamma-type"
    KL_BESSEL = "kl-bessel"
    HALF_GAUSS = "half-gauss"
    K0_BESSEL = "k0-bessel"
    EXP_SHIFTED = "exp-shifted"
    MEIJER_G = "meijer-g"


_FORMS = {
    CSTag.FIXED_N: (WeightForm.GAMMA,),
    CSTag.FIXED_M: (WeightForm.KL_BESSEL,),
    CSTag.FIXED_N_SHIFTED: (WeightForm.EXP_SHIFTED,),
    CSTag.FIXED_M_SHIFTED: (WeightForm.MEIJER_G,),
    CSTag.PRODUCT: (WeightForm.HALF_GAUSS, WeightForm.K0_BESSEL),
    CSTag.PRODUCT_SHIFTED: (WeightForm.EXP_SHIFTED, WeightForm.MEIJER_G),
    CSTag.NESTED: (WeightForm.HALF_GAUSS, WeightForm.KL_BESSEL),
    CSTag.NESTED_ALT_PHASE: (WeightForm.HALF_GAUSS, WeightForm.KL_BESSEL),
    CSTag.NESTED_ALT_PHASE_SHIFTED: (WeightForm.HALF_GAUSS, WeightForm.MEIJER_G),
}


@dataclass(frozen=True)
class WeightSpec:
    """Bare weight λ of one degree of freedom of a class.

    ``factor`` selects the m-degree (1) or n-degree (2) of a two-degree
    class. ``fixed_index`` is the frozen n or m of a one-degree class, or the
    row m on which a nested n-degree weight depends.
    """

    cls: CSClass
    p: LayerParams
    factor: int = 1
    fixed_index: Optional[int] = None

    def __post_init__(self):
        forms = _FORMS[self.cls.tag]
        if self.factor not in range(1, len(forms) + 1):
            raise DomainError(f"{self.cls} has no weight factor {self.factor}")
        if self.cls.tag.one_degree:
            if self.fixed_index is None:
                object.__setattr__(self, "fixed_index", self.cls.fixed_index)
            elif self.fixed_index != self.cls.fixed_index:
                raise DomainError("fixed_index disagrees with the class")
        elif self.form is WeightForm.KL_BESSEL and self.fixed_index is None:
            raise DomainError(f"{self.cls} factor 2 needs the row index m as fixed_index")

    @property
    def form(self) -> WeightForm:
        return _FORMS[self.cls.tag][self.factor - 1]

    def rho(self, k: int) -> float:
        e = rho_energy(self.cls, self.p, self.factor, row=self.fixed_index)
        out = 1.0
        for j in range(1, k + 1):
            out *= e(j)
        return out


def weight_specs(cls: CSClass, p: LayerParams, row: int = 0) -> list:
    """All weight factors of a class; ``row`` is the m used by a nested KL-Bessel factor."""
    out = []
    for f in range(1, len(_FORMS[cls.tag]) + 1):
        fixed = row if _FORMS[cls.tag][f - 1] is WeightForm.KL_BESSEL and not cls.tag.one_degree else None
        out.append(WeightSpec(cls, p, f, fixed))
    return out


def _bare(w: WeightSpec, J: np.ndarray) -> np.ndarray:
    B, d = w.p.B, w.p.d
    form = w.form
    if form is WeightForm.GAMMA:
        g = _gamma_fixed_n(w.fixed_index, w.p)
        lognorm = g * math.log(2.0 * B) + ln_gamma(g).real
        return np.exp((g - 1.0) * np.log(J) - J / (2.0 * B) - lognorm)
    if form is WeightForm.HALF_GAUSS:
        return np.sqrt(J / (2.0 * math.pi * B**3)) * np.exp(-J / (2.0 * B))
    if form is WeightForm.EXP_SHIFTED:
        return np.exp(-J / (2.0 * B)) / (2.0 * B)
    x = 2.0 * d * np.sqrt(J) / math.pi
    if form is WeightForm.K0_BESSEL:
        return 2.0 * (d / math.pi) ** 4 * J * bessel_k_array(0.0, x)
    if form is WeightForm.KL_BESSEL:
        beta = _beta_fixed_m(w.fixed_index, w.p)
        # Γ(β)Γ(β̄) = |Γ(β)|², order β - β̄ = 2i·Im β
        log_gg = 2.0 * ln_gamma(beta).real
        order = complex(0.0, 2.0 * beta.imag)
        return 2.0 * (d / math.pi) ** 4 * math.exp(-log_gg) * J * bessel_k_array(order, x)
    if form is WeightForm.MEIJER_G:
        y = (d / math.pi) ** 2 * J
        return 0.5 * (d / math.pi) ** 2 * meijer_g2002(y, 2.0, 0.0)
    raise UnsupportedClass(f"unknown weight form {form}")


def _norm_sq(w: WeightSpec, J: np.ndarray) -> np.ndarray:
    """N²(J) of the degree the weight belongs to."""
    B, d = w.p.B, w.p.d
    t = w.cls.tag
    form = w.form
    y = (d / math.pi) ** 2 * J
    if form is WeightForm.GAMMA:
        g = _gamma_fixed_n(w.fixed_index, w.p)
        return np.array([hyp1f1(1.0, g, j / (2 * B)).real for j in J])
    if form is WeightForm.EXP_SHIFTED:
        return np.exp(J / (2.0 * B))
    if form is WeightForm.HALF_GAUSS:
        if t.nested:
            raise UnsupportedClass("the nested N₁² depends on J₂; use the bare weight")
        return np.array([hyp1f1(1.0, 1.5, j / (2 * B)).real for j in J])
    if form is WeightForm.K0_BESSEL:
        return np.array([hyp1f2(1.0, 2.0, 2.0, v).real for v in y])
    if form is WeightForm.KL_BESSEL:
        b = _beta_fixed_m(w.fixed_index, w.p)
        return np.array([hyp1f2(1.0, b, b.conjugate(), v).real for v in y])
    if form is WeightForm.MEIJER_G:
        return np.array([2.0 * bessel_i(2, 2.0 * math.sqrt(v)) / v if v > 0 else 1.0 for v in y])
    raise UnsupportedClass(f"unknown weight form {form}")


def weight_density(w: WeightSpec, J, full: bool = False):
    """λ(J) (``full=False``) or N²(J)·λ(J) (``full=True``); scalar or array J > 0."""
    arr = np.atleast_1d(np.asarray(J, dtype=float))
    if np.any(~(arr > 0)):
        raise DomainError("weight densities are defined for J > 0")
    val = _bare(w, arr)
    if full:
        val = val * _norm_sq(w, arr)
    return float(val[0]) if np.ndim(J) == 0 else val


def moment_check(w: WeightSpec, k: int, cfg: QuadratureConfig = MOMENT_CONFIG) -> VerificationReport:
    """∫ J^k λ(J) dJ against ρ(k).

    For the Gamma-type weight the normalized diagonal ∫ J^k λ dJ / ρ(k) is
    compared to 1 instead, which is the same identity divided through.
    """
    if k < 0:
        raise DomainError("moment order must be nonnegative")

    def f(J):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
            out = np.where(J > 0, J**k * _bare(w, np.where(J > 0, J, 1.0)), 0.0)
        return out

    quad = integrate_semi_infinite(f, cfg)
    rho = w.rho(k)
    label = f"{w.cls} {w.form.value} k={k}"
    if w.form is WeightForm.GAMMA:
        return VerificationReport.compare(1.0, float(quad) / rho, quad, label, rho=rho)
    return VerificationReport.compare(rho, float(quad), quad, label)


def gamma_diagonal_closed_form(n_fixed: int, k: int, p: LayerParams) -> float:
    """∫ J^{k+γ-1} e^{-J/2B} dJ / ((2B)^{k+γ} (γ)_k Γ(γ)) via ∫ x^{s-1}e^{-ax} dx = a^{-s}Γ(s).

    Equals Γ(k+γ)/((γ)_k Γ(γ)), which is 1 up to rounding.
    """
    g = _gamma_fixed_n(n_fixed, p)
    log_poch = sum(math.log(g + j) for j in range(k))
    return math.exp(ln_gamma(k + g).real - ln_gamma(g).real - log_poch)


def gamma_shortcut_check(n_fixed: int, k: int, p: LayerParams, cfg: QuadratureConfig = MOMENT_CONFIG) -> VerificationReport:
    """Quadrature diagonal of the Gamma-type weight against its closed form."""
    w = WeightSpec(CSClass(CSTag.FIXED_N, n_fixed), p)
    quad = moment_check(w, k, cfg)
    return VerificationReport.compare(
        gamma_diagonal_closed_form(n_fixed, k, p), quad.computed, quad.quadrature, f"gamma shortcut k={k}"
    )


@dataclass(frozen=True)
class SignScan:
    grid: np.ndarray
    values: np.ndarray
    negative_at: np.ndarray

    @property
    def nonnegative(self) -> bool:
        return self.negative_at.size == 0

    @property
    def min_value(self) -> float:
        return float(np.min(self.values))


def density_sign_scan(w: WeightSpec, J_min: float = 1e-6, J_max: float = 1e3, points: int = 400) -> SignScan:
    """Evaluate λ on a log-spaced grid and report where it is negative.

    K of imaginary order oscillates as its argument goes to 0, so the
    KL-Bessel weight changes sign near J = 0; the scan reports those points
    rather than clipping them.
    """
    grid = np.geomspace(J_min, J_max, points)
    vals = weight_density(w, grid)
    return SignScan(grid, vals, grid[vals < 0])


def _guard(cls: CSClass, p: LayerParams, indices) -> None:
    """Refuse classes where two basis states share every phase frequency.

    The α-average removes the (k, k') term whenever some α multiplies
    different frequencies in k and k'. Only identical frequency vectors
    survive, and then the diagonal argument breaks down.
    """
    seen = {}
    for idx in indices:
        if cls.tag.one_degree:
            key = (round(float(phase_energy(cls, p)(idx[0])), 9),)
        else:
            key = tuple(round(float(phase_energy(cls, p, f)(idx[0], idx[1])), 9) for f in (1, 2))
        if key in seen and seen[key] != idx:
            raise DegenerateSpectrum(f"{cls}: basis states {seen[key]} and {idx} share phase frequencies {key}")
        seen[key] = idx


def resolution_diagonal_check(
    cls: CSClass,
    basis_range: int,
    cfg: QuadratureConfig = MOMENT_CONFIG,
    p: LayerParams = LayerParams(),
    fixed_index: Optional[int] = None,
) -> list:
    """∫ |⟨ψ_k|J, α⟩|² N²λ dJ = 1 for each basis index below ``basis_range``.

    One-degree classes integrate P_k(J)·N²(J)λ(J) = J^k λ(J)/ρ(k). Two-degree
    classes factorize: the (m, n) entry is the product of the m-moment of the
    first weight and the n-moment of the second (for nested classes the
    second weight is the one attached to row m).
    """
    if not 1 <= basis_range <= 12:
        raise DomainError("basis_range must lie in [1, 12]")
    if cls.tag.one_degree and fixed_index is not None and fixed_index != cls.fixed_index:
        raise DomainError("fixed_index disagrees with the class")
    reports = []
    if cls.tag.one_degree:
        _guard(cls, p, [(k,) for k in range(basis_range)])
        w = WeightSpec(cls, p)
        for k in range(basis_range):
            # |<ψ_k|J,α>|² = J^k/(ρ(k) N²) against N²λ: N² cancels identically
            rho = w.rho(k)

            def f(J, k=k, rho=rho):
                J = np.asarray(J, dtype=float)
                out = np.zeros_like(J)
                pos = J > 0
                with np.errstate(over="ignore", under="ignore"):
                    out[pos] = J[pos] ** k * _bare(w, J[pos]) / rho
                return out

            quad = integrate_semi_infinite(f, cfg)
            reports.append(VerificationReport.compare(1.0, float(quad), quad, f"{cls} diag k={k}"))
        return reports

    idx = [(m, n) for m in range(basis_range) for n in range(basis_range)]
    _guard(cls, p, idx)
    w1 = weight_specs(cls, p)[0]
    first = [moment_check(w1, m, cfg) for m in range(basis_range)]
    for m in range(basis_range):
        w2 = weight_specs(cls, p, row=m)[1]
        if m == 0 or cls.tag.nested:
            second = [moment_check(w2, n, cfg) for n in range(basis_range)]
        for n in range(basis_range):
            a = first[m].computed / first[m].target
            b = second[n].computed / second[n].target
            reports.append(
                VerificationReport.compare(1.0, a * b, second[n].quadrature, f"{cls} diag (m,n)=({m},{n})")
            )
    return reports

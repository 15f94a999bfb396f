"""Weighting distributions, energy moments and the Mandel parameter.

For a state with probabilities P(k) over number eigenvalues ν_k,

    Q = (⟨n²⟩ - ⟨n⟩² - ⟨n⟩) / ⟨n⟩ = ⟨n²⟩/⟨n⟩ - ⟨n⟩ - 1.

Every closed form below is paired with a brute-force series over the same
probabilities, which serves as the oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coherent import (
    CSClass,
    CSLabel,
    CSTag,
    _beta_fixed_m,
    _check_arity,
    _gamma_fixed_n,
    _nested_log_n1,
    normalization,
    normalization_factors,
    rho_energy,
    row_normalization,
)
from .errors import DomainError, NonConvergence, UnsupportedClass
from .specfun import hyp1f2, ln_hyp1f1
from .spectrum import LayerParams

MAX_TERMS = 100_000
_TERM_EPS = 1e-17
_RESCALE = 1e100
_LOG_RESCALE = math.log(_RESCALE)


@dataclass(frozen=True)
class StatReport:
    mean_n: float
    mean_n2: float
    mandel_q: float
    closed_form_used: bool
    oracle_deviation: float
    oracle_q: float = math.nan

    def to_dict(self) -> dict:
        return {
            "mean_n": self.mean_n,
            "mean_n2": self.mean_n2,
            "mandel_q": self.mandel_q,
            "closed_form_used": self.closed_form_used,
            "oracle_deviation": self.oracle_deviation,
            "oracle_q": self.oracle_q,
        }


# --- brute-force series -------------------------------------------------------


def _series_moments(J: float, energy: Callable, f: Callable):
    """(log Σ w_k, ⟨f⟩, ⟨f²⟩) with w_k = J^k/(e_1⋯e_k).

    Summation stops past the peak (e_k > 2J) once both w_k and w_k·f_k² are
    below 1e-17 of their accumulated sums.
    """
    f0 = float(f(0))
    if J == 0.0:
        return 0.0, f0, f0 * f0
    # w is the current weight in units of exp(scale); the multiplicative
    # recurrence keeps the relative error near k ulps
    w = 1.0
    s0, s1, s2 = 1.0, f0, f0 * f0
    scale = 0.0
    for k in range(1, MAX_TERMS):
        e = float(energy(k))
        w *= J / e
        if w > _RESCALE:
            w, s0, s1, s2 = w / _RESCALE, s0 / _RESCALE, s1 / _RESCALE, s2 / _RESCALE
            scale += _LOG_RESCALE
        fk = float(f(k))
        s0 += w
        s1 += w * fk
        s2 += w * fk * fk
        if e > 2.0 * J and w <= _TERM_EPS * s0 and w * fk * fk <= _TERM_EPS * abs(s2):
            break
    else:
        raise NonConvergence(f"moment series did not settle within {MAX_TERMS} terms at J={J}")
    return math.log(s0) + scale, s1 / s0, s2 / s0


def _number_factors(cls: CSClass, p: LayerParams):
    """Number eigenvalues: ν(k) for one degree, (ν₁(m), ν₂(m, n)) for two."""
    t = cls.tag
    if t.one_degree:
        return rho_energy(cls, p)
    first = rho_energy(cls, p, 1)
    if t.nested:
        return first, lambda m: rho_energy(cls, p, 2, row=m)
    second = rho_energy(cls, p, 2)
    return first, lambda m: second


def _oracle_moments(cls: CSClass, label: CSLabel, p: LayerParams):
    t = cls.tag
    if t.one_degree:
        nu = _number_factors(cls, p)
        _, m1, m2 = _series_moments(label.J[0], rho_energy(cls, p), nu)
        return m1, m2
    J1, J2 = label.J
    nu1, nu2 = _number_factors(cls, p)
    if not t.nested:
        _, a1, a2 = _series_moments(J1, rho_energy(cls, p, 1), nu1)
        _, b1, b2 = _series_moments(J2, rho_energy(cls, p, 2), nu2(0))
        return a1 * b1, a2 * b2
    # rows carry weight J₁^m/(ρ₂(m) N₂(J₂,m)²)
    e1 = rho_energy(cls, p, 1)
    lnJ1 = math.log(J1) if J1 > 0 else -math.inf
    log_u = 0.0
    log_W = -math.inf
    acc1 = acc2 = 0.0
    scale = None
    for m in range(MAX_TERMS):
        if m > 0:
            if J1 == 0.0:
                break
            log_u += lnJ1 - math.log(float(e1(m)))
        ls0, r1, r2 = _series_moments(J2, rho_energy(cls, p, 2, row=m), nu2(m))
        lw = log_u - ls0
        if scale is None:
            scale = lw
        if lw > scale:
            shrink = math.exp(scale - lw)
            acc1 *= shrink
            acc2 *= shrink
            scale = lw
        w = math.exp(lw - scale)
        v = float(nu1(m))
        acc1 += w * v * r1
        acc2 += w * v * v * r2
        log_W = float(np.logaddexp(log_W, lw))
        if m > 0 and float(e1(m)) > 2.0 * J1 and log_u - log_W < math.log(_TERM_EPS) and w * v * v * r2 <= _TERM_EPS * acc2:
            break
    W = math.exp(log_W - scale)
    return acc1 / W, acc2 / W


def _q_from_moments(m1: float, m2: float) -> float:
    if m1 == 0.0:
        return math.nan
    return m2 / m1 - m1 - 1.0


# --- closed forms -------------------------------------------------------------


def _kummer_ratios(y: float, gamma: float):
    """₁F₁(2;γ+1;y)/₁F₁(1;γ;y) and ₁F₁(3;γ+2;y)/₁F₁(1;γ;y), formed in log space."""
    l1 = ln_hyp1f1(1.0, gamma, y)
    return math.exp(ln_hyp1f1(2.0, gamma + 1.0, y) - l1), math.exp(ln_hyp1f1(3.0, gamma + 2.0, y) - l1)


def _landau_closed(J: float, gamma: float, omega: float, B: float):
    """⟨n⟩, ⟨n²⟩ and Q for eigenvalues 2Bm + ω and ρ(m) = (2B)^m (γ)_m.

    The published expressions are homogeneous in F₁, F₂, F₃, so they are
    evaluated with every F divided by F₁; this keeps large J/2B finite.
    """
    r2, r3 = _kummer_ratios(J / (2.0 * B), gamma)
    g = gamma
    mean = J / g * r2 + omega
    mean2 = 2 * J * (B + omega) / g * r2 + 2 * J * J / (g * (g + 1)) * r3 + omega**2
    with np.errstate(divide="ignore", invalid="ignore"):
        num = 2 * J * (B + omega) * (g + 1) * r2 + 2 * J * J * r3 + g * (g + 1) * omega**2
        den = (g + 1) * (J * r2 + g * omega)
        q = np.float64(num) / np.float64(den) - J * r2 / g - omega - 1.0
    return mean, mean2, float(q)


def _landau_m_moments(J: float, gamma: float, B: float):
    """⟨m⟩ and ⟨m²⟩ under ρ(m) = (2B)^m (γ)_m."""
    y = J / (2.0 * B)
    r2, r3 = _kummer_ratios(y, gamma)
    m1 = y / gamma * r2
    m2 = y / gamma * r2 + 2 * y * y / (gamma * (gamma + 1)) * r3
    return m1, m2


def _layer_q12(J: float, b1, b2, p: LayerParams):
    """Q₁ = ⟨(n+1)²⟩, Q₂ = ⟨(n+1)⁴⟩ under ρ(n) = q^n (b1)_n (b2)_n.

    With b2 = conj(b1) this is the fixed-m case; (1, 3) gives the shifted
    layer sequence q·n(n+2); (2, 2) gives the product layer factor.
    """
    x = p.d**2 * J / math.pi**2
    b1, b2 = complex(b1), complex(b2)
    F = lambda a, s: hyp1f2(a, b1 + s, b2 + s, x).value
    bb = b1 * b2
    F1 = F(1.0, 0)
    q1 = (F(2.0, 0) + 2 * x / bb * F(3.0, 1)) / F1
    q2 = (
        (2 * x + 1) * F(2.0, 0)
        - 2 * x * (bb - x - 7) / bb * F(3.0, 1)
        - 6 * x * x * (b1 + b2 - 5) / (bb * (b1 + 1) * (b2 + 1)) * F(4.0, 2)
    ) / F1
    return q1.real, q2.real


def _layer_params(cls: CSClass, p: LayerParams):
    """(b1, b2, constant) so that ν(n) = constant + q(n+1)²."""
    t = cls.tag
    if t is CSTag.FIXED_M:
        b = _beta_fixed_m(cls.fixed_index, p)
        return b, b.conjugate(), p.B * (2 * cls.fixed_index + 1)
    if t in (CSTag.FIXED_M_SHIFTED, CSTag.PRODUCT_SHIFTED):
        return 1.0, 3.0, -p.q
    if t is CSTag.PRODUCT:
        return 2.0, 2.0, 0.0
    raise UnsupportedClass(f"{cls} has no layer factor")


def _closed_moments(cls: CSClass, label: CSLabel, p: LayerParams):
    """(⟨n⟩, ⟨n²⟩, Q) from the closed forms."""
    t, B, q = cls.tag, p.B, p.q
    if t is CSTag.FIXED_N:
        n = cls.fixed_index
        return _landau_closed(label.J[0], _gamma_fixed_n(n, p), B + q * (n + 1) ** 2, B)
    if t is CSTag.FIXED_N_SHIFTED:
        return _landau_closed(label.J[0], 1.0, 0.0, B)
    if t in (CSTag.FIXED_M, CSTag.FIXED_M_SHIFTED):
        b1, b2, c = _layer_params(cls, p)
        q1, q2 = _layer_q12(label.J[0], b1, b2, p)
        mean = c + q * q1
        mean2 = c * c + 2 * c * q * q1 + q * q * q2
        return mean, mean2, _q_from_moments(mean, mean2)
    if t is CSTag.PRODUCT:
        c = _product_components(label, p)
        Q3, Q4, Q5, Q6 = c["Q3"], c["Q4"], c["Q5"], c["Q6"]
        mean = B * q * Q4 * (2 * Q3 + 1)
        mean2 = B * B * q * q * Q6 * (4 * Q5 + 4 * Q3 + 1)
        Q = B * q * Q6 * (4 * Q5 + 4 * Q3 + 1) / (Q4 * (2 * Q3 + 1)) - B * q * Q4 * (2 * Q3 + 1) - 1
        return mean, mean2, Q
    if t is CSTag.PRODUCT_SHIFTED:
        a1, a2, _ = _landau_closed(label.J[0], 1.0, 0.0, B)
        q1, q2 = _layer_q12(label.J[1], 1.0, 3.0, p)
        c = -q
        b1 = c + q * q1
        b2 = c * c + 2 * c * q * q1 + q * q * q2
        return a1 * b1, a2 * b2, _q_from_moments(a1 * b1, a2 * b2)
    raise UnsupportedClass(f"{cls}: no closed form for the moments")


def _product_components(label: CSLabel, p: LayerParams) -> dict:
    m1, m2 = _landau_m_moments(label.J[0], 1.5, p.B)
    q4, q6 = _layer_q12(label.J[1], 2.0, 2.0, p)
    return {"Q3": m1, "Q4": q4, "Q5": m2, "Q6": q6}


# --- public API ---------------------------------------------------------------


def prob(cls: CSClass, k, label: CSLabel, p: LayerParams) -> float:
    """Probability of the basis state ``k`` (an index, or (m, n) for two degrees)."""
    _check_arity(cls, label)
    t = cls.tag
    if t.one_degree:
        return math.exp(_log_weight(label.J[0], rho_energy(cls, p), int(k)) - math.log(normalization(cls, label, p)))
    m, n = (int(v) for v in k)
    J1, J2 = label.J
    lu = _log_weight(J1, rho_energy(cls, p, 1), m)
    if t.nested:
        lv = _log_weight(J2, rho_energy(cls, p, 2, row=m), n)
        ln2 = math.log(row_normalization(cls, m, J2, p))
        return math.exp(lu - ln2 + lv - ln2 - _nested_log_n1(cls, J1, J2, p))
    f = normalization_factors(cls, label, p)
    lv = _log_weight(J2, rho_energy(cls, p, 2), n)
    return math.exp(lu - math.log(f["N1_2"]) + lv - math.log(f["N2_2"]))


def _log_weight(J: float, energy: Callable, k: int) -> float:
    if k < 0:
        raise DomainError("index must be nonnegative")
    if k == 0:
        return 0.0
    if J == 0.0:
        return -math.inf
    ks = np.arange(1, k + 1)
    return float(k * math.log(J) - np.sum(np.log(np.asarray(energy(ks), dtype=float))))


def mandel_q(cls: CSClass, label: CSLabel, p: LayerParams, tol: float = 1e-8) -> StatReport:
    """Mandel parameter from the closed form (when one exists) and from the series oracle.

    Nested classes have no closed form and report the oracle alone. The
    deviation is |Q_closed - Q_oracle| / (1 + |Q_oracle|), so values of Q
    near zero are compared absolutely. A shifted class at J = 0 has ⟨n⟩ = 0
    and Q is undefined (nan).
    """
    _check_arity(cls, label)
    o1, o2 = _oracle_moments(cls, label, p)
    q_oracle = _q_from_moments(o1, o2)
    if cls.tag.nested:
        return StatReport(o1, o2, q_oracle, False, 0.0, q_oracle)
    c1, c2, q_closed = _closed_moments(cls, label, p)
    if math.isnan(q_closed) and math.isnan(q_oracle):
        dev = 0.0
    else:
        dev = abs(q_closed - q_oracle) / (1.0 + abs(q_oracle))
    return StatReport(c1, c2, q_closed, True, dev, q_oracle)


def q_components(cls: CSClass, label: CSLabel, p: LayerParams) -> dict:
    """Closed-form and series values of the auxiliary sums.

    Fixed-m classes give Q₁ = ⟨(n+1)²⟩ and Q₂ = ⟨(n+1)⁴⟩; the product class
    gives Q₃ = ⟨m⟩, Q₅ = ⟨m²⟩ for the Landau factor and Q₄, Q₆ (the Q₁, Q₂
    forms at β = β̄ = 2) for the layer factor. Series values carry the suffix
    ``_series``.
    """
    _check_arity(cls, label)
    t = cls.tag
    sq = lambda n: (n + 1.0) ** 2
    if t in (CSTag.FIXED_M, CSTag.FIXED_M_SHIFTED):
        b1, b2, _ = _layer_params(cls, p)
        q1, q2 = _layer_q12(label.J[0], b1, b2, p)
        _, s1, s2 = _series_moments(label.J[0], rho_energy(cls, p), sq)
        return {"Q1": q1, "Q1_series": s1, "Q2": q2, "Q2_series": s2}
    if t is CSTag.PRODUCT:
        out = _product_components(label, p)
        _, s3, s5 = _series_moments(label.J[0], rho_energy(cls, p, 1), float)
        _, s4, s6 = _series_moments(label.J[1], rho_energy(cls, p, 2), sq)
        out.update({"Q3_series": s3, "Q4_series": s4, "Q5_series": s5, "Q6_series": s6})
        return {k: out[k] for k in sorted(out)}
    raise UnsupportedClass(f"{cls} has no published auxiliary sums")


def distribution_table(cls: CSClass, label: CSLabel, p: LayerParams, k_max: int):
    """Nonzero probabilities up to ``k_max`` (per degree), sorted by index."""
    if k_max < 0:
        raise DomainError("k_max must be nonnegative")
    if cls.tag.one_degree:
        rows = [(k, prob(cls, k, label, p)) for k in range(k_max + 1)]
    else:
        rows = [((m, n), prob(cls, (m, n), label, p)) for m in range(k_max + 1) for n in range(k_max + 1)]
    return [(k, v) for k, v in rows if v > 0.0]

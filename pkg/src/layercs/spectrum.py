"""Spectrum and eigenfunctions of the free magnetic Schrödinger operator on a layer.

Units are e = ħ = 2M = c = 1, so the Landau spacing is 2B and the transverse
mode energies are (π(n+1)/d)².
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import DomainError
from .quadrature import QuadratureConfig, integrate_semi_infinite
from .reports import VerificationReport
from .specfun import ln_gamma, pochhammer


@dataclass(frozen=True)
class LayerParams:
    """Magnetic intensity ``B`` and layer width ``d``."""

    B: float = 1.0
    d: float = math.pi

    def __post_init__(self):
        for name in ("B", "d"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be finite and positive, got {v!r}")

    @property
    def q(self) -> float:
        """Transverse quantum π²/d²."""
        return (math.pi / self.d) ** 2

    def to_dict(self) -> dict:
        return {"B": float(self.B), "d": float(self.d)}


@dataclass(frozen=True)
class QuantumNumbers:
    m: int
    l: int = 0
    n: int = 0

    def __post_init__(self):
        if self.m < 0 or self.n < 0:
            raise DomainError(f"need m >= 0 and n >= 0, got m={self.m}, n={self.n}")


def landau_energy(m, p: LayerParams):
    """e_m = B(2m+1)."""
    return p.B * (2 * np.asarray(m) + 1) if np.ndim(m) else p.B * (2 * m + 1)


def layer_energy(n, p: LayerParams):
    """ε_n = (π(n+1)/d)²."""
    return p.q * (np.asarray(n) + 1) ** 2 if np.ndim(n) else p.q * (n + 1) ** 2


def energy_mn(m, n, p: LayerParams):
    """E(m, n) = B(2m+1) + (π(n+1)/d)²; broadcasts over array indices."""
    return landau_energy(m, p) + layer_energy(n, p)


def energy_full(q: QuantumNumbers, p: LayerParams) -> float:
    """E(m, l, n) = B(2m + l + |l| + 1) + (π(n+1)/d)²."""
    return p.B * (2 * q.m + q.l + abs(q.l) + 1) + p.q * (q.n + 1) ** 2


# --- eigenfunctions -----------------------------------------------------------


def kummer_polynomial(m: int, gamma: float, xi):
    """1F1(-m; gamma; xi) as a polynomial, through the Laguerre three-term recurrence.

    L_m^{(a)}(xi) with a = gamma - 1 is built upward from L_0 = 1 and then
    divided by its value at 0, binom(m + a, m) = (gamma)_m / m!.
    """
    xi = np.asarray(xi, dtype=float)
    a = gamma - 1.0
    prev = np.ones_like(xi)
    if m == 0:
        return prev
    cur = 1.0 + a - xi
    for k in range(1, m):
        prev, cur = cur, ((2 * k + 1 + a - xi) * cur - (k + a) * prev) / (k + 1)
    binom = pochhammer(gamma, m).real / math.factorial(m)
    return cur / binom


def _radial_log_norm(m: int, absl: int, B: float) -> float:
    """log of X with ∫ X r^{2|l|} e^{-Br²/2} F² r dr = 1."""
    g = absl + 1
    return (
        math.log(2.0)
        + g * math.log(B / 2.0)
        + math.log(pochhammer(g, m).real)
        - math.lgamma(m + 1)
        - ln_gamma(g).real
    )


def radial_function(m: int, l: int, p: LayerParams, r):
    """Normalized radial factor R_{m,l}(r) with ∫_0^∞ R² r dr = 1."""
    r = np.asarray(r, dtype=float)
    absl = abs(l)
    x = 0.5 * p.B * r * r
    with np.errstate(divide="ignore", invalid="ignore"):
        logpow = np.where(r > 0, absl * np.log(np.where(r > 0, r, 1.0)), 0.0 if absl == 0 else -np.inf)
    amp = np.exp(0.5 * _radial_log_norm(m, absl, p.B) + logpow - 0.5 * x)
    return amp * kummer_polynomial(m, absl + 1.0, x)


def eigenfunction(q: QuantumNumbers, p: LayerParams, point) -> complex:
    """Ψ_{mln}(r, θ, z) = R_{m,l}(r) e^{ilθ}/√(2π) · √(2/d) sin((n+1)πz/d).

    The radial power is r^{|l|}; the square of the overall constant equals
    (B/2)^{|l|+1} · 2(|l|+1)_m / (π d m! Γ(|l|+1)).
    """
    r, theta, z = point
    if r < 0 or not (0.0 <= z <= p.d):
        raise DomainError(f"point {point} outside the layer")
    radial = float(radial_function(q.m, q.l, p, r))
    angular = complex(math.cos(q.l * theta), math.sin(q.l * theta)) / math.sqrt(2.0 * math.pi)
    transverse = math.sqrt(2.0 / p.d) * math.sin((q.n + 1) * math.pi * z / p.d)
    return radial * angular * transverse


def orthonormality_check(
    q1: QuantumNumbers,
    q2: QuantumNumbers,
    p: LayerParams,
    cfg: QuadratureConfig = QuadratureConfig(rel_tol=1e-12, abs_tol=1e-14),
) -> VerificationReport:
    """⟨Ψ_{q1}|Ψ_{q2}⟩ against the Kronecker delta.

    The θ and z integrals are done analytically: the θ factor is δ_{l l'} and
    the z factor is δ_{n n'} since the χ_n are orthonormal on [0, d]. The
    radial integral is computed by quadrature whenever l = l'.
    """
    target = 1.0 if q1 == q2 else 0.0
    theta_factor = 1.0 if q1.l == q2.l else 0.0
    z_factor = 1.0 if q1.n == q2.n else 0.0
    label = f"<{q1.m},{q1.l},{q1.n}|{q2.m},{q2.l},{q2.n}>"
    if theta_factor == 0.0:
        return VerificationReport.compare(target, 0.0, None, label, theta_factor=0.0, z_factor=z_factor)

    def f(r):
        return radial_function(q1.m, q1.l, p, r) * radial_function(q2.m, q2.l, p, r) * r

    quad = integrate_semi_infinite(f, cfg)
    radial = float(quad)
    return VerificationReport.compare(
        target,
        radial * theta_factor * z_factor,
        quad,
        label,
        radial=radial,
        theta_factor=theta_factor,
        z_factor=z_factor,
    )


# --- degeneracy -------------------------------------------------------------


@dataclass(frozen=True)
class DegeneracyReport:
    ratio: float
    ratio_is_rational_within: Optional[tuple]
    colliding_pairs: list = field(default_factory=list)
    levels: list = field(default_factory=list)

    @property
    def degenerate(self) -> bool:
        return bool(self.colliding_pairs)


def rational_approximation(x: float, q_max: int = 10**6, rel_tol: float = 8 * np.finfo(float).eps):
    """(p, q) with q <= q_max and |x - p/q| <= rel_tol·|x|, or None.

    Uses the best rational approximation from the continued-fraction
    convergents; floating input cannot prove irrationality, so None only
    means no small-denominator match was found.
    """
    frac = Fraction(x).limit_denominator(q_max)
    if abs(x - frac.numerator / frac.denominator) <= rel_tol * abs(x):
        return (frac.numerator, frac.denominator)
    return None


def degeneracy_probe(
    p: LayerParams, m_max: int, n_max: int, tol: float = 1e-9, q_max: int = 10**6
) -> DegeneracyReport:
    """Enumerate E(m, n) for m <= m_max, n <= n_max and list coincident levels.

    Two levels collide when |E - E'| <= tol·(1 + max(|E|, |E'|)). The ratio
    π²/(B d²) is tested for a rational value with denominator <= q_max.
    """
    if m_max < 0 or n_max < 0:
        raise DomainError("bounds must be nonnegative")
    ratio = p.q / p.B
    levels = sorted(
        ((float(energy_mn(m, n, p)), (m, n)) for m in range(m_max + 1) for n in range(n_max + 1)),
        key=lambda t: (t[0], t[1]),
    )
    pairs = []
    for i, (e1, k1) in enumerate(levels):
        for e2, k2 in levels[i + 1 :]:
            if e2 - e1 > tol * (1.0 + max(abs(e1), abs(e2))):
                break
            pairs.append((k1, k2) if k1 > k2 else (k2, k1))
    pairs.sort()
    return DegeneracyReport(
        ratio=ratio,
        ratio_is_rational_within=rational_approximation(ratio, q_max),
        colliding_pairs=pairs,
        levels=[(k[0], k[1], e) for e, k in levels],
    )

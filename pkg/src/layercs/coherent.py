"""Temporally stable coherent states on the layer spectrum.

Every class is a Gazeau-Klauder type superposition

    c_k = N^{-1} J^{k/2} e^{-i E_k α} / sqrt(ρ(k)),   ρ(k) = e_1 e_2 ... e_k,

held as a finite coefficient array with a certified bound on the discarded
probability. One-degree classes freeze n or m; two-degree classes index a grid
(m, n). The ``*_SHIFTED`` tags use the spectrum shifted so the ground level is 0.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ClassMismatch, DomainError, NonConvergence, UnsupportedClass
from .reports import VerificationReport
from .specfun import bessel_i, hyp0f1, hyp1f1, hyp1f2, pochhammer
from .spectrum import LayerParams

MAX_INDEX = 100_000
# terms this far below the running sum no longer change a double
_NEGLIGIBLE = math.log(1e-18)


class CSTag(str, enum.Enum):
    FIXED_N = "fixed-n"
    FIXED_M = "fixed-m"
    FIXED_N_SHIFTED = "fixed-n-shifted"
    FIXED_M_SHIFTED = "fixed-m-shifted"
    PRODUCT = "product"
    PRODUCT_SHIFTED = "product-shifted"
    NESTED = "nested"
    NESTED_ALT_PHASE = "nested-alt-phase"
    NESTED_ALT_PHASE_SHIFTED = "nested-alt-phase-shifted"

    @property
    def one_degree(self) -> bool:
        return self in _ONE_DEGREE

    @property
    def shifted(self) -> bool:
        return self.value.endswith("shifted")

    @property
    def nested(self) -> bool:
        return self.value.startswith("nested")


_ONE_DEGREE = {CSTag.FIXED_N, CSTag.FIXED_M, CSTag.FIXED_N_SHIFTED, CSTag.FIXED_M_SHIFTED}


@dataclass(frozen=True)
class CSClass:
    """Class tag plus the frozen quantum number for one-degree classes."""

    tag: CSTag
    fixed_index: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "tag", CSTag(self.tag))
        if self.tag.one_degree:
            if self.fixed_index is None or int(self.fixed_index) != self.fixed_index or self.fixed_index < 0:
                raise DomainError(f"{self.tag.value} needs a nonnegative integer fixed_index")
            object.__setattr__(self, "fixed_index", int(self.fixed_index))
        elif self.fixed_index is not None:
            raise DomainError(f"{self.tag.value} takes no fixed_index")

    def __str__(self):
        return self.tag.value if self.fixed_index is None else f"{self.tag.value}[{self.fixed_index}]"


@dataclass(frozen=True)
class CSLabel:
    """Action variables J (one or two) and the matching phase labels α."""

    J: tuple
    alpha: tuple

    def __post_init__(self):
        J = tuple(float(j) for j in np.atleast_1d(self.J))
        alpha = tuple(float(a) for a in np.atleast_1d(self.alpha))
        if len(J) not in (1, 2) or len(J) != len(alpha):
            raise DomainError("label needs one (J, alpha) pair or two of each")
        if any(not (j >= 0 and math.isfinite(j)) for j in J):
            raise DomainError(f"J must be finite and nonnegative, got {J}")
        if any(not math.isfinite(a) for a in alpha):
            raise DomainError("alpha must be finite")
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def one(cls, J: float, alpha: float = 0.0) -> "CSLabel":
        return cls((J,), (alpha,))

    @classmethod
    def two(cls, J1: float, J2: float, alpha1: float = 0.0, alpha2: float = 0.0) -> "CSLabel":
        return cls((J1, J2), (alpha1, alpha2))

    @property
    def arity(self) -> int:
        return len(self.J)

    def to_dict(self) -> dict:
        if self.arity == 1:
            return {"J": self.J[0], "alpha": self.alpha[0]}
        return {"J1": self.J[0], "J2": self.J[1], "alpha1": self.alpha[0], "alpha2": self.alpha[1]}


def _check_arity(cls: CSClass, label: CSLabel):
    want = 1 if cls.tag.one_degree else 2
    if label.arity != want:
        raise DomainError(f"{cls} needs a label with {want} action variable(s), got {label.arity}")


# --- energies and rho ---------------------------------------------------------


def _E(p, m, n):
    return p.B * (2 * m + 1) + p.q * (n + 1) ** 2


def rho_energy(cls: CSClass, p: LayerParams, factor: int = 1, row: Optional[int] = None) -> Callable:
    """k -> k-th factor of ρ for the class (``factor`` 1 = m-degree, 2 = n-degree).

    For nested classes ``row`` is the m index that the n-degree depends on.
    """
    t, B, q = cls.tag, p.B, p.q
    if t is CSTag.FIXED_N:
        n = cls.fixed_index
        return lambda k: _E(p, k, n)
    if t is CSTag.FIXED_M:
        m = cls.fixed_index
        return lambda k: _E(p, m, k)
    if t is CSTag.FIXED_N_SHIFTED:
        return lambda k: 2.0 * B * k
    if t is CSTag.FIXED_M_SHIFTED:
        return lambda k: q * k * (k + 2)
    if factor == 1:
        if t is CSTag.PRODUCT_SHIFTED:
            return lambda k: 2.0 * B * k
        return lambda k: B * (2 * k + 1)
    if t is CSTag.PRODUCT:
        return lambda k: q * (k + 1) ** 2
    if t in (CSTag.PRODUCT_SHIFTED, CSTag.NESTED_ALT_PHASE_SHIFTED):
        return lambda k: q * k * (k + 2)
    if row is None:
        raise DomainError(f"{cls} needs the row index m for its n-degree")
    return lambda k: _E(p, row, k)


def phase_energy(cls: CSClass, p: LayerParams, factor: int = 1):
    """(m, n) -> frequency multiplying α (factor 1) or α₂ (factor 2); k for one-degree."""
    t, B, q = cls.tag, p.B, p.q
    if t.one_degree:
        # same sequence as the rho factors, read from k = 0
        return rho_energy(cls, p)
    if factor == 1:
        if t is CSTag.PRODUCT_SHIFTED:
            return lambda m, n: 2.0 * B * m + 0.0 * n
        return lambda m, n: B * (2 * m + 1) + 0.0 * n
    if t in (CSTag.PRODUCT, CSTag.NESTED):
        return lambda m, n: q * (n + 1) ** 2 + 0.0 * m
    if t in (CSTag.PRODUCT_SHIFTED, CSTag.NESTED_ALT_PHASE_SHIFTED):
        return lambda m, n: q * n * (n + 2) + 0.0 * m
    return lambda m, n: _E(p, m, n)  # NESTED_ALT_PHASE


def _moving(tag: CSTag) -> tuple:
    """Which α's advance under time evolution."""
    if tag.one_degree:
        return (True,)
    if tag in (CSTag.NESTED_ALT_PHASE, CSTag.NESTED_ALT_PHASE_SHIFTED):
        return (False, True)
    return (True, True)


def _gamma_fixed_n(n: int, p: LayerParams) -> float:
    return 1.0 + (p.B * p.d**2 + math.pi**2 * (n + 1) ** 2) / (2.0 * p.B * p.d**2)


def _beta_fixed_m(m: int, p: LayerParams) -> complex:
    return complex(2.0, p.d / math.pi * math.sqrt(p.B * (2 * m + 1)))


def rho_fixed_n(m: int, n_fixed: int, p: LayerParams) -> float:
    """ρ(m) = (2B)^m (γ)_m with γ = 1 + (Bd² + π²(n+1)²)/(2Bd²)."""
    return (2.0 * p.B) ** m * pochhammer(_gamma_fixed_n(n_fixed, p), m).real


def rho_fixed_m(n: int, m_fixed: int, p: LayerParams) -> float:
    """ρ(n) = (π/d)^{2n} (β)_n (β̄)_n = (π/d)^{2n} |(β)_n|²."""
    return p.q**n * abs(pochhammer(_beta_fixed_m(m_fixed, p), n)) ** 2


def rho_landau(m: int, p: LayerParams) -> float:
    """ρ₁(m) = e_1 ... e_m = (2B)^m (3/2)_m."""
    return (2.0 * p.B) ** m * pochhammer(1.5, m).real


def rho_layer(n: int, p: LayerParams) -> float:
    """ρ₂(n) = ε_1 ... ε_n = (π/d)^{2n} ((2)_n)²."""
    return p.q**n * pochhammer(2.0, n).real ** 2


def rho_fixed_n_shifted(m: int, p: LayerParams) -> float:
    """(2B)^m m!."""
    return (2.0 * p.B) ** m * math.factorial(m)


def rho_fixed_m_shifted(n: int, p: LayerParams) -> float:
    """(π/d)^{2n} n!(n+2)!/2."""
    return p.q**n * math.factorial(n) * math.factorial(n + 2) / 2.0


# --- normalization ------------------------------------------------------------


def _series_y(J: float, p: LayerParams) -> float:
    return p.d**2 * J / math.pi**2


def normalization_factors(cls: CSClass, label: CSLabel, p: LayerParams, tol: float = 1e-12) -> dict:
    """Closed-form N² of each degree, keyed ``"N2"`` (one degree) or ``"N1_2"``/``"N2_2"``.

    Nested classes have no closed form for N₁²; only the row factor at m = 0
    is reported there, under ``"N2_2(m=0)"``.
    """
    _check_arity(cls, label)
    t = cls.tag
    if t is CSTag.FIXED_N:
        return {"N2": hyp1f1(1.0, _gamma_fixed_n(cls.fixed_index, p), label.J[0] / (2 * p.B), tol).real}
    if t is CSTag.FIXED_M:
        b = _beta_fixed_m(cls.fixed_index, p)
        return {"N2": hyp1f2(1.0, b, b.conjugate(), _series_y(label.J[0], p), tol).real}
    if t is CSTag.FIXED_N_SHIFTED:
        return {"N2": math.exp(label.J[0] / (2 * p.B))}
    if t is CSTag.FIXED_M_SHIFTED:
        return {"N2": _bessel_i2_norm(_series_y(label.J[0], p), tol)}
    J1, J2 = label.J
    if t is CSTag.PRODUCT:
        return {
            "N1_2": hyp1f1(1.0, 1.5, J1 / (2 * p.B), tol).real,
            "N2_2": hyp1f2(1.0, 2.0, 2.0, _series_y(J2, p), tol).real,
        }
    if t is CSTag.PRODUCT_SHIFTED:
        return {"N1_2": math.exp(J1 / (2 * p.B)), "N2_2": hyp0f1(3.0, _series_y(J2, p), tol).real}
    return {"N2_2(m=0)": row_normalization(cls, 0, J2, p, tol)}


def _bessel_i2_norm(y: float, tol: float) -> float:
    """₀F₁(;3;y) = 2 I₂(2√y)/y."""
    if y == 0.0:
        return 1.0
    return 2.0 * bessel_i(2, 2.0 * math.sqrt(y), tol) / y


def row_normalization(cls: CSClass, m: int, J2: float, p: LayerParams, tol: float = 1e-12) -> float:
    """N₂(J₂, m)² of a nested class: ₁F₂(1; β_m, β̄_m; d²J₂/π²), or ₀F₁(;3;·) when shifted."""
    if not cls.tag.nested:
        raise UnsupportedClass(f"{cls} has no row normalization")
    y = _series_y(J2, p)
    if cls.tag is CSTag.NESTED_ALT_PHASE_SHIFTED:
        return hyp0f1(3.0, y, tol).real
    b = _beta_fixed_m(m, p)
    return hyp1f2(1.0, b, b.conjugate(), y, tol).real


def normalization(cls: CSClass, label: CSLabel, p: LayerParams, tol: float = 1e-12) -> float:
    """N² of the class: the norm² of the unnormalized coefficient array.

    One-degree classes and the product classes use their closed forms (for
    products the two factors multiply). The nested N₁² has no closed form and
    is summed over m with each row weighted by 1/N₂(J₂, m)².
    """
    _check_arity(cls, label)
    if cls.tag.nested:
        return math.exp(_nested_log_n1(cls, label.J[0], label.J[1], p, tol))
    f = normalization_factors(cls, label, p, tol)
    return float(np.prod(list(f.values())))


def normalization_series(cls: CSClass, label: CSLabel, p: LayerParams, factor: int = 1) -> float:
    """Direct Σ_k J^k/ρ(k) for the requested degree, by term ratios J/e_k."""
    _check_arity(cls, label)
    if cls.tag.nested and factor == 2:
        raise UnsupportedClass("use row_normalization_series for nested rows")
    J = label.J[factor - 1]
    return math.exp(_log_series(J, rho_energy(cls, p, factor))[1])


def row_normalization_series(cls: CSClass, m: int, J2: float, p: LayerParams) -> float:
    return math.exp(_log_series(J2, rho_energy(cls, p, 2, row=m))[1])


# --- truncation ---------------------------------------------------------------


def _log_series(J: float, energy_fn: Callable, eps: float = 1e-16):
    return _log_series_impl(J, energy_fn, eps)


def _log_series_impl(J: float, energy_fn: Callable, eps: float):
    """Log-terms of Σ J^k/ρ(k), truncated for mass deficit at most ``eps``.

    Returns ``(log_terms[:K], log_norm_sq, tail_bound)``. Index K is the first
    dropped one: ρ's factor there exceeds 2J (so later ratios are below 1/2)
    and 2·t_K <= eps·S_K, giving the bound Σ_{k>=K} t_k <= 2 t_K. The
    normalization keeps summing until terms fall below 1e-18 of the sum.
    """
    if J == 0.0:
        return np.zeros(1), 0.0, 0.0
    lnJ = math.log(J)
    logs = [0.0]
    log_s = 0.0
    K = None
    tail = 0.0
    log_eps = math.log(eps)
    k = 0
    while True:
        k += 1
        if k > MAX_INDEX:
            raise NonConvergence(f"no certified truncation within {MAX_INDEX} terms at J={J}")
        e = float(energy_fn(k))
        lt = logs[-1] + lnJ - math.log(e)
        past_peak = e > 2.0 * J
        if K is None and past_peak and math.log(2.0) + lt <= log_eps + log_s:
            K = k
            tail = math.exp(math.log(2.0) + lt - log_s)
        if K is not None and past_peak and lt <= log_s + _NEGLIGIBLE:
            break
        logs.append(lt)
        log_s = float(np.logaddexp(log_s, lt))
    return np.asarray(logs[:K]), log_s, tail


@functools.lru_cache(maxsize=256)
def _nested_log_n1(cls: CSClass, J1: float, J2: float, p: LayerParams, tol: float = 1e-12) -> float:
    """log N₁² = log Σ_m J₁^m/(ρ₁(m) N₂(J₂,m)²), truncated with the majorant N₂ >= 1.

    Cached: probability tables call it once per entry with the same label.
    """
    rows = _nested_rows(cls, J1, J2, p, 1e-16)
    return rows["log_n1"]


def _nested_rows(cls: CSClass, J1: float, J2: float, p: LayerParams, eps: float):
    """Row structure of a nested state at truncation budget ``eps``.

    m-rows are kept until the majorant term u_m = J₁^m/ρ₁(m) satisfies the
    same certified rule as one-degree series (the true weights are
    u_m / N₂(m)² <= u_m); each kept row is truncated in n with budget eps/2.
    """
    e1 = rho_energy(cls, p, 1)
    row_logs, row_lnorm, row_tails, log_w = [], [], [], []
    lnJ1 = math.log(J1) if J1 > 0 else -math.inf
    log_u = 0.0
    log_W = -math.inf
    M = None
    tail_m = 0.0
    half = 0.5 * eps
    m = 0
    while True:
        if m > 0:
            if J1 == 0.0:
                break
            e = float(e1(m))
            log_u += lnJ1 - math.log(e)
            past_peak = e > 2.0 * J1
            if M is None and past_peak and math.log(2.0) + log_u <= math.log(half) + log_W:
                M = m
                tail_m = math.exp(math.log(2.0) + log_u - log_W)
            if M is not None and past_peak and log_u <= log_W + _NEGLIGIBLE:
                break
            if m > MAX_INDEX:
                raise NonConvergence("nested m-series did not reach a certified truncation")
        logs_n, lnorm, tail_n = _log_series(J2, rho_energy(cls, p, 2, row=m), half)
        lw = log_u - lnorm
        log_w.append(lw)
        log_W = float(np.logaddexp(log_W, lw))
        if M is None:
            row_logs.append(logs_n)
            row_lnorm.append(lnorm)
            row_tails.append(tail_n)
        m += 1
    if M is None:
        M = len(row_logs)
    return {
        "row_logs": row_logs[:M],
        "row_lnorm": row_lnorm[:M],
        "log_w": np.asarray(log_w[:M]),
        "log_n1": log_W,
        "tail": tail_m + (max(row_tails) if row_tails else 0.0),
    }


# --- states -------------------------------------------------------------------


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class TruncatedState:
    """Finite coefficient representation of a coherent state.

    ``coeffs`` is 1-d for one-degree classes and an (M, N) grid for
    two-degree classes (nested rows are zero padded). ``freqs`` holds the
    phase frequency arrays, one per α, with the same shape as ``coeffs``.
    """

    cls: CSClass
    label: CSLabel
    params: LayerParams
    coeffs: np.ndarray
    trunc: tuple
    tail_bound: float
    freqs: tuple = field(repr=False, default=())
    mask: Optional[np.ndarray] = field(repr=False, default=None)

    @property
    def mass(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def to_dict(self) -> dict:
        c = self.coeffs
        pairs = np.stack([c.real, c.imag], axis=-1).tolist()
        return {
            "class": self.cls.tag.value,
            "fixed_index": self.cls.fixed_index,
            "label": self.label.to_dict(),
            "params": self.params.to_dict(),
            "trunc": list(self.trunc),
            "tail_bound": self.tail_bound,
            "coefficients": pairs,
        }


def _phase(freqs, alpha):
    arg = np.zeros_like(freqs[0])
    for f, a in zip(freqs, alpha):
        arg = arg + f * a
    return np.exp(-1j * arg)


def build_state(cls: CSClass, label: CSLabel, p: LayerParams, eps_tail: float = 1e-12) -> TruncatedState:
    """Coefficients of |J, α⟩ truncated so the discarded probability is at most ``eps_tail``."""
    _check_arity(cls, label)
    if not (0.0 < eps_tail <= 1e-3):
        raise DomainError(f"eps_tail must lie in (0, 1e-3], got {eps_tail}")
    t = cls.tag
    if t.one_degree:
        logs, lnorm, tail = _log_series(label.J[0], rho_energy(cls, p), eps_tail)
        k = np.arange(logs.size)
        freqs = (np.asarray(phase_energy(cls, p)(k), dtype=float),)
        mag = np.exp(0.5 * (logs - lnorm))
        coeffs = mag * _phase(freqs, label.alpha)
        return TruncatedState(cls, label, p, _readonly(coeffs), (logs.size,), tail, tuple(map(_readonly, freqs)))

    if not t.nested:
        half = 0.5 * eps_tail
        l1, n1, t1 = _log_series(label.J[0], rho_energy(cls, p, 1), half)
        l2, n2, t2 = _log_series(label.J[1], rho_energy(cls, p, 2), half)
        logs = (l1 - n1)[:, None] + (l2 - n2)[None, :]
        mask = np.ones(logs.shape, dtype=bool)
        tail = t1 + t2
    else:
        rows = _nested_rows(cls, label.J[0], label.J[1], p, eps_tail)
        M = len(rows["row_logs"])
        N = max(r.size for r in rows["row_logs"])
        logs = np.full((M, N), -np.inf)
        for m, (rl, lw, rn) in enumerate(zip(rows["row_logs"], rows["log_w"], rows["row_lnorm"])):
            logs[m, : rl.size] = lw - rows["log_n1"] + rl - rn
        mask = np.isfinite(logs)
        tail = rows["tail"]
    mm, nn = np.meshgrid(np.arange(logs.shape[0]), np.arange(logs.shape[1]), indexing="ij")
    freqs = tuple(np.asarray(phase_energy(cls, p, f)(mm, nn), dtype=float) for f in (1, 2))
    coeffs = np.where(mask, np.exp(0.5 * logs) * _phase(freqs, label.alpha), 0.0)
    return TruncatedState(
        cls, label, p, _readonly(coeffs), logs.shape, tail, tuple(map(_readonly, freqs)), _readonly(mask)
    )


def evolve(s: TruncatedState, t: float) -> TruncatedState:
    """e^{-iHt}|J, α⟩: each coefficient gains e^{-i E_k t} and the moving α's advance by t."""
    moving = _moving(s.cls.tag)
    energy = np.zeros_like(s.freqs[0])
    for f, mv in zip(s.freqs, moving):
        if mv:
            energy = energy + f
    coeffs = s.coeffs * np.exp(-1j * energy * t)
    if s.mask is not None:
        coeffs = np.where(s.mask, coeffs, 0.0)
    alpha = tuple(a + t if mv else a for a, mv in zip(s.label.alpha, moving))
    label = CSLabel(s.label.J, alpha)
    return TruncatedState(s.cls, label, s.params, _readonly(coeffs), s.trunc, s.tail_bound, s.freqs, s.mask)


def overlap(s1: TruncatedState, s2: TruncatedState) -> complex:
    """⟨s1|s2⟩ = Σ conj(c¹) c² over the common index range."""
    if s1.cls != s2.cls:
        raise ClassMismatch(f"classes differ: {s1.cls} vs {s2.cls}")
    if s1.params != s2.params:
        raise ClassMismatch(f"layer parameters differ: {s1.params} vs {s2.params}")
    a, b = s1.coeffs, s2.coeffs
    shape = tuple(max(x, y) for x, y in zip(a.shape, b.shape))
    pa = np.zeros(shape, dtype=complex)
    pb = np.zeros(shape, dtype=complex)
    pa[tuple(slice(0, x) for x in a.shape)] = a
    pb[tuple(slice(0, x) for x in b.shape)] = b
    return complex(np.sum(np.conj(pa) * pb))


def overlap_closed_form(cls: CSClass, l1: CSLabel, l2: CSLabel, p: LayerParams, tol: float = 1e-12) -> complex:
    """Hypergeometric overlap of two one-degree states.

    Linear spectra (fixed n) allow any α, α′: with Δ = α − α′ and ω the
    k = 0 energy, ⟨J,α|J′,α′⟩ = e^{iωΔ} F(√(JJ′) e^{2iBΔ}) / √(F(J) F(J′)).
    Quadratic spectra (fixed m) need α = α′.
    """
    if not cls.tag.one_degree:
        raise UnsupportedClass(f"no closed-form overlap for {cls}")
    J, Jp = l1.J[0], l2.J[0]
    delta = l1.alpha[0] - l2.alpha[0]
    N = normalization(cls, l1, p, tol)
    Np = normalization(cls, l2, p, tol)
    root = math.sqrt(J * Jp)
    t = cls.tag
    if t in (CSTag.FIXED_N, CSTag.FIXED_N_SHIFTED):
        omega = float(phase_energy(cls, p)(0))
        z = root * complex(math.cos(2 * p.B * delta), math.sin(2 * p.B * delta)) / (2 * p.B)
        if t is CSTag.FIXED_N:
            F = hyp1f1(1.0, _gamma_fixed_n(cls.fixed_index, p), z, tol).value
        else:
            F = complex(math.e) ** z if z != 0 else 1.0
        return complex(math.cos(omega * delta), math.sin(omega * delta)) * F / math.sqrt(N * Np)
    if delta != 0.0:
        raise DomainError("the fixed-m closed-form overlap needs alpha == alpha'")
    y = _series_y(root, p)
    if t is CSTag.FIXED_M:
        b = _beta_fixed_m(cls.fixed_index, p)
        F = hyp1f2(1.0, b, b.conjugate(), y, tol).real
    else:
        F = _bessel_i2_norm(y, tol)
    return complex(F / math.sqrt(N * Np))


def action_identity_check(cls: CSClass, label: CSLabel, p: LayerParams, tol: float = 1e-9) -> VerificationReport:
    """⟨H̃⟩ = Σ|c_k|² ẽ_k against J (or J₂) for the shifted classes.

    Defined for FIXED_N_SHIFTED, FIXED_M_SHIFTED (target J) and
    NESTED_ALT_PHASE_SHIFTED (target J₂, the energy conjugate to α₂). The
    unshifted classes have a nonzero ground energy and the shifted product
    class has H̃ = ẽ_m + ε̃_n, so neither satisfies the identity.
    """
    t = cls.tag
    if t not in (CSTag.FIXED_N_SHIFTED, CSTag.FIXED_M_SHIFTED, CSTag.NESTED_ALT_PHASE_SHIFTED):
        raise UnsupportedClass(f"{cls} does not satisfy an action identity")
    _check_arity(cls, label)
    s = build_state(cls, label, p, eps_tail=min(1e-3, max(1e-16, 1e-3 * tol)))
    prob = np.abs(s.coeffs) ** 2
    energy = s.freqs[-1]
    computed = float(np.sum(prob * energy) / np.sum(prob))
    target = label.J[-1]
    return VerificationReport.compare(target, computed, None, f"action {cls}", tail_bound=s.tail_bound)

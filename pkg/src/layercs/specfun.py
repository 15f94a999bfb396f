"""Special functions with complex parameters.

log-Gamma, Pochhammer symbols, the hypergeometric series 0F1, 1F1 and 1F2,
modified Bessel I (integer order) and K (real or purely imaginary order), and
the Meijer G^{2,0}_{0,2} function through its Bessel-K reduction.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, NonConvergence, PoleError, UnsupportedOrder
from .quadrature import tanh_sinh_batch

SERIES_TOL = 1e-12
QUAD_TOL = 1e-10
MAX_TERMS = 20000

_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
# B_{2k} / (2k (2k-1)), k = 1..10
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
)
_POLE_TOL = 1e-12


@dataclass(frozen=True)
class SeriesResult:
    value: complex
    terms_used: int
    tail_estimate: float
    converged: bool
    # the sum is value·e^{log_scale}; nonzero only for rescaled summation
    log_scale: float = 0.0

    @property
    def real(self) -> float:
        return self.value.real

    @property
    def log_abs(self) -> float:
        """log|sum|, finite even when the sum itself overflows a double."""
        return math.log(abs(self.value)) + self.log_scale


def _near_nonpositive_integer(z: complex, tol: float = _POLE_TOL) -> bool:
    if abs(z.imag) > tol:
        return False
    r = round(z.real)
    return r <= 0 and abs(z.real - r) <= tol


def ln_gamma(z) -> complex:
    """Principal branch of log Gamma(z).

    Arguments with real part below 8 are shifted upward with the recurrence,
    subtracting one principal logarithm per step (this keeps the branch
    continuous off the negative real axis), then the Stirling series is used.
    """
    z = complex(z)
    if _near_nonpositive_integer(z):
        raise PoleError(f"Gamma has a pole at {z}")
    shift = 0j
    n = 0
    if z.real < 8.0:
        n = int(math.ceil(8.0 - z.real))
        for k in range(n):
            shift += cmath.log(z + k)
    w = z + n
    inv = 1.0 / w
    inv2 = inv * inv
    acc = 0j
    p = inv
    for c in _STIRLING:
        acc += c * p
        p *= inv2
    return (w - 0.5) * cmath.log(w) - w + _LN_SQRT_2PI + acc - shift


def gamma_fn(z) -> complex:
    return cmath.exp(ln_gamma(z))


def pochhammer(a, k: int) -> complex:
    """Rising factorial (a)_k = a (a+1) ... (a+k-1), by direct product."""
    if k < 0:
        raise DomainError("pochhammer needs k >= 0")
    a = complex(a)
    out = 1.0 + 0j
    for j in range(k):
        out *= a + j
        if out == 0:
            break
    return out


_RESCALE = 1e200
_LOG_RESCALE = math.log(_RESCALE)


def _hyp_series(num, den, x, tol, max_terms=MAX_TERMS, rescale=False):
    """Sum Σ_k Π(num)_k / (Π(den)_k k!) x^k.

    Stops once three consecutive terms are below ``tol·|sum|`` and the
    geometric tail bound from the last term ratio is too.  A numerator
    parameter equal to a nonpositive integer terminates the sum exactly.
    With ``rescale`` the running sum is divided down whenever it grows past
    1e200 and the accumulated factor is returned in ``log_scale``.
    """
    num = [complex(a) for a in num]
    den = [complex(b) for b in den]
    x = complex(x)
    term = 1.0 + 0j
    total = term
    small_run = 0
    log_scale = 0.0
    for k in range(max_terms):
        ratio_num = 1.0 + 0j
        for a in num:
            ratio_num *= a + k
        if ratio_num == 0:
            return SeriesResult(total, k + 1, 0.0, True, log_scale)
        ratio_den = complex(k + 1)
        for b in den:
            if abs(b + k) <= _POLE_TOL:
                raise PoleError(f"denominator parameter {b} hits a pole at term {k + 1}")
            ratio_den *= b + k
        ratio = ratio_num / ratio_den * x
        term *= ratio
        total += term
        if rescale and abs(total) > _RESCALE:
            total /= _RESCALE
            term /= _RESCALE
            log_scale += _LOG_RESCALE
        if term == 0:
            return SeriesResult(total, k + 2, 0.0, True, log_scale)
        if abs(term) <= tol * abs(total):
            small_run += 1
        else:
            small_run = 0
        if small_run >= 3:
            r = abs(ratio)
            if r < 1.0:
                tail = abs(term) * r / (1.0 - r)
                if tail <= tol * abs(total):
                    return SeriesResult(total, k + 2, tail, True, log_scale)
    raise NonConvergence(
        f"hypergeometric series did not converge in {max_terms} terms",
        SeriesResult(total, max_terms + 1, abs(term), False, log_scale),
    )


def hyp1f1(a, b, x, tol: float = SERIES_TOL) -> SeriesResult:
    """Kummer's confluent hypergeometric series 1F1(a; b; x)."""
    return _hyp_series([a], [b], x, tol)


def ln_hyp1f1(a, b, x, tol: float = SERIES_TOL) -> float:
    """log ₁F₁(a; b; x) for positive real a, b, x, safe past the overflow of the sum."""
    return _hyp_series([a], [b], x, tol, rescale=True).log_abs


def hyp0f1(b, x, tol: float = SERIES_TOL) -> SeriesResult:
    return _hyp_series([], [b], x, tol)


def hyp1f2(a, b1, b2, x, tol: float = SERIES_TOL) -> SeriesResult:
    """1F2(a; b1, b2; x).

    With ``b2 == conj(b1)`` and real ``a``, ``x`` the sum is real; the
    imaginary rounding residue is checked against ``tol`` and dropped.
    """
    res = _hyp_series([a], [b1, b2], x, tol)
    a, b1, b2, x = complex(a), complex(b1), complex(b2), complex(x)
    if a.imag == 0 and x.imag == 0 and b2 == b1.conjugate():
        v = res.value
        if abs(v.imag) > max(tol, 1e-12) * (1.0 + abs(v.real)):
            raise ArithmeticError(f"1F2 with conjugate parameters returned non-real {v}")
        res = SeriesResult(complex(v.real, 0.0), res.terms_used, res.tail_estimate, res.converged)
    return res


def bessel_i(order: int, x: float, tol: float = SERIES_TOL) -> float:
    """Modified Bessel I_order(x) for integer order >= 0 from the ascending series."""
    if order < 0 or int(order) != order:
        raise UnsupportedOrder("bessel_i is implemented for integer order >= 0")
    if x < 0:
        raise DomainError("bessel_i needs x >= 0")
    order = int(order)
    if x == 0:
        return 1.0 if order == 0 else 0.0
    lead = (0.5 * x) ** order / math.factorial(order)
    res = _hyp_series([], [order + 1], 0.25 * x * x, tol)
    return lead * res.value.real


# --- Bessel K via the integral representation --------------------------------

_K_DROP = math.log(1e18)


def _k_cutoff(nu_real: float, x: np.ndarray) -> np.ndarray:
    """t_max where -x cosh t + |nu| t has fallen 41.4 below its maximum."""
    nu = abs(nu_real)
    t_peak = np.arcsinh(nu / x) if nu > 0 else np.zeros_like(x)
    peak = -x * np.cosh(t_peak) + nu * t_peak
    lo = t_peak.copy()
    hi = t_peak + 1.0
    f = lambda t: -x * np.cosh(t) + nu * t - (peak - _K_DROP)
    while np.any(f(hi) > 0):
        hi = np.where(f(hi) > 0, hi + (hi - t_peak), hi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        above = f(mid) > 0
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return hi


def _as_order(order):
    order = complex(order)
    if abs(order.imag) > 0 and abs(order.real) <= 1e-14:
        return "imag", order.imag
    if order.imag == 0:
        return "real", order.real
    raise UnsupportedOrder(f"bessel_k supports real or purely imaginary order, got {order}")


def bessel_k_array(order, x, tol: float = QUAD_TOL) -> np.ndarray:
    """Vectorized K_order(x) for real or purely imaginary order, x > 0.

    Uses K_ν(x) = ∫_0^∞ e^{-x cosh t} cosh(ν t) dt, which for ν = iη becomes
    the manifestly real ∫_0^∞ e^{-x cosh t} cos(η t) dt.  The integral is
    truncated where the integrand has dropped by 1e-18 and evaluated with a
    tanh-sinh rule.
    """
    kind, nu = _as_order(order)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(x > 0)):
        raise DomainError("bessel_k needs x > 0")
    out = np.zeros_like(x)
    # beyond this e^{-x} underflows relative to anything the callers integrate
    live = x < 700.0
    if not np.any(live):
        return out
    xs = x[live]
    tmax = _k_cutoff(nu if kind == "real" else 0.0, xs)
    xcol = xs[:, None]
    if kind == "imag":
        g = lambda t: np.exp(-xcol * np.cosh(t)) * np.cos(nu * t)
    else:
        a = abs(nu)
        # cosh(a t) e^{-x cosh t} without overflow
        g = lambda t: 0.5 * (np.exp(-xcol * np.cosh(t) + a * t) + np.exp(-xcol * np.cosh(t) - a * t))
    vals, _, _ = tanh_sinh_batch(g, np.zeros_like(xs), tmax, rel_tol=min(tol, 1e-12))
    out[live] = np.real(vals)
    return out


@lru_cache(maxsize=200_000)
def _bessel_k_cached(order: complex, x: float, tol: float) -> float:
    return float(bessel_k_array(order, np.array([x]), tol)[0])


def bessel_k(order, x: float, tol: float = QUAD_TOL) -> float:
    """Modified Bessel function of the third kind K_order(x) (scalar)."""
    if not x > 0:
        raise DomainError("bessel_k needs x > 0")
    _as_order(order)
    return _bessel_k_cached(complex(order), float(x), float(tol))


def meijer_g2002(x, b1: float = 2.0, b2: float = 0.0, tol: float = QUAD_TOL):
    """G^{2,0}_{0,2}(x | -; b1, b2) = 2 x^{(b1+b2)/2} K_{b1-b2}(2 sqrt x).

    Restricted to ``b1 - b2`` a nonnegative integer.  Accepts scalars or arrays.
    """
    diff = b1 - b2
    if diff < 0 or abs(diff - round(diff)) > 1e-12:
        raise UnsupportedOrder("meijer_g2002 needs b1 - b2 a nonnegative integer")
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("meijer_g2002 needs x > 0")
    val = 2.0 * arr ** (0.5 * (b1 + b2)) * bessel_k_array(float(round(diff)), 2.0 * np.sqrt(np.atleast_1d(arr)), tol).reshape(arr.shape)
    return float(val) if val.ndim == 0 else val

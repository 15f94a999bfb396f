"""Adaptive Gauss-Legendre integration on finite and semi-infinite ranges,
plus a batched tanh-sinh rule used by the Bessel-K integral representation.

All integrands must accept a 1-d numpy array and return an array of the same
shape (real or complex).  Node placement depends only on the integrand values,
so repeated calls are bit-identical.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, NonConvergence

EXPONENTIAL_DECAY_BOUND = "exponential-decay-bound"
USER_UPPER_LIMIT = "user-supplied-upper-limit"

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 0.0
    max_subdivisions: int = 4000
    tail_cutoff_strategy: str = EXPONENTIAL_DECAY_BOUND
    upper_limit: Optional[float] = None

    def __post_init__(self):
        if not self.rel_tol >= 1e-14:
            raise DomainError(f"rel_tol must be >= 1e-14, got {self.rel_tol!r}")
        if self.abs_tol < 0:
            raise DomainError("abs_tol must be nonnegative")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be positive")
        if self.tail_cutoff_strategy not in (EXPONENTIAL_DECAY_BOUND, USER_UPPER_LIMIT):
            raise DomainError(f"unknown tail_cutoff_strategy {self.tail_cutoff_strategy!r}")
        if self.tail_cutoff_strategy == USER_UPPER_LIMIT and not (
            self.upper_limit is not None and self.upper_limit > 0
        ):
            raise DomainError("user-supplied-upper-limit needs a positive upper_limit")


@dataclass(frozen=True)
class QuadratureResult:
    value: complex | float
    error_estimate: float
    evaluations: int
    converged: bool

    def __float__(self):
        return float(np.real(self.value))


class _Panel:
    __slots__ = ("g", "a", "b", "left", "right", "abs_sum", "err")

    def __lt__(self, other):
        # heapq is a min-heap; largest error pops first
        return self.err > other.err


class _Adaptive:
    """Global adaptive bisection over a set of panels, each with its own integrand.

    A panel's coarse estimate is a 15-point rule on the whole panel, its fine
    estimate the same rule on both halves; after a split the children reuse
    the parent's half-panel values as their coarse estimates.
    """

    def __init__(self, cfg: QuadratureConfig):
        self.cfg = cfg
        self.evaluations = 0

    def _rule(self, g, a, b):
        half = 0.5 * (b - a)
        x = a + half * (_GL_NODES + 1.0)
        y = np.asarray(g(x))
        self.evaluations += x.size
        return half * np.dot(_GL_WEIGHTS, y), half * np.dot(_GL_WEIGHTS, np.abs(y))

    def _panel(self, g, a, b, coarse):
        m = 0.5 * (a + b)
        left, la = self._rule(g, a, m)
        right, ra = self._rule(g, m, b)
        p = _Panel()
        p.g, p.a, p.b = g, a, b
        p.left, p.right, p.abs_sum = left, right, la + ra
        p.err = float(abs(left + right - coarse))
        return p

    def run(self, pieces):
        heap = []
        for g, a, b in pieces:
            if b <= a:
                continue
            coarse, _ = self._rule(g, a, b)
            heap.append(self._panel(g, a, b, coarse))
        heapq.heapify(heap)
        splits = 0
        while True:
            value = sum((p.left + p.right for p in heap), 0.0)
            err = sum(p.err for p in heap)
            abs_total = sum(p.abs_sum for p in heap)
            if not (np.isfinite(value) and np.isfinite(err)):
                res = QuadratureResult(_scalar(value), err, self.evaluations, False)
                raise NonConvergence("integrand overflows: the integral is not finite", res)
            goal = max(self.cfg.rel_tol * abs(value), self.cfg.abs_tol, 64 * _EPS * abs_total)
            if err <= goal or not heap:
                return QuadratureResult(_scalar(value), err, self.evaluations, True)
            if splits >= self.cfg.max_subdivisions:
                res = QuadratureResult(_scalar(value), err, self.evaluations, False)
                raise NonConvergence(
                    f"subdivision budget {self.cfg.max_subdivisions} exhausted "
                    f"(error estimate {err:.3g} > goal {goal:.3g})",
                    res,
                )
            worst = heapq.heappop(heap)
            m = 0.5 * (worst.a + worst.b)
            heapq.heappush(heap, self._panel(worst.g, worst.a, m, worst.left))
            heapq.heappush(heap, self._panel(worst.g, m, worst.b, worst.right))
            splits += 1


def _scalar(v):
    v = complex(v)
    return v.real if v.imag == 0.0 else v


def integrate_finite(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    config: QuadratureConfig = QuadratureConfig(),
    points=(),
) -> QuadratureResult:
    """Integrate ``f`` over ``[a, b]`` by adaptive panel refinement.

    ``points`` are optional interior breakpoints (kinks, peaks).
    """
    if not a < b:
        raise DomainError(f"need a < b, got [{a}, {b}]")
    edges = [a] + sorted(p for p in points if a < p < b) + [b]
    pieces = [(f, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]
    return _Adaptive(config).run(pieces)


def _find_cutoff(f, config):
    """Smallest power of two past the mass peak beyond which |f(x)|·x stays negligible."""
    js = np.arange(-10, 61)
    xs = np.ldexp(1.0, js)
    with np.errstate(all="ignore"):
        mass = np.abs(np.asarray(f(xs))) * xs
    mass = np.where(np.isfinite(mass), mass, np.inf)
    peak = float(np.max(mass))
    if not np.isfinite(peak):
        raise NonConvergence("integrand is not finite on the scan grid")
    if peak == 0.0:
        return 1.0, 0
    thr = max(config.abs_tol * 1e-2, 1e-18 * peak)
    small = mass <= thr
    # suffix-all: every scan point from j onward is negligible
    tail_ok = np.flip(np.logical_and.accumulate(np.flip(small)))
    start = int(np.argmax(mass))
    for j in range(start + 1, len(xs)):
        if tail_ok[j]:
            return float(xs[j]), len(xs)
    raise NonConvergence("integrand does not decay on [0, 2^60]; cannot place a cutoff")


def integrate_semi_infinite(
    f: Callable[[np.ndarray], np.ndarray],
    config: QuadratureConfig = QuadratureConfig(),
) -> QuadratureResult:
    """Integrate ``f`` over ``[0, inf)``.

    The range is split at a cutoff ``X`` where the mass density ``|f(x)|·x`` has
    decayed below ``max(abs_tol·1e-2, 1e-18·peak)``.  ``[0, 1/16]`` is integrated
    in ``u = sqrt(x)`` (removes ``x^(-1/2)`` and softens ``log x`` behaviour at
    the origin), ``[1/16, X]`` on geometrically spaced panels, and ``[X, inf)``
    in ``v = log(x/X)`` up to the point where the tail is negligible.
    """
    scan_evals = 0
    if config.tail_cutoff_strategy == USER_UPPER_LIMIT:
        cutoff = float(config.upper_limit)
    else:
        cutoff, scan_evals = _find_cutoff(f, config)

    x0 = min(1.0 / 16.0, cutoff)
    pieces = [(lambda u: 2.0 * u * f(u * u), 0.0, math.sqrt(x0))]
    lo = x0
    while lo < cutoff:
        hi = min(lo * 4.0, cutoff)
        pieces.append((f, lo, hi))
        lo = hi

    if config.tail_cutoff_strategy == EXPONENTIAL_DECAY_BOUND:
        def tail(v, X=cutoff):
            x = X * np.exp(v)
            with np.errstate(all="ignore"):
                y = np.asarray(f(x)) * x
            return np.where(np.isfinite(y), y, 0.0)

        probe = np.array([1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0])
        scan_evals += probe.size
        vals = np.abs(tail(probe))
        ref = max(float(np.max(np.abs(tail(np.array([0.0]))))), 1e-300)
        below = np.nonzero(vals <= 1e-18 * ref)[0]
        vmax = float(probe[below[0]]) if below.size else float(probe[-1])
        pieces.append((tail, 0.0, vmax))

    engine = _Adaptive(config)
    engine.evaluations = scan_evals
    return engine.run(pieces)


# --- tanh-sinh -------------------------------------------------------------

_TS_UMAX = 3.2


def _ts_nodes(level):
    """Nodes and step-free weights of the tanh-sinh rule on [-1, 1] new at ``level``."""
    h = 2.0 ** -level
    if level == 0:
        k = np.arange(-int(_TS_UMAX), int(_TS_UMAX) + 1)
    else:
        n = int(_TS_UMAX / h)
        k = np.arange(-n, n + 1)
        k = k[k % 2 != 0]
    u = k * h
    s = 0.5 * math.pi * np.sinh(u)
    x = np.tanh(s)
    w = 0.5 * math.pi * np.cosh(u) / np.cosh(s) ** 2
    return x, w


def tanh_sinh_batch(
    g: Callable[[np.ndarray], np.ndarray],
    lower: np.ndarray,
    upper: np.ndarray,
    rel_tol: float = 1e-13,
    max_level: int = 12,
):
    """Integrate a family of integrands over per-row intervals with a shared DE rule.

    ``g`` receives a 2-d array ``t`` of shape ``(rows, nodes)`` and must return
    values of the same shape; row ``i`` is integrated over ``[lower[i], upper[i]]``.
    Levels halve the step until every row changes by at most ``rel_tol``
    relative (or sits at the rounding floor of its absolute integral).

    Returns ``(values, abs_values, level_reached)``.
    """
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    half = 0.5 * (upper - lower)[:, None]
    mid = 0.5 * (upper + lower)[:, None]
    total = np.zeros(lower.shape, dtype=complex)
    abs_total = np.zeros(lower.shape)
    prev = None
    for level in range(max_level + 1):
        x, w = _ts_nodes(level)
        t = mid + half * x[None, :]
        y = np.asarray(g(t))
        with np.errstate(over="ignore", invalid="ignore"):
            total = total + (half * (w[None, :] * y)).sum(axis=1)
            abs_total = abs_total + (half * (w[None, :] * np.abs(y))).sum(axis=1)
            est = total * 2.0 ** -level
        if prev is not None and level >= 3:
            diff = np.abs(est - prev)
            floor = 16 * _EPS * abs_total * 2.0 ** -level
            if np.all((diff <= rel_tol * np.abs(est)) | (diff <= floor)):
                return _real_if(est), abs_total * 2.0 ** -level, level
        prev = est
    raise NonConvergence(f"tanh-sinh did not converge within {max_level} levels", _real_if(prev))


def _real_if(arr):
    return arr.real if np.all(arr.imag == 0.0) else arr

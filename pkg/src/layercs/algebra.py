"""Generalized ladder operators on coefficient sequences and their commutators.

With eigenvalues e_k the operators act on the basis η_k as

    a η_k = sqrt(e_k) η_{k-1},   a† η_k = sqrt(e_{k+1}) η_{k+1},   n η_k = e_k η_k.

Rescaled generators ā = r·a and n̄ (either r²·n or k + shift) are tested
against the Weyl-Heisenberg and su(1,1) relations.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .coherent import CSClass, CSLabel, build_state, rho_energy
from .errors import DomainError, UnsupportedClass
from .reports import VerificationReport
from .spectrum import LayerParams


class Algebra(str, enum.Enum):
    WEYL_HEISENBERG = "WeylHeisenberg"
    SU11 = "SU11"
    TENSOR_WH_SU11 = "TensorWHxSU11"
    UNCLASSIFIED = "Unclassified"


class Relation(str, enum.Enum):
    AA_DAG = "aa_dag"
    N_ADAG = "n_adag"
    N_A = "n_a"


@dataclass(frozen=True)
class LadderSpec:
    """Eigenvalue sequence plus the rescaling used for the barred generators.

    ``number_shift`` replaces the number eigenvalue r²·e_k by k + shift.
    """

    eigen_seq: Callable
    rescale: float = 1.0
    number_shift: Optional[float] = None
    name: str = ""

    def __post_init__(self):
        if not self.rescale > 0:
            raise DomainError("rescale must be positive")

    def e(self, k) -> np.ndarray:
        return np.asarray(self.eigen_seq(np.asarray(k)), dtype=float)

    def nu(self, k) -> np.ndarray:
        k = np.asarray(k)
        if self.number_shift is None:
            return self.rescale**2 * self.e(k)
        return k + float(self.number_shift)


def _seq(fn, ground: bool):
    if not ground:
        return fn
    e0 = float(fn(np.asarray(0)))
    return lambda k: fn(k) - e0


def ladder_fixed_n(n: int, p: LayerParams, rescale: float = 1.0, number_shift=None, ground: bool = False) -> LadderSpec:
    """E(k, n) at fixed n; ``ground=True`` measures it from E(0, n)."""
    fn = lambda k: p.B * (2 * k + 1) + p.q * (n + 1) ** 2
    return LadderSpec(_seq(fn, ground), rescale, number_shift, f"E(k,{n})")


def ladder_fixed_m(m: int, p: LayerParams, rescale: float = 1.0, number_shift=None, ground: bool = False) -> LadderSpec:
    fn = lambda k: p.B * (2 * m + 1) + p.q * (k + 1) ** 2
    return LadderSpec(_seq(fn, ground), rescale, number_shift, f"E({m},k)")


def ladder_landau(p: LayerParams, rescale: float = 1.0, number_shift=None, ground: bool = False) -> LadderSpec:
    return LadderSpec(_seq(lambda k: p.B * (2 * k + 1), ground), rescale, number_shift, "e_m")


def ladder_layer(p: LayerParams, rescale: float = 1.0, number_shift=None, ground: bool = False) -> LadderSpec:
    return LadderSpec(_seq(lambda k: p.q * (k + 1) ** 2, ground), rescale, number_shift, "eps_n")


def wh_generators(p: LayerParams, n: Optional[int] = None) -> LadderSpec:
    """Fixed-n (or Landau, when n is None) triple rescaled by 1/sqrt(2B).

    Since a η_0 = 0, [a, a†]η_0 equals e_1 rather than e_1 - e_0; the
    relations hold on η_0 only for a spectrum measured from its ground level,
    which is how these generators are built.
    """
    r = 1.0 / math.sqrt(2.0 * p.B)
    return ladder_landau(p, r, ground=True) if n is None else ladder_fixed_n(n, p, r, ground=True)


def su11_generators(p: LayerParams, m: Optional[int] = None) -> LadderSpec:
    """Fixed-m (or ε_n, when m is None) triple with ā = (d/π)a and n̄ = k + 3/2, ground-shifted."""
    r = p.d / math.pi
    return ladder_layer(p, r, 1.5, ground=True) if m is None else ladder_fixed_m(m, p, r, 1.5, ground=True)


def apply_ladder(op: str, spec: LadderSpec, coeffs) -> np.ndarray:
    """Apply the rescaled lower/raise/number operator to a coefficient vector.

    ``raise`` lengthens the vector by one; ``lower`` keeps the length and
    leaves a zero in the last slot.
    """
    c = np.asarray(coeffs, dtype=complex)
    L = c.size
    k = np.arange(L)
    r = spec.rescale
    if op == "lower":
        out = np.zeros(L, dtype=complex)
        if L > 1:
            out[:-1] = r * np.sqrt(spec.e(k[1:])) * c[1:]
        return out
    if op == "raise":
        out = np.zeros(L + 1, dtype=complex)
        out[1:] = r * np.sqrt(spec.e(k + 1)) * c
        return out
    if op == "number":
        return spec.nu(k) * c
    raise DomainError(f"unknown ladder operation {op!r}")


def _pad(v, L):
    out = np.zeros(L, dtype=complex)
    out[: v.size] = v
    return out


def _commutator(relation: Relation, spec: LadderSpec, m: int, L: int):
    """Both orderings of the relation applied to δ_m, plus the generator it should produce."""
    delta = np.zeros(L, dtype=complex)
    delta[m] = 1.0
    A = lambda v: apply_ladder("lower", spec, v)
    Ad = lambda v: apply_ladder("raise", spec, v)
    Nn = lambda v: apply_ladder("number", spec, v)
    if relation is Relation.AA_DAG:
        lhs = _pad(A(Ad(delta)), L + 1) - _pad(Ad(A(delta)), L + 1)
        return lhs, _pad(delta, L + 1)
    if relation is Relation.N_ADAG:
        lhs = Nn(Ad(delta)) - Ad(Nn(delta))
        return lhs, Ad(delta)
    lhs = Nn(A(delta)) - A(Nn(delta))
    return lhs, A(delta)


def _closed_form(relation: Relation, spec: LadderSpec, m: int) -> float:
    """Coefficient multiplying the generator in the general commutators."""
    if relation is Relation.AA_DAG:
        return float(spec.rescale**2 * (spec.e(m + 1) - spec.e(m)))
    if relation is Relation.N_ADAG:
        return float(spec.nu(m + 1) - spec.nu(m))
    return float(spec.nu(m - 1) - spec.nu(m)) if m > 0 else 0.0


@dataclass(frozen=True)
class CommutatorReport:
    relation: str
    max_deviation: float
    classified_algebra: Optional[str] = None
    index_range: int = 0
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "relation": self.relation,
            "max_deviation": self.max_deviation,
            "classified_algebra": self.classified_algebra,
            "index_range": self.index_range,
        }


def _relative(diff, scale):
    return float(np.max(np.abs(diff)) / max(float(np.max(np.abs(scale))), 1e-300))


def commutator_check(spec: LadderSpec, relation: str, index_range: int) -> CommutatorReport:
    """Largest relative deviation of a commutator from its closed form on δ_0 .. δ_{index_range-1}.

    The closed forms are [ā, ā†]η_m = r²(e_{m+1} - e_m)η_m,
    [n̄, ā†]η_m = (ν_{m+1} - ν_m) ā†η_m and [n̄, ā]η_m = (ν_{m-1} - ν_m) āη_m.
    No classification is attempted (``classified_algebra`` is None).
    """
    relation = Relation(relation)
    if index_range < 2:
        raise DomainError("index_range must be at least 2")
    L = index_range + 1
    worst = 0.0
    for m in range(index_range):
        lhs, gen = _commutator(relation, spec, m, L)
        rhs = _closed_form(relation, spec, m) * gen
        if np.any(rhs != 0) or np.any(lhs != 0):
            worst = max(worst, _relative(lhs - rhs, np.abs(rhs) + np.abs(lhs)))
    return CommutatorReport(relation.value, worst, None, index_range)


def _relation_deviation(spec: LadderSpec, index_range: int, algebra: Algebra) -> dict:
    """Deviation of each defining relation of ``algebra`` on the barred generators."""
    L = index_range + 1
    out = {}
    for rel in Relation:
        worst = 0.0
        for m in range(index_range):
            lhs, gen = _commutator(rel, spec, m, L)
            if rel is Relation.AA_DAG:
                # WH: identity; su(1,1): 2 n̄
                target = gen if algebra is Algebra.WEYL_HEISENBERG else 2.0 * apply_ladder("number", spec, gen[:L])
                target = _pad(target, lhs.size)
            elif rel is Relation.N_ADAG:
                target = gen
            else:
                target = -gen
            scale = np.abs(target) + np.abs(lhs)
            if np.any(scale > 0):
                worst = max(worst, _relative(lhs - target, scale))
        out[rel.value] = worst
    return out


def classify_algebra(spec: LadderSpec, index_range: int = 200, tol: float = 1e-12) -> CommutatorReport:
    """Weyl-Heisenberg if [ā,ā†]=I, [n̄,ā†]=ā†, [n̄,ā]=-ā; su(1,1) if [ā,ā†]=2n̄ instead."""
    for alg in (Algebra.WEYL_HEISENBERG, Algebra.SU11):
        dev = _relation_deviation(spec, index_range, alg)
        worst = max(dev.values())
        if worst <= tol:
            return CommutatorReport("classify", worst, alg.value, index_range, dev)
    dev = {a.value: max(_relation_deviation(spec, index_range, a).values()) for a in (Algebra.WEYL_HEISENBERG, Algebra.SU11)}
    return CommutatorReport("classify", min(dev.values()), Algebra.UNCLASSIFIED.value, index_range, dev)


# --- two degrees of freedom ---------------------------------------------------


def _apply_factor(op: str, spec: LadderSpec, grid: np.ndarray, axis: int) -> np.ndarray:
    """apply_ladder along one axis of a 2-D coefficient grid."""
    g = np.moveaxis(np.asarray(grid, dtype=complex), axis, 0)
    L = g.shape[0]
    k = np.arange(L)[:, None]
    r = spec.rescale
    if op == "lower":
        out = np.zeros_like(g)
        out[:-1] = r * np.sqrt(spec.e(k[1:])) * g[1:]
    elif op == "raise":
        out = np.zeros((L + 1,) + g.shape[1:], dtype=complex)
        out[1:] = r * np.sqrt(spec.e(k + 1)) * g
    elif op == "number":
        out = spec.nu(k) * g
    else:
        raise DomainError(f"unknown ladder operation {op!r}")
    return np.moveaxis(out, 0, axis)


def classify_tensor(spec1: LadderSpec, spec2: LadderSpec, index_range: int = 50, tol: float = 1e-12) -> CommutatorReport:
    """Algebra generated by {ā₁, ā₁†, n̄₁} ⊗ I and I ⊗ {ā₂, ā₂†, n̄₂}.

    Each factor is classified separately and every cross commutator between
    the two sets is checked to vanish on the grid basis δ_{m,n}.
    """
    c1 = classify_algebra(spec1, index_range, tol)
    c2 = classify_algebra(spec2, index_range, tol)
    L = index_range + 2
    cross = 0.0
    ops = ("lower", "raise", "number")
    n_probe = min(index_range, 12)
    for m in range(n_probe):
        for n in range(n_probe):
            g = np.zeros((L, L), dtype=complex)
            g[m, n] = 1.0
            for o1 in ops:
                for o2 in ops:
                    a = _fit(_apply_factor(o2, spec2, _fit(_apply_factor(o1, spec1, g, 0), L), 1), L)
                    b = _fit(_apply_factor(o1, spec1, _fit(_apply_factor(o2, spec2, g, 1), L), 0), L)
                    scale = np.abs(a) + np.abs(b)
                    if np.any(scale > 0):
                        cross = max(cross, _relative(a - b, scale))
    dev = {"factor1": c1.max_deviation, "factor2": c2.max_deviation, "cross": cross}
    ok = (
        c1.classified_algebra == Algebra.WEYL_HEISENBERG.value
        and c2.classified_algebra == Algebra.SU11.value
        and cross <= tol
    )
    alg = Algebra.TENSOR_WH_SU11 if ok else Algebra.UNCLASSIFIED
    return CommutatorReport("classify-tensor", max(dev.values()), alg.value, index_range, dev)


def _fit(grid, L):
    out = np.zeros((L, L), dtype=complex)
    a, b = min(grid.shape[0], L), min(grid.shape[1], L)
    out[:a, :b] = grid[:a, :b]
    return out


def product_triple(spec1: LadderSpec, spec2: LadderSpec) -> LadderSpec:
    """The diagonal triple 𝐚 η_{m,n} = sqrt(e_m ε_n) η_{m-1,n-1}, 𝐧 = e_m ε_n.

    On the diagonal chain δ_{k,k} it is a single ladder with eigenvalues
    e_k ε_k; off the diagonal the action is the same shifted by a constant
    index offset, so the chain captures its commutators.
    """
    return LadderSpec(lambda k: spec1.e(k) * spec2.e(k), 1.0, None, f"({spec1.name})x({spec2.name})")


def classify_product_triple(spec1: LadderSpec, spec2: LadderSpec, index_range: int = 50, tol: float = 1e-12) -> CommutatorReport:
    """Classify the triple 𝐚 = a₁⊗a₂, 𝐚†, 𝐧 = n₁⊗n₂ acting on the (m, n) grid."""
    L = index_range + 2
    dev = {}
    for alg in (Algebra.WEYL_HEISENBERG, Algebra.SU11):
        worst = 0.0
        for m in range(min(index_range, 12)):
            for n in range(min(index_range, 12)):
                worst = max(worst, _triple_deviation(spec1, spec2, m, n, L, alg))
        dev[alg.value] = worst
        if worst <= tol:
            return CommutatorReport("classify-product-triple", worst, alg.value, index_range, dev)
    return CommutatorReport("classify-product-triple", min(dev.values()), Algebra.UNCLASSIFIED.value, index_range, dev)


def _triple_ops(spec1, spec2, L):
    def A(g):
        return _fit(_apply_factor("lower", spec2, _fit(_apply_factor("lower", spec1, g, 0), L), 1), L)

    def Ad(g):
        return _fit(_apply_factor("raise", spec2, _fit(_apply_factor("raise", spec1, g, 0), L), 1), L)

    def Nn(g):
        return _fit(_apply_factor("number", spec2, _fit(_apply_factor("number", spec1, g, 0), L), 1), L)

    return A, Ad, Nn


def _triple_deviation(spec1, spec2, m, n, L, alg):
    A, Ad, Nn = _triple_ops(spec1, spec2, L)
    g = np.zeros((L, L), dtype=complex)
    g[m, n] = 1.0
    pairs = [
        (A(Ad(g)) - Ad(A(g)), g if alg is Algebra.WEYL_HEISENBERG else 2.0 * Nn(g)),
        (Nn(Ad(g)) - Ad(Nn(g)), Ad(g)),
        (Nn(A(g)) - A(Nn(g)), -A(g)),
    ]
    worst = 0.0
    for lhs, rhs in pairs:
        scale = np.abs(lhs) + np.abs(rhs)
        if np.any(scale > 0):
            worst = max(worst, _relative(lhs - rhs, scale))
    return worst


# --- coherent states as annihilation eigenstates --------------------------------


def annihilation_eigenstate_check(cls: CSClass, label: CSLabel, p: LayerParams, tol: float = 1e-12) -> VerificationReport:
    """Residual ‖a|J,α⟩ - sqrt(J)|J,α⟩‖ for the ladder built on the class's ρ factors.

    Because ρ(k) = e_1…e_k, sqrt(e_{k+1}) c_{k+1} = sqrt(J) c_k exactly when
    α = 0. This holds for every one-degree class (shifted or not) and, with
    𝐚 = a₁⊗a₂ and eigenvalue sqrt(J₁J₂), for the two product classes. A
    nonzero α multiplies the two sides by different phases. The last retained
    index has no partner after lowering and is excluded; its size is bounded
    by the tail budget stored in ``notes``.
    """
    t = cls.tag
    if t.nested:
        raise UnsupportedClass(f"{cls}: the nested coefficients are not an annihilation eigenvector")
    s = build_state(cls, label, p, eps_tail=min(1e-3, max(1e-16, tol * 1e-2)))
    c = s.coeffs
    if t.one_degree:
        spec = LadderSpec(rho_energy(cls, p))
        lowered = apply_ladder("lower", spec, c)[:-1] if c.size > 1 else np.zeros(0)
        eig = math.sqrt(label.J[0])
        target = eig * c[:-1]
    else:
        s1 = LadderSpec(rho_energy(cls, p, 1))
        s2 = LadderSpec(rho_energy(cls, p, 2))
        M, N = c.shape
        lowered = np.zeros((max(M - 1, 0), max(N - 1, 0)), dtype=complex)
        if M > 1 and N > 1:
            g = _apply_factor("lower", s1, c, 0)
            g = _apply_factor("lower", s2, g, 1)
            lowered = g[: M - 1, : N - 1]
        eig = math.sqrt(label.J[0] * label.J[1])
        target = eig * c[: M - 1, : N - 1]
    residual = float(np.sqrt(np.sum(np.abs(lowered - target) ** 2))) if lowered.size else 0.0
    return VerificationReport.compare(
        0.0, residual, None, f"a|{cls}> eigen", eigenvalue=eig, tail_bound=s.tail_bound
    )

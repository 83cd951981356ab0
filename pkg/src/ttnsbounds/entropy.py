"""Rényi entropies of Schmidt spectra and the entropy-based error/bond-dimension bounds.

Lower bounds use a Rényi parameter ``alpha > 1``, upper bounds ``0 < alpha < 1``.
Every bound evaluation records whether its ``alpha`` lies inside the range in
which the bound is proven; out-of-range evaluations carry no value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dense import SchmidtSpectrum
from .errors import (AlphaOutOfRange, BadDistribution, BadEps, BadRange, Infeasible,
                     NoValidAlpha, NonpositiveAlpha)

SUM_TOL = 1e-8
CHAIN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class EdgeDistribution:
    """Squared Schmidt coefficients of one edge cut and the available dimension D."""

    edge: int | None
    probs: np.ndarray
    available_dim: int

    def __post_init__(self):
        p = np.sort(np.asarray(self.probs, dtype=float))[::-1].copy()
        if len(p) > self.available_dim:
            # trailing exact zeros beyond D carry no information
            if np.any(p[self.available_dim:] > 0):
                raise BadDistribution(f"{len(p)} nonzero weights exceed D={self.available_dim}")
            p = p[: self.available_dim]
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_spectrum(cls, spectrum: SchmidtSpectrum, available_dim: int,
                      normalize: bool = True) -> "EdgeDistribution":
        w = spectrum.weights
        if normalize and w.sum() > 0:
            w = w / w.sum()
        return cls(spectrum.edge, w, available_dim)

    def truncation_error(self, m: int) -> float:
        return float(np.sum(self.probs[m:][::-1]))


@dataclass(frozen=True)
class BoundEvaluation:
    side: str              # "lower" or "upper"
    inequality: str        # which bound this instantiates
    alpha: float
    valid: bool
    reason: str
    value: float | None = None
    edge: int | None = None


def _probs(dist) -> np.ndarray:
    p = dist.probs if isinstance(dist, EdgeDistribution) else np.asarray(dist, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise BadDistribution("need a non-empty 1-d probability list")
    if np.any(p < 0):
        raise BadDistribution(f"negative probability {p.min()}")
    if abs(p.sum() - 1.0) > SUM_TOL:
        raise BadDistribution(f"probabilities sum to {p.sum():.17g}")
    return p


def renyi_entropy(dist, alpha: float) -> float:
    """S_alpha = ln(sum p^alpha) / (1 - alpha); Shannon entropy at alpha = 1."""
    if not alpha > 0:
        raise NonpositiveAlpha(f"alpha must be > 0, got {alpha}")
    p = _probs(dist)
    p = p[p > 0]
    if alpha == 1:
        return float(-np.sum(p * np.log(p)))
    return float(np.log(np.sum(p**alpha)) / (1.0 - alpha))


def extremal_spread(m: int, delta: float, d: int) -> np.ndarray:
    """Most spread-out distribution with discarded weight ``delta`` beyond rank ``m``."""
    if not 1 <= m < d:
        raise BadRange(f"need 1 <= M < D, got M={m}, D={d}")
    if not 0 <= delta < 1:
        raise BadRange(f"need 0 <= delta < 1, got {delta}")
    return np.concatenate([np.full(m, (1.0 - delta) / m), np.full(d - m, delta / (d - m))])


@dataclass(frozen=True)
class SpreadChain:
    entropy: float
    spread_entropy: float
    bound: float
    delta: float
    holds: bool


def entropy_upper_via_spread(dist: EdgeDistribution, m: int, alpha: float,
                             tol: float = CHAIN_TOL) -> SpreadChain:
    """S_alpha(rho) <= S_alpha(rho') <= ln M + alpha/(1-alpha) ln(1-delta), alpha > 1."""
    if not alpha > 1:
        raise AlphaOutOfRange(f"the spread chain needs alpha > 1, got {alpha}")
    delta = dist.truncation_error(m)
    s = renyi_entropy(dist, alpha)
    d = dist.available_dim
    if m < d:
        spread = renyi_entropy(extremal_spread(m, delta, d), alpha)
    else:
        spread = math.log(d)
    bound = math.log(m) + alpha / (1.0 - alpha) * math.log1p(-delta)
    return SpreadChain(s, spread, bound, delta,
                       holds=bool(s <= spread + tol and spread <= bound + tol))


def error_lower_bound(s_alpha: float, m: int, alpha: float) -> float:
    """1 - (M e^{-S})^{1 - 1/alpha}, clamped at zero; needs alpha > 1."""
    if not alpha > 1:
        raise AlphaOutOfRange(f"lower bounds need alpha > 1, got {alpha}")
    val = 1.0 - math.exp((1.0 - 1.0 / alpha) * (math.log(m) - s_alpha))
    return max(val, 0.0)


def error_lower_bound_literal(s_alpha: float, m: int, alpha: float) -> float:
    """Variant with M / S in place of M e^{-S}; kept only for comparison."""
    if not alpha > 1:
        raise AlphaOutOfRange(f"lower bounds need alpha > 1, got {alpha}")
    if s_alpha <= 0:
        return 0.0
    return max(1.0 - (m / s_alpha) ** (1.0 - 1.0 / alpha), 0.0)


def upper_alpha_threshold(eps: float, m: int) -> float | None:
    """Smallest admissible alpha, eps M / (M - 1 - eps); None when M - 1 - eps <= 0."""
    denom = m - 1 - eps
    if denom <= 0:
        return None
    return eps * m / denom


def upper_alpha_validity(alpha: float, eps: float, m: int) -> tuple[bool, str]:
    if not 0 < alpha < 1:
        return False, f"alpha={alpha:g} outside (0, 1)"
    if m < 2:
        return False, f"M={m} < 2"
    thr = upper_alpha_threshold(eps, m)
    if thr is None:
        return False, f"M - 1 - eps = {m - 1 - eps:.3g} <= 0"
    if alpha < thr:
        return False, f"alpha={alpha:g} below threshold {thr:.6g}"
    return True, f"alpha={alpha:g} >= threshold {thr:.6g}"


def error_upper_bound(s_alpha: float, m: int, alpha: float, eps_hint: float) -> BoundEvaluation:
    """(e^S / (M - 1))^{1/alpha - 1}, flagged by the admissible alpha range."""
    ok, reason = upper_alpha_validity(alpha, eps_hint, m)
    value = None
    if ok:
        value = math.exp((1.0 / alpha - 1.0) * (s_alpha - math.log(m - 1)))
    return BoundEvaluation("upper", "error_upper", alpha, ok, reason, value)


def bond_dim_upper_bound(s_alpha: float, eps: float, alpha: float) -> float:
    """e^S eps^{-alpha/(1-alpha)} + 1 for 0 < alpha < 1."""
    if not 0 < alpha < 1:
        raise AlphaOutOfRange(f"need 0 < alpha < 1, got {alpha}")
    if not 0 < eps < 1:
        raise BadEps(f"need 0 < eps < 1, got {eps}")
    return math.exp(s_alpha - alpha / (1.0 - alpha) * math.log(eps)) + 1.0


def bond_dim_lower_bound(s_alpha: float, delta: float, alpha: float) -> float:
    """e^S (1 - delta)^{alpha/(alpha-1)} for alpha > 1."""
    if not alpha > 1:
        raise AlphaOutOfRange(f"need alpha > 1, got {alpha}")
    if not 0 <= delta < 1:
        raise BadEps(f"need 0 <= delta < 1, got {delta}")
    return math.exp(s_alpha + alpha / (alpha - 1.0) * math.log1p(-delta))


def majorizing_extremal(m: int, eps: float, p: float) -> np.ndarray:
    """Head-concentrated distribution with rho_M = p and discarded weight eps.

    The first entry takes all weight not fixed by the constraints; the tail is
    filled with copies of ``p`` and one remainder entry.
    """
    if m < 1 or not p > 0 or eps < 0:
        raise Infeasible(f"need M >= 1, p > 0, eps >= 0 (M={m}, p={p}, eps={eps})")
    head = 1.0 - eps - (m - 1) * p
    if head < p - 1e-15 or (m == 1 and abs(head - p) > 1e-15):
        raise Infeasible(f"first entry {head:.6g} cannot sit above p={p:.6g}")
    k = int(math.floor(eps / p + 1e-12))
    rem = eps - k * p
    if rem < -1e-15:
        k, rem = k - 1, rem + p
    rem = max(rem, 0.0)
    parts = [[head], [p] * (m - 1), [p] * k]
    if rem > 1e-15:
        parts.append([rem])
    return np.array([x for part in parts for x in part])


def optimize_alpha(dist: EdgeDistribution, m: int, side: str,
                   grid: Sequence[float]) -> BoundEvaluation:
    """Tightest valid error bound over an alpha grid; ties go to the smallest alpha."""
    if not grid:
        raise NoValidAlpha("empty alpha grid")
    best = None
    eps = dist.truncation_error(m)
    for alpha in sorted(set(float(a) for a in grid)):
        if side == "lower":
            if not alpha > 1:
                continue
            val = error_lower_bound(renyi_entropy(dist, alpha), m, alpha)
            ev = BoundEvaluation("lower", "error_lower", alpha, True, "alpha > 1", val, dist.edge)
            if best is None or val > best.value:
                best = ev
        elif side == "upper":
            ev = error_upper_bound(renyi_entropy(dist, alpha), m, alpha, eps)
            if not ev.valid:
                continue
            if best is None or ev.value < best.value:
                best = BoundEvaluation(**{**ev.__dict__, "edge": dist.edge})
        else:
            raise ValueError(f"side must be 'lower' or 'upper', got {side!r}")
    if best is None:
        raise NoValidAlpha(f"no admissible alpha for side={side} in {sorted(grid)}")
    return best


def majorizes(p: Sequence[float], q: Sequence[float], tol: float = 1e-12) -> bool:
    """True iff every sorted partial sum of ``p`` is at least that of ``q``."""
    a = np.sort(np.asarray(p, dtype=float))[::-1]
    b = np.sort(np.asarray(q, dtype=float))[::-1]
    size = max(len(a), len(b))
    a = np.pad(a, (0, size - len(a)))
    b = np.pad(b, (0, size - len(b)))
    return bool(np.all(np.cumsum(a) >= np.cumsum(b) - tol))

"""Truncating an exact TTNS to given bond dimensions and accounting for the error.

Two schemes are provided. :func:`truncate_projector` restricts every bond of
the exact network simultaneously to its leading Schmidt directions, which
equals ``P_1 P_2 ... P_{N-1} |psi>`` with ``P_i`` the projector onto the
``M_i`` leading branch states of edge ``i``. :func:`truncate_lazy` truncates
edge by edge during the sequential SVD, so each step sees the spectrum of the
already truncated state.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .dense import DenseState, SchmidtSpectrum, error_sq, truncation_error
from .errors import NotLinearTree, PlanShapeMismatch
from .entropy import renyi_entropy
from .tree import TreeGraph, is_linear
from .ttns import Ttns, TtnsTensor, contract, sequential_svd

log = logging.getLogger(__name__)

BOUND_TOL = 1e-12


@dataclass(frozen=True)
class TruncationPlan:
    """Bond caps per edge, or an error budget converted by :func:`min_bond_dims`."""

    caps: Mapping[int, int] | None = None
    eps_per_edge: float | None = None
    delta_total: float | None = None
    split: str = "even"

    def __post_init__(self):
        given = [x is not None for x in (self.caps, self.eps_per_edge, self.delta_total)]
        if sum(given) != 1:
            raise PlanShapeMismatch("give exactly one of caps, eps_per_edge, delta_total")
        if self.caps is not None and any(int(m) < 1 for m in self.caps.values()):
            raise PlanShapeMismatch(f"caps must be >= 1: {dict(self.caps)}")
        for budget in (self.eps_per_edge, self.delta_total):
            if budget is not None and not 0 < budget < 1:
                raise PlanShapeMismatch(f"error budget must lie in (0, 1), got {budget}")

    @classmethod
    def uniform(cls, m: int, tree: TreeGraph) -> "TruncationPlan":
        return cls(caps={i: int(m) for i in tree.edges})

    @classmethod
    def from_dict(cls, data: dict, tree: TreeGraph) -> "TruncationPlan":
        if "caps" in data:
            caps = data["caps"]
            if isinstance(caps, int):
                return cls.uniform(caps, tree)
            return cls(caps={int(k): int(v) for k, v in caps.items()})
        if "eps_per_edge" in data:
            return cls(eps_per_edge=float(data["eps_per_edge"]), split=data.get("split", "even"))
        if "delta_total" in data:
            return cls(delta_total=float(data["delta_total"]), split=data.get("split", "even"))
        raise PlanShapeMismatch(f"unrecognized plan keys {sorted(data)}")

    def to_dict(self) -> dict:
        if self.caps is not None:
            return {"caps": {str(k): int(v) for k, v in sorted(self.caps.items())}}
        if self.eps_per_edge is not None:
            return {"eps_per_edge": self.eps_per_edge}
        return {"delta_total": self.delta_total, "split": self.split}

    def resolve(self, spectra: Mapping[int, SchmidtSpectrum], tree: TreeGraph) -> dict[int, int]:
        if self.caps is None:
            return min_bond_dims(spectra, eps_per_edge=self.eps_per_edge,
                                 delta_total=self.delta_total, split=self.split)
        if set(self.caps) != set(tree.edges):
            raise PlanShapeMismatch(
                f"caps given for edges {sorted(self.caps)}, tree has edges 1..{tree.n - 1}")
        return {i: int(self.caps[i]) for i in tree.edges}


@dataclass(eq=False)
class TruncationResult:
    scheme: str
    ttns: Ttns
    state: DenseState
    target: DenseState
    caps: dict[int, int]
    # discarded weight of the target's own spectra, per edge
    eps: dict[int, float]
    delta: float
    # per-step discarded weight of the running state (lazy scheme only)
    eps_lazy: dict[int, float] | None = None
    norm: float = field(init=False)

    def __post_init__(self):
        self.norm = self.state.norm()

    @property
    def sum_eps(self) -> float:
        return float(sum(self.eps.values()))

    @property
    def max_eps(self) -> float:
        return max(self.eps.values(), default=0.0)

    def normalized_state(self) -> DenseState:
        return self.state.normalized()


@dataclass(frozen=True)
class BoundsCheck:
    name: str
    passed: bool
    values: dict[str, float]
    slacks: dict[str, float]


def min_bond_dim(spectrum: SchmidtSpectrum, budget: float, atol: float = 1e-14) -> int:
    """Smallest M >= 1 with discarded weight eps(M) <= budget.

    ``atol`` absorbs rounding in the tail sums, e.g. a GHZ weight 0.5000000000000001
    against a measured error of 0.5.
    """
    w = spectrum.weights
    # tails[m] = sum_{mu > m} w_mu for m = 0..len(w)
    tails = np.concatenate([np.cumsum(w[::-1])[::-1], [0.0]])
    for m in range(1, len(tails)):
        if tails[m] <= budget + atol:
            return m
    return max(len(w), 1)


def min_bond_dims(
    spectra: Mapping[int, SchmidtSpectrum],
    eps_per_edge: float | None = None,
    delta_total: float | None = None,
    split: str = "even",
) -> dict[int, int]:
    """Per-edge minimal bond dimensions for a per-edge or total error budget.

    A total budget ``delta`` is split evenly, ``delta / (N - 1)`` per edge, unless
    ``split="entropy"``, which hands out budget in proportion to each edge's
    von Neumann entropy.
    """
    if (eps_per_edge is None) == (delta_total is None):
        raise ValueError("give exactly one of eps_per_edge, delta_total")
    edges = sorted(spectra)
    if eps_per_edge is not None:
        budgets = {i: eps_per_edge for i in edges}
    elif split == "even":
        budgets = {i: delta_total / len(edges) for i in edges}
    elif split == "entropy":
        weights = {i: renyi_entropy(spectra[i].weights / spectra[i].weights.sum(), 1.0)
                   for i in edges}
        total = sum(weights.values())
        if total <= 0:
            budgets = {i: delta_total / len(edges) for i in edges}
        else:
            budgets = {i: delta_total * weights[i] / total for i in edges}
    else:
        raise ValueError(f"unknown split {split!r}")
    return {i: min_bond_dim(spectra[i], budgets[i]) for i in edges}


def _slice_tensors(ttns: Ttns, caps: Mapping[int, int]) -> dict[int, TtnsTensor]:
    tree = ttns.tree
    out = {}
    for v in tree.vertices:
        idx = [slice(None)] + [slice(0, caps[c]) for c in tree.children[v]]
        idx.append(slice(None) if v == tree.root else slice(0, caps[v]))
        out[v] = TtnsTensor(v, ttns.tensors[v].data[tuple(idx)])
    return out


def truncate_projector(exact: Ttns, plan: TruncationPlan,
                       target: DenseState | None = None) -> TruncationResult:
    """Keep the leading ``M_i`` Schmidt directions on every edge at once.

    ``exact`` must come from :func:`~ttnsbounds.ttns.exact_decompose`. The
    result is not renormalized. Caps above the exact bond dimension are clamped.
    """
    if exact.spectra is None:
        raise PlanShapeMismatch("projector truncation needs the exact spectra")
    tree = exact.tree
    requested = plan.resolve(exact.spectra, tree)
    bond = exact.bond_dims
    caps = {i: min(requested[i], bond[i]) for i in tree.edges}
    truncated = Ttns(tree, _slice_tensors(exact, caps), spectra=None)
    state = contract(truncated)
    if target is None:
        target = contract(exact)
    eps = {i: truncation_error(exact.spectra[i], caps[i]) for i in tree.edges}
    return TruncationResult("projector", truncated, state, target, caps, eps,
                            error_sq(target, state))


def truncate_lazy(state: DenseState, tree: TreeGraph, plan: TruncationPlan) -> TruncationResult:
    """Truncate each edge to its cap during the sequential SVD sweep."""
    if plan.caps is None:
        raise PlanShapeMismatch("the lazy scheme needs explicit caps")
    _, exact_spectra, _ = sequential_svd(state, tree)
    caps = plan.resolve(exact_spectra, tree)
    tensors, _, discarded = sequential_svd(state, tree, caps=caps)
    truncated = Ttns(tree, tensors, spectra=None)
    out = contract(truncated)
    kept = {i: tensors[i].bond_dim for i in tree.edges}
    eps = {i: truncation_error(exact_spectra[i], caps[i]) for i in tree.edges}
    return TruncationResult("lazy", truncated, out, state, kept, eps,
                            error_sq(state, out), eps_lazy=discarded)


def verify_sandwich(result: TruncationResult, tol: float = BOUND_TOL) -> BoundsCheck:
    """max_i eps_i <= delta <= sum_i eps_i, with the given absolute slack."""
    lo, hi, d = result.max_eps, result.sum_eps, result.delta
    return BoundsCheck(
        "sandwich",
        passed=bool(lo - tol <= d <= hi + tol),
        values={"max_eps": lo, "delta": d, "sum_eps": hi},
        slacks={"lower": d - lo, "upper": hi - d},
    )


def verify_lazy_equality(result: TruncationResult, tol: float = BOUND_TOL) -> BoundsCheck:
    """delta equals the sum of per-step discarded weights (Pythagoras)."""
    total = float(sum(result.eps_lazy.values()))
    gap = abs(result.delta - total)
    return BoundsCheck("lazy_equality", passed=bool(gap <= tol),
                       values={"delta": result.delta, "sum_eps_lazy": total},
                       slacks={"abs_diff": gap})


def mps_channel_check(exact: Ttns) -> float:
    """Max residual of E_i(lambda_i^2) - lambda_{i-1}^2 over a linear tree.

    On the chain vertex ``i`` has child ``i - 1``, so ``A_i^sigma`` is a matrix
    from bond ``i`` to bond ``i - 1`` and E_i(rho) = sum_sigma A rho A^dagger
    maps edge-``i`` weights onto edge-``(i - 1)`` weights. The boundary bonds
    0 and N are one-dimensional and carry the total weight ||psi||^2.
    """
    tree = exact.tree
    if not is_linear(tree):
        raise NotLinearTree("channel identity applies to linear trees only")
    if exact.spectra is None:
        raise PlanShapeMismatch("channel check needs the exact spectra")
    n = tree.n
    root = exact.tensors[n].data
    total = float(np.vdot(root, root).real)
    bond = exact.bond_dims

    def weights(i):
        if i == 0 or i == n:
            return np.array([[total]])
        return np.diag(exact.spectra[i].weights[: bond[i]])

    worst = 0.0
    for i in range(1, n + 1):
        a = exact.tensors[i].data
        if i == 1:
            a = a.reshape(a.shape[0], 1, a.shape[-1])
        # a[sigma, left bond (i-1), right bond i]
        out = np.einsum("sab,bc,sdc->ad", a, weights(i), a.conj())
        worst = max(worst, float(np.max(np.abs(out - weights(i - 1)))))
    return worst


def mps_vc_bound(result: TruncationResult, tol: float = BOUND_TOL) -> BoundsCheck:
    """delta <= 2 sum eps on a chain; the tree bound delta <= sum eps is reported alongside."""
    if not is_linear(result.ttns.tree):
        raise NotLinearTree("the factor-two chain bound applies to linear trees only")
    d, s = result.delta, result.sum_eps
    return BoundsCheck(
        "mps_factor_two",
        passed=bool(d <= 2 * s + tol),
        values={"delta": d, "sum_eps": s, "twice_sum_eps": 2 * s},
        slacks={"tree_bound": s - d, "chain_bound": 2 * s - d},
    )


def cap_monotonicity_scan(exact: Ttns, caps: Mapping[int, int],
                          tol: float = BOUND_TOL) -> list[tuple[int, float, float]]:
    """Raise each cap by one in turn and log every case where delta grows.

    Projectors on different edges need not commute, so delta is not guaranteed
    to be monotone in a single cap. Returns ``(edge, delta_before, delta_after)``
    for every violation found.
    """
    bond = exact.bond_dims
    base = truncate_projector(exact, TruncationPlan(caps=dict(caps))).delta
    violations = []
    for i in exact.tree.edges:
        if caps[i] >= bond[i]:
            continue
        bigger = dict(caps)
        bigger[i] += 1
        after = truncate_projector(exact, TruncationPlan(caps=bigger)).delta
        if after > base + tol:
            log.info("delta grew from %.6g to %.6g when cap on edge %d rose to %d",
                     base, after, i, bigger[i])
            violations.append((i, base, after))
    return violations

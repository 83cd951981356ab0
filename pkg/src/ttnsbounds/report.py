"""Certified bounds reports.

A report bundles the per-edge spectra, the measured errors of both truncation
schemes and every bound evaluation with its Rényi parameter, validity and
pass/fail flag. Serialization is deterministic: sorted keys, floats printed
with 17 significant digits.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from . import entropy as eb
from .dense import DenseState, schmidt_decompose, state_to_bytes
from .errors import NoValidAlpha
from .targets import entropy_profile
from .tree import TreeGraph, branch
from .truncation import (BOUND_TOL, TruncationPlan, min_bond_dim, truncate_lazy,
                         truncate_projector, verify_lazy_equality, verify_sandwich)
from .ttns import exact_decompose

DEFAULT_ALPHAS = (0.25, 0.5, 0.75, 1.5, 2.0, 4.0)
SPECTRUM_CAP = 64
ELIDED_KEEP = 8


def dumps(obj: Any) -> str:
    """JSON with sorted keys and 17-significant-digit floats."""
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return '"NaN"'
        if math.isinf(x):
            return '"Infinity"' if x > 0 else '"-Infinity"'
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(f"{json.dumps(k)}:{dumps(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def alpha_key(alpha: float) -> str:
    return format(float(alpha), "g")


def digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def tree_digest(tree: TreeGraph) -> str:
    return digest(json.dumps(tree.to_dict(), sort_keys=True).encode())


def spectrum_entry(coeffs: np.ndarray, full: bool) -> Any:
    coeffs = np.asarray(coeffs, dtype=float)
    if full or len(coeffs) <= SPECTRUM_CAP:
        return [float(x) for x in coeffs]
    return {
        "elided": True,
        "length": len(coeffs),
        "head": [float(x) for x in coeffs[:ELIDED_KEEP]],
        "tail": [float(x) for x in coeffs[-ELIDED_KEEP:]],
        "sha256": digest(coeffs.astype("<f8").tobytes()),
    }


@dataclass
class _Row:
    name: str
    side: str
    valid: bool
    reason: str
    alpha: float | None = None
    edge: int | None = None
    value: float | None = None
    compared: float | None = None
    passed: bool | None = None
    slack: float | None = None
    extra: dict | None = None

    def as_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "extra"}
        if self.extra:
            d.update(self.extra)
        if not self.valid:
            d["value"] = None
            d["passed"] = None
        return d


def _bounded_above(name, edge, alpha, value, quantity, reason, **extra) -> _Row:
    """Row asserting quantity <= value."""
    return _Row(name, "upper", True, reason, alpha, edge, value, quantity,
                bool(quantity <= value + BOUND_TOL), value - quantity, extra or None)


def _bounded_below(name, edge, alpha, value, quantity, reason, **extra) -> _Row:
    """Row asserting value <= quantity."""
    return _Row(name, "lower", True, reason, alpha, edge, value, quantity,
                bool(value <= quantity + BOUND_TOL), quantity - value, extra or None)


def certify(state: DenseState, tree: TreeGraph, plan: TruncationPlan,
            alphas: Sequence[float] = DEFAULT_ALPHAS, full_spectra: bool = False) -> dict:
    """Run decomposition, both truncation schemes and all bound checks.

    ``state`` must already be in the tree's canonical site order.
    """
    alphas = sorted(set(float(a) for a in alphas))
    exact = exact_decompose(state, tree)
    proj = truncate_projector(exact, plan, target=state)
    lazy = truncate_lazy(state, tree, TruncationPlan(caps=proj.caps))
    caps = proj.caps

    dists = {i: eb.EdgeDistribution.from_spectrum(exact.spectra[i], tree.available_dim(i))
             for i in tree.edges}
    entropies = {i: {a: eb.renyi_entropy(dists[i], a) for a in alphas} for i in tree.edges}

    per_edge = []
    for i in tree.edges:
        spec = exact.spectra[i]
        per_edge.append({
            "edge": i,
            "parent": tree.parent[i],
            "available_dim": dists[i].available_dim,
            "bond_dim_exact": exact.bond_dims[i],
            "M_cap": caps[i],
            "epsilon": proj.eps[i],
            "epsilon_lazy": lazy.eps_lazy[i],
            "spectrum": spectrum_entry(spec.coefficients, full_spectra),
            "renyi": {alpha_key(a): entropies[i][a] for a in alphas},
        })

    rows: list[_Row] = []
    sand = verify_sandwich(proj)
    rows.append(_bounded_below("max_eps_le_delta", None, None, proj.max_eps, proj.delta,
                               "Eckart-Young"))
    rows.append(_bounded_above("delta_le_sum_eps", None, None, proj.sum_eps, proj.delta,
                               "telescoping projector sum"))
    lazy_eq = verify_lazy_equality(lazy)
    rows.append(_Row("lazy_delta_eq_sum_eps_lazy", "equality", True, "Pythagoras",
                     value=lazy_eq.values["sum_eps_lazy"], compared=lazy.delta,
                     passed=lazy_eq.passed, slack=-lazy_eq.slacks["abs_diff"]))
    rows.append(_bounded_below("max_eps_le_delta_lazy", None, None, lazy.max_eps, lazy.delta,
                               "Eckart-Young"))

    # entropy-side lower bounds on the error (alpha > 1)
    for a in (a for a in alphas if a > 1):
        per_edge_lower = []
        for i in tree.edges:
            s = entropies[i][a]
            val = eb.error_lower_bound(s, caps[i], a)
            literal = eb.error_lower_bound_literal(s, caps[i], a)
            per_edge_lower.append(val)
            rows.append(_bounded_below("entropy_error_lower", i, a, val, proj.eps[i],
                                       "alpha > 1", literal_form_value=literal))
        rows.append(_bounded_below("entropy_error_lower_max", None, a, max(per_edge_lower),
                                   proj.delta, "alpha > 1"))
        if proj.delta < 1:
            for i in tree.edges:
                lo = eb.bond_dim_lower_bound(entropies[i][a], proj.delta, a)
                m_needed = min_bond_dim(exact.spectra[i], proj.delta)
                rows.append(_bounded_below("entropy_bond_lower", i, a, lo, m_needed,
                                           "alpha > 1", M_cap=caps[i]))
    if proj.delta < 1:
        for i in tree.edges:
            m_needed = min_bond_dim(exact.spectra[i], proj.delta)
            rows.append(_bounded_below("bond_needed_le_cap", i, None, m_needed, caps[i],
                                       "Eckart-Young"))

    # entropy-side upper bounds on the error (alpha < 1, admissibility checked)
    for a in (a for a in alphas if a < 1):
        for i in tree.edges:
            ev = eb.error_upper_bound(entropies[i][a], caps[i], a, proj.eps[i])
            if ev.valid:
                rows.append(_bounded_above("entropy_error_upper", i, a, ev.value, proj.eps[i],
                                           ev.reason))
            else:
                rows.append(_Row("entropy_error_upper", "upper", False, ev.reason, a, i,
                                 compared=proj.eps[i]))
    try:
        best = [eb.optimize_alpha(dists[i], caps[i], "upper", alphas) for i in tree.edges]
        total = sum(b.value for b in best)
        rows.append(_bounded_above("sum_eps_le_sum_entropy_upper", None, None, total,
                                   proj.sum_eps, "alpha optimized per edge",
                                   alphas_used=[b.alpha for b in best]))
    except NoValidAlpha as exc:
        rows.append(_Row("sum_eps_le_sum_entropy_upper", "upper", False, str(exc),
                         compared=proj.sum_eps))

    # bond-dimension upper bounds when the plan is an error budget
    budget = plan.eps_per_edge
    if budget is None and plan.delta_total is not None and plan.split == "even":
        budget = plan.delta_total / (tree.n - 1)
    if budget is not None:
        for a in (a for a in alphas if a < 1):
            for i in tree.edges:
                m_min = min_bond_dim(exact.spectra[i], budget)
                ok, reason = eb.upper_alpha_validity(a, budget, m_min)
                if ok:
                    hi = eb.bond_dim_upper_bound(entropies[i][a], budget, a)
                    rows.append(_bounded_above("entropy_bond_upper", i, a, hi, m_min, reason,
                                               eps_budget=budget))
                else:
                    rows.append(_Row("entropy_bond_upper", "upper", False, reason, a, i,
                                     compared=m_min))

    bounds = [r.as_dict() for r in rows]
    verdict = all(r.passed for r in rows if r.valid) and sand.passed
    return {
        "instance": {
            "tree_digest": tree_digest(tree),
            "state_digest": digest(state_to_bytes(state)),
            "n": tree.n,
            "dims": list(tree.dims),
            "plan": plan.to_dict(),
            "alphas": alphas,
        },
        "per_edge": per_edge,
        "global": {
            "delta_projector": proj.delta,
            "delta_lazy": lazy.delta,
            "sum_eps": proj.sum_eps,
            "max_eps": proj.max_eps,
            "sum_eps_lazy": float(sum(lazy.eps_lazy.values())),
            "norm_truncated": proj.norm,
            "norm_truncated_lazy": lazy.norm,
            "sandwich_slack_lower": sand.slacks["lower"],
            "sandwich_slack_upper": sand.slacks["upper"],
        },
        "bounds": bounds,
        "verdict": bool(verdict),
    }


def profile(state: DenseState, tree: TreeGraph, alphas: Sequence[float],
            eps: float | None = None) -> dict:
    """Per-edge Rényi entropies and, for a budget ``eps``, the bond-dimension bracket."""
    alphas = sorted(set(float(a) for a in alphas))
    table = entropy_profile(state, tree, alphas)
    edges = []
    for i in tree.edges:
        entry = {"edge": i, "renyi": {alpha_key(a): table[i][a] for a in alphas}}
        if eps is not None:
            spec, _, _ = schmidt_decompose(state, branch(tree, i), edge=i)
            m_min = min_bond_dim(spec, eps)
            lows = [eb.bond_dim_lower_bound(table[i][a], eps, a) for a in alphas if a > 1]
            highs = []
            for a in (a for a in alphas if 0 < a < 1):
                ok, _ = eb.upper_alpha_validity(a, eps, m_min)
                if ok:
                    highs.append((eb.bond_dim_upper_bound(table[i][a], eps, a), a))
            lower = max(lows) if lows else None
            upper, upper_alpha = min(highs) if highs else (None, None)
            entry.update({
                "M_min": m_min,
                "M_lower": lower,
                "M_upper": upper,
                "M_upper_alpha": upper_alpha,
                "bracket_holds": bool((lower is None or lower <= m_min + BOUND_TOL)
                                      and (upper is None or m_min <= upper + BOUND_TOL)),
            })
        edges.append(entry)
    return {"alphas": alphas, "eps": eps, "edges": edges,
            "tree_digest": tree_digest(tree), "state_digest": digest(state_to_bytes(state))}


def profile_text(prof: dict) -> str:
    """Aligned-column rendering of :func:`profile` output."""
    keys = [alpha_key(a) for a in prof["alphas"]]
    head = ["edge"] + [f"S_{k}" for k in keys]
    if prof["eps"] is not None:
        head += ["M_lower", "M_min", "M_upper"]
    lines = []
    for e in prof["edges"]:
        cells = [str(e["edge"])] + [f"{e['renyi'][k]:.6f}" for k in keys]
        if prof["eps"] is not None:
            fmt = lambda x: "-" if x is None else f"{x:.4g}"
            cells += [fmt(e["M_lower"]), str(e["M_min"]), fmt(e["M_upper"])]
        lines.append(cells)
    widths = [max(len(r[c]) for r in [head] + lines) for c in range(len(head))]
    out = ["  ".join(h.rjust(w) for h, w in zip(head, widths))]
    out += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in lines]
    return "\n".join(out)

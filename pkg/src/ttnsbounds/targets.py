"""Target states: named families and ground states of small spin models on trees.

Conventions (Pauli matrices X, Z; spin operators S = sigma / 2)::

    ising: H = -sum_edges J_i Z_a Z_b - sum_v h_v X_v
    xxz:   H =  sum_edges J_i (Sx Sx + Sy Sy + Delta Sz Sz) - sum_v h_v Sz_v
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg

from .dense import DenseState, schmidt_decompose
from .entropy import renyi_entropy
from .errors import BadDims, DegenerateGroundSpace, DimMismatch, TooLarge
from .tree import TreeGraph, branch

MAX_SITES = 16
GAP_TOL = 1e-10


def make_named(name: str, dims: Sequence[int], seed: int | None = None) -> DenseState:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise BadDims(f"invalid dims {list(dims)}")
    size = int(np.prod(dims))
    amps = np.zeros(size, dtype=complex)
    if name == "product":
        amps[0] = 1.0
    elif name == "bell_pair":
        if dims != (2, 2):
            raise BadDims(f"bell_pair needs dims [2, 2], got {list(dims)}")
        amps[0] = amps[3] = 2**-0.5
    elif name in ("ghz", "w"):
        if any(d != 2 for d in dims):
            raise BadDims(f"{name} needs qubits, got dims {list(dims)}")
        n = len(dims)
        if name == "ghz":
            amps[0] = amps[-1] = 2**-0.5
        else:
            for k in range(n):
                amps[1 << (n - 1 - k)] = n**-0.5
    elif name == "random":
        rng = np.random.default_rng(seed)
        amps = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        amps /= np.linalg.norm(amps)
    else:
        raise ValueError(f"unknown state family {name!r}")
    return DenseState(dims, amps)


@dataclass(frozen=True)
class HamiltonianSpec:
    tree: TreeGraph
    model: str                          # "ising" or "xxz"
    couplings: Mapping[int, float]      # per edge id
    fields: Mapping[int, float]         # per vertex
    anisotropy: float = 1.0             # Delta for xxz

    @classmethod
    def uniform(cls, tree: TreeGraph, model: str, j: float, h: float,
                anisotropy: float = 1.0) -> "HamiltonianSpec":
        return cls(tree, model, {i: j for i in tree.edges}, {v: h for v in tree.vertices},
                   anisotropy)

    def __post_init__(self):
        if self.model not in ("ising", "xxz"):
            raise ValueError(f"unknown model {self.model!r}")
        if set(self.couplings) != set(self.tree.edges):
            raise BadDims("couplings must be given for every edge")
        if set(self.fields) != set(self.tree.vertices):
            raise BadDims("fields must be given for every vertex")
        if any(d != 2 for d in self.tree.dims):
            raise BadDims("spin models need d = 2 on every vertex")


def _zz_diag(n: int, a: int, b: int) -> np.ndarray:
    idx = np.arange(2**n)
    za = 1 - 2 * ((idx >> (n - a)) & 1)
    zb = 1 - 2 * ((idx >> (n - b)) & 1)
    return (za * zb).astype(float)


def _x_flip(n: int, v: int) -> np.ndarray:
    return np.arange(2**n) ^ (1 << (n - v))


def hamiltonian(spec: HamiltonianSpec) -> np.ndarray:
    """Dense real-symmetric Hamiltonian in the site-1-most-significant basis."""
    tree = spec.tree
    n = tree.n
    if n > MAX_SITES:
        raise TooLarge(f"{n} sites exceed the dense limit of {MAX_SITES}")
    dim = 2**n
    h = np.zeros((dim, dim))
    rows = np.arange(dim)
    if spec.model == "ising":
        diag = np.zeros(dim)
        for i in tree.edges:
            diag -= spec.couplings[i] * _zz_diag(n, i, tree.parent[i])
        h[rows, rows] = diag
        for v in tree.vertices:
            h[rows, _x_flip(n, v)] -= spec.fields[v]
    else:
        diag = np.zeros(dim)
        for i in tree.edges:
            a, b = i, tree.parent[i]
            jv = spec.couplings[i]
            diag += jv * spec.anisotropy * 0.25 * _zz_diag(n, a, b)
            # Sx Sx + Sy Sy = (S+S- + S-S+)/2 connects states with opposite spins on a, b
            ba = (rows >> (n - a)) & 1
            bb = (rows >> (n - b)) & 1
            mask = ba != bb
            src = rows[mask]
            dst = src ^ (1 << (n - a)) ^ (1 << (n - b))
            h[dst, src] += 0.5 * jv
        for v in tree.vertices:
            sz = 0.5 * (1 - 2 * ((rows >> (n - v)) & 1))
            diag -= spec.fields[v] * sz
        h[rows, rows] += diag
    return h


@dataclass
class GroundState:
    state: DenseState
    energy: float
    gap: float
    degenerate: bool = field(default=False)


def fix_phase(vec: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Rotate the global phase so the first non-negligible amplitude is real positive."""
    mag = np.abs(vec)
    k = int(np.argmax(mag > rtol * mag.max()))
    return vec * (np.conj(vec[k]) / mag[k])


def ground_state(spec: HamiltonianSpec) -> GroundState:
    h = hamiltonian(spec)
    n_levels = min(2, h.shape[0])
    evals, evecs = scipy.linalg.eigh(h, subset_by_index=[0, n_levels - 1])
    gap = float(evals[1] - evals[0]) if n_levels > 1 else float("inf")
    vec = fix_phase(evecs[:, 0].astype(complex))
    vec /= np.linalg.norm(vec)
    degenerate = gap < GAP_TOL
    if degenerate:
        warnings.warn(f"ground space is degenerate (gap {gap:.3g}); returned vector is "
                      "one arbitrary member", DegenerateGroundSpace, stacklevel=2)
    return GroundState(DenseState(spec.tree.dims, vec), float(evals[0]), gap, degenerate)


def entropy_profile(state: DenseState, tree: TreeGraph,
                    alphas: Sequence[float]) -> dict[int, dict[float, float]]:
    """Rényi entropies S_alpha of every single-edge cut, keyed ``[edge][alpha]``."""
    if tuple(state.dims) != tree.dims:
        raise DimMismatch(f"state dims {list(state.dims)} vs tree dims {list(tree.dims)}")
    norm2 = state.norm() ** 2
    table = {}
    for i in tree.edges:
        spec, _, _ = schmidt_decompose(state, branch(tree, i), edge=i)
        p = spec.weights / norm2
        table[i] = {float(a): renyi_entropy(p, a) for a in alphas}
    return table

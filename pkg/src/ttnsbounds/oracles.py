"""Dense reference computations used to cross-check the tensor-network routines.

Everything here works on full state vectors and explicit Schmidt bases of the
target state, independent of the TTNS code paths.
"""
from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .dense import DenseState, bipartite_matrix, schmidt_decompose
from .tree import TreeGraph, branch, complement


def reduced_density_spectrum(state: DenseState, part: Sequence[int]) -> np.ndarray:
    """Schmidt coefficients from eigenvalues of the reduced density matrix of ``part``.

    The partial trace is built explicitly with einsum over the complement.
    """
    a = sorted(part)
    b = [v for v in range(1, state.n + 1) if v not in a]
    t = state.tensor()
    letters = "abcdefghijklmnopqrstuvwxyz"
    upper = letters.upper()
    ket = "".join(letters[v - 1] for v in range(1, state.n + 1))
    bra = "".join((letters if v in b else upper)[v - 1] for v in range(1, state.n + 1))
    out = "".join(letters[v - 1] for v in a) + "".join(upper[v - 1] for v in a)
    rho = np.einsum(f"{ket},{bra}->{out}", t, t.conj())
    da = int(np.prod([state.dims[v - 1] for v in a]))
    evals = np.linalg.eigvalsh(rho.reshape(da, da))
    return np.sort(np.sqrt(np.clip(evals, 0.0, None)))[::-1]


def _apply_on_part(vec: DenseState, part: Sequence[int], op: np.ndarray) -> DenseState:
    a = sorted(part)
    b = [v for v in range(1, vec.n + 1) if v not in a]
    mat = op @ bipartite_matrix(vec, a)
    shape = [vec.dims[v - 1] for v in a + b]
    t = mat.reshape(shape)
    inv = np.argsort(a + b)
    return DenseState(vec.dims, t.transpose(inv).reshape(-1))


def edge_projectors(state: DenseState, tree: TreeGraph,
                    caps: Mapping[int, int]) -> dict[int, np.ndarray]:
    """Projector onto the leading ``caps[i]`` left Schmidt vectors of the target, per edge."""
    out = {}
    for i in tree.edges:
        _, left, _ = schmidt_decompose(state, branch(tree, i))
        u = left[:, : caps[i]]
        out[i] = u @ u.conj().T
    return out


def projector_truncation(state: DenseState, tree: TreeGraph,
                         caps: Mapping[int, int]) -> DenseState:
    """P_1 P_2 ... P_{N-1} |psi>, applying P_{N-1} first."""
    projs = edge_projectors(state, tree, caps)
    vec = state
    for i in reversed(list(tree.edges)):
        vec = _apply_on_part(vec, branch(tree, i), projs[i])
    return vec


def deviation_vectors(state: DenseState, tree: TreeGraph,
                      caps: Mapping[int, int]) -> dict[int, np.ndarray]:
    """Delta_j = P_1 ... P_{j-1} (1 - P_j) |psi> as flat amplitude arrays."""
    projs = edge_projectors(state, tree, caps)
    out = {}
    for j in tree.edges:
        kept = _apply_on_part(state, branch(tree, j), projs[j])
        vec = DenseState(state.dims, state.amplitudes - kept.amplitudes)
        for i in range(j - 1, 0, -1):
            vec = _apply_on_part(vec, branch(tree, i), projs[i])
        out[j] = vec.amplitudes
    return out


def lazy_truncation(state: DenseState, tree: TreeGraph,
                    caps: Mapping[int, int]) -> tuple[DenseState, dict[int, float]]:
    """Edge-by-edge dense Schmidt truncation of the running state.

    Returns the final state and the weight discarded at each step.
    """
    vec = state
    discarded = {}
    for i in tree.edges:
        part = branch(tree, i)
        spec, left, right = schmidt_decompose(vec, part)
        m = min(caps[i], len(spec))
        s = spec.coefficients
        discarded[i] = float(np.sum(s[m:] ** 2))
        mat = (left[:, :m] * s[:m]) @ right[:, :m].T
        rest = complement(tree, part)
        t = mat.reshape([vec.dims[v - 1] for v in part + rest])
        vec = DenseState(vec.dims, t.transpose(np.argsort(part + rest)).reshape(-1))
    return vec, discarded

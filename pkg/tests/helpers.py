"""Shared instance generators for the test suite."""
import numpy as np

from ttnsbounds.dense import DenseState
from ttnsbounds.tree import from_edge_list, random_tree

# 7 sites: root 7 with children 5, 6; 6 holds 3 and 4; 3 holds leaves 1, 2
FIG1_EDGES = [(7, 6), (7, 5), (6, 4), (6, 3), (3, 2), (3, 1)]


def fig1_tree():
    tree, _ = from_edge_list(FIG1_EDGES, [2] * 7, root_hint=7)
    return tree


def random_state(dims, rng):
    size = int(np.prod(dims))
    amps = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return DenseState(tuple(dims), amps / np.linalg.norm(amps))


def random_instance(rng, n_min=2, n_max=10, dim_choices=(2,)):
    n = int(rng.integers(n_min, n_max + 1))
    dims = [int(rng.choice(dim_choices)) for _ in range(n)]
    tree = random_tree(n, rng, dims=dims)
    return tree, random_state(tree.dims, rng)


def random_caps(rng, bond_dims):
    return {i: int(rng.integers(1, m + 1)) for i, m in bond_dims.items()}


def ghz(n):
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = amps[-1] = 2**-0.5
    return DenseState((2,) * n, amps)

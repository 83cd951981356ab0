"""Tree tensor network states: exact construction, contraction, canonical checks.

Tensor axis order is ``(sigma_i, child bonds ascending by child label, own bond)``;
the root carries an own bond of dimension 1.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .dense import RANK_RTOL, DenseState, SchmidtSpectrum
from .errors import DimMismatch, NotNormalized, ShapeInconsistent, SpectraUnavailable
from .tree import TreeGraph, tree_from_dict

NORMALIZATION_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class TtnsTensor:
    vertex: int
    data: np.ndarray

    @property
    def phys_dim(self) -> int:
        return self.data.shape[0]

    @property
    def child_bond_dims(self) -> tuple[int, ...]:
        return tuple(self.data.shape[1:-1])

    @property
    def bond_dim(self) -> int:
        return self.data.shape[-1]

    def as_matrix(self) -> np.ndarray:
        """The map from the own bond to (physical x child bonds), as a matrix."""
        return self.data.reshape(-1, self.bond_dim)


@dataclass(frozen=True, eq=False)
class Ttns:
    tree: TreeGraph
    tensors: dict[int, TtnsTensor]
    spectra: dict[int, SchmidtSpectrum] | None = None

    @property
    def bond_dims(self) -> dict[int, int]:
        return {i: self.tensors[i].bond_dim for i in self.tree.edges}

    def validate(self) -> None:
        tree = self.tree
        if set(self.tensors) != set(tree.vertices):
            raise ShapeInconsistent(f"tensors for {sorted(self.tensors)}, tree has 1..{tree.n}")
        for v in tree.vertices:
            t = self.tensors[v]
            kids = tree.children[v]
            if t.data.ndim != len(kids) + 2:
                raise ShapeInconsistent(
                    f"vertex {v}: tensor rank {t.data.ndim}, expected {len(kids) + 2}")
            if t.phys_dim != tree.dim(v):
                raise ShapeInconsistent(
                    f"vertex {v}: physical dim {t.phys_dim}, tree says {tree.dim(v)}")
            for c, m in zip(kids, t.child_bond_dims):
                if self.tensors[c].bond_dim != m:
                    raise ShapeInconsistent(
                        f"bond {c}: {m} at parent {v} but {self.tensors[c].bond_dim} at child")
        if self.tensors[tree.root].bond_dim != 1:
            raise ShapeInconsistent("root bond dimension must be 1")


def sequential_svd(state: DenseState, tree: TreeGraph, caps: Mapping[int, int] | None = None):
    """Split off one tensor per edge ``i = 1..N-1`` by SVD of the running remainder.

    The remainder carries the physical indices of not-yet-detached vertices and
    one open bond for each detached vertex whose parent is still attached. At
    step ``i`` the row group is ``sigma_i`` plus the open bonds of i's children.

    Returns ``(tensors, spectra, discarded)``: ``spectra[i]`` holds the full
    singular values at step ``i`` and ``discarded[i]`` the squared weight
    dropped there (numerical-rank cutoff plus any cap).
    """
    if tuple(state.dims) != tree.dims:
        raise DimMismatch(f"state dims {list(state.dims)} vs tree dims {list(tree.dims)}")
    t = state.tensor()
    labels: list[tuple[str, int]] = [("s", v) for v in tree.vertices]
    tensors: dict[int, TtnsTensor] = {}
    spectra: dict[int, SchmidtSpectrum] = {}
    discarded: dict[int, float] = {}

    def bring_front(t, labels, row):
        rest = [lab for lab in labels if lab not in row]
        t = t.transpose([labels.index(lab) for lab in row + rest])
        return t, rest

    for i in tree.edges:
        row = [("s", i)] + [("b", c) for c in tree.children[i]]
        t, rest = bring_front(t, labels, row)
        rshape, cshape = t.shape[: len(row)], t.shape[len(row):]
        mat = t.reshape(int(np.prod(rshape)), int(np.prod(cshape)))
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
        keep = int(np.count_nonzero(s > RANK_RTOL * s[0])) if s[0] > 0 else 1
        if caps is not None:
            keep = min(keep, int(caps[i]))
        keep = max(keep, 1)
        tensors[i] = TtnsTensor(i, u[:, :keep].reshape(*rshape, keep))
        spectra[i] = SchmidtSpectrum(i, s)
        discarded[i] = float(np.sum(s[keep:][::-1] ** 2))
        t = (s[:keep, None] * vh[:keep]).reshape(keep, *cshape)
        labels = [("b", i)] + rest

    root = tree.root
    row = [("s", root)] + [("b", c) for c in tree.children[root]]
    t, rest = bring_front(t, labels, row)
    assert not rest, rest
    tensors[root] = TtnsTensor(root, t.reshape(*t.shape, 1))
    return tensors, spectra, discarded


def exact_decompose(state: DenseState, tree: TreeGraph) -> Ttns:
    """Exact TTNS of a normalized state, canonical with the root as orthogonality center."""
    if tuple(state.dims) != tree.dims:
        raise DimMismatch(f"state dims {list(state.dims)} vs tree dims {list(tree.dims)}")
    if abs(state.norm() - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(f"state norm {state.norm():.17g} deviates from 1")
    tensors, spectra, _ = sequential_svd(state, tree)
    return Ttns(tree, tensors, spectra)


def subtree_tensor(ttns: Ttns, v: int) -> tuple[np.ndarray, list[int]]:
    """Contract all tensors in the branch of ``v``.

    Returns an array with axes (physical sites of the branch ascending, bond v)
    and the list of those sites.
    """
    tree = ttns.tree
    t = ttns.tensors[v].data
    labels: list[tuple[str, int]] = ([("s", v)] + [("b", c) for c in tree.children[v]]
                                     + [("b", v)])
    for c in tree.children[v]:
        tc, sites = subtree_tensor(ttns, c)
        ax = labels.index(("b", c))
        if t.shape[ax] != tc.shape[-1]:
            raise ShapeInconsistent(
                f"bond {c}: {t.shape[ax]} at parent {v} but {tc.shape[-1]} at child")
        t = np.tensordot(t, tc, axes=([ax], [tc.ndim - 1]))
        labels = labels[:ax] + labels[ax + 1:] + [("s", s) for s in sites]
    phys = sorted(lab for lab in labels if lab[0] == "s")
    t = t.transpose([labels.index(lab) for lab in phys + [("b", v)]])
    return t, [lab[1] for lab in phys]


def branch_basis(ttns: Ttns, edge: int) -> np.ndarray:
    """Columns are the branch states generated below ``edge`` for each bond value."""
    t, _ = subtree_tensor(ttns, edge)
    return t.reshape(-1, t.shape[-1])


def contract(ttns: Ttns) -> DenseState:
    """Sum over all bond indices, leaves to root."""
    ttns.validate()
    t, _ = subtree_tensor(ttns, ttns.tree.root)
    return DenseState(ttns.tree.dims, t.reshape(-1))


def check_canonical(ttns: Ttns) -> float:
    """Largest max-norm deviation of A_i^dagger A_i from the identity over i < N."""
    dev = 0.0
    for i in ttns.tree.edges:
        a = ttns.tensors[i].as_matrix()
        gram = a.conj().T @ a
        dev = max(dev, float(np.max(np.abs(gram - np.eye(gram.shape[0])))))
    return dev


def spectrum_from_ttns(ttns: Ttns, edge: int) -> SchmidtSpectrum:
    if ttns.spectra is None or edge not in ttns.spectra:
        raise SpectraUnavailable(f"no stored spectrum for edge {edge}")
    return ttns.spectra[edge]


# -- container format -------------------------------------------------------

def save_ttns(ttns: Ttns, path: str | Path) -> tuple[Path, Path]:
    """Write ``<path>`` (JSON manifest) and ``<path>.bin`` (tensor data)."""
    path = Path(path)
    blob_path = path.with_name(path.name + ".bin")
    entries, chunks, offset = [], [], 0
    for v in ttns.tree.vertices:
        data = np.ascontiguousarray(ttns.tensors[v].data, dtype=np.complex128)
        flat = np.empty(2 * data.size, dtype="<f8")
        flat[0::2] = data.real.reshape(-1)
        flat[1::2] = data.imag.reshape(-1)
        raw = flat.tobytes()
        entries.append({"vertex": v, "shape": list(data.shape), "offset": offset,
                        "nbytes": len(raw)})
        chunks.append(raw)
        offset += len(raw)
    manifest = {
        "format": "ttns-container",
        "version": 1,
        "tree": ttns.tree.to_dict(),
        "bond_dims": {str(i): m for i, m in ttns.bond_dims.items()},
        "tensors": entries,
        "spectra": None if ttns.spectra is None else {
            str(i): [float(x) for x in s.coefficients] for i, s in ttns.spectra.items()},
        "blob": blob_path.name,
    }
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True))
    blob_path.write_bytes(b"".join(chunks))
    return path, blob_path


def load_ttns(path: str | Path) -> Ttns:
    path = Path(path)
    manifest = json.loads(path.read_text())
    tree = tree_from_dict(manifest["tree"])
    tree = dataclasses.replace(tree, labeling=tuple(manifest["tree"]["labeling"]))
    blob = (path.parent / manifest["blob"]).read_bytes()
    tensors = {}
    for e in manifest["tensors"]:
        flat = np.frombuffer(blob, dtype="<f8", count=e["nbytes"] // 8, offset=e["offset"])
        data = (flat[0::2] + 1j * flat[1::2]).reshape(e["shape"])
        tensors[e["vertex"]] = TtnsTensor(e["vertex"], data)
    spectra = manifest.get("spectra")
    if spectra is not None:
        spectra = {int(i): SchmidtSpectrum(int(i), s) for i, s in spectra.items()}
    out = Ttns(tree, tensors, spectra)
    out.validate()
    return out

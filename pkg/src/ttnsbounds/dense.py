"""Dense state vectors and bipartite Schmidt decompositions.

Amplitudes are stored flat with site 1 as the most significant (slowest
varying) index. Site labels are 1-based throughout.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DimMismatch, EmptyPart, FullPart, StateFormatError

NORM_TOL = 1e-12
RANK_RTOL = 1e-14

MAGIC = b"TTNS"
FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class DenseState:
    dims: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        expected = int(np.prod(dims, dtype=np.int64)) if dims else 1
        if amps.size != expected:
            raise DimMismatch(f"{amps.size} amplitudes for dims {list(dims)} (need {expected})")
        amps.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n(self) -> int:
        return len(self.dims)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def normalized(self) -> "DenseState":
        return DenseState(self.dims, self.amplitudes / self.norm())

    def tensor(self) -> np.ndarray:
        """Amplitudes as an N-way array with axis k holding site k + 1."""
        return self.amplitudes.reshape(self.dims)


@dataclass(frozen=True, eq=False)
class SchmidtSpectrum:
    """Schmidt coefficients of one bipartition, sorted non-increasing."""

    edge: int | None
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.sort(np.asarray(self.coefficients, dtype=float).reshape(-1))[::-1].copy()
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    def __len__(self):
        return len(self.coefficients)

    @property
    def weights(self) -> np.ndarray:
        return self.coefficients**2

    @property
    def rank(self) -> int:
        """Numerical Schmidt rank (relative cutoff 1e-14 of the largest value)."""
        if len(self.coefficients) == 0 or self.coefficients[0] == 0:
            return 0
        return int(np.count_nonzero(self.coefficients > RANK_RTOL * self.coefficients[0]))


def _check_same_dims(a: DenseState, b: DenseState) -> None:
    if a.dims != b.dims:
        raise DimMismatch(f"dims {list(a.dims)} vs {list(b.dims)}")


def bipartite_matrix(state: DenseState, part: Iterable[int]) -> np.ndarray:
    """Reshape amplitudes to (prod d_A) x (prod d_rest), both groups in ascending site order."""
    a = sorted(set(int(v) for v in part))
    if not a:
        raise EmptyPart("subsystem A is empty")
    if any(not 1 <= v <= state.n for v in a):
        raise DimMismatch(f"part {a} has sites outside 1..{state.n}")
    if len(a) == state.n:
        raise FullPart("subsystem A covers every site")
    b = [v for v in range(1, state.n + 1) if v not in a]
    t = state.tensor().transpose([v - 1 for v in a + b])
    rows = int(np.prod([state.dims[v - 1] for v in a], dtype=np.int64))
    return t.reshape(rows, -1)


def schmidt_decompose(
    state: DenseState, part: Iterable[int], edge: int | None = None
) -> tuple[SchmidtSpectrum, np.ndarray, np.ndarray]:
    """Schmidt decomposition across ``part`` | complement.

    Returns ``(spectrum, left, right)`` with ``left @ diag(s) @ right.T`` equal
    to :func:`bipartite_matrix`. ``left`` and ``right`` have orthonormal columns.
    """
    mat = bipartite_matrix(state, part)
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    return SchmidtSpectrum(edge, s), u, vh.T


def inner(a: DenseState, b: DenseState) -> complex:
    """<a|b>, antilinear in ``a``."""
    _check_same_dims(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def error_sq(a: DenseState, b: DenseState) -> float:
    """Squared distance ||a - b||^2, clamped at zero."""
    _check_same_dims(a, b)
    # summing |a - b|^2 directly avoids the cancellation of the expanded
    # ||a||^2 - 2 Re<a|b> + ||b||^2 form and is non-negative by construction
    return float(np.sum(np.abs(a.amplitudes - b.amplitudes) ** 2))


def truncation_error(spectrum: SchmidtSpectrum | Sequence[float], m: int) -> float:
    """Discarded weight sum_{mu > m} lambda_mu^2."""
    coeffs = spectrum.coefficients if isinstance(spectrum, SchmidtSpectrum) else np.sort(
        np.asarray(spectrum, dtype=float))[::-1]
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    tail = coeffs[m:]
    return float(np.sum(tail[::-1] ** 2))


def permute_sites(state: DenseState, order: Sequence[int]) -> DenseState:
    """State whose site ``k`` is site ``order[k - 1]`` of ``state``."""
    axes = [int(v) - 1 for v in order]
    if sorted(axes) != list(range(state.n)):
        raise DimMismatch(f"{list(order)} is not a permutation of 1..{state.n}")
    t = state.tensor().transpose(axes)
    return DenseState(tuple(state.dims[a] for a in axes), t.reshape(-1))


def to_tree_order(state: DenseState, labeling: Sequence[int]) -> DenseState:
    """Relabel sites from original to canonical labels (``labeling[old - 1] = new``)."""
    order = [0] * len(labeling)
    for old, new in enumerate(labeling, start=1):
        order[new - 1] = old
    return permute_sites(state, order)


def from_tree_order(state: DenseState, labeling: Sequence[int]) -> DenseState:
    """Inverse of :func:`to_tree_order`."""
    return permute_sites(state, list(labeling))


# -- file formats -----------------------------------------------------------

def state_to_bytes(state: DenseState) -> bytes:
    head = MAGIC + struct.pack("<II", FORMAT_VERSION, state.n)
    head += struct.pack(f"<{state.n}I", *state.dims)
    body = np.empty(2 * state.amplitudes.size, dtype="<f8")
    body[0::2] = state.amplitudes.real
    body[1::2] = state.amplitudes.imag
    return head + body.tobytes()


def state_from_bytes(buf: bytes) -> DenseState:
    if len(buf) < 4 or buf[:4] != MAGIC:
        raise StateFormatError(f"bad magic {buf[:4]!r}, expected {MAGIC!r}", 0)
    if len(buf) < 12:
        raise StateFormatError("truncated header", len(buf))
    version, n = struct.unpack_from("<II", buf, 4)
    if version != FORMAT_VERSION:
        raise StateFormatError(f"unsupported format version {version}", 4)
    off = 12
    if len(buf) < off + 4 * n:
        raise StateFormatError(f"header announces {n} dims but file ends", len(buf))
    dims = struct.unpack_from(f"<{n}I", buf, off)
    if any(d < 1 for d in dims):
        bad = next(k for k, d in enumerate(dims) if d < 1)
        raise StateFormatError("local dimension must be >= 1", off + 4 * bad)
    off += 4 * n
    size = int(np.prod(dims, dtype=np.int64)) if n else 1
    need = off + 16 * size
    if len(buf) != need:
        raise StateFormatError(f"expected {need} bytes for dims {list(dims)}, got {len(buf)}",
                               min(len(buf), need))
    body = np.frombuffer(buf, dtype="<f8", offset=off)
    return DenseState(dims, body[0::2] + 1j * body[1::2])


def state_from_dict(data: dict) -> DenseState:
    re = np.asarray(data["re"], dtype=float)
    im = np.asarray(data.get("im", np.zeros_like(re)), dtype=float)
    return DenseState(tuple(data["dims"]), re + 1j * im)


def save_state(state: DenseState, path: str | Path) -> None:
    path = Path(path)
    if path.suffix == ".json":
        payload = {"dims": list(state.dims), "re": state.amplitudes.real.tolist(),
                   "im": state.amplitudes.imag.tolist()}
        path.write_text(json.dumps(payload))
    else:
        path.write_bytes(state_to_bytes(state))


def load_state(path: str | Path) -> DenseState:
    path = Path(path)
    buf = path.read_bytes()
    if buf[:1] == b"{":
        return state_from_dict(json.loads(buf))
    return state_from_bytes(buf)

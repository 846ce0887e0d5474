"""Dense operator algebra for small spin chains.

Everything here works on dense complex128 matrices. Hilbert spaces stay below
``2**MAX_SITES`` so full eigendecompositions are affordable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

MAX_SITES = 14

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class DimensionError(ValueError):
    """Operands live on Hilbert spaces of different dimension."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Operator:
    """A dense square matrix with optional Hermitian/unitary guarantees.

    The flags are checked on construction, so a flagged operator can be
    trusted downstream without re-verification.
    """

    entries: np.ndarray
    hermitian: bool = False
    unitary: bool = False

    def __post_init__(self):
        m = _frozen(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"operator must be square, got shape {m.shape}")
        object.__setattr__(self, "entries", m)
        if self.hermitian:
            err = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
            if err > HERMITIAN_TOL:
                raise ValueError(f"operator flagged Hermitian but deviates by {err:.3e}")
        if self.unitary:
            err = np.max(np.abs(m @ m.conj().T - np.eye(len(m)))) if m.size else 0.0
            if err > UNITARY_TOL:
                raise ValueError(f"operator flagged unitary but deviates by {err:.3e}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self.entries

    @property
    def dag(self) -> "Operator":
        return Operator(self.entries.conj().T, self.hermitian, self.unitary)

    def __matmul__(self, other):
        other_m = other.entries if isinstance(other, Operator) else other
        return Operator(self.entries @ other_m)

    @classmethod
    def hermitian_from(cls, matrix: np.ndarray) -> "Operator":
        """Wrap ``matrix`` after symmetrizing away rounding-level asymmetry."""
        m = np.asarray(matrix, dtype=complex)
        return cls((m + m.conj().T) / 2, hermitian=True)


def as_matrix(op) -> np.ndarray:
    """Return the raw ndarray behind an :class:`Operator` (or pass arrays through)."""
    if isinstance(op, Operator):
        return op.entries
    return np.asarray(op, dtype=complex)


def identity(dim: int) -> Operator:
    return Operator(np.eye(dim), hermitian=True, unitary=True)


def _check_sites(n_sites: int, max_sites: int = MAX_SITES):
    if n_sites < 1:
        raise ValueError("need at least one site")
    if n_sites > max_sites:
        raise ValueError(f"{n_sites} sites exceeds the dense limit of {max_sites}")


def embed_pauli(axis: str, site: int, n_sites: int, max_sites: int = MAX_SITES) -> Operator:
    """Single-site Pauli ``sigma^axis`` acting on ``site`` of an ``n_sites`` chain.

    Site 0 is the leftmost Kronecker factor (most significant bit of the
    computational-basis index).
    """
    if axis not in PAULI:
        raise ValueError(f"unknown Pauli axis {axis!r}")
    _check_sites(n_sites, max_sites)
    if not 0 <= site < n_sites:
        raise IndexError(f"site {site} out of range for {n_sites} sites")
    left = np.eye(2**site)
    right = np.eye(2 ** (n_sites - site - 1))
    m = np.kron(np.kron(left, PAULI[axis]), right)
    return Operator(m, hermitian=True, unitary=True)


def z_diagonal(site: int, n_sites: int) -> np.ndarray:
    """Diagonal (+1/-1 entries) of ``sigma^z`` on ``site``, without building the matrix."""
    if not 0 <= site < n_sites:
        raise IndexError(f"site {site} out of range for {n_sites} sites")
    idx = np.arange(2**n_sites)
    bit = (idx >> (n_sites - 1 - site)) & 1
    return 1.0 - 2.0 * bit


@dataclass(frozen=True)
class Cluster:
    """One eigenspace: representative eigenvalue and an orthonormal basis of it."""

    value: float
    vectors: np.ndarray  # D x degeneracy isometry

    @property
    def degeneracy(self) -> int:
        return self.vectors.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return self.vectors @ self.vectors.conj().T


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    clusters: tuple[Cluster, ...] = field(default_factory=tuple)

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    @property
    def values(self) -> list[float]:
        return [c.value for c in self.clusters]

    def projector(self, value: float, tol: float = 1e-6) -> np.ndarray:
        """Projector onto the cluster whose representative is ``value``."""
        for c in self.clusters:
            if abs(c.value - value) <= tol:
                return c.projector
        raise KeyError(f"no eigenspace with eigenvalue {value}")

    def cluster(self, value: float, tol: float = 1e-6) -> Cluster:
        for c in self.clusters:
            if abs(c.value - value) <= tol:
                return c
        raise KeyError(f"no eigenspace with eigenvalue {value}")


def eig_hermitian(op, cluster_tol: float | None = None) -> SpectralDecomposition:
    """Eigendecompose a Hermitian operator and merge near-degenerate eigenvalues.

    Eigenvalues closer than ``cluster_tol`` to their ascending neighbour share a
    cluster. The default tolerance is ``1e-9`` times the spectral range (with an
    absolute floor for operators proportional to the identity).
    """
    m = as_matrix(op)
    if not (isinstance(op, Operator) and op.hermitian):
        err = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if err > HERMITIAN_TOL * max(1.0, np.max(np.abs(m))):
            raise ValueError(f"eig_hermitian needs a Hermitian input (asymmetry {err:.3e})")
    try:
        evals, evecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("Hermitian eigensolver failed") from exc
    if cluster_tol is None:
        spread = evals[-1] - evals[0] if len(evals) else 0.0
        cluster_tol = max(1e-9 * spread, 1e-12 * max(1.0, np.max(np.abs(evals))))
    if cluster_tol <= 0:
        raise ValueError("cluster_tol must be positive")

    clusters = []
    start = 0
    for k in range(1, len(evals) + 1):
        if k == len(evals) or evals[k] - evals[k - 1] > cluster_tol:
            clusters.append(Cluster(float(np.mean(evals[start:k])), evecs[:, start:k]))
            start = k
    return SpectralDecomposition(evals, evecs, tuple(clusters))


def matrix_function(sd: SpectralDecomposition, f: Callable) -> Operator:
    """Apply a scalar function to an operator through its clustered spectrum.

    Every eigenvector in a cluster sees ``f`` evaluated at the cluster's
    representative value, so degenerate eigenspaces map to exact multiples of
    their projectors.
    """
    diag = np.empty(sd.dim, dtype=complex)
    pos = 0
    for c in sd.clusters:
        diag[pos:pos + c.degeneracy] = f(c.value)
        pos += c.degeneracy
    vecs = sd.eigenvectors
    return Operator((vecs * diag) @ vecs.conj().T)


def schatten_norm(op, p: float) -> float:
    """Schatten p-norm ``(sum_j s_j**p)**(1/p)``; ``p = inf`` gives the operator norm."""
    if not p >= 1:
        raise ValueError(f"Schatten norm needs p >= 1, got {p}")
    m = as_matrix(op)
    if isinstance(op, Operator) and op.hermitian:
        s = np.abs(np.linalg.eigvalsh(m))
    else:
        s = np.linalg.svd(m, compute_uv=False)
    if np.isinf(p):
        return float(np.max(s)) if s.size else 0.0
    smax = np.max(s) if s.size else 0.0
    if smax == 0:
        return 0.0
    # scale out the largest singular value to keep s**p finite
    return float(smax * np.sum((s / smax) ** p) ** (1.0 / p))


def trace_product(ops: Sequence) -> complex:
    """Trace of the left-to-right product of ``ops``.

    Entries may be :class:`Operator`, ndarray, or :class:`Cluster`. Clusters are
    used through their isometry ``B`` (projector ``B B^dag``), so products never
    materialize a full ``D x D`` intermediate for a low-rank projector. The
    cyclic order is rotated to start at the lowest-rank cluster.
    """
    ops = list(ops)
    if not ops:
        raise ValueError("trace_product needs at least one operator")
    dims = {(o.vectors.shape[0] if isinstance(o, Cluster) else as_matrix(o).shape[0]) for o in ops}
    if len(dims) != 1:
        raise DimensionError(f"mismatched dimensions {sorted(dims)}")

    ranks = [o.degeneracy if isinstance(o, Cluster) else None for o in ops]
    low = [k for k, r in enumerate(ranks) if r is not None]
    if not low:
        acc = as_matrix(ops[0])
        for o in ops[1:]:
            acc = acc @ as_matrix(o)
        return complex(np.trace(acc))

    first = min(low, key=lambda k: ranks[k])
    ops = ops[first:] + ops[:first]
    b0 = ops[0].vectors
    left = b0.conj().T
    for o in ops[1:]:
        if isinstance(o, Cluster):
            left = (left @ o.vectors) @ o.vectors.conj().T
        else:
            left = left @ as_matrix(o)
    return complex(np.trace(left @ b0))


def commutator(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    return a @ b - b @ a


def is_projector(p, tol: float = 1e-10) -> bool:
    m = as_matrix(p)
    return bool(np.max(np.abs(m @ m - m)) <= tol and np.max(np.abs(m - m.conj().T)) <= tol)


def resolves_identity(projectors: Iterable, tol: float = 1e-10) -> bool:
    total = None
    for p in projectors:
        m = as_matrix(p)
        total = m.copy() if total is None else total + m
    if total is None:
        return False
    return bool(np.max(np.abs(total - np.eye(len(total)))) <= tol)


@dataclass(frozen=True)
class ProjectorFamily:
    """Labelled orthogonal projectors stored as isometries ``B_k`` (``P_k = B_k B_k^dag``).

    Families built from a full eigenbasis resolve the identity; the stacked
    isometry ``basis`` is then unitary and block ``k`` spans eigenspace ``k``.
    """

    labels: tuple
    basis: np.ndarray  # D x R, columns grouped by label
    ranks: tuple[int, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.ranks):
            raise ValueError("one rank per label required")
        if sum(self.ranks) != self.basis.shape[1]:
            raise ValueError("ranks must partition the basis columns")

    @classmethod
    def from_decomposition(cls, sd: SpectralDecomposition) -> "ProjectorFamily":
        return cls.from_clusters(sd.clusters)

    @classmethod
    def from_clusters(cls, clusters: Sequence[Cluster]) -> "ProjectorFamily":
        labels = tuple(c.value for c in clusters)
        basis = np.hstack([c.vectors for c in clusters])
        return cls(labels, basis, tuple(c.degeneracy for c in clusters))

    @classmethod
    def from_projectors(cls, labels: Sequence, projectors: Sequence) -> "ProjectorFamily":
        """Factor dense projectors into isometries through their range."""
        blocks = []
        for p in projectors:
            evals, evecs = np.linalg.eigh(as_matrix(p))
            blocks.append(evecs[:, evals > 0.5])
        return cls(tuple(labels), np.hstack(blocks), tuple(b.shape[1] for b in blocks))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.ranks)])

    def __len__(self) -> int:
        return len(self.labels)

    def isometry(self, k: int) -> np.ndarray:
        o = self.offsets
        return self.basis[:, o[k]:o[k + 1]]

    def cluster(self, k: int) -> Cluster:
        return Cluster(self.labels[k], self.isometry(k))

    def projector(self, k: int) -> np.ndarray:
        b = self.isometry(k)
        return b @ b.conj().T

    def __getitem__(self, k: int) -> np.ndarray:
        return self.projector(k)

    def __iter__(self):
        return (self.projector(k) for k in range(len(self)))

    def index(self, label, tol: float = 1e-6) -> int:
        for k, lab in enumerate(self.labels):
            if lab == label or (np.isscalar(lab) and np.isscalar(label) and abs(lab - label) <= tol):
                return k
        raise KeyError(f"no projector labelled {label!r}")

    def conjugated(self, u) -> "ProjectorFamily":
        """Family ``{U^dag P_k U}`` (Heisenberg picture under ``U``)."""
        um = as_matrix(u)
        return ProjectorFamily(self.labels, um.conj().T @ self.basis, self.ranks)

    def resolves_identity(self, tol: float = 1e-10) -> bool:
        b = self.basis
        if b.shape[1] != b.shape[0]:
            return False
        return bool(np.max(np.abs(b @ b.conj().T - np.eye(self.dim))) <= tol)

    def block_sum(self, m: np.ndarray) -> np.ndarray:
        """Sum the entries of ``m`` (given in the family's basis) over label blocks."""
        o = self.offsets[:-1]
        return np.add.reduceat(np.add.reduceat(m, o, axis=0), o, axis=1)


def projector_family(projectors) -> ProjectorFamily:
    """Coerce a decomposition, family, or ``(label, projector)`` pairs to a family."""
    if isinstance(projectors, ProjectorFamily):
        return projectors
    if isinstance(projectors, SpectralDecomposition):
        return ProjectorFamily.from_decomposition(projectors)
    pairs = list(projectors)
    if pairs and isinstance(pairs[0], Cluster):
        return ProjectorFamily.from_clusters(pairs)
    labels = [lab for lab, _ in pairs]
    return ProjectorFamily.from_projectors(labels, [p for _, p in pairs])

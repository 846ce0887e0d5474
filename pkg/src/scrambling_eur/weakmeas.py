"""Weak-measurement detectors, Kraus operators, and the scrambling POVMs.

A Gaussian pointer of momentum width ``delta`` couples to a projector through
``exp(-i g~ (x - x0) Pi)``. Reading the pointer position with precision ``L``
yields the weak Kraus operators ``sqrt(P_l) 1 + g_l Pi`` on a discrete grid
``x_l = l L``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.special import erfcinv

from .operators import (
    Operator,
    ProjectorFamily,
    as_matrix,
    eig_hermitian,
    is_projector,
    projector_family,
)
from .models import evolution_operator

COMPLETENESS_TOL = 1e-9


@dataclass(frozen=True)
class DetectorModel:
    """Gaussian pointer and its coupling to the system.

    ``n_cells`` (odd) replaces the tail-mass window with a fixed symmetric grid;
    it exists for coarse test instances.
    """

    delta: float = 0.1
    precision: float = 0.1
    x0: float = 10.0
    coupling: float = 0.02
    tail_mass: float = 1e-12
    n_cells: int | None = None

    def __post_init__(self):
        if self.delta <= 0 or self.precision <= 0:
            raise ValueError("detector width and position precision must be positive")
        if not 0 < self.tail_mass < 1:
            raise ValueError("tail_mass must lie in (0, 1)")
        if self.n_cells is not None and (self.n_cells < 1 or self.n_cells % 2 == 0):
            raise ValueError("n_cells must be a positive odd integer")


@dataclass(frozen=True)
class DetectorGrid:
    outcomes: np.ndarray  # x_l
    probs: np.ndarray  # renormalized cell probabilities P_l
    couplings: np.ndarray  # g_l
    raw_probs: np.ndarray  # un-renormalized cell masses (L Delta / sqrt(pi)) exp(-Delta^2 x^2)
    model: DetectorModel | None = None

    def __len__(self) -> int:
        return len(self.outcomes)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.sqrt(self.probs)

    @property
    def coupling_ratio(self) -> np.ndarray:
        """``|g_l| / sqrt(P_l)``: the expansion parameter of the weak measurement."""
        return np.abs(self.couplings) / np.sqrt(self.probs)

    @property
    def window(self) -> tuple[float, float]:
        return float(self.outcomes[0]), float(self.outcomes[-1])

    @property
    def excluded_mass(self) -> float:
        """Gaussian mass outside the retained cells (before renormalization)."""
        if self.model is None:
            return float("nan")
        half = abs(self.outcomes[-1]) + self.model.precision / 2
        return float(math.erfc(self.model.delta * half))

    def metadata(self) -> dict:
        return {
            "n_cells": len(self),
            "x_min": self.window[0],
            "x_max": self.window[1],
            "raw_mass": float(self.raw_probs.sum()),
            "excluded_mass": self.excluded_mass,
            "max_coupling_ratio": float(self.coupling_ratio.max()),
        }


def build_detector_grid(model: DetectorModel) -> DetectorGrid:
    if model.n_cells is not None:
        half = model.n_cells // 2
    else:
        x_max = erfcinv(model.tail_mass) / model.delta
        half = int(math.ceil(x_max / model.precision))
    ell = np.arange(-half, half + 1)
    x = ell * model.precision
    raw = model.precision * model.delta / math.sqrt(math.pi) * np.exp(-(model.delta * x) ** 2)
    if not np.all(raw > 0):
        raise ValueError("detector grid has cells with vanishing probability")
    total = raw.sum()
    if not total > 0 or len(x) == 0:
        raise ValueError("empty detector grid")
    probs = raw / total
    g = np.sqrt(probs) * (np.exp(-1j * model.coupling * (x - model.x0)) - 1)
    return DetectorGrid(x, probs, g, raw, model)


def detector_grid(probs, couplings) -> DetectorGrid:
    """Grid from explicit ``(P_l, g_l)`` arrays, bypassing the Gaussian model."""
    probs = np.asarray(probs, dtype=float)
    couplings = np.asarray(couplings, dtype=complex)
    if abs(probs.sum() - 1) > 1e-12:
        raise ValueError("detector probabilities must sum to 1")
    return DetectorGrid(np.arange(len(probs), dtype=float), probs, couplings, probs.copy())


def is_nontrivial(delta: float, precision: float, n_sites: int) -> bool:
    """Whether the zeroth-order bound can be positive: ``L Delta <= sqrt(pi / 2**(N-1))``."""
    return precision * delta <= math.sqrt(math.pi / 2 ** (n_sites - 1))


def kraus_weak(grid: DetectorGrid, projector, outcome_index: int) -> Operator:
    """``sqrt(P_l) 1 + g_l Pi`` for the grid cell at position ``outcome_index``."""
    if not 0 <= outcome_index < len(grid):
        raise IndexError(f"outcome {outcome_index} outside the {len(grid)}-cell grid")
    p = as_matrix(projector)
    k = math.sqrt(grid.probs[outcome_index]) * np.eye(len(p)) + grid.couplings[outcome_index] * p
    return Operator(k)


class KrausSet:
    """An explicit list of labelled Kraus operators."""

    def __init__(self, labels, operators, kind: str, metadata: dict | None = None):
        self.labels = list(labels)
        self._operators = [as_matrix(k) for k in operators]
        if len(self.labels) != len(self._operators):
            raise ValueError("one label per Kraus operator required")
        self.kind = kind
        self.metadata = dict(metadata or {})

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self) -> Iterator[tuple[object, np.ndarray]]:
        return iter(zip(self.labels, self.operators()))

    @property
    def dim(self) -> int:
        return self._operators[0].shape[0]

    def operators(self) -> Iterator[np.ndarray]:
        return iter(self._operators)

    def effects(self) -> Iterator[np.ndarray]:
        """POVM elements ``K^dag K``."""
        for k in self.operators():
            yield k.conj().T @ k

    def probabilities(self, rho) -> np.ndarray:
        r = as_matrix(rho)
        return np.array([np.real(np.vdot(e, r)) for e in self.effects()])

    def completeness_error(self, adjoint: bool = False) -> float:
        """``max |sum K^dag K - 1|`` (or ``sum K K^dag`` when ``adjoint``)."""
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for k in self.operators():
            total += k @ k.conj().T if adjoint else k.conj().T @ k
        return float(np.max(np.abs(total - np.eye(self.dim))))


class ScramblingPOVM(KrausSet):
    """Forward or reverse POVM built from a weak V measurement and a strong W(t) one.

    Forward elements are ``Pi^W(t)_w K_j`` labelled ``(j, w)``; reverse elements
    are ``K_j^dag Pi^W(t)_w`` labelled ``(w, j)``. Operators are generated
    lazily; outcome probabilities use a trace expansion so the full set of
    ``|grid| * |W labels|`` matrices is never stored.
    """

    def __init__(self, grid: DetectorGrid, proj_v, wt: ProjectorFamily, kind: str = "forward"):
        self.grid = grid
        self.proj_v = as_matrix(proj_v)
        self.wt = wt
        self.kind = kind
        self.metadata = {}
        if self.proj_v.shape != (wt.dim, wt.dim):
            raise ValueError("V projector and W(t) projectors must share a dimension")
        if not is_projector(self.proj_v):
            raise ValueError("V projector is not an orthogonal projector")
        if not wt.resolves_identity():
            raise ValueError("W(t) projectors do not resolve the identity")

    @property
    def reverse(self) -> bool:
        return self.kind.endswith("reverse")

    @property
    def labels(self) -> list:
        if self.reverse:
            return [(w, j) for w in self.wt.labels for j in range(len(self.grid))]
        return [(j, w) for j in range(len(self.grid)) for w in self.wt.labels]

    def __len__(self) -> int:
        return len(self.grid) * len(self.wt)

    @property
    def dim(self) -> int:
        return self.wt.dim

    def operators(self) -> Iterator[np.ndarray]:
        q = [self.wt.projector(k) for k in range(len(self.wt))]
        eye = np.eye(self.dim)
        a, g = self.grid.amplitudes, self.grid.couplings
        if self.reverse:
            for qw in q:
                for j in range(len(self.grid)):
                    yield (a[j] * eye + np.conj(g[j]) * self.proj_v) @ qw
        else:
            for j in range(len(self.grid)):
                kj = a[j] * eye + g[j] * self.proj_v
                for qw in q:
                    yield qw @ kj

    def probabilities(self, rho) -> np.ndarray:
        """Outcome probabilities, ordered like :attr:`labels`."""
        r = as_matrix(rho)
        b = self.wt.basis
        bh = b.conj().T
        pi = self.proj_v
        a, g = self.grid.amplitudes, self.grid.couplings
        rho_w = bh @ r @ b
        occ = np.real(_block_traces(rho_w, self.wt))
        if self.reverse:
            # Q K K^dag Q with K K^dag = P 1 + (2 a Re g + |g|^2) Pi
            mix = np.real(_block_traces(rho_w, self.wt, bh @ pi @ b))
            shift = 2 * a * g.real + np.abs(g) ** 2
            table = occ[:, None] * self.grid.probs[None, :] + mix[:, None] * shift[None, :]
            return table.ravel()
        # K^dag Q K = P Q + a (g Q Pi + g* Pi Q) + |g|^2 Pi Q Pi
        cross = _block_traces(bh @ pi @ r @ b, self.wt)
        sand = np.real(_block_traces(bh @ pi @ r @ pi @ b, self.wt))
        table = (
            self.grid.probs[:, None] * occ[None, :]
            + 2 * (a[:, None] * g[:, None] * cross[None, :]).real
            + (np.abs(g) ** 2)[:, None] * sand[None, :]
        )
        return table.ravel()

    def completeness_error(self, adjoint: bool = False) -> float:
        # K^dag K = K K^dag = P 1 + (2 a Re g + |g|^2) Pi for every weak Kraus operator
        a, g = self.grid.amplitudes, self.grid.couplings
        c_id = self.grid.probs.sum()
        c_pi = np.sum(2 * a * g.real + np.abs(g) ** 2)
        eye = np.eye(self.dim)
        inner = c_id * eye + c_pi * self.proj_v
        if self.reverse != adjoint:
            # sum_w Q_w inner Q_w
            b = self.wt.basis
            m = b.conj().T @ inner @ b
            labels = np.repeat(np.arange(len(self.wt)), self.wt.ranks)
            m = np.where(labels[:, None] == labels[None, :], m, 0)
            total = b @ m @ b.conj().T
        else:
            total = inner
        return float(np.max(np.abs(total - eye)))


def _block_traces(m: np.ndarray, family: ProjectorFamily, other: np.ndarray | None = None) -> np.ndarray:
    """Per-label ``Tr(m_k)`` (or ``Tr(m_k other_k)``) over the family's diagonal blocks."""
    o = family.offsets
    if other is None:
        return np.array([np.trace(m[o[k]:o[k + 1], o[k]:o[k + 1]]) for k in range(len(family))])
    return np.array([
        np.sum(m[o[k]:o[k + 1], o[k]:o[k + 1]] * other[o[k]:o[k + 1], o[k]:o[k + 1]].T)
        for k in range(len(family))
    ])


def _check_shared_dim(proj_v, wt: ProjectorFamily):
    if as_matrix(proj_v).shape[0] != wt.dim:
        raise ValueError("V projector and W(t) projectors must share a dimension")


def forward_povm(grid: DetectorGrid, proj_v, wt_projectors) -> ScramblingPOVM:
    """Weak measurement of ``proj_v`` followed by a strong W(t) measurement."""
    wt = projector_family(wt_projectors)
    _check_shared_dim(proj_v, wt)
    kind = "fine_grained_forward" if max(wt.ranks) == 1 and len(wt) > 2 else "forward"
    return ScramblingPOVM(grid=grid, proj_v=proj_v, wt=wt, kind=kind)


def reverse_povm(grid: DetectorGrid, proj_v, wt_projectors) -> ScramblingPOVM:
    """Strong W(t) measurement followed by the conjugated weak measurement."""
    wt = projector_family(wt_projectors)
    _check_shared_dim(proj_v, wt)
    kind = "fine_grained_reverse" if max(wt.ranks) == 1 and len(wt) > 2 else "reverse"
    return ScramblingPOVM(grid=grid, proj_v=proj_v, wt=wt, kind=kind)


def weak_kraus_set(grid: DetectorGrid, projector) -> KrausSet:
    """All weak Kraus operators of one detector, labelled by cell index."""
    ops = [kraus_weak(grid, projector, j).entries for j in range(len(grid))]
    return KrausSet(range(len(grid)), ops, kind="weak_V")


def coarse_wt_projectors(w, h, t: float) -> ProjectorFamily:
    """Eigenspace projectors of ``W(t) = U^dag W U``, labelled by W eigenvalue."""
    sd = eig_hermitian(w)
    u = evolution_operator(h, t)
    return ProjectorFamily.from_decomposition(sd).conjugated(u)


def fine_grained_wt_projectors(w, h, t: float) -> ProjectorFamily:
    """Rank-1 projectors onto ``U^dag |e_k>`` for a computational-basis-diagonal ``W``.

    Labels are ``(w, k)``: the W eigenvalue of basis vector ``k`` and its
    position among the vectors sharing that eigenvalue.
    """
    wm = as_matrix(w)
    if np.max(np.abs(wm - np.diag(np.diag(wm)))) > 1e-12:
        raise ValueError("fine-graining needs W diagonal in the computational basis")
    diag = np.real(np.diag(wm))
    seen: dict[float, int] = {}
    labels = []
    for value in diag:
        key = float(value)
        labels.append((key, seen.get(key, 0)))
        seen[key] = seen.get(key, 0) + 1
    u = evolution_operator(h, t).entries
    return ProjectorFamily(tuple(labels), u.conj().T, tuple([1] * len(diag)))


def qubit_detector_kraus(gtilde: float) -> KrausSet:
    """Qubit pointer prepared in ``|x+>``, coupled by ``exp(-i g~ sigma^y_D sigma^z_S)``.

    Reading ``sigma^y`` of the pointer yields ``y = +1, -1``. Each Kraus
    operator ``<y| V_int |x+>`` is rephased so its identity coefficient is real
    and positive.
    """
    if abs(gtilde) >= math.pi / 2:
        raise ValueError("qubit detector needs |g~| < pi/2")
    x_plus = np.array([1, 1], dtype=complex) / math.sqrt(2)
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.diag([1.0, -1.0]).astype(complex)
    labels, ops = [], []
    for y in (1, -1):
        ket_y = np.array([1, 1j * y], dtype=complex) / math.sqrt(2)
        overlap = np.vdot(ket_y, x_plus)
        phase = abs(overlap) / overlap
        k = math.cos(gtilde) * overlap * np.eye(2) - 1j * math.sin(gtilde) * np.vdot(ket_y, sy @ x_plus) * sz
        labels.append(y)
        ops.append(phase * k)
    return KrausSet(labels, ops, kind="qubit_detector", metadata={"gtilde": gtilde})


def qubit_detector_couplings(gtilde: float) -> tuple[np.ndarray, np.ndarray]:
    """Coupling-free probabilities ``p_y = 1/2`` and first-order couplings ``-i y g~ / sqrt(2)``."""
    y = np.array([1, -1])
    return np.full(2, 0.5), -1j * y * gtilde / math.sqrt(2)

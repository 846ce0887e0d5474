"""OTOCs, OTOC quasiprobabilities, Kirkwood-Dirac distributions, and weak values."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .models import DensityState
from .operators import (
    Cluster,
    DimensionError,
    ProjectorFamily,
    SpectralDecomposition,
    as_matrix,
    commutator,
)

NORMALIZATIONS = ("state", "identity")
OVERLAP_TOL = 1e-12


class UndefinedWeakValueError(ValueError):
    """Raised when the postselection overlap vanishes and the weak value diverges."""


@dataclass(frozen=True)
class QuasiprobTable:
    """Dense quasiprobability over a product of outcome alphabets.

    ``values[i0, i1, ...]`` belongs to the labels ``axes[0][i0], axes[1][i1], ...``.
    ``normalization="identity"`` marks raw traces taken against the unnormalized
    identity, which sum to the Hilbert-space dimension.
    """

    axes: tuple
    values: np.ndarray
    normalization: str = "state"
    names: tuple = ()

    def __post_init__(self):
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
        axes = tuple(tuple(a) for a in self.axes)
        vals = np.array(self.values, dtype=complex, copy=True)
        if vals.shape != tuple(len(a) for a in axes):
            raise ValueError(f"values shape {vals.shape} does not match axes")
        vals.flags.writeable = False
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "values", vals)
        if self.names and len(self.names) != len(axes):
            raise ValueError("one name per axis required")

    @property
    def total(self) -> complex:
        return complex(self.values.sum())

    def index(self, labels: Sequence) -> tuple[int, ...]:
        return tuple(_label_index(ax, lab) for ax, lab in zip(self.axes, labels))

    def __call__(self, *labels) -> complex:
        if len(labels) != len(self.axes):
            raise ValueError(f"expected {len(self.axes)} labels, got {len(labels)}")
        return complex(self.values[self.index(labels)])

    def identity_normalized(self) -> "QuasiprobTable":
        """The raw-trace table divided by the dimension (the distribution of ``1/D``)."""
        if self.normalization != "identity":
            raise ValueError("only identity-normalized tables have a 1/D view")
        dim = self.values.sum().real
        return QuasiprobTable(self.axes, self.values / round(dim), "state", self.names)

    def coarse_grain(self, weights: Sequence[Sequence[complex]] | None = None) -> complex:
        """``sum_tuple prod_k weights[k][i_k] * value``; default weights are the axis labels."""
        if weights is None:
            weights = self.axes
        out = self.values
        for w in reversed(weights):
            out = out @ np.asarray(w, dtype=complex)
        return complex(out)

    def to_dict(self) -> dict:
        return {
            "axes": [list(_jsonable(a)) for a in self.axes],
            "names": list(self.names),
            "normalization": self.normalization,
            "real": self.values.real.tolist(),
            "imag": self.values.imag.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "QuasiprobTable":
        d = json.loads(text)
        axes = [[tuple(x) if isinstance(x, list) else x for x in a] for a in d["axes"]]
        vals = np.array(d["real"]) + 1j * np.array(d["imag"])
        return cls(tuple(axes), vals, d["normalization"], tuple(d["names"]))


@dataclass(frozen=True)
class WeakValue:
    value: complex
    initial: object
    final: object
    operator: str = "A"


def _jsonable(axis):
    return [list(x) if isinstance(x, tuple) else x for x in axis]


def _label_index(axis, label) -> int:
    for k, lab in enumerate(axis):
        if lab == label:
            return k
        if np.isscalar(lab) and np.isscalar(label) and abs(lab - label) <= 1e-9:
            return k
    raise KeyError(f"label {label!r} not on axis {axis}")


def _state_matrix(rho, dim: int | None = None) -> tuple[np.ndarray | None, str]:
    """``(matrix, normalization)``; ``None`` stands for the unnormalized identity."""
    if rho is None:
        return None, "identity"
    m = rho.matrix if isinstance(rho, DensityState) else as_matrix(rho)
    if dim is not None and m.shape != (dim, dim):
        raise DimensionError(f"state shape {m.shape} does not match dimension {dim}")
    return m, "state"


def _slot(projectors) -> tuple[tuple, list[np.ndarray]]:
    """Labels and dense matrices for one slot of a projector sequence."""
    if isinstance(projectors, SpectralDecomposition):
        projectors = ProjectorFamily.from_decomposition(projectors)
    if isinstance(projectors, ProjectorFamily):
        return projectors.labels, [projectors.projector(k) for k in range(len(projectors))]
    items = list(projectors)
    if items and isinstance(items[0], Cluster):
        return tuple(c.value for c in items), [c.projector for c in items]
    return tuple(lab for lab, _ in items), [as_matrix(p) for _, p in items]


def _check_resolution(mats: list[np.ndarray], tol: float = 1e-10):
    total = sum(mats)
    if np.max(np.abs(total - np.eye(total.shape[0]))) > tol:
        raise ValueError("projector set does not resolve the identity")


def _trace_against(op: np.ndarray, rho: np.ndarray | None) -> complex:
    return complex(np.trace(op) if rho is None else np.vdot(op.conj().T, rho))


def otoc(rho, v, wt) -> complex:
    """``Tr(W(t)^dag V^dag W(t) V rho)``; ``rho=None`` gives the raw trace."""
    vm, wm = as_matrix(v), as_matrix(wt)
    if vm.shape != wm.shape:
        raise DimensionError(f"V {vm.shape} and W(t) {wm.shape} differ in shape")
    r, _ = _state_matrix(rho, vm.shape[0])
    return _trace_against(wm.conj().T @ vm.conj().T @ wm @ vm, r)


def commutator_magnitude(rho, v, wt) -> float:
    """``<[W(t), V]^dag [W(t), V]>_rho``."""
    vm, wm = as_matrix(v), as_matrix(wt)
    if vm.shape != wm.shape:
        raise DimensionError(f"V {vm.shape} and W(t) {wm.shape} differ in shape")
    r, _ = _state_matrix(rho, vm.shape[0])
    c = commutator(wm, vm)
    return float(np.real(_trace_against(c.conj().T @ c, r)))


def kfold_quasiprobability(rho, projector_sequence: Sequence, names: Sequence[str] = ()) -> QuasiprobTable:
    """``Tr(P^(1)_a P^(2)_b ... P^(2K)_r rho)`` over every outcome tuple.

    Slots are ordered left to right as in the operator product.
    """
    slots = [_slot(s) for s in projector_sequence]
    if len(slots) == 0 or len(slots) % 2:
        raise ValueError(f"a K-fold sequence needs an even number of slots, got {len(slots)}")
    dim = slots[0][1][0].shape[0]
    for _, mats in slots:
        if mats[0].shape != (dim, dim):
            raise DimensionError("all projector slots must share a dimension")
        _check_resolution(mats)
    r, norm = _state_matrix(rho, dim)
    # fold from the right: partial[k...] = P_k ... rho
    partial = (np.eye(dim, dtype=complex) if r is None else r.astype(complex))[None]
    for _, mats in reversed(slots[1:]):
        stack = np.stack(mats)
        partial = np.einsum("aij,njk->anik", stack, partial).reshape(-1, dim, dim)
    first = np.stack(slots[0][1])
    vals = np.einsum("aij,nji->an", first, partial)
    shape = tuple(len(labels) for labels, _ in slots)
    return QuasiprobTable(tuple(labels for labels, _ in slots), vals.reshape(shape), norm, tuple(names))


def otoc_quasiprobability(rho, proj_v, proj_wt) -> QuasiprobTable:
    """``A(v1, w1, v2, w2) = Tr(Pi^W(t)_w2 Pi^V_v2 Pi^W(t)_w1 Pi^V_v1 rho)``.

    With ``rho=None`` the entries are raw traces against the identity; see
    :meth:`QuasiprobTable.identity_normalized` for the ``1/D`` view.
    """
    t = kfold_quasiprobability(rho, [proj_wt, proj_v, proj_wt, proj_v])
    vals = np.transpose(t.values, (3, 2, 1, 0))
    axes = (t.axes[3], t.axes[2], t.axes[1], t.axes[0])
    return QuasiprobTable(axes, vals, t.normalization, ("v1", "w1", "v2", "w2"))


def otoc_from_quasiprob(table: QuasiprobTable, v_values=None, w_values=None) -> complex:
    """``F = sum v1 w1 v2* w2* A(v1, w1, v2, w2)``; eigenvalues default to the axis labels."""
    v = np.asarray(table.axes[0] if v_values is None else v_values, dtype=complex)
    w = np.asarray(table.axes[1] if w_values is None else w_values, dtype=complex)
    return table.coarse_grain([v, w, v.conj(), w.conj()])


def kfold_otoc(rho, operators: Sequence) -> complex:
    """``Tr(A_1 A_2 ... A_2K rho)`` for Heisenberg-evolved operators ``A_k``."""
    mats = [as_matrix(a) for a in operators]
    if len(mats) == 0 or len(mats) % 2:
        raise ValueError(f"a K-fold correlator needs an even number of operators, got {len(mats)}")
    dim = mats[0].shape[0]
    if any(m.shape != (dim, dim) for m in mats):
        raise DimensionError("all operators must share a dimension")
    r, _ = _state_matrix(rho, dim)
    prod = np.eye(dim, dtype=complex)
    for m in mats:
        prod = prod @ m
    return _trace_against(prod, r)


def weak_value(proj_i, a, proj_f, initial=None, final=None, name: str = "A") -> WeakValue:
    """``A_w(i, f) = Tr(Pi^F_f A Pi^I_i) / (Tr(Pi^F_f Pi^I_i) Tr(Pi^I_i))``."""
    pi, am, pf = as_matrix(proj_i), as_matrix(a), as_matrix(proj_f)
    if not pi.shape == am.shape == pf.shape:
        raise DimensionError("weak-value operands must share a dimension")
    overlap = np.trace(pf @ pi)
    if abs(overlap) < OVERLAP_TOL:
        raise UndefinedWeakValueError(
            f"postselection overlap {abs(overlap):.3g} vanishes; the weak value is undefined"
        )
    value = np.trace(pf @ am @ pi) / (overlap * np.trace(pi).real)
    return WeakValue(complex(value), initial, final, name)


def kirkwood_dirac(proj_f, proj_a, proj_i) -> QuasiprobTable:
    """``Tr(Pi^F_f Pi^A_a Pi^I_i)`` over ``(f, a, i)``.

    The ``I`` slot may carry a state instead of projectors, given as a
    ``[(label, rho)]`` list.
    """
    fl, fm = _slot(proj_f)
    al, am = _slot(proj_a)
    il, im = _slot(proj_i)
    _check_resolution(fm)
    _check_resolution(am)
    vals = np.empty((len(fl), len(al), len(il)), dtype=complex)
    for (x, f), (y, pa), (z, p) in itertools.product(enumerate(fm), enumerate(am), enumerate(im)):
        vals[x, y, z] = np.trace(f @ pa @ p)
    return QuasiprobTable((fl, al, il), vals, "state", ("f", "a", "i"))


__all__ = [
    "QuasiprobTable",
    "UndefinedWeakValueError",
    "WeakValue",
    "commutator_magnitude",
    "kfold_otoc",
    "kfold_quasiprobability",
    "kirkwood_dirac",
    "otoc",
    "otoc_from_quasiprob",
    "otoc_quasiprobability",
    "weak_value",
]

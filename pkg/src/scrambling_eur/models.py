"""Spin-chain Hamiltonians, Heisenberg evolution, and initial states.

Units: hbar = 1 and times are measured in 1/J.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import (
    MAX_SITES,
    Operator,
    SpectralDecomposition,
    as_matrix,
    eig_hermitian,
    embed_pauli,
    matrix_function,
    z_diagonal,
)

VARIANTS = ("power_law", "transverse_field_only")


@dataclass(frozen=True)
class SpinChainModel:
    """Power-law quantum Ising chain.

    ``H = -J sum_{l<=range} sum_j l**-power Z_j Z_{j+l} - hx sum_j X_j - sum_j hz_j Z_j``
    with a staggered longitudinal field ``hz_j = hz_amp * (-1)**j`` and sites
    counted from ``j = 1``. The ``transverse_field_only`` variant keeps only
    nearest-neighbour bonds and drops the longitudinal field, which makes the
    chain integrable.
    """

    n_sites: int = 8
    coupling: float = 1.0
    power: float = 6.0
    range: int = 5
    hx: float = 1.05
    hz_amp: float = 0.375
    variant: str = "power_law"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.n_sites < 2:
            raise ValueError("a chain needs at least two sites")
        if self.n_sites > MAX_SITES:
            raise ValueError(f"{self.n_sites} sites exceeds the dense limit of {MAX_SITES}")
        if self.power <= 0:
            raise ValueError("power-law exponent must be positive")
        if not 1 <= self.range <= self.n_sites - 1:
            raise ValueError(f"interaction range {self.range} must lie in [1, {self.n_sites - 1}]")

    @property
    def dim(self) -> int:
        return 2**self.n_sites

    def longitudinal_fields(self) -> np.ndarray:
        """Site fields ``hz_j`` indexed by internal site ``i = j - 1``."""
        if self.variant == "transverse_field_only":
            return np.zeros(self.n_sites)
        j = np.arange(1, self.n_sites + 1)
        return self.hz_amp * (-1.0) ** j


def reference_model(**overrides) -> SpinChainModel:
    """The eight-qubit chain used for the scrambling figures."""
    params = dict(n_sites=8, coupling=1.0, power=6.0, range=5, hx=1.05, hz_amp=0.375)
    params.update(overrides)
    return SpinChainModel(**params)


def build_hamiltonian(model: SpinChainModel) -> Operator:
    n = model.n_sites
    zs = [z_diagonal(i, n) for i in range(n)]
    diag = np.zeros(model.dim)
    max_range = 1 if model.variant == "transverse_field_only" else model.range
    for ell in range(1, max_range + 1):
        weight = model.coupling * ell ** (-model.power)
        for i in range(n - ell):
            diag -= weight * zs[i] * zs[i + ell]
    for i, hz in enumerate(model.longitudinal_fields()):
        diag -= hz * zs[i]
    h = np.diag(diag).astype(complex)
    if model.hx != 0:
        for i in range(n):
            h -= model.hx * embed_pauli("x", i, n).entries
    return Operator(h, hermitian=True)


def _spectrum(h) -> SpectralDecomposition:
    return h if isinstance(h, SpectralDecomposition) else eig_hermitian(h)


def evolution_operator(h, t: float) -> Operator:
    """``U = exp(-i H t)``; ``h`` may be an operator or its decomposition."""
    sd = _spectrum(h)
    u = matrix_function(sd, lambda lam: np.exp(-1j * lam * t))
    return Operator(u.entries, unitary=True)


def heisenberg_evolve(op, h, t: float) -> Operator:
    """Heisenberg-picture operator ``U^dag op U`` with ``U = exp(-i H t)``."""
    m = as_matrix(op)
    sd = _spectrum(h)
    if m.shape != (sd.dim, sd.dim):
        raise ValueError(f"operator shape {m.shape} does not match Hamiltonian dim {sd.dim}")
    u = evolution_operator(sd, t).entries
    out = u.conj().T @ m @ u
    herm = isinstance(op, Operator) and op.hermitian
    unit = isinstance(op, Operator) and op.unitary
    if herm:
        out = (out + out.conj().T) / 2
    return Operator(out, hermitian=herm, unitary=unit)


@dataclass(frozen=True)
class DensityState:
    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1) > 1e-12:
            raise ValueError(f"density matrix trace {tr!r} != 1")
        if np.linalg.eigvalsh(m)[0] < -1e-12:
            raise ValueError("density matrix is not positive semidefinite")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


def _hermitian_normalized(m: np.ndarray) -> np.ndarray:
    m = (m + m.conj().T) / 2
    return m / np.trace(m).real


def gibbs_state(h, beta: float) -> DensityState:
    """Thermal state ``exp(-beta H) / Z`` with the ground energy shifted out."""
    if beta < 0:
        raise ValueError("inverse temperature must be non-negative")
    sd = _spectrum(h)
    e0 = sd.eigenvalues[0]
    weights = matrix_function(sd, lambda lam: np.exp(-beta * (lam - e0))).entries
    return DensityState(_hermitian_normalized(weights), label=f"gibbs beta={beta:g}")


def maximally_mixed(dim: int) -> DensityState:
    return DensityState(np.eye(dim) / dim, label="maximally mixed")


def basis_state(dim: int, index: int) -> DensityState:
    if not 0 <= index < dim:
        raise IndexError(f"basis index {index} out of range for dim {dim}")
    m = np.zeros((dim, dim), dtype=complex)
    m[index, index] = 1
    return DensityState(m, label=f"basis |{index}>")


def pure_state(psi: np.ndarray, label: str = "") -> DensityState:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return DensityState(_hermitian_normalized(np.outer(psi, psi.conj())), label=label)


def w_eigenstate(w, h, t_star: float, which: int = 0) -> DensityState:
    """Eigenstate ``U^dag |which>`` of ``W(t_star)`` for a computational-basis-diagonal ``W``."""
    wm = as_matrix(w)
    if np.max(np.abs(wm - np.diag(np.diag(wm)))) > 1e-12:
        raise ValueError("w_eigenstate needs W diagonal in the computational basis")
    dim = wm.shape[0]
    if not 0 <= which < dim:
        raise IndexError(f"eigenstate index {which} out of range for dim {dim}")
    u = evolution_operator(h, t_star).entries
    psi = u.conj().T[:, which]
    return pure_state(psi, label=f"W(t*={t_star:g}) eigenstate k={which}")

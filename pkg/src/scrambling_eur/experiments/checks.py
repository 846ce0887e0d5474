"""Randomized small-instance checks of the scrambling uncertainty relation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..bounds import (
    THEOREM_TOL,
    bound_exact_c,
    bound_traces,
    scrambling_bound_exact_trace,
    scrambling_bound_taylor,
)
from ..entropy import max_entropy, min_entropy, outcome_distribution, von_neumann_entropy
from ..models import DensityState
from ..operators import Operator, ProjectorFamily, eig_hermitian, embed_pauli
from ..weakmeas import DetectorModel, build_detector_grid, coarse_wt_projectors, forward_povm, reverse_povm

TAYLOR_SLACK = 0.05
TAYLOR_MAX_COUPLING = 0.05


@dataclass
class InstanceCheck:
    n_sites: int
    t: float
    gtilde: float
    v1: int
    v2: int
    lhs_vn: float
    lhs_minmax: float
    bound_exact_c: float
    bound_exact_trace: float
    bound_taylor: float

    @property
    def theorem_slack(self) -> float:
        return min(self.lhs_vn, self.lhs_minmax) - self.bound_exact_c

    @property
    def theorem_holds(self) -> bool:
        return self.theorem_slack >= -THEOREM_TOL

    @property
    def chain_holds(self) -> bool:
        """``-log c >= exact trace bound``, and the Taylor bound within slack at weak coupling."""
        ok = self.bound_exact_c >= self.bound_exact_trace - THEOREM_TOL
        if self.gtilde <= TAYLOR_MAX_COUPLING:
            ok = ok and self.bound_exact_trace >= self.bound_taylor - TAYLOR_SLACK
        return ok


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def random_density(rng: np.random.Generator, dim: int) -> DensityState:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    r = a @ a.conj().T
    r = (r + r.conj().T) / 2
    return DensityState(r / np.trace(r).real, label="random")


def random_instance(rng: np.random.Generator) -> InstanceCheck:
    """One instance: N in {2, 3}, random H, t, rho, g~ in [0, 0.3], 11-cell grid."""
    n = int(rng.choice([2, 3]))
    dim = 2**n
    h = Operator(random_hermitian(rng, dim), hermitian=True)
    sd = eig_hermitian(h)
    t = float(rng.uniform(0, 5))
    rho = random_density(rng, dim)
    gtilde = float(rng.uniform(0, 0.3))
    det = DetectorModel(delta=1.0, precision=0.5, x0=float(rng.uniform(-3, 3)), coupling=gtilde, n_cells=11)
    grid = build_detector_grid(det)
    v1, v2 = (int(x) for x in rng.choice([1, -1], size=2))
    proj_v = ProjectorFamily.from_decomposition(eig_hermitian(embed_pauli("z", 0, n)))
    wt = coarse_wt_projectors(embed_pauli("z", n - 1, n), sd, t)
    pi_1, pi_2 = proj_v.projector(proj_v.index(v1)), proj_v.projector(proj_v.index(v2))
    fwd, rev = forward_povm(grid, pi_1, wt), reverse_povm(grid, pi_2, wt)
    pf, pr = outcome_distribution(fwd, rho), outcome_distribution(rev, rho)
    tau = bound_traces(pi_1, pi_2, wt)
    return InstanceCheck(
        n_sites=n,
        t=t,
        gtilde=gtilde,
        v1=v1,
        v2=v2,
        lhs_vn=von_neumann_entropy(pf) + von_neumann_entropy(pr),
        lhs_minmax=min_entropy(pf) + max_entropy(pr),
        bound_exact_c=bound_exact_c(fwd, rev).value,
        bound_exact_trace=scrambling_bound_exact_trace(grid, proj_v, v1, v2, wt, traces=tau).value,
        bound_taylor=scrambling_bound_taylor(grid, proj_v, v1, v2, wt, traces=tau).value,
    )


def check_random_instances(n: int, seed: int = 0) -> list[InstanceCheck]:
    rng = np.random.default_rng(seed)
    return [random_instance(rng) for _ in range(n)]


def summarize(checks: list[InstanceCheck]) -> dict:
    return {
        "instances": len(checks),
        "theorem_failures": sum(not c.theorem_holds for c in checks),
        "chain_failures": sum(not c.chain_holds for c in checks),
        "worst_theorem_slack": min((c.theorem_slack for c in checks), default=math.nan),
    }

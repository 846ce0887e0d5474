"""Time sweeps of OTOCs, entropic left-hand sides, and uncertainty bounds."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..bounds import (
    BudgetExceededError,
    bound_exact_c,
    bound_traces,
    kfold_bound,
    scrambling_bound_exact_trace,
    scrambling_bound_taylor,
    weak_value_bound,
)
from ..entropy import entropy, entropy_pair_beta, max_entropy, min_entropy, outcome_distribution, von_neumann_entropy
from ..models import (
    DensityState,
    basis_state,
    build_hamiltonian,
    evolution_operator,
    gibbs_state,
    maximally_mixed,
    reference_model,
    pure_state,
    w_eigenstate,
)
from ..operators import PAULI, ProjectorFamily, eig_hermitian, embed_pauli
from ..quasiprob import kfold_otoc, kfold_quasiprobability, otoc, weak_value
from ..weakmeas import (
    DetectorModel,
    KrausSet,
    build_detector_grid,
    coarse_wt_projectors,
    fine_grained_wt_projectors,
    forward_povm,
    is_nontrivial,
    qubit_detector_couplings,
    qubit_detector_kraus,
    reverse_povm,
)
from .config import ExperimentConfig, fig4_config

THEOREM_TOL = 1e-9
T_STAR_LEVEL = 0.5


@dataclass
class SweepRecord:
    t: float
    otoc_re: float
    otoc_im: float
    lhs_vn: float
    lhs_minmax: float
    bound_taylor: float = math.nan
    bound_exact_trace: float = math.nan
    term_c0: float = math.nan
    term_g1_sum: float = math.nan
    term_g2_classical: float = math.nan
    term_quasi_cross: float = math.nan
    term_quasi_11: float = math.nan
    term_quasi_22: float = math.nan
    min_j1: int = -1
    min_j2: int = -1
    min_w: float = math.nan
    t_star_estimate: float = math.nan
    bound_exact_c: float = math.nan
    lhs_alpha: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def bounds(self) -> dict:
        out = {"taylor": self.bound_taylor, "exact_trace": self.bound_exact_trace, "exact_c": self.bound_exact_c}
        return {k: v for k, v in out.items() if not math.isnan(v)}

    @property
    def coupling_terms(self) -> float:
        """Sum of the coupling-dependent Taylor terms."""
        return (self.term_g1_sum + self.term_g2_classical + self.term_quasi_cross
                + self.term_quasi_11 + self.term_quasi_22)

    def satisfied(self) -> bool:
        lhs = [self.lhs_vn, self.lhs_minmax, *self.lhs_alpha.values()]
        return all(l >= b - THEOREM_TOL for l in lhs for b in self.bounds().values())


class SweepContext:
    """Per-configuration objects shared by every time point."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        model = config.model
        self.hamiltonian = build_hamiltonian(model)
        self.spectrum = eig_hermitian(self.hamiltonian)
        n = model.n_sites
        self.v = embed_pauli("z", 0, n)
        self.w = embed_pauli("z", n - 1, n)
        self.proj_v = ProjectorFamily.from_decomposition(eig_hermitian(self.v))
        self.grid = build_detector_grid(config.detector)
        self.rho = self._state()
        self.pi_1 = self.proj_v.projector(self.proj_v.index(config.protocol.v1))
        self.pi_2 = self.proj_v.projector(self.proj_v.index(config.protocol.v2))
        self.nontrivial = is_nontrivial(config.detector.delta, config.detector.precision, n)
        self.warnings = []
        if not self.nontrivial:
            self.warnings.append("nontriviality condition L*Delta <= sqrt(pi / 2**(N-1)) violated")
            warnings.warn(self.warnings[-1])

    def _state(self) -> DensityState:
        p = self.config.protocol
        dim = self.config.model.dim
        if p.state == "gibbs":
            return gibbs_state(self.spectrum, p.beta)
        if p.state == "w_eigenstate":
            return w_eigenstate(self.w, self.spectrum, p.t_star, p.which)
        if p.state == "maximally_mixed":
            return maximally_mixed(dim)
        return basis_state(dim, p.index)

    def wt_projectors(self, t: float) -> ProjectorFamily:
        if self.config.protocol.fine_grained:
            return fine_grained_wt_projectors(self.w, self.spectrum, t)
        return coarse_wt_projectors(self.w, self.spectrum, t)

    def wt_operator(self, t: float) -> np.ndarray:
        u = evolution_operator(self.spectrum, t).entries
        return u.conj().T @ self.w.entries @ u

    def metadata(self) -> dict:
        return {
            "grid": self.grid.metadata(),
            "nontrivial": self.nontrivial,
            "state": self.rho.label,
            "warnings": list(self.warnings),
        }


def evaluate_point(ctx: SweepContext, t: float) -> SweepRecord:
    cfg = ctx.config
    wt = ctx.wt_projectors(t)
    f = otoc(ctx.rho, ctx.v, ctx.wt_operator(t))
    fwd = forward_povm(ctx.grid, ctx.pi_1, wt)
    rev = reverse_povm(ctx.grid, ctx.pi_2, wt)
    pf = outcome_distribution(fwd, ctx.rho)
    pr = outcome_distribution(rev, ctx.rho)
    rec = SweepRecord(
        t=float(t),
        otoc_re=float(f.real),
        otoc_im=float(f.imag),
        lhs_vn=von_neumann_entropy(pf) + von_neumann_entropy(pr),
        lhs_minmax=min_entropy(pf) + max_entropy(pr),
    )
    for a in cfg.alphas:
        rec.lhs_alpha[a] = entropy(pf, a) + entropy(pr, entropy_pair_beta(a))
    p = cfg.protocol
    tau = bound_traces(ctx.pi_1, ctx.pi_2, wt)
    argmin = None
    if "exact_trace" in cfg.bound_methods:
        r = scrambling_bound_exact_trace(ctx.grid, ctx.proj_v, p.v1, p.v2, wt, traces=tau)
        rec.bound_exact_trace = r.value
        argmin = r.argmin
    if "taylor" in cfg.bound_methods:
        r = scrambling_bound_taylor(ctx.grid, ctx.proj_v, p.v1, p.v2, wt, traces=tau)
        rec.bound_taylor = r.value
        rec.term_c0 = r.terms["C0_term"]
        rec.term_g1_sum = r.terms["g1_terms"]
        rec.term_g2_classical = r.terms["g2_classical_terms"]
        rec.term_quasi_cross = r.terms["g2_quasi_cross"]
        rec.term_quasi_11 = r.terms["g2_quasi_11"]
        rec.term_quasi_22 = r.terms["g2_quasi_22"]
        rec.warnings.extend(r.warnings)
        argmin = r.argmin
    if "exact_c" in cfg.bound_methods:
        try:
            rec.bound_exact_c = bound_exact_c(fwd, rev).value
        except BudgetExceededError as exc:
            rec.warnings.append(str(exc))
    if argmin is not None:
        rec.min_j1, rec.min_j2 = argmin["j1"], argmin["j2"]
        w = argmin["w2"]
        rec.min_w = float(w[0] if isinstance(w, tuple) else w)
    return rec


def estimate_t_star(times, otoc_re, level: float = T_STAR_LEVEL) -> float:
    """First time ``Re F`` falls below ``level``, linearly interpolated; NaN if never."""
    times, vals = np.asarray(times, dtype=float), np.asarray(otoc_re, dtype=float)
    below = np.nonzero(vals < level)[0]
    if below.size == 0:
        return math.nan
    k = int(below[0])
    if k == 0:
        return float(times[0])
    t0, t1, f0, f1 = times[k - 1], times[k], vals[k - 1], vals[k]
    return float(t0 + (f0 - level) * (t1 - t0) / (f0 - f1))


def run_sweep(config: ExperimentConfig, context: SweepContext | None = None) -> list[SweepRecord]:
    """One record per time on the configured uniform grid, ordered by ``t``."""
    ctx = SweepContext(config) if context is None else context
    records = [evaluate_point(ctx, t) for t in config.sweep.times()]
    t_star = estimate_t_star([r.t for r in records], [r.otoc_re for r in records])
    for r in records:
        r.t_star_estimate = t_star
    return records


def run_fig4(config: ExperimentConfig | None = None, which: int = 0, t_star: float = 4.0) -> list[SweepRecord]:
    """Fine-grained sweep on a W(t*) eigenstate; the Taylor bound is suppressed."""
    cfg = fig4_config(which=which, t_star=t_star) if config is None else config
    methods = tuple(m for m in cfg.bound_methods if m != "taylor") or ("exact_trace",)
    cfg = cfg.replace(protocol={"fine_grained": True}, bound_methods=methods)
    ctx = SweepContext(cfg)
    records = run_sweep(cfg, ctx)
    ratio = float(ctx.grid.coupling_ratio.max())
    for r in records:
        r.warnings.append(f"Taylor expansion invalid: max |g|/sqrt(P) = {ratio:.3g}")
    return records


@dataclass
class QubitDemoRecord:
    gtilde: float
    lhs_minmax: float
    f_weak: float
    satisfied: bool
    weak_values: dict
    povm_i: dict
    povm_ii: dict


def _pauli_family(axis: str) -> ProjectorFamily:
    return ProjectorFamily.from_decomposition(eig_hermitian(PAULI[axis]))


def run_qubit_weakvalue_demo(gtilde: float = 0.02) -> QubitDemoRecord:
    """Weak sigma^y measurement with sigma^x postselection, probed on ``|z+>``.

    POVM I weakly measures ``A = sigma^y`` through the qubit detector and then
    measures ``F = sigma^x`` strongly; POVM II measures ``I = sigma^z``.
    """
    detector = qubit_detector_kraus(gtilde)
    fam_i, fam_f = _pauli_family("z"), _pauli_family("x")
    labels, ops = [], []
    for y, k in detector:
        for kf, x in enumerate(fam_f.labels):
            labels.append((y, int(x)))
            ops.append(fam_f.projector(kf) @ k)
    povm_i = KrausSet(labels, ops, kind="weak_A_then_F")
    povm_ii = KrausSet([int(z) for z in fam_i.labels], list(fam_i), kind="strong_I")
    rho = pure_state(np.array([1.0, 0.0]), label="|z+>")
    d1, d2 = outcome_distribution(povm_i, rho), outcome_distribution(povm_ii, rho)
    lhs = min_entropy(d1) + max_entropy(d2)
    probs, couplings = qubit_detector_couplings(gtilde)
    report = weak_value_bound(fam_i, PAULI["y"], fam_f, probs, couplings)
    wv = {}
    for ki, z in enumerate(fam_i.labels):
        for kf, x in enumerate(fam_f.labels):
            wv[(int(z), int(x))] = weak_value(fam_i.projector(ki), PAULI["y"], fam_f.projector(kf), z, x).value
    return QubitDemoRecord(
        gtilde=gtilde,
        lhs_minmax=lhs,
        f_weak=report.value,
        satisfied=bool(lhs >= report.value - THEOREM_TOL),
        weak_values=wv,
        povm_i=dict(zip(d1.labels, d1.probs.tolist())),
        povm_ii=dict(zip(d2.labels, d2.probs.tolist())),
    )


def run_kfold_demo(k: int = 3, t: float = 2.0, n_sites: int = 3, coupling: float = 0.02) -> dict:
    """K-fold OTOC of alternating ``W(t), V`` on a short chain, its quasiprobability, and bound.

    Checks the coarse-graining identity against the directly evaluated
    correlator and reports the zeroth-order bound with its quasiprobability
    term; each weak slot measures the ``+1`` eigenprojector.
    """
    if k < 2:
        raise ValueError("the K-fold demo needs K >= 2")
    model = reference_model(n_sites=n_sites, range=min(5, n_sites - 1))
    h = eig_hermitian(build_hamiltonian(model))
    v = embed_pauli("z", 0, n_sites)
    w = embed_pauli("z", n_sites - 1, n_sites)
    u = evolution_operator(h, t).entries
    wt_op = u.conj().T @ w.entries @ u
    proj_v = ProjectorFamily.from_decomposition(eig_hermitian(v))
    proj_wt = coarse_wt_projectors(w, h, t)
    rho = gibbs_state(h, 1.0)
    sequence = [proj_wt if s % 2 == 0 else proj_v for s in range(2 * k)]
    operators = [wt_op if s % 2 == 0 else v.entries for s in range(2 * k)]
    table = kfold_quasiprobability(rho, sequence)
    direct = kfold_otoc(rho, operators)
    coarse = table.coarse_grain()
    raw = kfold_quasiprobability(None, sequence)
    grid = build_detector_grid(DetectorModel(coupling=coupling))
    slots = [s for s in range(2 * k) if s not in (0, k)]
    report = kfold_bound(
        [grid.probs] * len(slots),
        sequence[0],
        sequence[k],
        couplings=[grid.couplings] * len(slots),
        table=raw,
        weak_labels=[1.0] * len(slots),
    )
    return {
        "k": k,
        "t": t,
        "kfold_otoc": direct,
        "coarse_grained": coarse,
        "identity_error": abs(direct - coarse),
        "normalization": table.total,
        "bound": report,
    }

"""Entropic uncertainty bounds for scrambling and for weak values.

Three evaluations of the scrambling bound are provided, from loosest to
tightest: a second-order Taylor expansion in the weak couplings, the exact
trace bound it is expanded from, and ``-log c`` with the exact POVM overlap.

The exact trace ``Tr(Q_w2 K_2 K_1^dag Q_w1 K_1 K_2^dag)``, with weak Kraus
operators ``K_i = a_i 1 + g_i Pi_i``, expands into sixteen products of
scalar detector coefficients and operator traces

    tau[x, y](w2, w1) = Tr(Q_w2 X_x Q_w1 Y_y),
    X = (1, Pi_1, Pi_2, Pi_2 Pi_1),  Y = (1, Pi_1, Pi_2, Pi_1 Pi_2),

so every detector pair ``(j1, j2)`` costs O(1) once the traces are known.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .entropy import entropy, entropy_pair_beta, outcome_distribution
from .operators import as_matrix, projector_family
from .quasiprob import QuasiprobTable, UndefinedWeakValueError, weak_value
from .weakmeas import DetectorGrid

TRACE_FLOOR = 1e-300
THEOREM_TOL = 1e-9
RATIO_WARN = 0.5
DEFAULT_C_BUDGET = 20_000_000

METHODS = ("taylor", "exact_trace", "exact_c")
TAYLOR_TERMS = (
    "C0_term",
    "g1_terms",
    "g2_classical_terms",
    "g2_quasi_cross",
    "g2_quasi_11",
    "g2_quasi_22",
)

class BudgetExceededError(RuntimeError):
    """The exact overlap would need more work than the configured budget."""


@dataclass
class BoundReport:
    """A bound value in bits, its minimizing outcome tuple, and its term decomposition."""

    value: float
    method: str
    argmin: dict = field(default_factory=dict)
    terms: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "argmin": {k: _plain(v) for k, v in self.argmin.items()},
            "terms": dict(self.terms),
            "details": dict(self.details),
            "warnings": list(self.warnings),
            "metadata": {k: _plain(v) for k, v in self.metadata.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _plain(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(np.real(x)), float(np.imag(x))]
    if isinstance(x, tuple):
        return [_plain(v) for v in x]
    return x


def _neg_log2(t):
    return -np.log2(np.maximum(t, TRACE_FLOOR))


def _v_projector(proj_v, label) -> np.ndarray:
    fam = projector_family(proj_v)
    return fam.projector(fam.index(label))


def bound_traces(pi_1, pi_2, wt) -> np.ndarray:
    """The sixteen traces ``tau[4x + y, w2, w1] = Tr(Q_w2 X_x Q_w1 Y_y)``.

    ``pi_1``, ``pi_2`` are the weakly measured projectors of the forward and
    reverse POVMs; ``wt`` is the strongly measured W(t) family.
    """
    fam = projector_family(wt)
    p1, p2 = as_matrix(pi_1), as_matrix(pi_2)
    eye = np.eye(fam.dim)
    b = fam.basis
    bh = b.conj().T
    mx = [bh @ x @ b for x in (eye, p1, p2, p2 @ p1)]
    my = [bh @ y @ b for y in (eye, p1, p2, p1 @ p2)]
    # Tr(Q2 X Q1 Y) = sum over block (w2, w1) of X_b[a, c] Y_b[c, a]
    return np.stack([fam.block_sum(mx[x] * my[y].T) for x in range(4) for y in range(4)])


def detector_coefficients(grid: DetectorGrid) -> tuple[np.ndarray, np.ndarray]:
    """Scalar factors ``F[j1, k]`` and ``H[j2, k]`` multiplying ``tau[k]``."""
    a = grid.amplitudes.astype(complex)
    g = grid.couplings
    fx = (a, g.conj(), a, g.conj())
    fy = (a, g, a, g)
    hx = (a, a, g, g)
    hy = (a, a, g.conj(), g.conj())
    f = np.stack([fx[x] * fy[y] for x in range(4) for y in range(4)], axis=1)
    h = np.stack([hx[x] * hy[y] for x in range(4) for y in range(4)], axis=1)
    return f, h


def exact_trace_table(grid_1: DetectorGrid, grid_2: DetectorGrid, tau: np.ndarray, w2: int, w1: int) -> np.ndarray:
    """``Tr(Q_w2 K_2 K_1^dag Q_w1 K_1 K_2^dag)`` over all ``(j1, j2)``."""
    f, _ = detector_coefficients(grid_1)
    _, h = detector_coefficients(grid_2)
    return np.real((f * tau[:, w2, w1]) @ h.T)


def scrambling_bound_exact_trace(
    grid: DetectorGrid,
    proj_v,
    v1,
    v2,
    wt,
    traces: np.ndarray | None = None,
    grid_2: DetectorGrid | None = None,
) -> BoundReport:
    """``min -log2 Tr(...)`` over ``(j1, j2, w1, w2)``, found by branch and bound.

    Each ``(w2, w1)`` block gets an upper bound on its largest trace from the
    coefficient magnitudes; blocks are visited in decreasing order of that
    bound and skipped once it falls below the best trace found.
    """
    if len(grid) == 0:
        raise ValueError("empty detector grid")
    grid_2 = grid if grid_2 is None else grid_2
    fam = projector_family(wt)
    pi_1, pi_2 = _v_projector(proj_v, v1), _v_projector(proj_v, v2)
    tau = bound_traces(pi_1, pi_2, fam) if traces is None else traces
    f, _ = detector_coefficients(grid)
    _, h = detector_coefficients(grid_2)
    scale = np.abs(f).max(axis=0) * np.abs(h).max(axis=0)
    ub = np.einsum("k,kab->ab", scale, np.abs(tau))
    order = np.argsort(-ub, axis=None, kind="stable")
    best, best_idx, visited = -np.inf, None, 0
    for flat in order:
        w2, w1 = np.unravel_index(flat, ub.shape)
        if ub[w2, w1] <= best:
            break
        table = np.real((f * tau[:, w2, w1]) @ h.T)
        visited += 1
        j1, j2 = np.unravel_index(np.argmax(table), table.shape)
        if table[j1, j2] > best:
            best, best_idx = table[j1, j2], (int(j1), int(j2), int(w1), int(w2))
    j1, j2, w1, w2 = best_idx
    return BoundReport(
        value=float(_neg_log2(best)),
        method="exact_trace",
        argmin={"j1": j1, "j2": j2, "w1": fam.labels[w1], "w2": fam.labels[w2],
                "x1": float(grid.outcomes[j1]), "x2": float(grid_2.outcomes[j2])},
        metadata={"max_trace": float(best), "blocks_visited": visited, "blocks_total": int(ub.size),
                  "v1": v1, "v2": v2},
    )


def _pair_sum(f, h, tau_w, pairs) -> np.ndarray:
    out = 0
    for x, y in pairs:
        k = 4 * x + y
        out = out + np.outer(f[:, k], h[:, k]) * tau_w[k]
    return np.real(out)


def scrambling_bound_taylor(
    grid: DetectorGrid,
    proj_v,
    v1,
    v2,
    wt,
    traces: np.ndarray | None = None,
    ratio_threshold: float = RATIO_WARN,
) -> BoundReport:
    """Second-order expansion of the exact trace bound on the ``w1 = w2`` branch.

    With leading term ``L = P_j1 P_j2 Tr(Q_w)`` and ``x`` the remaining
    contributions divided by ``L``, ``-log2(L (1 + x))`` is expanded as
    ``-log2 L - (x - x**2 / 2) / ln 2``, keeping every piece through second
    order in the couplings. The ``x**2`` piece (first-order ``x`` squared) is
    booked under the classical second-order terms.
    """
    if len(grid) == 0:
        raise ValueError("empty detector grid")
    fam = projector_family(wt)
    pi_1, pi_2 = _v_projector(proj_v, v1), _v_projector(proj_v, v2)
    tau = bound_traces(pi_1, pi_2, fam) if traces is None else traces
    f, h = detector_coefficients(grid)
    ln2 = math.log(2)
    probs = grid.probs
    best = None
    for w in range(len(fam)):
        tau_w = tau[:, w, w]
        lead = np.outer(probs, probs) * tau_w[0].real
        if not np.all(lead > 0):
            continue
        part = {
            "g1_j1": _pair_sum(f, h, tau_w, [(1, 0), (0, 1)]),
            "g1_j2": _pair_sum(f, h, tau_w, [(2, 0), (0, 2)]),
            "quasi_11": _pair_sum(f, h, tau_w, [(1, 1)]),
            "quasi_22": _pair_sum(f, h, tau_w, [(2, 2)]),
            "quasi_cross": _pair_sum(f, h, tau_w, [(1, 2), (2, 1)]),
            "delta": _pair_sum(f, h, tau_w, [(3, 0), (0, 3)]),
        }
        x1 = (part["g1_j1"] + part["g1_j2"]) / lead
        comp = {k: -v / (lead * ln2) for k, v in part.items()}
        comp["square"] = x1**2 / (2 * ln2)
        comp["C0"] = -np.log2(lead)
        total = sum(comp.values())
        j1, j2 = np.unravel_index(np.argmin(total), total.shape)
        if best is None or total[j1, j2] < best[0]:
            best = (total[j1, j2], int(j1), int(j2), w, {k: float(v[j1, j2]) for k, v in comp.items()})
    if best is None:
        raise ValueError("every W(t) branch has vanishing weight")
    value, j1, j2, w, comp = best
    terms = {
        "C0_term": comp["C0"],
        "g1_terms": comp["g1_j1"] + comp["g1_j2"],
        "g2_classical_terms": comp["delta"] + comp["square"],
        "g2_quasi_cross": comp["quasi_cross"],
        "g2_quasi_11": comp["quasi_11"],
        "g2_quasi_22": comp["quasi_22"],
    }
    value = float(sum(terms.values()))
    exact_here = float(_neg_log2(exact_trace_table(grid, grid, tau, w, w)[j1, j2]))
    ratio = grid.coupling_ratio
    warnings = []
    if ratio.max() > ratio_threshold:
        warnings.append(
            f"coupling ratio |g|/sqrt(P) reaches {ratio.max():.3g} > {ratio_threshold:g}; "
            "the expansion is unreliable on those cells"
        )
    return BoundReport(
        value=value,
        method="taylor",
        argmin={"j1": j1, "j2": j2, "w1": fam.labels[w], "w2": fam.labels[w],
                "x1": float(grid.outcomes[j1]), "x2": float(grid.outcomes[j2])},
        terms=terms,
        details={
            "g1_j1": comp["g1_j1"],
            "g1_j2": comp["g1_j2"],
            "g2_delta": comp["delta"],
            "g2_square": comp["square"],
        },
        warnings=warnings,
        metadata={
            "higher_order_remainder": exact_here - value,
            "coupling_ratio_at_argmin": float(max(ratio[j1], ratio[j2])),
            "coupling_ratio_max": float(ratio.max()),
            "v1": v1,
            "v2": v2,
        },
    )


def coupling_dependent_sum(report: BoundReport) -> float:
    """Sum of every Taylor term except the coupling-free ``C0_term``."""
    return float(sum(v for k, v in report.terms.items() if k != "C0_term"))


def overlap_operator(k_fwd, k_rev) -> np.ndarray:
    """``O = (K^F K^R)^dag (K^F K^R)``, whose top eigenvalue is the squared norm."""
    m = as_matrix(k_fwd) @ as_matrix(k_rev)
    return m.conj().T @ m


def _overlap(povm_fwd, povm_rev, budget: int):
    fwd = [as_matrix(k) for k in povm_fwd.operators()]
    rev = [as_matrix(k) for k in povm_rev.operators()]
    dim = fwd[0].shape[0]
    cost = dim * len(fwd) * len(rev)
    if cost > budget:
        raise BudgetExceededError(
            f"exact overlap needs {len(fwd)}x{len(rev)} products of {dim}-dim matrices "
            f"(size {cost} > budget {budget})"
        )
    stack = np.stack(rev)
    best, arg = -1.0, (0, 0)
    for i, kf in enumerate(fwd):
        norms = np.linalg.norm(kf @ stack, ord=2, axis=(1, 2))
        j = int(np.argmax(norms))
        if norms[j] ** 2 > best:
            best, arg = float(norms[j] ** 2), (i, j)
    return best, povm_fwd.labels[arg[0]], povm_rev.labels[arg[1]]


def overlap_c_exact(povm_fwd, povm_rev, budget: int = DEFAULT_C_BUDGET) -> float:
    """``c = max ||K^F K^R||^2`` over all forward/reverse outcome pairs.

    ``budget`` caps ``dim * |forward| * |reverse|``; this is a test oracle for
    small instances, not a production path.
    """
    return _overlap(povm_fwd, povm_rev, budget)[0]


def bound_exact_c(povm_fwd, povm_rev, budget: int = DEFAULT_C_BUDGET) -> BoundReport:
    c, lf, lr = _overlap(povm_fwd, povm_rev, budget)
    return BoundReport(
        value=float(-np.log2(c)),
        method="exact_c",
        argmin={"forward": lf, "reverse": lr},
        metadata={"c": c},
    )


def weak_value_bound(proj_i, a, proj_f, probs, couplings) -> BoundReport:
    """First-order weak-value bound ``f_weak`` minimized over ``(i, j, f)``.

    Tuples with vanishing ``Tr(Pi^F_f Pi^I_i)`` have undefined weak values and
    are left out of the minimum; they are listed in the report's warnings.
    """
    fam_i, fam_f = projector_family(proj_i), projector_family(proj_f)
    probs = np.asarray(probs, dtype=float)
    couplings = np.asarray(couplings, dtype=complex)
    if abs(probs.sum() - 1) > 1e-10:
        raise ValueError("detector probabilities must sum to 1")
    am = as_matrix(a)
    best, warnings = None, []
    for ki, li in enumerate(fam_i.labels):
        pi = fam_i.projector(ki)
        tr_i = np.trace(pi).real
        for kf, lf in enumerate(fam_f.labels):
            pf = fam_f.projector(kf)
            try:
                aw = weak_value(pi, am, pf, li, lf).value
            except UndefinedWeakValueError:
                warnings.append(f"weak value undefined at (i={li!r}, f={lf!r}); tuple excluded")
                continue
            overlap = np.trace(pf @ pi).real
            c0 = -np.log2(probs * overlap)
            g1 = -(2 / math.log(2)) * tr_i / np.sqrt(probs) * np.real(couplings * aw)
            total = c0 + g1
            j = int(np.argmin(total))
            if best is None or total[j] < best[0]:
                best = (float(total[j]), li, j, lf, float(c0[j]), float(g1[j]), aw)
    if best is None:
        raise UndefinedWeakValueError("every (i, f) pair has vanishing overlap")
    value, li, j, lf, c0, g1, aw = best
    return BoundReport(
        value=value,
        method="weak_value",
        argmin={"i": li, "j": j, "f": lf},
        terms={"C0_term": c0, "g1_terms": g1},
        warnings=warnings,
        metadata={"weak_value": aw},
    )


def kfold_bound(
    detector_probs: Sequence[Sequence[float]],
    proj_a,
    proj_f,
    couplings: Sequence[Sequence[complex]] | None = None,
    table: QuasiprobTable | None = None,
    weak_labels: Sequence | None = None,
) -> BoundReport:
    """Zeroth-order bound for the K-fold POVM pair, plus the quasiprobability term.

    ``detector_probs`` holds one probability list per weakly measured slot, in
    operator-product order ``B, ..., E, G, ..., R`` (``2K - 2`` slots). The
    value is ``-log2(prod_k P_jk * Tr(Pi^A_a Pi^F_f))`` minimized over outcomes,
    which separates into per-slot maxima. If ``couplings``, ``table`` (the
    identity-trace K-fold quasiprobability in product order ``A, B, ..., R``)
    and ``weak_labels`` (the projector label weakly measured in each slot) are
    given, the term ``prod_k g_jk * A(a, b, ..., r)`` at the minimizing tuple is
    reported. Intermediate-order coupling terms are not computed.
    """
    n_weak = len(detector_probs)
    if n_weak < 2 or n_weak % 2:
        raise ValueError(f"expected an even number (>= 2) of weak slots, got {n_weak}")
    k_fold = n_weak // 2 + 1
    fam_a, fam_f = projector_family(proj_a), projector_family(proj_f)
    js = [int(np.argmax(p)) for p in detector_probs]
    c0_det = -sum(math.log2(p[j]) for p, j in zip(detector_probs, js))
    overlaps = np.array([[np.trace(fam_a.projector(x) @ fam_f.projector(y)).real
                          for y in range(len(fam_f))] for x in range(len(fam_a))])
    ka, kf = np.unravel_index(np.argmax(overlaps), overlaps.shape)
    value = c0_det + float(_neg_log2(overlaps[ka, kf]))
    la, lf = fam_a.labels[ka], fam_f.labels[kf]
    terms = {"C0_term": value}
    metadata = {"k_fold": k_fold}
    if couplings is not None and table is not None and weak_labels is not None:
        if len(couplings) != n_weak or len(weak_labels) != n_weak:
            raise ValueError("one coupling list and one weak label per weak slot required")
        if len(table.axes) != 2 * k_fold:
            raise ValueError(f"table has {len(table.axes)} slots, expected {2 * k_fold}")
        gprod = complex(np.prod([complex(g[j]) for g, j in zip(couplings, js)]))
        first, second = list(weak_labels[: k_fold - 1]), list(weak_labels[k_fold - 1:])
        quasi = table(la, *first, lf, *second)
        metadata["quasi_term"] = gprod * quasi
        terms["quasi_kfold_re"] = float(np.real(gprod * quasi))
    return BoundReport(
        value=value,
        method="kfold_zeroth",
        argmin={"j": tuple(js), "a": la, "f": lf},
        terms=terms,
        metadata=metadata,
    )


@dataclass(frozen=True)
class TheoremCheck:
    lhs: float
    rhs: float
    satisfied: bool
    alpha: float
    beta: float
    method: str

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs


def theorem1_check(
    rho,
    alpha: float,
    povm_fwd,
    povm_rev,
    method: str = "exact_c",
    report: BoundReport | None = None,
    bound_inputs: dict | None = None,
) -> TheoremCheck:
    """Compare ``H_alpha(forward) + H_beta(reverse)`` with a chosen right-hand side.

    ``exact_c`` is computed from the POVMs; ``taylor`` and ``exact_trace``
    take either a finished ``report`` or ``bound_inputs`` (keyword arguments of
    the matching bound function).
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    beta = entropy_pair_beta(alpha)
    lhs = entropy(outcome_distribution(povm_fwd, rho), alpha) + entropy(outcome_distribution(povm_rev, rho), beta)
    if report is None:
        if method == "exact_c":
            report = bound_exact_c(povm_fwd, povm_rev)
        elif bound_inputs is None:
            raise ValueError(f"method {method!r} needs a report or bound_inputs")
        elif method == "taylor":
            report = scrambling_bound_taylor(**bound_inputs)
        else:
            report = scrambling_bound_exact_trace(**bound_inputs)
    rhs = report.value
    return TheoremCheck(lhs, rhs, bool(lhs >= rhs - THEOREM_TOL), alpha, beta, method)


__all__ = [
    "BoundReport",
    "BudgetExceededError",
    "TheoremCheck",
    "bound_exact_c",
    "bound_traces",
    "coupling_dependent_sum",
    "detector_coefficients",
    "exact_trace_table",
    "kfold_bound",
    "overlap_c_exact",
    "overlap_operator",
    "scrambling_bound_exact_trace",
    "scrambling_bound_taylor",
    "theorem1_check",
    "weak_value_bound",
]

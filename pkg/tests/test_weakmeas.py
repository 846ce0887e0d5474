import math

import numpy as np
import pytest
from oracles import SZ, chain_hamiltonian, expm_herm, forward_ops, gaussian_grid, kron_site, probs, reverse_ops

from scrambling_eur.models import DensityState
from scrambling_eur.operators import Operator, ProjectorFamily, embed_pauli
from scrambling_eur.weakmeas import (
    DetectorModel,
    build_detector_grid,
    coarse_wt_projectors,
    detector_grid,
    fine_grained_wt_projectors,
    forward_povm,
    is_nontrivial,
    kraus_weak,
    qubit_detector_couplings,
    qubit_detector_kraus,
    reverse_povm,
    weak_kraus_set,
)

SMALL = DetectorModel(delta=1.0, precision=0.5, x0=1.3, coupling=0.2, n_cells=11)


def random_rho(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    r = a @ a.conj().T
    return r / np.trace(r).real


class TestDetectorGrid:
    def test_model_validation(self):
        with pytest.raises(ValueError):
            DetectorModel(delta=0)
        with pytest.raises(ValueError):
            DetectorModel(tail_mass=1.0)
        with pytest.raises(ValueError):
            DetectorModel(n_cells=4)

    def test_reference_grid(self):
        grid = build_detector_grid(DetectorModel())
        centre = len(grid) // 2
        assert grid.outcomes[centre] == 0
        assert grid.raw_probs[centre] == pytest.approx(0.1 * 0.1 / math.sqrt(math.pi))
        assert grid.raw_probs[centre] == pytest.approx(5.64e-3, rel=1e-3)
        assert grid.probs.sum() == pytest.approx(1, abs=1e-12)
        assert grid.excluded_mass <= 1e-12
        assert len(grid) == 1011

    def test_coupling_modulus(self):
        m = DetectorModel(coupling=0.3)
        grid = build_detector_grid(m)
        expected = 2 * grid.probs * (1 - np.cos(m.coupling * (grid.outcomes - m.x0)))
        assert np.max(np.abs(np.abs(grid.couplings) ** 2 - expected)) < 1e-12

    def test_zero_coupling(self):
        assert np.all(build_detector_grid(DetectorModel(coupling=0)).couplings == 0)

    def test_zero_phase_cell(self):
        grid = build_detector_grid(DetectorModel(x0=10.0))
        k = int(np.argmin(np.abs(grid.outcomes - 10.0)))
        assert grid.couplings[k] == 0

    def test_matches_oracle(self):
        grid = build_detector_grid(SMALL)
        x, p, g = gaussian_grid(1.0, 0.5, 1.3, 0.2, 5)
        assert np.allclose(grid.outcomes, x) and np.allclose(grid.probs, p) and np.allclose(grid.couplings, g)

    def test_coupling_ratio_reference_values(self):
        grid = build_detector_grid(DetectorModel())
        ratio = grid.coupling_ratio
        bulk = np.abs(grid.outcomes) <= 20
        assert ratio[bulk].max() < 0.7
        # the far tails of the 1e-12 window are not perturbative
        assert ratio.max() > 1

    def test_explicit_grid(self):
        grid = detector_grid([0.25, 0.75], [0.1j, 0])
        assert len(grid) == 2
        with pytest.raises(ValueError):
            detector_grid([0.5, 0.6], [0, 0])


def test_nontriviality():
    assert is_nontrivial(0.1, 0.1, 8)
    assert 0.01 <= math.sqrt(math.pi / 128)
    assert not is_nontrivial(1.0, 1.0, 8)


class TestWeakKraus:
    def test_zero_coupling(self):
        grid = build_detector_grid(DetectorModel(coupling=0, delta=1, precision=0.5, n_cells=5))
        p = np.diag([1.0, 0])
        assert np.allclose(kraus_weak(grid, p, 2).entries, math.sqrt(grid.probs[2]) * np.eye(2))

    def test_effect_proportional_to_identity(self):
        grid = build_detector_grid(SMALL)
        p = np.diag([1.0, 0, 1, 0])
        for j in range(len(grid)):
            k = kraus_weak(grid, p, j).entries
            assert np.max(np.abs(k.conj().T @ k - grid.probs[j] * np.eye(4))) < 1e-12

    def test_completeness(self):
        ks = weak_kraus_set(build_detector_grid(DetectorModel()), np.diag([1.0, 0]))
        assert ks.completeness_error() < 1e-9
        assert ks.completeness_error(adjoint=True) < 1e-9

    def test_index_error(self):
        with pytest.raises(IndexError):
            kraus_weak(build_detector_grid(SMALL), np.eye(2), 11)


def small_instance(n=2, t=0.7, model=SMALL):
    h = chain_hamiltonian(n, ell0=1)
    u = expm_herm(h, t)
    v = kron_site(SZ, 0, n)
    w = kron_site(SZ, n - 1, n)
    pv = {s: (np.eye(2**n) + s * v) / 2 for s in (1, -1)}
    q = [u.conj().T @ (np.eye(2**n) + s * w) / 2 @ u for s in (-1, 1)]
    wt = coarse_wt_projectors(Operator(w, hermitian=True), Operator(h, hermitian=True), t)
    return build_detector_grid(model), pv, q, wt


class TestScramblingPOVMs:
    def test_forward_matches_oracle(self, rng):
        grid, pv, q, wt = small_instance()
        rho = random_rho(rng, 4)
        povm = forward_povm(grid, pv[1], wt)
        oracle = probs(forward_ops(grid.probs, grid.couplings, pv[1], q), rho)
        assert np.max(np.abs(povm.probabilities(rho) - oracle)) < 1e-12
        assert len(povm) == len(grid) * 2
        assert povm.labels[:2] == [(0, -1.0), (0, 1.0)]
        for op, ref in zip(povm.operators(), forward_ops(grid.probs, grid.couplings, pv[1], q)):
            assert np.allclose(op, ref)

    def test_reverse_matches_oracle(self, rng):
        grid, pv, q, wt = small_instance()
        rho = random_rho(rng, 4)
        povm = reverse_povm(grid, pv[-1], wt)
        ref_ops = reverse_ops(grid.probs, grid.couplings, pv[-1], q)
        assert np.max(np.abs(povm.probabilities(rho) - probs(ref_ops, rho))) < 1e-12
        for op, ref in zip(povm.operators(), ref_ops):
            assert np.allclose(op, ref)
        assert povm.labels[0] == (-1.0, 0)

    def test_completeness_both_ways(self):
        grid, pv, q, wt = small_instance()
        for povm in (forward_povm(grid, pv[1], wt), reverse_povm(grid, pv[1], wt)):
            assert povm.completeness_error() < 1e-9
            assert povm.completeness_error(adjoint=True) < 1e-9
            # the generic (explicit-sum) computation agrees with the analytic one
            from scrambling_eur.weakmeas import KrausSet

            explicit = KrausSet(povm.labels, list(povm.operators()), povm.kind)
            assert explicit.completeness_error() < 1e-9
            assert explicit.completeness_error(adjoint=True) < 1e-9

    def test_effects_positive(self):
        grid, pv, q, wt = small_instance()
        for povm in (forward_povm(grid, pv[1], wt), reverse_povm(grid, pv[-1], wt)):
            for e in povm.effects():
                assert np.linalg.eigvalsh(e).min() >= -1e-12

    def test_weak_limit_factorizes(self, rng):
        model = DetectorModel(delta=1.0, precision=0.5, coupling=0.0, n_cells=11)
        grid, pv, q, wt = small_instance(model=model)
        rho = random_rho(rng, 4)
        occ = np.array([np.trace(qw @ rho).real for qw in q])
        fwd = forward_povm(grid, pv[1], wt).probabilities(rho).reshape(len(grid), 2)
        rev = reverse_povm(grid, pv[-1], wt).probabilities(rho).reshape(2, len(grid))
        assert np.allclose(fwd, np.outer(grid.probs, occ), atol=1e-14)
        assert np.allclose(rev, np.outer(occ, grid.probs), atol=1e-14)

    def test_real_coupling_fixed_point(self):
        # x0 placed so one cell sees phase pi: g there is real and K^dag = K
        model = DetectorModel(delta=1.0, precision=0.5, x0=math.pi / 0.5, coupling=0.5, n_cells=11)
        grid, pv, q, wt = small_instance(model=model)
        k = int(np.argmin(np.abs(grid.outcomes)))
        assert abs(grid.couplings[k].imag) < 1e-12
        povm = reverse_povm(grid, pv[1], wt)
        ops = list(povm.operators())
        kmat = kraus_weak(grid, pv[1], k).entries
        assert np.allclose(ops[k], kmat @ q[0])

    def test_validation(self):
        grid, pv, q, wt = small_instance()
        with pytest.raises(ValueError):
            forward_povm(grid, np.eye(2), wt)
        with pytest.raises(ValueError):
            forward_povm(grid, 0.5 * np.eye(4), wt)
        broken = ProjectorFamily(wt.labels[:1], wt.isometry(0), wt.ranks[:1])
        with pytest.raises(ValueError):
            forward_povm(grid, pv[1], broken)

    def test_fine_grained_kind(self, rng):
        h = chain_hamiltonian(3, ell0=2)
        w = Operator(kron_site(SZ, 2, 3), hermitian=True)
        fine = fine_grained_wt_projectors(w, Operator(h, hermitian=True), 1.0)
        grid = build_detector_grid(SMALL)
        povm = forward_povm(grid, np.diag([1.0] * 4 + [0] * 4), fine)
        assert povm.kind == "fine_grained_forward"
        assert reverse_povm(grid, np.diag([1.0] * 4 + [0] * 4), fine).kind == "fine_grained_reverse"
        rho = random_rho(rng, 8)
        ref = np.array([np.trace(k.conj().T @ k @ rho).real for k in povm.operators()])
        assert np.max(np.abs(povm.probabilities(rho) - ref)) < 1e-12


class TestFineGrained:
    def test_single_qubit_t0(self):
        fam = fine_grained_wt_projectors(Operator(SZ, hermitian=True), Operator(np.eye(2), hermitian=True), 0.0)
        assert np.allclose(fam.projector(0), np.diag([1, 0]))
        assert np.allclose(fam.projector(1), np.diag([0, 1]))
        assert fam.labels == ((1.0, 0), (-1.0, 0))

    def test_resolution_and_grouping(self, chain):
        fine = fine_grained_wt_projectors(chain.w, chain.spectrum, 3.0)
        coarse = coarse_wt_projectors(chain.w, chain.spectrum, 3.0)
        assert fine.resolves_identity()
        for k, w in enumerate(coarse.labels):
            members = [i for i, lab in enumerate(fine.labels) if lab[0] == w]
            assert len(members) == 128
            b = fine.basis[:, members]
            assert np.max(np.abs(b @ b.conj().T - coarse.projector(k))) < 1e-10

    def test_rejects_non_diagonal(self, chain):
        with pytest.raises(ValueError):
            fine_grained_wt_projectors(embed_pauli("x", 7, 8), chain.spectrum, 1.0)


class TestQubitDetector:
    def test_probabilities_and_couplings(self):
        p, g = qubit_detector_couplings(0.02)
        assert np.allclose(p, 0.5)
        assert np.allclose(g, [-0.02j / math.sqrt(2), 0.02j / math.sqrt(2)])

    @pytest.mark.parametrize("gt", [0.0, 0.02, 0.3, 1.2])
    def test_exact_completeness(self, gt):
        ks = qubit_detector_kraus(gt)
        total = sum(k.conj().T @ k for k in ks.operators())
        assert np.max(np.abs(total - np.eye(2))) < 1e-15
        assert ks.labels == [1, -1]

    def test_first_order_form(self):
        gt = 1e-4
        p, g = qubit_detector_couplings(gt)
        for (y, k), pj, gj in zip(qubit_detector_kraus(gt), p, g):
            first = math.sqrt(pj) * np.eye(2) + gj * SZ
            assert np.max(np.abs(k - first)) < gt**2
            assert k[0, 0].real > 0

    def test_rejects_large_coupling(self):
        with pytest.raises(ValueError):
            qubit_detector_kraus(2.0)


def test_outcome_labels_density_dims(chain):
    grid = build_detector_grid(DetectorModel())
    wt = coarse_wt_projectors(chain.w, chain.spectrum, 0.0)
    povm = forward_povm(grid, chain.proj_v.projector(1), wt)
    p = povm.probabilities(DensityState(np.eye(256) / 256).matrix)
    assert p.sum() == pytest.approx(1, abs=1e-12)

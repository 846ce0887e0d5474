import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import shannon

from scrambling_eur.entropy import (
    OutcomeDistribution,
    entropy,
    entropy_pair_beta,
    max_entropy,
    min_entropy,
    outcome_distribution,
    renyi_entropy,
    von_neumann_entropy,
)
from scrambling_eur.weakmeas import DetectorModel, build_detector_grid, coarse_wt_projectors, forward_povm, reverse_povm

ALPHAS = [0.5, 0.75, 2.0, 3.0, math.inf]


def dist(p):
    return OutcomeDistribution.from_probs(p)


def simplex(n):
    return st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n).filter(lambda v: sum(v) > 1e-3).map(
        lambda v: np.array(v) / sum(v)
    )


class TestKnownValues:
    @pytest.mark.parametrize("alpha", [1.0, *ALPHAS])
    def test_uniform(self, alpha):
        assert entropy(dist(np.full(8, 1 / 8)), alpha) == pytest.approx(3)

    @pytest.mark.parametrize("alpha", [1.0, *ALPHAS])
    def test_point_mass(self, alpha):
        assert entropy(dist([0, 1, 0]), alpha) == pytest.approx(0, abs=1e-15)

    def test_collision_entropy(self):
        assert renyi_entropy(dist([0.75, 0.25]), 2) == pytest.approx(-math.log2(0.625))
        assert renyi_entropy(dist([0.75, 0.25]), 2) == pytest.approx(0.678, abs=1e-3)

    def test_shannon(self):
        assert von_neumann_entropy(dist([0.5, 0.25, 0.25])) == pytest.approx(1.5)

    def test_min_max(self):
        p = dist([0.5, 0.25, 0.25])
        assert min_entropy(p) == pytest.approx(1)
        assert max_entropy(p) == pytest.approx(2 * math.log2(math.sqrt(0.5) + 2 * math.sqrt(0.25)))


class TestProperties:
    def test_monotone_in_alpha(self, rng):
        orders = [0.5, 0.9, 1.0, 1.5, 2.0, 5.0, math.inf]
        for _ in range(100):
            p = dist(rng.dirichlet(np.ones(6)))
            h = [entropy(p, a) for a in orders]
            assert all(a >= b - 1e-12 for a, b in zip(h, h[1:]))

    @settings(max_examples=50, deadline=None)
    @given(simplex(5))
    def test_max_entropy_is_log_fidelity_with_uniform(self, p):
        # H_max(p) = log2 (sum_i sqrt(p_i))^2
        assert max_entropy(p) == pytest.approx(2 * math.log2(np.sum(np.sqrt(p))), abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(simplex(3), simplex(4), st.sampled_from([1.0, *ALPHAS]))
    def test_additive_on_products(self, p, q, alpha):
        joint = dist(np.outer(p, q).ravel())
        assert entropy(joint, alpha) == pytest.approx(entropy(dist(p), alpha) + entropy(dist(q), alpha), abs=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(simplex(6))
    def test_shannon_matches_oracle(self, p):
        assert von_neumann_entropy(p) == pytest.approx(shannon(p), abs=1e-12)


class TestBetaPairs:
    @pytest.mark.parametrize("alpha,beta", [(1, 1), (2, 2 / 3), (math.inf, 0.5), (0.75, 1.5)])
    def test_pairs(self, alpha, beta):
        assert entropy_pair_beta(alpha) == pytest.approx(beta)
        if math.isfinite(alpha):
            assert 1 / alpha + 1 / entropy_pair_beta(alpha) == pytest.approx(2)

    @pytest.mark.parametrize("alpha", [0.5, 0.3, 0, -1])
    def test_rejects_small(self, alpha):
        with pytest.raises(ValueError):
            entropy_pair_beta(alpha)


class TestValidation:
    def test_rejects_bad_orders(self):
        with pytest.raises(ValueError):
            renyi_entropy(dist([1.0]), 0)
        with pytest.raises(ValueError):
            renyi_entropy(dist([1.0]), 1)

    def test_clamps_roundoff(self):
        d = dist([1.0 + 5e-13, -5e-13])
        assert d.probs[1] == 0

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            dist([1.1, -0.1])

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            dist([0.5, 0.4])

    def test_label_count(self):
        with pytest.raises(ValueError):
            OutcomeDistribution((0,), np.array([0.5, 0.5]))


class TestOutcomeDistribution:
    def test_state_dimension_checked(self, chain):
        wt = coarse_wt_projectors(chain.w, chain.spectrum, 0.0)
        povm = forward_povm(chain.grid, chain.proj_v.projector(1), wt)
        with pytest.raises(ValueError):
            outcome_distribution(povm, np.eye(2) / 2)

    def test_weak_limit_closed_form(self, chain):
        # without coupling both POVMs factor into detector noise times W(t) statistics
        grid = build_detector_grid(DetectorModel(coupling=0.0))
        wt = coarse_wt_projectors(chain.w, chain.spectrum, 3.0)
        fwd = outcome_distribution(forward_povm(grid, chain.proj_v.projector(1), wt), chain.rho)
        rev = outcome_distribution(reverse_povm(grid, chain.proj_v.projector(-1), wt), chain.rho)
        occ = [np.trace(wt.projector(k) @ chain.rho.matrix).real for k in range(2)]
        expected = 2 * (shannon(occ) + shannon(grid.probs))
        assert von_neumann_entropy(fwd) + von_neumann_entropy(rev) == pytest.approx(expected, abs=1e-10)
        assert fwd.labels[0] == (0, wt.labels[0])

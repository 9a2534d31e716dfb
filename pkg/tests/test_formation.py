import numpy as np
import pytest

from ssr_core.errors import DomainError, RankExceedsK, ZeroProjection
from ssr_core.fock import BlockedDensity, BlockedPureState, SectorSpace, random_state
from ssr_core.formation import (EnsembleDecomposition, formation_measure, grid_oracle_rank2,
                                projection_bound_table, projection_entanglement_bound,
                                random_product_pairs, vf_additivity_probe)
from ssr_core.schmidt import entropy_of_entanglement, siv
from ssr_core.selftest import rank2_example

ONE = SectorSpace((1, 1))


class TestMixedExample:
    @pytest.mark.parametrize("which", ["eoe", "siv"])
    def test_half(self, mixed_rho, which):
        res = formation_measure(mixed_rho, which, restarts=4, seed=0)
        assert res.value == pytest.approx(0.5, abs=1e-6)
        assert res.best_ensemble.trace_distance(mixed_rho) <= 1e-8
        assert res.sector_values[1] == pytest.approx(1.0, abs=1e-9)

    def test_certificate_members(self, mixed_rho):
        res = formation_measure(mixed_rho, "eoe", restarts=2, seed=1)
        probs = [p for p, _ in res.best_ensemble.members]
        assert all(p > 0 for p in probs)
        assert sum(probs) == pytest.approx(1.0)
        assert res.best_ensemble.average("eoe") == pytest.approx(res.value)

    def test_unrestricted_is_zero(self, mixed_rho):
        # separable in the usual sense
        res = formation_measure(mixed_rho, "eoe", restarts=8, seed=0, respect_ssr=False)
        assert res.value <= 0.05
        assert res.best_ensemble is None

    @pytest.mark.parametrize("seed", range(5))
    def test_ssr_not_below_unrestricted(self, seed):
        alice, bob = SectorSpace((1, 2)), SectorSpace((2, 1))
        rho = BlockedDensity.mixture([(0.4, random_state(alice, bob, 1, seed=seed)),
                                      (0.6, random_state(alice, bob, 1, seed=seed + 100))])
        ssr = formation_measure(rho, "eoe", restarts=4, seed=0)
        free = formation_measure(rho, "eoe", restarts=8, seed=0, respect_ssr=False)
        assert ssr.value >= free.value - 1e-6

    def test_unrestricted_siv_rejected(self, mixed_rho):
        with pytest.raises(DomainError):
            formation_measure(mixed_rho, "siv", respect_ssr=False)


class TestPureAndOptions:
    def test_pure_state(self, biased_pair):
        rho = BlockedDensity.from_pure(biased_pair)
        for which, fn in (("eoe", entropy_of_entanglement), ("siv", siv)):
            res = formation_measure(rho, which, k=3, restarts=2, seed=0)
            assert res.value == pytest.approx(fn(biased_pair), abs=1e-9)

    def test_k_below_rank(self):
        rho = rank2_example()
        with pytest.raises(RankExceedsK):
            formation_measure(rho, "siv", k=1)

    def test_bad_measure(self, mixed_rho):
        with pytest.raises(DomainError):
            formation_measure(mixed_rho, "negativity")

    def test_reproducible(self):
        rho = rank2_example()
        a = formation_measure(rho, "eoe", k=2, restarts=3, seed=11)
        b = formation_measure(rho, "eoe", k=2, restarts=3, seed=11)
        assert a.value == b.value

    def test_warm_start_not_worse(self):
        rho = rank2_example()
        first = formation_measure(rho, "siv", k=2, restarts=2, seed=0)
        again = formation_measure(rho, "siv", k=2, restarts=1, seed=5, warm_start=first)
        assert again.value <= first.value + 1e-9

    def test_value_monotone_in_k(self):
        alice, bob = SectorSpace((1, 2)), SectorSpace((2, 1))
        rho = BlockedDensity.mixture([(w, random_state(alice, bob, 1, seed=s))
                                      for w, s in ((0.5, 21), (0.3, 22), (0.2, 23))])
        values = [formation_measure(rho, "eoe", k=k, restarts=4, seed=0).value for k in range(3, 7)]
        assert all(b <= a + 1e-8 for a, b in zip(values, values[1:]))

    def test_ensemble_reconstructs(self, rng):
        s1 = random_state(ONE, SectorSpace((1, 2)), 1, seed=rng)
        s2 = random_state(ONE, SectorSpace((1, 2)), 1, seed=rng)
        rho = BlockedDensity.mixture([(0.3, s1), (0.7, s2)])
        res = formation_measure(rho, "eoe", restarts=3, seed=0)
        assert res.best_ensemble.trace_distance(rho) <= 1e-8
        defining = EnsembleDecomposition(((0.3, s1), (0.7, s2)))
        assert defining.trace_distance(rho) <= 1e-12


class TestGridOracle:
    @pytest.mark.parametrize("which", ["eoe", "siv"])
    def test_agrees_with_optimizer(self, which):
        rho = rank2_example()
        grid = grid_oracle_rank2(rho, 1, which, resolution=120)
        opt = formation_measure(rho, which, k=2, restarts=8, seed=0)
        assert opt.value <= grid.value + 1e-9
        assert grid.value - opt.value <= 2e-3

    def test_needs_rank_two(self, mixed_rho):
        with pytest.raises(DomainError):
            grid_oracle_rank2(mixed_rho, 0, "eoe")


class TestProjectionBound:
    def test_below_log(self):
        for n_copies in range(1, 5):
            df = projection_bound_table(n_copies, seed=n_copies)
            assert (df["rank"] <= n_copies + 1).all()
            assert (df["eoe"] <= df["bound"] + 1e-9).all()
            assert len(df) == 2 * n_copies + 1

    def test_per_copy_shrinks(self):
        worst = [projection_bound_table(n, seed=0)["per_copy"].max() for n in (2, 4, 6)]
        bounds = [np.log2(n + 1) / n for n in (2, 4, 6)]
        assert all(w <= b + 1e-9 for w, b in zip(worst, bounds))

    def test_single_pair_plus_states(self):
        plus = np.array([1.0, 1.0]) / np.sqrt(2)
        res = projection_entanglement_bound([(plus, plus)], 1)
        assert res.schmidt_rank == 2
        assert res.eoe == pytest.approx(1.0, abs=1e-12)
        assert res.bound == pytest.approx(1.0)

    def test_zero_projection(self):
        zero = np.array([1.0, 0.0])
        with pytest.raises(ZeroProjection):
            projection_entanglement_bound([(zero, zero)], 1)
        with pytest.raises(ZeroProjection):
            projection_entanglement_bound(random_product_pairs(2, seed=0), 7)


class TestAdditivity:
    def test_mixed_state_close_to_additive(self, mixed_rho):
        probe = vf_additivity_probe(mixed_rho, restarts=4, seed=0)
        assert probe.v1 == pytest.approx(0.5, abs=1e-6)
        assert probe.ratio == pytest.approx(1.0, abs=0.02)

    def test_pure_state_exact(self, biased_pair):
        probe = vf_additivity_probe(BlockedDensity.from_pure(biased_pair), restarts=1, seed=0)
        assert probe.ratio == pytest.approx(1.0, abs=1e-9)

    def test_zero_value_gives_nan(self):
        rho = BlockedDensity.from_pure(BlockedPureState(1, ONE, ONE, {0: [[1.0]]}))
        probe = vf_additivity_probe(rho, restarts=1, seed=0)
        assert probe.v1 == 0.0
        assert np.isnan(probe.ratio)

from math import comb, log

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ssr_core.data_io import load_fixture
from ssr_core.fock import (BlockedPureState, SectorSpace, apply_local, random_sector_unitary, random_state,
                           tensor_product)
from ssr_core.schmidt import (ExplicitBlock, SchmidtBlocks, UniformBlock, binary_entropy, dense_entropy,
                              entropy_of_entanglement, local_number_distribution, resource_pair,
                              schmidt_block_decompose, siv)

ONE = SectorSpace((1, 1))
H16 = binary_entropy(1 / 6)


class TestDecompose:
    def test_biased_pair_coefficients(self, biased_pair):
        sb = schmidt_block_decompose(biased_pair)
        assert sb.sectors() == [0, 1]
        assert_allclose(sb.values(0), [1 / 6])
        assert_allclose(sb.values(1), [5 / 6])
        assert sb.total() == pytest.approx(1.0)

    def test_values_sorted_and_cut(self):
        b = ExplicitBlock([0.1, 0.0, 0.5, 0.2])
        assert_allclose(b.values, [0.5, 0.2, 0.1, 0.0])
        assert b.rank == 3

    def test_uniform_block_analytic(self):
        u = UniformBlock(log(comb(256, 128)), 0.3)
        assert u.log2_count == pytest.approx(np.log2(float(comb(256, 128))))
        assert u.entropy_bits() == pytest.approx(0.3 * u.log2_count - 0.3 * np.log2(0.3))
        with pytest.raises(TypeError):
            SchmidtBlocks({0: u}).values(0)


class TestMeasures:
    def test_entropy_examples(self, biased_pair, phi_plus):
        assert entropy_of_entanglement(phi_plus) == pytest.approx(1.0, abs=1e-12)
        assert entropy_of_entanglement(SchmidtBlocks.explicit({1: [1.0]})) == 0.0
        assert entropy_of_entanglement(biased_pair) == pytest.approx(0.65002, abs=1e-5)
        assert entropy_of_entanglement(biased_pair) == pytest.approx(H16, abs=1e-12)

    def test_siv_examples(self, biased_pair, phi_plus):
        assert siv(phi_plus) == pytest.approx(1.0, abs=1e-12)
        assert siv(biased_pair) == pytest.approx(5 / 9, abs=1e-12)
        assert siv(load_fixture("singlet_const")) == 0.0

    def test_siv_party_symmetry(self, rng):
        s = random_state(SectorSpace((1, 2, 2)), SectorSpace((2, 1, 1, 1)), 3, seed=rng)
        assert siv(s, party="bob") == pytest.approx(siv(s, party="alice"), abs=1e-12)

    def test_siv_bob_needs_state(self, biased_pair):
        with pytest.raises(ValueError):
            siv(schmidt_block_decompose(biased_pair), party="bob")

    def test_local_number_distribution(self, biased_pair, phi_plus):
        assert_allclose(local_number_distribution(biased_pair), [1 / 6, 5 / 6])
        two = tensor_product(phi_plus, phi_plus)
        assert_allclose(local_number_distribution(two), [0.25, 0.5, 0.25], atol=1e-12)
        prod = BlockedPureState(1, ONE, ONE, {1: [[1.0]]})
        assert_allclose(local_number_distribution(prod), [0.0, 1.0])

    def test_resource_pairs(self, biased_pair):
        r = resource_pair(biased_pair)
        assert (r.eoe, r.siv) == pytest.approx((H16, 5 / 9))
        assert r.mean_local_number == pytest.approx(5 / 6)
        singlet = resource_pair(load_fixture("singlet_const"))
        assert (singlet.eoe, singlet.siv) == pytest.approx((1.0, 0.0), abs=1e-12)
        prod = resource_pair(load_fixture("product_01"))
        assert (prod.eoe, prod.siv) == (0.0, 0.0)

    def test_additivity(self, rng):
        for _ in range(10):
            a = random_state(SectorSpace((1, 2)), SectorSpace((2, 1, 1)), 1, seed=rng)
            b = random_state(SectorSpace((1, 1, 1)), SectorSpace((1, 2)), 2, seed=rng)
            ab = tensor_product(a, b)
            assert entropy_of_entanglement(ab) == pytest.approx(
                entropy_of_entanglement(a) + entropy_of_entanglement(b), abs=1e-9)
            assert siv(ab) == pytest.approx(siv(a) + siv(b), abs=1e-9)

    def test_local_unitary_invariance(self, rng):
        alice, bob = SectorSpace((2, 3, 1)), SectorSpace((1, 2, 2))
        s = random_state(alice, bob, 2, seed=rng)
        u = apply_local(s, random_sector_unitary(alice, rng), random_sector_unitary(bob, rng))
        assert entropy_of_entanglement(u) == pytest.approx(entropy_of_entanglement(s), abs=1e-10)
        assert siv(u) == pytest.approx(siv(s), abs=1e-10)

    def test_dense_entropy_agrees_when_blocked(self, biased_pair):
        # non-SSR EoE of the embedded matrix equals the blocked EoE
        from ssr_core.fock import to_full_matrix
        assert dense_entropy(to_full_matrix(biased_pair)) == pytest.approx(H16, abs=1e-12)


class TestQubitBound:
    def test_entropy_exceeds_variance(self, rng):
        p = rng.uniform(1e-9, 1 - 1e-9, size=10_000)
        assert np.all(binary_entropy(p) - 4 * p * (1 - p) >= -1e-12)

    def test_equal_at_half(self):
        assert binary_entropy(0.5) == pytest.approx(1.0, abs=1e-12)
        assert binary_entropy(0.0) == 0.0

import math
import unittest

import numpy as np

from multiboson.distribution import enumerate_samples
from multiboson.errors import InfeasibleError, InputValidationError
from multiboson.probability import (
    Path,
    classify_gram,
    collision_factor,
    probability,
    probability_distinguishable,
    probability_general,
    probability_identical,
    probability_mixed_groups,
    two_photon_probability,
)
from multiboson.spectra import GramMatrix, SpectralAmplitude, gram_matrix
from multiboson.unitary import PortConfiguration, balanced_beam_splitter, haar_random, make_rng


def random_gram(n, rng):
    c = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    c /= np.linalg.norm(c, axis=1)[:, np.newaxis]
    g = c.conj() @ c.T
    g = 0.5 * (g + g.conj().T)
    np.fill_diagonal(g, 1.0)
    return GramMatrix.from_entries(g)


def two_photon_gram(g):
    return GramMatrix.from_entries([[1.0, g], [np.conj(g), 1.0]])


COINCIDENCE = PortConfiguration((0, 1), (1, 1))
BUNCHED = PortConfiguration((0, 1), (2, 0))


class TestHongOuMandel(unittest.TestCase):

    def setUp(self):
        self.U = balanced_beam_splitter()

    def test_coincidence_follows_overlap(self):
        """Test that the coincidence probability is (1 - |g|^2) / 2."""
        for modulus in (0.0, 0.3, 0.7, 1.0):
            for phase in (0.0, 1.1, -2.5):
                g = modulus * np.exp(1j * phase)
                p = probability_general(self.U, COINCIDENCE, two_photon_gram(g))
                self.assertAlmostEqual(p.value, 0.5 * (1 - modulus ** 2), delta=1e-10)
                self.assertIs(p.path, Path.GENERAL)

    def test_limiting_cases(self):
        self.assertAlmostEqual(probability_identical(self.U, COINCIDENCE).value, 0.0, delta=1e-15)
        self.assertAlmostEqual(probability_distinguishable(self.U, COINCIDENCE).value, 0.5, delta=1e-15)

    def test_bunched_sample(self):
        distinguishable = probability_distinguishable(self.U, BUNCHED)
        self.assertAlmostEqual(distinguishable.raw_rate, 0.5, delta=1e-15)
        self.assertAlmostEqual(distinguishable.value, 0.25, delta=1e-15)
        identical = probability_identical(self.U, BUNCHED)
        self.assertAlmostEqual(identical.raw_rate, 1.0, delta=1e-15)
        self.assertAlmostEqual(identical.value, 0.5, delta=1e-15)

    def test_single_photon_single_port(self):
        U = haar_random(1, seed=3)
        cfg = PortConfiguration((0,), (1,))
        self.assertAlmostEqual(probability_distinguishable(U, cfg).value, 1.0, delta=1e-15)
        self.assertAlmostEqual(probability_identical(U, cfg).value, 1.0, delta=1e-15)
        self.assertAlmostEqual(probability_general(U, cfg, GramMatrix.ones(1)).value, 1.0, delta=1e-15)

    def test_two_photon_expansion(self):
        rng = make_rng(6)
        U = haar_random(4, seed=6)
        for output in [(0, 1), (2, 2), (1, 3)]:
            cfg = PortConfiguration.from_ports((1, 3), output, 4)
            G = random_gram(2, rng)
            expected = probability_general(U, cfg, G).value
            self.assertAlmostEqual(two_photon_probability(U, cfg, G.entries[0, 1]).value, expected, delta=1e-12)


class TestFastPaths(unittest.TestCase):

    def test_agree_with_general_path(self):
        """Test the closed forms against the Gram-weighted sum over 50 random interferometers."""
        rng = make_rng(12)
        for trial in range(50):
            m = 4 + trial % 3
            n = 2 + trial % 3
            ports = tuple(sorted(int(p) for p in rng.choice(m, size=n, replace=False)))
            U = haar_random(m, seed=1000 + trial)
            samples = enumerate_samples(m, n)
            occupation = samples[int(rng.integers(len(samples)))]
            cfg = PortConfiguration(ports, occupation)

            general = probability_general(U, cfg, GramMatrix.identity(n)).value
            self.assertAlmostEqual(probability_distinguishable(U, cfg).value, general, delta=1e-10)
            general = probability_general(U, cfg, GramMatrix.ones(n)).value
            self.assertAlmostEqual(probability_identical(U, cfg).value, general, delta=1e-10)

            size = min(2 + trial % 2, n)
            group = range(size)
            general = probability_general(U, cfg, GramMatrix.block(n, group)).value
            mixed = probability_mixed_groups(U, cfg, [ports[s] for s in group]).value
            self.assertAlmostEqual(mixed, general, delta=1e-10)

    def test_mixed_groups_example(self):
        U = haar_random(4, seed=7)
        ports = (0, 1, 2)
        for occupation in enumerate_samples(4, 3):
            cfg = PortConfiguration(ports, occupation)
            general = probability_general(U, cfg, GramMatrix.block(3, [0, 1])).value
            self.assertAlmostEqual(probability_mixed_groups(U, cfg, [0, 1]).value, general, delta=1e-10)

    def test_mixed_groups_extremes(self):
        U = haar_random(5, seed=8)
        cfg = PortConfiguration((0, 2, 3), (1, 0, 2, 0, 0))
        self.assertAlmostEqual(
            probability_mixed_groups(U, cfg, [0, 2, 3]).value, probability_identical(U, cfg).value, delta=1e-12
        )
        self.assertAlmostEqual(
            probability_mixed_groups(U, cfg, []).value, probability_distinguishable(U, cfg).value, delta=1e-12
        )
        with self.assertRaises(InputValidationError):
            probability_mixed_groups(U, cfg, [1])


class TestGeneralPath(unittest.TestCase):

    def test_reality_and_positivity(self):
        """Test that the Gram-weighted sum is real and non-negative for 200 random inputs."""
        rng = make_rng(13)
        for trial in range(200):
            n = 2 + trial % 3
            m = n + int(rng.integers(3))
            U = haar_random(m, seed=2000 + trial)
            ports = tuple(int(p) for p in rng.choice(m, size=n, replace=False))
            samples = enumerate_samples(m, n)
            cfg = PortConfiguration(ports, samples[int(rng.integers(len(samples)))])
            p = probability_general(U, cfg, random_gram(n, rng))
            self.assertLess(p.imaginary_residual, 1e-9)
            self.assertGreaterEqual(p.value, -1e-10)

    def test_normalization(self):
        rng = make_rng(14)
        U = haar_random(4, seed=14)
        G = random_gram(3, rng)
        total = math.fsum(
            probability_general(U, PortConfiguration((0, 1, 3), o), G).value for o in enumerate_samples(4, 3)
        )
        self.assertAlmostEqual(total, 1.0, delta=1e-10)

    def test_diagnostics_do_not_change_the_value(self):
        rng = make_rng(15)
        U = haar_random(5, seed=15)
        cfg = PortConfiguration((0, 1, 2, 4), (0, 2, 1, 0, 1))
        G = random_gram(4, rng)
        with_diagnostics = probability_general(U, cfg, G, diagnostics=True)
        without = probability_general(U, cfg, G, diagnostics=False)
        self.assertEqual(with_diagnostics.value, without.value)

    def test_dip_deepens_with_overlap(self):
        """Test that the coincidence rate falls monotonically as the emission times converge."""
        U = balanced_beam_splitter()
        first = SpectralAmplitude(central_frequency=100.0, bandwidth=1.0)
        values = []
        for tau in np.linspace(3.0, 0.0, 13):
            G = gram_matrix([first, first.delayed(float(tau))])
            values.append(probability_general(U, COINCIDENCE, G).value)
        self.assertTrue(all(later <= earlier + 1e-15 for earlier, later in zip(values, values[1:])))
        self.assertAlmostEqual(values[-1], 0.0, delta=1e-12)

    def test_rejects_mismatched_gram(self):
        with self.assertRaises(InputValidationError):
            probability_general(balanced_beam_splitter(), COINCIDENCE, GramMatrix.ones(3))

    def test_refuses_large_photon_numbers(self):
        n = 11
        U = haar_random(n, seed=1)
        cfg = PortConfiguration(tuple(range(n)), (1,) * n)
        with self.assertRaises(InfeasibleError) as ctx:
            probability_general(U, cfg, GramMatrix.ones(n))
        self.assertEqual(ctx.exception.cost_estimate, float(math.factorial(n) * 2 ** n * n))

    def test_refusal_cost_past_float_range(self):
        n = 180
        U = haar_random(n, seed=2)
        cfg = PortConfiguration(tuple(range(n)), (1,) * n)
        with self.assertRaises(InfeasibleError) as ctx:
            probability_general(U, cfg, GramMatrix.identity(n))
        self.assertEqual(ctx.exception.cost_estimate, math.inf)
        self.assertIn("estimated cost: inf terms", str(ctx.exception))


class TestDispatch(unittest.TestCase):

    def test_classify_gram(self):
        self.assertEqual(classify_gram(GramMatrix.identity(3)), (Path.FULLY_DISTINGUISHABLE, ()))
        self.assertEqual(classify_gram(GramMatrix.ones(3)), (Path.FULLY_INDISTINGUISHABLE, (0, 1, 2)))
        self.assertEqual(classify_gram(GramMatrix.block(4, [1, 2])), (Path.MIXED_GROUPS, (1, 2)))
        self.assertEqual(classify_gram(two_photon_gram(0.5))[0], Path.GENERAL)
        # two separate identical pairs are not one block
        pairs = np.eye(4)
        pairs[0, 1] = pairs[1, 0] = pairs[2, 3] = pairs[3, 2] = 1.0
        self.assertEqual(classify_gram(GramMatrix.from_entries(pairs))[0], Path.GENERAL)

    def test_dispatch_maps_group_positions_to_ports(self):
        U = haar_random(5, seed=16)
        cfg = PortConfiguration((4, 1, 3), (0, 1, 1, 0, 1))
        G = GramMatrix.block(3, [0, 2])
        result = probability(U, cfg, G)
        self.assertIs(result.path, Path.MIXED_GROUPS)
        self.assertAlmostEqual(result.value, probability_general(U, cfg, G).value, delta=1e-10)

    def test_collision_factor(self):
        self.assertEqual(collision_factor((2, 0, 3)), 12)
        self.assertEqual(collision_factor((1, 1)), 1)


if __name__ == "__main__":
    unittest.main()

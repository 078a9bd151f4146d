import itertools
import math
import unittest

import numpy as np
from scipy import stats

from multiboson.errors import InputValidationError
from multiboson.permanent import permanent_ryser
from multiboson.unitary import (
    InterferometerMatrix,
    PortConfiguration,
    balanced_beam_splitter,
    haar_random,
    interference_matrix,
    make_rng,
    submatrix,
)


class TestHaarRandom(unittest.TestCase):

    def test_single_port(self):
        U = haar_random(1, seed=5)
        self.assertEqual(U.entries.shape, (1, 1))
        self.assertAlmostEqual(abs(U.entries[0, 0]), 1.0, delta=1e-15)

    def test_unitary(self):
        self.assertLess(haar_random(4, seed=42).unitarity_error(), 1e-12)
        self.assertLess(haar_random(64, seed=9).unitarity_error(), 1e-10)

    def test_deterministic_given_seed(self):
        np.testing.assert_array_equal(haar_random(5, seed=3).entries, haar_random(5, seed=3).entries)
        self.assertFalse(np.array_equal(haar_random(5, seed=3).entries, haar_random(5, seed=4).entries))

    def test_negative_seed(self):
        U = haar_random(3, seed=-1)
        self.assertLess(U.unitarity_error(), 1e-12)
        np.testing.assert_array_equal(U.entries, haar_random(3, seed=2 ** 64 - 1).entries)
        self.assertEqual(make_rng(-5).random(4).tolist(), make_rng(2 ** 64 - 5).random(4).tolist())

    def test_haar_marginal_is_uniform(self):
        """Test that |U_00|^2 of 2x2 Haar unitaries is uniform on [0, 1]."""
        values = [abs(haar_random(2, seed=seed).entries[0, 0]) ** 2 for seed in range(10_000)]
        statistic = stats.kstest(values, "uniform").statistic
        self.assertLess(statistic, 0.02)

    def test_rejects_empty(self):
        with self.assertRaises(InputValidationError):
            haar_random(0, seed=1)


class TestInterferometerMatrix(unittest.TestCase):

    def test_beam_splitter(self):
        U = balanced_beam_splitter()
        self.assertAlmostEqual(U.entries[0, 0], 1 / math.sqrt(2), delta=1e-15)
        self.assertLess(U.unitarity_error(), 1e-15)
        self.assertAlmostEqual(abs(np.linalg.det(U.entries) - 1), 0.0, delta=1e-15)

    def test_rejects_non_unitary(self):
        with self.assertRaises(InputValidationError) as ctx:
            InterferometerMatrix.from_entries([[1, 0], [0, 2]])
        self.assertIn("not unitary", str(ctx.exception))
        # deferred check
        U = InterferometerMatrix.from_entries([[1, 0], [0, 2]], check=False)
        self.assertAlmostEqual(U.unitarity_error(), 3.0)

    def test_rejects_non_square(self):
        with self.assertRaises(InputValidationError):
            InterferometerMatrix.from_entries([[1, 0, 0], [0, 1, 0]])


class TestPortConfiguration(unittest.TestCase):

    def test_from_ports(self):
        cfg = PortConfiguration.from_ports([0, 1], [2, 2], m=3)
        self.assertEqual(cfg.output_sample, (0, 0, 2))
        self.assertEqual(cfg.output_ports(), (2, 2))
        self.assertEqual((cfg.n, cfg.m), (2, 3))

    def test_rejects_inconsistent_configurations(self):
        with self.assertRaises(InputValidationError):
            PortConfiguration((0, 0), (1, 1))
        with self.assertRaises(InputValidationError):
            PortConfiguration((0, 1), (1, 0))
        with self.assertRaises(InputValidationError):
            PortConfiguration((0,), (2, -1))
        with self.assertRaises(InputValidationError):
            PortConfiguration.from_ports([0], [3], m=2)


class TestSubmatrix(unittest.TestCase):

    def setUp(self):
        self.U = haar_random(4, seed=17)

    def test_all_ports_once(self):
        cfg = PortConfiguration((0, 1, 2, 3), (1, 1, 1, 1))
        np.testing.assert_array_equal(submatrix(self.U, cfg), self.U.entries)

    def test_repeated_output_rows(self):
        U = haar_random(3, seed=2)
        sub = submatrix(U, PortConfiguration((0, 1), (0, 0, 2)))
        np.testing.assert_array_equal(sub[0], U.entries[2, [0, 1]])
        np.testing.assert_array_equal(sub[1], U.entries[2, [0, 1]])

    def test_index_bookkeeping(self):
        sub = submatrix(self.U, PortConfiguration((0, 2), (0, 1, 0, 1)))
        u = self.U.entries
        np.testing.assert_array_equal(sub, [[u[1, 0], u[1, 2]], [u[3, 0], u[3, 2]]])

    def test_input_order_is_kept(self):
        sub = submatrix(self.U, PortConfiguration((2, 0), (0, 1, 0, 1)))
        np.testing.assert_array_equal(sub[:, 0], self.U.entries[[1, 3], 2])

    def test_rows_follow_occupation(self):
        """Test that row d of U appears exactly n_d times in the submatrix."""
        for occupation in [(3, 0, 0, 0), (1, 0, 2, 0), (0, 1, 1, 1)]:
            sub = submatrix(self.U, PortConfiguration((0, 1, 3), occupation))
            for d, count in enumerate(occupation):
                matches = sum(np.array_equal(row, self.U.entries[d, [0, 1, 3]]) for row in sub)
                self.assertEqual(matches, count)

    def test_out_of_range(self):
        with self.assertRaises(InputValidationError):
            submatrix(self.U, PortConfiguration((0, 5), (1, 1, 0, 0)))
        with self.assertRaises(InputValidationError):
            submatrix(self.U, PortConfiguration((0, 1), (1, 1, 0)))


class TestInterferenceMatrix(unittest.TestCase):

    def test_identity_gives_modulus_squared(self):
        sub = submatrix(haar_random(5, seed=8), PortConfiguration((0, 1, 4), (1, 0, 2, 0, 0)))
        a = interference_matrix(sub, (0, 1, 2))
        np.testing.assert_allclose(a.real, np.abs(sub) ** 2, atol=1e-15)
        np.testing.assert_allclose(a.imag, 0.0, atol=1e-15)

    def test_single_photon(self):
        sub = np.array([[0.6 + 0.8j]])
        self.assertAlmostEqual(interference_matrix(sub, (0,))[0, 0], 1.0, delta=1e-15)

    def test_beam_splitter_swap(self):
        a = interference_matrix(balanced_beam_splitter().entries, (1, 0))
        np.testing.assert_allclose(np.abs(a), 0.5, atol=1e-15)
        # conj(U_00) U_01 = i/2, conj(U_10) U_11 = -i/2
        self.assertAlmostEqual(abs(a[0, 0] - 0.5j), 0.0, delta=1e-15)
        self.assertAlmostEqual(abs(a[1, 0] + 0.5j), 0.0, delta=1e-15)

    def test_inverse_permutation_conjugates(self):
        """Test that A_{rho^-1} is conj(A_rho) with columns permuted, so their permanents conjugate."""
        rng = make_rng(21)
        for n in (2, 3, 4):
            sub = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            for rho in itertools.permutations(range(n)):
                inverse = [0] * n
                for s, target in enumerate(rho):
                    inverse[target] = s
                a = interference_matrix(sub, rho)
                b = interference_matrix(sub, inverse)
                np.testing.assert_allclose(b, a.conj()[:, inverse], atol=1e-14)
                self.assertAlmostEqual(abs(permanent_ryser(b) - np.conj(permanent_ryser(a))), 0.0, delta=1e-10)

    def test_rejects_bad_permutation(self):
        with self.assertRaises(InputValidationError):
            interference_matrix(np.eye(2), (0, 2))
        with self.assertRaises(InputValidationError):
            interference_matrix(np.ones((2, 3)), (0, 1))


if __name__ == "__main__":
    unittest.main()

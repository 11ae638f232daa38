"""Tests for the two-point functions, checked against exact diagonalization."""

import numpy as np
import pytest

from spectrum import GRID_ODD_RING, ChainParams, wick_coefficients
from correlators import correlator_table, correlator_xx, correlator_yy, correlator_zz, xx_symbol, yy_symbol
from ed_oracle import ground_state, observable_suite
from macroscopicity import effective_size
from toeplitz import det_sweep

ED_TOL = 1e-8


class TestFieldOnlyLimit:

    def test_xx_vanishes_beyond_zero_distance(self):
        table = correlator_xx(wick_coefficients(ChainParams(8, 0.0)))
        np.testing.assert_array_equal(table.xx, [1, 0, 0, 0, 0, 0, 0, 0])
        assert table.sweep_meta.method == 'analytic'

    def test_yy_vanishes_beyond_zero_distance(self):
        yy = correlator_yy(wick_coefficients(ChainParams(8, 0.0)))
        np.testing.assert_array_equal(yy, [1, 0, 0, 0, 0, 0, 0, 0])

    def test_fully_polarized_along_z(self):
        zz, mz = correlator_zz(wick_coefficients(ChainParams(8, 0.0)))
        assert mz == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(zz, 1.0, atol=1e-12)


class TestIsingLimit:

    def test_xx_saturates(self):
        table = correlator_xx(wick_coefficients(ChainParams(8, 1e6)))
        np.testing.assert_allclose(table.xx, 1.0, atol=1e-4)

    def test_yy_zz_and_mz_vanish(self):
        table = correlator_table(wick_coefficients(ChainParams(8, 1e6)), method='pivoted')
        np.testing.assert_allclose(table.yy[1:], 0.0, atol=1e-4)
        np.testing.assert_allclose(table.zz[1:], 0.0, atol=1e-4)
        assert abs(table.mz) < 1e-4


class TestAgainstExactDiagonalization:

    @pytest.mark.parametrize("n_sites", [4, 6, 8, 10])
    @pytest.mark.parametrize("coupling", [0.2, 0.5, 0.9, 1.0, 1.1, 1.5, 3.0])
    def test_all_families(self, n_sites, coupling):
        table = correlator_table(wick_coefficients(ChainParams(n_sites, coupling)))
        suite = observable_suite(ground_state(n_sites, coupling))
        np.testing.assert_allclose(table.xx, suite.xx, atol=ED_TOL)
        np.testing.assert_allclose(table.yy, suite.yy, atol=ED_TOL)
        np.testing.assert_allclose(table.zz, suite.zz, atol=ED_TOL)
        assert table.mz == pytest.approx(suite.mz, abs=ED_TOL)

    @pytest.mark.parametrize("n_sites", [7, 9, 11, 13])
    @pytest.mark.parametrize("coupling", [0.5, 0.9, 1.0, 1.5])
    def test_odd_ring(self, n_sites, coupling):
        table = correlator_table(wick_coefficients(ChainParams(n_sites, coupling, GRID_ODD_RING)))
        suite = observable_suite(ground_state(n_sites, coupling))
        np.testing.assert_allclose(table.xx, suite.xx, atol=ED_TOL)
        np.testing.assert_allclose(table.yy, suite.yy, atol=ED_TOL)
        np.testing.assert_allclose(table.zz, suite.zz, atol=ED_TOL)
        assert table.mz == pytest.approx(suite.mz, abs=ED_TOL)

    @pytest.mark.parametrize("n_sites", [7, 9, 11, 13])
    @pytest.mark.parametrize("coupling", [0.5, 0.9, 1.5])
    def test_odd_ring_effective_size(self, n_sites, coupling):
        table = correlator_xx(wick_coefficients(ChainParams(n_sites, coupling, GRID_ODD_RING)))
        suite = observable_suite(ground_state(n_sites, coupling))
        exact = suite.x2 / n_sites
        assert effective_size(table).n_eff == pytest.approx(exact, abs=8.0 / n_sites)
        assert effective_size(table).n_eff == pytest.approx(exact, abs=1e-7)

    def test_iterative_solver_size(self):
        table = correlator_table(wick_coefficients(ChainParams(12, 0.9)))
        suite = observable_suite(ground_state(12, 0.9))
        np.testing.assert_allclose(table.xx, suite.xx, atol=ED_TOL)
        assert table.mz == pytest.approx(suite.mz, abs=ED_TOL)


class TestTableInvariants:

    @pytest.mark.parametrize("coupling", [0.3, 0.99, 1.0, 1.7])
    def test_bounds(self, table_for, coupling):
        table = table_for(64, coupling)
        assert table.xx[0] == 1.0
        assert np.all(np.abs(table.xx) <= 1 + 1e-9)
        assert np.all(table.xx >= -1e-9)
        assert table.complete

    def test_ring_symmetry(self, table_for):
        # distance n and N - n are the same pair on a ring
        table = table_for(32, 0.8)
        np.testing.assert_allclose(table.xx[1:], table.xx[1:][::-1], atol=1e-10)
        np.testing.assert_allclose(table.zz[1:], table.zz[1:][::-1], atol=1e-10)

    @pytest.mark.parametrize("coupling", [0.3, 0.95, 1.5])
    def test_mirrored_half_matches_full_sweep(self, coupling):
        wick = wick_coefficients(ChainParams(64, coupling))
        table = correlator_table(wick)
        full_xx = det_sweep(xx_symbol(wick), 63, method='pivoted').values
        full_yy = det_sweep(yy_symbol(wick), 63, method='pivoted').values
        np.testing.assert_allclose(table.xx[1:], full_xx, atol=1e-8)
        np.testing.assert_allclose(table.yy[1:], full_yy, atol=1e-8)

    def test_sweeps_only_half_the_ring(self):
        table = correlator_xx(wick_coefficients(ChainParams(40, 0.9)))
        assert len(table.sweep_meta) == 20
        assert len(table.xx) == 40

    @pytest.mark.parametrize("coupling", [0.3, 0.7, 1.0])
    def test_xx_decays_up_to_half_ring(self, table_for, coupling):
        table = table_for(32, coupling)
        assert np.all(np.diff(table.xx[:17]) <= 1e-12)

    def test_fast_and_pivoted_agree(self):
        wick = wick_coefficients(ChainParams(128, 1.0))
        fast = correlator_xx(wick)
        naive = correlator_xx(wick, method='pivoted')
        np.testing.assert_allclose(fast.xx, naive.xx, atol=1e-8)

    def test_xx_only_table_is_incomplete(self):
        table = correlator_xx(wick_coefficients(ChainParams(8, 0.5)))
        assert not table.complete
        with pytest.raises(ValueError):
            table.xx[1] = 0.0

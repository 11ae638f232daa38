"""Tests for the exact-diagonalization oracle."""

import math
import os

import numpy as np
import pytest

from errors import ConfigError
from spectrum import ChainParams, ground_energy, wick_coefficients
from correlators import correlator_table
from ed_oracle import (
    DEFAULT_FIXTURE_PATH,
    FIXTURE_POINTS,
    build_hamiltonian,
    direction_scan,
    domain_wall_state,
    ghz_state,
    ground_state,
    load_fixtures,
    observable_suite,
    parity_signs,
    scan_angles,
    state_observables,
)


def axis_distance(a, b):
    d = abs(a - b) % math.pi
    return min(d, math.pi - d)


class TestHamiltonian:

    def test_symmetric(self):
        h = build_hamiltonian(6, 0.7).toarray()
        np.testing.assert_array_equal(h, h.T)

    def test_commutes_with_parity(self):
        h = build_hamiltonian(6, 0.7).toarray()
        u = np.diag(parity_signs(6).astype(float))
        np.testing.assert_allclose(h @ u, u @ h, atol=0)

    def test_size_limit(self):
        with pytest.raises(ConfigError, match="N <= 14"):
            build_hamiltonian(15, 1.0)


class TestGroundState:

    def test_field_only(self):
        gs = ground_state(4, 0.0)
        assert gs.energy == pytest.approx(-4.0)
        assert gs.amplitudes[0] == pytest.approx(1.0)
        assert gs.parity == 1

    def test_ising_limit(self):
        coupling = 1e6
        gs = ground_state(4, coupling)
        assert gs.energy / coupling == pytest.approx(-4.0, abs=1e-5)
        # (|++++> + |---->)/sqrt(2) is the uniform superposition of even-popcount states
        expected = np.where(parity_signs(4) > 0, 1.0, 0.0) / math.sqrt(8)
        np.testing.assert_allclose(gs.amplitudes, expected, atol=1e-5)

    @pytest.mark.parametrize("n_sites", [4, 6, 8, 10, 12])
    @pytest.mark.parametrize("coupling", [0.5, 1.0, 1.5])
    def test_energy_matches_free_fermions(self, n_sites, coupling):
        gs = ground_state(n_sites, coupling)
        assert gs.energy == pytest.approx(ground_energy(ChainParams(n_sites, coupling)), abs=1e-8)

    @pytest.mark.parametrize("n_sites", [3, 5, 7, 9, 11, 13])
    @pytest.mark.parametrize("coupling", [0.5, 0.9, 1.0, 1.5])
    def test_odd_ring_energy_matches_free_fermions(self, n_sites, coupling):
        gs = ground_state(n_sites, coupling)
        assert gs.energy == pytest.approx(ground_energy(gs.params), abs=1e-8)

    def test_solver_switch(self):
        assert ground_state(10, 0.5).solver == 'dense'
        assert ground_state(12, 0.5).solver == 'sparse'

    @pytest.mark.parametrize("n_sites", [4, 6, 8, 10])
    @pytest.mark.parametrize("coupling", [0.5, 1.0, 2.0])
    def test_dense_and_sparse_agree(self, n_sites, coupling):
        dense = ground_state(n_sites, coupling, solver='dense')
        sparse = ground_state(n_sites, coupling, solver='sparse')
        assert (dense.solver, sparse.solver) == ('dense', 'sparse')
        assert sparse.energy == pytest.approx(dense.energy, abs=1e-9)
        dense_suite, sparse_suite = observable_suite(dense), observable_suite(sparse)
        np.testing.assert_allclose(sparse_suite.xx, dense_suite.xx, atol=1e-8)
        np.testing.assert_allclose(sparse_suite.zz, dense_suite.zz, atol=1e-8)
        assert sparse_suite.mz == pytest.approx(dense_suite.mz, abs=1e-8)

    def test_unknown_solver(self):
        with pytest.raises(ConfigError, match="unknown solver"):
            ground_state(6, 0.5, solver='lanczos')

    def test_dense_refused_for_largest_rings(self):
        with pytest.raises(ConfigError, match="dense diagonalization"):
            ground_state(14, 0.5, solver='dense')

    def test_sign_convention(self):
        gs = ground_state(8, 1.0)
        assert gs.amplitudes[np.argmax(np.abs(gs.amplitudes))] > 0
        assert gs.gap > 0

    def test_odd_size_uses_odd_grid(self):
        assert ground_state(7, 0.5).params.grid == 'odd-ring'


class TestObservableSuite:

    def test_symmetry_zeros(self):
        suite = observable_suite(ground_state(8, 0.5))
        for name, value in suite.symmetry_zeros().items():
            assert abs(value) <= 1e-10, name

    def test_field_only(self):
        suite = observable_suite(ground_state(6, 0.0))
        assert suite.z == pytest.approx(6.0)
        assert suite.z2 == pytest.approx(36.0)
        np.testing.assert_allclose(suite.xx[1:], 0.0, atol=1e-12)

    @pytest.mark.parametrize("n_sites", [4, 9])
    def test_ghz_magnetization_variance(self, n_sites):
        suite = state_observables(ghz_state(n_sites), n_sites)
        assert suite.mz_variance == pytest.approx(n_sites ** 2)

    def test_domain_wall_edges(self):
        np.testing.assert_array_equal(domain_wall_state(0, 5), domain_wall_state(1, 5))
        assert domain_wall_state(0, 5)[0] == 1.0


class TestDirectionScan:

    def test_argmax_near_x(self):
        direction, _ = direction_scan(ground_state(8, 0.5), (20, 40))
        thetas, phis = scan_angles((20, 40))
        assert abs(direction.theta - math.pi / 2) <= thetas[1] - thetas[0]
        assert axis_distance(direction.phi, 0.0) <= phis[1] - phis[0]

    def test_equator_ties_without_coupling(self):
        _, surface = direction_scan(ground_state(8, 0.0), (21, 40))
        # theta row 10 of 21 is exactly the equator
        np.testing.assert_allclose(surface[10], surface[10].max(), atol=1e-10)

    def test_monotone_from_pole_to_equator(self):
        _, surface = direction_scan(ground_state(12, 1.0), (32, 64))
        assert np.all(np.diff(surface[:16, 0]) >= -1e-9)

    @pytest.mark.parametrize("coupling", [0.3, 0.7, 1.0, 1.3, 2.0])
    def test_engine_and_scan_agree(self, table_for, coupling):
        from macroscopicity import effective_size

        direction, _ = direction_scan(ground_state(10, coupling), (20, 40))
        measures = effective_size(table_for(10, coupling))
        thetas, phis = scan_angles((20, 40))
        assert not measures.degenerate_argmax
        assert abs(direction.theta - measures.argmax_dir.theta) <= thetas[1] - thetas[0]
        assert axis_distance(direction.phi, measures.argmax_dir.phi) <= phis[1] - phis[0]

    def test_grid_too_coarse(self):
        with pytest.raises(ConfigError, match="8 x 16"):
            direction_scan(ground_state(4, 0.5), (4, 8))


class TestPinnedFixtures:

    def test_reference_file_is_committed(self):
        assert os.path.exists(DEFAULT_FIXTURE_PATH), \
            "tests/fixtures/ed_reference.csv is missing; regenerate with `python ed_oracle.py --write-fixtures`"
        points = {(r['N'], r['lambda']) for r in load_fixtures()}
        assert points == set(FIXTURE_POINTS)

    def test_critical_energy_pinned(self):
        energies = {(r['N'], r['lambda']): r['value'] for r in load_fixtures() if r['observable'] == 'energy'}
        assert energies[(8, 1.0)] == pytest.approx(-2.0 / math.sin(math.pi / 16), abs=1e-12)
        assert energies[(8, 0.0)] == -8.0

    @pytest.mark.parametrize("n_sites, coupling", FIXTURE_POINTS)
    def test_engine_matches_fixtures(self, n_sites, coupling):
        table = correlator_table(wick_coefficients(ChainParams(n_sites, coupling)))
        engine = {'energy': ground_energy(table.params), 'mz': table.mz}
        for family in ('xx', 'yy', 'zz'):
            engine.update({f"{family}_{n}": value for n, value in enumerate(getattr(table, family))})

        rows = [r for r in load_fixtures() if (r['N'], r['lambda']) == (n_sites, coupling)]
        assert len(rows) == 2 + 3 * n_sites
        for row in rows:
            assert engine[row['observable']] == pytest.approx(row['value'], abs=1e-8), row['observable']

    @pytest.mark.parametrize("n_sites, coupling", FIXTURE_POINTS)
    def test_oracle_reproduces_fixtures(self, n_sites, coupling):
        gs = ground_state(n_sites, coupling)
        suite = observable_suite(gs)
        oracle = {'energy': gs.energy, 'mz': suite.mz}
        for family in ('xx', 'yy', 'zz'):
            oracle.update({f"{family}_{n}": value for n, value in enumerate(getattr(suite, family))})

        for row in load_fixtures():
            if (row['N'], row['lambda']) == (n_sites, coupling):
                assert oracle[row['observable']] == pytest.approx(row['value'], abs=1e-8), row['observable']

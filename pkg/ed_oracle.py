"""
Exact diagonalization of the periodic TFIM ring for N <= 14.

Basis index b stores site i in bit i; bit 0 is sz = +1. The full 2^N
Hamiltonian is diagonalized (dense eigh up to N = 10, eigsh above). Odd
parity states (odd popcount) get a diagonal penalty larger than the
spectral width, which keeps the solver in the U = +1 sector where the
finite-N ground state lives without reducing the basis.
"""

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple
import argparse
import csv
import math
import os

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg
from tqdm import tqdm

from errors import ConfigError, NumericalError
from spectrum import ChainParams
from macroscopicity import Direction

MAX_ED_SITES = 14
MAX_DENSE_SITES = 10
MAX_FORCED_DENSE_SITES = 12
SOLVERS = ('auto', 'dense', 'sparse')
EIGSH_TOL = 1e-10
GAP_TOL = 1e-10
RESIDUAL_TOL = 1e-8  # relative to max(1, |E0|)

DEFAULT_FIXTURE_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                                    'tests', 'fixtures', 'ed_reference.csv')
# (N, lambda) pairs in the committed reference CSV
FIXTURE_POINTS = ((4, 0.5), (4, 1.0), (6, 1.0), (8, 0.0), (8, 0.5), (8, 1.0), (8, 2.0))


class DegenerateGroundState(NumericalError):
    """The symmetric-sector ground state is not separated from the next level."""


@dataclass(frozen=True)
class GroundStateSolution:
    params: ChainParams
    energy: float
    amplitudes: np.ndarray
    parity: int
    gap: float
    solver: str = 'dense'


@dataclass(frozen=True)
class ObservableSuite:
    """Exact expectation values of one state vector."""

    xx: np.ndarray
    yy: np.ndarray
    zz: np.ndarray
    mz: float
    x2: float
    y2: float
    z2: float
    z: float
    mz_variance: float
    # expectations that vanish by symmetry of a real, Z2-even state
    x_mean: float
    y_mean: float
    xz_anticommutator: float
    yz_anticommutator: float
    xy_anticommutator: float

    def symmetry_zeros(self) -> Dict[str, float]:
        return {
            '<X>': self.x_mean,
            '<Y>': self.y_mean,
            '<XZ+ZX>': self.xz_anticommutator,
            '<YZ+ZY>': self.yz_anticommutator,
            '<XY+YX>': self.xy_anticommutator,
        }


def _check_size(n_sites: int):
    if not 2 <= n_sites <= MAX_ED_SITES:
        raise ConfigError(f"exact diagonalization needs 2 <= N <= {MAX_ED_SITES}, got N={n_sites}")


def _basis(n_sites: int) -> np.ndarray:
    return np.arange(1 << n_sites, dtype=np.int64)


def _site_signs(n_sites: int, site: int) -> np.ndarray:
    """sz eigenvalue of `site` for every basis state."""
    return 1 - 2 * ((_basis(n_sites) >> site) & 1)


def _popcount(values: np.ndarray) -> np.ndarray:
    counts = np.zeros_like(values)
    rest = values.copy()
    while np.any(rest):
        counts += rest & 1
        rest >>= 1
    return counts


def parity_signs(n_sites: int) -> np.ndarray:
    """Eigenvalue of U = prod_i sz_i for every basis state."""
    return 1 - 2 * (_popcount(_basis(n_sites)) & 1)


def build_hamiltonian(n_sites: int, coupling: float, parity_penalty: float = 0.0) -> scipy.sparse.csr_matrix:
    """
    H = -lambda sum_i sx_i sx_{i+1} - sum_i sz_i on a ring, as a sparse matrix.

    Args:
        n_sites: Number of sites
        coupling: lambda
        parity_penalty: Added to the diagonal of odd-parity basis states

    Returns:
        2^N x 2^N csr matrix
    """
    _check_size(n_sites)
    basis = _basis(n_sites)
    dim = len(basis)

    magnetization = sum(_site_signs(n_sites, i) for i in range(n_sites))
    diagonal = -magnetization.astype(float)
    if parity_penalty:
        diagonal = diagonal + parity_penalty * (parity_signs(n_sites) < 0)

    rows = [basis]
    cols = [basis]
    data = [diagonal]
    if coupling != 0.0:
        for i in range(n_sites):
            mask = (1 << i) | (1 << ((i + 1) % n_sites))
            rows.append(basis)
            cols.append(basis ^ mask)
            data.append(np.full(dim, -coupling))

    return scipy.sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    ).tocsr()


def _fix_sign(vector: np.ndarray) -> np.ndarray:
    pivot = int(np.argmax(np.abs(vector)))
    return -vector if vector[pivot] < 0 else vector


def ground_state(n_sites: int, coupling: float, solver: str = 'auto') -> GroundStateSolution:
    """
    Ground state of the ring in the U = +1 sector.

    Args:
        n_sites: N, at most 14
        coupling: lambda >= 0
        solver: 'dense' (eigh, N <= 12), 'sparse' (eigsh) or 'auto' (dense up to N = 10)

    Returns:
        GroundStateSolution with real, unit-norm amplitudes

    Raises:
        DegenerateGroundState: If the in-sector gap is below 1e-10
    """
    params = ChainParams(n_sites, coupling, 'ns-even' if n_sites % 2 == 0 else 'odd-ring')
    _check_size(n_sites)
    if solver not in SOLVERS:
        raise ConfigError(f"unknown solver {solver!r}; expected one of {SOLVERS}")
    if solver == 'auto':
        solver = 'dense' if n_sites <= MAX_DENSE_SITES else 'sparse'
    if solver == 'dense' and n_sites > MAX_FORCED_DENSE_SITES:
        raise ConfigError(f"dense diagonalization is limited to N <= {MAX_FORCED_DENSE_SITES}, got N={n_sites}")

    # wider than the spectrum, so every odd-parity level sits above the even ones
    penalty = 2.0 * n_sites * (1.0 + coupling) + 1.0
    hamiltonian = build_hamiltonian(n_sites, coupling, parity_penalty=penalty)

    if solver == 'dense':
        energies, vectors = scipy.linalg.eigh(hamiltonian.toarray(), subset_by_index=[0, 1])
    else:
        seed = (parity_signs(n_sites) > 0).astype(float)
        seed /= np.linalg.norm(seed)
        energies, vectors = scipy.sparse.linalg.eigsh(hamiltonian, k=2, which='SA', v0=seed, tol=EIGSH_TOL)
        order = np.argsort(energies)
        energies, vectors = energies[order], vectors[:, order]

    gap = float(energies[1] - energies[0])
    if gap < GAP_TOL:
        raise DegenerateGroundState(
            f"ground state of N={n_sites}, lambda={coupling} is degenerate within the symmetric "
            f"sector (gap={gap:.3g})"
        )

    amplitudes = _fix_sign(vectors[:, 0] / np.linalg.norm(vectors[:, 0]))
    amplitudes.setflags(write=False)

    plain = build_hamiltonian(n_sites, coupling)
    energy = float(amplitudes @ (plain @ amplitudes))
    residual = float(np.linalg.norm(plain @ amplitudes - energy * amplitudes))
    if residual > RESIDUAL_TOL * max(1.0, abs(energy)):
        raise NumericalError(f"ground state residual {residual:.3g} is too large at N={n_sites}, lambda={coupling}")

    parity = int(round(float(np.sum(parity_signs(n_sites) * amplitudes ** 2))))
    return GroundStateSolution(params, energy, amplitudes, parity, gap, solver)


def apply_pauli(state: np.ndarray, n_sites: int, site: int, axis: str) -> np.ndarray:
    """
    sigma^axis_site |state>.

    Args:
        state: Amplitudes over the 2^N basis
        n_sites: N
        site: Site index 0..N-1
        axis: 'x', 'y' or 'z'

    Returns:
        New amplitude array (complex for 'y')
    """
    signs = _site_signs(n_sites, site)
    if axis == 'z':
        return signs * state
    flipped = _basis(n_sites) ^ (1 << site)
    if axis == 'x':
        return state[flipped]
    if axis == 'y':
        return -1j * signs * state[flipped]
    raise ConfigError(f"unknown Pauli axis {axis!r}")


def apply_collective(state: np.ndarray, n_sites: int, axis: str) -> np.ndarray:
    """(sum_i sigma^axis_i) |state>"""
    dtype = complex if axis == 'y' or np.iscomplexobj(state) else float
    out = np.zeros(len(state), dtype=dtype)
    for site in range(n_sites):
        out += apply_pauli(state, n_sites, site, axis)
    return out


def _covariance(state: np.ndarray, n_sites: int) -> np.ndarray:
    """3x3 matrix Re<A_a A_b> - <A_a><A_b> for A = X, Y, Z."""
    images = [apply_collective(state, n_sites, axis) for axis in 'xyz']
    means = np.array([np.vdot(state, image).real for image in images])
    second = np.array([[np.vdot(a, b).real for b in images] for a in images])
    return second - np.outer(means, means)


def collective_variance(state: np.ndarray, n_sites: int, direction: Direction) -> float:
    """Var(A_n) of A_n = sum_i sigma_i . n, including every cross term."""
    vector = direction.vector
    return float(vector @ _covariance(state, n_sites) @ vector)


def state_observables(state: np.ndarray, n_sites: int) -> ObservableSuite:
    """
    All observables of the correlator and macroscopicity modules for one state.
    """
    density = np.abs(state) ** 2
    first = _site_signs(n_sites, 0)
    xx = np.empty(n_sites)
    yy = np.empty(n_sites)
    zz = np.empty(n_sites)
    xx[0] = yy[0] = zz[0] = 1.0
    for n in range(1, n_sites):
        other = _site_signs(n_sites, n)
        flipped = _basis(n_sites) ^ 1 ^ (1 << n)
        xx[n] = np.vdot(state[flipped], state).real
        yy[n] = -np.vdot(state[flipped], first * other * state).real
        zz[n] = float(np.sum(density * first * other))

    images = {axis: apply_collective(state, n_sites, axis) for axis in 'xyz'}
    x_mean, y_mean, z_mean = (np.vdot(state, images[axis]).real for axis in 'xyz')
    z2 = float(np.vdot(images['z'], images['z']).real)

    return ObservableSuite(
        xx=xx, yy=yy, zz=zz,
        mz=z_mean / n_sites,
        x2=float(np.vdot(images['x'], images['x']).real),
        y2=float(np.vdot(images['y'], images['y']).real),
        z2=z2,
        z=float(z_mean),
        mz_variance=z2 - z_mean ** 2,
        x_mean=float(x_mean),
        y_mean=float(y_mean),
        xz_anticommutator=2.0 * float(np.vdot(images['x'], images['z']).real),
        yz_anticommutator=2.0 * float(np.vdot(images['y'], images['z']).real),
        xy_anticommutator=2.0 * float(np.vdot(images['x'], images['y']).real),
    )


def observable_suite(gs: GroundStateSolution) -> ObservableSuite:
    return state_observables(gs.amplitudes, gs.params.n_sites)


def direction_scan(gs: GroundStateSolution, grid_resolution: Tuple[int, int] = (20, 40)) -> Tuple[Direction, np.ndarray]:
    """
    Variance of A_n over a (theta, phi) grid on the sphere.

    Args:
        gs: Ground state
        grid_resolution: (n_theta, n_phi), at least (8, 16). theta spans [0, pi]
            inclusive, phi the half-open [0, 2 pi).

    Returns:
        (argmax direction, surface of shape (n_theta, n_phi))
    """
    n_theta, n_phi = grid_resolution
    if n_theta < 8 or n_phi < 16:
        raise ConfigError(f"direction scan needs at least an 8 x 16 grid, got {n_theta} x {n_phi}")

    thetas, phis = scan_angles(grid_resolution)
    theta_grid, phi_grid = np.meshgrid(thetas, phis, indexing='ij')
    vectors = np.stack([
        np.sin(theta_grid) * np.cos(phi_grid),
        np.sin(theta_grid) * np.sin(phi_grid),
        np.cos(theta_grid),
    ], axis=-1)
    covariance = _covariance(gs.amplitudes, gs.params.n_sites)
    surface = np.einsum('...a,ab,...b->...', vectors, covariance, vectors)

    i, j = np.unravel_index(int(np.argmax(surface)), surface.shape)
    return Direction(float(thetas[i]), float(phis[j])), surface


def scan_angles(grid_resolution: Tuple[int, int]) -> Tuple[np.ndarray, np.ndarray]:
    n_theta, n_phi = grid_resolution
    return np.linspace(0.0, math.pi, n_theta), 2 * math.pi * np.arange(n_phi) / n_phi


def ghz_state(n_sites: int) -> np.ndarray:
    """(|0...0> + |1...1>)/sqrt(2)"""
    _check_size(n_sites)
    state = np.zeros(1 << n_sites)
    state[0] = state[-1] = 1 / math.sqrt(2)
    return state


def domain_wall_state(n: int, n_sites: int) -> np.ndarray:
    """
    (|+>^n + |->^n)/sqrt(2) on sites 0..n-1, |0> on the rest, normalized.

    n = 0 collapses to the product state |0...0>.
    """
    _check_size(n_sites)
    if not 0 <= n <= n_sites:
        raise ConfigError(f"wall position must satisfy 0 <= n <= N={n_sites}, got {n}")
    basis = _basis(n_sites)
    inside = (basis >> n) == 0
    even = (_popcount(basis) & 1) == 0
    state = np.where(inside & even, 1.0, 0.0)
    return state / np.linalg.norm(state)


def fixture_rows(points: Sequence[Tuple[int, float]], show_progress: bool = True) -> List[Dict[str, float]]:
    """Oracle values for the reference CSV: energy, mz, xx/yy/zz at every distance."""
    rows = []
    for n_sites, coupling in tqdm(points, desc="ED fixtures", disable=not show_progress):
        gs = ground_state(n_sites, coupling)
        suite = observable_suite(gs)
        values = {'energy': gs.energy, 'mz': suite.mz}
        for family in ('xx', 'yy', 'zz'):
            for distance, value in enumerate(getattr(suite, family)):
                values[f"{family}_{distance}"] = value
        rows.extend({'N': n_sites, 'lambda': coupling, 'observable': name, 'value': value}
                    for name, value in values.items())
    return rows


def write_fixtures(path: str = DEFAULT_FIXTURE_PATH,
                   points: Sequence[Tuple[int, float]] = FIXTURE_POINTS) -> int:
    """
    Write the pinned oracle values as CSV (N, lambda, observable, value).

    Returns:
        Number of rows written
    """
    rows = fixture_rows(points)
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    with open(path, 'w', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=['N', 'lambda', 'observable', 'value'])
        writer.writeheader()
        for row in rows:
            writer.writerow({**row, 'value': repr(float(row['value']))})
    return len(rows)


def load_fixtures(path: str = DEFAULT_FIXTURE_PATH) -> List[Dict[str, float]]:
    with open(path, newline='') as f:
        return [
            {'N': int(row['N']), 'lambda': float(row['lambda']),
             'observable': row['observable'], 'value': float(row['value'])}
            for row in csv.DictReader(f)
        ]


if __name__ == '__main__':
    parser = argparse.ArgumentParser(description='Exact diagonalization of the periodic TFIM ring')
    parser.add_argument('--write-fixtures', nargs='?', const=DEFAULT_FIXTURE_PATH, metavar='PATH',
                        help='Write the ED reference CSV (default: tests/fixtures/ed_reference.csv)')
    parser.add_argument('-N', type=int, default=8, help='Number of sites')
    parser.add_argument('--coupling', type=float, default=1.0, help='lambda')
    args = parser.parse_args()

    if args.write_fixtures:
        count = write_fixtures(args.write_fixtures)
        print(f"Wrote {count} rows to {args.write_fixtures}")
    else:
        gs = ground_state(args.N, args.coupling)
        suite = observable_suite(gs)
        print(f"N={args.N}, lambda={args.coupling}: E0={gs.energy:.12f}, gap={gs.gap:.6f}, parity={gs.parity}")
        print(f"xx={np.round(suite.xx, 6)}")
        print(f"N_eff={suite.x2 / args.N:.6f}")

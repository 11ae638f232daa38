"""
Free-fermion spectrum of the transverse-field Ising ring.

H = -lambda * sum_i sx_i sx_{i+1} - sum_i sz_i on N sites with periodic
boundaries. Everything downstream (Toeplitz symbols, correlators) is built
from the dispersion Lambda_k and the momentum sums L_n, G_n computed here.
"""

from dataclasses import dataclass, field
from typing import Literal, Union
import math

import numpy as np

from errors import ConfigError, NumericalError

GridName = Literal['ns-even', 'odd-ring']

GRID_NS_EVEN: GridName = 'ns-even'
GRID_ODD_RING: GridName = 'odd-ring'
GRIDS = (GRID_NS_EVEN, GRID_ODD_RING)

DEFAULT_MAX_SITES = 8192
DEGENERATE_MODE_TOL = 1e-12

# Rows of the cosine table evaluated per block in wick_coefficients
_CHUNK_ROWS = 256


class InvalidParams(ConfigError):
    """ChainParams or a momentum argument is outside its domain."""


class DegenerateMode(NumericalError):
    """A momentum mode has (numerically) zero energy, so 1/Lambda_k diverges."""


@dataclass(frozen=True)
class ChainParams:
    """The (N, lambda) point everything is evaluated at."""

    n_sites: int
    coupling: float
    grid: GridName = GRID_NS_EVEN

    def __post_init__(self):
        if isinstance(self.n_sites, bool) or int(self.n_sites) != self.n_sites:
            raise InvalidParams(f"n_sites must be an integer, got {self.n_sites!r}")
        object.__setattr__(self, 'n_sites', int(self.n_sites))
        object.__setattr__(self, 'coupling', float(self.coupling))

        if self.n_sites < 2:
            raise InvalidParams(f"n_sites must be >= 2, got {self.n_sites}")
        if not math.isfinite(self.coupling) or self.coupling < 0:
            raise InvalidParams(f"coupling must be finite and >= 0, got {self.coupling}")
        if self.grid not in GRIDS:
            raise InvalidParams(f"unknown grid {self.grid!r}; expected one of {GRIDS}")
        if self.grid == GRID_NS_EVEN and self.n_sites % 2:
            raise InvalidParams(
                f"grid 'ns-even' needs an even number of sites, got N={self.n_sites}. "
                "Use an even N or --grid odd-ring."
            )
        if self.grid == GRID_ODD_RING and not self.n_sites % 2:
            raise InvalidParams(
                f"grid 'odd-ring' needs an odd number of sites, got N={self.n_sites}"
            )

    def with_coupling(self, coupling: float) -> 'ChainParams':
        return ChainParams(self.n_sites, coupling, self.grid)


@dataclass(frozen=True)
class MomentumGrid:
    """
    Momenta k = pi * numerator / N in [0, pi).

    Even N: numerators 2m+1 (antiperiodic fermions). Odd N: numerators 2m,
    since the even-parity sector of an odd ring has periodic fermions. Integer
    numerators let phases k*n be reduced exactly modulo 2*pi. weights is 1 for
    paired modes and 1/2 for the unpaired k = 0 mode of the odd ring, whose
    Bogoliubov factor (1 + lambda) / Lambda_0 is 1 at every coupling.
    """

    n_sites: int
    numerators: np.ndarray
    weights: np.ndarray

    @property
    def momenta(self) -> np.ndarray:
        return np.pi * self.numerators / self.n_sites

    def __len__(self) -> int:
        return len(self.numerators)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def momentum_grid(params: ChainParams) -> MomentumGrid:
    """
    Build the momentum set for a chain.

    Args:
        params: Chain parameters (the grid convention decides the mode count)

    Returns:
        MomentumGrid with N/2 modes (ns-even) or (N+1)/2 modes (odd-ring)
    """
    n = params.n_sites
    weights = np.ones((n + 1) // 2)
    if params.grid == GRID_NS_EVEN:
        numerators = 2 * np.arange(n // 2, dtype=np.int64) + 1
    else:
        numerators = 2 * np.arange((n + 1) // 2, dtype=np.int64)
        weights[0] = 0.5
    return MomentumGrid(n, _frozen(numerators), _frozen(weights[:len(numerators)]))


def _dispersion_array(coupling: float, k: np.ndarray) -> np.ndarray:
    # (1 - l)^2 + 4 l cos^2(k/2) == 1 + l^2 + 2 l cos k, without the cancellation near k = pi
    half_cos = np.cos(0.5 * np.asarray(k, dtype=float))
    return np.sqrt((1.0 - coupling) ** 2 + 4.0 * coupling * half_cos ** 2)


def dispersion(params: ChainParams, k: float) -> float:
    """
    Single-mode energy Lambda_k = sqrt(1 + lambda^2 + 2 lambda cos k).

    Args:
        params: Chain parameters (only the coupling is used)
        k: Momentum in [0, pi]

    Returns:
        Lambda_k (dimensionless)
    """
    if not (0.0 <= k <= math.pi):
        raise InvalidParams(f"momentum must lie in [0, pi], got {k}")
    return float(_dispersion_array(params.coupling, np.array([k]))[0])


@dataclass(frozen=True)
class WickCoefficients:
    """
    Momentum sums for one ChainParams.

    l_seq[n] = L_n for n = 0..N, g_seq[n + N] = G_n for n = -N..N.
    """

    params: ChainParams
    grid: MomentumGrid
    dispersion: np.ndarray
    l_seq: np.ndarray
    g_seq: np.ndarray = field(repr=False)

    def g(self, n: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
        """G_n for an integer or an integer array with -N <= n <= N."""
        n_sites = self.params.n_sites
        index = np.asarray(n) + n_sites
        if np.any(index < 0) or np.any(index > 2 * n_sites):
            raise IndexError(f"G_n is stored for -{n_sites} <= n <= {n_sites}")
        values = self.g_seq[index]
        return float(values) if np.ndim(values) == 0 else values

    def l(self, n: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
        """L_n with L_{-n} = L_n."""
        values = self.l_seq[np.abs(np.asarray(n))]
        return float(values) if np.ndim(values) == 0 else values


def _momentum_sums(grid: MomentumGrid, coeff: np.ndarray, n_max: int) -> np.ndarray:
    """(2/N) * sum_k coeff_k cos(k n) for n = 0..n_max, with exact phase reduction."""
    n = grid.n_sites
    out = np.empty(n_max + 1)
    for start in range(0, n_max + 1, _CHUNK_ROWS):
        orders = np.arange(start, min(start + _CHUNK_ROWS, n_max + 1), dtype=np.int64)
        residues = np.outer(orders, grid.numerators) % (2 * n)
        # row-wise reduction over a contiguous axis -> numpy pairwise summation
        out[start:start + len(orders)] = (np.cos(np.pi * residues / n) * coeff).sum(axis=1)
    return out * (2.0 / n)


def wick_coefficients(params: ChainParams, max_sites: int = DEFAULT_MAX_SITES) -> WickCoefficients:
    """
    Evaluate Lambda_k, L_n and G_n = L_n + lambda * L_{n+1}.

    Args:
        params: Chain parameters
        max_sites: Largest N accepted

    Returns:
        WickCoefficients for params

    Raises:
        InvalidParams: If N exceeds max_sites
        DegenerateMode: If some Lambda_k < 1e-12 (only k = pi at lambda = 1, which neither grid holds)
    """
    n = params.n_sites
    if n > max_sites:
        raise InvalidParams(f"N={n} exceeds the configured maximum of {max_sites} sites")

    grid = momentum_grid(params)
    energies = _dispersion_array(params.coupling, grid.momenta)
    smallest = int(np.argmin(energies))
    if energies[smallest] < DEGENERATE_MODE_TOL:
        raise DegenerateMode(
            f"mode k={grid.momenta[smallest]:.6g} has Lambda_k={energies[smallest]:.3g} at "
            f"N={n}, lambda={params.coupling}"
        )

    # L is needed through N+1 so that G_N is available
    l_full = _momentum_sums(grid, grid.weights / energies, n + 1)

    orders = np.arange(-n, n + 1)
    g_seq = l_full[np.abs(orders)] + params.coupling * l_full[np.abs(orders + 1)]

    return WickCoefficients(
        params=params,
        grid=grid,
        dispersion=_frozen(energies),
        l_seq=_frozen(l_full[:n + 1].copy()),
        g_seq=_frozen(g_seq),
    )


def ground_energy(params: ChainParams) -> float:
    """
    Free-fermion ground-state energy E_0 = -2 * sum_k w_k Lambda_k.

    Exact for the even-parity ground state of the periodic ring on either grid.
    """
    grid = momentum_grid(params)
    energies = _dispersion_array(params.coupling, grid.momenta)
    return float(-2.0 * np.sum(grid.weights * energies))


if __name__ == '__main__':
    for lam in (0.0, 0.5, 1.0, 2.0):
        wick = wick_coefficients(ChainParams(8, lam))
        print(f"lambda={lam:4}  L_0..3={np.round(wick.l_seq[:4], 6)}  E0={ground_energy(wick.params):.6f}")

"""
Macroscopicity measures of the TFIM ground state.

For a pure state the quantum Fisher information of A_n = sum_i sigma_i . n is
4 * Var(A_n); the effective size is the largest such variance divided by N.
The reality and the Z2 symmetry of the Hamiltonian leave only the x, y and z
directions as critical points, so the maximum is read off three numbers.
"""

from dataclasses import dataclass
from typing import Dict, Tuple
import math

import numpy as np
from scipy import stats

from errors import ConfigError
from spectrum import ChainParams
from correlators import CorrelatorTable

DEGENERACY_TOL = 1e-9


class MissingCorrelators(ConfigError):
    """The table lacks yy / zz / mz needed for a direction-resolved variance."""


class InsufficientData(ConfigError):
    """Too few distinct sizes (or points) for a fit."""


class NonPositiveData(ConfigError):
    """A logarithmic fit received a value <= 0."""


@dataclass(frozen=True)
class Direction:
    """Unit vector (sin t cos p, sin t sin p, cos t)."""

    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ConfigError(f"theta must lie in [0, pi], got {self.theta}")
        if not 0.0 <= self.phi < 2 * math.pi:
            raise ConfigError(f"phi must lie in [0, 2 pi), got {self.phi}")

    @property
    def vector(self) -> np.ndarray:
        return np.array([
            math.sin(self.theta) * math.cos(self.phi),
            math.sin(self.theta) * math.sin(self.phi),
            math.cos(self.theta),
        ])


X_DIRECTION = Direction(math.pi / 2, 0.0)
Y_DIRECTION = Direction(math.pi / 2, math.pi / 2)
Z_DIRECTION = Direction(0.0, 0.0)


@dataclass(frozen=True)
class MacroMeasures:
    params: ChainParams
    n_eff: float
    max_variance: float
    fisher: float
    argmax_dir: Direction
    degenerate_argmax: bool


@dataclass(frozen=True)
class PIndexResult:
    p_index: float
    stderr: float
    r_squared: float


def _require_complete(table: CorrelatorTable):
    if not table.complete:
        raise MissingCorrelators(
            f"table for N={table.params.n_sites}, lambda={table.params.coupling} has no yy/zz/mz; "
            "build it with correlators.correlator_table"
        )


def second_moments(table: CorrelatorTable) -> Dict[str, float]:
    """
    Collective moments using translation invariance on the ring.

    Returns:
        Dict with 'xx', 'yy', 'zz' (<X^2>, <Y^2>, <Z^2>) and 'z' (<Z>)
    """
    _require_complete(table)
    n_sites = table.params.n_sites
    return {
        'xx': n_sites * float(np.sum(table.xx)),
        'yy': n_sites * float(np.sum(table.yy)),
        'zz': n_sites * float(np.sum(table.zz)),
        'z': n_sites * float(table.mz),
    }


def _axis_variances(table: CorrelatorTable) -> Tuple[float, float, float]:
    moments = second_moments(table)
    return moments['xx'], moments['yy'], moments['zz'] - moments['z'] ** 2


def variance_in_direction(table: CorrelatorTable, direction: Direction) -> float:
    """
    Var(A_n) for a site-uniform direction n.

    Args:
        table: Complete correlator table
        direction: Measurement direction

    Returns:
        sin^2 t (<X^2> cos^2 p + <Y^2> sin^2 p) + cos^2 t (<Z^2> - <Z>^2)

    Raises:
        MissingCorrelators: If yy or zz are absent
    """
    var_x, var_y, var_z = _axis_variances(table)
    sin2_theta = math.sin(direction.theta) ** 2
    return (sin2_theta * (var_x * math.cos(direction.phi) ** 2 + var_y * math.sin(direction.phi) ** 2)
            + math.cos(direction.theta) ** 2 * var_z)


def argmax_direction(table: CorrelatorTable) -> Tuple[Direction, bool]:
    """
    Pick the largest of the x, y, z variances.

    Returns:
        (direction, degenerate) where degenerate means the top two candidates
        differ by less than 1e-9 * N. Ties resolve to the smallest (theta, phi).
    """
    variances = _axis_variances(table)
    candidates = sorted(zip((X_DIRECTION, Y_DIRECTION, Z_DIRECTION), variances),
                        key=lambda item: -item[1])
    (best, top), (_, runner_up) = candidates[0], candidates[1]
    tol = DEGENERACY_TOL * table.params.n_sites
    degenerate = top - runner_up < tol

    tied = [d for d, v in candidates if top - v < tol]
    best = min(tied, key=lambda d: (d.theta, d.phi))
    return best, degenerate


def effective_size(table: CorrelatorTable) -> MacroMeasures:
    """
    N_eff = Var(X)/N = sum_n xx[n].

    With a complete table the argmax is searched over the three critical
    directions; otherwise x is taken (degenerate only at lambda = 0).

    Args:
        table: Correlator table with at least xx

    Returns:
        MacroMeasures for the table's chain
    """
    n_sites = table.params.n_sites
    n_eff = float(np.sum(table.xx))
    max_variance = n_sites * n_eff

    if table.complete:
        direction, degenerate = argmax_direction(table)
    else:
        direction, degenerate = X_DIRECTION, table.params.coupling == 0.0

    return MacroMeasures(
        params=table.params,
        n_eff=n_eff,
        max_variance=max_variance,
        fisher=4.0 * max_variance,
        argmax_dir=direction,
        degenerate_argmax=degenerate,
    )


def p_index(sizes_to_maxvar: Dict[int, float]) -> PIndexResult:
    """
    Exponent p of max-variance ~ N^p.

    Args:
        sizes_to_maxvar: Mapping N -> max variance (at least 4 sizes, all > 0)

    Returns:
        PIndexResult with the log-log slope, its standard error and r^2

    Raises:
        InsufficientData: Fewer than 4 distinct sizes
        NonPositiveData: A variance <= 0
    """
    if len(sizes_to_maxvar) < 4:
        raise InsufficientData(f"p-index needs at least 4 sizes, got {len(sizes_to_maxvar)}")
    sizes = np.array(sorted(sizes_to_maxvar), dtype=float)
    variances = np.array([sizes_to_maxvar[n] for n in sorted(sizes_to_maxvar)], dtype=float)
    if np.any(variances <= 0) or np.any(sizes <= 0):
        raise NonPositiveData("p-index needs strictly positive sizes and variances")

    fit = stats.linregress(np.log(sizes), np.log(variances))
    return PIndexResult(p_index=float(fit.slope), stderr=float(fit.stderr),
                        r_squared=float(fit.rvalue ** 2))


def domain_wall_neff(n: int, n_sites: int) -> float:
    """
    Effective size of (|+>^n + |->^n)/sqrt(2) (x) |0>^(N-n).

    Returns:
        n(n-1)/N + 1
    """
    if not 0 <= n <= n_sites:
        raise ConfigError(f"wall position must satisfy 0 <= n <= N={n_sites}, got {n}")
    return n * (n - 1) / n_sites + 1.0


def domain_wall_neff_oracle(n: int, n_sites: int) -> float:
    """
    Same quantity from the explicit state vector (N <= 14).

    The variance is maximized over the x, y, z directions and divided by N.
    """
    from ed_oracle import MAX_ED_SITES, domain_wall_state, collective_variance

    if n_sites > MAX_ED_SITES:
        raise ConfigError(f"the explicit-state oracle is limited to N <= {MAX_ED_SITES}, got {n_sites}")
    if not 0 <= n <= n_sites:
        raise ConfigError(f"wall position must satisfy 0 <= n <= N={n_sites}, got {n}")

    state = domain_wall_state(n, n_sites)
    variances = [collective_variance(state, n_sites, d) for d in (X_DIRECTION, Y_DIRECTION, Z_DIRECTION)]
    return max(variances) / n_sites


if __name__ == '__main__':
    from spectrum import wick_coefficients
    from correlators import correlator_table

    for lam in (0.0, 0.5, 1.0, 1.5):
        measures = effective_size(correlator_table(wick_coefficients(ChainParams(64, lam))))
        print(f"lambda={lam:4}  N_eff={measures.n_eff:.4f}  F_Q={measures.fisher:.2f}  "
              f"argmax=({measures.argmax_dir.theta:.3f}, {measures.argmax_dir.phi:.3f})")

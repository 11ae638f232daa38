"""
Two-point functions of the TFIM ground state from the Wick coefficients.

G^xx(n) is the n x n Toeplitz determinant with entries G_{i-j-1}, G^yy(n) the
one with entries G_{i-j+1}. Both are only evaluated up to n = N/2; the ring
gives f(n) = f(N - n) for the rest. G^zz(n) and <sz> follow from a single pair
contraction.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from spectrum import WickCoefficients, ChainParams
from toeplitz import ToeplitzSymbol, DeterminantSweep, Method, det_sweep, TOL_PIVOT, CHECK_TOL

# <sx sx> is non-negative and falls off monotonically up to N/2; below this it is stored as 0
NEGLIGIBLE_XX = 1e-18


@dataclass(frozen=True)
class CorrelatorTable:
    """
    Correlators of one (N, lambda) ground state, indexed by distance n = 0..N-1.

    yy, zz and mz are None until filled by correlator_table.
    """

    params: ChainParams
    xx: np.ndarray
    yy: Optional[np.ndarray] = None
    zz: Optional[np.ndarray] = None
    mz: Optional[float] = None
    sweep_meta: Optional[DeterminantSweep] = None

    @property
    def complete(self) -> bool:
        return self.yy is not None and self.zz is not None and self.mz is not None


def xx_symbol(wick: WickCoefficients) -> ToeplitzSymbol:
    """c_m = G_{m-1}; first row G_{-1}, G_{-2}, ..."""
    order = wick.params.n_sites - 1
    return ToeplitzSymbol.from_function(lambda m: wick.g(m - 1), order)


def yy_symbol(wick: WickCoefficients) -> ToeplitzSymbol:
    """c_m = G_{m+1}; diagonal G_1, first column G_1, G_2, ..."""
    order = wick.params.n_sites - 1
    return ToeplitzSymbol.from_function(lambda m: wick.g(m + 1), order)


def _shift_free_values(n_sites: int) -> np.ndarray:
    values = np.zeros(n_sites)
    values[0] = 1.0
    return values


def _determinant_correlator(symbol: ToeplitzSymbol, wick: WickCoefficients,
                            method: Method, check_stride: Optional[int],
                            tol_pivot: float, check_tol: float,
                            floor: Optional[float]) -> Tuple[np.ndarray, DeterminantSweep]:
    """
    Leading determinants for n = 0..N/2, mirrored onto n > N/2 by f(n) = f(N - n).

    floor stops the sweep once |D_n| drops below it; the remaining distances
    up to N/2 are reported as 0.
    """
    n_sites = wick.params.n_sites
    half = n_sites // 2

    if wick.params.coupling == 0.0:
        # the symbol is a pure shift: every leading determinant vanishes
        sweep = DeterminantSweep(np.zeros(half), 'analytic')
        return _shift_free_values(n_sites), sweep

    sweep = det_sweep(symbol, half, method=method, tol_pivot=tol_pivot,
                      check_tol=check_tol, check_stride=check_stride, stop_below=floor)
    values = np.empty(n_sites)
    values[0] = 1.0
    values[1:half + 1] = sweep.values
    values[half + 1:] = values[1:n_sites - half][::-1]
    return values, sweep


def correlator_xx(wick: WickCoefficients,
                  method: Method = 'fast',
                  check_stride: Optional[int] = None,
                  tol_pivot: float = TOL_PIVOT,
                  check_tol: float = CHECK_TOL) -> CorrelatorTable:
    """
    <sx_1 sx_{1+n}> for n = 0..N-1.

    Args:
        wick: Wick coefficients of the chain
        method: Determinant path, 'fast' or 'pivoted'
        check_stride: Cross-check spacing for the fast path (None = automatic, 0 = off)
        tol_pivot: Pivot tolerance of the fast path
        check_tol: Cross-check tolerance of the fast path

    Returns:
        CorrelatorTable with xx filled and the sweep provenance attached

    Raises:
        CrossCheckFailure: If the determinant sweep fails its cross-check
    """
    values, sweep = _determinant_correlator(xx_symbol(wick), wick, method, check_stride,
                                            tol_pivot, check_tol, NEGLIGIBLE_XX)
    values.setflags(write=False)
    return CorrelatorTable(params=wick.params, xx=values, sweep_meta=sweep)


def correlator_yy(wick: WickCoefficients,
                  method: Method = 'fast',
                  check_stride: Optional[int] = None,
                  tol_pivot: float = TOL_PIVOT,
                  check_tol: float = CHECK_TOL) -> np.ndarray:
    """<sy_1 sy_{1+n}> for n = 0..N-1 (same options as correlator_xx)."""
    values, _ = _determinant_correlator(yy_symbol(wick), wick, method, check_stride,
                                        tol_pivot, check_tol, None)
    values.setflags(write=False)
    return values


def correlator_zz(wick: WickCoefficients) -> Tuple[np.ndarray, float]:
    """
    <sz_1 sz_{1+n}> and <sz>.

    mz = G_0 and zz[n] = mz^2 - G_n G_{-n} for n >= 1, zz[0] = 1.

    Returns:
        (zz array of length N, mz)
    """
    n_sites = wick.params.n_sites
    mz = wick.g(0)
    distances = np.arange(1, n_sites)
    values = np.empty(n_sites)
    values[0] = 1.0
    values[1:] = mz ** 2 - wick.g(distances) * wick.g(-distances)
    values.setflags(write=False)
    return values, mz


def correlator_table(wick: WickCoefficients,
                     method: Method = 'fast',
                     check_stride: Optional[int] = None,
                     tol_pivot: float = TOL_PIVOT,
                     check_tol: float = CHECK_TOL) -> CorrelatorTable:
    """All three correlator families and <sz> in one table."""
    table = correlator_xx(wick, method, check_stride, tol_pivot, check_tol)
    yy = correlator_yy(wick, method, check_stride, tol_pivot, check_tol)
    zz, mz = correlator_zz(wick)
    return CorrelatorTable(params=table.params, xx=table.xx, yy=yy, zz=zz, mz=mz,
                           sweep_meta=table.sweep_meta)


if __name__ == '__main__':
    from spectrum import wick_coefficients

    for lam in (0.0, 0.5, 1.0, 2.0):
        table = correlator_table(wick_coefficients(ChainParams(8, lam)))
        print(f"lambda={lam:4}  xx={np.round(table.xx, 4)}")
        print(f"             yy={np.round(table.yy, 4)}")
        print(f"             zz={np.round(table.zz, 4)}  mz={table.mz:.4f}")

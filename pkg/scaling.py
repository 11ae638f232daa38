"""
Finite-size scaling of the effective size around the critical point.

Sweeps N_eff over a lambda grid, differentiates on the grid, locates the
pseudo-critical peak of dN_eff/dlambda, fits power laws in N and collapses the
derivative curves onto one scaling function.
"""

from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, stats
from tqdm import tqdm

from errors import ConfigError, MacroError, NumericalError
from spectrum import ChainParams, DEFAULT_MAX_SITES, wick_coefficients
from toeplitz import CrossCheckFailure, Method, TOL_PIVOT, CHECK_TOL
from correlators import correlator_xx
from macroscopicity import InsufficientData, NonPositiveData, p_index

COLLAPSE_SAMPLES = 400
COLLAPSE_START = (2.0, 1.0)
COLLAPSE_MAXITER = 500
PEAK_EXCLUSION = 10.0  # asymptotic fits stay 10/N below lambda_m
PIVOTED_FALLBACK_MAX_SITES = 256


class PeakOnBoundary(ConfigError):
    """The discrete maximum of dN_eff/dlambda sits on the grid edge."""


class NoOverlap(ConfigError):
    """Rescaled curves share no common x range."""


class WindowTooClose(ConfigError):
    """Asymptotic fit window reaches into the finite-size peak region."""


class NonConvergence(NumericalError):
    """The collapse optimizer hit its iteration limit."""


class SweepPointFailed(NumericalError):
    """One (N, lambda) point of a sweep failed; the whole curve is discarded."""


@dataclass(frozen=True)
class SweepCurve:
    n_sites: int
    lambdas: np.ndarray
    neff: np.ndarray
    dneff: np.ndarray

    @property
    def neff_over_n(self) -> np.ndarray:
        return self.neff / self.n_sites

    @property
    def max_variance(self) -> np.ndarray:
        return self.neff * self.n_sites


@dataclass(frozen=True)
class PeakData:
    n_sites: int
    lambda_m: float
    peak_height: float


@dataclass(frozen=True)
class FitResult:
    exponent: float
    amplitude: float
    stderr: float
    r_squared: float
    n_points: int = 0

    def to_dict(self) -> Dict[str, float]:
        return {
            'exponent': self.exponent,
            'amplitude': self.amplitude,
            'stderr': self.stderr,
            'r_squared': self.r_squared,
            'n_points': self.n_points,
        }


@dataclass(frozen=True)
class CollapseResult:
    """
    Collapse quality at (b, nu_inverse).

    residual is the mean pairwise squared deviation of the rescaled curves on
    their common x range, divided by the mean square of the median curve.
    """

    b: float
    nu_inverse: float
    residual: float
    q_x: np.ndarray = field(repr=False)
    q_curve: np.ndarray = field(repr=False)
    converged: bool = True
    iterations: int = 0

    @property
    def nu(self) -> float:
        return 1.0 / self.nu_inverse

    def to_dict(self) -> Dict[str, float]:
        return {
            'b': self.b,
            'nu_inverse': self.nu_inverse,
            'nu': self.nu,
            'residual': self.residual,
            'converged': self.converged,
            'iterations': self.iterations,
        }


@dataclass(frozen=True)
class PointResult:
    params: ChainParams
    xx: np.ndarray
    breakdown_orders: Tuple[int, ...]
    method: str


# ---------------------------------------------------------------------------
# Grids and sweeps
# ---------------------------------------------------------------------------

def _steps(lo: float, hi: float, step: float) -> np.ndarray:
    count = int(np.floor((hi - lo) / step + 1e-9))
    return lo + step * np.arange(count + 1)


def lambda_grid(coarse_step: float = 0.01, fine_step: float = 0.0005,
                fine_range: Tuple[float, float] = (0.8, 1.1),
                lambda_max: float = 2.0) -> np.ndarray:
    """
    Coarse steps on [0, fine_lo] and [fine_hi, lambda_max], fine steps in between.

    Values are rounded to 12 digits so that the same grid is produced on every
    platform and duplicated segment edges merge.
    """
    if coarse_step <= 0 or fine_step <= 0:
        raise ConfigError(f"grid steps must be positive, got coarse={coarse_step}, fine={fine_step}")
    fine_lo, fine_hi = fine_range
    if not 0 <= fine_lo < fine_hi <= lambda_max:
        raise ConfigError(f"fine range {fine_range} must lie inside [0, {lambda_max}]")

    pieces = [
        _steps(0.0, fine_lo, coarse_step),
        _steps(fine_lo, fine_hi, fine_step),
        _steps(fine_hi, lambda_max, coarse_step),
        np.array([fine_lo, fine_hi]),
    ]
    return np.unique(np.round(np.concatenate(pieces), 12))


def validate_lambdas(lambdas: Sequence[float]) -> np.ndarray:
    values = np.asarray(lambdas, dtype=float)
    if values.ndim != 1 or len(values) == 0:
        raise ConfigError("lambda grid must be a non-empty list of couplings")
    if np.any(np.diff(values) <= 0):
        raise ConfigError("lambda grid must be strictly increasing")
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise ConfigError("couplings must be finite and >= 0")
    return values


def point_correlators(params: ChainParams,
                      method: Method = 'fast',
                      check_stride: Optional[int] = None,
                      tol_pivot: float = TOL_PIVOT,
                      check_tol: float = CHECK_TOL,
                      max_sites: int = DEFAULT_MAX_SITES) -> PointResult:
    """
    xx correlators of one point; small chains retry with pivoted LU after a
    failed cross-check.

    Raises:
        SweepPointFailed: Naming (N, lambda) and the underlying error
    """
    try:
        wick = wick_coefficients(params, max_sites=max_sites)
        try:
            table = correlator_xx(wick, method, check_stride, tol_pivot, check_tol)
        except CrossCheckFailure:
            if params.n_sites > PIVOTED_FALLBACK_MAX_SITES:
                raise
            table = correlator_xx(wick, 'pivoted')
    except MacroError as e:
        raise SweepPointFailed(
            f"N={params.n_sites}, lambda={params.coupling:.12g}: {type(e).__name__}: {e}"
        ) from None

    sweep = table.sweep_meta
    return PointResult(params, np.asarray(table.xx), tuple(sweep.breakdown_orders), sweep.method)


def _point_task(args) -> PointResult:
    params, options = args
    return point_correlators(params, **options)


def evaluate_points(points: Sequence[ChainParams], workers: int = 1,
                    desc: Optional[str] = None, **options) -> List[PointResult]:
    """
    Evaluate point_correlators over many points.

    Results come back in the order of `points` whatever the worker count.

    Args:
        points: Chain parameters to evaluate
        workers: Number of processes (1 runs inline)
        desc: tqdm label; None hides the progress bar
        **options: Passed to point_correlators

    Returns:
        List of PointResult aligned with points
    """
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    tasks = [(params, options) for params in points]

    if workers == 1 or len(tasks) <= 1:
        return [_point_task(task) for task in tqdm(tasks, desc=desc, disable=desc is None)]

    results: List[Optional[PointResult]] = [None] * len(tasks)
    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(_point_task, task): i for i, task in enumerate(tasks)}
        for future in tqdm(as_completed(futures), total=len(futures), desc=desc, disable=desc is None):
            results[futures[future]] = future.result()
    return results


def curve_from_neff(n_sites: int, lambdas: Sequence[float], neff: Sequence[float]) -> SweepCurve:
    """
    Attach dN_eff/dlambda (central differences, one-sided at the ends).
    """
    lambdas = np.asarray(lambdas, dtype=float)
    neff = np.asarray(neff, dtype=float)
    if lambdas.shape != neff.shape:
        raise ConfigError(f"{len(lambdas)} couplings but {len(neff)} N_eff values")
    if len(lambdas) >= 2:
        dneff = np.gradient(neff, lambdas, edge_order=1)
    else:
        dneff = np.full(len(lambdas), np.nan)
    return SweepCurve(n_sites, lambdas, neff, dneff)


def sweep(n_sites: int, lambdas: Sequence[float], grid: str = 'ns-even',
          workers: int = 1, **options) -> SweepCurve:
    """
    N_eff(lambda) and its derivative at fixed N.

    Args:
        n_sites: Chain length
        lambdas: Strictly increasing couplings
        grid: Momentum grid convention
        workers: Process count
        **options: Determinant options passed to point_correlators

    Returns:
        SweepCurve

    Raises:
        SweepPointFailed: If any point fails
    """
    values = validate_lambdas(lambdas)
    points = [ChainParams(n_sites, lam, grid) for lam in values]
    results = evaluate_points(points, workers=workers, **options)
    return curve_from_neff(n_sites, values, [float(np.sum(r.xx)) for r in results])


# ---------------------------------------------------------------------------
# Peaks and power laws
# ---------------------------------------------------------------------------

def locate_peak(curve: SweepCurve) -> PeakData:
    """
    Vertex of the parabola through the largest dN_eff/dlambda sample and its neighbours.

    Raises:
        PeakOnBoundary: If the largest sample is the first or last grid point
    """
    dneff = curve.dneff
    if len(dneff) < 3 or not np.all(np.isfinite(dneff)):
        raise PeakOnBoundary(f"N={curve.n_sites}: need at least 3 finite derivative samples to locate a peak")
    top = int(np.argmax(dneff))
    if top == 0 or top == len(dneff) - 1:
        raise PeakOnBoundary(
            f"N={curve.n_sites}: dN_eff/dlambda is largest at the grid edge "
            f"lambda={curve.lambdas[top]:.6g}; widen the lambda grid"
        )

    x = curve.lambdas[top - 1:top + 2]
    y = dneff[top - 1:top + 2]
    center = x[1]
    a, b, c = np.polyfit(x - center, y, 2)
    if a >= 0:
        return PeakData(curve.n_sites, float(center), float(y[1]))
    offset = -b / (2 * a)
    return PeakData(curve.n_sites, float(center + offset), float(c - b * b / (4 * a)))


def fit_power_law(points: Sequence[Tuple[float, float]]) -> FitResult:
    """
    Least squares of log y = log a + c log N.

    Args:
        points: (N, y) pairs, at least 4, all y > 0

    Returns:
        FitResult with exponent c and amplitude a

    Raises:
        InsufficientData: Fewer than 4 points
        NonPositiveData: Some N or y <= 0
    """
    if len(points) < 4:
        raise InsufficientData(f"power-law fit needs at least 4 points, got {len(points)}")
    sizes, values = (np.asarray(column, dtype=float) for column in zip(*points))
    if np.any(sizes <= 0) or np.any(values <= 0):
        raise NonPositiveData(f"power-law fit needs positive data, got y={values.tolist()}")

    fit = stats.linregress(np.log(sizes), np.log(values))
    return FitResult(
        exponent=float(fit.slope),
        amplitude=float(np.exp(fit.intercept)),
        stderr=float(fit.stderr),
        r_squared=float(min(1.0, max(0.0, fit.rvalue ** 2))),
        n_points=len(sizes),
    )


def peak_fits(peaks: Sequence[PeakData]) -> Dict[str, FitResult]:
    """Power laws of 1 - lambda_m(N) and of the peak height."""
    return {
        'shift': fit_power_law([(p.n_sites, 1.0 - p.lambda_m) for p in peaks]),
        'height': fit_power_law([(p.n_sites, p.peak_height) for p in peaks]),
    }


def asymptotic_divergence_fit(curve: SweepCurve, lam_lo: float, lam_hi: float,
                              lambda_m: Optional[float] = None) -> FitResult:
    """
    Slope of log(dN_eff/dlambda) against log(1 - lambda) below the peak.

    The exponent is the fitted slope, so a divergence (1 - lambda)^-g comes
    back as -g.

    Args:
        curve: Sweep at a single (large) N
        lam_lo: Lower window edge
        lam_hi: Upper window edge
        lambda_m: Peak position; located on the curve when None

    Raises:
        WindowTooClose: If lam_hi > lambda_m - 10/N
    """
    if not lam_lo < lam_hi < 1.0:
        raise ConfigError(f"asymptotic window must satisfy lo < hi < 1, got [{lam_lo}, {lam_hi}]")
    if lambda_m is None:
        lambda_m = locate_peak(curve).lambda_m
    limit = lambda_m - PEAK_EXCLUSION / curve.n_sites
    if lam_hi > limit:
        raise WindowTooClose(
            f"N={curve.n_sites}: window edge {lam_hi} is within 10/N of lambda_m={lambda_m:.6g}; "
            f"keep lambda <= {limit:.6g}"
        )

    mask = (curve.lambdas >= lam_lo) & (curve.lambdas <= lam_hi)
    return fit_power_law(list(zip(1.0 - curve.lambdas[mask], curve.dneff[mask])))


def window_stability(curve: SweepCurve, lam_lo: float, lam_hi: float,
                     lambda_m: Optional[float] = None) -> Dict[str, float]:
    """Asymptotic exponent on the full window and on its central half."""
    full = asymptotic_divergence_fit(curve, lam_lo, lam_hi, lambda_m)
    quarter = (lam_hi - lam_lo) / 4
    half = asymptotic_divergence_fit(curve, lam_lo + quarter, lam_hi - quarter, lambda_m)
    return {
        'full_exponent': full.exponent,
        'half_exponent': half.exponent,
        'shift': abs(full.exponent - half.exponent),
    }


def p_index_curve(curves: Sequence[SweepCurve]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    p-index at every coupling shared by the curves.

    Returns:
        (lambdas, p, stderr)
    """
    if len({c.n_sites for c in curves}) < 4:
        raise InsufficientData("p-index curve needs sweeps at 4 or more sizes")
    lambdas = curves[0].lambdas
    for curve in curves[1:]:
        if not np.array_equal(curve.lambdas, lambdas):
            raise ConfigError("p-index curve needs every sweep on the same lambda grid")

    p_values = np.empty(len(lambdas))
    errors = np.empty(len(lambdas))
    for i in range(len(lambdas)):
        result = p_index({c.n_sites: float(c.max_variance[i]) for c in curves})
        p_values[i] = result.p_index
        errors[i] = result.stderr
    return lambdas, p_values, errors


# ---------------------------------------------------------------------------
# Data collapse
# ---------------------------------------------------------------------------

def _match_peaks(curves: Sequence[SweepCurve], peaks: Sequence[PeakData]) -> List[Tuple[SweepCurve, PeakData]]:
    if len(curves) < 3:
        raise InsufficientData(f"collapse needs at least 3 curves, got {len(curves)}")
    by_size = {p.n_sites: p for p in peaks}
    missing = [c.n_sites for c in curves if c.n_sites not in by_size]
    if missing:
        raise ConfigError(f"no peak data for N={missing}")
    return [(c, by_size[c.n_sites]) for c in curves]


def rescale(curve: SweepCurve, peak: PeakData, b: float, nu_inv: float) -> Tuple[np.ndarray, np.ndarray]:
    """x = N^nu_inv (lambda - lambda_m), y = (dN_eff - peak height) / N^b"""
    n = float(curve.n_sites)
    return n ** nu_inv * (curve.lambdas - peak.lambda_m), (curve.dneff - peak.peak_height) / n ** b


def collapse(curves: Sequence[SweepCurve], peaks: Sequence[PeakData], b: float, nu_inv: float,
             window: Optional[float] = None, samples: int = COLLAPSE_SAMPLES) -> CollapseResult:
    """
    Rescale every curve and measure how far apart they are.

    Args:
        curves: At least 3 sweeps
        peaks: Peak data for every curve's N
        b: Vertical exponent
        nu_inv: Horizontal exponent 1/nu
        window: Optional half-width limiting the common x range to |x| <= window
        samples: Points on the common x range

    Returns:
        CollapseResult with the residual and the median curve Q

    Raises:
        NoOverlap: If the rescaled x ranges do not overlap
    """
    pairs = _match_peaks(curves, peaks)
    rescaled = [rescale(c, p, b, nu_inv) for c, p in pairs]

    lo = max(x[0] for x, _ in rescaled)
    hi = min(x[-1] for x, _ in rescaled)
    if window is not None:
        lo, hi = max(lo, -window), min(hi, window)
    if not lo < hi:
        raise NoOverlap(f"rescaled curves share no x range at b={b:.4g}, nu_inv={nu_inv:.4g}")

    q_x = np.linspace(lo, hi, samples)
    ys = np.array([np.interp(q_x, x, y) for x, y in rescaled])
    spread = np.mean([np.mean((ys[i] - ys[j]) ** 2) for i, j in combinations(range(len(ys)), 2)])
    q_curve = np.median(ys, axis=0)
    scale = float(np.mean(q_curve ** 2))
    residual = float(spread / scale) if scale > 0 else float(spread)
    return CollapseResult(b, nu_inv, residual, q_x, q_curve)


def optimize_collapse(curves: Sequence[SweepCurve], peaks: Sequence[PeakData],
                      start: Tuple[float, float] = COLLAPSE_START,
                      window: Optional[float] = None,
                      strict: bool = False) -> CollapseResult:
    """
    Nelder-Mead search for the (b, nu_inv) minimizing the collapse residual.

    Args:
        curves: At least 3 sweeps
        peaks: Peak data for every curve's N
        start: Initial (b, nu_inv)
        window: Passed to collapse
        strict: Raise NonConvergence instead of returning a flagged result

    Returns:
        CollapseResult at the optimum (converged=False when the iteration cap was hit)
    """
    _match_peaks(curves, peaks)

    def objective(params):
        b, nu_inv = params
        if nu_inv <= 0:
            return np.inf
        try:
            return collapse(curves, peaks, b, nu_inv, window).residual
        except NoOverlap:
            return np.inf

    result = optimize.minimize(objective, np.asarray(start, dtype=float), method='Nelder-Mead',
                               options={'maxiter': COLLAPSE_MAXITER, 'xatol': 1e-6, 'fatol': 1e-14})
    if not result.success and strict:
        raise NonConvergence(f"collapse optimizer stopped after {result.nit} iterations: {result.message}")

    b, nu_inv = (float(v) for v in result.x)
    best = collapse(curves, peaks, b, nu_inv, window)
    return CollapseResult(b, nu_inv, best.residual, best.q_x, best.q_curve,
                          converged=bool(result.success), iterations=int(result.nit))


def neighbour_collapse(curves: Sequence[SweepCurve], peaks: Sequence[PeakData], result: CollapseResult,
                   delta: float = 0.2, window: Optional[float] = None) -> Dict[str, float]:
    """
    Residuals at (b +- delta, nu_inv) and (b, nu_inv +- delta) around a result.

    Returns:
        Dict of neighbour residuals plus 'local_minimum' (1.0 if none is lower)
    """
    neighbours = {
        'b_minus': (result.b - delta, result.nu_inverse),
        'b_plus': (result.b + delta, result.nu_inverse),
        'nu_inv_minus': (result.b, result.nu_inverse - delta),
        'nu_inv_plus': (result.b, result.nu_inverse + delta),
    }
    residuals = {}
    for name, (b, nu_inv) in neighbours.items():
        try:
            residuals[name] = collapse(curves, peaks, b, nu_inv, window).residual if nu_inv > 0 else float('inf')
        except NoOverlap:
            residuals[name] = float('inf')
    residuals['local_minimum'] = float(all(v >= result.residual for v in residuals.values()))
    return residuals


def jackknife_collapse(curves: Sequence[SweepCurve], peaks: Sequence[PeakData],
                       window: Optional[float] = None) -> Dict[str, float]:
    """
    Re-optimize the collapse without the largest-N curve.

    Returns:
        Dict with 'b_full', 'b_without_largest' and 'b_shift'
    """
    if len(curves) < 4:
        raise InsufficientData("jackknife needs at least 4 curves")
    full = optimize_collapse(curves, peaks, window=window)
    largest = max(c.n_sites for c in curves)
    reduced = optimize_collapse([c for c in curves if c.n_sites != largest], peaks, window=window)
    return {
        'b_full': full.b,
        'b_without_largest': reduced.b,
        'b_shift': abs(full.b - reduced.b),
        'removed_n': largest,
    }


if __name__ == '__main__':
    grid = lambda_grid(0.05, 0.005, (0.85, 1.1), 1.5)
    for n in (32, 64, 128):
        peak = locate_peak(sweep(n, grid))
        print(f"N={n:4}  lambda_m={peak.lambda_m:.5f}  peak={peak.peak_height:.3f}")

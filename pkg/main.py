import argparse
import json
import math
import os
import sys
import time
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from config import ENGINE_VERSION, RunConfig, build_config
from database import init_database, load_many, store_many
from errors import EXIT_OK, ValidationFailure, exit_code_for
from spectrum import ChainParams, GRID_NS_EVEN, GRID_ODD_RING, wick_coefficients
from toeplitz import ToeplitzSymbol, det_sweep
from correlators import correlator_table, xx_symbol
from macroscopicity import effective_size, domain_wall_neff, domain_wall_neff_oracle
from ed_oracle import MAX_ED_SITES, ground_state, observable_suite, direction_scan, scan_angles
from scaling import (SweepCurve, curve_from_neff, evaluate_points, lambda_grid, validate_lambdas,
                     locate_peak, peak_fits, collapse, optimize_collapse, neighbour_collapse,
                     jackknife_collapse, asymptotic_divergence_fit, window_stability,
                     p_index_curve, rescale)

CSV_FORMAT = '%.12g'
REFERENCE_COLLAPSE = (1.89, 1.0)
BENCH_SPEEDUP_SIZE = 1024
BENCH_MIN_SPEEDUP = 20.0
BENCH_TOL = 1e-8
SCAN_RESOLUTION = (20, 40)
DOMAIN_WALL_TOL = 1e-12
DEFAULT_DOMAIN_WALL_SIZES = [8, 14, 100]


def say(config: RunConfig, *parts):
    if not config.quiet:
        print(*parts)


def banner(config: RunConfig, title: str):
    say(config, "=" * 80)
    say(config, title)
    say(config, "=" * 80)


def write_csv(path: str, header: str, columns: Sequence[Sequence[float]]) -> None:
    """Comma-separated values, 12 significant digits, one header line."""
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns]) if columns and len(columns[0]) else \
        np.empty((0, len(header.split(','))))
    np.savetxt(path, data, delimiter=',', header=header, comments='', fmt=CSV_FORMAT)


def write_json(path: str, payload: Dict[str, Any]) -> None:
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(payload, f, indent=2, ensure_ascii=False)


def sweep_lambdas(config: RunConfig) -> np.ndarray:
    if config.lambdas is not None:
        return validate_lambdas(config.lambdas)
    grid = lambda_grid(config.lambda_coarse, config.lambda_fine, config.fine_range, config.lambda_max)
    return validate_lambdas(grid)


def compute_curves(config: RunConfig, sizes: Sequence[int], stats: Dict[str, Any]) -> Dict[int, SweepCurve]:
    """
    Sweep every size over the configured lambda grid.

    Cached points are read first; the rest are computed (in parallel when
    workers > 1) and written back by this process only.

    Args:
        config: Run configuration
        sizes: Chain lengths to sweep
        stats: Updated in place with cache hits, misses and breakdown orders

    Returns:
        Mapping N -> SweepCurve
    """
    lambdas = sweep_lambdas(config)
    conn = init_database(config.cache_dir) if config.use_cache else None
    options = {
        'check_stride': config.check_stride,
        'tol_pivot': config.tol_pivot,
        'check_tol': config.check_tol,
        'max_sites': config.max_sites,
    }

    curves = {}
    try:
        for n_sites in sizes:
            keys = [(n_sites, float(lam), config.grid) for lam in lambdas]
            xx_values: List[Optional[np.ndarray]] = [None] * len(keys)
            if conn is not None:
                for i, xx in load_many(conn, keys).items():
                    xx_values[i] = xx

            missing = [i for i, xx in enumerate(xx_values) if xx is None]
            stats['cache_hits'] += len(keys) - len(missing)
            stats['cache_misses'] += len(missing)

            if missing:
                points = [ChainParams(n_sites, lambdas[i], config.grid) for i in missing]
                desc = None if config.quiet else f"Sweeping N={n_sites}"
                results = evaluate_points(points, workers=config.workers, desc=desc, **options)
                for i, result in zip(missing, results):
                    xx_values[i] = result.xx
                    if result.breakdown_orders:
                        label = f"N={n_sites},lambda={lambdas[i]:.12g}"
                        stats['breakdown_orders'][label] = list(result.breakdown_orders)
                if conn is not None:
                    store_many(conn, [(n_sites, float(lambdas[i]), config.grid, xx_values[i]) for i in missing])

            neff = [float(np.sum(xx)) for xx in xx_values]
            curves[n_sites] = curve_from_neff(n_sites, lambdas, neff)
    finally:
        if conn is not None:
            conn.close()
    return curves


def new_stats() -> Dict[str, Any]:
    return {'cache_hits': 0, 'cache_misses': 0, 'breakdown_orders': {}}


def write_run_log(config: RunConfig, command: str, started: float, stats: Dict[str, Any]) -> str:
    path = os.path.join(config.output_dir, 'run.json')
    write_json(path, {
        'command': command,
        'engine_version': ENGINE_VERSION,
        'config': config.to_dict(),
        'wall_time_seconds': round(time.time() - started, 3),
        **stats,
    })
    return path


def cmd_sweep(config: RunConfig) -> int:
    """
    Write sweep_N<k>.csv per size, pindex.csv when 4+ p-index sizes were swept, and run.json.
    """
    started = time.time()
    os.makedirs(config.output_dir, exist_ok=True)
    stats = new_stats()

    banner(config, f"Sweep: N in {config.sizes}, grid={config.grid}, workers={config.workers}")
    curves = compute_curves(config, config.sizes, stats)

    for n_sites, curve in curves.items():
        path = os.path.join(config.output_dir, f"sweep_N{n_sites}.csv")
        write_csv(path, 'lambda,neff,neff_over_n,dneff',
                  [curve.lambdas, curve.neff, curve.neff_over_n, curve.dneff])
        say(config, f"  N={n_sites:5d}: {len(curve.lambdas)} points -> {path}")

    window = [curves[n] for n in config.pindex_sizes if n in curves]
    if len(window) >= 4:
        lambdas, p_values, errors = p_index_curve(window)
        path = os.path.join(config.output_dir, 'pindex.csv')
        write_csv(path, 'lambda,p_index,stderr', [lambdas, p_values, errors])
        say(config, f"  p-index over N={[c.n_sites for c in window]} -> {path}")

    log_path = write_run_log(config, 'sweep', started, stats)
    say(config, f"Cache: {stats['cache_hits']} hits, {stats['cache_misses']} misses. Run log: {log_path}")
    return EXIT_OK


def scaling_report(curves: Dict[int, SweepCurve], config: RunConfig) -> Dict[str, Any]:
    """
    Peaks, power-law fits, collapse and asymptotic fit from sweep curves.

    Returns:
        Dict with 'peaks' (list of PeakData), 'fits' (JSON-ready), 'collapse_rows' (x, y, N)
    """
    peak_sizes = sorted(set(config.fit_sizes) | set(config.collapse_sizes))
    peaks = {n: locate_peak(curves[n]) for n in peak_sizes}

    fits = peak_fits([peaks[n] for n in config.fit_sizes])
    collapse_curves = [curves[n] for n in config.collapse_sizes]
    collapse_peaks = [peaks[n] for n in config.collapse_sizes]
    window = config.collapse_window

    best = optimize_collapse(collapse_curves, collapse_peaks, window=window)
    reference = collapse(collapse_curves, collapse_peaks, *REFERENCE_COLLAPSE, window=window)
    report: Dict[str, Any] = {
        'engine_version': ENGINE_VERSION,
        'peak_shift': {**fits['shift'].to_dict(), 'quantity': '1 - lambda_m(N)'},
        'peak_height': {**fits['height'].to_dict(), 'quantity': 'dN_eff/dlambda at lambda_m(N)'},
        'collapse': {
            **best.to_dict(),
            'sizes': list(config.collapse_sizes),
            'window': window,
            'neighbours': neighbour_collapse(collapse_curves, collapse_peaks, best, window=window),
        },
        'collapse_reference': reference.to_dict(),
        'exponent_gap': {
            'height_exponent': fits['height'].exponent,
            'collapse_b': best.b,
            'difference': best.b - fits['height'].exponent,
        },
        'jackknife': (jackknife_collapse(collapse_curves, collapse_peaks, window=window)
                      if len(collapse_curves) >= 4 else None),
        'asymptotic': None,
    }

    if config.asymptotic_size in curves:
        curve = curves[config.asymptotic_size]
        lo, hi = config.asymptotic_window
        lambda_m = locate_peak(curve).lambda_m
        fit = asymptotic_divergence_fit(curve, lo, hi, lambda_m)
        report['asymptotic'] = {
            **fit.to_dict(),
            'n_sites': config.asymptotic_size,
            'window': [lo, hi],
            'lambda_m': lambda_m,
            'stability': window_stability(curve, lo, hi, lambda_m),
        }

    rows = []
    for curve, peak in zip(collapse_curves, collapse_peaks):
        x, y = rescale(curve, peak, best.b, best.nu_inverse)
        keep = np.abs(x) <= window if window is not None else np.ones(len(x), dtype=bool)
        rows.extend((xi, yi, curve.n_sites) for xi, yi in zip(x[keep], y[keep]))

    return {'peaks': [peaks[n] for n in peak_sizes], 'fits': report, 'collapse_rows': rows}


def write_scaling_outputs(report: Dict[str, Any], output_dir: str) -> List[str]:
    os.makedirs(output_dir, exist_ok=True)
    peaks = report['peaks']
    paths = [os.path.join(output_dir, name) for name in ('peaks.csv', 'fits.json', 'collapse.csv')]
    write_csv(paths[0], 'N,lambda_m,peak_height',
              [[p.n_sites for p in peaks], [p.lambda_m for p in peaks], [p.peak_height for p in peaks]])
    write_json(paths[1], report['fits'])
    rows = report['collapse_rows']
    write_csv(paths[2], 'x,y,N', [[r[0] for r in rows], [r[1] for r in rows], [r[2] for r in rows]])
    return paths


def cmd_scaling(config: RunConfig) -> int:
    """Write peaks.csv, fits.json, collapse.csv and run.json."""
    started = time.time()
    stats = new_stats()
    sizes = sorted(set(config.fit_sizes) | set(config.collapse_sizes)
                   | ({config.asymptotic_size} if config.asymptotic_size else set()))

    banner(config, f"Scaling analysis: N in {sizes}")
    curves = compute_curves(config, sizes, stats)
    report = scaling_report(curves, config)
    paths = write_scaling_outputs(report, config.output_dir)

    fits = report['fits']
    say(config, "=" * 80)
    say(config, f"{'N':>6} {'lambda_m':>14} {'peak height':>16}")
    for peak in report['peaks']:
        say(config, f"{peak.n_sites:6d} {peak.lambda_m:14.8f} {peak.peak_height:16.6f}")
    say(config, "=" * 80)
    say(config, f"1 - lambda_m ~ N^{fits['peak_shift']['exponent']:.3f} "
                f"(+/- {fits['peak_shift']['stderr']:.3f})")
    say(config, f"peak height  ~ N^{fits['peak_height']['exponent']:.3f} "
                f"(+/- {fits['peak_height']['stderr']:.3f})")
    say(config, f"collapse: b={fits['collapse']['b']:.3f}, nu={fits['collapse']['nu']:.3f}, "
                f"residual={fits['collapse']['residual']:.3g}, converged={fits['collapse']['converged']}")
    if fits['asymptotic']:
        say(config, f"asymptotic (N={config.asymptotic_size}): dN_eff/dlambda ~ "
                    f"(1-lambda)^{fits['asymptotic']['exponent']:.3f}")
    for path in paths:
        say(config, f"  -> {path}")

    write_run_log(config, 'scaling', started, stats)
    return EXIT_OK


def _axis_distance(a: float, b: float) -> float:
    """Angular distance between azimuths, treating phi and phi + pi as the same axis."""
    d = abs(a - b) % math.pi
    return min(d, math.pi - d)


def validate_point(n_sites: int, coupling: float) -> Dict[str, Any]:
    """
    Engine-vs-ED discrepancies for one (N, lambda).

    Returns:
        Row dict with the discrepancies, tolerance, argmax agreement and pass flag
    """
    grid = GRID_NS_EVEN if n_sites % 2 == 0 else GRID_ODD_RING
    table = correlator_table(wick_coefficients(ChainParams(n_sites, coupling, grid)))
    measures = effective_size(table)
    gs = ground_state(n_sites, coupling)
    suite = observable_suite(gs)

    row: Dict[str, Any] = {
        'N': n_sites,
        'lambda': coupling,
        'xx': float(np.max(np.abs(table.xx - suite.xx))),
        'yy': float(np.max(np.abs(table.yy - suite.yy))),
        'zz': float(np.max(np.abs(table.zz - suite.zz))),
        'mz': abs(table.mz - suite.mz),
        'neff': abs(measures.n_eff - suite.x2 / n_sites),
    }

    scan_dir, _ = direction_scan(gs, SCAN_RESOLUTION)
    thetas, phis = scan_angles(SCAN_RESOLUTION)
    if coupling == 0.0:
        argmax_ok = measures.degenerate_argmax
    else:
        argmax_ok = (not measures.degenerate_argmax
                     and abs(scan_dir.theta - measures.argmax_dir.theta) <= thetas[1] - thetas[0] + 1e-12
                     and _axis_distance(scan_dir.phi, measures.argmax_dir.phi) <= phis[1] - phis[0] + 1e-12)

    row['tol'] = 1e-10 if coupling == 0.0 else 8.0 / n_sites
    row['argmax_ok'] = bool(argmax_ok)
    row['passed'] = bool(argmax_ok and all(row[k] <= row['tol'] for k in ('xx', 'yy', 'zz', 'mz', 'neff')))
    return row


def cmd_validate(config: RunConfig) -> int:
    """Compare the engine with exact diagonalization; exit 1 on any failure."""
    too_big = [n for n in config.validate_sizes if n > MAX_ED_SITES]
    if too_big:
        raise ValueError(f"validate is limited to N <= {MAX_ED_SITES}; got {too_big}")

    rows = []
    points = [(n, lam) for n in config.validate_sizes for lam in config.validate_lambdas]
    for n_sites, coupling in tqdm(points, desc="Validating", disable=config.quiet):
        rows.append(validate_point(n_sites, coupling))

    banner(config, "Engine vs exact diagonalization (max |difference|)")
    say(config, f"{'N':>4} {'lambda':>8} {'xx':>10} {'yy':>10} {'zz':>10} {'mz':>10} {'neff':>10} "
                f"{'tol':>8} {'argmax':>7} {'ok':>4}")
    for row in rows:
        say(config, f"{row['N']:4d} {row['lambda']:8.3f} {row['xx']:10.2e} {row['yy']:10.2e} {row['zz']:10.2e} "
                    f"{row['mz']:10.2e} {row['neff']:10.2e} {row['tol']:8.2e} "
                    f"{'yes' if row['argmax_ok'] else 'NO':>7} {'ok' if row['passed'] else 'FAIL':>4}")

    os.makedirs(config.output_dir, exist_ok=True)
    path = os.path.join(config.output_dir, 'validate.csv')
    write_csv(path, 'N,lambda,xx,yy,zz,mz,neff,tol,argmax_ok,passed',
              [[r[k] for r in rows] for k in ('N', 'lambda', 'xx', 'yy', 'zz', 'mz', 'neff', 'tol',
                                              'argmax_ok', 'passed')])

    failures = [r for r in rows if not r['passed']]
    if failures:
        raise ValidationFailure(
            f"{len(failures)} of {len(rows)} points exceed tolerance: "
            + ", ".join(f"(N={r['N']}, lambda={r['lambda']})" for r in failures)
        )
    say(config, f"All {len(rows)} points agree with exact diagonalization. Report: {path}")
    return EXIT_OK


def bench_size(upto: int, coupling: float = 0.9) -> Dict[str, float]:
    """
    Time the fast sweep against pivoted LU at every order for one size.

    The symbol is the xx symbol of a chain just long enough to reach order `upto`.
    The fast path runs with its default cross-checks, as in a sweep.
    """
    n_sites = upto + 2 if upto % 2 == 0 else upto + 1
    symbol = xx_symbol(wick_coefficients(ChainParams(n_sites, coupling)))

    start = time.perf_counter()
    fast = det_sweep(symbol, upto)
    fast_seconds = time.perf_counter() - start

    start = time.perf_counter()
    naive = det_sweep(symbol, upto, method='pivoted')
    naive_seconds = time.perf_counter() - start

    deviation = np.abs(fast.values - naive.values) / np.maximum(1.0, np.abs(naive.values))
    return {
        'upto': upto,
        'fast_seconds': fast_seconds,
        'naive_seconds': naive_seconds,
        'speedup': naive_seconds / max(fast_seconds, 1e-12),
        'max_deviation': float(np.max(deviation)),
        'breakdowns': len(fast.breakdown_orders),
        'checked': len(fast.checked_orders),
    }


def identity_check(upto: int = 100) -> bool:
    symbol = ToeplitzSymbol.from_function(lambda m: (m == 0).astype(float), upto)
    fast = det_sweep(symbol, upto)
    naive = det_sweep(symbol, upto, method='pivoted')
    return bool(np.all(fast.values == 1.0) and np.allclose(naive.values, 1.0, atol=1e-12, rtol=0))


def cmd_bench(config: RunConfig) -> int:
    """Timing table of the two determinant paths; exit 1 if speed or agreement fall short."""
    rows = [bench_size(n) for n in tqdm(config.bench_sizes, desc="Benchmarking", disable=config.quiet)]
    identity_ok = identity_check()

    banner(config, "Determinant sweep: Schur recursion vs pivoted LU at every order")
    say(config, f"{'upto':>6} {'fast [s]':>10} {'naive [s]':>10} {'speedup':>9} {'max dev':>10} {'fallbacks':>9}")
    for row in rows:
        say(config, f"{row['upto']:6d} {row['fast_seconds']:10.4f} {row['naive_seconds']:10.4f} "
                    f"{row['speedup']:9.1f} {row['max_deviation']:10.2e} {row['breakdowns']:9d}")
    say(config, f"identity symbol: {'all determinants 1' if identity_ok else 'MISMATCH'}")

    os.makedirs(config.output_dir, exist_ok=True)
    path = os.path.join(config.output_dir, 'bench.csv')
    write_csv(path, 'upto,fast_seconds,naive_seconds,speedup,max_deviation',
              [[r[k] for r in rows] for k in ('upto', 'fast_seconds', 'naive_seconds', 'speedup', 'max_deviation')])

    problems = [f"upto={r['upto']}: deviation {r['max_deviation']:.3g}" for r in rows if r['max_deviation'] > BENCH_TOL]
    problems += [f"upto={r['upto']}: speedup {r['speedup']:.1f}x < {BENCH_MIN_SPEEDUP:.0f}x"
                 for r in rows if r['upto'] == BENCH_SPEEDUP_SIZE and r['speedup'] < BENCH_MIN_SPEEDUP]
    if not identity_ok:
        problems.append("identity symbol did not give unit determinants")
    if problems:
        raise ValidationFailure("benchmark failed: " + "; ".join(problems))
    return EXIT_OK


def cmd_domain_wall(config: RunConfig, sizes: Sequence[int]) -> int:
    """Write domain_wall_N<k>.csv; the oracle column is present for N <= 14."""
    os.makedirs(config.output_dir, exist_ok=True)
    banner(config, f"Domain-wall effective size for N in {list(sizes)}")

    for n_sites in sizes:
        walls = np.arange(n_sites + 1)
        neff = [domain_wall_neff(int(n), n_sites) for n in walls]
        path = os.path.join(config.output_dir, f"domain_wall_N{n_sites}.csv")

        if n_sites <= MAX_ED_SITES:
            oracle = [domain_wall_neff_oracle(int(n), n_sites) for n in walls]
            worst = float(np.max(np.abs(np.array(neff) - np.array(oracle))))
            write_csv(path, 'n,neff,neff_oracle', [walls, neff, oracle])
            say(config, f"  N={n_sites}: max |closed form - oracle| = {worst:.2e} -> {path}")
            if worst > DOMAIN_WALL_TOL:
                raise ValidationFailure(f"domain-wall closed form and oracle differ by {worst:.3g} at N={n_sites}")
        else:
            write_csv(path, 'n,neff', [walls, neff])
            say(config, f"  N={n_sites}: -> {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', metavar='FILE', help='Flat JSON config file (flags override it)')
    common.add_argument('--sizes', type=int, nargs='+', help='Chain lengths N')
    common.add_argument('--lambdas', type=float, nargs='+', help='Explicit coupling grid (replaces coarse/fine grid)')
    common.add_argument('--lambda-coarse', type=float, help='Coarse lambda step (default 0.01)')
    common.add_argument('--lambda-fine', type=float, help='Fine lambda step near lambda=1 (default 0.0005)')
    common.add_argument('--fine-range', type=float, nargs=2, metavar=('LO', 'HI'), help='Fine-step interval')
    common.add_argument('--lambda-max', type=float, help='Largest coupling of the grid (default 2.0)')
    common.add_argument('--grid', choices=[GRID_NS_EVEN, GRID_ODD_RING], help='Momentum grid convention')
    common.add_argument('--workers', type=int, help='Worker processes')
    common.add_argument('--cache-dir', help='Correlator cache directory (env MACRO_TFIM_CACHE_DIR)')
    common.add_argument('--out', help='Output directory')
    common.add_argument('--no-cache', action='store_true', help='Neither read nor write the correlator cache')
    common.add_argument('--quiet', action='store_true', help='No banners or progress bars')
    common.add_argument('--check-stride', type=int, help='Cross-check spacing of the determinant sweep (0 = off)')
    common.add_argument('--check-tol', type=float, help='Agreement required at cross-checked orders (default 1e-8)')
    common.add_argument('--tol-pivot', type=float, help='Relative pivot size below which the sweep restarts (default 1e-10)')
    common.add_argument('--max-sites', type=int, help='Largest N accepted (default 8192)')

    parser = argparse.ArgumentParser(description='Macroscopic superpositions in the transverse-field Ising ring')
    sub = parser.add_subparsers(dest='command', required=True)
    sweep = sub.add_parser('sweep', parents=[common], help='N_eff(lambda) curves per size')
    sweep.add_argument('--pindex-sizes', type=int, nargs='+', help='Size window of pindex.csv (at least 4 must be swept)')
    scaling = sub.add_parser('scaling', parents=[common], help='Peaks, power laws, collapse, asymptotic fit')
    scaling.add_argument('--asymptotic-size', type=int, help='N of the asymptotic fit (default 4096)')
    scaling.add_argument('--asymptotic-window', type=float, nargs=2, metavar=('LO', 'HI'))
    scaling.add_argument('--collapse-window', type=float, help='Half-width of the collapse x range')
    scaling.add_argument('--fit-sizes', type=int, nargs='+', help='Sizes of the power-law peak fits (overrides --sizes)')
    scaling.add_argument('--collapse-sizes', type=int, nargs='+', help='Sizes of the data collapse (overrides --sizes)')
    sub.add_parser('validate', parents=[common], help='Engine vs exact diagonalization (N <= 14)')
    sub.add_parser('bench', parents=[common], help='Determinant sweep timing')
    sub.add_parser('domain-wall', parents=[common], help='Domain-wall effective size table')
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides: Dict[str, Any] = {
        'lambda_coarse': args.lambda_coarse,
        'lambda_fine': args.lambda_fine,
        'fine_range': args.fine_range,
        'lambda_max': args.lambda_max,
        'grid': args.grid,
        'workers': args.workers,
        'cache_dir': args.cache_dir,
        'output_dir': args.out,
        'check_stride': args.check_stride,
        'check_tol': args.check_tol,
        'tol_pivot': args.tol_pivot,
        'max_sites': args.max_sites,
        'use_cache': False if args.no_cache else None,
        'quiet': True if args.quiet else None,
    }

    # --sizes / --lambdas mean different things per subcommand
    if args.command == 'sweep':
        overrides.update(sizes=args.sizes, lambdas=args.lambdas, pindex_sizes=args.pindex_sizes)
    elif args.command == 'scaling':
        overrides.update(fit_sizes=args.fit_sizes or args.sizes, collapse_sizes=args.collapse_sizes or args.sizes,
                         lambdas=args.lambdas,
                         asymptotic_size=args.asymptotic_size, asymptotic_window=args.asymptotic_window,
                         collapse_window=args.collapse_window)
    elif args.command == 'validate':
        overrides.update(validate_sizes=args.sizes, validate_lambdas=args.lambdas)
    elif args.command == 'bench':
        overrides.update(bench_sizes=args.sizes)

    return build_config(args.config, overrides, command=args.command)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, run one subcommand and map failures to exit codes.

    Returns:
        0 ok, 1 validation failure, 2 numerical failure, 3 configuration error
    """
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        if args.command == 'sweep':
            return cmd_sweep(config)
        if args.command == 'scaling':
            return cmd_scaling(config)
        if args.command == 'validate':
            return cmd_validate(config)
        if args.command == 'bench':
            return cmd_bench(config)
        return cmd_domain_wall(config, args.sizes or DEFAULT_DOMAIN_WALL_SIZES)
    except KeyboardInterrupt:
        print("\nInterrupted.")
        return 130
    except Exception as e:
        print(f"Error: {e}", file=sys.stderr)
        return exit_code_for(e)


if __name__ == '__main__':
    sys.exit(main())

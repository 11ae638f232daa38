import sqlite3
import os
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from config import ENGINE_VERSION
from spectrum import GRID_NS_EVEN, GRID_ODD_RING

CACHE_FILENAME = 'correlators.db'

# Grid code stored in the payload header
GRID_CODES = {GRID_NS_EVEN: 0.0, GRID_ODD_RING: 1.0}

_HEADER_LEN = 3
_DTYPE = '<f8'


@dataclass(frozen=True)
class CacheKey:
    """(N, lambda to 12 significant digits, grid, engine version)"""

    n_sites: int
    coupling_key: str
    grid: str
    engine_version: str = ENGINE_VERSION

    @classmethod
    def for_point(cls, n_sites: int, coupling: float, grid: str,
                  engine_version: str = ENGINE_VERSION) -> 'CacheKey':
        return cls(int(n_sites), coupling_key(coupling), grid, engine_version)

    def as_row(self) -> Tuple[int, str, str, str]:
        return (self.n_sites, self.coupling_key, self.grid, self.engine_version)


def coupling_key(coupling: float) -> str:
    return format(float(coupling), '.12g')


def init_database(cache_dir: str = '.macro_cache') -> sqlite3.Connection:
    """
    Open (and create if needed) the correlator cache in cache_dir.

    Args:
        cache_dir: Directory holding correlators.db

    Returns:
        Database connection
    """
    os.makedirs(cache_dir, exist_ok=True)
    conn = sqlite3.connect(os.path.join(cache_dir, CACHE_FILENAME))
    conn.row_factory = sqlite3.Row

    cursor = conn.cursor()

    # One row per (N, lambda, grid, engine version); payload = header + xx[0..N-1]
    cursor.execute('''
        CREATE TABLE IF NOT EXISTS correlator_cache (
            n_sites INTEGER NOT NULL,
            coupling_key TEXT NOT NULL,
            grid TEXT NOT NULL,
            engine_version TEXT NOT NULL,
            payload BLOB NOT NULL,
            created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP,
            PRIMARY KEY (n_sites, coupling_key, grid, engine_version)
        )
    ''')

    conn.commit()
    return conn


def encode_payload(n_sites: int, coupling: float, grid: str, xx: np.ndarray) -> bytes:
    """Little-endian float64 [N, lambda, grid code] followed by xx."""
    xx = np.asarray(xx, dtype=float)
    if xx.shape != (n_sites,):
        raise ValueError(f"expected {n_sites} correlator values, got shape {xx.shape}")
    header = np.array([n_sites, coupling, GRID_CODES[grid]], dtype=_DTYPE)
    return header.tobytes() + xx.astype(_DTYPE).tobytes()


def decode_payload(payload: bytes, n_sites: int, coupling: float, grid: str) -> Optional[np.ndarray]:
    """
    Inverse of encode_payload.

    Returns:
        xx array, or None if the header does not describe (N, lambda, grid)
    """
    values = np.frombuffer(payload, dtype=_DTYPE)
    if len(values) != _HEADER_LEN + n_sites:
        return None
    header = values[:_HEADER_LEN]
    if (header[0] != n_sites or coupling_key(header[1]) != coupling_key(coupling)
            or header[2] != GRID_CODES[grid]):
        return None
    return values[_HEADER_LEN:].astype(float)


def store_correlators(conn: sqlite3.Connection, key: CacheKey, coupling: float, xx: np.ndarray,
                      commit: bool = True) -> None:
    """
    Store the xx correlators of one point, replacing any earlier entry.

    Args:
        conn: Database connection
        key: Cache key of the point
        coupling: Exact lambda (kept in the payload header)
        xx: Correlators xx[0..N-1]
        commit: Commit immediately (batch writers pass False and commit once)
    """
    cursor = conn.cursor()
    cursor.execute('''
        INSERT OR REPLACE INTO correlator_cache (n_sites, coupling_key, grid, engine_version, payload)
        VALUES (?, ?, ?, ?, ?)
    ''', key.as_row() + (encode_payload(key.n_sites, coupling, key.grid, xx),))
    if commit:
        conn.commit()


def load_correlators(conn: sqlite3.Connection, key: CacheKey, coupling: float) -> Optional[np.ndarray]:
    """
    Load the xx correlators of one point.

    Returns:
        xx array, or None on a miss (including a payload whose header disagrees)
    """
    cursor = conn.cursor()
    cursor.execute('''
        SELECT payload FROM correlator_cache
        WHERE n_sites = ? AND coupling_key = ? AND grid = ? AND engine_version = ?
    ''', key.as_row())

    row = cursor.fetchone()
    if row and row['payload']:
        return decode_payload(row['payload'], key.n_sites, coupling, key.grid)

    return None


def load_many(conn: sqlite3.Connection, points: Iterable[Tuple[int, float, str]]) -> Dict[int, np.ndarray]:
    """
    Look up many points.

    Returns:
        Mapping from position in `points` to xx for every hit
    """
    hits = {}
    for i, (n_sites, coupling, grid) in enumerate(points):
        xx = load_correlators(conn, CacheKey.for_point(n_sites, coupling, grid), coupling)
        if xx is not None:
            hits[i] = xx
    return hits


def store_many(conn: sqlite3.Connection, entries: List[Tuple[int, float, str, np.ndarray]]) -> int:
    """Store (N, lambda, grid, xx) entries in one transaction; returns the count."""
    for n_sites, coupling, grid, xx in entries:
        store_correlators(conn, CacheKey.for_point(n_sites, coupling, grid), coupling, xx, commit=False)
    conn.commit()
    return len(entries)


def cache_stats(conn: sqlite3.Connection) -> Dict[str, int]:
    """Entry counts per engine version."""
    cursor = conn.cursor()
    cursor.execute('''
        SELECT engine_version, COUNT(*) AS entries FROM correlator_cache
        GROUP BY engine_version ORDER BY engine_version
    ''')
    return {row['engine_version']: row['entries'] for row in cursor.fetchall()}

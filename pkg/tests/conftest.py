import os
import sys

import pytest

# modules live flat at the repository root
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from spectrum import ChainParams, wick_coefficients  # noqa: E402
from correlators import correlator_table  # noqa: E402


@pytest.fixture
def table_for():
    """Complete correlator table for (N, lambda) on the default grid."""
    def build(n_sites, coupling, **options):
        return correlator_table(wick_coefficients(ChainParams(n_sites, coupling)), **options)
    return build

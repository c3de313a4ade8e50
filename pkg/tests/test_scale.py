"""Decomposition-phase timing on large random graphs (the explicit distribution is excluded)."""

import numpy as np
import pytest

from test_acceptance import _bench

SIZES = (10**5, 10**6, 5 * 10**6)


@pytest.mark.slow
def test_decomposition_phase_scales_subquadratically():
    runs = {m: _bench(m, skip_distribution=True) for m in SIZES}
    failed = {m: r for m, r in runs.items() if isinstance(r, str)}
    assert not failed, failed
    assert runs[10**6]["decompose"] < 60
    assert all(r["peak_rss_mb"] < 2048 for r in runs.values())
    slope = np.polyfit(np.log10(SIZES), np.log10([runs[m]["decompose"] for m in SIZES]), 1)[0]
    assert slope < 1.6

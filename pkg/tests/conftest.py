import pytest

from tactsim.scan import ScanSpec, scan_tau


@pytest.fixture(scope="session")
def scan_cache():
    """Memoized default-window scans shared across the whole session."""
    cache = {}

    def get(j, metric):
        key = (j, metric)
        if key not in cache:
            cache[key] = scan_tau(ScanSpec.auto(j, metric))
        return cache[key]

    return get

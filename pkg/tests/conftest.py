import time

import pytest

from suite_builder import build_suite


@pytest.fixture(scope="session")
def suite():
    """The shared randomized run family, with its wall-clock build time."""
    t0 = time.monotonic()
    runs = build_suite()
    elapsed = time.monotonic() - t0
    return {"runs": runs, "elapsed": elapsed}

"""Environment settings for vexp-solver runs."""

import os
from typing import Final

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Worker parallelism (0 = one worker per CPU)
VEXP_THREADS: Final[int] = int(os.getenv("VEXP_THREADS", "0"))

# Logging
VEXP_LOG_LEVEL: Final[str] = os.getenv("VEXP_LOG_LEVEL", "INFO")

# Default directory for CSV reports and manifests
VEXP_OUTPUT_DIR: Final[str] = os.getenv("VEXP_OUTPUT_DIR", "runs")


def worker_count(requested: int | None = None) -> int:
    """Resolve the number of worker threads.

    Args:
        requested: Explicit cap; falls back to VEXP_THREADS when None.

    Returns:
        A positive worker count.
    """
    value = VEXP_THREADS if requested is None else requested
    if value <= 0:
        return os.cpu_count() or 1
    return value

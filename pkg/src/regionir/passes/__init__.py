"""Optimization passes over the region graph.

Each pass module exposes `run(graph, **options)`; `pipeline` strings
them together and validates the graph between steps.
"""

from . import dne, cne, inv, red, psh, pll, iln, url, ivt  # noqa: F401
from .pipeline import (PASSES, DEFAULT_ORDER, PassConfig,  # noqa: F401
                       PassError, run_pipeline)

"""Natural-language chart queries compiled into in-place chart manipulations.

The package parses a question about an existing chart into a structured
analysis task, plans an ordered list of chart manipulations that answer
it, and executes those manipulations into SVG keyframes.  It also ships
the synthetic dataset generator and the accuracy harness used to score
translation backends, plus an HTTP session service and a CLI.
"""

__version__ = "0.1.0"

from .errors import ChartQueryError

__all__ = ["ChartQueryError", "__version__"]

"""regionir: a demand-driven region-graph compiler middle end.

A CFG-based source IR is translated into a hierarchical data/state
dependence graph, optimized by rewriting, and translated back out.
"""

__version__ = "0.1.0"

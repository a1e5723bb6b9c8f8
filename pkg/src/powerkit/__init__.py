"""powerkit: self-contained statistical power analysis.

Per-test power functions and sample-size solvers, a study-design decision
tree, an interactive what-if session layer, a JSON HTTP API, and a Monte
Carlo oracle that ratifies every closed form.
"""

__version__ = "0.1.0"

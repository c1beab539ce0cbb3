"""finslerlab: numerical curvature analysis for Finsler metrics on a chart.

Evaluates the fundamental tensor, spray, Berwald/Douglas/Riemann-type
curvatures and projective invariants of a metric given as an expression in
(x, y), using exact-to-truncation jet differentiation, and classifies metrics
against the defining equations of the Berwald, Douglas, GDW and related
families.
"""

__version__ = "0.1.0"

from .jets import Jet, JetSpec, lift_coordinate, extract_partial

__all__ = ["Jet", "JetSpec", "lift_coordinate", "extract_partial", "__version__"]

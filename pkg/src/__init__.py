"""
Exact K-stability invariants: toric polygons, torus actions, Futaki invariants
and momentum profiles on the ruled surface
"""

__version__ = "0.1.0"

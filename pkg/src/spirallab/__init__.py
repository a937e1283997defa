"""spirallab: exact and statistical experiments on boundaries of negatively
curved spaces — Laurent-field arithmetic, quadratic irrationals, tree
boundaries with exact cylinder measures, non-backtracking flow statistics,
real-hyperbolic checks and a Borel-Cantelli style dichotomy engine."""

__version__ = "0.1.0"

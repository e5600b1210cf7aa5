"""B-splines with special knot sets, theta-like functions and Mellin transforms."""

__version__ = "0.1.0"

"""p-adic lifting, exact recognition and linear systems on a surface in P^9."""

__version__ = "0.1.0"

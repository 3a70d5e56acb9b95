"""Guaranteed bounds for Fujino-Morley, Crouzeix-Raviart and Lagrange
interpolation error constants on triangles."""

__version__ = "0.1.0"

from .constants import (  # noqa: E402
    ConstantKind,
    ConstantResult,
    SoundnessError,
    constant_bounds,
    constant_lower,
    constant_upper,
)
from .geometry import Triangle, canonical_triangle, refine_uniform  # noqa: E402
from .interval import BoundInterval, parse_rational  # noqa: E402

__all__ = [
    "__version__",
    "BoundInterval",
    "ConstantKind",
    "ConstantResult",
    "SoundnessError",
    "Triangle",
    "canonical_triangle",
    "constant_bounds",
    "constant_lower",
    "constant_upper",
    "parse_rational",
    "refine_uniform",
]

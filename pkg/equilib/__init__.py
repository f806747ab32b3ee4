"""equilib - equilibrium measures on the real line in fields of point charges.

Closed forms for the attractor/repellent pair, signed equilibrium measures
of general charge sets, and a grid oracle that checks both.
"""

__version__ = "0.1.0"

from . import engine, runtime
from .cli import main

__all__ = ["engine", "runtime", "main"]

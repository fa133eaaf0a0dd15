"""Automatic relations: convolution automata, universal projection, the tiling
reduction and Buchi-arithmetic tiling formulas."""

from . import automata, buchi, convolution, filters, reduction, textio, tiling

__all__ = ["automata", "buchi", "convolution", "filters", "reduction", "textio", "tiling"]
__version__ = "0.1.0"

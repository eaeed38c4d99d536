"""Figure generation from fml artifact directories.

Reads only the documented file formats (results.csv, vlasov_compare.csv,
phase-space binaries with JSON sidecars); never imports the simulation
package, so the boundary between the two stays at the file system.
"""

__version__ = "0.1.0"

from .render import FIGURE_KINDS, FigureSpec, SchemaError, render

__all__ = ["FigureSpec", "SchemaError", "render", "FIGURE_KINDS"]

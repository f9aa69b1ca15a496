"""Figure renderer for the closed-loop simulator's CSV outputs."""

from .figures import render, render_fig1, render_fig2, render_fig3, render_fig4
from .schemas import SchemaError

__version__ = "0.1.0"

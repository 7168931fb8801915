"""Figure rendering for agedmimo experiment CSV outputs."""

from .render import RenderResult, render
from .spec import Axis, FigureSpec, SchemaError, Series, load_spec

__version__ = "0.1.0"

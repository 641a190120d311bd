from .figures import FigureSpec, RenderResult, SchemaError, render

__all__ = ["FigureSpec", "RenderResult", "SchemaError", "render"]
__version__ = "0.1.0"

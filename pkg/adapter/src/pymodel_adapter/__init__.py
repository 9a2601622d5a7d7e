"""Reference external backward-model server for the JSON-lines wire protocol.

Wraps a TSV lookup table; meant as the template for wrapping real models
behind the same protocol.  Standard library only.
"""

from .server import AdapterTable, load_table, serve_stdio, serve_tcp

__version__ = "0.1.0"

__all__ = ["AdapterTable", "load_table", "serve_stdio", "serve_tcp"]

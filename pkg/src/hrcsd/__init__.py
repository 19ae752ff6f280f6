"""HR-algebra s-graphs, tree grammars and the CSD string/graph relation."""

__version__ = "0.1.0"

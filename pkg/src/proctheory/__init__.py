"""Executable process theories: matrix and relation categories, CPM,
sub-causal maps, phased coproducts and audits of operational principles."""

__version__ = "0.1.0"

__all__ = ["__version__"]

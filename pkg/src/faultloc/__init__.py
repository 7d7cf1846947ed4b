"""Multi-agent fault localization over coverage spectra, call graphs and test failures."""
from .codegraph import CodeGraph, load_graph, serialize_graph
from .spectra import CoverageMatrix, MethodId, ochiai, parse_spectra, rank_by

__version__ = "0.1.0"

__all__ = ["CodeGraph", "CoverageMatrix", "MethodId", "load_graph", "ochiai", "parse_spectra", "rank_by", "serialize_graph"]

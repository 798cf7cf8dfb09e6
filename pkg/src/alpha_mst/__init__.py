"""Exact solver for minimum spanning trees with angular constraints at every vertex."""
from .bnc import SolveReport, SolveStatus, root_relaxation, solve
from .geometry import Alpha, GeometryTables, build_tables, check_tree
from .instance import Instance, parse_tsplib, read_instance, sub_instance, write_instance
from .model import Cut, CutKind, FormulationKind, FractionalPoint, lpr_bound

__all__ = [
    "Alpha", "Cut", "CutKind", "FormulationKind", "FractionalPoint", "GeometryTables", "Instance",
    "SolveReport", "SolveStatus", "build_tables", "check_tree", "lpr_bound", "parse_tsplib",
    "read_instance", "root_relaxation", "solve", "sub_instance", "write_instance",
]
__version__ = "0.1.0"

"""Dyadic paraproduct laboratory: Wilson Haar systems, weights and embedding checks on [0,1)^n."""

__version__ = "0.1.0"

from dpl.dyadic import DyadicCube, DyadicRectangle, HaarIndex, e_set, pair_sets, verify_partition_properties
from dpl.grid import GridFunction, read_gfn, write_gfn
from dpl.haar import CoefficientTree, TensorHaarIndex, analyze, synthesize, wilson_haar, weighted_wilson_haar
from dpl.report import CharacteristicReport, CheckReport, emit

__all__ = [
    "CharacteristicReport", "CheckReport", "CoefficientTree", "DyadicCube", "DyadicRectangle", "GridFunction",
    "HaarIndex", "TensorHaarIndex", "analyze", "e_set", "emit", "pair_sets", "read_gfn", "synthesize",
    "verify_partition_properties", "weighted_wilson_haar", "wilson_haar", "write_gfn",
]

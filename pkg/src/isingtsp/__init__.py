"""Hierarchical TSP solver built on a behavioral model of crossbar Ising macros."""

from .clustering import Hierarchy, agglomerative_ward, build_hierarchy
from .costmodel import MACRO_COST_TABLE, CostReport, estimate
from .distance import DistanceMatrix, WeightMatrix, build_distance_matrix, quantize_weights, tour_length
from .macro import (
    AnnealSchedule,
    MacroState,
    SpinStorage,
    StochasticModel,
    anneal,
    calibrate_stochastic_model,
    macro_rng,
)
from .oracle import held_karp_cycle, held_karp_path, nearest_neighbor, two_opt
from .solver import SolveConfig, SolveTrace, solve_hierarchical
from .tsplib import Instance, parse_instance, parse_tour, read_instance, read_tour, write_tour

__all__ = [
    "AnnealSchedule",
    "CostReport",
    "DistanceMatrix",
    "Hierarchy",
    "Instance",
    "MACRO_COST_TABLE",
    "MacroState",
    "SolveConfig",
    "SolveTrace",
    "SpinStorage",
    "StochasticModel",
    "WeightMatrix",
    "agglomerative_ward",
    "anneal",
    "build_distance_matrix",
    "build_hierarchy",
    "calibrate_stochastic_model",
    "estimate",
    "held_karp_cycle",
    "held_karp_path",
    "macro_rng",
    "nearest_neighbor",
    "parse_instance",
    "parse_tour",
    "quantize_weights",
    "read_instance",
    "read_tour",
    "solve_hierarchical",
    "tour_length",
    "two_opt",
    "write_tour",
]

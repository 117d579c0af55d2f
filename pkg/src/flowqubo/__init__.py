"""Topology optimization of 2D flow channels with QUBO design updates."""
from .annealer import AnnealConfig, SimulatedAnnealer, SolveResult, get_backend
from .classical import run_classical
from .config import CaseConfig, diffuser_config, double_pipe_config
from .encoding import DesignState, QuboHyperparams, VariableLayout
from .mesh import BoundarySegment, StructuredMesh, build_mesh, tag_benchmark_boundaries
from .optimize import compare, run_annealing_optimization, run_sweep
from .qubo import QuboProblem, brute_force_min, energy
from .stokes import FlowField, SolverError, dissipation_energy, solve_flow

__version__ = "0.1.0"

__all__ = [
    "AnnealConfig",
    "BoundarySegment",
    "CaseConfig",
    "DesignState",
    "FlowField",
    "QuboHyperparams",
    "QuboProblem",
    "SimulatedAnnealer",
    "SolveResult",
    "SolverError",
    "StructuredMesh",
    "VariableLayout",
    "brute_force_min",
    "build_mesh",
    "compare",
    "diffuser_config",
    "dissipation_energy",
    "double_pipe_config",
    "energy",
    "get_backend",
    "run_annealing_optimization",
    "run_classical",
    "run_sweep",
    "solve_flow",
    "tag_benchmark_boundaries",
]

"""QAOA parameter transfer across combinatorial optimization problems.

State-vector QAOA simulation, problem encodings, angle optimization and reuse,
readout mitigation, and annealing-schedule synthesis.
"""

__version__ = "0.1.0"

from .encoding import IsingModel, PenaltyConfig, Qubo, encode, normalize, qubo_to_ising, to_qubo
from .params import QaoaParams
from .problems import ProblemKind, evaluate, generate
from .simulator import QaoaSimulator, evolve, expectation, probability_of, sample

__all__ = [
    "IsingModel", "PenaltyConfig", "ProblemKind", "QaoaParams", "QaoaSimulator", "Qubo",
    "encode", "evaluate", "evolve", "expectation", "generate", "normalize",
    "probability_of", "qubo_to_ising", "sample", "to_qubo", "__version__",
]

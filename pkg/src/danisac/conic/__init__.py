"""Conic-program layer: problem assembly, builders, and the interior-point solver."""

from .builders import (InfeasibleSubproblem, build_block1, build_block2,
                       eta_lower_bound, fit_scaling, matrix_rates)
from .embedding import svec, smat, svec_dim, hermitian_embed, hermitian_extract
from .problem import ConicProblem, CompiledConic
from .solver import ConicSolution, solve

__all__ = [
    "svec",
    "smat",
    "svec_dim",
    "hermitian_embed",
    "hermitian_extract",
    "ConicProblem",
    "CompiledConic",
    "ConicSolution",
    "solve",
    "InfeasibleSubproblem",
    "build_block1",
    "build_block2",
    "fit_scaling",
    "matrix_rates",
    "eta_lower_bound",
]

"""Solvers and eigenvalue-bound certification for three-by-three block
saddle-point systems with inexact block factorization preconditioners."""

__version__ = "0.1.0"

from .backend import backend_name
from .errors import (DimensionError, EigenConvergenceError,
                     HypothesisViolatedError, MatrixMarketError, NotSPDError,
                     NotSupportedError, PivotBreakdownError, TriblockError,
                     UnsupportedFieldError, ValidationError)
from .factorization import CholFactor, factor_spd, ichol_droptol, solve_chol
from .krylov import SolveConfig, SolveReport, gmres
from .precond import (ALL_KIND_TAGS, KINDS, ApproxBlocks, BlockPreconditioner,
                      PreconKind, build_blocks, build_preconditioner,
                      kind_from_tag)
from .problems import (FAMILIES, ProblemSpec, gen_fd_stokes_substitute,
                       gen_image_restoration, gen_poisson_control,
                       gen_random_valid, gen_stokes_modified)
from .sparse import SparseMatrix, as_dense, as_vector, block_matrix, kron
from .spectral import (EigenBox, SpectralEstimates, SpectrumCheck,
                       block_bendixson_box, classic_bendixson_box,
                       estimate_constants, kind_box, selection_box,
                       spectral_equivalent, spectrum_and_check)
from .system import (BlockSystem, HatBlockSystem, assemble_hat_monolithic,
                     assemble_monolithic, hat_to_standard, residual,
                     standard_to_hat, validate)

__all__ = [name for name in dir() if not name.startswith("_")]

"""Engineered chain extensions for perfect encoded state transfer.

Given a spin network with marked input/output vertices, this package
symmetrizes it (mirror-doubling if needed), splits off the
symmetric/antisymmetric subspace blocks, chooses a controlled target
spectrum on a half-integer lattice, solves for a tridiagonal extension
chain realizing it, and verifies the assembled system: exact mirror
symmetry, spectral containment, encoded transfer fidelity at the design
time, and the quality of encoded-state creation from the original
region.

Typical use::

    from spinext import SpinNetwork, design_pipeline

    net = SpinNetwork.chain([1] * 20)
    result = design_pipeline(net, J_prime=1, mode="mirror")
    print(result.fidelity.minimum, result.design.t0)
"""

from .errors import (
    BreakdownAtStep,
    CoincidentRoots,
    ComplexRoots,
    EmptyNullSpace,
    EpsilonTooLarge,
    NegativeJSquared,
    NonPositiveWeight,
    NoParityRepresentative,
    ParityMismatch,
    PoleAt,
    PoleTarget,
    SharedSpectraFatal,
    ShrinkFloorReached,
    SingularSystem,
    SpinextError,
    SymmetryDetectionAmbiguous,
)
from .exact import ExactReal, parse_exact
from .inverse import (
    TridiagonalChain,
    certify_conditions,
    reconstruct_tridiagonal,
    solve_field_free,
    solve_interpolation,
    to_spectral_weights,
)
from .network import (
    Classification,
    SpinNetwork,
    SupportedBlock,
    SymmetrizedSystem,
    build_hamiltonian,
    classify_field_free_even,
    find_involutions,
    supported_blocks,
    symmetrize,
)
from .pipeline import (
    PipelineResult,
    PreparedSystem,
    design_pipeline,
    design_with_targets,
    prepare,
)
from .selector import (
    Target,
    TargetSpectrum,
    check_alternation,
    pair_pinning_select,
    refine_targets_factor5,
    round_to_pst_spectrum,
    verify_distinct_subspace_spectra,
)
from .transfer import (
    TransferDesign,
    assemble,
    build_design,
    containment_residuals,
    creation_rank_check,
    encoded_transfer_fidelity,
    ghz_fidelity,
    state_creation_map,
)
from .trials import draw_couplings, run_trial, run_trials, write_summary_csv

__version__ = "0.1.0"

__all__ = [
    "BreakdownAtStep",
    "Classification",
    "CoincidentRoots",
    "ComplexRoots",
    "EmptyNullSpace",
    "EpsilonTooLarge",
    "ExactReal",
    "NegativeJSquared",
    "NonPositiveWeight",
    "NoParityRepresentative",
    "ParityMismatch",
    "PipelineResult",
    "PoleAt",
    "PoleTarget",
    "PreparedSystem",
    "SharedSpectraFatal",
    "ShrinkFloorReached",
    "SingularSystem",
    "SpinNetwork",
    "SpinextError",
    "SupportedBlock",
    "SymmetrizedSystem",
    "SymmetryDetectionAmbiguous",
    "Target",
    "TargetSpectrum",
    "TransferDesign",
    "TridiagonalChain",
    "assemble",
    "build_design",
    "build_hamiltonian",
    "certify_conditions",
    "check_alternation",
    "classify_field_free_even",
    "containment_residuals",
    "creation_rank_check",
    "design_pipeline",
    "design_with_targets",
    "draw_couplings",
    "encoded_transfer_fidelity",
    "find_involutions",
    "ghz_fidelity",
    "pair_pinning_select",
    "parse_exact",
    "prepare",
    "reconstruct_tridiagonal",
    "refine_targets_factor5",
    "round_to_pst_spectrum",
    "run_trial",
    "run_trials",
    "solve_field_free",
    "solve_interpolation",
    "state_creation_map",
    "supported_blocks",
    "symmetrize",
    "to_spectral_weights",
    "verify_distinct_subspace_spectra",
    "write_summary_csv",
]

"""End-to-end design drivers.

Two entry points cover the two ways a design is produced: automatic
target selection by pair pinning inside a window-shrink loop
(:func:`design_pipeline`), and solving for explicitly chosen target
eigenvalues (:func:`design_with_targets`).  Both run the same back half
— solve, certify, spectral weights, chain reconstruction, assembly,
encoding, fidelity — and return a :class:`PipelineResult` carrying every
intermediate artifact, so reports and files can be produced without
re-deriving anything.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath as mp

from . import precision
from .errors import (
    BreakdownAtStep,
    ComplexRoots,
    CoincidentRoots,
    EmptyNullSpace,
    NegativeJSquared,
    NoParityRepresentative,
    NonPositiveWeight,
    ParityMismatch,
    PoleAt,
    PoleTarget,
    SharedSpectraFatal,
    ShrinkFloorReached,
    SingularSystem,
    SpinextError,
)
from .inverse import (
    Certificate,
    RationalInterpolant,
    SpectralWeights,
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
    classify_field_free_even,
    supported_blocks,
    symmetrize,
)
from .selector import (
    AlternationReport,
    SpectraDistinctness,
    TargetSpectrum,
    check_alternation,
    pair_pinning_select,
    verify_distinct_subspace_spectra,
)
from .transfer import (
    FidelityReport,
    TransferDesign,
    build_design,
    containment_residuals,
    encoded_transfer_fidelity,
)

__all__ = [
    "PreparedSystem",
    "PipelineResult",
    "FIDELITY_GATE",
    "prepare",
    "design_with_targets",
    "design_pipeline",
]

FIDELITY_GATE = mp.mpf("1e-8")

SHRINK_START = Fraction(1, 2)
SHRINK_FLOOR = Fraction(1, 64)


def _working(bits: int | None):
    """Precision context for one driver call.

    An explicit ``bits`` wins; otherwise the ambient precision is used,
    raised to the package default if the caller never touched it (mpmath
    starts at 53 bits, far too little for the reconstruction half).
    """
    n = bits if bits is not None else max(mp.mp.prec, precision.DEFAULT_BITS)
    return precision.bits(n)


class _AttemptFailed(SpinextError):
    """Internal: one shrink-loop attempt failed a quality gate."""


@dataclass(frozen=True, eq=False)
class PreparedSystem:
    """Symmetrized system with its reduced blocks and diagnostics."""

    system: SymmetrizedSystem
    block_plus: SupportedBlock
    block_minus: SupportedBlock
    classification: Classification
    distinctness: SpectraDistinctness


def prepare(net: SpinNetwork, J_prime=1, involution: Sequence[int] | None = None,
            mode: str = "auto", bits: int | None = None) -> PreparedSystem:
    """Symmetrize a network and reduce both blocks to full support."""
    with _working(bits):
        sys_ = symmetrize(net, J_prime=J_prime, involution=involution, mode=mode)
        Cp, Cm = supported_blocks(sys_)
        cls = classify_field_free_even(sys_)
        dist = verify_distinct_subspace_spectra(Cp, Cm)
        return PreparedSystem(system=sys_, block_plus=Cp, block_minus=Cm,
                              classification=cls, distinctness=dist)


@dataclass(frozen=True, eq=False)
class PipelineResult:
    """Everything one design run produced, solve through verification."""

    prepared: PreparedSystem
    spectrum: TargetSpectrum
    interpolant: RationalInterpolant
    certificate: Certificate
    alternation: AlternationReport
    weights: SpectralWeights | None
    chain: TridiagonalChain | None
    design: TransferDesign | None
    fidelity: FidelityReport | None
    attempts: tuple[str, ...] = ()
    shrink: Fraction | None = None

    @property
    def ok(self) -> bool:
        return (self.fidelity is not None
                and self.fidelity.minimum >= 1 - FIDELITY_GATE)

    @property
    def containment(self) -> list:
        """Char-poly residual of every target in the assembled sectors.

        Evaluated at the precision the solve settled on — the two product
        terms cancel to roughly the solve residual, so anything less
        drowns the comparison in evaluation noise.
        """
        with precision.bits(max(mp.mp.prec, self.interpolant.bits)):
            return containment_residuals(
                self.interpolant, self.prepared.block_plus,
                self.prepared.block_minus, self.spectrum)


def _region_size(chain: TridiagonalChain, region_mode: str) -> int | None:
    if region_mode == "auto":
        return None
    if region_mode == "NA":
        return chain.n
    if region_mode == "NA+1":
        return chain.n + 1
    raise ValueError(f"unknown region mode: {region_mode!r}")


def _solve(prep: PreparedSystem, ts: TargetSpectrum, J):
    """Half-size field-free solve when the structure supports it."""
    if J is None and prep.classification.field_free and prep.classification.bipartite:
        try:
            return solve_field_free(prep.block_plus, prep.block_minus, ts)
        except ParityMismatch:
            pass
    return solve_interpolation(prep.block_plus, prep.block_minus, ts, J=J)


def _finish(prep: PreparedSystem, ts: TargetSpectrum, J, region_mode: str,
            attempts: tuple[str, ...], require_certificate: bool = True,
            shrink: Fraction | None = None) -> PipelineResult:
    r = _solve(prep, ts, J)
    cert = certify_conditions(r, q_roots=None)
    alt = check_alternation(ts, prep.block_plus, prep.block_minus)
    if require_certificate and not cert.ok:
        raise _AttemptFailed(f"certificate failed: {cert.witness}")
    w = to_spectral_weights(r, brackets=ts.brackets())
    chain = reconstruct_tridiagonal(w)
    design = build_design(chain, prep.system, r.J, ts,
                          region_size=_region_size(chain, region_mode),
                          blocks=(prep.block_plus, prep.block_minus))
    fid = encoded_transfer_fidelity(design)
    return PipelineResult(prepared=prep, spectrum=ts, interpolant=r,
                          certificate=cert, alternation=alt, weights=w,
                          chain=chain, design=design, fidelity=fid,
                          attempts=attempts, shrink=shrink)


def design_with_targets(net: SpinNetwork, lambda_plus: Sequence,
                        lambda_minus: Sequence = (), J=None, J_prime=1,
                        involution: Sequence[int] | None = None,
                        mode: str = "auto", region_mode: str = "auto",
                        bits: int | None = None) -> PipelineResult:
    """Design against explicitly chosen target values (exact rationals).

    The target lattice is inferred from the values; the solve picks the
    field-free half-size route when the system permits it.  There is no
    retry policy for hand-picked targets: hard failures (non-real roots,
    negative J^2, non-positive weights, ...) raise their own errors, and
    a failed certificate rides along in the result for inspection.
    """
    with _working(bits):
        prep = prepare(net, J_prime=J_prime, involution=involution, mode=mode)
        ts = TargetSpectrum.from_values(lambda_plus, lambda_minus)
        return _finish(prep, ts, J, region_mode, attempts=(),
                       require_certificate=False)


_RETRYABLE = (
    NoParityRepresentative,
    ParityMismatch,
    PoleAt,
    PoleTarget,
    NegativeJSquared,
    SingularSystem,
    NonPositiveWeight,
    ComplexRoots,
    CoincidentRoots,
    BreakdownAtStep,
    EmptyNullSpace,
    _AttemptFailed,
)


def design_pipeline(net: SpinNetwork, J_prime=1,
                    involution: Sequence[int] | None = None,
                    mode: str = "auto",
                    shrink_start: Fraction = SHRINK_START,
                    shrink_floor: Fraction = SHRINK_FLOOR,
                    region_mode: str = "auto",
                    bits: int | None = None) -> PipelineResult:
    """Automatic design by pair pinning with geometric window shrinking.

    Starts at ``shrink_start`` and halves after any failed attempt (no
    admissible lattice point, certification or interlacing failure,
    reconstruction breakdown, sub-threshold fidelity...).  At the floor,
    the failure is classified: shared subspace eigenvalues make the task
    structurally impossible (dark states) and raise SharedSpectraFatal;
    otherwise ShrinkFloorReached carries the last failure.
    """
    if not 0 < shrink_floor <= shrink_start:
        raise ValueError("need 0 < shrink_floor <= shrink_start")
    with _working(bits):
        prep = prepare(net, J_prime=J_prime, involution=involution, mode=mode)
        shrink = shrink_start
        attempts: list[str] = []
        last: Exception | None = None
        while True:
            try:
                ts = pair_pinning_select(prep.block_plus, prep.block_minus,
                                         shrink,
                                         classification=prep.classification)
                alt = check_alternation(ts, prep.block_plus, prep.block_minus)
                if not alt.ok:
                    raise _AttemptFailed(
                        "resolvent signs do not alternate "
                        f"(position {alt.witness})")
                result = _finish(prep, ts, None, region_mode,
                                 attempts=tuple(attempts), shrink=shrink)
                if not result.ok:
                    raise _AttemptFailed(
                        f"fidelity {mp.nstr(result.fidelity.minimum, 12)} "
                        "below the acceptance gate")
                return result
            except _RETRYABLE as exc:
                last = exc
                attempts.append(f"shrink {shrink}: {type(exc).__name__}: {exc}")
                shrink = shrink / 2
                if shrink < shrink_floor:
                    if not prep.distinctness.ok:
                        raise SharedSpectraFatal(prep.distinctness.shared,
                                                 last) from exc
                    raise ShrinkFloorReached(shrink_floor, last) from exc

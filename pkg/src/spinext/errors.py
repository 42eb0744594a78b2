"""Exception types raised across the toolkit.

Everything derives from :class:`SpinextError` so callers can catch the
package's failures in one clause.  Errors that carry diagnostic payloads
(witnesses, offending values) expose them as attributes.
"""

from __future__ import annotations

import mpmath as mp


class SpinextError(Exception):
    """Base class for all toolkit errors."""


# ---------------------------------------------------------------- network


class SymmetryDetectionAmbiguous(SpinextError):
    """Several materially different mirror involutions fit the network.

    ``candidates`` holds the conflicting permutations (tuples mapping
    vertex -> image).
    """

    def __init__(self, candidates):
        self.candidates = list(candidates)
        super().__init__(
            f"{len(self.candidates)} inequivalent mirror involutions found; "
            "pass one explicitly"
        )


class DegenerateSupport(SpinextError):
    """A reduced block kept an eigenvalue with multiplicity > 1."""

    def __init__(self, eigenvalue):
        self.eigenvalue = eigenvalue
        super().__init__(f"degenerate kept eigenvalue {eigenvalue}")


# ---------------------------------------------------------------- spectral


class DimensionTooSmall(SpinextError):
    """Matrix too small for the requested operation (e.g. empty principal part)."""


class PoleAt(SpinextError):
    """Resolvent evaluated at (or numerically on top of) an eigenvalue."""

    def __init__(self, z, eigenvalue):
        self.z = z
        self.eigenvalue = eigenvalue
        super().__init__(f"evaluation point {z} coincides with eigenvalue {eigenvalue}")


class ComplexRoots(SpinextError):
    """A polynomial expected to have a real spectrum has non-real roots."""

    def __init__(self, count, detail=""):
        self.count = count
        super().__init__(f"{count} non-real roots{': ' + detail if detail else ''}")


class CoincidentRoots(SpinextError):
    """Two roots that must stay distinct coincide within tolerance."""

    def __init__(self, r1, r2):
        self.roots = (r1, r2)
        super().__init__(f"coincident roots {r1} and {r2}")


# ---------------------------------------------------------------- selector


class NoParityRepresentative(SpinextError):
    """A pinning window contains no admissible target of the required class."""

    def __init__(self, window, residue):
        self.window = window
        self.residue = residue
        super().__init__(
            f"window {window} has no representative with m = {residue} (mod 4)"
        )


class EpsilonTooLarge(SpinextError):
    """Rounding step exceeds half the smallest spectral gap."""

    def __init__(self, epsilon, min_gap):
        self.epsilon = epsilon
        self.min_gap = min_gap
        super().__init__(f"2*epsilon = {2 * epsilon} >= smallest gap {min_gap}")


# ---------------------------------------------------------------- inverse


class SingularSystem(SpinextError):
    """The interpolation system is rank deficient (targets not independent)."""


class NegativeJSquared(SpinextError):
    """The solved leading coefficient gives J**2 <= 0; no real boundary coupling."""

    def __init__(self, value):
        self.value = value
        super().__init__(f"J^2 = {value} <= 0")


class PoleTarget(SpinextError):
    """A target eigenvalue coincides with a block eigenvalue (resolvent pole)."""

    def __init__(self, target):
        self.target = target
        super().__init__(f"target {target} is an eigenvalue of its block")


class ParityMismatch(SpinextError):
    """Half-size solve requested but the targets are not +/- paired."""


class NonPositiveWeight(SpinextError):
    """A spectral weight came out <= 0 (equivalent to an interlacing failure)."""

    def __init__(self, node, weight):
        self.node = node
        self.weight = weight
        super().__init__(f"weight {weight} at node {node}")


class BreakdownAtStep(SpinextError):
    """Three-term recurrence produced a vanishing off-diagonal entry."""

    def __init__(self, step, value):
        self.step = step
        self.value = value
        super().__init__(f"recurrence breakdown at step {step} (|b| = {value})")


# ---------------------------------------------------------------- transfer


class EmptyNullSpace(SpinextError):
    """Encoding region too small: restricted eigenvectors span the region."""

    def __init__(self, region_size, offender_count):
        self.region_size = region_size
        self.offender_count = offender_count
        super().__init__(
            f"region of {region_size} sites admits no vector orthogonal to "
            f"{offender_count} restricted eigenvectors"
        )


# ---------------------------------------------------------------- pipeline


class ShrinkFloorReached(SpinextError):
    """The window-shrink loop hit its floor without a certified solution."""

    def __init__(self, floor, last_failure):
        self.floor = floor
        self.last_failure = last_failure
        super().__init__(f"shrink floor {floor} reached; last failure: {last_failure}")


class SharedSpectraFatal(SpinextError):
    """Design failed and the symmetry subspaces share eigenvalues (dark states)."""

    def __init__(self, shared, last_failure):
        self.shared = list(shared)
        self.last_failure = last_failure
        values = ", ".join(mp.nstr(mp.mpf(v), 12) for v in self.shared)
        super().__init__(
            f"subspace blocks share eigenvalues [{values}]; no design found "
            f"({last_failure})"
        )
